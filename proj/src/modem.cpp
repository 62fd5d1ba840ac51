#include "otfs/modem.hpp"

#include "otfs/transforms.hpp"

namespace otfs {

std::string to_string(FrameStructure s) { return s == FrameStructure::standalone ? "standalone" : "overlay"; }

FrameStructure frame_structure_from_string(const std::string& s) {
  if (s == "standalone") return FrameStructure::standalone;
  if (s == "overlay") return FrameStructure::overlay;
  throw Error("unknown frame structure '" + s + "'");
}

Index frame_length(const WaveformConfig& cfg) {
  return cfg.structure == FrameStructure::standalone ? cfg.cp_len + cfg.m * cfg.n : cfg.n * (cfg.cp_len + cfg.m);
}

namespace {

void check_shape(const CMat& x, const WaveformConfig& cfg) {
  if (x.rows() != cfg.m || x.cols() != cfg.n) throw Error("modulate: frame shape does not match waveform config");
}

}  // namespace

CVec modulate(const CMat& x, const WaveformConfig& cfg) {
  cfg.validate();
  check_shape(x, cfg);
  // ISFFT followed by a per-column m-point inverse DFT collapses to an
  // inverse DFT along Doppler; column n' holds the samples of pulse n'.
  const CMat core = inverse_row_dft(x);
  const Index m = cfg.m, cp = cfg.cp_len;
  CVec out(frame_length(cfg));
  if (cfg.structure == FrameStructure::standalone) {
    const auto flat = core.reshaped();
    out.head(cp) = flat.tail(cp);
    out.tail(m * cfg.n) = flat;
  } else {
    for (Index c = 0; c < cfg.n; ++c) {
      auto block = out.segment(c * (cp + m), cp + m);
      block.head(cp) = core.col(c).tail(cp);
      block.tail(m) = core.col(c);
    }
  }
  return out;
}

CMat demodulate(const CVec& samples, const WaveformConfig& cfg) {
  cfg.validate();
  if (samples.size() != frame_length(cfg)) throw Error("demodulate: sample count does not match frame structure");
  const Index m = cfg.m, cp = cfg.cp_len;
  CMat core(m, cfg.n);
  if (cfg.structure == FrameStructure::standalone) {
    core.reshaped() = samples.tail(m * cfg.n);
  } else {
    for (Index c = 0; c < cfg.n; ++c) core.col(c) = samples.segment(c * (cp + m) + cp, m);
  }
  return row_dft(core);
}

}  // namespace otfs
