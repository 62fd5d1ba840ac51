#pragma once

#include "otfs/channel.hpp"
#include "otfs/constellation.hpp"
#include "otfs/esn.hpp"
#include "otfs/pilots.hpp"

#include <optional>
#include <string>
#include <vector>

namespace otfs {

enum class EqualizerKind { rc_interleaved, rc_superimposed, dd_mmse_perfect_csi, tf_lmmse_estimated, none };

struct EqualizerSpec {
  EqualizerKind kind = EqualizerKind::rc_superimposed;
  std::optional<ReservoirConfig> rc;  // input_dim is set per sub-RC
  Index k_rc = 1;

  void validate() const;
};

/// Everything a receiver holds for one frame.
struct FrameObservation {
  PilotScheme scheme = PilotScheme::interleaved;
  PilotPattern pattern;
  Index n_t = 1;
  std::vector<CMat> y;         // DD frame per receive antenna
  std::vector<CMat> x_train;   // interleaved: omega .* X per transmit antenna
  std::vector<CMat> pilot_dd;  // superimposed: sfft(c * omega * phases) per transmit antenna
  double noise_var = 0.0;      // per DD cell (genie)
  double signal_energy = 1.0;  // mean |X|^2 per transmitted cell (genie)
  std::vector<DdKernel> kernels;  // perfect CSI, [rx * n_t + tx]

  Index n_r() const { return static_cast<Index>(y.size()); }
};

struct EqualizerOutput {
  std::vector<CMat> detected;  // quantized data grid per transmit antenna
  std::vector<double> losses;  // delay-search losses of every sub-RC, concatenated
  std::vector<Index> delays;   // chosen delay per sub-RC
  std::vector<double> conditions;
  double train_loss = 0.0;     // mean chosen loss over sub-RCs; 0 for baselines
  std::vector<std::string> warnings;
};

EqualizerOutput equalize_frame(const EqualizerSpec& spec, const FrameObservation& obs, const Constellation& c);

/// Cells that carry data for a scheme: complement of omega (interleaved) or all.
Mask data_mask(PilotScheme scheme, const PilotPattern& p);

/// Soft DD estimate with perfect CSI: per 2D-DFT bin regularized inverse
/// (G^H G + reg I)^-1 G^H y, reg = noise_var / signal_energy.
CMat dd_mmse_estimate(const CMat& y, const DdKernel& h, double reg);
std::vector<CMat> dd_mmse_estimate(const std::vector<CMat>& y, const std::vector<DdKernel>& kernels, Index n_t,
                                   double reg);
CMat dd_mmse_perfect_csi(const CMat& y, const DdKernel& h, double noise_var, const Constellation& c,
                         double signal_energy = 1.0);

/// LS estimates at the pilot cells of a TF grid followed by separable linear
/// interpolation (frequency within each pilot column, then time), constant
/// extrapolation at the edges.
CMat tf_channel_estimate(const CMat& y_tf, const CMat& pilot_tf, const Mask& omega);
// Leave-one-out interpolation error at the pilot cells, less the LS noise share.
// Enters the per-cell MMSE weight next to the noise term.
double tf_estimate_error_var(const CMat& y_tf, const CMat& pilot_tf, const Mask& omega, double noise_var);

/// TF-domain LMMSE on a frame whose pilots occupy omega in the TF domain.
/// Pilot cells are zeroed before returning to DD and quantizing.
CMat tf_lmmse_estimated(const std::vector<CMat>& y, const CMat& pilot_dd, const Mask& omega, double noise_var,
                        const Constellation& c, double signal_energy = 1.0);

struct BerCount {
  std::int64_t errors = 0;
  std::int64_t total = 0;
  double rate() const { return total > 0 ? static_cast<double>(errors) / static_cast<double>(total) : 0.0; }
};

BerCount ber(std::span<const std::uint8_t> detected, std::span<const std::uint8_t> truth);

/// Bits of the symbols on the mask, column-major.
std::vector<std::uint8_t> grid_bits(const CMat& symbols, const Mask& mask, const Constellation& c);

std::string to_string(EqualizerKind k);
EqualizerKind equalizer_kind_from_string(const std::string& s);

}  // namespace otfs
