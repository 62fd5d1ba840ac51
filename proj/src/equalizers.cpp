#include "otfs/equalizers.hpp"

#include "otfs/transforms.hpp"

#include <cmath>
#include <numeric>
#include <set>

namespace otfs {

void EqualizerSpec::validate() const {
  if (k_rc < 1) throw Error("equalizer: k_rc must be >= 1");
  const bool is_rc = kind == EqualizerKind::rc_interleaved || kind == EqualizerKind::rc_superimposed;
  if (is_rc && !rc) throw Error("equalizer: RC kinds need a reservoir config");
}

Mask data_mask(PilotScheme scheme, const PilotPattern& p) {
  return scheme == PilotScheme::interleaved ? p.complement() : Mask::Constant(p.rows(), p.cols(), true);
}

namespace {

struct SoftEstimate {
  CMat stacked;  // M*n_t rows
  std::vector<TrainResult> trained;
};

SoftEstimate rc_soft(const FrameDataset& ds, Index n_t, Index n_r, Index k, const ReservoirConfig& base) {
  SoftEstimate out;
  if (k == 1) {
    // plain DD-domain RC: step l sees row l of every receive antenna
    ReservoirConfig cfg = base;
    cfg.input_dim = n_r * ds.y_train.cols();
    const Reservoir r(cfg);
    const CMat x_seq = to_sequence(ds.x_train, n_t);
    Mask mask_seq(x_seq.rows(), x_seq.cols());
    const Index m = x_seq.rows(), n = ds.x_train.cols();
    for (Index b = 0; b < n_t; ++b) mask_seq.middleCols(b * n, n) = ds.fit_mask.middleRows(b * m, m);
    auto t = train_with_delay_search(r, to_sequence(ds.y_train, n_r), x_seq, mask_seq);
    out.stacked = from_sequence(rc_estimate(r, to_sequence(ds.y_test, n_r), t), n_t);
    out.trained.push_back(std::move(t));
    return out;
  }
  const auto part = partition_multi_rc(ds, n_t, n_r, k);
  std::vector<CMat> estimates;
  for (std::size_t g = 0; g < part.groups.size(); ++g) {
    const auto& sub = part.groups[g];
    ReservoirConfig cfg = base;
    cfg.input_dim = sub.y_train.cols();
    cfg.seed = base.seed + g;
    const Reservoir r(cfg);
    auto t = train_with_delay_search(r, sub.y_train, sub.x_train, sub.fit_mask);
    estimates.push_back(rc_estimate(r, sub.y_test, t));
    out.trained.push_back(std::move(t));
  }
  out.stacked = merge_multi_rc(part, estimates);
  return out;
}

void check_antennas(const FrameObservation& obs) {
  if (obs.n_t < 1 || obs.y.empty()) throw Error("equalizer: need at least one antenna on each side");
  for (const auto& y : obs.y) {
    if (y.rows() != obs.pattern.rows() || y.cols() != obs.pattern.cols()) throw Error("equalizer: frame shape mismatch");
  }
}

const std::vector<CMat>& pilots_or_throw(const FrameObservation& obs) {
  if (obs.scheme != PilotScheme::superimposed || static_cast<Index>(obs.pilot_dd.size()) != obs.n_t) {
    throw Error("equalizer: superimposed pilot frames missing");
  }
  return obs.pilot_dd;
}

std::vector<CMat> quantize_all(const std::vector<CMat>& soft, const FrameObservation& obs, const Constellation& c) {
  std::vector<CMat> out;
  for (std::size_t t = 0; t < soft.size(); ++t) {
    const CMat* pilot = obs.scheme == PilotScheme::superimposed ? &obs.pilot_dd.at(t) : nullptr;
    out.push_back(detect(soft[t], obs.scheme, c, pilot));
  }
  return out;
}

}  // namespace

EqualizerOutput equalize_frame(const EqualizerSpec& spec, const FrameObservation& obs, const Constellation& c) {
  spec.validate();
  check_antennas(obs);
  obs.pattern.validate();
  const Index n_t = obs.n_t, n_r = obs.n_r();
  EqualizerOutput out;

  switch (spec.kind) {
    case EqualizerKind::rc_interleaved:
    case EqualizerKind::rc_superimposed: {
      const bool inter = spec.kind == EqualizerKind::rc_interleaved;
      if (inter != (obs.scheme == PilotScheme::interleaved)) throw Error("equalizer: scheme does not match equalizer kind");
      std::vector<FrameDataset> per_rx;
      std::vector<CMat> targets;
      if (inter) {
        if (static_cast<Index>(obs.x_train.size()) != n_t) throw Error("equalizer: interleaved pilots missing");
        for (const auto& y : obs.y) per_rx.push_back(extract_interleaved(y, obs.x_train[0], obs.pattern));
        for (const auto& x : obs.x_train) targets.push_back(masked(x, obs.pattern.omega));
      } else {
        const auto& pilots = pilots_or_throw(obs);
        for (const auto& y : obs.y) per_rx.push_back(extract_superimposed(y, pilots[0], obs.pattern));
        targets = pilots;
      }
      const FrameDataset ds = stack_mimo(per_rx, targets);
      const auto soft = rc_soft(ds, n_t, n_r, spec.k_rc, *spec.rc);
      out.detected = quantize_all(unstack_blocks(soft.stacked, n_t), obs, c);
      double loss_sum = 0.0;
      for (const auto& t : soft.trained) {
        out.losses.insert(out.losses.end(), t.losses.begin(), t.losses.end());
        out.delays.push_back(t.delay);
        out.conditions.push_back(t.condition);
        out.warnings.insert(out.warnings.end(), t.warnings.begin(), t.warnings.end());
        loss_sum += t.losses[static_cast<std::size_t>(t.delay)];
      }
      out.train_loss = loss_sum / static_cast<double>(soft.trained.size());
      break;
    }
    case EqualizerKind::dd_mmse_perfect_csi: {
      if (static_cast<Index>(obs.kernels.size()) != n_t * n_r) throw Error("equalizer: perfect CSI kernels missing");
      if (obs.scheme == PilotScheme::superimposed) pilots_or_throw(obs);
      const double reg = obs.noise_var / obs.signal_energy;
      out.detected = quantize_all(dd_mmse_estimate(obs.y, obs.kernels, n_t, reg), obs, c);
      break;
    }
    case EqualizerKind::tf_lmmse_estimated: {
      if (n_t != 1) throw Error("equalizer: tf_lmmse_estimated supports a single transmit antenna");
      const auto& pilots = pilots_or_throw(obs);
      out.detected.push_back(
          tf_lmmse_estimated(obs.y, pilots[0], obs.pattern.omega, obs.noise_var, c, obs.signal_energy));
      break;
    }
    case EqualizerKind::none: {
      if (n_r < n_t) throw Error("equalizer: 'none' needs one receive antenna per transmit antenna");
      std::vector<CMat> raw(obs.y.begin(), obs.y.begin() + n_t);
      if (obs.scheme == PilotScheme::superimposed) pilots_or_throw(obs);
      out.detected = quantize_all(raw, obs, c);
      break;
    }
  }
  return out;
}

std::vector<CMat> dd_mmse_estimate(const std::vector<CMat>& y, const std::vector<DdKernel>& kernels, Index n_t,
                                   double reg) {
  const auto n_r = static_cast<Index>(y.size());
  if (n_r < 1 || n_t < 1 || static_cast<Index>(kernels.size()) != n_r * n_t) throw Error("dd_mmse: shape mismatch");
  if (!(reg >= 0.0)) throw Error("dd_mmse: negative regularization");
  const Index m = y[0].rows(), n = y[0].cols();
  const double root = std::sqrt(static_cast<double>(m * n));
  std::vector<CMat> g, yf;
  for (const auto& k : kernels) {
    if (k.values.rows() != m || k.values.cols() != n) throw Error("dd_mmse: kernel shape mismatch");
    g.push_back(spectrum2(k.values) / root);
  }
  for (const auto& yr : y) {
    if (yr.rows() != m || yr.cols() != n) throw Error("dd_mmse: frame shape mismatch");
    yf.push_back(spectrum2(yr));
  }
  std::vector<CMat> xf(static_cast<std::size_t>(n_t), CMat::Zero(m, n));
  CMat gb(n_r, n_t);
  CVec yb(n_r);
  for (Index q = 0; q < n; ++q) {
    for (Index p = 0; p < m; ++p) {
      for (Index r = 0; r < n_r; ++r) {
        yb(r) = yf[static_cast<std::size_t>(r)](p, q);
        for (Index t = 0; t < n_t; ++t) gb(r, t) = g[static_cast<std::size_t>(r * n_t + t)](p, q);
      }
      CMat a = gb.adjoint() * gb;
      a.diagonal().array() += reg;
      // reg = 0 with a null bin: fall back to the min-norm solution
      const CVec xb = reg > 0.0 ? CVec(a.ldlt().solve(gb.adjoint() * yb))
                                : CVec(gb.completeOrthogonalDecomposition().solve(yb));
      for (Index t = 0; t < n_t; ++t) xf[static_cast<std::size_t>(t)](p, q) = xb(t);
    }
  }
  std::vector<CMat> out;
  for (const auto& x : xf) out.push_back(inverse_spectrum2(x));
  return out;
}

CMat dd_mmse_estimate(const CMat& y, const DdKernel& h, double reg) { return dd_mmse_estimate({y}, {h}, 1, reg)[0]; }

CMat dd_mmse_perfect_csi(const CMat& y, const DdKernel& h, double noise_var, const Constellation& c,
                         double signal_energy) {
  return c.quantize(dd_mmse_estimate(y, h, noise_var / signal_energy));
}

namespace {

// Linear interpolation of (pos, val) samples at 0..len-1, constant beyond the ends.
void interp_line(const std::vector<Index>& pos, const std::vector<cplx>& val, Index len, CVec& out) {
  out.resize(len);
  std::size_t j = 0;
  for (Index i = 0; i < len; ++i) {
    if (pos.size() == 1 || i <= pos.front()) {
      out(i) = val.front();
      continue;
    }
    if (i >= pos.back()) {
      out(i) = val.back();
      continue;
    }
    while (pos[j + 1] < i) ++j;
    const double f = static_cast<double>(i - pos[j]) / static_cast<double>(pos[j + 1] - pos[j]);
    out(i) = (1.0 - f) * val[j] + f * val[j + 1];
  }
}

}  // namespace

CMat tf_channel_estimate(const CMat& y_tf, const CMat& pilot_tf, const Mask& omega) {
  const Index m = y_tf.rows(), n = y_tf.cols();
  if (pilot_tf.rows() != m || pilot_tf.cols() != n || omega.rows() != m || omega.cols() != n) {
    throw Error("tf_channel_estimate: shape mismatch");
  }
  std::set<Index> rows, cols;
  for (Index k = 0; k < n; ++k) {
    for (Index l = 0; l < m; ++l) {
      if (omega(l, k)) {
        if (std::abs(pilot_tf(l, k)) == 0.0) throw Error("tf_channel_estimate: zero pilot value");
        rows.insert(l);
        cols.insert(k);
      }
    }
  }
  if (rows.size() < 2 || cols.size() < 2) {
    throw Error("tf_channel_estimate: need pilots on at least two distinct rows and two distinct columns");
  }
  CMat h(m, n);
  CVec line;
  std::vector<Index> pilot_cols(cols.begin(), cols.end());
  for (Index k : pilot_cols) {
    std::vector<Index> pos;
    std::vector<cplx> val;
    for (Index l = 0; l < m; ++l) {
      if (omega(l, k)) {
        pos.push_back(l);
        val.push_back(y_tf(l, k) / pilot_tf(l, k));
      }
    }
    interp_line(pos, val, m, line);
    h.col(k) = line;
  }
  for (Index l = 0; l < m; ++l) {
    std::vector<cplx> val;
    for (Index k : pilot_cols) val.push_back(h(l, k));
    interp_line(pilot_cols, val, n, line);
    h.row(l) = line.transpose();
  }
  return h;
}

double tf_estimate_error_var(const CMat& y_tf, const CMat& pilot_tf, const Mask& omega, double noise_var) {
  Mask held = omega;
  double err = 0.0, ls_noise = 0.0;
  Index used = 0;
  for (Index k = 0; k < omega.cols(); ++k) {
    for (Index l = 0; l < omega.rows(); ++l) {
      if (!omega(l, k)) continue;
      held(l, k) = false;
      try {
        const cplx guess = tf_channel_estimate(y_tf, pilot_tf, held)(l, k);
        err += std::norm(guess - y_tf(l, k) / pilot_tf(l, k));
        ls_noise += noise_var / std::norm(pilot_tf(l, k));
        ++used;
      } catch (const Error&) {
        // too few pilots left to interpolate without this one
      }
      held(l, k) = true;
    }
  }
  if (used == 0) return 0.0;
  return std::max(0.0, (err - ls_noise) / static_cast<double>(used));
}

CMat tf_lmmse_estimated(const std::vector<CMat>& y, const CMat& pilot_dd, const Mask& omega, double noise_var,
                        const Constellation& c, double signal_energy) {
  if (y.empty()) throw Error("tf_lmmse: no receive antenna");
  const CMat pilot_tf = isfft(pilot_dd);
  const double reg = noise_var / signal_energy;
  Eigen::ArrayXXcd num = Eigen::ArrayXXcd::Zero(omega.rows(), omega.cols());
  Eigen::ArrayXXd den = Eigen::ArrayXXd::Constant(omega.rows(), omega.cols(), reg);
  for (const auto& yr : y) {
    const CMat y_tf = isfft(yr);
    const CMat h = tf_channel_estimate(y_tf, pilot_tf, omega);
    num += h.array().conjugate() * y_tf.array();
    den += h.array().abs2() + tf_estimate_error_var(y_tf, pilot_tf, omega, noise_var);
  }
  const CMat x_tf = (num / den.cast<cplx>()).matrix();
  return c.quantize(sfft(masked(x_tf, !omega)));
}

BerCount ber(std::span<const std::uint8_t> detected, std::span<const std::uint8_t> truth) {
  if (detected.size() != truth.size()) throw Error("ber: length mismatch");
  BerCount b;
  b.total = static_cast<std::int64_t>(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) b.errors += (detected[i] & 1u) != (truth[i] & 1u);
  return b;
}

std::vector<std::uint8_t> grid_bits(const CMat& symbols, const Mask& mask, const Constellation& c) {
  if (symbols.rows() != mask.rows() || symbols.cols() != mask.cols()) throw Error("grid_bits: shape mismatch");
  std::vector<std::uint8_t> out;
  for (Index k = 0; k < symbols.cols(); ++k) {
    for (Index l = 0; l < symbols.rows(); ++l) {
      if (mask(l, k)) c.append_bits(c.quantize_index(symbols(l, k)), out);
    }
  }
  return out;
}

std::string to_string(EqualizerKind k) {
  switch (k) {
    case EqualizerKind::rc_interleaved: return "rc_interleaved";
    case EqualizerKind::rc_superimposed: return "rc_superimposed";
    case EqualizerKind::dd_mmse_perfect_csi: return "dd_mmse_perfect_csi";
    case EqualizerKind::tf_lmmse_estimated: return "tf_lmmse_estimated";
    case EqualizerKind::none: return "none";
  }
  return "?";
}

EqualizerKind equalizer_kind_from_string(const std::string& s) {
  for (auto k : {EqualizerKind::rc_interleaved, EqualizerKind::rc_superimposed, EqualizerKind::dd_mmse_perfect_csi,
                 EqualizerKind::tf_lmmse_estimated, EqualizerKind::none}) {
    if (to_string(k) == s) return k;
  }
  throw Error("unknown equalizer kind '" + s + "'");
}

}  // namespace otfs
