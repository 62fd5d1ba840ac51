#include "otfs/channel.hpp"

#include "otfs/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace otfs {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

Index PathList::max_delay() const {
  Index d = 0;
  for (const auto& p : paths) d = std::max(d, p.delay_samples);
  return d;
}

void PathList::validate(const WaveformConfig& cfg) const {
  for (const auto& p : paths) {
    if (p.delay_samples < 0 || p.delay_samples >= cfg.m) throw Error("path delay out of grid range");
    if (!std::isfinite(p.doppler_hz) || std::abs(p.doppler_hz) > max_doppler_hz * (1.0 + 1e-12)) {
      throw Error("path Doppler exceeds max_doppler_hz");
    }
    if (!std::isfinite(p.gain.real()) || !std::isfinite(p.gain.imag())) throw Error("path gain not finite");
  }
}

DdKernel DdKernel::identity(Index m, Index n) { return from_taps(m, n, {{0, 0, cplx(1.0)}}); }

DdKernel DdKernel::from_taps(Index m, Index n, const std::vector<KernelTap>& taps) {
  DdKernel h{CMat::Zero(m, n)};
  const double scale = static_cast<double>(m * n);
  for (const auto& t : taps) {
    if (t.delay_idx < 0 || t.delay_idx >= m || t.doppler_idx < 0 || t.doppler_idx >= n) {
      throw Error("kernel tap index out of range");
    }
    h.values(t.delay_idx, t.doppler_idx) += scale * t.gain;
  }
  return h;
}

DdKernel kernel_from_paths(const PathList& p, const WaveformConfig& cfg) {
  cfg.validate();
  const Index m = cfg.m, n = cfg.n;
  const double dt = cfg.delta_t();
  const double centre = static_cast<double>(m - 1) / (2.0 * static_cast<double>(m)) * dt;
  DdKernel h{CMat::Zero(m, n)};
  CVec samples(n);
  for (const auto& path : p.paths) {
    if (path.delay_samples < 0 || path.delay_samples >= m) throw Error("kernel_from_paths: delay out of grid range");
    for (Index i = 0; i < n; ++i) {
      samples(i) = std::polar(1.0, kTwoPi * path.doppler_hz * (static_cast<double>(i) * dt + centre));
    }
    // unitary DFT carries 1/sqrt(n); the column wants (1/n) * DFT * n*m
    const CVec col = dft_matrix<double>(n, -1) * samples;
    h.values.row(path.delay_samples) += (path.gain * static_cast<double>(m) * std::sqrt(static_cast<double>(n))) *
                                        col.transpose();
  }
  return h;
}

CMat apply_dd_kernel(const CMat& x, const DdKernel& h) {
  if (x.rows() != h.values.rows() || x.cols() != h.values.cols()) throw Error("apply_dd_kernel: shape mismatch");
  const double root = std::sqrt(static_cast<double>(x.size()));
  const CMat g = spectrum2(h.values) / root;
  return inverse_spectrum2((spectrum2(x).array() * g.array()).matrix());
}

CMat apply_dd_kernel_direct(const CMat& x, const DdKernel& h) {
  if (x.rows() != h.values.rows() || x.cols() != h.values.cols()) throw Error("apply_dd_kernel: shape mismatch");
  const Index m = x.rows(), n = x.cols();
  CMat y = CMat::Zero(m, n);
  for (Index l = 0; l < m; ++l) {
    for (Index k = 0; k < n; ++k) {
      cplx acc = 0.0;
      for (Index lp = 0; lp < m; ++lp) {
        for (Index kp = 0; kp < n; ++kp) {
          acc += x(lp, kp) * h.values((l - lp + m) % m, (k - kp + n) % n);
        }
      }
      y(l, k) = acc / static_cast<double>(m * n);
    }
  }
  return y;
}

CMat tf_response(const DdKernel& h) {
  return isfft(h.values) / std::sqrt(static_cast<double>(h.values.size()));
}

CVec apply_tdl(const CVec& samples, const PathList& p, double t0, double sample_rate) {
  if (samples.size() == 0) throw Error("apply_tdl: empty input");
  const Index len = samples.size();
  CVec out = CVec::Zero(len);
  for (const auto& path : p.paths) {
    const Index d = path.delay_samples;
    for (Index i = d; i < len; ++i) {
      const double t = t0 + static_cast<double>(i) / sample_rate;
      out(i) += path.gain * samples(i - d) * std::polar(1.0, kTwoPi * path.doppler_hz * t);
    }
  }
  return out;
}

double mean_power(const CVec& samples) {
  if (samples.size() == 0) throw Error("mean_power: empty input");
  return samples.squaredNorm() / static_cast<double>(samples.size());
}

CVec add_noise(const CVec& samples, double noise_var, Rng& rng) {
  if (!(noise_var >= 0.0)) throw Error("add_noise: negative variance");
  std::normal_distribution<double> gauss(0.0, std::sqrt(noise_var / 2.0));
  CVec out = samples;
  for (Index i = 0; i < out.size(); ++i) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    out(i) += cplx(re, im);
  }
  return out;
}

NoisyVector add_awgn(const CVec& samples, double snr_db, Rng& rng) {
  if (samples.size() == 0) throw Error("add_awgn: empty input");
  if (std::isinf(snr_db) && snr_db > 0) return {samples, 0.0};
  if (!std::isfinite(snr_db)) throw Error("add_awgn: snr_db must be finite or +inf");
  const double p = mean_power(samples);
  if (!(p > 0.0)) throw Error("add_awgn: zero-power input");
  const double var = p / std::pow(10.0, snr_db / 10.0);
  return {add_noise(samples, var, rng), var};
}

void MimoConfig::validate() const {
  if (n_t < 1 || n_r < 1) throw Error("mimo: n_t and n_r must be >= 1");
  if (static_cast<Index>(links.size()) != n_t * n_r) throw Error("mimo: link count must equal n_t * n_r");
}

std::vector<CMat> apply_mimo(const std::vector<CMat>& x, const std::vector<DdKernel>& kernels, Index n_r) {
  const auto n_t = static_cast<Index>(x.size());
  if (n_t < 1 || n_r < 1 || static_cast<Index>(kernels.size()) != n_t * n_r) {
    throw Error("apply_mimo: shape mismatch");
  }
  std::vector<CMat> y;
  y.reserve(static_cast<std::size_t>(n_r));
  for (Index r = 0; r < n_r; ++r) {
    CMat acc = CMat::Zero(x[0].rows(), x[0].cols());
    for (Index t = 0; t < n_t; ++t) {
      acc += apply_dd_kernel(x[static_cast<std::size_t>(t)], kernels[static_cast<std::size_t>(r * n_t + t)]);
    }
    y.push_back(std::move(acc));
  }
  return y;
}

std::vector<CVec> apply_mimo(const std::vector<CVec>& s, const MimoConfig& cfg, double t0, double sample_rate) {
  cfg.validate();
  if (static_cast<Index>(s.size()) != cfg.n_t) throw Error("apply_mimo: transmit stream count mismatch");
  std::vector<CVec> y;
  for (Index r = 0; r < cfg.n_r; ++r) {
    CVec acc = CVec::Zero(s[0].size());
    for (Index t = 0; t < cfg.n_t; ++t) {
      const auto& st = s[static_cast<std::size_t>(t)];
      if (st.size() != acc.size()) throw Error("apply_mimo: stream length mismatch");
      acc += apply_tdl(st, cfg.link(r, t), t0, sample_rate);
    }
    y.push_back(std::move(acc));
  }
  return y;
}

std::vector<DdKernel> kernels_from_mimo(const MimoConfig& cfg, const WaveformConfig& wf) {
  cfg.validate();
  std::vector<DdKernel> out;
  for (const auto& link : cfg.links) out.push_back(kernel_from_paths(link, wf));
  return out;
}

PathList generate_paths(const ChannelGenerator& gen, Rng& rng) {
  if (gen.n_paths < 1) throw Error("channel generator: n_paths must be >= 1");
  if (gen.delay_spread_samples < 0) throw Error("channel generator: delay_spread_samples must be >= 0");
  if (!(gen.max_doppler_hz >= 0.0)) throw Error("channel generator: max_doppler_hz must be >= 0");
  const auto n = static_cast<std::size_t>(gen.n_paths);
  const Index spread = gen.delay_spread_samples;

  std::vector<Index> delays(n, 0);
  if (spread > 0 && n > 1) {
    std::vector<Index> pool(static_cast<std::size_t>(spread));
    std::iota(pool.begin(), pool.end(), Index{1});
    if (pool.size() >= n - 1) {
      // partial Fisher-Yates: distinct delays
      for (std::size_t i = 0; i + 1 < n; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
        delays[i + 1] = pool[i];
      }
    } else {
      std::uniform_int_distribution<Index> pick(1, spread);
      for (std::size_t i = 1; i < n; ++i) delays[i] = pick(rng);
    }
    std::sort(delays.begin() + 1, delays.end());
  }

  std::vector<double> power(n, 1.0);
  if (gen.profile == PowerProfile::exponential) {
    const double tau = std::max(1.0, static_cast<double>(spread) / 2.0);
    for (std::size_t i = 0; i < n; ++i) power[i] = std::exp(-static_cast<double>(delays[i]) / tau);
  }
  const double total = std::accumulate(power.begin(), power.end(), 0.0);

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  PathList out;
  out.max_doppler_hz = gen.max_doppler_hz;
  for (std::size_t i = 0; i < n; ++i) {
    const double amp = std::sqrt(power[i] / total / 2.0);
    const double re = gauss(rng);
    const double im = gauss(rng);
    const double nu = gen.max_doppler_hz * std::cos(angle(rng));
    out.paths.push_back({delays[i], nu, cplx(amp * re, amp * im)});
  }
  return out;
}

std::string to_string(PowerProfile p) { return p == PowerProfile::exponential ? "exponential" : "uniform"; }

PowerProfile power_profile_from_string(const std::string& s) {
  if (s == "exponential") return PowerProfile::exponential;
  if (s == "uniform") return PowerProfile::uniform;
  throw Error("unknown power profile '" + s + "'");
}

}  // namespace otfs
