#pragma once

#include "otfs/types.hpp"

#include <limits>
#include <random>
#include <vector>

namespace otfs {

using Rng = std::mt19937_64;

struct Path {
  Index delay_samples = 0;
  double doppler_hz = 0.0;
  cplx gain{1.0, 0.0};
};

struct PathList {
  std::vector<Path> paths;
  double max_doppler_hz = 0.0;

  Index max_delay() const;
  // Delays must fit the CP (d <= cp_len) and Dopplers the declared maximum.
  void validate(const WaveformConfig& cfg) const;
};

struct KernelTap {
  Index doppler_idx = 0;
  Index delay_idx = 0;
  cplx gain{1.0, 0.0};
};

/// Channel response on the DD grid, rows = delay l', cols = Doppler k'.
/// Scaled so that a unit channel is m*n at (0, 0).
struct DdKernel {
  CMat values;

  static DdKernel identity(Index m, Index n);
  static DdKernel from_taps(Index m, Index n, const std::vector<KernelTap>& taps);
};

/// Sample a path list on the grid. Delay bins are exact; each path's Doppler
/// column is the N-point DFT of exp(j2*pi*nu*t_n) at the pulse centres
/// t_n = n*dT + (m-1)/(2m)*dT, so off-grid Doppler leaks across the column.
DdKernel kernel_from_paths(const PathList& p, const WaveformConfig& cfg);

/// y = (1/NM) * 2D circular convolution of x with h, via the 2D DFT.
CMat apply_dd_kernel(const CMat& x, const DdKernel& h);
/// Same result by direct summation. O((MN)^2); for checks and small grids.
CMat apply_dd_kernel_direct(const CMat& x, const DdKernel& h);

/// Per-cell multiplicative response in the TF domain:
/// isfft(apply_dd_kernel(x, h)) == isfft(x) .* tf_response(h).
CMat tf_response(const DdKernel& h);

/// Tapped delay line with per-path Doppler. t0 is the time of sample 0.
CVec apply_tdl(const CVec& samples, const PathList& p, double t0, double sample_rate);

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

struct NoisyVector {
  CVec samples;
  double noise_var = 0.0;
};

/// Circular complex Gaussian noise, variance = measured power / 10^(snr/10).
/// snr_db = +inf returns the input untouched.
NoisyVector add_awgn(const CVec& samples, double snr_db, Rng& rng);

/// Noise at a given variance (shared across MIMO receive antennas).
CVec add_noise(const CVec& samples, double noise_var, Rng& rng);

double mean_power(const CVec& samples);

/// Links indexed [rx * n_t + tx].
struct MimoConfig {
  Index n_t = 1;
  Index n_r = 1;
  std::vector<PathList> links;

  const PathList& link(Index rx, Index tx) const { return links.at(static_cast<std::size_t>(rx * n_t + tx)); }
  void validate() const;
};

std::vector<CMat> apply_mimo(const std::vector<CMat>& x, const std::vector<DdKernel>& kernels, Index n_r);
std::vector<CVec> apply_mimo(const std::vector<CVec>& s, const MimoConfig& cfg, double t0, double sample_rate);
std::vector<DdKernel> kernels_from_mimo(const MimoConfig& cfg, const WaveformConfig& wf);

enum class PowerProfile { exponential, uniform };

struct ChannelGenerator {
  Index n_paths = 6;
  Index delay_spread_samples = 0;
  double max_doppler_hz = 555.0;
  PowerProfile profile = PowerProfile::exponential;
};

/// Random path list: first path at delay 0, the rest at distinct delays in
/// [1, spread] when possible; exponential or flat PDP normalized to unit
/// expected power; Rayleigh gains; Doppler nu_max*cos(theta).
PathList generate_paths(const ChannelGenerator& gen, Rng& rng);

std::string to_string(PowerProfile p);
PowerProfile power_profile_from_string(const std::string& s);

}  // namespace otfs
