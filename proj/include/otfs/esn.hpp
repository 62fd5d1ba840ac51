#pragma once

#include "otfs/constellation.hpp"
#include "otfs/pilots.hpp"
#include "otfs/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace otfs {

struct ReservoirConfig {
  Index state_dim = 8;
  Index input_dim = 14;
  Index window_len = 20;
  double spectral_radius = 0.9;
  double input_scale = 0.3;
  double ridge = 1e-4;  // relative to mean(diag(S^H S)); 0 = plain pseudoinverse
  Index l_forget = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Echo-state network with a real Gaussian transition matrix acting on
/// [state; windowed input]. The state block is rescaled to the configured
/// spectral radius; the input block has std input_scale / sqrt(window inputs).
class Reservoir {
 public:
  explicit Reservoir(const ReservoirConfig& cfg);

  const ReservoirConfig& config() const { return cfg_; }
  const Eigen::MatrixXd& w_tran() const { return w_; }
  Index feature_dim() const { return cfg_.state_dim + cfg_.input_dim * cfg_.window_len; }

  /// Extended state matrix: row t = [s(t); buf(t)] with s(0) = initial (zero
  /// by default), s(t+1) = tanh_split(W [s(t); buf(t)]), buf(t) = the last
  /// window_len input rows, newest first, zero before the start.
  CMat run(const CMat& inputs, const CVec* initial_state = nullptr) const;

 private:
  ReservoirConfig cfg_;
  Eigen::MatrixXd w_;
};

double spectral_radius(const Eigen::MatrixXd& a);

struct Readout {
  CMat w_out;
  std::vector<Index> empty_columns;  // output columns with no training rows
};

/// Absolute ridge weight for a relative setting.
double ridge_lambda(const CMat& s_bar, double ridge_rel);

/// Per output column: ridge LS on the rows where mask(:, col) is set.
Readout fit_masked(const CMat& s_bar, const CMat& x_train, const Mask& mask, double ridge_rel);
Readout fit_full(const CMat& s_bar, const CMat& x_train, double ridge_rel);

CMat predict(const CMat& s_bar, const CMat& w_out);

struct TrainResult {
  CMat w_out;
  Index delay = 0;
  std::vector<double> losses;  // one per candidate delay 0..l_forget
  double condition = 0.0;      // of the chosen delayed feature matrix
  std::vector<std::string> warnings;
};

/// Run the reservoir with `delay` trailing zero inputs appended and drop the
/// first `delay` rows, aligning output row t with input row t + delay.
CMat delayed_states(const Reservoir& r, const CMat& inputs, Index delay);

/// Delay search: fit for every delay in [0, l_forget], keep the smallest
/// normalized training residual on the mask (ties to the smaller delay).
TrainResult train_with_delay_search(const Reservoir& r, const CMat& y_train, const CMat& x_train, const Mask& mask);

/// Soft estimate S_bar_test * W_out at the chosen delay.
CMat rc_estimate(const Reservoir& r, const CMat& y_test, const TrainResult& t);

/// Quantize an RC estimate. Superimposed frames first remove the known pilot
/// (pilot_dd); interleaved frames carry data on the complement of omega.
CMat detect(const CMat& soft, PilotScheme scheme, const Constellation& c, const CMat* pilot_dd = nullptr);

/// Column groups for multi-RC: k consecutive [begin, end) groups, the first n % k one wider.
std::vector<std::pair<Index, Index>> partition_columns(Index n, Index k);

struct SubDataset {
  CMat y_train, y_test, x_train;
  Mask fit_mask;
  Index begin = 0, end = 0;  // Doppler/time columns covered
};

/// Multi-RC split of a stacked dataset (M*n_t target rows, M*n_r input rows).
/// Every antenna block is moved to the delay-time domain by a unitary DFT
/// along its rows; group g then sees columns [begin, end) of all receive
/// blocks as input and predicts the same columns of all transmit blocks.
/// The fit mask must be constant along each row so it commutes with the DFT.
struct MultiRcPartition {
  std::vector<SubDataset> groups;
  Index n = 0, n_t = 1, n_r = 1;
};

MultiRcPartition partition_multi_rc(const FrameDataset& stacked, Index n_t, Index n_r, Index k);

/// Scatter per-group estimates back, invert the row DFT; returns the stacked
/// DD estimate (M*n_t rows).
CMat merge_multi_rc(const MultiRcPartition& part, const std::vector<CMat>& estimates);

}  // namespace otfs
