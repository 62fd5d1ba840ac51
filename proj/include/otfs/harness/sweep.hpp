#pragma once

#include "otfs/harness/config.hpp"
#include "otfs/harness/results.hpp"

#include <cstdint>
#include <vector>

namespace otfs {

struct FrameOutcome {
  std::int64_t n_bits = 0;
  std::int64_t n_errors = 0;
  double train_loss = 0.0;
};

/// One Monte-Carlo frame: channel draw (dop_idx, realization), data draw
/// (+frame), noise draw (+snr_idx). Seeds are derived from master_seed only,
/// so the same channel and data recur across SNR points and across configs.
FrameOutcome simulate_frame(const ExperimentConfig& cfg, std::size_t snr_idx, std::size_t dop_idx, Index realization,
                            Index frame);

struct CellStats {
  double ber_std_error = 0.0;  // standard error over channel realizations
};

struct SweepResult {
  std::vector<ResultRecord> records;  // SNR-major, then Doppler
  std::vector<CellStats> stats;       // parallel to records
};

SweepResult run_sweep_detailed(const ExperimentConfig& cfg);
std::vector<ResultRecord> run_sweep(const ExperimentConfig& cfg);

}  // namespace otfs
