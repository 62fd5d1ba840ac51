#pragma once

#include "otfs/constellation.hpp"
#include "otfs/types.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace otfs {

enum class PatternKind { staircase, blockwise_columns, block_rows };
enum class PilotScheme { interleaved, superimposed };

struct PilotPattern {
  Mask omega;
  PatternKind kind = PatternKind::staircase;
  std::uint64_t seed = 0;

  Index rows() const { return omega.rows(); }
  Index cols() const { return omega.cols(); }
  Index size() const { return count(omega); }
  Mask complement() const { return !omega; }
  void validate() const;
};

/// Pilot count is the nearest achievable multiple of the kind's unit
/// (cell, column or row) to target*units, at least one unit. The seed
/// rotates the placement. Throws when the result would leave no data cell.
PilotPattern make_pattern(PatternKind kind, Index m, Index n, double target_overhead, std::uint64_t seed);

double overhead(const PilotPattern& p);

/// Receiver-regenerable pseudo-random constellation symbols for one antenna.
CMat pilot_symbols(const Constellation& c, Index m, Index n, std::uint64_t pilot_seed, Index antenna = 0);

/// Unit-modulus per-cell phases; antenna 0 is all ones.
CMat pilot_phases(Index m, Index n, std::uint64_t pilot_seed, Index antenna);

std::uint64_t antenna_seed(std::uint64_t pilot_seed, Index antenna);

struct InterleavedFrame {
  CMat x;        // transmitted DD frame
  CMat x_train;  // omega .* x (pilots)
  CMat x_test;   // complement .* x (data)
};

/// Data cells (complement of omega) are filled column-major from the mapped bits.
InterleavedFrame build_interleaved(std::span<const std::uint8_t> data_bits, const PilotPattern& p,
                                   const Constellation& c, std::uint64_t pilot_seed, Index antenna = 0);

struct SuperimposedFrame {
  CMat x;         // sfft(c*omega) + x_test + x_aid
  CMat x_aid;     // -sfft(isfft(x_test) .* omega)
  CMat pilot_dd;  // sfft(c * omega * phases)
  double c = 0.0;
};

/// Pilot amplitude chosen so the pilot holds fraction rho of the frame energy.
SuperimposedFrame build_superimposed(const CMat& x_test, const PilotPattern& p, double rho,
                                     const CMat* phases = nullptr);
SuperimposedFrame build_superimposed_amplitude(const CMat& x_test, const PilotPattern& p, double c,
                                               const CMat* phases = nullptr);

/// Training and detection matrices for one (possibly stacked MIMO) frame.
/// RC layout: rows are sequence steps; fit_mask selects training cells.
struct FrameDataset {
  PilotScheme scheme = PilotScheme::interleaved;
  CMat x_train;
  CMat y_train;
  CMat y_test;
  CMat x_test;  // ground truth when known (empty at a real receiver)
  Mask fit_mask;
  Mask omega;
};

/// y_train = y_test = y, x_train = omega .* x.
FrameDataset extract_interleaved(const CMat& y, const CMat& x_train, const PilotPattern& p);
/// y_train = sfft(isfft(y) .* omega), x_train = pilot_dd, y_test = y.
FrameDataset extract_superimposed(const CMat& y, const CMat& pilot_dd, const PilotPattern& p);

/// Vertical stacking (M*count rows) and its inverse.
CMat stack_blocks(const std::vector<CMat>& blocks);
std::vector<CMat> unstack_blocks(const CMat& stacked, Index count);

/// Stacked layout -> RC sequence layout: step l carries row l of every
/// antenna block side by side (M rows, count*N columns). And back.
CMat to_sequence(const CMat& stacked, Index count);
CMat from_sequence(const CMat& seq, Index count);

/// MIMO dataset in stacked form. per_rx holds each receive antenna's
/// extracted dataset; targets come per transmit antenna (M*n_t rows).
FrameDataset stack_mimo(const std::vector<FrameDataset>& per_rx, const std::vector<CMat>& x_train_per_tx,
                        const std::vector<CMat>& x_test_per_tx = {});

std::string to_string(PatternKind k);
PatternKind pattern_kind_from_string(const std::string& s);
std::string to_string(PilotScheme s);
PilotScheme pilot_scheme_from_string(const std::string& s);

}  // namespace otfs
