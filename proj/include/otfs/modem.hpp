#pragma once

#include "otfs/types.hpp"

namespace otfs {

/// Number of time-domain samples produced by modulate().
Index frame_length(const WaveformConfig& cfg);

/// DD frame -> baseband samples at rate m*delta_f.
///
/// Rectangular pulses: each TF column gets an m-point unitary inverse DFT,
/// columns are serialized in time order. Standalone prepends one CP to the
/// frame, overlay prepends a CP to every column.
CVec modulate(const CMat& x, const WaveformConfig& cfg);

/// Inverse of modulate(): strip CP(s), forward transforms back to the DD grid.
CMat demodulate(const CVec& samples, const WaveformConfig& cfg);

}  // namespace otfs
