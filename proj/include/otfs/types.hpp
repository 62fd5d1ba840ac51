#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace otfs {

using Index = Eigen::Index;

template <typename Scalar>
using CMatrixT = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using CVectorT = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

using cplx = std::complex<double>;
using CMat = CMatrixT<double>;
using CVec = CVectorT<double>;

// Binary indicator over a grid (pilot support, data support).
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Hadamard product with a binary mask.
inline CMat masked(const CMat& x, const Mask& mask) {
  if (x.rows() != mask.rows() || x.cols() != mask.cols()) {
    throw Error("masked: shape mismatch");
  }
  return mask.select(x.array(), cplx(0.0)).matrix();
}

inline Index count(const Mask& mask) { return mask.cast<Index>().sum(); }

/// Delay-Doppler grid and time-domain framing parameters.
///
/// Grids are stored with rows = delay index l (length m) and
/// columns = Doppler index k (length n). Time-frequency grids use
/// rows = subcarrier, columns = multicarrier symbol.
enum class FrameStructure { standalone, overlay };

struct WaveformConfig {
  Index m = 64;
  Index n = 14;
  double delta_f = 15e3;
  Index cp_len = 0;
  FrameStructure structure = FrameStructure::standalone;

  double delta_t() const { return 1.0 / delta_f; }
  double sample_rate() const { return static_cast<double>(m) * delta_f; }

  void validate() const {
    if (m < 1 || n < 1) throw Error("waveform: m and n must be >= 1");
    if (!(delta_f > 0.0)) throw Error("waveform: delta_f must be positive");
    if (cp_len < 0 || cp_len >= m) throw Error("waveform: cp_len must satisfy 0 <= cp_len < m");
  }
};

std::string to_string(FrameStructure s);
FrameStructure frame_structure_from_string(const std::string& s);

}  // namespace otfs
