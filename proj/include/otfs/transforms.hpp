#pragma once

#include "otfs/types.hpp"

#include <map>
#include <numbers>
#include <utility>

namespace otfs {

/// Unitary DFT matrix of the given size: entries exp(sign * j2pi*a*b/size) / sqrt(size).
/// The matrix is symmetric, and its conjugate is its inverse.
template <typename Scalar>
const CMatrixT<Scalar>& dft_matrix(Index size, int sign) {
  thread_local std::map<std::pair<Index, int>, CMatrixT<Scalar>> cache;
  const auto key = std::make_pair(size, sign >= 0 ? 1 : -1);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  CMatrixT<Scalar> f(size, size);
  const Scalar norm = Scalar(1) / std::sqrt(static_cast<Scalar>(size));
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  for (Index a = 0; a < size; ++a) {
    for (Index b = 0; b < size; ++b) {
      // reduce the exponent mod size to keep the angle small and exact
      const Index p = (a * b) % size;
      const Scalar angle = key.second * two_pi * static_cast<Scalar>(p) / static_cast<Scalar>(size);
      f(a, b) = std::polar(norm, angle);
    }
  }
  return cache.emplace(key, std::move(f)).first->second;
}

template <typename Derived>
using ScalarOf = typename Derived::Scalar::value_type;

/// Delay-Doppler -> time-frequency.
/// X[m,n] = 1/sqrt(NM) sum_k sum_l x[l,k] exp(j2pi(nk/N - ml/M)); unitary.
template <typename Derived>
CMatrixT<ScalarOf<Derived>> isfft(const Eigen::MatrixBase<Derived>& x) {
  using S = ScalarOf<Derived>;
  return dft_matrix<S>(x.rows(), -1) * x * dft_matrix<S>(x.cols(), +1);
}

/// Time-frequency -> delay-Doppler; exact inverse of isfft.
template <typename Derived>
CMatrixT<ScalarOf<Derived>> sfft(const Eigen::MatrixBase<Derived>& X) {
  using S = ScalarOf<Derived>;
  return dft_matrix<S>(X.rows(), +1) * X * dft_matrix<S>(X.cols(), -1);
}

/// Unitary DFT along each row (Doppler axis -> time axis for DD frames).
template <typename Derived>
CMatrixT<ScalarOf<Derived>> row_dft(const Eigen::MatrixBase<Derived>& x) {
  return x * dft_matrix<ScalarOf<Derived>>(x.cols(), -1);
}

template <typename Derived>
CMatrixT<ScalarOf<Derived>> inverse_row_dft(const Eigen::MatrixBase<Derived>& x) {
  return x * dft_matrix<ScalarOf<Derived>>(x.cols(), +1);
}

/// Unitary 2D DFT (negative exponent on both axes). Diagonalizes 2D
/// circular convolution.
template <typename Derived>
CMatrixT<ScalarOf<Derived>> spectrum2(const Eigen::MatrixBase<Derived>& x) {
  using S = ScalarOf<Derived>;
  return dft_matrix<S>(x.rows(), -1) * x * dft_matrix<S>(x.cols(), -1);
}

template <typename Derived>
CMatrixT<ScalarOf<Derived>> inverse_spectrum2(const Eigen::MatrixBase<Derived>& x) {
  using S = ScalarOf<Derived>;
  return dft_matrix<S>(x.rows(), +1) * x * dft_matrix<S>(x.cols(), +1);
}

}  // namespace otfs
