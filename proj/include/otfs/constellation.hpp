#pragma once

#include "otfs/types.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace otfs {

enum class Modulation { bpsk, qpsk };

/// Unnormalized BPSK {+1, -1} and QPSK {+-1 +-1j} with Gray labelling.
/// The label of point i is the binary expansion of i, most significant bit first.
class Constellation {
 public:
  static Constellation bpsk();
  static Constellation qpsk();
  static Constellation from_name(const std::string& name);

  Constellation(Modulation name, std::vector<cplx> points);

  Modulation name() const { return name_; }
  const std::vector<cplx>& points() const { return points_; }
  int bits_per_symbol() const { return bits_per_symbol_; }
  double mean_energy() const;

  std::vector<cplx> map_bits(std::span<const std::uint8_t> bits) const;
  void append_bits(Index point_index, std::vector<std::uint8_t>& out) const;

  // Nearest point in Euclidean distance, ties to the lowest index.
  Index quantize_index(cplx z) const;
  cplx quantize(cplx z) const { return points_[static_cast<std::size_t>(quantize_index(z))]; }
  CMat quantize(const CMat& z) const;

 private:
  Modulation name_;
  std::vector<cplx> points_;
  int bits_per_symbol_ = 0;
};

std::string to_string(Modulation m);

}  // namespace otfs
