#include "otfs/constellation.hpp"

#include <bit>
#include <limits>

namespace otfs {

Constellation Constellation::bpsk() { return Constellation(Modulation::bpsk, {cplx(1, 0), cplx(-1, 0)}); }

Constellation Constellation::qpsk() {
  return Constellation(Modulation::qpsk, {cplx(1, 1), cplx(1, -1), cplx(-1, 1), cplx(-1, -1)});
}

Constellation Constellation::from_name(const std::string& name) {
  if (name == "bpsk") return bpsk();
  if (name == "qpsk") return qpsk();
  throw Error("unknown constellation '" + name + "'");
}

Constellation::Constellation(Modulation name, std::vector<cplx> points) : name_(name), points_(std::move(points)) {
  if (points_.empty()) throw Error("constellation: empty point set");
  const auto size = points_.size();
  if (!std::has_single_bit(size)) throw Error("constellation: size must be a power of two");
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = i + 1; j < size; ++j) {
      if (points_[i] == points_[j]) throw Error("constellation: duplicate points");
    }
  }
  bits_per_symbol_ = std::countr_zero(size);
}

double Constellation::mean_energy() const {
  double e = 0.0;
  for (const auto& p : points_) e += std::norm(p);
  return e / static_cast<double>(points_.size());
}

std::vector<cplx> Constellation::map_bits(std::span<const std::uint8_t> bits) const {
  const auto bps = static_cast<std::size_t>(bits_per_symbol_);
  if (bps == 0 ? !bits.empty() : bits.size() % bps != 0) {
    throw Error("map_bits: bit count not divisible by bits per symbol");
  }
  std::vector<cplx> out;
  if (bps == 0) return out;
  out.reserve(bits.size() / bps);
  for (std::size_t i = 0; i < bits.size(); i += bps) {
    std::size_t idx = 0;
    for (std::size_t b = 0; b < bps; ++b) idx = (idx << 1) | (bits[i + b] & 1u);
    out.push_back(points_[idx]);
  }
  return out;
}

void Constellation::append_bits(Index point_index, std::vector<std::uint8_t>& out) const {
  for (int b = bits_per_symbol_ - 1; b >= 0; --b) {
    out.push_back(static_cast<std::uint8_t>((point_index >> b) & 1));
  }
}

Index Constellation::quantize_index(cplx z) const {
  Index best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double d = std::norm(z - points_[i]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<Index>(i);
    }
  }
  return best;
}

CMat Constellation::quantize(const CMat& z) const {
  return z.unaryExpr([this](const cplx& v) { return quantize(v); });
}

std::string to_string(Modulation m) { return m == Modulation::bpsk ? "bpsk" : "qpsk"; }

}  // namespace otfs
