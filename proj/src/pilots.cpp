#include "otfs/pilots.hpp"

#include "otfs/seed.hpp"
#include "otfs/transforms.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace otfs {

void PilotPattern::validate() const {
  const Index ones = size();
  if (ones < 1) throw Error("pilot pattern has no pilot cell");
  if (ones >= omega.size()) throw Error("pilot pattern has no data cell");
}

namespace {

// Positions spread evenly over [0, span) starting at offset, wrapping.
std::vector<Index> spread(Index how_many, Index span, Index offset) {
  std::vector<Index> out;
  for (Index i = 0; i < how_many; ++i) out.push_back((offset + (i * span) / how_many) % span);
  return out;
}

Index unit_count(double target, Index units) {
  if (!(target > 0.0 && target < 1.0)) throw Error("make_pattern: target overhead must be in (0, 1)");
  auto k = static_cast<Index>(std::llround(target * static_cast<double>(units)));
  if (k < 1) k = 1;
  if (k > units - 1) throw Error("make_pattern: overhead unreachable for this pattern granularity");
  return k;
}

}  // namespace

PilotPattern make_pattern(PatternKind kind, Index m, Index n, double target_overhead, std::uint64_t seed) {
  if (m < 1 || n < 1) throw Error("make_pattern: empty grid");
  PilotPattern p{Mask::Constant(m, n, false), kind, seed};
  switch (kind) {
    case PatternKind::block_rows: {
      const Index rows = unit_count(target_overhead, m);
      for (Index r : spread(rows, m, static_cast<Index>(seed % static_cast<std::uint64_t>(m)))) {
        p.omega.row(r).setConstant(true);
      }
      break;
    }
    case PatternKind::blockwise_columns: {
      const Index cols = unit_count(target_overhead, n);
      for (Index c : spread(cols, n, static_cast<Index>(seed % static_cast<std::uint64_t>(n)))) {
        p.omega.col(c).setConstant(true);
      }
      break;
    }
    case PatternKind::staircase: {
      // Each Doppler column gets an evenly spaced set of delay cells; the
      // set's start steps down the delay axis column by column and wraps.
      const Index cells = unit_count(target_overhead, m * n);
      const Index step = std::max<Index>(1, m / n);
      const auto offset = static_cast<Index>(seed % static_cast<std::uint64_t>(m));
      for (Index k = 0; k < n; ++k) {
        const Index in_col = (cells * (k + 1)) / n - (cells * k) / n;
        const Index start = (offset + k * step) % m;
        for (Index r : spread(in_col, m, start)) {
          while (p.omega(r, k)) r = (r + 1) % m;
          p.omega(r, k) = true;
        }
      }
      break;
    }
  }
  p.validate();
  return p;
}

double overhead(const PilotPattern& p) {
  p.validate();
  return static_cast<double>(p.size()) / static_cast<double>(p.omega.size());
}

std::uint64_t antenna_seed(std::uint64_t pilot_seed, Index antenna) {
  return derive_seed(pilot_seed, {static_cast<std::uint64_t>(antenna)});
}

CMat pilot_symbols(const Constellation& c, Index m, Index n, std::uint64_t pilot_seed, Index antenna) {
  std::mt19937_64 rng(antenna_seed(pilot_seed, antenna));
  std::uniform_int_distribution<std::size_t> pick(0, c.points().size() - 1);
  CMat out(m, n);
  for (Index k = 0; k < n; ++k) {
    for (Index l = 0; l < m; ++l) out(l, k) = c.points()[pick(rng)];
  }
  return out;
}

CMat pilot_phases(Index m, Index n, std::uint64_t pilot_seed, Index antenna) {
  if (antenna == 0) return CMat::Ones(m, n);
  std::mt19937_64 rng(antenna_seed(pilot_seed, antenna));
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  CMat out(m, n);
  for (Index k = 0; k < n; ++k) {
    for (Index l = 0; l < m; ++l) out(l, k) = std::polar(1.0, angle(rng));
  }
  return out;
}

InterleavedFrame build_interleaved(std::span<const std::uint8_t> data_bits, const PilotPattern& p,
                                   const Constellation& c, std::uint64_t pilot_seed, Index antenna) {
  p.validate();
  const Index data_cells = p.omega.size() - p.size();
  if (static_cast<Index>(data_bits.size()) != data_cells * c.bits_per_symbol()) {
    throw Error("build_interleaved: bit count does not match data cells");
  }
  const auto symbols = c.map_bits(data_bits);
  InterleavedFrame f;
  f.x = pilot_symbols(c, p.rows(), p.cols(), pilot_seed, antenna);
  std::size_t next = 0;
  for (Index k = 0; k < p.cols(); ++k) {
    for (Index l = 0; l < p.rows(); ++l) {
      if (!p.omega(l, k)) f.x(l, k) = symbols[next++];
    }
  }
  f.x_train = masked(f.x, p.omega);
  f.x_test = masked(f.x, p.complement());
  return f;
}

SuperimposedFrame build_superimposed_amplitude(const CMat& x_test, const PilotPattern& p, double c,
                                               const CMat* phases) {
  p.validate();
  if (x_test.rows() != p.rows() || x_test.cols() != p.cols()) throw Error("build_superimposed: shape mismatch");
  SuperimposedFrame f;
  f.c = c;
  const CMat pilot_tf = phases ? masked(c * *phases, p.omega) : masked(CMat::Constant(p.rows(), p.cols(), c), p.omega);
  f.pilot_dd = sfft(pilot_tf);
  f.x_aid = -sfft(masked(isfft(x_test), p.omega));
  f.x = f.pilot_dd + x_test + f.x_aid;
  return f;
}

SuperimposedFrame build_superimposed(const CMat& x_test, const PilotPattern& p, double rho, const CMat* phases) {
  if (!(rho > 0.0 && rho < 1.0)) throw Error("build_superimposed: pilot power fraction must be in (0, 1)");
  p.validate();
  // Pilot and data occupy disjoint TF cells, so energies add:
  // c^2 |omega| = rho * (c^2 |omega| + E_base).
  const double base = masked(isfft(x_test), p.complement()).squaredNorm();
  const double c = std::sqrt(rho * base / ((1.0 - rho) * static_cast<double>(p.size())));
  return build_superimposed_amplitude(x_test, p, c, phases);
}

FrameDataset extract_interleaved(const CMat& y, const CMat& x_train, const PilotPattern& p) {
  p.validate();
  if (y.rows() != p.rows() || y.cols() != p.cols() || x_train.rows() != p.rows() || x_train.cols() != p.cols()) {
    throw Error("extract_interleaved: shape mismatch");
  }
  FrameDataset d;
  d.scheme = PilotScheme::interleaved;
  d.x_train = masked(x_train, p.omega);
  d.y_train = y;
  d.y_test = y;
  d.fit_mask = p.omega;
  d.omega = p.omega;
  return d;
}

FrameDataset extract_superimposed(const CMat& y, const CMat& pilot_dd, const PilotPattern& p) {
  p.validate();
  if (y.rows() != p.rows() || y.cols() != p.cols() || pilot_dd.rows() != p.rows() || pilot_dd.cols() != p.cols()) {
    throw Error("extract_superimposed: shape mismatch");
  }
  FrameDataset d;
  d.scheme = PilotScheme::superimposed;
  d.x_train = pilot_dd;
  d.y_train = sfft(masked(isfft(y), p.omega));
  d.y_test = y;
  d.fit_mask = Mask::Constant(p.rows(), p.cols(), true);
  d.omega = p.omega;
  return d;
}

CMat stack_blocks(const std::vector<CMat>& blocks) {
  if (blocks.empty()) throw Error("stack_blocks: no blocks");
  const Index m = blocks[0].rows(), n = blocks[0].cols();
  CMat out(m * static_cast<Index>(blocks.size()), n);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].rows() != m || blocks[i].cols() != n) throw Error("stack_blocks: inconsistent block shapes");
    out.middleRows(static_cast<Index>(i) * m, m) = blocks[i];
  }
  return out;
}

std::vector<CMat> unstack_blocks(const CMat& stacked, Index count) {
  if (count < 1 || stacked.rows() % count != 0) throw Error("unstack_blocks: rows not divisible by block count");
  const Index m = stacked.rows() / count;
  std::vector<CMat> out;
  for (Index i = 0; i < count; ++i) out.push_back(stacked.middleRows(i * m, m));
  return out;
}

CMat to_sequence(const CMat& stacked, Index count) {
  const auto blocks = unstack_blocks(stacked, count);
  const Index n = stacked.cols();
  CMat out(blocks[0].rows(), n * count);
  for (Index i = 0; i < count; ++i) out.middleCols(i * n, n) = blocks[static_cast<std::size_t>(i)];
  return out;
}

CMat from_sequence(const CMat& seq, Index count) {
  if (count < 1 || seq.cols() % count != 0) throw Error("from_sequence: columns not divisible by block count");
  const Index n = seq.cols() / count;
  std::vector<CMat> blocks;
  for (Index i = 0; i < count; ++i) blocks.push_back(seq.middleCols(i * n, n));
  return stack_blocks(blocks);
}

FrameDataset stack_mimo(const std::vector<FrameDataset>& per_rx, const std::vector<CMat>& x_train_per_tx,
                        const std::vector<CMat>& x_test_per_tx) {
  if (per_rx.empty() || x_train_per_tx.empty()) throw Error("stack_mimo: inconsistent antenna counts");
  if (!x_test_per_tx.empty() && x_test_per_tx.size() != x_train_per_tx.size()) {
    throw Error("stack_mimo: inconsistent antenna counts");
  }
  const auto& first = per_rx[0];
  for (const auto& d : per_rx) {
    if (d.scheme != first.scheme || (d.omega != first.omega).any()) throw Error("stack_mimo: antennas disagree on pattern");
  }
  FrameDataset out;
  out.scheme = first.scheme;
  out.omega = first.omega;
  std::vector<CMat> ytr, yte;
  for (const auto& d : per_rx) {
    ytr.push_back(d.y_train);
    yte.push_back(d.y_test);
  }
  out.y_train = stack_blocks(ytr);
  out.y_test = stack_blocks(yte);
  out.x_train = stack_blocks(x_train_per_tx);
  if (!x_test_per_tx.empty()) out.x_test = stack_blocks(x_test_per_tx);
  const auto n_t = static_cast<Index>(x_train_per_tx.size());
  out.fit_mask = first.fit_mask.replicate(n_t, 1);
  if (out.x_train.rows() != out.fit_mask.rows() || out.x_train.cols() != out.fit_mask.cols()) {
    throw Error("stack_mimo: target shape mismatch");
  }
  return out;
}

std::string to_string(PatternKind k) {
  switch (k) {
    case PatternKind::staircase: return "staircase";
    case PatternKind::blockwise_columns: return "blockwise_columns";
    case PatternKind::block_rows: return "block_rows";
  }
  return "?";
}

PatternKind pattern_kind_from_string(const std::string& s) {
  if (s == "staircase") return PatternKind::staircase;
  if (s == "blockwise_columns") return PatternKind::blockwise_columns;
  if (s == "block_rows") return PatternKind::block_rows;
  throw Error("unknown pattern kind '" + s + "'");
}

std::string to_string(PilotScheme s) { return s == PilotScheme::interleaved ? "interleaved" : "superimposed"; }

PilotScheme pilot_scheme_from_string(const std::string& s) {
  if (s == "interleaved") return PilotScheme::interleaved;
  if (s == "superimposed") return PilotScheme::superimposed;
  throw Error("unknown pilot scheme '" + s + "'");
}

}  // namespace otfs
