#include "otfs/esn.hpp"

#include "otfs/transforms.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <map>
#include <random>

namespace otfs {

void ReservoirConfig::validate() const {
  if (state_dim < 1) throw Error("reservoir: state_dim must be >= 1");
  if (input_dim < 1) throw Error("reservoir: input_dim must be >= 1");
  if (window_len < 1) throw Error("reservoir: window_len must be >= 1");
  if (!(spectral_radius > 0.0 && spectral_radius < 1.0)) throw Error("reservoir: spectral_radius must be in (0, 1)");
  if (!(input_scale >= 0.0) || !std::isfinite(input_scale)) throw Error("reservoir: input_scale must be >= 0");
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw Error("reservoir: ridge must be >= 0");
  if (l_forget < 0) throw Error("reservoir: l_forget must be >= 0");
}

double spectral_radius(const Eigen::MatrixXd& a) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Reservoir::Reservoir(const ReservoirConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const Index nn = cfg_.state_dim;
  const Index nin = cfg_.input_dim * cfg_.window_len;
  std::mt19937_64 rng(cfg_.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  w_.resize(nn, nn + nin);
  // fill column-major so the draw order is independent of Eigen internals
  for (Index c = 0; c < w_.cols(); ++c) {
    for (Index r = 0; r < nn; ++r) w_(r, c) = gauss(rng);
  }
  const double rho = spectral_radius(w_.leftCols(nn));
  if (!(rho > 0.0)) throw Error("reservoir: degenerate transition matrix");
  w_.leftCols(nn) *= cfg_.spectral_radius / rho;
  w_.rightCols(nin) *= cfg_.input_scale / std::sqrt(static_cast<double>(nin));
}

CMat Reservoir::run(const CMat& inputs, const CVec* initial_state) const {
  if (inputs.cols() != cfg_.input_dim) throw Error("reservoir run: input dimension mismatch");
  const Index steps = inputs.rows();
  const Index nn = cfg_.state_dim, din = cfg_.input_dim, w = cfg_.window_len;
  CMat s_bar = CMat::Zero(steps, feature_dim());
  for (Index t = 0; t < steps; ++t) {
    for (Index j = 0; j < w && j <= t; ++j) s_bar.block(t, nn + j * din, 1, din) = inputs.row(t - j);
  }
  Eigen::VectorXd re = Eigen::VectorXd::Zero(nn), im = Eigen::VectorXd::Zero(nn);
  if (initial_state) {
    if (initial_state->size() != nn) throw Error("reservoir run: initial state dimension mismatch");
    re = initial_state->real();
    im = initial_state->imag();
  }
  const auto a = w_.leftCols(nn);
  const auto b = w_.rightCols(w_.cols() - nn);
  for (Index t = 0; t < steps; ++t) {
    for (Index i = 0; i < nn; ++i) s_bar(t, i) = cplx(re(i), im(i));
    const auto u = s_bar.row(t).tail(din * w).transpose();
    const Eigen::VectorXd zr = a * re + b * u.real();
    const Eigen::VectorXd zi = a * im + b * u.imag();
    re = zr.array().tanh();
    im = zi.array().tanh();
  }
  return s_bar;
}

double ridge_lambda(const CMat& s_bar, double ridge_rel) {
  if (s_bar.cols() == 0) return 0.0;
  return ridge_rel * s_bar.squaredNorm() / static_cast<double>(s_bar.cols());
}

namespace {

// Ridge LS for all columns of b at once; lambda = 0 gives min-norm LS.
CMat solve_ridge(const CMat& a, const CMat& b, double lambda) {
  if (lambda == 0.0) return a.completeOrthogonalDecomposition().solve(b);
  const Index r = a.rows(), d = a.cols();
  if (r < d) {
    // dual form: A^H (A A^H + lambda I)^-1 b
    CMat g = a * a.adjoint();
    g.diagonal().array() += lambda;
    return a.adjoint() * g.ldlt().solve(b);
  }
  CMat g = a.adjoint() * a;
  g.diagonal().array() += lambda;
  return g.ldlt().solve(a.adjoint() * b);
}

CMat gather_rows(const CMat& m, const std::vector<Index>& rows) {
  CMat out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

}  // namespace

Readout fit_masked(const CMat& s_bar, const CMat& x_train, const Mask& mask, double ridge_rel) {
  if (x_train.rows() != s_bar.rows() || mask.rows() != s_bar.rows() || mask.cols() != x_train.cols()) {
    throw Error("fit_masked: shape mismatch");
  }
  const double lambda = ridge_lambda(s_bar, ridge_rel);
  Readout out{CMat::Zero(s_bar.cols(), x_train.cols()), {}};
  // columns sharing a support share one factorization
  std::map<std::vector<Index>, std::vector<Index>> by_support;
  for (Index c = 0; c < x_train.cols(); ++c) {
    std::vector<Index> rows;
    for (Index r = 0; r < mask.rows(); ++r) {
      if (mask(r, c)) rows.push_back(r);
    }
    by_support[rows].push_back(c);
  }
  for (const auto& [rows, cols] : by_support) {
    if (rows.empty()) {
      out.empty_columns.insert(out.empty_columns.end(), cols.begin(), cols.end());
      continue;
    }
    CMat b(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      for (std::size_t i = 0; i < rows.size(); ++i) b(static_cast<Index>(i), static_cast<Index>(j)) = x_train(rows[i], cols[j]);
    }
    const CMat w = solve_ridge(gather_rows(s_bar, rows), b, lambda);
    for (std::size_t j = 0; j < cols.size(); ++j) out.w_out.col(cols[j]) = w.col(static_cast<Index>(j));
  }
  std::sort(out.empty_columns.begin(), out.empty_columns.end());
  return out;
}

Readout fit_full(const CMat& s_bar, const CMat& x_train, double ridge_rel) {
  if (x_train.rows() != s_bar.rows()) throw Error("fit_full: row count mismatch");
  return {solve_ridge(s_bar, x_train, ridge_lambda(s_bar, ridge_rel)), {}};
}

CMat predict(const CMat& s_bar, const CMat& w_out) {
  if (s_bar.cols() != w_out.rows()) throw Error("predict: shape mismatch");
  return s_bar * w_out;
}

CMat delayed_states(const Reservoir& r, const CMat& inputs, Index delay) {
  if (delay < 0) throw Error("delayed_states: negative delay");
  CMat padded = CMat::Zero(inputs.rows() + delay, inputs.cols());
  padded.topRows(inputs.rows()) = inputs;
  return r.run(padded).bottomRows(inputs.rows());
}

TrainResult train_with_delay_search(const Reservoir& r, const CMat& y_train, const CMat& x_train, const Mask& mask) {
  const Index l_forget = r.config().l_forget;
  if (l_forget >= y_train.rows()) throw Error("delay search: l_forget must be shorter than the sequence");
  if (x_train.rows() != y_train.rows() || mask.rows() != x_train.rows() || mask.cols() != x_train.cols()) {
    throw Error("delay search: shape mismatch");
  }
  if (!mask.any()) throw Error("delay search: empty pilot support");
  const double ref = masked(x_train, mask).norm();
  if (!(ref > 0.0)) throw Error("delay search: pilot targets are all zero");

  TrainResult best;
  double best_loss = std::numeric_limits<double>::infinity();
  CMat best_states;
  for (Index l = 0; l <= l_forget; ++l) {
    const CMat s_bar = delayed_states(r, y_train, l);
    Readout fit = fit_masked(s_bar, x_train, mask, r.config().ridge);
    const double loss = masked(x_train - s_bar * fit.w_out, mask).norm() / ref;
    best.losses.push_back(loss);
    if (loss < best_loss) {
      best_loss = loss;
      best.delay = l;
      best.w_out = std::move(fit.w_out);
      best.warnings.clear();
      for (Index c : fit.empty_columns) best.warnings.push_back("output column " + std::to_string(c) + " has no pilot rows");
      best_states = s_bar;
    }
  }
  if (best_states.size() == 0) throw Error("delay search: no finite loss");
  const Eigen::BDCSVD<CMat> svd(best_states);
  const auto& sv = svd.singularValues();
  best.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  return best;
}

CMat rc_estimate(const Reservoir& r, const CMat& y_test, const TrainResult& t) {
  return predict(delayed_states(r, y_test, t.delay), t.w_out);
}

CMat detect(const CMat& soft, PilotScheme scheme, const Constellation& c, const CMat* pilot_dd) {
  if (scheme == PilotScheme::superimposed) {
    if (!pilot_dd || pilot_dd->rows() != soft.rows() || pilot_dd->cols() != soft.cols()) {
      throw Error("detect: superimposed detection needs the pilot frame");
    }
    return c.quantize(CMat(soft - *pilot_dd));
  }
  return c.quantize(soft);
}

std::vector<std::pair<Index, Index>> partition_columns(Index n, Index k) {
  if (k < 1 || k > n) throw Error("multi-RC: k must be in [1, N]");
  std::vector<std::pair<Index, Index>> out;
  Index begin = 0;
  for (Index g = 0; g < k; ++g) {
    const Index width = n / k + (g < n % k ? 1 : 0);
    out.emplace_back(begin, begin + width);
    begin += width;
  }
  return out;
}

namespace {

// Row DFT applied to each n-column block of a sequence-layout matrix.
CMat blockwise(const CMat& seq, Index n, bool inverse) {
  CMat out(seq.rows(), seq.cols());
  for (Index b = 0; b < seq.cols() / n; ++b) {
    out.middleCols(b * n, n) = inverse ? inverse_row_dft(seq.middleCols(b * n, n)) : row_dft(seq.middleCols(b * n, n));
  }
  return out;
}

CMat pick_columns(const CMat& seq, Index n, Index blocks, Index begin, Index end) {
  const Index w = end - begin;
  CMat out(seq.rows(), w * blocks);
  for (Index b = 0; b < blocks; ++b) out.middleCols(b * w, w) = seq.middleCols(b * n + begin, w);
  return out;
}

}  // namespace

MultiRcPartition partition_multi_rc(const FrameDataset& stacked, Index n_t, Index n_r, Index k) {
  const Index n = stacked.y_train.cols();
  if (n_t < 1 || n_r < 1) throw Error("multi-RC: antenna counts must be >= 1");
  const CMat y_train = blockwise(to_sequence(stacked.y_train, n_r), n, false);
  const CMat y_test = blockwise(to_sequence(stacked.y_test, n_r), n, false);
  const CMat x_train = blockwise(to_sequence(stacked.x_train, n_t), n, false);
  if (stacked.fit_mask.rows() != stacked.x_train.rows() || stacked.fit_mask.cols() != n) {
    throw Error("multi-RC: mask shape mismatch");
  }
  Mask mask_seq(x_train.rows(), x_train.cols());
  for (Index b = 0; b < n_t; ++b) {
    const Index m = x_train.rows();
    const auto block = stacked.fit_mask.middleRows(b * m, m);
    for (Index r = 0; r < m; ++r) {
      if (block.row(r).any() && !block.row(r).all()) {
        throw Error("multi-RC requires a pilot pattern made of full delay rows (block_rows)");
      }
    }
    mask_seq.middleCols(b * n, n) = block;
  }

  MultiRcPartition part;
  part.n = n;
  part.n_t = n_t;
  part.n_r = n_r;
  for (const auto& [begin, end] : partition_columns(n, k)) {
    SubDataset s;
    s.begin = begin;
    s.end = end;
    s.y_train = pick_columns(y_train, n, n_r, begin, end);
    s.y_test = pick_columns(y_test, n, n_r, begin, end);
    s.x_train = pick_columns(x_train, n, n_t, begin, end);
    const Index w = end - begin;
    s.fit_mask.resize(mask_seq.rows(), w * n_t);
    for (Index b = 0; b < n_t; ++b) s.fit_mask.middleCols(b * w, w) = mask_seq.middleCols(b * n + begin, w);
    part.groups.push_back(std::move(s));
  }
  return part;
}

CMat merge_multi_rc(const MultiRcPartition& part, const std::vector<CMat>& estimates) {
  if (estimates.size() != part.groups.size()) throw Error("multi-RC merge: group count mismatch");
  const Index m = estimates.empty() ? 0 : estimates[0].rows();
  CMat seq = CMat::Zero(m, part.n * part.n_t);
  for (std::size_t g = 0; g < estimates.size(); ++g) {
    const auto& grp = part.groups[g];
    const Index w = grp.end - grp.begin;
    if (estimates[g].rows() != m || estimates[g].cols() != w * part.n_t) throw Error("multi-RC merge: estimate shape mismatch");
    for (Index b = 0; b < part.n_t; ++b) seq.middleCols(b * part.n + grp.begin, w) = estimates[g].middleCols(b * w, w);
  }
  return from_sequence(blockwise(seq, part.n, true), part.n_t);
}

}  // namespace otfs
