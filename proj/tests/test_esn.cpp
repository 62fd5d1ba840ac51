#include "otfs/esn.hpp"
#include "otfs/transforms.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

using namespace otfs;

namespace {

ReservoirConfig small(Index in = 3) {
  ReservoirConfig c;
  c.state_dim = 8;
  c.input_dim = in;
  c.window_len = 4;
  c.seed = 5;
  return c;
}

// Residual of the normal equations of the masked ridge problem for column n.
double normal_eq_residual(const CMat& s, const CMat& x, const Mask& om, const CMat& w, double lambda) {
  double worst = 0.0;
  for (Index n = 0; n < x.cols(); ++n) {
    CMat d = CMat::Zero(s.rows(), s.rows());
    for (Index r = 0; r < s.rows(); ++r) d(r, r) = om(r, n) ? 1.0 : 0.0;
    const CVec g = s.adjoint() * d * (s * w.col(n) - x.col(n)) + lambda * w.col(n);
    worst = std::max(worst, g.norm() / std::max(1.0, (s.adjoint() * d * x.col(n)).norm()));
  }
  return worst;
}

}  // namespace

TEST_CASE("reservoir construction") {
  const Reservoir a(small()), b(small());
  CHECK((a.w_tran() - b.w_tran()).norm() == 0.0);
  CHECK(spectral_radius(a.w_tran().leftCols(8)) == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(oracle::power_iteration_radius(a.w_tran().leftCols(8)) == doctest::Approx(0.9).epsilon(1e-3));
  auto c = small();
  c.seed = 6;
  CHECK((Reservoir(c).w_tran() - a.w_tran()).norm() > 0.0);
  c.spectral_radius = 1.0;
  CHECK_THROWS_AS(Reservoir{c}, Error);
  c = small();
  c.state_dim = 0;
  CHECK_THROWS_AS(Reservoir{c}, Error);
}

TEST_CASE("run: shapes, zero input, window buffer layout") {
  const Reservoir r(small());
  const CMat z = r.run(CMat::Zero(20, 3));
  CHECK(z.rows() == 20);
  CHECK(z.cols() == 8 + 3 * 4);
  CHECK(z.norm() == 0.0);
  std::mt19937_64 rng(61);
  const CMat u = oracle::random_frame(10, 3, rng);
  const CMat s = r.run(u);
  CHECK(s.row(0).head(8).norm() == 0.0);  // s(0) = 0
  for (Index t = 0; t < 10; ++t)
    for (Index j = 0; j < 4; ++j) {
      const CMat blk = s.block(t, 8 + 3 * j, 1, 3);
      if (t - j >= 0) CHECK((blk - u.row(t - j)).norm() == 0.0);
      else CHECK(blk.norm() == 0.0);
    }
  // state recursion by hand
  const auto& w = r.w_tran();
  for (Index t = 0; t + 1 < 10; ++t) {
    const CVec v = s.row(t).transpose();
    const CVec zt = w.cast<cplx>() * v;
    for (Index i = 0; i < 8; ++i) {
      const cplx expect(std::tanh(zt(i).real()), std::tanh(zt(i).imag()));
      CHECK(std::abs(s(t + 1, i) - expect) < 1e-14);
    }
  }
  CHECK_THROWS_AS(r.run(CMat::Zero(5, 2)), Error);
}

TEST_CASE("echo-state contraction at spectral radius 0.9") {
  auto cfg = small();
  cfg.input_scale = 0.5;
  const Reservoir r(cfg);
  std::mt19937_64 rng(62);
  const CMat u = oracle::random_frame(200, 3, rng);
  CVec s0(8);
  for (Index i = 0; i < 8; ++i) s0(i) = cplx(0.9 * ((i % 2) ? 1 : -1), 0.5);
  const CMat a = r.run(u), b = r.run(u, &s0);
  CHECK((a.row(0).head(8) - b.row(0).head(8)).norm() > 1.0);
  CHECK((a.row(199).head(8) - b.row(199).head(8)).norm() < 1e-6);
}

TEST_CASE("conjugate symmetry of the split activation") {
  const Reservoir r(small());
  std::mt19937_64 rng(63);
  const CMat u = oracle::random_frame(30, 3, rng);
  CHECK((r.run(u.conjugate()).conjugate() - r.run(u)).norm() < 1e-13);
}

TEST_CASE("planted readout recovery") {
  std::mt19937_64 rng(64);
  const CMat s = oracle::random_frame(40, 12, rng);
  const CMat w_true = oracle::random_frame(12, 5, rng);
  const CMat x = s * w_true;
  CHECK(oracle::rel_err(fit_full(s, x, 0.0).w_out, w_true) < 1e-8);
  Mask om = Mask::Constant(40, 5, false);
  for (Index n = 0; n < 5; ++n)
    for (Index r = 0; r < 40; ++r) om(r, n) = ((r + n) % 3) != 0;  // >= 12 rows per column
  const auto fit = fit_masked(s, x, om, 0.0);
  CHECK(fit.empty_columns.empty());
  CHECK(oracle::rel_err(fit.w_out, w_true) < 1e-8);
  CHECK(masked(CMat(s * fit.w_out - x), om).norm() / x.norm() < 1e-8);
}

TEST_CASE("full-support masked fit equals the full fit") {
  std::mt19937_64 rng(65);
  const CMat s = oracle::random_frame(30, 10, rng);
  const CMat x = oracle::random_frame(30, 4, rng);
  for (double ridge : {0.0, 1e-4, 0.3}) {
    const CMat a = fit_masked(s, x, Mask::Constant(30, 4, true), ridge).w_out;
    const CMat b = fit_full(s, x, ridge).w_out;
    CHECK(oracle::rel_err(a, b) < 1e-10);
  }
}

TEST_CASE("masked ridge optimality and underdetermined supports") {
  std::mt19937_64 rng(66);
  const CMat s = oracle::random_frame(25, 9, rng);
  const CMat x = oracle::random_frame(25, 3, rng);
  Mask om = Mask::Constant(25, 3, false);
  om.col(0).head(20).setConstant(true);
  om.col(1).segment(3, 5).setConstant(true);  // fewer rows than unknowns
  om.col(2).setConstant(true);
  for (double ridge : {1e-4, 0.1}) {
    const auto fit = fit_masked(s, x, om, ridge);
    CHECK(normal_eq_residual(s, x, om, fit.w_out, ridge_lambda(s, ridge)) < 1e-8);
  }
  const auto mn = fit_masked(s, x, om, 0.0);
  // minimum-norm interpolation on the short support
  CHECK((s.middleRows(3, 5) * mn.w_out.col(1) - x.col(1).segment(3, 5)).norm() < 1e-10);
  const CMat a = s.middleRows(3, 5);
  const CVec w_mn = a.adjoint() * (a * a.adjoint()).ldlt().solve(x.col(1).segment(3, 5));
  CHECK((mn.w_out.col(1) - w_mn).norm() < 1e-8);
}

TEST_CASE("empty support and the ridge limit") {
  std::mt19937_64 rng(67);
  const CMat s = oracle::random_frame(10, 4, rng);
  const CMat x = oracle::random_frame(10, 2, rng);
  Mask om = Mask::Constant(10, 2, true);
  om.col(1).setConstant(false);
  const auto fit = fit_masked(s, x, om, 1e-3);
  CHECK(fit.empty_columns == std::vector<Index>{1});
  CHECK(fit.w_out.col(1).norm() == 0.0);
  CHECK(fit_full(s, x, 1e12).w_out.norm() < 1e-9);
  CHECK(fit_full(s, s, 0.0).w_out.isApprox(CMat::Identity(4, 4), 1e-10));
}

TEST_CASE("predict") {
  CMat s(3, 2), w(2, 2);
  s << 1, 2, 3, 4, 5, 6;
  w << cplx(0, 1), 1, 2, cplx(1, -1);
  CMat ref(3, 2);
  ref << cplx(4, 1), cplx(3, -2), cplx(8, 3), cplx(7, -4), cplx(12, 5), cplx(11, -6);
  CHECK((predict(s, w) - ref).norm() < 1e-15);
  CHECK(predict(s, CMat::Zero(2, 2)).norm() == 0.0);
  CHECK_THROWS_AS(predict(s, CMat::Zero(3, 2)), Error);
}

TEST_CASE("delay search") {
  // Targets equal the inputs. With a one-slot buffer only delay 0 exposes
  // y(t) to the readout.
  std::mt19937_64 rng(68);
  auto cfg = small(4);
  cfg.window_len = 1;
  cfg.l_forget = 3;
  cfg.ridge = 1e-8;
  const Reservoir r(cfg);
  const CMat y = oracle::random_frame(40, 4, rng);
  Mask om = Mask::Constant(40, 4, false);
  for (Index t = 0; t < 40; t += 2) om.row(t).setConstant(true);
  const auto t = train_with_delay_search(r, y, masked(y, om), om);
  CHECK(t.losses.size() == 4);
  for (double l : t.losses) CHECK(l >= 0.0);
  CHECK(t.delay == 0);
  CHECK(t.losses[0] < 1e-4);
  const auto again = train_with_delay_search(r, y, masked(y, om), om);
  CHECK(again.losses == t.losses);
  CHECK((again.w_out - t.w_out).norm() == 0.0);

  // target delayed by two steps relative to the input: with l_forget >= 2 the
  // search finds the alignment
  CMat late = CMat::Zero(40, 4);
  late.topRows(38) = y.bottomRows(38);  // x(t) = y(t + 2)
  const auto u = train_with_delay_search(r, y, masked(late, om), om);
  CHECK(u.delay == 2);

  cfg.l_forget = 40;
  CHECK_THROWS_AS(train_with_delay_search(Reservoir(cfg), y, y, om), Error);
  CHECK_THROWS_AS(train_with_delay_search(r, y, y, Mask::Constant(40, 4, false)), Error);
}

TEST_CASE("multi-RC partition") {
  std::mt19937_64 rng(69);
  const auto p = make_pattern(PatternKind::block_rows, 16, 14, 0.25, 0);
  const CMat y = oracle::random_frame(16, 14, rng), x = oracle::random_frame(16, 14, rng);
  const auto ds = extract_interleaved(y, x, p);

  const auto groups = partition_columns(14, 4);
  REQUIRE(groups.size() == 4);
  CHECK(groups[0] == std::pair<Index, Index>{0, 4});
  CHECK(groups[3] == std::pair<Index, Index>{11, 14});
  CHECK_THROWS_AS(partition_columns(14, 15), Error);

  const auto one = partition_multi_rc(ds, 1, 1, 1);
  CHECK(oracle::rel_err(one.groups[0].y_train, row_dft(y)) < 1e-14);
  CHECK(oracle::rel_err(one.groups[0].x_train, row_dft(masked(x, p.omega))) < 1e-14);
  // the row-supported mask commutes with the row DFT
  CHECK(oracle::rel_err(one.groups[0].x_train, masked(row_dft(x), p.omega)) < 1e-12);

  const auto all = partition_multi_rc(ds, 1, 1, 14);
  CHECK(all.groups.size() == 14);
  for (const auto& g : all.groups) CHECK(g.y_train.cols() == 1);

  // merging the transformed inputs returns the DD frame
  std::vector<CMat> est;
  for (const auto& g : all.groups) est.push_back(g.y_test);
  CHECK(oracle::rel_err(merge_multi_rc(all, est), y) < 1e-12);

  const auto stair = make_pattern(PatternKind::staircase, 16, 14, 0.1, 0);
  CHECK_THROWS_AS(partition_multi_rc(extract_interleaved(y, x, stair), 1, 1, 2), Error);
}

TEST_CASE("multi-RC partition with 2x2 antennas") {
  std::mt19937_64 rng(70);
  const auto p = make_pattern(PatternKind::block_rows, 8, 6, 0.25, 0);
  std::vector<CMat> y{oracle::random_frame(8, 6, rng), oracle::random_frame(8, 6, rng)};
  std::vector<CMat> x{masked(oracle::random_frame(8, 6, rng), p.omega), masked(oracle::random_frame(8, 6, rng), p.omega)};
  std::vector<FrameDataset> per_rx{extract_interleaved(y[0], x[0], p), extract_interleaved(y[1], x[0], p)};
  const auto part = partition_multi_rc(stack_mimo(per_rx, x), 2, 2, 3);
  REQUIRE(part.groups.size() == 3);
  const auto& g1 = part.groups[1];
  CHECK(g1.y_train.cols() == 4);  // 2 columns x 2 receive antennas
  CHECK(oracle::rel_err(g1.y_train.middleCols(2, 2), row_dft(y[1]).middleCols(2, 2)) < 1e-14);
  CHECK(oracle::rel_err(g1.x_train.middleCols(0, 2), row_dft(x[0]).middleCols(2, 2)) < 1e-14);
  std::vector<CMat> est;
  for (const auto& g : part.groups) est.push_back(g.x_train);
  CHECK(oracle::rel_err(merge_multi_rc(part, est), stack_blocks(x)) < 1e-12);
}

TEST_CASE("detect") {
  const auto c = Constellation::qpsk();
  CMat clean(2, 2);
  clean << cplx(1, 1), cplx(-1, 1), cplx(1, -1), cplx(-1, -1);
  CHECK((detect(clean, PilotScheme::interleaved, c) - clean).norm() == 0.0);
  CHECK((detect(detect(CMat(clean * 0.7), PilotScheme::interleaved, c), PilotScheme::interleaved, c) - clean).norm() == 0.0);
  const CMat pilot = CMat::Constant(2, 2, cplx(3.0, 0.0));
  CHECK((detect(CMat(clean + pilot), PilotScheme::superimposed, c, &pilot) - clean).norm() == 0.0);
  CHECK_THROWS_AS(detect(clean, PilotScheme::superimposed, c), Error);
}
