#include "otfs/equalizers.hpp"
#include "otfs/transforms.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

using namespace otfs;

namespace {

std::vector<std::uint8_t> random_bits(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::uint8_t> b(n);
  for (auto& v : b) v = static_cast<std::uint8_t>(rng() & 1u);
  return b;
}

CMat grid_of(const std::vector<cplx>& s, Index m, Index n) {
  CMat x(m, n);
  x.reshaped() = Eigen::Map<const CVec>(s.data(), m * n);
  return x;
}

ReservoirConfig desk_rc(Index window, double ridge, double scale) {
  ReservoirConfig r;
  r.state_dim = 8;
  r.window_len = window;
  r.ridge = ridge;
  r.input_scale = scale;
  r.l_forget = 2;
  r.seed = 7;
  return r;
}

struct Link {
  PilotScheme scheme;
  PilotPattern pattern;
  std::vector<std::uint8_t> bits;
  CMat x;
  FrameObservation obs;
};

// One SISO frame through kernel h with optional noise.
Link make_link(PilotScheme scheme, const PilotPattern& p, const DdKernel& h, double snr_db, std::mt19937_64& rng,
               double rho = 0.5) {
  const auto c = Constellation::qpsk();
  Link k{scheme, p, {}, {}, {}};
  const Index m = p.rows(), n = p.cols();
  k.obs.scheme = scheme;
  k.obs.pattern = p;
  if (scheme == PilotScheme::interleaved) {
    k.bits = random_bits(static_cast<std::size_t>(2 * (m * n - p.size())), rng);
    const auto f = build_interleaved(k.bits, p, c, 3);
    k.x = f.x;
    k.obs.x_train = {f.x_train};
  } else {
    k.bits = random_bits(static_cast<std::size_t>(2 * m * n), rng);
    const auto f = build_superimposed(grid_of(c.map_bits(k.bits), m, n), p, rho);
    k.x = f.x;
    k.obs.pilot_dd = {f.pilot_dd};
  }
  CMat y = apply_dd_kernel(k.x, h);
  if (!std::isinf(snr_db)) {
    Rng nrng(rng());
    const auto noisy = add_awgn(CVec(y.reshaped()), snr_db, nrng);
    y.reshaped() = noisy.samples;
    k.obs.noise_var = noisy.noise_var;
  }
  k.obs.y = {y};
  k.obs.kernels = {h};
  k.obs.signal_energy = k.x.squaredNorm() / static_cast<double>(k.x.size());
  return k;
}

BerCount count_errors(const Link& k, const EqualizerOutput& out) {
  const auto c = Constellation::qpsk();
  return ber(grid_bits(out.detected[0], data_mask(k.scheme, k.pattern), c), k.bits);
}

}  // namespace

TEST_CASE("ber counting") {
  std::vector<std::uint8_t> a(100, 0), b(100, 1);
  CHECK(ber(a, a).rate() == 0.0);
  CHECK(ber(a, b).rate() == 1.0);
  auto c = a;
  c[3] = c[50] = c[99] = 1;
  CHECK(ber(c, a).errors == 3);
  CHECK(ber(c, a).rate() == doctest::Approx(0.03));
  CHECK_THROWS_AS(ber(std::span(a).first(99), a), Error);
}

TEST_CASE("DD MMSE with perfect CSI") {
  std::mt19937_64 rng(81);
  const auto c = Constellation::qpsk();
  SUBCASE("noise-free deconvolution of a single tap") {
    const auto h = DdKernel::from_taps(16, 6, {{2, 3, cplx(0.4, -0.9)}});
    const CMat x = grid_of(c.map_bits(random_bits(2 * 96, rng)), 16, 6);
    CHECK(oracle::rel_err(dd_mmse_estimate(apply_dd_kernel(x, h), h, 0.0), x) < 1e-12);
    CHECK((dd_mmse_perfect_csi(apply_dd_kernel(x, h), h, 0.0, c) - x).norm() == 0.0);
  }
  SUBCASE("matches a dense regularized solve of the block-circulant system") {
    const DdKernel h{oracle::random_frame(4, 3, rng)};
    const CMat y = oracle::random_frame(4, 3, rng);
    const double reg = 0.37;
    const CMat a = oracle::conv_matrix(h.values);
    CMat g = a.adjoint() * a;
    g.diagonal().array() += reg;
    const CVec ref = g.ldlt().solve(a.adjoint() * CVec(y.reshaped()));
    CHECK(oracle::rel_err(CVec(dd_mmse_estimate(y, h, reg).reshaped()), ref) < 1e-10);
  }
  SUBCASE("2x2 MIMO matches the dense stacked solve") {
    std::vector<DdKernel> h;
    for (int i = 0; i < 4; ++i) h.push_back({oracle::random_frame(4, 3, rng)});
    const std::vector<CMat> y{oracle::random_frame(4, 3, rng), oracle::random_frame(4, 3, rng)};
    const double reg = 0.2;
    CMat a(24, 24);
    for (int r = 0; r < 2; ++r)
      for (int t = 0; t < 2; ++t) a.block(12 * r, 12 * t, 12, 12) = oracle::conv_matrix(h[r * 2 + t].values);
    CVec yy(24);
    yy << CVec(y[0].reshaped()), CVec(y[1].reshaped());
    CMat g = a.adjoint() * a;
    g.diagonal().array() += reg;
    const CVec ref = g.ldlt().solve(a.adjoint() * yy);
    const auto est = dd_mmse_estimate(y, h, 2, reg);
    CHECK(oracle::rel_err(CVec(est[0].reshaped()), CVec(ref.head(12))) < 1e-10);
    CHECK(oracle::rel_err(CVec(est[1].reshaped()), CVec(ref.tail(12))) < 1e-10);
  }
  SUBCASE("shrinks to zero as the noise grows") {
    const DdKernel h{oracle::random_frame(8, 4, rng)};
    const CMat y = oracle::random_frame(8, 4, rng);
    CHECK(dd_mmse_estimate(y, h, 1e15).norm() < 1e-10 * y.norm());
  }
}

TEST_CASE("TF channel estimate") {
  std::mt19937_64 rng(82);
  const auto c = Constellation::qpsk();
  SUBCASE("flat channel, noise-free: exact estimate and recovery") {
    // data on the pilot TF cells is cancelled at the transmitter; what is left
    // after quantization is exact when the pilot share is small
    const auto p = make_pattern(PatternKind::staircase, 64, 14, 0.0469, 0);
    const auto h = DdKernel::from_taps(64, 14, {{0, 0, cplx(0.3, 0.8)}});
    const auto k = make_link(PilotScheme::superimposed, p, h, kNoNoise, rng, 0.0469);
    const CMat est = tf_channel_estimate(isfft(k.obs.y[0]), isfft(k.obs.pilot_dd[0]), p.omega);
    CHECK((est.array() - cplx(0.3, 0.8)).abs().maxCoeff() < 1e-12);
    EqualizerSpec spec{EqualizerKind::tf_lmmse_estimated, std::nullopt, 1};
    CHECK(count_errors(k, equalize_frame(spec, k.obs, c)).errors == 0);
  }
  SUBCASE("estimate error falls as pilots get denser") {
    PathList paths{{{0, 300.0, cplx(0.8, 0.1)}, {1, -450.0, cplx(-0.3, 0.4)}, {2, 100.0, cplx(0.2, -0.2)}}, 555.0};
    WaveformConfig wf;
    const auto h = kernel_from_paths(paths, wf);
    const CMat truth = tf_response(h);
    double last = 1e9;
    for (double eta : {0.04, 0.08, 0.16, 0.32}) {
      const auto p = make_pattern(PatternKind::staircase, 64, 14, eta, 0);
      const auto k = make_link(PilotScheme::superimposed, p, h, kNoNoise, rng, 0.2);
      const CMat est = tf_channel_estimate(isfft(k.obs.y[0]), isfft(k.obs.pilot_dd[0]), p.omega);
      const double err = oracle::rel_err(est, truth);
      MESSAGE("overhead " << eta << " estimate error " << err);
      CHECK(err < last);
      last = err;
    }
  }
  SUBCASE("leave-one-out error term") {
    // flat channel: every held-out pilot is predicted exactly
    const auto p = make_pattern(PatternKind::staircase, 64, 14, 0.0469, 0);
    const auto flat = make_link(PilotScheme::superimposed, p, DdKernel::from_taps(64, 14, {{0, 0, cplx(0.6, -0.2)}}),
                                kNoNoise, rng, 0.0469);
    const CMat pilot_tf = isfft(flat.obs.pilot_dd[0]);
    CHECK(tf_estimate_error_var(isfft(flat.obs.y[0]), pilot_tf, p.omega, 0.0) < 1e-20);
    // at 10 dB what remains is the noise carried by the interpolated estimate,
    // no larger than the LS noise at a pilot cell
    double acc = 0.0, ls = 0.0;
    for (int t = 0; t < 40; ++t) {
      const auto k = make_link(PilotScheme::superimposed, p, DdKernel::from_taps(64, 14, {{0, 0, cplx(0.6, -0.2)}}),
                               10.0, rng, 0.0469);
      const CMat ptf = isfft(k.obs.pilot_dd[0]);
      acc += tf_estimate_error_var(isfft(k.obs.y[0]), ptf, p.omega, k.obs.noise_var);
      ls += k.obs.noise_var / masked(ptf, p.omega).cwiseAbs2().sum() * static_cast<double>(p.size());
    }
    MESSAGE("flat channel at 10 dB: leave-one-out " << acc / 40.0 << ", LS noise " << ls / 40.0);
    CHECK(acc > 0.0);
    CHECK(acc < ls);
    // a frequency-selective channel sampled by three pilots per column is not
    const WaveformConfig wf;
    const auto h = kernel_from_paths({{{0, 0.0, cplx(0.7, 0)}, {2, 0.0, cplx(0.0, 0.7)}}, 0.0}, wf);
    const auto sel = make_link(PilotScheme::superimposed, p, h, kNoNoise, rng, 0.0469);
    CHECK(tf_estimate_error_var(isfft(sel.obs.y[0]), pilot_tf, p.omega, 0.0) > 0.05);
  }
  SUBCASE("a single pilot cannot be interpolated") {
    Mask om = Mask::Constant(8, 4, false);
    om(2, 1) = true;
    CHECK_THROWS_AS(tf_channel_estimate(CMat::Ones(8, 4), CMat::Ones(8, 4), om), Error);
    om(5, 1) = true;  // two rows, one column
    CHECK_THROWS_AS(tf_channel_estimate(CMat::Ones(8, 4), CMat::Ones(8, 4), om), Error);
  }
}

TEST_CASE("every equalizer is exact on a noise-free identity channel") {
  std::mt19937_64 rng(83);
  const auto c = Constellation::qpsk();
  const auto h = DdKernel::identity(64, 14);
  const auto rows = make_pattern(PatternKind::block_rows, 64, 14, 0.0469, 0);
  const auto stair = make_pattern(PatternKind::staircase, 64, 14, 0.0469, 0);
  const auto ki = make_link(PilotScheme::interleaved, rows, h, kNoNoise, rng);
  const auto ks = make_link(PilotScheme::superimposed, stair, h, kNoNoise, rng);
  EqualizerSpec multi{EqualizerKind::rc_interleaved, desk_rc(1, 1e-3, 0.05), 7};
  CHECK(count_errors(ki, equalize_frame(multi, ki.obs, c)).errors == 0);
  // a single RC over all 14 Doppler inputs needs more pilot rows than unknowns
  const auto dense = make_pattern(PatternKind::block_rows, 64, 14, 0.4, 0);
  const auto kd = make_link(PilotScheme::interleaved, dense, h, kNoNoise, rng);
  EqualizerSpec single{EqualizerKind::rc_interleaved, desk_rc(1, 1e-3, 0.05), 1};
  CHECK(count_errors(kd, equalize_frame(single, kd.obs, c)).errors == 0);
  EqualizerSpec sup{EqualizerKind::rc_superimposed, desk_rc(3, 1e-4, 0.3), 1};
  CHECK(count_errors(ks, equalize_frame(sup, ks.obs, c)).errors == 0);
  EqualizerSpec mmse{EqualizerKind::dd_mmse_perfect_csi, std::nullopt, 1};
  CHECK(count_errors(ki, equalize_frame(mmse, ki.obs, c)).errors == 0);
  CHECK(count_errors(ks, equalize_frame(mmse, ks.obs, c)).errors == 0);
  EqualizerSpec lmmse{EqualizerKind::tf_lmmse_estimated, std::nullopt, 1};
  CHECK(count_errors(ks, equalize_frame(lmmse, ks.obs, c)).errors == 0);
  EqualizerSpec none{EqualizerKind::none, std::nullopt, 1};
  CHECK(count_errors(ki, equalize_frame(none, ki.obs, c)).errors == 0);
}

TEST_CASE("RC interleaved beats direct quantization on a 3-tap channel at 30 dB") {
  std::mt19937_64 rng(84);
  const auto c = Constellation::qpsk();
  WaveformConfig wf;
  const auto p = make_pattern(PatternKind::block_rows, 64, 14, 0.1875, 0);
  EqualizerSpec rc{EqualizerKind::rc_interleaved, desk_rc(3, 0.1, 0.3), 7};
  EqualizerSpec none{EqualizerKind::none, std::nullopt, 1};
  std::int64_t e_rc = 0, e_none = 0;
  Rng ch(85);
  for (int f = 0; f < 6; ++f) {
    const auto h = kernel_from_paths(generate_paths({3, 2, 555.0, PowerProfile::exponential}, ch), wf);
    const auto k = make_link(PilotScheme::interleaved, p, h, 30.0, rng);
    const auto out = equalize_frame(rc, k.obs, c);
    CHECK(out.delays.size() == 7);
    CHECK(out.losses.size() == 7 * 3);
    e_rc += count_errors(k, out).errors;
    e_none += count_errors(k, equalize_frame(none, k.obs, c)).errors;
  }
  MESSAGE("errors rc " << e_rc << " none " << e_none);
  CHECK(e_rc < e_none / 2);
}

TEST_CASE("quarter-turn rotation of pilots and data rotates the RC decisions") {
  // Split tanh is odd in each part, so j * input gives j * state; with the
  // receiver's pilot copies rotated alike, decisions rotate and the error
  // count is unchanged.
  std::mt19937_64 rng(86);
  const auto c = Constellation::qpsk();
  WaveformConfig wf;
  Rng ch(87);
  const auto h = kernel_from_paths(generate_paths({3, 2, 555.0, PowerProfile::exponential}, ch), wf);
  const auto p = make_pattern(PatternKind::block_rows, 64, 14, 0.1875, 0);
  const auto k = make_link(PilotScheme::interleaved, p, h, 15.0, rng);
  auto rot = k.obs;
  const cplx j(0.0, 1.0);
  rot.y[0] *= j;
  rot.x_train[0] *= j;
  EqualizerSpec rc{EqualizerKind::rc_interleaved, desk_rc(3, 0.1, 0.3), 7};
  const auto a = equalize_frame(rc, k.obs, c), b = equalize_frame(rc, rot, c);
  const Mask d = data_mask(k.scheme, p);
  CHECK((masked(CMat(b.detected[0] - j * a.detected[0]), d)).norm() == 0.0);
}

TEST_CASE("equalizer plumbing errors") {
  std::mt19937_64 rng(88);
  const auto c = Constellation::qpsk();
  const auto p = make_pattern(PatternKind::block_rows, 16, 6, 0.2, 0);
  const auto k = make_link(PilotScheme::interleaved, p, DdKernel::identity(16, 6), kNoNoise, rng);
  CHECK_THROWS_AS(equalize_frame({EqualizerKind::rc_superimposed, desk_rc(1, 0.1, 0.3), 1}, k.obs, c), Error);
  CHECK_THROWS_AS(equalize_frame({EqualizerKind::rc_interleaved, std::nullopt, 1}, k.obs, c), Error);
  CHECK_THROWS_AS(equalize_frame({EqualizerKind::tf_lmmse_estimated, std::nullopt, 1}, k.obs, c), Error);
  CHECK_THROWS_AS(equalize_frame({EqualizerKind::rc_interleaved, desk_rc(1, 0.1, 0.3), 0}, k.obs, c), Error);
}
