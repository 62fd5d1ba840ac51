#include "otfs/harness/sweep.hpp"

#include "otfs/modem.hpp"
#include "otfs/seed.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace otfs {

namespace {

enum Stream : std::uint64_t { kChannel = 1, kData = 2, kNoise = 3 };

std::vector<PathList> draw_links(const ExperimentConfig& cfg, double max_doppler, std::size_t dop_idx,
                                 Index realization) {
  if (cfg.channel.paths) return {*cfg.channel.paths};
  Rng rng(derive_seed(cfg.sim.master_seed, {kChannel, dop_idx, static_cast<std::uint64_t>(realization)}));
  ChannelGenerator gen = cfg.channel.generator;
  gen.max_doppler_hz = max_doppler;
  std::vector<PathList> links;
  for (Index i = 0; i < cfg.channel.n_t * cfg.channel.n_r; ++i) links.push_back(generate_paths(gen, rng));
  return links;
}

std::vector<std::uint8_t> random_bits(std::size_t count, Rng& rng) {
  std::vector<std::uint8_t> bits(count);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() >> 63);
  return bits;
}

CMat fill_grid(const std::vector<cplx>& symbols, Index m, Index n) {
  CMat x(m, n);
  x.reshaped() = Eigen::Map<const CVec>(symbols.data(), static_cast<Index>(symbols.size()));
  return x;
}

}  // namespace

FrameOutcome simulate_frame(const ExperimentConfig& cfg, std::size_t snr_idx, std::size_t dop_idx, Index realization,
                            Index frame) {
  const auto& wf = cfg.waveform;
  const Index m = wf.m, n = wf.n, n_t = cfg.channel.n_t, n_r = cfg.channel.n_r;
  const auto c = Constellation::from_name(cfg.constellation);
  const auto pattern = make_pattern(cfg.pilot.kind, m, n, cfg.pilot.overhead, cfg.pilot.pilot_seed);
  const Mask data = data_mask(cfg.pilot.scheme, pattern);
  const auto bits_per_antenna = static_cast<std::size_t>(count(data) * c.bits_per_symbol());

  const auto links = draw_links(cfg, cfg.dopplers()[dop_idx], dop_idx, realization);
  MimoConfig mimo{n_t, n_r, links};

  Rng data_rng(derive_seed(cfg.sim.master_seed, {kData, dop_idx, static_cast<std::uint64_t>(realization),
                                                 static_cast<std::uint64_t>(frame)}));
  FrameObservation obs;
  obs.scheme = cfg.pilot.scheme;
  obs.pattern = pattern;
  obs.n_t = n_t;
  std::vector<std::vector<std::uint8_t>> truth;
  std::vector<CMat> tx;
  double energy = 0.0;
  for (Index t = 0; t < n_t; ++t) {
    truth.push_back(random_bits(bits_per_antenna, data_rng));
    if (cfg.pilot.scheme == PilotScheme::interleaved) {
      auto f = build_interleaved(truth.back(), pattern, c, cfg.pilot.pilot_seed, t);
      obs.x_train.push_back(f.x_train);
      tx.push_back(std::move(f.x));
    } else {
      const CMat phases = pilot_phases(m, n, cfg.pilot.pilot_seed, t);
      auto f = build_superimposed(fill_grid(c.map_bits(truth.back()), m, n), pattern, cfg.pilot.power_fraction,
                                  &phases);
      obs.pilot_dd.push_back(f.pilot_dd);
      tx.push_back(std::move(f.x));
    }
    energy += tx.back().squaredNorm();
  }
  obs.signal_energy = energy / static_cast<double>(n_t * m * n);

  // channel, then noise in the time domain at the measured receive power
  std::vector<CVec> rx;
  if (cfg.channel.mode == ChannelMode::dd_kernel) {
    obs.kernels = kernels_from_mimo(mimo, wf);
    for (const auto& y : apply_mimo(tx, obs.kernels, n_r)) rx.push_back(modulate(y, wf));
  } else {
    std::vector<CVec> s;
    for (const auto& x : tx) s.push_back(modulate(x, wf));
    rx = apply_mimo(s, mimo, -static_cast<double>(wf.cp_len) / wf.sample_rate(), wf.sample_rate());
    if (cfg.equalizer.kind == EqualizerKind::dd_mmse_perfect_csi) obs.kernels = kernels_from_mimo(mimo, wf);
  }
  const double snr = cfg.sim.snr_db_list[snr_idx];
  double power = 0.0;
  for (const auto& r : rx) power += mean_power(r);
  power /= static_cast<double>(n_r);
  if (!std::isinf(snr)) {
    if (!(power > 0.0)) throw Error("simulate_frame: zero received power");
    obs.noise_var = power / std::pow(10.0, snr / 10.0);
    Rng noise_rng(derive_seed(cfg.sim.master_seed, {kNoise, dop_idx, static_cast<std::uint64_t>(realization),
                                                    static_cast<std::uint64_t>(frame), snr_idx}));
    for (auto& r : rx) r = add_noise(r, obs.noise_var, noise_rng);
  }
  for (const auto& r : rx) obs.y.push_back(demodulate(r, wf));

  const auto out = equalize_frame(cfg.equalizer, obs, c);
  FrameOutcome res;
  res.train_loss = out.train_loss;
  for (Index t = 0; t < n_t; ++t) {
    const auto detected = grid_bits(out.detected[static_cast<std::size_t>(t)], data, c);
    const auto b = ber(detected, truth[static_cast<std::size_t>(t)]);
    res.n_bits += b.total;
    res.n_errors += b.errors;
  }
  return res;
}

SweepResult run_sweep_detailed(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  cfg.finalize();
  const auto dops = cfg.dopplers();
  const std::size_t n_snr = cfg.sim.snr_db_list.size(), n_dop = dops.size();
  const auto n_real = static_cast<std::size_t>(cfg.sim.n_channel_realizations);
  const auto n_frames = static_cast<std::size_t>(cfg.sim.n_frames);
  const std::size_t per_cell = n_real * n_frames;
  const std::size_t total = n_snr * n_dop * per_cell;

  // task i -> (snr, dop, realization, frame) in lexicographic order
  std::vector<FrameOutcome> outcomes(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      const std::size_t frame = i % n_frames;
      const std::size_t real = (i / n_frames) % n_real;
      const std::size_t dop = (i / per_cell) % n_dop;
      const std::size_t snr = i / (per_cell * n_dop);
      try {
        outcomes[i] = simulate_frame(cfg, snr, dop, static_cast<Index>(real), static_cast<Index>(frame));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(total);
        return;
      }
    }
  };
  const auto n_workers = static_cast<std::size_t>(std::max<Index>(1, cfg.sim.workers));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(n_workers, total); ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  const double over = cfg.pilot.scheme == PilotScheme::superimposed
                          ? cfg.pilot.power_fraction
                          : overhead(make_pattern(cfg.pilot.kind, cfg.waveform.m, cfg.waveform.n, cfg.pilot.overhead,
                                                  cfg.pilot.pilot_seed));
  SweepResult res;
  for (std::size_t s = 0; s < n_snr; ++s) {
    for (std::size_t d = 0; d < n_dop; ++d) {
      ResultRecord r;
      r.scheme = to_string(cfg.pilot.scheme);
      r.equalizer = to_string(cfg.equalizer.kind);
      r.snr_db = cfg.sim.snr_db_list[s];
      r.doppler_hz = dops[d];
      r.k_rc = cfg.equalizer.k_rc;
      r.overhead = over;
      r.n_t = cfg.channel.n_t;
      r.n_r = cfg.channel.n_r;
      r.n_frames = static_cast<std::int64_t>(per_cell);
      r.seed = cfg.sim.master_seed;
      // fixed summation order: task index
      const std::size_t base = (s * n_dop + d) * per_cell;
      double loss = 0.0, sum = 0.0, sum_sq = 0.0;
      for (std::size_t q = 0; q < n_real; ++q) {
        std::int64_t bits = 0, errors = 0;
        for (std::size_t i = base + q * n_frames; i < base + (q + 1) * n_frames; ++i) {
          const auto& o = outcomes[i];
          bits += o.n_bits;
          errors += o.n_errors;
          loss += o.train_loss;
        }
        r.n_bits += bits;
        r.n_errors += errors;
        const double b = bits ? static_cast<double>(errors) / static_cast<double>(bits) : 0.0;
        sum += b;
        sum_sq += b * b;
      }
      r.ber = r.n_bits ? static_cast<double>(r.n_errors) / static_cast<double>(r.n_bits) : 0.0;
      r.mean_train_loss = loss / static_cast<double>(per_cell);
      // spread across channel realizations (frames within one share the channel)
      const double cnt = static_cast<double>(n_real);
      const double mean = sum / cnt;
      const double var = n_real > 1 ? std::max(0.0, (sum_sq - cnt * mean * mean) / (cnt - 1.0)) : 0.0;
      res.records.push_back(std::move(r));
      res.stats.push_back({std::sqrt(var / cnt)});
    }
  }
  return res;
}

std::vector<ResultRecord> run_sweep(const ExperimentConfig& cfg) { return run_sweep_detailed(cfg).records; }

}  // namespace otfs
