#include "otfs/harness/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace otfs {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
  if (v == "-inf") return -std::numeric_limits<double>::infinity();
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || v.empty()) throw ConfigError(key, "expected a number, got '" + v + "'");
  return out;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || v.empty()) throw ConfigError(key, "expected an integer, got '" + v + "'");
  return out;
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split(v, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw ConfigError(key, "list must not be empty");
  return out;
}

PathList parse_paths(const std::string& key, const std::string& v) {
  PathList p;
  for (const auto& group : split(v, ';')) {
    if (group.empty()) continue;
    std::istringstream in(group);
    std::vector<std::string> f;
    std::string tok;
    while (in >> tok) f.push_back(tok);
    if (f.size() != 4) throw ConfigError(key, "each path needs 'delay doppler_hz gain_re gain_im'");
    p.paths.push_back({parse_int<Index>(key, f[0]), parse_double(key, f[1]),
                       cplx(parse_double(key, f[2]), parse_double(key, f[3]))});
  }
  if (p.paths.empty()) throw ConfigError(key, "no paths given");
  return p;
}

// Wraps enum parsers so their errors carry the key.
template <typename F>
auto keyed(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(key, e.what());
  }
}

}  // namespace

Index ExperimentConfig::max_path_delay() const {
  return channel.paths ? channel.paths->max_delay() : channel.generator.delay_spread_samples;
}

std::vector<double> ExperimentConfig::dopplers() const {
  if (!sim.doppler_hz_list.empty()) return sim.doppler_hz_list;
  return {channel.paths ? channel.paths->max_doppler_hz : channel.generator.max_doppler_hz};
}

void ExperimentConfig::finalize() {
  if (cp_auto) waveform.cp_len = max_path_delay();
  keyed("waveform", [&] { waveform.validate(); });
  keyed("waveform.constellation", [&] { return Constellation::from_name(constellation); });
  if (max_path_delay() >= waveform.m) throw ConfigError("channel", "path delays must be < waveform.m");
  if (channel.mode == ChannelMode::tdl && max_path_delay() > waveform.cp_len) {
    throw ConfigError("waveform.cp_len", "time-domain channel needs cp_len >= largest path delay");
  }
  if (channel.n_t < 1) throw ConfigError("channel.mimo.n_t", "must be >= 1");
  if (channel.n_r < 1) throw ConfigError("channel.mimo.n_r", "must be >= 1");
  if (channel.paths) {
    if (channel.n_t != 1 || channel.n_r != 1) throw ConfigError("channel.paths", "fixed paths are SISO only");
    if (sim.doppler_hz_list.size() > 1) throw ConfigError("sim.doppler_hz_list", "fixed paths allow one Doppler value");
    channel.paths->max_doppler_hz = channel.generator.max_doppler_hz;
    keyed("channel.paths", [&] { channel.paths->validate(waveform); });
  } else {
    if (channel.generator.n_paths < 1) throw ConfigError("channel.n_paths", "must be >= 1");
    if (channel.generator.delay_spread_samples < 0) throw ConfigError("channel.delay_spread_samples", "must be >= 0");
    if (!(channel.generator.max_doppler_hz >= 0.0)) throw ConfigError("channel.max_doppler_hz", "must be >= 0");
  }
  for (double d : sim.doppler_hz_list) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw ConfigError("sim.doppler_hz_list", "values must be finite and >= 0");
  }
  if (!(pilot.overhead > 0.0 && pilot.overhead < 1.0)) throw ConfigError("pilot.overhead", "must be in (0, 1)");
  if (!(pilot.power_fraction > 0.0 && pilot.power_fraction < 1.0)) {
    throw ConfigError("pilot.power_fraction", "must be in (0, 1)");
  }
  keyed("pilot", [&] { make_pattern(pilot.kind, waveform.m, waveform.n, pilot.overhead, pilot.pilot_seed); });

  auto& eq = equalizer;
  if (eq.k_rc < 1 || eq.k_rc > waveform.n) throw ConfigError("equalizer.k_rc", "must be in [1, waveform.n]");
  const bool is_rc = eq.kind == EqualizerKind::rc_interleaved || eq.kind == EqualizerKind::rc_superimposed;
  if (eq.kind == EqualizerKind::rc_interleaved && pilot.scheme != PilotScheme::interleaved) {
    throw ConfigError("equalizer.kind", "rc_interleaved needs pilot.scheme = interleaved");
  }
  if (eq.kind == EqualizerKind::rc_superimposed && pilot.scheme != PilotScheme::superimposed) {
    throw ConfigError("equalizer.kind", "rc_superimposed needs pilot.scheme = superimposed");
  }
  if (eq.kind == EqualizerKind::tf_lmmse_estimated) {
    if (pilot.scheme != PilotScheme::superimposed) {
      throw ConfigError("equalizer.kind", "tf_lmmse_estimated needs TF-domain pilots (pilot.scheme = superimposed)");
    }
    if (channel.n_t != 1) throw ConfigError("equalizer.kind", "tf_lmmse_estimated supports n_t = 1");
  }
  if (eq.kind == EqualizerKind::none && channel.n_r < channel.n_t) {
    throw ConfigError("equalizer.kind", "'none' needs n_r >= n_t");
  }
  if (is_rc && eq.k_rc > 1 && pilot.scheme == PilotScheme::interleaved && pilot.kind != PatternKind::block_rows) {
    throw ConfigError("pilot.kind", "multi-RC with interleaved pilots needs block_rows");
  }
  if (eq.rc) {
    if (l_forget_auto) eq.rc->l_forget = waveform.cp_len;
    if (eq.rc->l_forget >= waveform.m) throw ConfigError("equalizer.rc.l_forget", "must be < waveform.m");
    keyed("equalizer.rc", [&] { eq.rc->validate(); });
  }
  if (sim.snr_db_list.empty()) throw ConfigError("sim.snr_db_list", "must not be empty");
  for (double s : sim.snr_db_list) {
    if (std::isnan(s) || s == -std::numeric_limits<double>::infinity()) {
      throw ConfigError("sim.snr_db_list", "values must be finite or inf");
    }
  }
  if (sim.n_frames < 1) throw ConfigError("sim.n_frames", "must be >= 1");
  if (sim.n_channel_realizations < 1) throw ConfigError("sim.n_channel_realizations", "must be >= 1");
  if (sim.workers < 1) throw ConfigError("sim.workers", "must be >= 1");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  auto& rc = *cfg.equalizer.rc;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"waveform.m", [&](auto& k, auto& v) { cfg.waveform.m = parse_int<Index>(k, v); }},
      {"waveform.n", [&](auto& k, auto& v) { cfg.waveform.n = parse_int<Index>(k, v); }},
      {"waveform.delta_f", [&](auto& k, auto& v) { cfg.waveform.delta_f = parse_double(k, v); }},
      {"waveform.constellation", [&](auto&, auto& v) { cfg.constellation = v; }},
      {"waveform.cp_len",
       [&](auto& k, auto& v) {
         cfg.cp_auto = v == "auto";
         if (!cfg.cp_auto) cfg.waveform.cp_len = parse_int<Index>(k, v);
       }},
      {"waveform.frame_structure",
       [&](auto& k, auto& v) { cfg.waveform.structure = keyed(k, [&] { return frame_structure_from_string(v); }); }},
      {"channel.mode",
       [&](auto& k, auto& v) {
         if (v == "dd_kernel") cfg.channel.mode = ChannelMode::dd_kernel;
         else if (v == "tdl") cfg.channel.mode = ChannelMode::tdl;
         else throw ConfigError(k, "expected dd_kernel or tdl");
       }},
      {"channel.paths", [&](auto& k, auto& v) { cfg.channel.paths = parse_paths(k, v); }},
      {"channel.n_paths", [&](auto& k, auto& v) { cfg.channel.generator.n_paths = parse_int<Index>(k, v); }},
      {"channel.delay_spread_samples",
       [&](auto& k, auto& v) { cfg.channel.generator.delay_spread_samples = parse_int<Index>(k, v); }},
      {"channel.max_doppler_hz", [&](auto& k, auto& v) { cfg.channel.generator.max_doppler_hz = parse_double(k, v); }},
      {"channel.profile",
       [&](auto& k, auto& v) { cfg.channel.generator.profile = keyed(k, [&] { return power_profile_from_string(v); }); }},
      {"channel.mimo.n_t", [&](auto& k, auto& v) { cfg.channel.n_t = parse_int<Index>(k, v); }},
      {"channel.mimo.n_r", [&](auto& k, auto& v) { cfg.channel.n_r = parse_int<Index>(k, v); }},
      {"pilot.scheme", [&](auto& k, auto& v) { cfg.pilot.scheme = keyed(k, [&] { return pilot_scheme_from_string(v); }); }},
      {"pilot.kind", [&](auto& k, auto& v) { cfg.pilot.kind = keyed(k, [&] { return pattern_kind_from_string(v); }); }},
      {"pilot.overhead", [&](auto& k, auto& v) { cfg.pilot.overhead = parse_double(k, v); }},
      {"pilot.power_fraction", [&](auto& k, auto& v) { cfg.pilot.power_fraction = parse_double(k, v); }},
      {"pilot.pilot_seed", [&](auto& k, auto& v) { cfg.pilot.pilot_seed = parse_int<std::uint64_t>(k, v); }},
      {"equalizer.kind",
       [&](auto& k, auto& v) { cfg.equalizer.kind = keyed(k, [&] { return equalizer_kind_from_string(v); }); }},
      {"equalizer.k_rc", [&](auto& k, auto& v) { cfg.equalizer.k_rc = parse_int<Index>(k, v); }},
      {"equalizer.rc.state_dim", [&](auto& k, auto& v) { rc.state_dim = parse_int<Index>(k, v); }},
      {"equalizer.rc.window_len", [&](auto& k, auto& v) { rc.window_len = parse_int<Index>(k, v); }},
      {"equalizer.rc.spectral_radius", [&](auto& k, auto& v) { rc.spectral_radius = parse_double(k, v); }},
      {"equalizer.rc.input_scale", [&](auto& k, auto& v) { rc.input_scale = parse_double(k, v); }},
      {"equalizer.rc.ridge", [&](auto& k, auto& v) { rc.ridge = parse_double(k, v); }},
      {"equalizer.rc.l_forget",
       [&](auto& k, auto& v) {
         cfg.l_forget_auto = v == "auto";
         if (!cfg.l_forget_auto) rc.l_forget = parse_int<Index>(k, v);
       }},
      {"equalizer.rc.seed", [&](auto& k, auto& v) { rc.seed = parse_int<std::uint64_t>(k, v); }},
      {"sim.snr_db_list", [&](auto& k, auto& v) { cfg.sim.snr_db_list = parse_list(k, v); }},
      {"sim.doppler_hz_list", [&](auto& k, auto& v) { cfg.sim.doppler_hz_list = parse_list(k, v); }},
      {"sim.n_frames", [&](auto& k, auto& v) { cfg.sim.n_frames = parse_int<Index>(k, v); }},
      {"sim.n_channel_realizations",
       [&](auto& k, auto& v) { cfg.sim.n_channel_realizations = parse_int<Index>(k, v); }},
      {"sim.master_seed", [&](auto& k, auto& v) { cfg.sim.master_seed = parse_int<std::uint64_t>(k, v); }},
      {"sim.workers", [&](auto& k, auto& v) { cfg.sim.workers = parse_int<Index>(k, v); }},
  };

  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(key, "unknown key");
    if (seen[key]++) throw ConfigError(key, "duplicate key");
    if (value.empty()) throw ConfigError(key, "empty value");
    it->second(key, value);
  }
  const bool is_rc = cfg.equalizer.kind == EqualizerKind::rc_interleaved ||
                     cfg.equalizer.kind == EqualizerKind::rc_superimposed;
  if (!is_rc) cfg.equalizer.rc.reset();
  cfg.finalize();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string to_string(ChannelMode m) { return m == ChannelMode::dd_kernel ? "dd_kernel" : "tdl"; }

}  // namespace otfs
