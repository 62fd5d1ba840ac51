#pragma once

#include "otfs/channel.hpp"
#include "otfs/equalizers.hpp"
#include "otfs/pilots.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace otfs {

class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& what) : Error(key + ": " + what), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class ChannelMode { dd_kernel, tdl };

struct ExperimentConfig {
  WaveformConfig waveform;
  std::string constellation = "qpsk";
  bool cp_auto = true;  // cp_len = largest possible path delay

  struct Channel {
    ChannelMode mode = ChannelMode::dd_kernel;
    std::optional<PathList> paths;  // fixed SISO channel instead of the generator
    ChannelGenerator generator;
    Index n_t = 1;
    Index n_r = 1;
  } channel;

  struct Pilot {
    PilotScheme scheme = PilotScheme::superimposed;
    PatternKind kind = PatternKind::staircase;
    double overhead = 0.0469;
    double power_fraction = 0.5;
    std::uint64_t pilot_seed = 1;
  } pilot;

  EqualizerSpec equalizer{EqualizerKind::rc_superimposed, ReservoirConfig{}, 1};
  bool l_forget_auto = true;  // l_forget = cp_len

  struct Sim {
    std::vector<double> snr_db_list{0, 5, 10, 15, 20, 25, 30};
    std::vector<double> doppler_hz_list;  // empty: the channel's max Doppler
    Index n_frames = 20;
    Index n_channel_realizations = 30;
    std::uint64_t master_seed = 1;
    Index workers = 1;
  } sim;

  /// Resolve automatic fields and check cross-field rules; errors name the key.
  void finalize();
  Index max_path_delay() const;
  std::vector<double> dopplers() const;
};

/// Flat `section.key = value` text; `#` starts a comment; lists are comma
/// separated; paths are `delay doppler_hz gain_re gain_im` groups split by `;`.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

std::string to_string(ChannelMode m);

}  // namespace otfs
