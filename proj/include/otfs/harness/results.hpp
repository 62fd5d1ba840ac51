#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace otfs {

struct ResultRecord {
  std::string scheme;
  std::string equalizer;
  double snr_db = 0.0;
  double doppler_hz = 0.0;
  std::int64_t k_rc = 1;
  double overhead = 0.0;  // pilot cell fraction, or pilot power fraction for superimposed
  std::int64_t n_t = 1;
  std::int64_t n_r = 1;
  std::int64_t n_frames = 0;
  std::int64_t n_bits = 0;
  std::int64_t n_errors = 0;
  double ber = 0.0;
  double mean_train_loss = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const ResultRecord&) const = default;
};

const std::vector<std::string>& csv_columns();

/// Header plus one line per record; shortest round-trip decimal form.
std::string format_csv(const std::vector<ResultRecord>& records);
std::vector<ResultRecord> parse_csv(const std::string& text);

void write_csv(const std::vector<ResultRecord>& records, const std::string& path);
std::vector<ResultRecord> read_csv(const std::string& path);

/// BER (log axis) vs SNR, one polyline per scheme/equalizer/k_rc/overhead/antenna series.
std::string render_plot(const std::vector<ResultRecord>& records);
void emit_plot(const std::vector<ResultRecord>& records, const std::string& path);

}  // namespace otfs
