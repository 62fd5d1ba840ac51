#include "otfs/harness/results.hpp"

#include "otfs/types.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace otfs {

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {"scheme",  "equalizer", "snr_db",   "doppler_hz", "k_rc",
                                                "overhead", "n_t",       "n_r",      "n_frames",   "n_bits",
                                                "n_errors", "ber",       "mean_train_loss", "seed"};
  return cols;
}

namespace {

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <typename Int>
std::string fmt_int(Int v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_d(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw Error("csv: bad number '" + s + "'");
  return v;
}

template <typename Int>
Int parse_i(const std::string& s) {
  Int v{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw Error("csv: bad integer '" + s + "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(line);
  while (std::getline(in, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string format_csv(const std::vector<ResultRecord>& records) {
  if (records.empty()) throw Error("write_csv: no records");
  std::string out;
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += '\n';
  for (const auto& r : records) {
    if (r.scheme.find(',') != std::string::npos || r.equalizer.find(',') != std::string::npos) {
      throw Error("write_csv: text fields must not contain commas");
    }
    out += r.scheme + ',' + r.equalizer + ',' + fmt(r.snr_db) + ',' + fmt(r.doppler_hz) + ',' + fmt_int(r.k_rc) + ',' +
           fmt(r.overhead) + ',' + fmt_int(r.n_t) + ',' + fmt_int(r.n_r) + ',' + fmt_int(r.n_frames) + ',' +
           fmt_int(r.n_bits) + ',' + fmt_int(r.n_errors) + ',' + fmt(r.ber) + ',' + fmt(r.mean_train_loss) + ',' +
           fmt_int(r.seed) + '\n';
  }
  return out;
}

std::vector<ResultRecord> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || split_csv(line) != csv_columns()) throw Error("csv: unexpected header");
  std::vector<ResultRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != csv_columns().size()) throw Error("csv: wrong field count");
    ResultRecord r;
    r.scheme = f[0];
    r.equalizer = f[1];
    r.snr_db = parse_d(f[2]);
    r.doppler_hz = parse_d(f[3]);
    r.k_rc = parse_i<std::int64_t>(f[4]);
    r.overhead = parse_d(f[5]);
    r.n_t = parse_i<std::int64_t>(f[6]);
    r.n_r = parse_i<std::int64_t>(f[7]);
    r.n_frames = parse_i<std::int64_t>(f[8]);
    r.n_bits = parse_i<std::int64_t>(f[9]);
    r.n_errors = parse_i<std::int64_t>(f[10]);
    r.ber = parse_d(f[11]);
    r.mean_train_loss = parse_d(f[12]);
    r.seed = parse_i<std::uint64_t>(f[13]);
    out.push_back(std::move(r));
  }
  return out;
}

void write_csv(const std::vector<ResultRecord>& records, const std::string& path) {
  const std::string text = format_csv(records);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path + "'");
}

std::vector<ResultRecord> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

namespace {

std::string series_label(const ResultRecord& r) {
  std::string s = r.equalizer + " / " + r.scheme;
  if (r.equalizer.rfind("rc_", 0) == 0) s += " K=" + fmt_int(r.k_rc);
  char buf[32];
  std::snprintf(buf, sizeof buf, " %s=%.3g", r.scheme == "superimposed" ? "rho" : "eta", r.overhead);
  s += buf;
  if (r.n_t > 1 || r.n_r > 1) s += " " + fmt_int(r.n_t) + "x" + fmt_int(r.n_r);
  if (r.doppler_hz != 0.0) s += " " + fmt(r.doppler_hz) + " Hz";
  return s;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string render_plot(const std::vector<ResultRecord>& records) {
  if (records.empty()) throw Error("emit_plot: no records");
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, pmin = 1.0;
  for (const auto& r : records) {
    const auto label = series_label(r);
    if (!series.count(label)) order.push_back(label);
    series[label].emplace_back(r.snr_db, r.ber);
    if (std::isfinite(r.snr_db)) {
      xmin = std::min(xmin, r.snr_db);
      xmax = std::max(xmax, r.snr_db);
    }
    if (r.ber > 0.0) pmin = std::min(pmin, r.ber);
  }
  if (!std::isfinite(xmin)) xmin = 0.0, xmax = 1.0;
  if (xmax == xmin) xmax = xmin + 1.0;
  // zero BER is drawn on the bottom decade boundary
  int decades = std::max(1, static_cast<int>(std::ceil(-std::log10(pmin))));
  const double floor_ber = std::pow(10.0, -decades);

  const double w = 720, h = 480, left = 70, right = 250, top = 30, bottom = 50;
  const double pw = w - left - right, ph = h - top - bottom;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double b) {
    const double lb = std::log10(std::max(b, floor_ber));
    return top + (-lb) / decades * ph;
  };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = 0; d <= decades; ++d) {
    const double y = top + static_cast<double>(d) / decades * ph;
    s << "<line x1=\"" << left << "\" y1=\"" << num(y) << "\" x2=\"" << left + pw << "\" y2=\"" << num(y)
      << "\" stroke=\"#ddd\"/>\n";
    s << "<text x=\"" << left - 6 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">1e-" << d << "</text>\n";
  }
  const int ticks = 6;
  for (int i = 0; i <= ticks; ++i) {
    const double x = xmin + (xmax - xmin) * i / ticks;
    s << "<text x=\"" << num(px(x)) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">" << num(x)
      << "</text>\n";
  }
  s << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 10 << "\" text-anchor=\"middle\">SNR (dB)</text>\n";
  s << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << top + ph / 2 << ")\">BER</text>\n";
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto pts = series[order[i]];
    std::stable_sort(pts.begin(), pts.end());
    const char* col = colors[i % 10];
    s << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, b] : pts) {
      if (std::isfinite(x)) s << num(px(x)) << ',' << num(py(b)) << ' ';
    }
    s << "\"/>\n";
    for (const auto& [x, b] : pts) {
      if (std::isfinite(x)) {
        s << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(b)) << "\" r=\"2.5\" fill=\"" << col << "\"/>\n";
      }
    }
    const double ly = top + 10 + 16.0 * static_cast<double>(i);
    s << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << num(ly) << "\" x2=\"" << left + pw + 30 << "\" y2=\""
      << num(ly) << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << left + pw + 35 << "\" y=\"" << num(ly + 4) << "\">" << order[i] << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void emit_plot(const std::vector<ResultRecord>& records, const std::string& path) {
  const std::string svg = render_plot(records);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << svg;
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace otfs
