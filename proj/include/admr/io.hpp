#pragma once
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "admr/errors.hpp"
#include "admr/noise.hpp"

namespace admr {

inline constexpr const char* artifact_version = "admr-sim 0.1.0";

// 17 significant digits guarantee double round-trip bit-exactness.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// CSV artifact accumulated in memory and written once, after computation.
class CsvFile {
 public:
  explicit CsvFile(std::string config_echo) {
    buf_ += "# ";
    buf_ += artifact_version;
    buf_ += "\n";
    buf_ += config_echo;
  }

  void comment(const std::string& line) { buf_ += "# " + line + "\n"; }

  void header(const std::string& columns) { buf_ += columns + "\n"; }

  void row(const std::vector<double>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) buf_ += ',';
      buf_ += fmt17(cells[i]);
    }
    buf_ += '\n';
  }

  void row_raw(const std::string& line) { buf_ += line + "\n"; }

  const std::string& content() const { return buf_; }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open output file '" + path + "'");
    out << buf_;
    if (!out) throw config_error("failed writing '" + path + "'");
  }

 private:
  std::string buf_;
};

// Trace file format: comment lines, one of which declares unit and sample
// rate, then a time_s,value column header and the samples.
inline void write_trace(const TimeTrace& trace, const std::string& path,
                        const std::string& config_echo = "") {
  CsvFile csv(config_echo);
  csv.comment(std::string("unit=") + to_string(trace.unit) +
              " sample_rate_hz=" + fmt17(trace.sample_rate));
  csv.comment("origin=" + trace.origin);
  csv.header("time_s,value");
  for (long i = 0; i < trace.values.size(); ++i)
    csv.row({double(i) / trace.sample_rate, trace.values(i)});
  csv.write(path);
}

inline TimeTrace read_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open trace file '" + path + "'");

  TimeTrace trace;
  trace.origin = "measured";
  bool have_rate = false;
  std::vector<double> times, values;
  std::vector<long> data_lines;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string tok;
      while (ss >> tok) {
        if (tok.rfind("unit=", 0) == 0) trace.unit = trace_unit_from_string(tok.substr(5));
        if (tok.rfind("sample_rate_hz=", 0) == 0) {
          trace.sample_rate = std::strtod(tok.substr(15).c_str(), nullptr);
          have_rate = true;
        }
        if (tok.rfind("origin=", 0) == 0) trace.origin = tok.substr(7);
      }
      continue;
    }
    if (line.rfind("time_s", 0) == 0) continue;  // column header
    const size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw config_error(path + ": line " + std::to_string(lineno) + ": expected time_s,value");
    char* end = nullptr;
    const std::string t_str = line.substr(0, comma);
    const std::string v_str = line.substr(comma + 1);
    const double t = std::strtod(t_str.c_str(), &end);
    if (end == t_str.c_str() || *end != '\0')
      throw config_error(path + ": line " + std::to_string(lineno) + ": bad time '" + t_str + "'");
    const double v = std::strtod(v_str.c_str(), &end);
    if (end == v_str.c_str() || *end != '\0')
      throw config_error(path + ": line " + std::to_string(lineno) + ": bad value '" + v_str + "'");
    times.push_back(t);
    values.push_back(v);
    data_lines.push_back(lineno);
  }
  if (times.size() < 2) throw config_error(path + ": trace needs at least 2 samples");

  if (!have_rate) {
    const double dt = times[1] - times[0];
    if (!(dt > 0)) throw config_error(path + ": non-increasing timestamps");
    trace.sample_rate = 1.0 / dt;
  }

  // reject irregular sampling: relative jitter above 1e-6 of a sample period
  const double period = 1.0 / trace.sample_rate;
  for (size_t i = 0; i < times.size(); ++i) {
    const double expected = times[0] + double(i) * period;
    if (std::abs(times[i] - expected) > 1e-6 * period)
      throw config_error(path + ": line " + std::to_string(data_lines[i]) +
                         ": irregular timestamp (jitter above 1e-6 of the sample period)");
  }

  trace.values = Eigen::Map<const Eigen::ArrayXd>(values.data(), static_cast<long>(values.size()));
  return trace;
}

}  // namespace admr
