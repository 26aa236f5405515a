#include "home3/trace.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace home3 {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trace_csv(const std::filesystem::path& path, const RunRecord& rec) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trace_csv: cannot open " + path.string());
  out << kTraceHeader << '\n';
  for (std::size_t t = 0; t < rec.losses.size(); ++t) {
    out << t << ',' << format_double(rec.losses[t]) << ','
        << format_double(rec.grad_norms[t]) << ','
        << format_double(rec.moment_gaps[t]) << ','
        << (rec.randomized_at(t) ? 1 : 0) << '\n';
  }
}

RunRecord read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_trace_csv: cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("read_trace_csv: empty file " + path.string());
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) {
    throw std::runtime_error("read_trace_csv: unexpected header '" + line + "'");
  }

  RunRecord rec;
  std::size_t expected_iter = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::istringstream ss(line);
    std::string tok;
    double fields[4];
    std::size_t iter = 0;
    for (int col = 0; col < 5; ++col) {
      if (!std::getline(ss, tok, ',')) {
        throw std::runtime_error("read_trace_csv: short row at line " +
                                 std::to_string(lineno));
      }
      if (col == 0) {
        iter = static_cast<std::size_t>(std::stoull(tok));
      } else {
        fields[col - 1] = std::stod(tok);
      }
    }
    if (iter != expected_iter) {
      throw std::runtime_error("read_trace_csv: iteration gap at line " +
                               std::to_string(lineno));
    }
    rec.losses.push_back(fields[0]);
    rec.grad_norms.push_back(fields[1]);
    rec.moment_gaps.push_back(fields[2]);
    if (fields[3] != 0.0) rec.randomization_events.push_back(iter);
    ++expected_iter;
  }
  if (rec.losses.empty()) {
    throw std::runtime_error("read_trace_csv: no rows in " + path.string());
  }
  return rec;
}

void write_trace_json(const std::filesystem::path& path, const RunRecord& rec) {
  nlohmann::json j;
  j["loss"] = rec.losses;
  j["grad_norm"] = rec.grad_norms;
  j["moment_gap"] = rec.moment_gaps;
  j["randomization_events"] = rec.randomization_events;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trace_json: cannot open " + path.string());
  out << j.dump(2) << '\n';
}

RunRecord read_trace_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_trace_json: cannot open " + path.string());
  nlohmann::json j;
  in >> j;
  RunRecord rec;
  rec.losses = j.at("loss").get<std::vector<double>>();
  rec.grad_norms = j.at("grad_norm").get<std::vector<double>>();
  rec.moment_gaps = j.at("moment_gap").get<std::vector<double>>();
  rec.randomization_events =
      j.at("randomization_events").get<std::vector<std::uint64_t>>();
  return rec;
}

}  // namespace home3
