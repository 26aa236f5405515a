#include "home3/data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "home3/random.hpp"

namespace home3 {

SynthLowRank synth_lowrank(std::size_t p, std::size_t q, std::size_t rank,
                           std::uint64_t seed, double noise_sigma) {
  if (p == 0 || q == 0) throw std::invalid_argument("synth_lowrank: empty shape");
  if (rank == 0 || rank > std::min(p, q)) {
    throw std::invalid_argument("synth_lowrank: rank " + std::to_string(rank) +
                                " not in [1, min(p,q)]");
  }
  Rng rng(mix_seed(seed, 0x10a7));

  SynthLowRank out;
  out.left = DenseMatrix(p, rank);
  out.right = DenseMatrix(rank, q);
  for (double& v : out.left.data) v = rng.next_gaussian();
  for (double& v : out.right.data) v = rng.next_gaussian();
  out.matrix = matmul(out.left, out.right);

  if (noise_sigma < 0.0) {
    const double rms =
        frobenius_norm(out.matrix) / std::sqrt(static_cast<double>(p * q));
    noise_sigma = 0.01 * rms;  // SNR 40 dB
  }
  out.noise_sigma = noise_sigma;
  if (noise_sigma > 0.0) {
    for (double& v : out.matrix.data) v += noise_sigma * rng.next_gaussian();
  }
  return out;
}

static bool parse_double(const std::string& tok, double& out) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0';
}

static std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> toks;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      toks.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  toks.push_back(cur);
  return toks;
}

DenseMatrix load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path.string());

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  bool first_content_row = true;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    const std::vector<std::string> toks = split_commas(line);
    std::vector<double> vals;
    vals.reserve(toks.size());
    bool numeric = true;
    for (const std::string& t : toks) {
      double v;
      if (!parse_double(t, v)) {
        numeric = false;
        break;
      }
      vals.push_back(v);
    }

    if (!numeric) {
      if (first_content_row) {  // header row
        first_content_row = false;
        continue;
      }
      throw std::runtime_error("load_csv: non-numeric value at line " +
                               std::to_string(lineno) + " of " + path.string());
    }
    first_content_row = false;

    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (!std::isfinite(vals[i])) {
        throw std::runtime_error("load_csv: non-finite value at line " +
                                 std::to_string(lineno));
      }
    }
    if (width == 0) {
      width = vals.size();
    } else if (vals.size() != width) {
      throw std::runtime_error("load_csv: expected " + std::to_string(width) +
                               " columns but found " + std::to_string(vals.size()) +
                               " at line " + std::to_string(lineno));
    }
    rows.push_back(std::move(vals));
  }

  if (rows.empty()) throw std::runtime_error("load_csv: no data rows in " + path.string());
  DenseMatrix m(rows.size(), width);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j) m(i, j) = rows[i][j];
  return m;
}

LogRegProblem load_classification_csv(const std::filesystem::path& path,
                                      double l2_reg) {
  const DenseMatrix raw = load_csv(path);
  if (raw.cols < 2) {
    throw std::runtime_error(
        "load_classification_csv: need at least one feature column plus the label");
  }
  LogRegProblem p;
  p.l2_reg = l2_reg;
  p.features = DenseMatrix(raw.rows, raw.cols - 1);
  p.labels.reserve(raw.rows);
  for (std::size_t i = 0; i < raw.rows; ++i) {
    for (std::size_t j = 0; j + 1 < raw.cols; ++j) p.features(i, j) = raw(i, j);
    const double l = raw(i, raw.cols - 1);
    if (l != 0.0 && l != 1.0) {
      throw std::runtime_error("load_classification_csv: label " +
                               std::to_string(l) + " at data row " +
                               std::to_string(i + 1) + " is not 0/1");
    }
    p.labels.push_back(static_cast<int>(l));
  }
  p.validate();
  return p;
}

void write_csv(const std::filesystem::path& path, const DenseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path.string());
  char buf[64];
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out << buf;
      if (j + 1 < m.cols) out << ',';
    }
    out << '\n';
  }
}

}  // namespace home3
