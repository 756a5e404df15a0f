#include "clearn/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "clearn/errors.hpp"
#include "clearn/rng.hpp"

namespace clearn {

namespace {

constexpr double kSineNoiseVar = 0.01;  // variance of eps ~ N(1, 0.01)

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io-error", "cannot open " + tmp + " for writing");
    out << content;
    if (!out.flush()) throw Error("io-error", "failed writing " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("io-error", "cannot rename " + tmp + " to " + path);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, std::size_t line_no, const char* what) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v))
    throw Error("parse-error",
                "line " + std::to_string(line_no) + ": bad " + what + " value '" + s + "'");
  return v;
}

}  // namespace

void Dataset::validate() const {
  if (y.size() != X.rows)
    throw Error("invalid-parameter", "dataset label count must match row count");
  if (!true_eta.empty() && true_eta.size() != X.rows)
    throw Error("invalid-parameter", "dataset eta count must match row count");
  for (int label : y)
    if (label != 1 && label != -1)
      throw Error("invalid-parameter", "dataset labels must be +1 or -1");
  for (double e : true_eta)
    if (!(e >= 0.0 && e <= 1.0))
      throw Error("invalid-parameter", "dataset eta values must lie in [0, 1]");
}

Dataset gen_disk(std::size_t n, double flip_fraction, std::uint64_t seed) {
  if (n < 2) throw Error("invalid-argument", "gen_disk needs n >= 2");
  if (!(flip_fraction >= 0.0 && flip_fraction <= 0.5))
    throw Error("invalid-parameter", "flip_fraction must lie in [0, 0.5]");
  Rng rng(seed);
  Dataset ds;
  ds.name = "disk";
  ds.X = Matrix(n, 2);
  ds.y.resize(n);
  ds.true_eta.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x1, x2;
    do {
      x1 = rng.uniform(-1.0, 1.0);
      x2 = rng.uniform(-1.0, 1.0);
    } while (x1 * x1 + x2 * x2 > 1.0);
    ds.X(i, 0) = x1;
    ds.X(i, 1) = x2;
    ds.y[i] = x1 >= 0.0 ? 1 : -1;
    ds.true_eta[i] = x1 >= 0.0 ? 0.8 : 0.2;
  }
  // Exactly round(flip_fraction * n) flips at distinct indices so that the
  // stated eta values {0.8, 0.2} are exact.
  const auto flips = static_cast<std::size_t>(std::llround(flip_fraction * static_cast<double>(n)));
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < flips; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.index(n - i));
    std::swap(idx[i], idx[j]);
    ds.y[idx[i]] = -ds.y[idx[i]];
  }
  return ds;
}

double true_eta_sine(double x1, double x2) {
  // Density ratio of N(x2 | m, v) vs N(x2 | -m, v) with m = sin(x1) + 1
  // collapses to a logistic in 2 m x2 / v.
  const double m = std::sin(x1) + 1.0;
  return 1.0 / (1.0 + std::exp(-2.0 * x2 * m / kSineNoiseVar));
}

Dataset gen_sine(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw Error("invalid-argument", "gen_sine needs n >= 2");
  Rng rng(seed);
  Dataset ds;
  ds.name = "sine";
  ds.X = Matrix(n, 2);
  ds.y.resize(n);
  ds.true_eta.resize(n);
  const double sd = std::sqrt(kSineNoiseVar);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = rng.uniform() < 0.5 ? 1 : -1;
    const double x1 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double eps = rng.normal(1.0, sd);
    const double x2 = y * (std::sin(x1) + eps);
    ds.X(i, 0) = x1;
    ds.X(i, 1) = x2;
    ds.y[i] = y;
    ds.true_eta[i] = true_eta_sine(x1, x2);
  }
  return ds;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io-error", "cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw Error("parse-error", "line 1: empty file, header expected");
  const auto header = split_fields(line);
  // header must read f0,...,f{d-1},y[,eta]
  std::size_t d = 0;
  while (d < header.size() && header[d] == "f" + std::to_string(d)) ++d;
  const bool has_y = d < header.size() && header[d] == "y";
  const bool has_eta = has_y && d + 1 < header.size() && header[d + 1] == "eta";
  const std::size_t expect = d + 1 + (has_eta ? 1 : 0);
  if (d == 0 || !has_y || header.size() != expect)
    throw Error("parse-error", "line 1: malformed header '" + line + "'");

  std::vector<double> xs;
  std::vector<int> ys;
  std::vector<double> etas;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_fields(line);
    if (fields.size() != expect)
      throw Error("parse-error", "line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(expect) + " fields, found " +
                                     std::to_string(fields.size()));
    for (std::size_t k = 0; k < d; ++k)
      xs.push_back(parse_double(fields[k], line_no, "feature"));
    const double yv = parse_double(fields[d], line_no, "label");
    if (yv != 1.0 && yv != -1.0)
      throw Error("parse-error",
                  "line " + std::to_string(line_no) + ": label must be 1 or -1, found '" +
                      fields[d] + "'");
    ys.push_back(yv > 0 ? 1 : -1);
    if (has_eta) {
      const double e = parse_double(fields[d + 1], line_no, "eta");
      if (!(e >= 0.0 && e <= 1.0))
        throw Error("parse-error",
                    "line " + std::to_string(line_no) + ": eta must lie in [0, 1]");
      etas.push_back(e);
    }
  }
  Dataset ds;
  ds.name = std::filesystem::path(path).stem().string();
  ds.X.rows = ys.size();
  ds.X.cols = d;
  ds.X.data = std::move(xs);
  ds.y = std::move(ys);
  ds.true_eta = std::move(etas);
  ds.validate();
  return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
  ds.validate();
  std::ostringstream out;
  for (std::size_t k = 0; k < ds.X.cols; ++k) out << "f" << k << ",";
  out << "y";
  if (ds.has_true_eta()) out << ",eta";
  out << "\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t k = 0; k < ds.X.cols; ++k) out << fmt_double(ds.X(i, k)) << ",";
    out << ds.y[i];
    if (ds.has_true_eta()) out << "," << fmt_double(ds.true_eta[i]);
    out << "\n";
  }
  write_text_atomic(path, out.str());
}

std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec) {
  ds.validate();
  const std::size_t n = ds.size();
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw Error("invalid-parameter", "train_fraction must lie in (0, 1)");
  const auto n_train =
      static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train >= n)
    throw Error("invalid-parameter", "degenerate split: each side needs at least 1 sample");

  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(spec.seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.index(i + 1));
    std::swap(idx[i], idx[j]);
  }
  std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::sort(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());

  auto take = [&](std::size_t from, std::size_t count, const char* tag) {
    Dataset out;
    out.name = ds.name + tag;
    out.X = Matrix(count, ds.X.cols);
    out.y.resize(count);
    if (ds.has_true_eta()) out.true_eta.resize(count);
    for (std::size_t r = 0; r < count; ++r) {
      const std::size_t src = idx[from + r];
      for (std::size_t k = 0; k < ds.X.cols; ++k) out.X(r, k) = ds.X(src, k);
      out.y[r] = ds.y[src];
      if (ds.has_true_eta()) out.true_eta[r] = ds.true_eta[src];
    }
    return out;
  };
  return {take(0, n_train, "-train"), take(n_train, n - n_train, "-test")};
}

}  // namespace clearn
