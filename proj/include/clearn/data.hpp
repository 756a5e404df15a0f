#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "clearn/matrix.hpp"

namespace clearn {

/// Immutable-by-convention sample set: features, ±1 labels, and (when the
/// source knows them) true conditional class-1 probabilities.
struct Dataset {
  Matrix X;
  std::vector<int> y;
  std::vector<double> true_eta;  // empty when unknown
  std::string name;

  std::size_t size() const { return X.rows; }
  bool has_true_eta() const { return !true_eta.empty(); }
  void validate() const;
};

struct SplitSpec {
  double train_fraction = 0.1;
  std::uint64_t seed = 0;
};

/// Uniform samples on the unit disk, labelled by the sign of x1 with exactly
/// round(flip_fraction * n) labels flipped at distinct indices. True eta is
/// 0.8 on x1 >= 0 and 0.2 otherwise.
Dataset gen_disk(std::size_t n, double flip_fraction, std::uint64_t seed);

/// y uniform on ±1, x1 ~ U[0, 2pi], x2 = y (sin x1 + eps) with
/// eps ~ N(1, 0.01); true eta from the two-component normal density ratio.
Dataset gen_sine(std::size_t n, std::uint64_t seed);

/// P(Y = 1 | x1, x2) for the sine generator.
double true_eta_sine(double x1, double x2);

/// CSV schema: header "f0,...,f{d-1},y[,eta]", '.' decimal, no quoting.
/// Doubles are written with round-trip precision.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& ds, const std::string& path);

/// Deterministic disjoint train/test partition; round(train_fraction * n)
/// rows go to the train side.
std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec);

}  // namespace clearn
