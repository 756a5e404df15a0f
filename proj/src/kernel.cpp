#include "clearn/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "clearn/errors.hpp"

namespace clearn {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

}  // namespace

void KernelSpec::validate() const {
  if (kind == KernelKind::rbf && !(std::isfinite(sigma) && sigma > 0.0))
    throw Error("invalid-parameter", "rbf kernel requires sigma > 0");
}

double kernel_eval(const KernelSpec& spec, std::span<const double> a,
                   std::span<const double> b) {
  spec.validate();
  if (a.size() != b.size())
    throw Error("dimension-mismatch", "kernel inputs must share a dimension");
  if (spec.kind == KernelKind::linear) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
  }
  return std::exp(-sq_dist(a, b) / (spec.sigma * spec.sigma));
}

GramMatrix gram(const KernelSpec& spec, const Matrix& A, const Matrix& B) {
  spec.validate();
  if (A.rows == 0 || B.rows == 0)
    throw Error("invalid-argument", "gram requires nonempty point sets");
  if (A.cols != B.cols)
    throw Error("dimension-mismatch", "gram point sets must share a dimension");
  GramMatrix g{Matrix(A.rows, B.rows), A.cols};
  for (std::size_t i = 0; i < A.rows; ++i) {
    const auto a = A.row(i);
    for (std::size_t j = 0; j < B.rows; ++j) {
      g.entries(i, j) = spec.kind == KernelKind::linear
                            ? kernel_eval(spec, a, B.row(j))
                            : std::exp(-sq_dist(a, B.row(j)) / (spec.sigma * spec.sigma));
    }
  }
  return g;
}

double sigma_median_between_classes(const Matrix& X, const std::vector<int>& y) {
  if (y.size() != X.rows)
    throw Error("dimension-mismatch", "one label per point required");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < y.size(); ++i) (y[i] > 0 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty())
    throw Error("single-class", "median-between-classes bandwidth needs both classes");
  std::vector<double> d;
  d.reserve(pos.size() * neg.size());
  for (std::size_t i : pos)
    for (std::size_t j : neg) d.push_back(std::sqrt(sq_dist(X.row(i), X.row(j))));
  std::sort(d.begin(), d.end());
  const std::size_t m = d.size();
  return m % 2 == 1 ? d[m / 2] : 0.5 * (d[m / 2 - 1] + d[m / 2]);
}

double sigma_mean_pairwise(const Matrix& X) {
  if (X.rows < 2)
    throw Error("invalid-argument", "mean pairwise distance needs at least 2 points");
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < X.rows; ++i)
    for (std::size_t j = i + 1; j < X.rows; ++j) {
      total += std::sqrt(sq_dist(X.row(i), X.row(j)));
      ++pairs;
    }
  const double mean = total / static_cast<double>(pairs);
  if (mean == 0.0)
    throw Error("zero-bandwidth", "all points identical; bandwidth would be zero");
  return mean;
}

}  // namespace clearn
