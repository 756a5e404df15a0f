#pragma once

#include <span>
#include <vector>

#include "clearn/matrix.hpp"

namespace clearn {

enum class KernelKind { rbf, linear };

/// RBF uses K(a, b) = exp(-||a - b||^2 / sigma^2), sigma entering squared
/// exactly as written (not 2 sigma^2).
struct KernelSpec {
  KernelKind kind = KernelKind::rbf;
  double sigma = 1.0;
  void validate() const;
};

struct GramMatrix {
  Matrix entries;         // n_rows(A) x n_rows(B)
  std::size_t input_dim;  // shared point dimension
};

double kernel_eval(const KernelSpec& spec, std::span<const double> a,
                   std::span<const double> b);

/// Cross Gram matrix between two point sets of equal dimension.
GramMatrix gram(const KernelSpec& spec, const Matrix& A, const Matrix& B);

/// Median Euclidean distance over all cross-class pairs (even count: midpoint
/// of the two middle values). Both classes must be present.
double sigma_median_between_classes(const Matrix& X, const std::vector<int>& y);

/// Mean Euclidean distance over all unordered pairs; rejects point sets whose
/// pairwise distances are all zero.
double sigma_mean_pairwise(const Matrix& X);

}  // namespace clearn
