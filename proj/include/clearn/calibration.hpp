#pragma once

#include <span>
#include <vector>

namespace clearn {

struct CalibrationFit {
  double rho_hat = 1.0;
  double ekl_value = 0.0;
  int iterations = 0;  // objective evaluations spent
};

struct PlattFit {
  double A = 0.0;
  double B = 0.0;
  bool capped = false;  // |A| hit the separability cap
};

/// Class-probability read-off for an SVM score at temperature rho
/// (the u = 1 minimizer inverse). In (0, 1), > 1/2 iff fhat > 0.
double svm_prob(double rho, double fhat);

/// Empirical cross-entropy of svm_prob(rho, .) against ±1 labels. Computed in
/// log space, so it stays finite at any score magnitude.
double ekl(double rho, std::span<const double> scores, std::span<const int> labels);

/// Minimize ekl over rho in [bracket_lo, bracket_hi]: log-scale grid scan,
/// golden-section refinement, then safeguarded Newton polish (steps leaving
/// the bracket or increasing ekl are discarded).
CalibrationFit fit_rho(std::span<const double> scores, std::span<const int> labels,
                       double bracket_lo = 1e-3, double bracket_hi = 1e2);

/// 1/(1+exp(-2f)) for |f| <= 1, else 1/(1+exp(-(f + sign f))); continuous.
double sollich_prob(double fhat);

/// eta = 1/(1 + exp(A f + B)) with (A, B) minimizing empirical cross-entropy
/// by damped Newton; |A| capped at 1e3 when the scores are separable.
PlattFit platt_fit(std::span<const double> scores, std::span<const int> labels);
double platt_prob(const PlattFit& fit, double fhat);

}  // namespace clearn
