#pragma once

#include <span>
#include <vector>

#include "clearn/loss.hpp"

namespace clearn {

/// Finite surrogate for a population over inputs: each atom carries a mass
/// and a conditional class-1 probability. Weights must sum to 1 (1e-12).
struct Atom {
  double weight = 0.0;
  double eta = 0.5;
};

struct FiniteDistribution {
  std::vector<Atom> atoms;
  void validate() const;
};

/// Population minimizer f*(eta) of eta V(f) + (1-eta) V(-f).
/// sign(f*) = sign(eta - 1/2); diverges at eta in {0, 1} (boundary-error).
double f_star(const LossParams& p, double eta);

/// Inverse of f_star: the class-probability read-off for a score f.
/// Strictly increasing, maps R onto (0, 1), eta_tilde(0) = 1/2.
double eta_tilde(const LossParams& p, double f);

/// log(eta_tilde / (1 - eta_tilde)); kept separate so downstream cross-entropy
/// code can work in log space without saturating at extreme scores.
double eta_tilde_logit(const LossParams& p, double f);

/// Conditional surrogate risk eta V(f) + (1 - eta) V(-f).
double cond_risk(const LossParams& p, double eta, double f);

/// cond_risk(eta, f) - cond_risk(eta, f_star(eta)); >= 2 rho (eta - eta_tilde(f))^2.
double risk_gap(const LossParams& p, double eta, double f);

struct RiskSummary {
  double zero_one_risk = 0.0;  // Psi_f
  double bayes_risk = 0.0;     // Psi_hat, scores 2 eta - 1
  double surrogate_gap = 0.0;  // sum of weighted risk gaps
};

/// Exact weighted risks on a finite distribution with one score per atom.
/// Boundary atoms (eta in {0,1}) use the limiting gap V(±f).
RiskSummary exact_risks(const LossParams& p, const FiniteDistribution& dist,
                        std::span<const double> scores);

}  // namespace clearn
