#include "clearn/population.hpp"

#include <cmath>
#include <cstddef>

#include "clearn/errors.hpp"

namespace clearn {

namespace {

void check_params(const LossParams& p) {
  if (!(std::isfinite(p.rho) && p.rho > 0.0))
    throw Error("invalid-parameter", "rho must be positive and finite");
  if (!(std::isfinite(p.u) && p.u >= 0.0))
    throw Error("invalid-parameter", "u must be nonnegative and finite");
}

void check_score(double f) {
  if (!std::isfinite(f)) throw Error("invalid-input", "score must be finite");
}

// f_star for eta > 1/2, rearranged so nothing large cancels:
// factor exp(u/rho) out of the square root, leaving
//   f* = u + rho log[ (m + sqrt(m^2 + 4 eta (1-eta) e^{-2u/rho})) / (2(1-eta)) ]
// with m = 2 eta - 1 > 0. Every addend is positive.
double f_star_upper(const LossParams& p, double eta) {
  const double m = 2.0 * eta - 1.0;
  const double e2 = std::exp(-2.0 * p.u / p.rho);
  const double s = std::sqrt(m * m + 4.0 * eta * (1.0 - eta) * e2);
  return p.u + p.rho * std::log((m + s) / (2.0 * (1.0 - eta)));
}

}  // namespace

void FiniteDistribution::validate() const {
  double total = 0.0;
  for (const Atom& a : atoms) {
    if (!(std::isfinite(a.weight) && a.weight >= 0.0))
      throw Error("invalid-parameter", "atom weights must be nonnegative");
    if (!(std::isfinite(a.eta) && a.eta >= 0.0 && a.eta <= 1.0))
      throw Error("invalid-parameter", "atom eta must lie in [0, 1]");
    total += a.weight;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw Error("invalid-parameter", "atom weights must sum to 1 within 1e-12");
}

double f_star(const LossParams& p, double eta) {
  check_params(p);
  if (!(std::isfinite(eta) && eta > 0.0 && eta < 1.0))
    throw Error("boundary-error", "f_star requires eta strictly inside (0, 1)");
  if (eta == 0.5) return 0.0;
  // Antisymmetry f*(1-eta) = -f*(eta) keeps the evaluation on the stable branch.
  if (eta < 0.5) return -f_star_upper(p, 1.0 - eta);
  return f_star_upper(p, eta);
}

double eta_tilde_logit(const LossParams& p, double f) {
  check_params(p);
  check_score(f);
  return log1pexp((f - p.u) / p.rho) - log1pexp(-(f + p.u) / p.rho);
}

double eta_tilde(const LossParams& p, double f) {
  return sigmoid(eta_tilde_logit(p, f));
}

double cond_risk(const LossParams& p, double eta, double f) {
  if (!(std::isfinite(eta) && eta >= 0.0 && eta <= 1.0))
    throw Error("invalid-input", "eta must lie in [0, 1]");
  return eta * coherence_v(p, f) + (1.0 - eta) * coherence_v(p, -f);
}

double risk_gap(const LossParams& p, double eta, double f) {
  const double best = cond_risk(p, eta, f_star(p, eta));  // rejects boundary eta
  const double gap = cond_risk(p, eta, f) - best;
  return gap > 0.0 ? gap : 0.0;
}

RiskSummary exact_risks(const LossParams& p, const FiniteDistribution& dist,
                        std::span<const double> scores) {
  dist.validate();
  if (scores.size() != dist.atoms.size())
    throw Error("dimension-mismatch", "one score per atom required");
  RiskSummary out;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const Atom& a = dist.atoms[i];
    const double f = scores[i];
    const double fb = 2.0 * a.eta - 1.0;
    out.zero_one_risk += a.weight * (f <= 0.0 ? a.eta : 1.0 - a.eta);
    out.bayes_risk += a.weight * (fb <= 0.0 ? a.eta : 1.0 - a.eta);
    // inf_f cond_risk is attained at f_star inside (0,1) and approached in the
    // limit at the boundary, where it equals 0.
    double gap;
    if (a.eta == 0.0) {
      gap = coherence_v(p, -f);
    } else if (a.eta == 1.0) {
      gap = coherence_v(p, f);
    } else {
      gap = risk_gap(p, a.eta, f);
    }
    out.surrogate_gap += a.weight * gap;
  }
  return out;
}

}  // namespace clearn
