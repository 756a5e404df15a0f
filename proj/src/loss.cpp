#include "clearn/loss.hpp"

#include <cmath>

#include "clearn/errors.hpp"

namespace clearn {

namespace {

void check_params(const LossParams& p) {
  if (!(std::isfinite(p.rho) && p.rho > 0.0))
    throw Error("invalid-parameter", "rho must be positive and finite");
  if (!(std::isfinite(p.u) && p.u >= 0.0))
    throw Error("invalid-parameter", "u must be nonnegative and finite");
}

void check_margin(double z) {
  if (!std::isfinite(z)) throw Error("invalid-input", "margin value must be finite");
}

void require_positive_u(const LossParams& p) {
  if (p.u <= 0.0)
    throw Error("invalid-parameter", "the C-loss requires u > 0 (C_{rho,0} is trivial)");
}

}  // namespace

double log1pexp(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double coherence_v(const LossParams& p, double z) {
  check_params(p);
  check_margin(z);
  return p.rho * log1pexp((p.u - z) / p.rho);
}

double c_loss(const LossParams& p, double z) {
  check_params(p);
  require_positive_u(p);
  check_margin(z);
  return p.u * log1pexp((p.u - z) / p.rho) / log1pexp(p.u / p.rho);
}

double l_loss(const LossParams& p, double z) {
  check_params(p);
  check_margin(z);
  return log1pexp((p.u - z) / p.rho) / log1pexp(p.u / p.rho);
}

double c_loss_grad(const LossParams& p, double z) {
  check_params(p);
  require_positive_u(p);
  check_margin(z);
  return -p.u / (p.rho * log1pexp(p.u / p.rho)) * sigmoid((p.u - z) / p.rho);
}

double c_loss_hess(const LossParams& p, double z) {
  check_params(p);
  require_positive_u(p);
  check_margin(z);
  const double t = (p.u - z) / p.rho;
  return p.u / (p.rho * p.rho * log1pexp(p.u / p.rho)) * sigmoid(t) * sigmoid(-t);
}

double classical_surrogate(SurrogateKind kind, double z) {
  check_margin(z);
  switch (kind) {
    case SurrogateKind::hinge:
      return std::max(1.0 - z, 0.0);
    case SurrogateKind::logit:
      return log1pexp(-z) / std::log(2.0);
    case SurrogateKind::exponential:
      return std::exp(-z / 2.0);
    case SurrogateKind::squared_hinge: {
      const double h = std::max(1.0 - z, 0.0);
      return h * h;
    }
    default:
      throw Error("invalid-argument",
                  "classical_surrogate handles hinge/logit/exponential/squared_hinge only");
  }
}

}  // namespace clearn
