#pragma once

namespace clearn {

/// Temperature / margin-target pair for the coherence loss family.
/// rho > 0 acts as a temperature; u >= 0 is the misclassification cost.
/// The C-loss additionally requires u > 0.
struct LossParams {
  double rho = 1.0;
  double u = 1.0;
};

enum class SurrogateKind {
  coherence_v,
  c_loss,
  l_loss,
  hinge,
  logit,
  exponential,
  squared_hinge,
};

/// log(1 + exp(t)) without overflow for large |t|.
double log1pexp(double t);

/// 1 / (1 + exp(-t)), stable for large |t|.
double sigmoid(double t);

/// V_{rho,u}(z) = rho * log(1 + exp((u - z)/rho)).
double coherence_v(const LossParams& p, double z);

/// C_{rho,u}(z) = u * log(1 + exp((u - z)/rho)) / log(1 + exp(u/rho)).
/// Normalized so C(0) = u; requires u > 0.
double c_loss(const LossParams& p, double z);

/// L_{rho,u}(z) = log(1 + exp((u - z)/rho)) / log(1 + exp(u/rho)).
/// Equals 1 at z = 0 for any u >= 0; L_{1,0} is the scaled logit loss.
double l_loss(const LossParams& p, double z);

/// dC/dz; always in [-1, 0].
double c_loss_grad(const LossParams& p, double z);

/// d2C/dz2; strictly positive for finite z.
double c_loss_hess(const LossParams& p, double z);

/// The four classical margin losses. Logit is scaled by 1/log 2 so that all
/// surrogates equal 1 at z = 0. Coherence kinds are rejected here.
double classical_surrogate(SurrogateKind kind, double z);

}  // namespace clearn
