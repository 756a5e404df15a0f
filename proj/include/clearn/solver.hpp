#pragma once

#include <span>
#include <vector>

#include "clearn/data.hpp"
#include "clearn/kernel.hpp"
#include "clearn/matrix.hpp"

namespace clearn {

/// Which loss multiplies the 1/n data term. Both share one minimizer family:
/// C_{rho,1} = V_{rho,1} / (rho log(1 + e^{1/rho})), so the scales differ only
/// by a constant folded into the penalty.
enum class LossScale { c_loss, v_loss };

struct TrainConfig {
  double gamma = 1.0;       // penalty strength
  double omega = 0.0;       // elastic-net mix: 0 = quadratic, 1 = pure L1
  double rho = 1.0;         // loss temperature (u is fixed at 1)
  double eps_outer = 1e-5;  // Newton loop tolerance
  double eps_inner = 1e-5;  // coordinate sweep tolerance
  int max_outer = 200;
  int max_inner = 2000;
  LossScale loss_scale = LossScale::c_loss;
  void validate() const;
};

/// f(x) = alpha + sum_j beta_j K(x_j, x) over the training inputs.
struct KernelModel {
  double alpha = 0.0;
  std::vector<double> beta;
  KernelSpec spec;
  Matrix support_inputs;
  bool converged = true;
  int outer_iterations = 0;
};

/// f(x) = a + x'b.
struct LinearModel {
  double a = 0.0;
  std::vector<double> b;
  bool converged = true;
  int outer_iterations = 0;
};

/// One quadratic re-expansion of the data term around current scores:
/// q_i = sigmoid((1 - y_i f_i)/rho), z_i the working response, and
/// w_i = q_i (1 - q_i) / (n rho) the curvature weight.
struct NewtonState {
  std::vector<double> q;
  std::vector<double> z;
  std::vector<double> w;
};

/// Per-fit diagnostics; pass when a caller wants the descent trace.
struct FitDiagnostics {
  std::vector<double> outer_objectives;
  int halvings = 0;
};

/// sign(mu) * (|mu| - nu)_+.
double soft_threshold(double mu, double nu);

NewtonState newton_state(std::span<const double> fhat, std::span<const int> y, double rho);
NewtonState newton_state(const KernelModel& model, const Dataset& data, const TrainConfig& cfg);
NewtonState newton_state(const LinearModel& model, const Dataset& data, const TrainConfig& cfg);

/// Weighted mean of (z_i - beta_effect_i) under the curvature weights;
/// beta_effect_i is the expansion part k_i' beta of each fitted value.
double update_alpha(const NewtonState& state, std::span<const double> beta_effect);

/// One coordinate update of the penalized quadratic subproblem. beta_check
/// must hold the current coefficients with entry j zeroed. Returns 0 when the
/// curvature denominator vanishes (the coordinate is skipped).
double update_beta_j(std::size_t j, const NewtonState& state, double alpha_tilde,
                     std::span<const double> beta_check, const Matrix& K,
                     const TrainConfig& cfg);

/// Kernel-expansion fit by outer Newton re-quadratization and inner
/// coordinate sweeps. Initialization is (0, 0); non-convergence within
/// max_outer returns the last iterate with converged = false.
KernelModel fit_kernel(const Dataset& data, const KernelSpec& spec, const TrainConfig& cfg,
                       FitDiagnostics* diag = nullptr);

/// Linear-feature fit of the same objective with the separable elastic-net
/// penalty on b.
LinearModel fit_linear(const Dataset& data, const TrainConfig& cfg,
                       FitDiagnostics* diag = nullptr);

/// Hinge-SVM surrogate: v_loss, omega = 0, temperature continuation
/// rho in {1, 0.3, 0.1, 0.03, 0.01} with warm starts. The hinge objective of
/// the result is within rho_final log 2 of the hinge optimum.
KernelModel fit_svm_smoothed(const Dataset& data, const KernelSpec& spec, double gamma,
                             FitDiagnostics* diag = nullptr);

double predict_score(const KernelModel& model, std::span<const double> x);
double predict_score(const LinearModel& model, std::span<const double> x);
std::vector<double> predict_scores(const KernelModel& model, const Matrix& X);
std::vector<double> predict_scores(const LinearModel& model, const Matrix& X);

/// Training objective (loss term per cfg.loss_scale plus penalty) evaluated
/// exactly as defined; data supplies the samples for the 1/n loss term.
double objective(const KernelModel& model, const Dataset& data, const TrainConfig& cfg);
double objective(const LinearModel& model, const Dataset& data, const TrainConfig& cfg);

}  // namespace clearn
