#include "clearn/solver.hpp"

#include <cmath>
#include <cstddef>

#include "clearn/errors.hpp"
#include "clearn/loss.hpp"

namespace clearn {

namespace {

constexpr double kQClamp = 1e-12;  // keeps z_i finite (it divides by 1 - q_i)

// Scale constant s with C_{rho,1} = V_{rho,1} / s; a c_loss fit at penalty
// gamma is the v_loss fit at penalty gamma * s.
double v_scale(double rho) { return rho * log1pexp(1.0 / rho); }

double penalty_gamma_v(const TrainConfig& cfg) {
  return cfg.loss_scale == LossScale::c_loss ? cfg.gamma * v_scale(cfg.rho) : cfg.gamma;
}

void check_train_data(const Dataset& data) {
  data.validate();
  if (data.size() < 2) throw Error("invalid-argument", "training needs at least 2 samples");
  bool pos = false, neg = false;
  for (int y : data.y) (y > 0 ? pos : neg) = true;
  if (!pos || !neg) throw Error("single-class", "training data must contain both classes");
}

// Internal view of one fit in v-loss scale. B is the expansion basis:
// the kernel matrix K (n x n, symmetric) or the feature matrix X (n x d).
struct Problem {
  const Matrix& B;
  const std::vector<int>& y;
  double gamma_v;
  double omega;
  double rho;
  bool kernel_penalty;  // true: (1-w) 1/2 b'Kb + w|b|_1; false: sum J_omega(b_j)
};

double fitted_value(const Problem& pr, double a, const std::vector<double>& b,
                    std::size_t i) {
  double s = a;
  const auto row = pr.B.row(i);
  for (std::size_t j = 0; j < row.size(); ++j) s += row[j] * b[j];
  return s;
}

double penalty_value(const Problem& pr, const std::vector<double>& b) {
  double l1 = 0.0;
  for (double v : b) l1 += std::abs(v);
  double quad = 0.0;
  if (pr.kernel_penalty) {
    for (std::size_t i = 0; i < pr.B.rows; ++i) {
      const auto row = pr.B.row(i);
      double s = 0.0;
      for (std::size_t j = 0; j < row.size(); ++j) s += row[j] * b[j];
      quad += b[i] * s;
    }
  } else {
    for (double v : b) quad += v * v;
  }
  return pr.gamma_v * ((1.0 - pr.omega) * 0.5 * quad + pr.omega * l1);
}

double objective_v(const Problem& pr, double a, const std::vector<double>& b) {
  const std::size_t n = pr.B.rows;
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    loss += pr.rho * log1pexp((1.0 - pr.y[i] * fitted_value(pr, a, b, i)) / pr.rho);
  return loss / static_cast<double>(n) + penalty_value(pr, b);
}

struct CoreResult {
  double a = 0.0;
  std::vector<double> b;
  bool converged = false;
  int outer_iterations = 0;
};

// Outer Newton re-quadratization + inner coordinate sweeps. Fitted values are
// carried incrementally through each sweep and rebuilt at each outer step.
// If the full inner solve increases the true objective the step from the
// previous iterate is halved (up to 20 times) before being accepted.
//
// The sweep reads basis columns contiguously: the kernel matrix is symmetric
// (column j = row j) and the linear case sweeps a transposed feature copy.
CoreResult solve_core(const Problem& pr, double a0, std::vector<double> b0,
                      const TrainConfig& cfg, FitDiagnostics* diag) {
  const std::size_t n = pr.B.rows;
  const std::size_t m = pr.B.cols;
  const double nrho = static_cast<double>(n) * pr.rho;

  Matrix Bt;  // columns of B as rows (linear case only)
  if (!pr.kernel_penalty) {
    Bt = Matrix(m, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) Bt(j, i) = pr.B(i, j);
  }
  auto column = [&](std::size_t j) {
    return pr.kernel_penalty ? pr.B.row(j) : Bt.row(j);
  };

  CoreResult res;
  res.a = a0;
  res.b = std::move(b0);
  double obj = objective_v(pr, res.a, res.b);
  if (diag) diag->outer_objectives.push_back(obj);

  std::vector<double> f(n), w(n), z(n), denom(m), wr(n);
  for (int outer = 1; outer <= cfg.max_outer; ++outer) {
    res.outer_iterations = outer;
    double& a = res.a;
    std::vector<double>& b = res.b;

    for (std::size_t i = 0; i < n; ++i) f[i] = fitted_value(pr, a, b, i);
    for (std::size_t i = 0; i < n; ++i) {
      double q = sigmoid((1.0 - pr.y[i] * f[i]) / pr.rho);
      q = std::min(std::max(q, kQClamp), 1.0 - kQClamp);
      w[i] = q * (1.0 - q);
      z[i] = f[i] + pr.rho / (pr.y[i] * (1.0 - q));
      wr[i] = w[i] * (z[i] - f[i]);  // weighted working residual
    }
    std::vector<double> wcol2(m);  // sum_i B_ij^2 w_i
    for (std::size_t j = 0; j < m; ++j) {
      const auto col = column(j);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += col[i] * col[i] * w[i];
      wcol2[j] = s;
      denom[j] = s / nrho +
                 pr.gamma_v * (1.0 - pr.omega) * (pr.kernel_penalty ? pr.B(j, j) : 1.0);
    }

    const double a_star = a;
    const std::vector<double> b_star = b;

    for (int inner = 1; inner <= cfg.max_inner; ++inner) {
      double delta2 = 0.0;
      // alpha step: weighted mean of the working residuals
      double sw = 0.0, sz = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        sw += w[i];
        sz += wr[i];
      }
      if (sw <= 0.0) throw Error("degenerate-weights", "all curvature weights vanished");
      const double a_new = a + sz / sw;
      if (a_new != a) {
        const double d = a_new - a;
        for (std::size_t i = 0; i < n; ++i) {
          f[i] += d;
          wr[i] -= w[i] * d;
        }
        delta2 += d * d;
        a = a_new;
      }
      // coordinate sweep in fixed ascending order
      for (std::size_t j = 0; j < m; ++j) {
        if (denom[j] <= 0.0) {
          if (b[j] != 0.0) {
            const auto col = column(j);
            const double d = -b[j];
            for (std::size_t i = 0; i < n; ++i) {
              f[i] += col[i] * d;
              wr[i] -= w[i] * col[i] * d;
            }
            delta2 += b[j] * b[j];
            b[j] = 0.0;
          }
          continue;
        }
        const auto col = column(j);
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += col[i] * wr[i];
        const double t = (dot + wcol2[j] * b[j]) / nrho;
        double ridge_cross = 0.0;
        if (pr.kernel_penalty)  // k_j' beta_check = (K b)_j - K_jj b_j = f_j - a - K_jj b_j
          ridge_cross = pr.gamma_v * (1.0 - pr.omega) * (f[j] - a - pr.B(j, j) * b[j]);
        const double b_new =
            soft_threshold(t - ridge_cross, pr.gamma_v * pr.omega) / denom[j];
        if (b_new != b[j]) {
          const double d = b_new - b[j];
          for (std::size_t i = 0; i < n; ++i) {
            f[i] += col[i] * d;
            wr[i] -= w[i] * col[i] * d;
          }
          delta2 += d * d;
          b[j] = b_new;
        }
      }
      if (std::sqrt(delta2) < cfg.eps_inner) break;
    }

    // safeguard: accept the Newton step only if it does not increase the
    // objective, halving back toward the previous iterate when it does
    double obj_new = objective_v(pr, a, b);
    int halvings = 0;
    while (obj_new > obj && halvings < 20) {
      ++halvings;
      a = a_star + 0.5 * (a - a_star);
      for (std::size_t j = 0; j < m; ++j) b[j] = b_star[j] + 0.5 * (b[j] - b_star[j]);
      obj_new = objective_v(pr, a, b);
    }
    if (obj_new > obj) {  // no descent along this direction; stay put
      a = a_star;
      b = b_star;
      obj_new = obj;
    }
    if (diag) {
      diag->outer_objectives.push_back(obj_new);
      diag->halvings += halvings;
    }
    obj = obj_new;

    double d2 = (a - a_star) * (a - a_star);
    for (std::size_t j = 0; j < m; ++j)
      d2 += (b[j] - b_star[j]) * (b[j] - b_star[j]);
    if (std::sqrt(d2) < cfg.eps_outer) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(std::isfinite(gamma) && gamma > 0.0))
    throw Error("invalid-parameter", "gamma must be positive");
  if (!(omega >= 0.0 && omega <= 1.0))
    throw Error("invalid-parameter", "omega must lie in [0, 1]");
  if (!(std::isfinite(rho) && rho > 0.0))
    throw Error("invalid-parameter", "rho must be positive");
  if (!(eps_outer > 0.0 && eps_inner > 0.0))
    throw Error("invalid-parameter", "tolerances must be positive");
  if (max_outer < 1 || max_inner < 1)
    throw Error("invalid-parameter", "iteration caps must be positive");
}

double soft_threshold(double mu, double nu) {
  if (!(nu >= 0.0) || !std::isfinite(mu))
    throw Error("invalid-parameter", "soft_threshold needs finite mu and nu >= 0");
  const double shrunk = std::abs(mu) - nu;
  if (shrunk <= 0.0) return 0.0;
  return mu > 0.0 ? shrunk : -shrunk;
}

NewtonState newton_state(std::span<const double> fhat, std::span<const int> y, double rho) {
  if (fhat.size() != y.size())
    throw Error("dimension-mismatch", "one fitted value per label required");
  if (!(rho > 0.0)) throw Error("invalid-parameter", "rho must be positive");
  const std::size_t n = fhat.size();
  NewtonState st;
  st.q.resize(n);
  st.z.resize(n);
  st.w.resize(n);
  const double nrho = static_cast<double>(n) * rho;
  for (std::size_t i = 0; i < n; ++i) {
    double q = sigmoid((1.0 - y[i] * fhat[i]) / rho);
    q = std::min(std::max(q, kQClamp), 1.0 - kQClamp);
    st.q[i] = q;
    st.z[i] = fhat[i] + rho / (y[i] * (1.0 - q));
    st.w[i] = q * (1.0 - q) / nrho;
  }
  return st;
}

NewtonState newton_state(const KernelModel& model, const Dataset& data,
                         const TrainConfig& cfg) {
  return newton_state(predict_scores(model, data.X), data.y, cfg.rho);
}

NewtonState newton_state(const LinearModel& model, const Dataset& data,
                         const TrainConfig& cfg) {
  return newton_state(predict_scores(model, data.X), data.y, cfg.rho);
}

double update_alpha(const NewtonState& state, std::span<const double> beta_effect) {
  if (beta_effect.size() != state.z.size())
    throw Error("dimension-mismatch", "beta_effect length must match state");
  double sw = 0.0, sz = 0.0;
  for (std::size_t i = 0; i < state.z.size(); ++i) {
    sw += state.w[i];
    sz += state.w[i] * (state.z[i] - beta_effect[i]);
  }
  if (sw <= 0.0) throw Error("degenerate-weights", "all curvature weights vanished");
  return sz / sw;
}

double update_beta_j(std::size_t j, const NewtonState& state, double alpha_tilde,
                     std::span<const double> beta_check, const Matrix& K,
                     const TrainConfig& cfg) {
  const std::size_t n = state.z.size();
  if (K.rows != n || K.cols != beta_check.size() || j >= K.cols)
    throw Error("dimension-mismatch", "kernel matrix does not match state");
  if (beta_check[j] != 0.0)
    throw Error("invalid-argument", "beta_check must have coordinate j zeroed");
  const double gamma_v = penalty_gamma_v(cfg);
  double t = 0.0, denom = 0.0, kj_bcheck = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double ki_b = 0.0;
    for (std::size_t l = 0; l < beta_check.size(); ++l) ki_b += K(i, l) * beta_check[l];
    t += K(i, j) * state.w[i] * (state.z[i] - alpha_tilde - ki_b);
    denom += K(i, j) * K(i, j) * state.w[i];
  }
  for (std::size_t l = 0; l < beta_check.size(); ++l) kj_bcheck += K(j, l) * beta_check[l];
  denom += gamma_v * (1.0 - cfg.omega) * K(j, j);
  if (denom <= 0.0) return 0.0;
  return soft_threshold(t - gamma_v * (1.0 - cfg.omega) * kj_bcheck,
                        gamma_v * cfg.omega) /
         denom;
}

KernelModel fit_kernel(const Dataset& data, const KernelSpec& spec, const TrainConfig& cfg,
                       FitDiagnostics* diag) {
  cfg.validate();
  check_train_data(data);
  const GramMatrix K = gram(spec, data.X, data.X);
  const Problem pr{K.entries, data.y, penalty_gamma_v(cfg), cfg.omega, cfg.rho, true};
  CoreResult r = solve_core(pr, 0.0, std::vector<double>(data.size(), 0.0), cfg, diag);
  KernelModel model;
  model.alpha = r.a;
  model.beta = std::move(r.b);
  model.spec = spec;
  model.support_inputs = data.X;
  model.converged = r.converged;
  model.outer_iterations = r.outer_iterations;
  return model;
}

LinearModel fit_linear(const Dataset& data, const TrainConfig& cfg, FitDiagnostics* diag) {
  cfg.validate();
  check_train_data(data);
  const Problem pr{data.X, data.y, penalty_gamma_v(cfg), cfg.omega, cfg.rho, false};
  CoreResult r = solve_core(pr, 0.0, std::vector<double>(data.X.cols, 0.0), cfg, diag);
  LinearModel model;
  model.a = r.a;
  model.b = std::move(r.b);
  model.converged = r.converged;
  model.outer_iterations = r.outer_iterations;
  return model;
}

KernelModel fit_svm_smoothed(const Dataset& data, const KernelSpec& spec, double gamma,
                             FitDiagnostics* diag) {
  static constexpr double kSchedule[] = {1.0, 0.3, 0.1, 0.03, 0.01};
  TrainConfig cfg;
  cfg.gamma = gamma;
  cfg.omega = 0.0;
  cfg.loss_scale = LossScale::v_loss;
  cfg.validate();
  check_train_data(data);
  const GramMatrix K = gram(spec, data.X, data.X);

  CoreResult r;
  r.a = 0.0;
  r.b.assign(data.size(), 0.0);
  bool all_converged = true;
  int total_outer = 0;
  for (double rho : kSchedule) {
    cfg.rho = rho;
    const Problem pr{K.entries, data.y, cfg.gamma, cfg.omega, cfg.rho, true};
    r = solve_core(pr, r.a, std::move(r.b), cfg, diag);
    all_converged = all_converged && r.converged;
    total_outer += r.outer_iterations;
  }
  KernelModel model;
  model.alpha = r.a;
  model.beta = std::move(r.b);
  model.spec = spec;
  model.support_inputs = data.X;
  model.converged = all_converged;
  model.outer_iterations = total_outer;
  return model;
}

double predict_score(const KernelModel& model, std::span<const double> x) {
  if (x.size() != model.support_inputs.cols)
    throw Error("dimension-mismatch", "input dimension does not match model");
  double s = model.alpha;
  for (std::size_t j = 0; j < model.beta.size(); ++j)
    s += model.beta[j] * kernel_eval(model.spec, model.support_inputs.row(j), x);
  return s;
}

double predict_score(const LinearModel& model, std::span<const double> x) {
  if (x.size() != model.b.size())
    throw Error("dimension-mismatch", "input dimension does not match model");
  double s = model.a;
  for (std::size_t j = 0; j < x.size(); ++j) s += model.b[j] * x[j];
  return s;
}

std::vector<double> predict_scores(const KernelModel& model, const Matrix& X) {
  std::vector<double> out(X.rows);
  for (std::size_t i = 0; i < X.rows; ++i) out[i] = predict_score(model, X.row(i));
  return out;
}

std::vector<double> predict_scores(const LinearModel& model, const Matrix& X) {
  std::vector<double> out(X.rows);
  for (std::size_t i = 0; i < X.rows; ++i) out[i] = predict_score(model, X.row(i));
  return out;
}

namespace {

double loss_term(const std::vector<double>& scores, const std::vector<int>& y,
                 const TrainConfig& cfg) {
  const LossParams p{cfg.rho, 1.0};
  double s = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double z = y[i] * scores[i];
    s += cfg.loss_scale == LossScale::c_loss ? c_loss(p, z) : coherence_v(p, z);
  }
  return s / static_cast<double>(scores.size());
}

}  // namespace

double objective(const KernelModel& model, const Dataset& data, const TrainConfig& cfg) {
  data.validate();
  const double loss = loss_term(predict_scores(model, data.X), data.y, cfg);
  const GramMatrix K = gram(model.spec, model.support_inputs, model.support_inputs);
  double quad = 0.0, l1 = 0.0;
  for (std::size_t i = 0; i < model.beta.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < model.beta.size(); ++j)
      s += K.entries(i, j) * model.beta[j];
    quad += model.beta[i] * s;
    l1 += std::abs(model.beta[i]);
  }
  return loss + cfg.gamma * ((1.0 - cfg.omega) * 0.5 * quad + cfg.omega * l1);
}

double objective(const LinearModel& model, const Dataset& data, const TrainConfig& cfg) {
  data.validate();
  const double loss = loss_term(predict_scores(model, data.X), data.y, cfg);
  double quad = 0.0, l1 = 0.0;
  for (double v : model.b) {
    quad += v * v;
    l1 += std::abs(v);
  }
  return loss + cfg.gamma * ((1.0 - cfg.omega) * 0.5 * quad + cfg.omega * l1);
}

}  // namespace clearn
