#include "clearn/calibration.hpp"

#include <algorithm>
#include <limits>
#include <cmath>

#include "clearn/errors.hpp"
#include "clearn/loss.hpp"
#include "clearn/population.hpp"

namespace clearn {

namespace {

void check_labels(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw Error("dimension-mismatch", "one label per score required");
  if (scores.empty()) throw Error("invalid-argument", "empty score set");
  for (double s : scores)
    if (!std::isfinite(s)) throw Error("invalid-input", "scores must be finite");
}

void require_both_classes(std::span<const int> labels, const char* who) {
  bool pos = false, neg = false;
  for (int y : labels) (y > 0 ? pos : neg) = true;
  if (!pos || !neg)
    throw Error("calibration-error", std::string(who) + " needs both label classes");
}

}  // namespace

double svm_prob(double rho, double fhat) {
  return eta_tilde(LossParams{rho, 1.0}, fhat);
}

double ekl(double rho, std::span<const double> scores, std::span<const int> labels) {
  check_labels(scores, labels);
  if (!(rho > 0.0)) throw Error("invalid-parameter", "rho must be positive");
  const LossParams p{rho, 1.0};
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double d = eta_tilde_logit(p, scores[i]);
    // -log eta = log1pexp(-d), -log(1 - eta) = log1pexp(d)
    total += labels[i] > 0 ? log1pexp(-d) : log1pexp(d);
  }
  return total / static_cast<double>(scores.size());
}

CalibrationFit fit_rho(std::span<const double> scores, std::span<const int> labels,
                       double bracket_lo, double bracket_hi) {
  check_labels(scores, labels);
  require_both_classes(labels, "fit_rho");
  if (!(bracket_lo > 0.0 && bracket_hi > bracket_lo))
    throw Error("invalid-parameter", "bad rho bracket");

  int evals = 0;
  auto eval = [&](double t) {
    ++evals;
    return ekl(std::exp(t), scores, labels);
  };

  const double t_lo = std::log(bracket_lo);
  const double t_hi = std::log(bracket_hi);

  // coarse log-scale scan
  const int kGrid = 200;
  double best_t = t_lo, best_v = eval(t_lo);
  for (int k = 1; k <= kGrid; ++k) {
    const double t = t_lo + (t_hi - t_lo) * k / kGrid;
    const double v = eval(t);
    if (v < best_v) {
      best_v = v;
      best_t = t;
    }
  }

  // golden-section on the bracketing neighbours of the best grid point
  const double step = (t_hi - t_lo) / kGrid;
  double lo = std::max(t_lo, best_t - step);
  double hi = std::min(t_hi, best_t + step);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double v1 = eval(x1), v2 = eval(x2);
  while (hi - lo > 1e-12) {
    if (v1 <= v2) {
      hi = x2;
      x2 = x1;
      v2 = v1;
      x1 = hi - gr * (hi - lo);
      v1 = eval(x1);
    } else {
      lo = x1;
      x1 = x2;
      v1 = v2;
      x2 = lo + gr * (hi - lo);
      v2 = eval(x2);
    }
  }
  if (0.5 * (lo + hi) == std::clamp(0.5 * (lo + hi), t_lo, t_hi)) {
    const double mid = 0.5 * (lo + hi);
    const double vm = eval(mid);
    if (vm < best_v) {
      best_v = vm;
      best_t = mid;
    }
  }

  // Newton polish on finite differences; discard steps that leave the
  // bracket or fail to improve
  const double h = 1e-6;
  for (int it = 0; it < 8; ++it) {
    const double vp = eval(best_t + h), vm = eval(best_t - h);
    const double g = (vp - vm) / (2.0 * h);
    const double hess = (vp - 2.0 * best_v + vm) / (h * h);
    if (!(hess > 0.0)) break;
    const double t_new = best_t - g / hess;
    if (!(t_new >= t_lo && t_new <= t_hi)) break;
    const double v_new = eval(t_new);
    if (v_new > best_v) break;
    if (std::abs(t_new - best_t) < 1e-13) {
      best_t = t_new;
      best_v = v_new;
      break;
    }
    best_t = t_new;
    best_v = v_new;
  }

  CalibrationFit fit;
  // exp(log(hi)) can land one ulp outside the bracket
  fit.rho_hat = std::clamp(std::exp(best_t), bracket_lo, bracket_hi);
  fit.ekl_value = best_v;
  fit.iterations = evals;
  return fit;
}

double sollich_prob(double fhat) {
  if (!std::isfinite(fhat)) throw Error("invalid-input", "score must be finite");
  if (std::abs(fhat) <= 1.0) return sigmoid(2.0 * fhat);
  return sigmoid(fhat + (fhat > 0.0 ? 1.0 : -1.0));
}

PlattFit platt_fit(std::span<const double> scores, std::span<const int> labels) {
  check_labels(scores, labels);
  require_both_classes(labels, "platt_fit");
  const std::size_t n = scores.size();
  constexpr double kACap = 1e3;

  // Perfect separation sends A to -infinity (the cross-entropy saturates at
  // zero); return the capped sigmoid centered between the classes.
  double min_pos = std::numeric_limits<double>::infinity();
  double max_neg = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] > 0)
      min_pos = std::min(min_pos, scores[i]);
    else
      max_neg = std::max(max_neg, scores[i]);
  }
  if (max_neg < min_pos) {
    PlattFit fit;
    fit.A = -kACap;
    fit.B = kACap * 0.5 * (max_neg + min_pos);
    fit.capped = true;
    return fit;
  }

  // cross-entropy of p_i = sigmoid(-(A f_i + B)) against targets (y+1)/2
  auto ce = [&](double A, double B) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = A * scores[i] + B;
      // -log p = log1pexp(s), -log(1-p) = log1pexp(-s)
      total += labels[i] > 0 ? log1pexp(s) : log1pexp(-s);
    }
    return total;
  };

  PlattFit fit;
  double value = ce(fit.A, fit.B);
  for (int it = 0; it < 200; ++it) {
    double gA = 0.0, gB = 0.0, hAA = 0.0, hAB = 0.0, hBB = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(-(fit.A * scores[i] + fit.B));
      const double t = labels[i] > 0 ? 1.0 : 0.0;
      const double r = t - p;  // dCE/ds
      gA += r * scores[i];
      gB += r;
      const double wgt = p * (1.0 - p);
      hAA += wgt * scores[i] * scores[i];
      hAB += wgt * scores[i];
      hBB += wgt;
    }
    if (std::sqrt(gA * gA + gB * gB) < 1e-12) break;
    double det = hAA * hBB - hAB * hAB;
    if (det <= 1e-300) {  // flat Hessian (e.g. saturated probabilities)
      hAA += 1e-12;
      hBB += 1e-12;
      det = hAA * hBB - hAB * hAB;
    }
    double dA = -(hBB * gA - hAB * gB) / det;
    double dB = -(-hAB * gA + hAA * gB) / det;
    // damped step
    double scale = 1.0;
    double A_new = fit.A, B_new = fit.B, v_new = value;
    for (int half = 0; half < 40; ++half) {
      A_new = fit.A + scale * dA;
      B_new = fit.B + scale * dB;
      v_new = ce(A_new, B_new);
      if (v_new <= value) break;
      scale *= 0.5;
    }
    if (v_new > value) break;
    const double moved = std::hypot(A_new - fit.A, B_new - fit.B);
    fit.A = A_new;
    fit.B = B_new;
    value = v_new;
    if (std::abs(fit.A) > kACap) {  // separable scores: A runs away
      fit.A = fit.A > 0.0 ? kACap : -kACap;
      fit.capped = true;
      break;
    }
    if (moved < 1e-12) break;
  }
  return fit;
}

double platt_prob(const PlattFit& fit, double fhat) {
  if (!std::isfinite(fhat)) throw Error("invalid-input", "score must be finite");
  return sigmoid(-(fit.A * fhat + fit.B));
}

}  // namespace clearn
