#include "clearn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include <json.hpp>

#include "clearn/calibration.hpp"
#include "clearn/data.hpp"
#include "clearn/errors.hpp"
#include "clearn/kernel.hpp"
#include "clearn/population.hpp"
#include "clearn/rng.hpp"
#include "clearn/solver.hpp"

namespace clearn {

double cer(std::span<const double> values, std::span<const int> labels, ThresholdMode mode) {
  if (values.size() != labels.size())
    throw Error("dimension-mismatch", "one label per value required");
  if (values.empty()) throw Error("invalid-argument", "cer needs at least one sample");
  std::size_t errors = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double s = mode == ThresholdMode::score ? values[i] : values[i] - 0.5;
    if (labels[i] * s <= 0.0) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(values.size());
}

double gkl(std::span<const double> true_eta, std::span<const double> est_eta) {
  if (true_eta.size() != est_eta.size())
    throw Error("dimension-mismatch", "gkl needs aligned probability vectors");
  if (true_eta.empty()) throw Error("invalid-argument", "gkl needs at least one sample");
  double total = 0.0;
  for (std::size_t i = 0; i < true_eta.size(); ++i) {
    const double p = true_eta[i];
    const double q = est_eta[i];
    if (!(p >= 0.0 && p <= 1.0))
      throw Error("invalid-input", "true eta must lie in [0, 1]");
    if (!(q > 0.0 && q < 1.0))
      throw Error("metric-domain", "estimated eta must lie strictly inside (0, 1)");
    if (p > 0.0) total += p * std::log(p / q);
    if (p < 1.0) total += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  }
  return total / static_cast<double>(true_eta.size());
}

namespace {

struct CvChoice {
  double gamma = 0.0;
  double omega = 0.0;
};

std::vector<std::size_t> fold_of(std::size_t n, int k, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.index(i + 1));
    std::swap(idx[i], idx[j]);
  }
  std::vector<std::size_t> fold(n);
  for (std::size_t r = 0; r < n; ++r) fold[idx[r]] = r % static_cast<std::size_t>(k);
  return fold;
}

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& rows) {
  Dataset out;
  out.name = ds.name;
  out.X = Matrix(rows.size(), ds.X.cols);
  out.y.resize(rows.size());
  if (ds.has_true_eta()) out.true_eta.resize(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t k = 0; k < ds.X.cols; ++k) out.X(r, k) = ds.X(rows[r], k);
    out.y[r] = ds.y[rows[r]];
    if (ds.has_true_eta()) out.true_eta[r] = ds.true_eta[rows[r]];
  }
  return out;
}

// k-fold CV over the (gamma, omega) grid on validation CER; ties prefer the
// stronger penalty (larger gamma, then larger omega).
template <typename FitPredict>
CvChoice cross_validate(const Dataset& train, const std::vector<double>& gamma_grid,
                        const std::vector<double>& omega_grid, int folds,
                        std::uint64_t seed, FitPredict&& fit_predict) {
  const std::size_t n = train.size();
  const auto fold = fold_of(n, folds, seed);

  std::vector<std::vector<std::size_t>> in_fold(folds), out_fold(folds);
  for (std::size_t i = 0; i < n; ++i) {
    for (int f = 0; f < folds; ++f)
      (fold[i] == static_cast<std::size_t>(f) ? in_fold[f] : out_fold[f]).push_back(i);
  }

  CvChoice best;
  double best_cer = 2.0;
  bool first = true;
  for (double gamma : gamma_grid) {
    for (double omega : omega_grid) {
      double total = 0.0;
      int used = 0;
      for (int f = 0; f < folds; ++f) {
        if (in_fold[f].empty() || out_fold[f].empty()) continue;
        const Dataset tr = subset(train, out_fold[f]);
        const Dataset va = subset(train, in_fold[f]);
        const std::vector<double> scores = fit_predict(tr, va, gamma, omega);
        total += cer(scores, va.y, ThresholdMode::score);
        ++used;
      }
      const double mean_cer = used > 0 ? total / used : 2.0;
      const bool better =
          first || mean_cer < best_cer ||
          (mean_cer == best_cer &&
           (gamma > best.gamma || (gamma == best.gamma && omega > best.omega)));
      if (better) {
        best = {gamma, omega};
        best_cer = mean_cer;
        first = false;
      }
    }
  }
  return best;
}

double pick_sigma(const Dataset& train, const std::string& mode) {
  if (mode == "median-between-classes") return sigma_median_between_classes(train.X, train.y);
  if (mode == "mean-pairwise") return sigma_mean_pairwise(train.X);
  throw Error("invalid-parameter", "unknown sigma_mode '" + mode + "'");
}

// The tabulated GKL is the cross-entropy form of the divergence,
// mean[-eta log etahat - (1-eta) log(1-etahat)], which exceeds the pure
// divergence by the mean entropy of the true probabilities (a method-
// independent constant). Evaluated in log space straight from the scores so
// that extreme probabilities contribute their exact finite terms.
double gkl_tabulated(std::span<const double> true_eta, std::span<const double> scores,
                     double rho) {
  const LossParams p{rho, 1.0};
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double d = eta_tilde_logit(p, scores[i]);
    // -log etahat = log1pexp(-d), -log(1 - etahat) = log1pexp(d)
    total += true_eta[i] * log1pexp(-d) + (1.0 - true_eta[i]) * log1pexp(d);
  }
  return total / static_cast<double>(scores.size());
}

void run_method(const MethodSpec& m, const Dataset& train, const Dataset& test,
                const KernelSpec& spec, int folds, std::uint64_t cv_seed,
                std::map<std::string, double>& out) {
  const auto key = [&](const char* metric) { return m.name + "." + metric; };

  if (m.kind == "svm") {
    double gamma = m.gamma_grid.at(0);
    if (m.gamma_grid.size() > 1) {
      gamma = cross_validate(train, m.gamma_grid, {0.0}, folds, cv_seed,
                             [&](const Dataset& tr, const Dataset& va, double g, double) {
                               const KernelModel mod = fit_svm_smoothed(tr, spec, g);
                               return predict_scores(mod, va.X);
                             })
                  .gamma;
    }
    const KernelModel model = fit_svm_smoothed(train, spec, gamma);
    const std::vector<double> train_scores = predict_scores(model, train.X);
    const CalibrationFit cal = fit_rho(train_scores, train.y);
    const std::vector<double> test_scores = predict_scores(model, test.X);

    out[key("cer")] = cer(test_scores, test.y, ThresholdMode::score);
    out[key("rho_hat")] = cal.rho_hat;
    out[key("gamma")] = gamma;
    std::vector<double> probs(test_scores.size());
    for (std::size_t i = 0; i < test_scores.size(); ++i)
      probs[i] = svm_prob(cal.rho_hat, test_scores[i]);
    out[key("cer_prob")] = cer(probs, test.y, ThresholdMode::probability);
    if (test.has_true_eta())
      out[key("gkl")] = gkl_tabulated(test.true_eta, test_scores, cal.rho_hat);
    return;
  }

  if (m.kind == "clearning") {
    TrainConfig cfg;
    cfg.rho = m.rho;
    cfg.loss_scale = LossScale::c_loss;
    CvChoice choice{m.gamma_grid.at(0), m.omega_grid.at(0)};
    if (m.gamma_grid.size() > 1 || m.omega_grid.size() > 1) {
      choice = cross_validate(train, m.gamma_grid, m.omega_grid, folds, cv_seed,
                              [&](const Dataset& tr, const Dataset& va, double g, double w) {
                                TrainConfig c = cfg;
                                c.gamma = g;
                                c.omega = w;
                                const KernelModel mod = fit_kernel(tr, spec, c);
                                return predict_scores(mod, va.X);
                              });
    }
    cfg.gamma = choice.gamma;
    cfg.omega = choice.omega;
    const KernelModel model = fit_kernel(train, spec, cfg);
    const std::vector<double> test_scores = predict_scores(model, test.X);

    out[key("cer")] = cer(test_scores, test.y, ThresholdMode::score);
    out[key("gamma")] = choice.gamma;
    out[key("omega")] = choice.omega;
    std::vector<double> probs(test_scores.size());
    for (std::size_t i = 0; i < test_scores.size(); ++i)
      probs[i] = svm_prob(m.rho, test_scores[i]);
    out[key("cer_prob")] = cer(probs, test.y, ThresholdMode::probability);
    if (test.has_true_eta())
      out[key("gkl")] = gkl_tabulated(test.true_eta, test_scores, m.rho);
    return;
  }

  throw Error("invalid-parameter", "unknown method kind '" + m.kind + "'");
}

}  // namespace

std::map<std::string, double> run_replication(const Protocol& protocol, std::uint64_t seed) {
  Dataset full;
  if (protocol.generator == "disk") {
    full = gen_disk(protocol.n, protocol.flip_fraction, Rng::stream(seed, 0));
  } else if (protocol.generator == "sine") {
    full = gen_sine(protocol.n, Rng::stream(seed, 0));
  } else {
    throw Error("invalid-parameter", "unknown generator '" + protocol.generator + "'");
  }
  const auto [train, test] = split(full, {protocol.train_fraction, Rng::stream(seed, 1)});
  KernelSpec spec;
  spec.kind = KernelKind::rbf;
  spec.sigma = pick_sigma(train, protocol.sigma_mode);

  std::map<std::string, double> metrics;
  for (std::size_t mi = 0; mi < protocol.methods.size(); ++mi)
    run_method(protocol.methods[mi], train, test, spec, protocol.cv_folds,
               Rng::stream(seed, 2 + mi), metrics);
  return metrics;
}

std::vector<ReplicationReport> replicate(const Protocol& protocol, int n_reps,
                                         std::uint64_t base_seed) {
  if (n_reps < 1) throw Error("invalid-argument", "n_reps must be positive");
  if (protocol.methods.empty())
    throw Error("invalid-parameter", "protocol needs at least one method");

  std::map<std::string, ReplicationReport> by_key;
  int failures = 0;
  for (int r = 0; r < n_reps; ++r) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(r);
    std::map<std::string, double> metrics;
    try {
      metrics = run_replication(protocol, seed);
    } catch (const Error&) {
      ++failures;
      continue;
    }
    for (const auto& [k, v] : metrics) {
      ReplicationReport& rep = by_key[k];
      if (rep.metric.empty()) {
        const auto dot = k.find('.');
        rep.method = k.substr(0, dot);
        rep.metric = k.substr(dot + 1);
      }
      rep.values.push_back(v);
      rep.seeds.push_back(seed);
    }
  }

  std::vector<ReplicationReport> reports;
  reports.reserve(by_key.size());
  for (auto& [_, rep] : by_key) {
    const auto n = static_cast<double>(rep.values.size());
    double mean = 0.0;
    for (double v : rep.values) mean += v;
    mean /= n;
    double var = 0.0;
    if (rep.values.size() > 1) {
      for (double v : rep.values) var += (v - mean) * (v - mean);
      var /= (n - 1.0);
    }
    rep.mean = mean;
    rep.stddev = std::sqrt(var);
    rep.n_failures = failures;
    reports.push_back(std::move(rep));
  }
  return reports;
}

Protocol protocol_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error("parse-error", std::string("protocol JSON: ") + e.what());
  }
  Protocol p;
  try {
    p.name = j.value("name", p.name);
    const auto& gen = j.at("generator");
    p.generator = gen.at("kind").get<std::string>();
    p.n = gen.value("n", p.n);
    p.flip_fraction = gen.value("flip_fraction", p.flip_fraction);
    p.train_fraction = j.value("train_fraction", p.train_fraction);
    p.sigma_mode = j.value("sigma_mode", p.sigma_mode);
    p.cv_folds = j.value("cv_folds", p.cv_folds);
    for (const auto& jm : j.at("methods")) {
      MethodSpec m;
      m.name = jm.at("name").get<std::string>();
      m.kind = jm.value("kind", m.kind);
      if (jm.contains("gamma_grid")) m.gamma_grid = jm["gamma_grid"].get<std::vector<double>>();
      if (jm.contains("omega_grid")) m.omega_grid = jm["omega_grid"].get<std::vector<double>>();
      m.rho = jm.value("rho", m.rho);
      p.methods.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("parse-error", std::string("protocol JSON: ") + e.what());
  }
  return p;
}

std::string reports_to_summary_json(const std::vector<ReplicationReport>& reports) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : reports) {
    j.push_back({{"method", r.method},
                 {"metric", r.metric},
                 {"mean", r.mean},
                 {"stddev", r.stddev},
                 {"replications", r.values.size()},
                 {"failures", r.n_failures}});
  }
  return j.dump(2) + "\n";
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string reports_to_wide_csv(const std::vector<ReplicationReport>& reports) {
  // rows: one per replication; columns: rep, seed, then one per method.metric
  std::ostringstream out;
  out << "rep,seed";
  for (const auto& r : reports) out << "," << r.method << "." << r.metric;
  out << "\n";
  const std::size_t rows = reports.empty() ? 0 : reports.front().values.size();
  for (std::size_t i = 0; i < rows; ++i) {
    out << i << "," << (reports.empty() ? 0 : reports.front().seeds[i]);
    for (const auto& r : reports) out << "," << fmt(r.values.at(i));
    out << "\n";
  }
  return out.str();
}

std::string reports_to_long_csv(const std::vector<ReplicationReport>& reports) {
  std::ostringstream out;
  out << "rep,seed,method,metric,value\n";
  for (const auto& r : reports)
    for (std::size_t i = 0; i < r.values.size(); ++i)
      out << i << "," << r.seeds[i] << "," << r.method << "," << r.metric << ","
          << fmt(r.values[i]) << "\n";
  return out.str();
}

}  // namespace clearn
