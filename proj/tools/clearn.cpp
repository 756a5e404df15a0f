// clearn — train, calibrate, and evaluate coherence-loss classifiers.
//
// Subcommands: simulate | train | predict | calibrate | replicate.
// Every command exits 0 on success and prints a single "error: ..." line to
// stderr otherwise. All randomness flows through explicit --seed flags.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clearn/calibration.hpp"
#include "clearn/data.hpp"
#include "clearn/errors.hpp"
#include "clearn/eval.hpp"
#include "clearn/kernel.hpp"
#include "clearn/model_io.hpp"
#include "clearn/rng.hpp"
#include "clearn/solver.hpp"

namespace {

using namespace clearn;

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io-error", "cannot open " + tmp + " for writing");
    out << content;
    if (!out.flush()) throw Error("io-error", "failed writing " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("io-error", "cannot rename " + tmp + " to " + path);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct SimulateArgs {
  std::string kind;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  double flip_fraction = 0.2;
  std::string out;
};

void cmd_simulate(const SimulateArgs& a) {
  Dataset ds;
  if (a.kind == "disk") {
    ds = gen_disk(a.n, a.flip_fraction, a.seed);
  } else if (a.kind == "sine") {
    ds = gen_sine(a.n, a.seed);
  } else {
    throw Error("usage", "unknown dataset kind '" + a.kind + "' (expected disk|sine)");
  }
  save_csv(ds, a.out);
  std::cout << "wrote " << ds.size() << " samples to " << a.out << "\n";
}

struct TrainArgs {
  std::string data;
  std::string expansion = "kernel";
  std::string objective = "clearning";  // clearning | svm
  std::vector<double> gamma{1.0};
  std::vector<double> omega{0.0};
  double rho = 1.0;  // per-paper default for C-learning
  std::string loss_scale = "c_loss";
  std::string sigma_mode = "median-between-classes";
  double sigma = 0.0;  // explicit override when > 0
  int cv_folds = 5;
  std::uint64_t seed = 0;
  std::string model_out;
};

KernelSpec resolve_spec(const TrainArgs& a, const Dataset& ds) {
  KernelSpec spec;
  spec.kind = KernelKind::rbf;
  if (a.sigma > 0.0) {
    spec.sigma = a.sigma;
  } else if (a.sigma_mode == "median-between-classes") {
    spec.sigma = sigma_median_between_classes(ds.X, ds.y);
  } else if (a.sigma_mode == "mean-pairwise") {
    spec.sigma = sigma_mean_pairwise(ds.X);
  } else {
    throw Error("usage", "unknown sigma-mode '" + a.sigma_mode + "'");
  }
  return spec;
}

// k-fold CV over the flag grids on validation CER, ties to the larger gamma
// (then larger omega).
template <typename FitPredict>
std::pair<double, double> cv_select(const Dataset& ds, const std::vector<double>& gammas,
                                    const std::vector<double>& omegas, int folds,
                                    std::uint64_t seed, FitPredict&& fit_predict) {
  const std::size_t n = ds.size();
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.index(i + 1));
    std::swap(idx[i], idx[j]);
  }
  auto subset = [&](int fold, bool in_fold) {
    Dataset out;
    out.name = ds.name;
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < n; ++r)
      if ((static_cast<int>(r % folds) == fold) == in_fold) rows.push_back(idx[r]);
    out.X = Matrix(rows.size(), ds.X.cols);
    out.y.resize(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t k = 0; k < ds.X.cols; ++k) out.X(r, k) = ds.X(rows[r], k);
      out.y[r] = ds.y[rows[r]];
    }
    return out;
  };

  double best_gamma = gammas.front(), best_omega = omegas.front(), best_cer = 2.0;
  bool first = true;
  for (double g : gammas)
    for (double w : omegas) {
      double total = 0.0;
      int used = 0;
      for (int f = 0; f < folds; ++f) {
        const Dataset tr = subset(f, false);
        const Dataset va = subset(f, true);
        if (tr.size() == 0 || va.size() == 0) continue;
        total += cer(fit_predict(tr, va, g, w), va.y, ThresholdMode::score);
        ++used;
      }
      const double mean = used > 0 ? total / used : 2.0;
      if (first || mean < best_cer ||
          (mean == best_cer && (g > best_gamma || (g == best_gamma && w > best_omega)))) {
        best_gamma = g;
        best_omega = w;
        best_cer = mean;
        first = false;
      }
    }
  return {best_gamma, best_omega};
}

void cmd_train(const TrainArgs& a) {
  const Dataset ds = load_csv(a.data);
  TrainConfig cfg;
  cfg.rho = a.rho;
  if (a.loss_scale == "c_loss" || a.loss_scale == "c") {
    cfg.loss_scale = LossScale::c_loss;
  } else if (a.loss_scale == "v_loss" || a.loss_scale == "v") {
    cfg.loss_scale = LossScale::v_loss;
  } else {
    throw Error("usage", "unknown loss-scale '" + a.loss_scale + "'");
  }

  ModelFile mf;
  bool converged = true;
  if (a.expansion == "kernel") {
    const KernelSpec spec = resolve_spec(a, ds);
    if (a.objective == "svm") {
      double gamma = a.gamma.front();
      if (a.gamma.size() > 1)
        gamma = cv_select(ds, a.gamma, {0.0}, a.cv_folds, a.seed,
                          [&](const Dataset& tr, const Dataset& va, double g, double) {
                            return predict_scores(fit_svm_smoothed(tr, spec, g), va.X);
                          })
                    .first;
      const KernelModel m = fit_svm_smoothed(ds, spec, gamma);
      converged = m.converged;
      cfg.gamma = gamma;
      cfg.omega = 0.0;
      cfg.rho = 0.01;  // final continuation temperature
      cfg.loss_scale = LossScale::v_loss;
      mf = ModelFile{m, cfg};
    } else if (a.objective == "clearning") {
      auto [gamma, omega] =
          cv_select(ds, a.gamma, a.omega, a.cv_folds, a.seed,
                    [&](const Dataset& tr, const Dataset& va, double g, double w) {
                      TrainConfig c = cfg;
                      c.gamma = g;
                      c.omega = w;
                      return predict_scores(fit_kernel(tr, spec, c), va.X);
                    });
      cfg.gamma = gamma;
      cfg.omega = omega;
      const KernelModel m = fit_kernel(ds, spec, cfg);
      converged = m.converged;
      mf = ModelFile{m, cfg};
    } else {
      throw Error("usage", "unknown objective '" + a.objective + "'");
    }
  } else if (a.expansion == "linear") {
    if (a.objective == "svm")
      throw Error("usage", "the svm objective is kernel-only");
    auto [gamma, omega] = cv_select(ds, a.gamma, a.omega, a.cv_folds, a.seed,
                                    [&](const Dataset& tr, const Dataset& va, double g,
                                        double w) {
                                      TrainConfig c = cfg;
                                      c.gamma = g;
                                      c.omega = w;
                                      return predict_scores(fit_linear(tr, c), va.X);
                                    });
    cfg.gamma = gamma;
    cfg.omega = omega;
    const LinearModel m = fit_linear(ds, cfg);
    converged = m.converged;
    mf = ModelFile{m, cfg};
  } else {
    throw Error("usage", "unknown expansion '" + a.expansion + "' (expected kernel|linear)");
  }

  save_model(mf, a.model_out);
  std::cout << "wrote model to " << a.model_out << " (gamma=" << fmt(mf.config.gamma)
            << ", omega=" << fmt(mf.config.omega) << ", converged=" << converged << ")\n";
  if (!converged) std::cout << "warning: solver did not meet the outer tolerance\n";
}

struct PredictArgs {
  std::string model;
  std::string data;
  std::string out;
  std::string with_probability = "none";  // none | crho | platt | sollich
  double rho = 0.0;                       // crho override; 0 = training rho
  double platt_a = 0.0;
  double platt_b = 0.0;
  bool platt_given = false;
};

void cmd_predict(const PredictArgs& a) {
  const ModelFile mf = load_model(a.model);
  const Dataset ds = load_csv(a.data);
  std::vector<double> scores;
  if (const auto* km = std::get_if<KernelModel>(&mf.model)) {
    scores = predict_scores(*km, ds.X);
  } else {
    scores = predict_scores(std::get<LinearModel>(mf.model), ds.X);
  }

  std::ostringstream out;
  out << "score,label";
  if (a.with_probability != "none") out << ",prob";
  out << "\n";
  for (double s : scores) {
    out << fmt(s) << "," << (s > 0.0 ? 1 : -1);
    if (a.with_probability == "crho") {
      const double rho = a.rho > 0.0 ? a.rho : mf.config.rho;
      out << "," << fmt(svm_prob(rho, s));
    } else if (a.with_probability == "sollich") {
      out << "," << fmt(sollich_prob(s));
    } else if (a.with_probability == "platt") {
      if (!a.platt_given)
        throw Error("usage", "platt mode needs --platt-a and --platt-b");
      out << "," << fmt(platt_prob({a.platt_a, a.platt_b, false}, s));
    } else if (a.with_probability != "none") {
      throw Error("usage", "unknown probability mode '" + a.with_probability + "'");
    }
    out << "\n";
  }
  write_text_atomic(a.out, out.str());
  std::cout << "wrote " << scores.size() << " predictions to " << a.out << "\n";
}

struct CalibrateArgs {
  std::string model;
  std::string data;
  std::string out;
};

void cmd_calibrate(const CalibrateArgs& a) {
  const ModelFile mf = load_model(a.model);
  const Dataset ds = load_csv(a.data);
  std::vector<double> scores;
  if (const auto* km = std::get_if<KernelModel>(&mf.model)) {
    scores = predict_scores(*km, ds.X);
  } else {
    scores = predict_scores(std::get<LinearModel>(mf.model), ds.X);
  }
  const CalibrationFit fit = fit_rho(scores, ds.y);
  nlohmann::json j{{"rho_hat", fit.rho_hat},
                   {"ekl", fit.ekl_value},
                   {"iterations", fit.iterations}};
  write_text_atomic(a.out, j.dump(2) + "\n");
  std::cout << "rho_hat=" << fmt(fit.rho_hat) << " ekl=" << fmt(fit.ekl_value) << "\n";
}

struct ReplicateArgs {
  std::string protocol;
  int n_reps = 20;
  std::uint64_t base_seed = 0;
  std::string out_dir;
};

void cmd_replicate(const ReplicateArgs& a) {
  std::ifstream in(a.protocol, std::ios::binary);
  if (!in) throw Error("io-error", "cannot open " + a.protocol);
  std::ostringstream ss;
  ss << in.rdbuf();
  const Protocol protocol = protocol_from_json_text(ss.str());
  const auto reports = replicate(protocol, a.n_reps, a.base_seed);

  std::filesystem::create_directories(a.out_dir);
  const std::string stem = (std::filesystem::path(a.out_dir) / protocol.name).string();
  write_text_atomic(stem + "_per_rep.csv", reports_to_wide_csv(reports));
  write_text_atomic(stem + "_long.csv", reports_to_long_csv(reports));
  write_text_atomic(stem + "_summary.json", reports_to_summary_json(reports));
  for (const auto& r : reports)
    std::cout << r.method << "." << r.metric << ": mean=" << fmt(r.mean)
              << " sd=" << fmt(r.stddev) << " n=" << r.values.size()
              << " failures=" << r.n_failures << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coherence-loss classification toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* s = app.add_subcommand("simulate", "generate a synthetic dataset CSV");
  s->add_option("--kind", sim.kind, "disk | sine")->required();
  s->add_option("--n", sim.n, "sample count");
  s->add_option("--seed", sim.seed, "RNG seed");
  s->add_option("--flip-fraction", sim.flip_fraction, "label flip fraction (disk)");
  s->add_option("--out", sim.out, "output CSV path")->required();

  TrainArgs tr;
  CLI::App* t = app.add_subcommand("train", "fit a model, optionally with CV grids");
  t->add_option("--data", tr.data, "training CSV")->required();
  t->add_option("--expansion", tr.expansion, "kernel | linear");
  t->add_option("--objective", tr.objective, "clearning | svm (smoothed hinge)");
  t->add_option("--gamma", tr.gamma, "penalty value or CV grid")->delimiter(',');
  t->add_option("--omega", tr.omega, "elastic-net mix value or CV grid")->delimiter(',');
  t->add_option("--rho", tr.rho, "loss temperature");
  t->add_option("--loss-scale", tr.loss_scale, "c_loss | v_loss");
  t->add_option("--sigma-mode", tr.sigma_mode, "median-between-classes | mean-pairwise");
  t->add_option("--sigma", tr.sigma, "explicit RBF bandwidth (overrides sigma-mode)");
  t->add_option("--cv-folds", tr.cv_folds, "cross-validation folds");
  t->add_option("--seed", tr.seed, "CV shuffling seed");
  t->add_option("--model-out", tr.model_out, "output model JSON")->required();

  PredictArgs pr;
  CLI::App* p = app.add_subcommand("predict", "score a dataset with a saved model");
  p->add_option("--model", pr.model, "model JSON")->required();
  p->add_option("--data", pr.data, "input CSV")->required();
  p->add_option("--out", pr.out, "output CSV")->required();
  p->add_option("--with-probability", pr.with_probability, "none | crho | platt | sollich");
  p->add_option("--rho", pr.rho, "temperature for crho (default: training rho)");
  auto* pa = p->add_option("--platt-a", pr.platt_a, "Platt A coefficient");
  auto* pb = p->add_option("--platt-b", pr.platt_b, "Platt B coefficient");

  CalibrateArgs ca;
  CLI::App* c = app.add_subcommand("calibrate", "fit the temperature on training scores");
  c->add_option("--model", ca.model, "model JSON")->required();
  c->add_option("--data", ca.data, "labelled CSV")->required();
  c->add_option("--out", ca.out, "output JSON")->required();

  ReplicateArgs re;
  CLI::App* r = app.add_subcommand("replicate", "run a replication protocol");
  r->add_option("--protocol", re.protocol, "protocol JSON")->required();
  r->add_option("--n-reps", re.n_reps, "replication count");
  r->add_option("--base-seed", re.base_seed, "seed of replication 0");
  r->add_option("--out-dir", re.out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (s->parsed()) cmd_simulate(sim);
    if (t->parsed()) cmd_train(tr);
    if (p->parsed()) {
      pr.platt_given = pa->count() > 0 && pb->count() > 0;
      cmd_predict(pr);
    }
    if (c->parsed()) cmd_calibrate(ca);
    if (r->parsed()) cmd_replicate(re);
  } catch (const clearn::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
