#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace clearn {

enum class ThresholdMode { score, probability };

/// Classification error rate. Score mode: y f <= 0 counts as an error (ties
/// at f = 0 are errors). Probability mode applies the same rule to eta - 1/2.
double cer(std::span<const double> values, std::span<const int> labels, ThresholdMode mode);

/// Mean generalized KL divergence between true and estimated class
/// probabilities; 0 log 0 = 0 on the true side, estimates must avoid {0, 1}.
double gkl(std::span<const double> true_eta, std::span<const double> est_eta);

/// One metric across replications. Aggregates use the n-1 divisor; a single
/// replication reports stddev 0 by convention.
struct ReplicationReport {
  std::string method;
  std::string metric;
  std::vector<double> values;
  std::vector<std::uint64_t> seeds;
  double mean = 0.0;
  double stddev = 0.0;
  int n_failures = 0;
};

/// One experiment arm. kind "svm" fits the smoothed hinge machine (gamma by
/// CV when the grid has several entries) and calibrates rho on the training
/// scores; kind "clearning" fits the kernel classifier at fixed rho with
/// (gamma, omega) by CV.
struct MethodSpec {
  std::string name;
  std::string kind = "clearning";
  std::vector<double> gamma_grid{0.1};
  std::vector<double> omega_grid{0.0};
  double rho = 1.0;
};

struct Protocol {
  std::string name = "protocol";
  std::string generator = "disk";  // disk | sine
  std::size_t n = 1000;
  double flip_fraction = 0.2;
  double train_fraction = 0.1;
  std::string sigma_mode = "median-between-classes";  // or mean-pairwise
  int cv_folds = 5;
  std::vector<MethodSpec> methods;
};

/// Metrics for one replication, keyed "<method>.<metric>".
std::map<std::string, double> run_replication(const Protocol& protocol, std::uint64_t seed);

/// Run n_reps replications seeded base_seed + r. Failed replications are
/// recorded and excluded from the aggregates.
std::vector<ReplicationReport> replicate(const Protocol& protocol, int n_reps,
                                         std::uint64_t base_seed);

Protocol protocol_from_json_text(const std::string& text);

std::string reports_to_summary_json(const std::vector<ReplicationReport>& reports);
std::string reports_to_wide_csv(const std::vector<ReplicationReport>& reports);
std::string reports_to_long_csv(const std::vector<ReplicationReport>& reports);

}  // namespace clearn
