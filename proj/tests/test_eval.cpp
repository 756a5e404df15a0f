#include <doctest.h>

#include <cmath>
#include <vector>

#include "clearn/errors.hpp"
#include "clearn/eval.hpp"
#include "clearn/rng.hpp"

using namespace clearn;

TEST_CASE("classification error rate") {
  const std::vector<int> labels{1, -1, 1, -1};
  const std::vector<double> perfect{1.0, -2.0, 0.5, -0.1};
  CHECK(cer(perfect, labels, ThresholdMode::score) == 0.0);
  const std::vector<double> flipped{-1.0, 2.0, -0.5, 0.1};
  CHECK(cer(flipped, labels, ThresholdMode::score) == 1.0);

  // ties at zero are errors for either label
  const std::vector<double> tie{0.0};
  const std::vector<int> pos{1}, neg{-1};
  CHECK(cer(tie, pos, ThresholdMode::score) == 1.0);
  CHECK(cer(tie, neg, ThresholdMode::score) == 1.0);
  const std::vector<double> half{0.5};
  CHECK(cer(half, pos, ThresholdMode::probability) == 1.0);
  CHECK(cer(half, neg, ThresholdMode::probability) == 1.0);

  // invariant under sign-preserving monotone transforms
  Rng rng(2);
  std::vector<double> scores;
  std::vector<int> ys;
  for (int i = 0; i < 100; ++i) {
    scores.push_back(rng.uniform(-2.0, 2.0));
    ys.push_back(rng.uniform() < 0.5 ? 1 : -1);
  }
  std::vector<double> warped(scores);
  for (double& s : warped) s = std::tanh(3.0 * s) + s * s * s;
  CHECK(cer(scores, ys, ThresholdMode::score) == cer(warped, ys, ThresholdMode::score));

  const std::vector<double> empty;
  const std::vector<int> no_labels;
  CHECK_THROWS_AS(cer(empty, no_labels, ThresholdMode::score), Error);
}

TEST_CASE("generalized KL divergence") {
  const std::vector<double> eta{0.8, 0.2, 0.5};
  CHECK(gkl(eta, eta) == doctest::Approx(0.0).epsilon(1e-15));

  const std::vector<double> t{0.8};
  const std::vector<double> e{0.5};
  CHECK(gkl(t, e) == doctest::Approx(0.19274475702175743).epsilon(1e-14));

  // degenerate true probabilities are fine (0 log 0 = 0) ...
  const std::vector<double> t2{1.0, 0.0};
  const std::vector<double> e2{0.9, 0.1};
  CHECK(gkl(t2, e2) == doctest::Approx(-0.5 * std::log(0.9) - 0.5 * std::log(0.9))
                           .epsilon(1e-12));
  // ... degenerate estimates are not
  const std::vector<double> e3{1.0, 0.1};
  CHECK_THROWS_AS(gkl(t2, e3), Error);

  Rng rng(4);
  for (int k = 0; k < 200; ++k) {
    const std::vector<double> a{rng.uniform(0.0, 1.0)};
    const std::vector<double> b{rng.uniform(1e-6, 1.0 - 1e-6)};
    CHECK(gkl(a, b) >= 0.0);
  }
}

namespace {
Protocol smoke_protocol() {
  Protocol p;
  p.name = "smoke";
  p.generator = "disk";
  p.n = 80;
  p.train_fraction = 0.5;
  p.cv_folds = 2;
  MethodSpec m;
  m.name = "cl";
  m.kind = "clearning";
  m.gamma_grid = {0.1};
  m.omega_grid = {0.0};
  p.methods.push_back(m);
  return p;
}
}  // namespace

TEST_CASE("replicate aggregates and determinism") {
  const Protocol p = smoke_protocol();
  SUBCASE("single replication has zero stddev") {
    const auto reports = replicate(p, 1, 1000);
    REQUIRE(!reports.empty());
    for (const auto& r : reports) {
      CHECK(r.values.size() == 1);
      CHECK(r.stddev == 0.0);
      CHECK(r.mean == r.values[0]);
    }
  }
  SUBCASE("mean and stddev recomputable from per-replication values") {
    const auto reports = replicate(p, 4, 2000);
    for (const auto& r : reports) {
      REQUIRE(r.values.size() == 4);
      double mean = 0.0;
      for (double v : r.values) mean += v;
      mean /= 4.0;
      double var = 0.0;
      for (double v : r.values) var += (v - mean) * (v - mean);
      var /= 3.0;
      CHECK(r.mean == doctest::Approx(mean).epsilon(1e-15));
      CHECK(r.stddev == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
    }
  }
  SUBCASE("identical seeds give identical reports") {
    const auto a = replicate(p, 3, 555);
    const auto b = replicate(p, 3, 555);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].metric == b[i].metric);
      CHECK(a[i].values == b[i].values);
    }
    CHECK(reports_to_summary_json(a) == reports_to_summary_json(b));
  }
  SUBCASE("serializations agree with the reports") {
    const auto reports = replicate(p, 2, 99);
    const std::string wide = reports_to_wide_csv(reports);
    const std::string longf = reports_to_long_csv(reports);
    // wide: header + 2 rows; long: header + 2 rows per report
    CHECK(std::count(wide.begin(), wide.end(), '\n') == 3);
    CHECK(std::count(longf.begin(), longf.end(), '\n') ==
          static_cast<long>(1 + 2 * reports.size()));
  }
}

TEST_CASE("protocol json parsing") {
  const std::string text = R"({
    "name": "t",
    "generator": {"kind": "sine", "n": 200},
    "train_fraction": 0.25,
    "cv_folds": 3,
    "methods": [
      {"name": "svm", "kind": "svm", "gamma_grid": [0.1, 0.3]},
      {"name": "cl", "kind": "clearning", "gamma_grid": [0.5], "omega_grid": [0.0, 0.5], "rho": 2.0}
    ]
  })";
  const Protocol p = protocol_from_json_text(text);
  CHECK(p.generator == "sine");
  CHECK(p.n == 200);
  CHECK(p.train_fraction == 0.25);
  CHECK(p.cv_folds == 3);
  REQUIRE(p.methods.size() == 2);
  CHECK(p.methods[0].kind == "svm");
  CHECK(p.methods[1].rho == 2.0);
  CHECK(p.methods[1].omega_grid.size() == 2);

  CHECK_THROWS_AS(protocol_from_json_text("{not json"), Error);
  CHECK_THROWS_AS(protocol_from_json_text("{}"), Error);
}
