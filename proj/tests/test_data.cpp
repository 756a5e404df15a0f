#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "clearn/data.hpp"
#include "clearn/errors.hpp"

using namespace clearn;

namespace {
std::string temp_path(const std::string& tag) {
  static int counter = 0;
  return (std::filesystem::temp_directory_path() /
          ("clearn_test_" + tag + "_" + std::to_string(counter++) + ".csv"))
      .string();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}
}  // namespace

TEST_CASE("gen_disk geometry, labels, and exact flip count") {
  const Dataset ds = gen_disk(1000, 0.2, 77);
  REQUIRE(ds.size() == 1000);
  std::size_t disagreements = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double x1 = ds.X(i, 0), x2 = ds.X(i, 1);
    CHECK(x1 * x1 + x2 * x2 <= 1.0);
    CHECK((ds.true_eta[i] == 0.8 || ds.true_eta[i] == 0.2));
    CHECK(ds.true_eta[i] == (x1 >= 0.0 ? 0.8 : 0.2));
    const int base = x1 >= 0.0 ? 1 : -1;
    if (ds.y[i] != base) ++disagreements;
  }
  CHECK(disagreements == 200);

  CHECK(gen_disk(50, 0.2, 1).X == gen_disk(50, 0.2, 1).X);
  CHECK(gen_disk(50, 0.2, 1).X != gen_disk(50, 0.2, 2).X);
  CHECK_THROWS_AS(gen_disk(1, 0.2, 1), Error);
  CHECK_THROWS_AS(gen_disk(100, 0.6, 1), Error);
  CHECK_THROWS_AS(gen_disk(100, -0.1, 1), Error);
}

TEST_CASE("sine generator and its density-ratio probability") {
  const Dataset ds = gen_sine(500, 123);
  REQUIRE(ds.size() == 500);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(ds.true_eta[i] == true_eta_sine(ds.X(i, 0), ds.X(i, 1)));
    CHECK(ds.X(i, 0) >= 0.0);
    CHECK(ds.X(i, 0) <= 2.0 * 3.14159265358979324);
  }

  for (double x1 : {0.0, 1.0, 3.0, 5.5}) CHECK(true_eta_sine(x1, 0.0) == 0.5);
  CHECK(true_eta_sine(3.14159265358979324 / 2.0, 2.0) > 1.0 - 1e-12);

  // mirrored point flips the probability
  for (double x1 : {0.3, 2.0, 4.4})
    for (double x2 : {0.1, 0.02, -0.07})
      CHECK(true_eta_sine(x1, x2) + true_eta_sine(x1, -x2) ==
            doctest::Approx(1.0).epsilon(1e-12));

  // direct normal-density oracle in long double
  const long double v = 0.01L;
  auto dens = [&](long double x, long double m) {
    return std::exp(-(x - m) * (x - m) / (2.0L * v));
  };
  for (double x1 : {0.0, 0.9, 4.0})
    for (double x2 : {0.05, -0.12, 0.01}) {
      const long double m = std::sin(static_cast<long double>(x1)) + 1.0L;
      const long double expected =
          dens(x2, m) / (dens(x2, m) + dens(x2, -m));
      CHECK(true_eta_sine(x1, x2) ==
            doctest::Approx(static_cast<double>(expected)).epsilon(1e-12));
    }
}

TEST_CASE("csv round trip preserves every entry") {
  const Dataset ds = gen_disk(50, 0.2, 5);
  const std::string path = temp_path("roundtrip");
  save_csv(ds, path);
  const Dataset back = load_csv(path);
  CHECK(back.X == ds.X);
  CHECK(back.y == ds.y);
  CHECK(back.true_eta == ds.true_eta);
  std::filesystem::remove(path);
}

TEST_CASE("csv parse errors carry line numbers") {
  const std::string path = temp_path("bad");

  SUBCASE("zero label") {
    write_file(path, "f0,y\n0.5,0\n");
    try {
      load_csv(path);
      FAIL("expected parse error");
    } catch (const Error& e) {
      CHECK(e.category() == "parse-error");
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("ragged row") {
    write_file(path, "f0,f1,y\n0.5,0.5,1\n0.5,1\n");
    try {
      load_csv(path);
      FAIL("expected parse error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  SUBCASE("malformed header") {
    write_file(path, "a,b,c\n1,2,3\n");
    CHECK_THROWS_AS(load_csv(path), Error);
  }
  SUBCASE("eta column optional") {
    write_file(path, "f0,y\n0.25,1\n-0.5,-1\n");
    const Dataset ds = load_csv(path);
    CHECK_FALSE(ds.has_true_eta());
    CHECK(ds.size() == 2);
  }
  std::filesystem::remove(path);
}

TEST_CASE("split is a deterministic partition") {
  const Dataset ds = gen_disk(1000, 0.2, 9);
  const auto [train, test] = split(ds, {0.1, 42});
  CHECK(train.size() == 100);
  CHECK(test.size() == 900);

  const auto [train2, test2] = split(ds, {0.1, 42});
  CHECK(train.X == train2.X);
  CHECK(test.y == test2.y);

  // union of the parts recovers the multiset of rows
  std::vector<double> all;
  for (const auto& part : {train, test})
    for (std::size_t i = 0; i < part.size(); ++i) {
      all.push_back(part.X(i, 0));
      all.push_back(part.X(i, 1));
    }
  std::vector<double> orig(ds.X.data);
  std::sort(all.begin(), all.end());
  std::sort(orig.begin(), orig.end());
  CHECK(all == orig);

  const Dataset small = gen_disk(400, 0.2, 11);
  CHECK(split(small, {0.03, 1}).first.size() == 12);

  CHECK_THROWS_AS(split(small, {0.0001, 1}), Error);
  CHECK_THROWS_AS(split(small, {1.0, 1}), Error);
}
