// End-to-end checks of the command-line surface. Each test shells out to the
// built binary (path injected by CMake) inside a scratch directory.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "clearn/data.hpp"
#include "clearn/model_io.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = CLEARN_CLI_PATH;

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() /
          ("clearn_cli_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter()++));
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  return std::system(cmd.c_str());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("simulate writes deterministic CSV files") {
  Scratch sc;
  const std::string a = sc.path("a.csv");
  const std::string b = sc.path("b.csv");
  REQUIRE(run("simulate --kind disk --n 100 --seed 7 --out " + a) == 0);
  REQUIRE(run("simulate --kind disk --n 100 --seed 7 --out " + b) == 0);
  CHECK(line_count(read_file(a)) == 101);  // header + rows
  CHECK(read_file(a) == read_file(b));
  REQUIRE(run("simulate --kind sine --n 50 --seed 1 --out " + sc.path("s.csv")) == 0);
  CHECK(run("simulate --kind blob --n 10 --seed 1 --out " + sc.path("x.csv")) != 0);
}

TEST_CASE("train, predict, calibrate round trip") {
  Scratch sc;
  const std::string data = sc.path("train.csv");
  REQUIRE(run("simulate --kind disk --n 120 --seed 3 --out " + data) == 0);

  SUBCASE("single gamma equals direct fit; model reloads bitwise") {
    const std::string model = sc.path("m.json");
    REQUIRE(run("train --data " + data + " --expansion kernel --gamma 0.1 --model-out " +
                model) == 0);
    const std::string p1 = sc.path("p1.csv");
    const std::string p2 = sc.path("p2.csv");
    REQUIRE(run("predict --model " + model + " --data " + data + " --out " + p1) == 0);
    REQUIRE(run("predict --model " + model + " --data " + data + " --out " + p2) == 0);
    CHECK(read_file(p1) == read_file(p2));
    CHECK(line_count(read_file(p1)) == 121);
  }

  SUBCASE("huge gamma with omega 1 zeroes every coefficient") {
    const std::string model = sc.path("zero.json");
    REQUIRE(run("train --data " + data +
                " --expansion kernel --gamma 1e6 --omega 1 --model-out " + model) == 0);
    const clearn::ModelFile mf = clearn::load_model(model);
    const auto& km = std::get<clearn::KernelModel>(mf.model);
    for (double b : km.beta) CHECK(b == 0.0);
  }

  SUBCASE("probability column is sign-consistent") {
    const std::string model = sc.path("m2.json");
    REQUIRE(run("train --data " + data +
                " --expansion kernel --gamma 0.1,0.3 --cv-folds 3 --model-out " + model) ==
            0);
    const std::string pred = sc.path("pred.csv");
    REQUIRE(run("predict --model " + model + " --data " + data +
                " --out " + pred + " --with-probability crho") == 0);
    std::ifstream in(pred);
    std::string line;
    std::getline(in, line);
    CHECK(line == "score,label,prob");
    while (std::getline(in, line)) {
      const auto c1 = line.find(','), c2 = line.rfind(',');
      const double score = std::stod(line.substr(0, c1));
      const int label = std::stoi(line.substr(c1 + 1, c2 - c1 - 1));
      const double prob = std::stod(line.substr(c2 + 1));
      CHECK(prob > 0.0);
      CHECK(prob < 1.0);
      CHECK((prob > 0.5) == (label == 1));
      CHECK((score > 0.0) == (label == 1));
    }
  }

  SUBCASE("svm objective trains and calibrates") {
    const std::string model = sc.path("svm.json");
    REQUIRE(run("train --data " + data +
                " --expansion kernel --objective svm --gamma 0.1 --model-out " + model) ==
            0);
    const std::string cal = sc.path("cal.json");
    REQUIRE(run("calibrate --model " + model + " --data " + data + " --out " + cal) == 0);
    const auto j = nlohmann::json::parse(read_file(cal));
    const double rho = j.at("rho_hat").get<double>();
    CHECK(rho >= 1e-3);
    CHECK(rho <= 1e2);
    CHECK(j.at("ekl").get<double>() >= 0.0);
  }

  SUBCASE("linear expansion") {
    const std::string model = sc.path("lin.json");
    REQUIRE(run("train --data " + data + " --expansion linear --gamma 0.05 --model-out " +
                model) == 0);
    const std::string pred = sc.path("linpred.csv");
    REQUIRE(run("predict --model " + model + " --data " + data + " --out " + pred) == 0);
    CHECK(line_count(read_file(pred)) == 121);
  }
}

TEST_CASE("calibrate rejects single-class data") {
  Scratch sc;
  const std::string data = sc.path("train.csv");
  REQUIRE(run("simulate --kind disk --n 60 --seed 5 --out " + data) == 0);
  const std::string model = sc.path("m.json");
  REQUIRE(run("train --data " + data + " --expansion kernel --gamma 0.1 --model-out " +
              model) == 0);

  // rewrite the CSV with all labels positive
  clearn::Dataset ds = clearn::load_csv(data);
  for (auto& y : ds.y) y = 1;
  const std::string bad = sc.path("bad.csv");
  clearn::save_csv(ds, bad);
  const std::string cmd =
      kCli + " calibrate --model " + model + " --data " + bad + " --out " +
      sc.path("out.json") + " 2> " + sc.path("err.txt");
  CHECK(std::system(cmd.c_str()) != 0);
  CHECK(read_file(sc.path("err.txt")).find("error: calibration-error") !=
        std::string::npos);
}

TEST_CASE("replicate emits consistent files") {
  Scratch sc;
  const std::string protocol = sc.path("protocol.json");
  {
    std::ofstream out(protocol);
    out << R"({
      "name": "smoke",
      "generator": {"kind": "disk", "n": 80},
      "train_fraction": 0.5,
      "cv_folds": 2,
      "methods": [
        {"name": "cl", "kind": "clearning", "gamma_grid": [0.1]}
      ]
    })";
  }
  REQUIRE(run("replicate --protocol " + protocol + " --n-reps 2 --base-seed 11 --out-dir " +
              sc.path("out")) == 0);
  const std::string summary = read_file(sc.path("out/smoke_summary.json"));
  const std::string per_rep = read_file(sc.path("out/smoke_per_rep.csv"));
  REQUIRE(!summary.empty());
  REQUIRE(line_count(per_rep) == 3);

  // summary mean equals the mean of the per-rep column
  const auto js = nlohmann::json::parse(summary);
  double cer_mean = -1.0;
  for (const auto& row : js)
    if (row.at("method") == "cl" && row.at("metric") == "cer")
      cer_mean = row.at("mean").get<double>();
  REQUIRE(cer_mean >= 0.0);

  std::istringstream in(per_rep);
  std::string header, l1, l2;
  std::getline(in, header);
  std::getline(in, l1);
  std::getline(in, l2);
  int col = 0;
  std::istringstream hs(header);
  std::string name;
  int cer_col = -1;
  while (std::getline(hs, name, ',')) {
    if (name == "cl.cer") cer_col = col;
    ++col;
  }
  REQUIRE(cer_col >= 0);
  auto nth = [&](const std::string& line, int k) {
    std::istringstream ls(line);
    std::string field;
    for (int i = 0; i <= k; ++i) std::getline(ls, field, ',');
    return std::stod(field);
  };
  CHECK(cer_mean == doctest::Approx(0.5 * (nth(l1, cer_col) + nth(l2, cer_col)))
                        .epsilon(1e-12));

  // determinism across runs
  REQUIRE(run("replicate --protocol " + protocol + " --n-reps 2 --base-seed 11 --out-dir " +
              sc.path("out2")) == 0);
  CHECK(read_file(sc.path("out2/smoke_summary.json")) == summary);
}
