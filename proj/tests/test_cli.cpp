#include <doctest.h>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "attrmtl/dataio.hpp"
#include "attrmtl/matrix.hpp"
#include "cli.hpp"
#include "helpers.hpp"

namespace {

// The suite drives the CLI in-process; stderr is swapped out so config echo
// lines can be asserted on.
struct CaptureCerr {
  std::ostringstream ss;
  std::streambuf* old;
  CaptureCerr() : old(std::cerr.rdbuf(ss.rdbuf())) {}
  ~CaptureCerr() { std::cerr.rdbuf(old); }
  std::string text() const { return ss.str(); }
};

int run_quiet(const std::vector<std::string>& args, std::string* err_text = nullptr) {
  CaptureCerr cap;
  const int code = attrmtl::cli::run(args);
  if (err_text) *err_text = cap.text();
  return code;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// One shared synthetic corpus for the pipeline tests.
struct Corpus {
  testutil::TempDir dir{"cli"};
  std::string data;

  Corpus() {
    data = (dir / "data").string();
    const int code = run_quiet({"synth", "--d", "10", "--m", "4", "--groups", "2",
                                "--n-per-task", "40", "--n-test", "50", "--seed", "3",
                                "--out-dir", data});
    REQUIRE(code == 0);
  }

  std::vector<std::string> train_args(const std::string& model_out) const {
    return {"train",       "--data-dir",  data + "/train",
            "--groups",    data + "/groups.txt",
            "--latent-k",  "4",           "--outer-max", "6",
            "--inner-max", "150",         "--out",       model_out};
  }
};

Corpus& corpus() {
  static Corpus c;
  return c;
}

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run_quiet({"--help"}) == 0);
  CHECK(run_quiet({}) == 1);
  CHECK(run_quiet({"train", "--bogus-flag"}) == 1);
  CHECK(run_quiet({"cv", "--data-dir", "x"}) == 1);  // --gamma-grid is required
  CHECK(run_quiet({"eval", "--model", "m", "--data-dir", "x", "--metric", "rmse"}) == 1);
}

TEST_CASE("missing inputs exit with the data code") {
  std::string err;
  CHECK(run_quiet({"train", "--data-dir", "/nonexistent/dir"}, &err) == 2);
  CHECK(run_quiet({"predict", "--model", "/nonexistent.mtlm", "--features", "x.mtlf"}) == 2);
}

TEST_CASE("synth writes the expected file layout") {
  Corpus& c = corpus();
  namespace fs = std::filesystem;
  CHECK(fs::exists(fs::path(c.data) / "groups.txt"));
  CHECK(fs::exists(fs::path(c.data) / "truth.mtlm"));
  for (const char* name : {"task0", "task1", "task2", "task3"}) {
    CHECK(fs::exists(fs::path(c.data) / "train" / (std::string(name) + ".features.mtlf")));
    CHECK(fs::exists(fs::path(c.data) / "train" / (std::string(name) + ".labels.csv")));
    CHECK(fs::exists(fs::path(c.data) / "test" / (std::string(name) + ".labels.csv")));
  }
}

TEST_CASE("training echoes its configuration and writes a JSON-lines report") {
  Corpus& c = corpus();
  const std::string model = (c.dir / "m1.mtlm").string();
  const std::string report = (c.dir / "report.jsonl").string();

  auto args = c.train_args(model);
  args.push_back("--report");
  args.push_back(report);
  std::string err;
  REQUIRE(run_quiet(args, &err) == 0);

  // First stderr line carries every resolved flag.
  const std::string first = err.substr(0, err.find('\n'));
  CHECK(first.rfind("config: train ", 0) == 0);
  CHECK(first.find("mu=0.1") != std::string::npos);
  CHECK(first.find("latent-k=4(resolved=4)") != std::string::npos);
  CHECK(first.find("seed=42") != std::string::npos);

  std::ifstream in(report);
  REQUIRE(in);
  std::string line;
  double prev = 1e300;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    CHECK(j["iter"] == lines + 1);
    for (const char* key : {"objective", "obj_after_s", "loss", "group_l21", "l1", "frobenius",
                            "s_iters", "l_iters"})
      CHECK(j.contains(key));
    CHECK(double(j["objective"]) <= prev + 1e-6);  // S steps may slip by the smoothing gap
    prev = double(j["objective"]);
    ++lines;
  }
  CHECK(lines >= 1);
}

TEST_CASE("repeated invocations produce bit-identical models") {
  Corpus& c = corpus();
  const std::string m1 = (c.dir / "rep1.mtlm").string();
  const std::string m2 = (c.dir / "rep2.mtlm").string();
  REQUIRE(run_quiet(c.train_args(m1)) == 0);
  REQUIRE(run_quiet(c.train_args(m2)) == 0);
  CHECK(slurp(m1) == slurp(m2));
}

TEST_CASE("latent-k accepts the half-dimension shorthand") {
  Corpus& c = corpus();
  auto args = c.train_args((c.dir / "half.mtlm").string());
  args[args.size() - 7] = "d/2";  // replaces the value after --latent-k
  std::string err;
  REQUIRE(run_quiet(args, &err) == 0);
  CHECK(err.find("latent-k=d/2(resolved=5)") != std::string::npos);

  auto bad = c.train_args((c.dir / "bad.mtlm").string());
  bad[bad.size() - 7] = "q/2";
  CHECK(run_quiet(bad) == 1);
}

TEST_CASE("predict emits a named header and one row per sample") {
  Corpus& c = corpus();
  const std::string model = (c.dir / "m1.mtlm").string();
  const std::string out = (c.dir / "scores.csv").string();
  REQUIRE(run_quiet({"predict", "--model", model, "--features",
                     c.data + "/test/task0.features.mtlf", "--out", out}) == 0);
  std::ifstream in(out);
  std::string header;
  std::getline(in, header);
  CHECK(header == "task0,task1,task2,task3");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 50);

  CHECK(run_quiet({"predict", "--model", model, "--features",
                   c.data + "/groups.txt"}) == 2);  // not a feature file
}

TEST_CASE("eval renders text, map, and csv tables") {
  Corpus& c = corpus();
  const std::string model = (c.dir / "m1.mtlm").string();
  const std::string out = (c.dir / "eval.txt").string();
  REQUIRE(run_quiet({"eval", "--model", model, "--data-dir", c.data + "/test", "--groups",
                     c.data + "/groups.txt", "--out", out}) == 0);
  const std::string text = slurp(out);
  CHECK(text.find("Group | Attributes | Accuracy") != std::string::npos);
  CHECK(text.find("group0 | 2 | ") != std::string::npos);
  CHECK(text.find("Total | 4 | ") != std::string::npos);

  REQUIRE(run_quiet({"eval", "--model", model, "--data-dir", c.data + "/test", "--groups",
                     c.data + "/groups.txt", "--metric", "map", "--out", out}) == 0);
  CHECK(slurp(out).find("Group | Attributes | mAP") != std::string::npos);

  REQUIRE(run_quiet({"eval", "--model", model, "--data-dir", c.data + "/test", "--groups",
                     c.data + "/groups.txt", "--metric", "both", "--csv", "--out", out}) == 0);
  const std::string csv = slurp(out);
  CHECK(csv.find("kind,name,attributes,Accuracy") != std::string::npos);
  CHECK(csv.find("kind,name,attributes,mAP") != std::string::npos);
  CHECK(csv.find("attribute,task0,1,") != std::string::npos);
}

TEST_CASE("eval matches model columns to tasks by name") {
  Corpus& c = corpus();
  // A second corpus with an extra task the model never saw.
  testutil::TempDir dir2("cli_extra");
  const std::string other = (dir2 / "data").string();
  REQUIRE(run_quiet({"synth", "--d", "10", "--m", "5", "--groups", "2", "--n-per-task", "20",
                     "--n-test", "20", "--out-dir", other}) == 0);
  std::string err;
  CHECK(run_quiet({"eval", "--model", (c.dir / "m1.mtlm").string(), "--data-dir",
                   other + "/test", "--groups", other + "/groups.txt"},
                  &err) == 2);
  CHECK(err.find("model has no task named 'task4'") != std::string::npos);
}

TEST_CASE("baselines train through the same data plumbing") {
  Corpus& c = corpus();
  for (const std::string method : {"lasso", "l21", "ridge"}) {
    const std::string out = (c.dir / ("bl_" + method + ".mtlm")).string();
    REQUIRE(run_quiet({"baseline", method, "--data-dir", c.data + "/train", "--out", out}) == 0);
    attrmtl::LatentModel m = attrmtl::load_model(out);
    CHECK(m.s == attrmtl::Matrix::identity(4));
    CHECK(m.task_names.size() == 4);
  }
}

TEST_CASE("cross validation prints its table and the winning cell") {
  Corpus& c = corpus();
  const std::string out = (c.dir / "cv.txt").string();
  REQUIRE(run_quiet({"cv", "--data-dir", c.data + "/train", "--groups", c.data + "/groups.txt",
                     "--method", "lasso", "--gamma-grid", "0.03125,0.25", "--folds", "2",
                     "--inner-max", "150", "--out", out}) == 0);
  const std::string text = slurp(out);
  CHECK(text.find("mu=0 gamma=0.03125 mean_accuracy=") != std::string::npos);
  CHECK(text.find("mu=0 gamma=0.25 mean_accuracy=") != std::string::npos);
  CHECK(text.find("best: mu=0 gamma=") != std::string::npos);
}
