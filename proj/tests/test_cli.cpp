#include "bdl/io.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <regex>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string output;
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(BDL_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

int count_lines(const std::string& s) {
  int lines = 0;
  for (char c : s) lines += c == '\n';
  return lines;
}

// Synthetic corpus and a trained model shared by the CLI tests.
struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / "bdl_cli_tests";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const Run synth = run_cli("synth --out-dir " + dir.string() +
                              " --classes 3 --per-class 16 --seed 4");
    REQUIRE(synth.status == 0);
    const Run train = run_cli("train --train-x " + path("train_x.bin") + " --labels " +
                              path("train_labels.txt") + " --model " + path("model.bdl") +
                              " --trace " + path("trace.tsv") + " --seed 9 --iters 6");
    REQUIRE_MESSAGE(train.status == 0, train.output);
    train_output = train.output;
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  std::string train_output;
};

Workspace& workspace() {
  static Workspace ws;
  return ws;
}

}  // namespace

TEST_CASE("train writes a loadable model and reports its summary") {
  Workspace& ws = workspace();
  const bdl::LearnedModel model = bdl::load_model(ws.path("model.bdl"));
  CHECK(model.num_atoms() > 0);
  CHECK(model.num_classes() == 3);
  CHECK(std::regex_search(ws.train_output, std::regex("atoms=" + std::to_string(model.num_atoms()) + "\n")));
  CHECK(std::regex_search(ws.train_output, std::regex("reconstruction_error=[0-9.e+-]+\n")));
  CHECK(std::regex_search(ws.train_output, std::regex("wall_time_s=[0-9.e+-]+\n")));
  std::istringstream trace(bdl::read_file(ws.path("trace.tsv")));
  std::string header;
  std::getline(trace, header);
  CHECK(header == "iteration\tatoms\tfrobenius_error\tlambda_eps\tlambda_s_1\tlambda_s_2\tlambda_s_3");
  CHECK(count_lines(bdl::read_file(ws.path("trace.tsv"))) == 7);
}

TEST_CASE("training twice with the same seed writes identical model files") {
  Workspace& ws = workspace();
  const Run again = run_cli("train --train-x " + ws.path("train_x.bin") + " --labels " +
                            ws.path("train_labels.txt") + " --model " + ws.path("again.bdl") +
                            " --seed 9 --iters 6");
  REQUIRE(again.status == 0);
  CHECK(bdl::read_file(ws.path("again.bdl")) == bdl::read_file(ws.path("model.bdl")));
}

TEST_CASE("thread cap does not change the model") {
  Workspace& ws = workspace();
  const Run threaded = run_cli("train --train-x " + ws.path("train_x.bin") + " --labels " +
                               ws.path("train_labels.txt") + " --model " +
                               ws.path("threaded.bdl") + " --seed 9 --iters 6");
  const std::string cmd = "BDL_THREADS=4 " + std::string(BDL_CLI_PATH) + " train --train-x " +
                          ws.path("train_x.bin") + " --labels " + ws.path("train_labels.txt") +
                          " --model " + ws.path("threaded4.bdl") +
                          " --seed 9 --iters 6 > /dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  REQUIRE(threaded.status == 0);
  CHECK(bdl::read_file(ws.path("threaded4.bdl")) == bdl::read_file(ws.path("threaded.bdl")));
}

TEST_CASE("missing labels is a usage error naming the flag") {
  Workspace& ws = workspace();
  const Run r = run_cli("train --train-x " + ws.path("train_x.bin") + " --model " +
                        ws.path("x.bdl"));
  CHECK(r.status == 2);
  CHECK(r.output.find("--labels") != std::string::npos);
}

TEST_CASE("classify prints one label per test column") {
  Workspace& ws = workspace();
  const Run r = run_cli("classify --test-x " + ws.path("test_x.bin") + " --model " +
                        ws.path("model.bdl"));
  REQUIRE(r.status == 0);
  CHECK(count_lines(r.output) == bdl::load_matrix(ws.path("test_x.bin")).cols());
  CHECK(std::regex_match(r.output, std::regex("([123]\n)+")));
}

TEST_CASE("eval prints accuracy and latency lines") {
  Workspace& ws = workspace();
  const Run r = run_cli("eval --test-x " + ws.path("test_x.bin") + " --labels " +
                        ws.path("test_labels.txt") + " --model " + ws.path("model.bdl"));
  REQUIRE(r.status == 0);
  std::smatch m;
  REQUIRE(std::regex_search(r.output, m, std::regex("(^|\n)accuracy=([0-9.]+)%\n")));
  const double acc = std::stod(m[2].str());
  CHECK(acc >= 0.0);
  CHECK(acc <= 100.0);
  CHECK(std::regex_search(r.output, std::regex("(^|\n)latency_ms=[0-9.e+-]+\n")));
}

TEST_CASE("eval on an empty test set is a data error") {
  Workspace& ws = workspace();
  bdl::save_matrix(ws.path("empty.txt"), bdl::Matrix(32, 0));
  bdl::save_labels(ws.path("empty_labels.txt"), {});
  const Run r = run_cli("eval --test-x " + ws.path("empty.txt") + " --labels " +
                        ws.path("empty_labels.txt") + " --model " + ws.path("model.bdl"));
  CHECK(r.status == 3);
}

TEST_CASE("eval with mismatched feature dimension is a data error") {
  Workspace& ws = workspace();
  bdl::save_matrix(ws.path("narrow.txt"), bdl::Matrix::Ones(5, 2));
  bdl::save_labels(ws.path("narrow_labels.txt"), {1, 2});
  const Run r = run_cli("eval --test-x " + ws.path("narrow.txt") + " --labels " +
                        ws.path("narrow_labels.txt") + " --model " + ws.path("model.bdl"));
  CHECK(r.status == 3);
  CHECK(r.output.find("DimensionMismatch") != std::string::npos);
}

TEST_CASE("inspect-pi prints one probability per atom") {
  Workspace& ws = workspace();
  const bdl::LearnedModel model = bdl::load_model(ws.path("model.bdl"));
  const Run r = run_cli("inspect-pi --model " + ws.path("model.bdl") + " --class 1");
  REQUIRE(r.status == 0);
  std::istringstream in(r.output);
  std::string line;
  std::getline(in, line);
  CHECK(line == "atom\tprob");
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    int atom = 0;
    double prob = -1.0;
    fields >> atom >> prob;
    CHECK(atom == rows + 1);
    CHECK(prob >= 0.0);
    CHECK(prob <= 1.0);
    CHECK(prob == doctest::Approx(model.pi(0, rows)).epsilon(1e-5));
    ++rows;
  }
  CHECK(rows == model.num_atoms());
}

TEST_CASE("inspect-pi rejects a class outside the model") {
  Workspace& ws = workspace();
  const Run r = run_cli("inspect-pi --model " + ws.path("model.bdl") + " --class 4");
  CHECK(r.status == 2);
  CHECK(r.output.find("ClassOutOfRange") != std::string::npos);
}

TEST_CASE("invalid overrides and unreadable inputs") {
  Workspace& ws = workspace();
  const std::string base = "train --train-x " + ws.path("train_x.bin") + " --labels " +
                           ws.path("train_labels.txt") + " --model " + ws.path("bad.bdl");
  CHECK(run_cli(base + " --a0 -1").status == 2);
  CHECK(run_cli(base + " --a0 8").status == 2);
  CHECK(run_cli(base + " --iters abc").status == 2);
  CHECK(run_cli("train --train-x " + ws.path("nope.bin") + " --labels " +
                ws.path("train_labels.txt") + " --model " + ws.path("bad.bdl"))
            .status == 3);
  CHECK(run_cli("eval --test-x " + ws.path("test_x.bin") + " --labels " +
                ws.path("test_labels.txt") + " --model " + ws.path("train_labels.txt"))
            .status == 3);
  CHECK(run_cli("").status == 2);
  CHECK(run_cli("frobnicate").status == 2);
}

TEST_CASE("project writes a seeded projection") {
  Workspace& ws = workspace();
  REQUIRE(run_cli("project --input " + ws.path("train_x.bin") + " --output " +
                  ws.path("p.bin") + " --dim 8 --seed 3")
              .status == 0);
  const bdl::Matrix p = bdl::load_matrix(ws.path("p.bin"));
  CHECK(p.rows() == 8);
  CHECK(p.cols() == bdl::load_matrix(ws.path("train_x.bin")).cols());
}

TEST_CASE("noiseless fixture is classified almost perfectly on its training set") {
  Workspace& ws = workspace();
  const std::string dir = ws.path("clean");
  REQUIRE(run_cli("synth --out-dir " + dir + " --noise 0 --seed 2").status == 0);
  const Run train = run_cli("train --train-x " + dir + "/train_x.bin --labels " + dir +
                            "/train_labels.txt --model " + dir + "/model.bdl --seed 2");
  REQUIRE_MESSAGE(train.status == 0, train.output);
  const Run r = run_cli("eval --test-x " + dir + "/train_x.bin --labels " + dir +
                        "/train_labels.txt --model " + dir + "/model.bdl");
  REQUIRE(r.status == 0);
  std::smatch m;
  REQUIRE(std::regex_search(r.output, m, std::regex("accuracy=([0-9.]+)%")));
  CHECK(std::stod(m[1].str()) >= 99.0);
}
