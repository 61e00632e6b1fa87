#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfx/model_io.hpp"

namespace {

using cfx::Vec;
using nlohmann::json;

std::string cli_path() {
  const char* p = std::getenv("CFX_CLI");
  return p ? p : "";
}

std::string data_dir() {
  const char* p = std::getenv("CFX_DATA");
  return p ? p : "";
}

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  std::string cmd = "\"" + cli_path() + "\" " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  int status = pclose(pipe);
  RunResult r;
  r.out = std::move(out);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() /
             ("cfx_cli_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

std::string write_scratch(const std::string& name, const std::string& text) {
  auto path = scratch_dir() / name;
  std::ofstream(path) << text;
  return path.string();
}

std::string model(const std::string& name) {
  return data_dir() + "/" + name + ".json";
}

Vec parse_vec(const json& arr) {
  Vec v;
  for (const auto& e : arr) v.push_back(e.get<double>());
  return v;
}

}  // namespace

TEST_CASE("separating hyperplane end to end") {
  REQUIRE_FALSE(cli_path().empty());
  RunResult r = run_cli("--model " + model("hyperplane") +
                        " --input \"[-2,0]\" --target 1 --regularizer l2");
  REQUIRE(r.code == 0);
  json doc = json::parse(r.out);
  REQUIRE(doc.contains("counterfactual"));
  REQUIRE(doc.contains("deltas"));
  REQUIRE(doc.contains("regularization_value"));
  REQUIRE(doc.contains("achieved_prediction"));
  REQUIRE(doc.contains("diagnostics"));
  Vec cf = parse_vec(doc["counterfactual"]);
  REQUIRE(cf.size() == 2);
  CHECK(cf[0] == Catch::Approx(0.01).margin(1e-9));
  CHECK(cf[1] == Catch::Approx(0.0).margin(1e-9));
  CHECK(doc["method"] == "qp");
  CHECK(doc["achieved_prediction"].get<double>() == 1.0);
  CHECK(doc["regularization_value"].get<double>() ==
        Catch::Approx(2.01 * 2.01).margin(1e-6));
  Vec deltas = parse_vec(doc["deltas"]);
  CHECK(deltas[0] == Catch::Approx(2.01).margin(1e-9));
}

TEST_CASE("emitted counterfactual reproduces the prediction exactly") {
  // serialization keeps 17 significant digits, so the report re-fed through
  // the model must give back achieved_prediction bit for bit
  for (const char* family :
       {"hyperplane", "softmax", "gnb", "qda", "lvq", "linear"}) {
    std::string name = family;
    RunResult r = run_cli("--model " + model(name) +
                          " --input \"[-2,0]\" --target 1 --regularizer l2" +
                          (name == "linear" ? " --tolerance 0.25" : ""));
    INFO(name);
    REQUIRE(r.code == 0);
    json doc = json::parse(r.out);
    Vec cf = parse_vec(doc["counterfactual"]);
    cfx::Model m = cfx::load_model_file(model(name));
    CHECK(cfx::predict(m, cf) == doc["achieved_prediction"].get<double>());
  }
}

TEST_CASE("tree without a leaf for the target exits 2 with a reason") {
  RunResult r = run_cli("--model " + model("tree") +
                        " --input \"[0,0]\" --target 7");
  REQUIRE(r.code == 2);
  json doc = json::parse(r.out);
  CHECK(doc["reason"] == "NoSuchPrediction");
}

TEST_CASE("label outside the model exits 2 with a reason") {
  RunResult r = run_cli("--model " + model("hyperplane") +
                        " --input \"[-2,0]\" --target 5");
  REQUIRE(r.code == 2);
  json doc = json::parse(r.out);
  CHECK(doc["reason"] == "InvalidTarget");
}

TEST_CASE("input with the wrong dimension exits 3") {
  RunResult r = run_cli("--model " + model("hyperplane") +
                        " --input \"[1,2,3]\" --target 1");
  CHECK(r.code == 3);
  CHECK(r.out.empty());
}

TEST_CASE("usage and parse failures exit 3") {
  CHECK(run_cli("--input \"[0,0]\" --target 1").code == 3);  // no model
  CHECK(run_cli("--model " + model("hyperplane") + " --input \"[0,0]\"").code ==
        3);  // no target
  CHECK(run_cli("--model " + model("hyperplane") + " --target 1").code ==
        3);  // neither input nor batch
  std::string batch = write_scratch("rows.csv", "-2,0\n");
  CHECK(run_cli("--model " + model("hyperplane") + " --input \"[0,0]\" --batch " +
                batch + " --target 1")
            .code == 3);  // both
  CHECK(run_cli("--model " + model("hyperplane") +
                " --input \"[0,0]\" --target 1 --regularizer l3")
            .code == 3);
  CHECK(run_cli("--model /nonexistent.json --input \"[0,0]\" --target 1").code ==
        3);
  std::string bad = write_scratch("bad.json", "{\"family\":");
  CHECK(run_cli("--model " + bad + " --input \"[0,0]\" --target 1").code == 3);
  CHECK(run_cli("--model " + model("hyperplane") +
                " --input \"[1,\" --target 1")
            .code == 3);
  CHECK(run_cli("--model " + model("hyperplane") +
                " --input \"[0,0]\" --target 1 --weights bogus")
            .code == 3);
  CHECK(run_cli("--model " + model("hyperplane") +
                " --input \"[0,0]\" --target 1 --margin 0")
            .code == 3);
}

TEST_CASE("batch mode emits one record per row in input order") {
  std::string batch = write_scratch("batch.csv", "-2,0\n5,0\n-3,1\n");
  RunResult r = run_cli("--model " + model("hyperplane") + " --batch " + batch +
                        " --target 1 --regularizer l2");
  REQUIRE(r.code == 0);
  std::vector<json> records;
  std::istringstream lines(r.out);
  std::string line;
  while (std::getline(lines, line))
    if (!line.empty()) records.push_back(json::parse(line));
  REQUIRE(records.size() == 3);
  CHECK(parse_vec(records[0]["counterfactual"])[0] ==
        Catch::Approx(0.01).margin(1e-9));
  // row 2 is already on the requested side: unchanged, zero deltas
  Vec cf1 = parse_vec(records[1]["counterfactual"]);
  CHECK(cf1[0] == 5.0);
  CHECK(cf1[1] == 0.0);
  CHECK(records[1]["regularization_value"].get<double>() == 0.0);
  Vec cf2 = parse_vec(records[2]["counterfactual"]);
  CHECK(cf2[0] == Catch::Approx(0.01).margin(1e-9));
  CHECK(cf2[1] == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("batch with an unmet row keeps order and exits 2") {
  std::string batch = write_scratch("batch2.csv", "0,0\n1,1\n");
  RunResult r = run_cli("--model " + model("tree") + " --batch " + batch +
                        " --target 7");
  REQUIRE(r.code == 2);
  std::vector<json> records;
  std::istringstream lines(r.out);
  std::string line;
  while (std::getline(lines, line))
    if (!line.empty()) records.push_back(json::parse(line));
  REQUIRE(records.size() == 2);
  CHECK(records[0]["reason"] == "NoSuchPrediction");
  CHECK(records[1]["reason"] == "NoSuchPrediction");
}

TEST_CASE("estimate-weights matches the inverse MAD rule") {
  std::string csv = write_scratch("col.csv", "1\n2\n3\n4\n5\n");
  RunResult r = run_cli("estimate-weights " + csv);
  REQUIRE(r.code == 0);
  json w = json::parse(r.out);
  REQUIRE(w.size() == 1);
  CHECK(w[0].get<double>() == 1.0);

  std::string cst = write_scratch("const.csv", "7\n7\n7\n");
  RunResult rc = run_cli("estimate-weights " + cst);
  REQUIRE(rc.code == 0);
  json wc = json::parse(rc.out);
  CHECK(wc[0].get<double>() == 1e9);

  std::string empty = write_scratch("empty.csv", "");
  CHECK(run_cli("estimate-weights " + empty).code == 3);
}

TEST_CASE("weight files steer the manhattan objective") {
  std::string wfile = write_scratch("w.json", "[2,1]");
  RunResult r = run_cli("--model " + model("hyperplane") +
                        " --input \"[-2,0]\" --target 1 --weights file:" + wfile);
  REQUIRE(r.code == 0);
  json doc = json::parse(r.out);
  CHECK(doc["method"] == "lp");
  CHECK(doc["regularization_value"].get<double>() ==
        Catch::Approx(2 * 2.01).margin(1e-6));

  std::string csv = write_scratch("scale.csv", "0,5\n10,5\n20,5\n30,5\n");
  RunResult rm = run_cli("--model " + model("hyperplane") +
                         " --input \"[-2,0]\" --target 1 --weights mad:" + csv);
  REQUIRE(rm.code == 0);
  json dm = json::parse(rm.out);
  // feature 0 has MAD 10 so moving it costs a tenth of the unweighted run
  CHECK(dm["regularization_value"].get<double>() ==
        Catch::Approx(0.201).margin(1e-6));
}

TEST_CASE("blackbox method flag reaches the requested side") {
  RunResult r = run_cli("--model " + model("hyperplane") +
                        " --input \"[-2,0]\" --target 1 --regularizer l2" +
                        " --method blackbox");
  REQUIRE(r.code == 0);
  json doc = json::parse(r.out);
  CHECK(doc["method"] == "blackbox");
  CHECK(doc["achieved_prediction"].get<double>() == 1.0);
  CHECK(parse_vec(doc["counterfactual"])[0] >= 0.01 - 1e-12);
}

TEST_CASE("reports can go to a file and inputs can come from one") {
  std::string in = write_scratch("input.json", "[-2,0]");
  std::string out = (scratch_dir() / "report.json").string();
  RunResult r = run_cli("--model " + model("hyperplane") + " --input " + in +
                        " --target 1 --regularizer l2 --output " + out);
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream f(out);
  REQUIRE(f.good());
  json doc = json::parse(f);
  CHECK(parse_vec(doc["counterfactual"])[0] == Catch::Approx(0.01).margin(1e-9));
}
