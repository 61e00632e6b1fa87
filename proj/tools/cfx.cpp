// cfx: command-line front end. Loads a model and one or more inputs, computes
// counterfactual explanations, and emits machine-readable JSON reports.
//
// Exit codes: 0 success, 2 no counterfactual exists or was found for the
// requested target (a structured reason is still emitted), 3 invalid input
// (bad flags, unparseable files, dimension mismatches).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cfx/blackbox.hpp"
#include "cfx/engine.hpp"
#include "cfx/model_io.hpp"

namespace {

using cfx::Vec;

// all numerics go out with 17 significant digits so a report re-parsed as
// doubles is bit-identical to what the engine computed
std::string fmt17(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  return out;
}

std::string json_vec(const Vec& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += fmt17(v[i]);
  }
  return out + "]";
}

std::string json_diagnostics(const cfx::ProgramSolution& d) {
  std::ostringstream ss;
  ss << "{\"status\":\"" << cfx::to_string(d.status) << "\""
     << ",\"iterations\":" << d.iterations
     << ",\"objective\":" << fmt17(d.objective)
     << ",\"max_violation\":" << fmt17(d.max_violation)
     << ",\"stationarity\":" << fmt17(d.stationarity)
     << ",\"complementarity\":" << fmt17(d.complementarity)
     << ",\"gap\":" << fmt17(d.gap) << "}";
  return ss.str();
}

std::string success_record(const cfx::CounterfactualReport& r) {
  std::ostringstream ss;
  ss << "{\"counterfactual\":" << json_vec(r.point)
     << ",\"deltas\":" << json_vec(r.deltas)
     << ",\"regularization_value\":" << fmt17(r.reg_value)
     << ",\"achieved_prediction\":" << fmt17(r.achieved)
     << ",\"method\":\"" << r.method << "\""
     << ",\"diagnostics\":" << json_diagnostics(r.diagnostics) << "}";
  return ss.str();
}

std::string failure_record(const std::string& reason, const std::string& detail,
                           const cfx::CounterfactualReport* r) {
  std::ostringstream ss;
  ss << "{\"reason\":\"" << json_escape(reason) << "\"";
  if (!detail.empty()) ss << ",\"message\":\"" << json_escape(detail) << "\"";
  if (r) {
    ss << ",\"method\":\"" << r->method << "\""
       << ",\"diagnostics\":" << json_diagnostics(r->diagnostics);
  }
  ss << "}";
  return ss.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cfx::ParseError("cannot open \"" + path + "\"");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Vec parse_vector_json(const std::string& text, const char* what) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw cfx::ParseError(std::string(what) + ": " + e.what());
  }
  if (!doc.is_array())
    throw cfx::ParseError(std::string(what) + ": expected a JSON array");
  Vec v;
  v.reserve(doc.size());
  for (const auto& e : doc) {
    if (!e.is_number())
      throw cfx::ParseError(std::string(what) + ": entries must be numbers");
    v.push_back(e.get<double>());
  }
  return v;
}

// --input takes either an inline JSON array or a path to a file holding one
Vec resolve_input(const std::string& arg) {
  std::size_t first = arg.find_first_not_of(" \t");
  if (first != std::string::npos && arg[first] == '[')
    return parse_vector_json(arg, "input");
  return parse_vector_json(read_file(arg), "input file");
}

std::vector<Vec> parse_csv_rows(const std::string& text) {
  std::vector<Vec> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Vec row;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      try {
        std::size_t used = 0;
        double v = std::stod(field, &used);
        while (used < field.size() &&
               (field[used] == ' ' || field[used] == '\t'))
          ++used;
        if (used != field.size()) throw std::invalid_argument(field);
        row.push_back(v);
      } catch (const std::exception&) {
        throw cfx::ParseError("csv line " + std::to_string(lineno) +
                              ": \"" + field + "\" is not a number");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw cfx::ParseError("csv line " + std::to_string(lineno) +
                            ": expected " + std::to_string(rows.front().size()) +
                            " fields, got " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Vec> csv_columns(const std::string& text) {
  std::vector<Vec> rows = parse_csv_rows(text);
  if (rows.empty()) throw cfx::EmptyDataset("csv: no data rows");
  std::vector<Vec> cols(rows.front().size());
  for (const auto& r : rows)
    for (std::size_t j = 0; j < r.size(); ++j) cols[j].push_back(r[j]);
  return cols;
}

cfx::Regularizer make_regularizer(const std::string& kind,
                                  const std::string& weights) {
  if (kind == "l2") return cfx::Regularizer::euclidean();
  if (weights == "uniform") return cfx::Regularizer::manhattan();
  if (weights.rfind("mad:", 0) == 0)
    return cfx::Regularizer::manhattan(
        cfx::mad_weights(csv_columns(read_file(weights.substr(4)))));
  if (weights.rfind("file:", 0) == 0)
    return cfx::Regularizer::manhattan(
        parse_vector_json(read_file(weights.substr(5)), "weights file"));
  throw cfx::ParseError("weights: expected uniform, mad:<path> or file:<path>");
}

struct RunOutcome {
  int code = 0;
  std::string record;
};

RunOutcome run_one(const cfx::Model& m, const cfx::CounterfactualQuery& q,
                   const std::string& method) {
  try {
    cfx::CounterfactualReport r = method == "blackbox"
                                      ? cfx::blackbox_counterfactual(m, q)
                                      : cfx::compute_counterfactual(m, q);
    if (r.found) return {0, success_record(r)};
    return {2, failure_record(r.failure, "", &r)};
  } catch (const cfx::InvalidTarget& e) {
    return {2, failure_record("InvalidTarget", e.what(), nullptr)};
  } catch (const cfx::NoSuchPrediction& e) {
    return {2, failure_record("NoSuchPrediction", e.what(), nullptr)};
  } catch (const cfx::NoPrototypeForTarget& e) {
    return {2, failure_record("NoPrototypeForTarget", e.what(), nullptr)};
  }
}

int write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream out(path);
  if (!out) {
    std::cerr << "cfx: cannot write \"" << path << "\"\n";
    return 3;
  }
  out << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"counterfactual explanations for classical ML models"};
  app.require_subcommand(0, 1);

  std::string ew_csv, ew_out;
  CLI::App* ew = app.add_subcommand(
      "estimate-weights",
      "per-feature Manhattan weights from a dataset (inverse MAD)");
  ew->add_option("csv", ew_csv, "dataset CSV, one row per sample")->required();
  ew->add_option("--output", ew_out, "write the JSON weight array here");

  std::string model_path, input_arg, batch_path, output_path;
  std::string reg_kind = "l1", weights = "uniform", method = "auto";
  double target = 0.0, margin = 0.01, tolerance = 0.0;
  app.add_option("--model", model_path, "model JSON file");
  CLI::Option* input_opt =
      app.add_option("--input", input_arg, "input vector: inline JSON array or file");
  CLI::Option* batch_opt =
      app.add_option("--batch", batch_path, "CSV of input rows; emits one report per line");
  CLI::Option* target_opt =
      app.add_option("--target", target, "requested prediction (label or value)");
  app.add_option("--regularizer", reg_kind, "closeness measure")
      ->check(CLI::IsMember({"l1", "l2"}));
  app.add_option("--weights", weights,
                 "l1 feature weights: uniform, mad:<csv>, file:<json>");
  app.add_option("--margin", margin, "strict-boundary relaxation (> 0)")
      ->capture_default_str();
  app.add_option("--tolerance", tolerance, "accepted regression deviation (>= 0)")
      ->capture_default_str();
  app.add_option("--method", method, "solver selection")
      ->check(CLI::IsMember({"auto", "blackbox"}));
  app.add_option("--output", output_path, "write reports here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  try {
    if (ew->parsed()) {
      Vec w = cfx::mad_weights(csv_columns(read_file(ew_csv)));
      return write_output(ew_out, json_vec(w) + "\n");
    }

    if (model_path.empty()) {
      std::cerr << "cfx: --model is required\n";
      return 3;
    }
    if (!*target_opt) {
      std::cerr << "cfx: --target is required\n";
      return 3;
    }
    if (static_cast<bool>(*input_opt) == static_cast<bool>(*batch_opt)) {
      std::cerr << "cfx: exactly one of --input or --batch is required\n";
      return 3;
    }

    cfx::Model m = cfx::load_model_file(model_path);
    cfx::CounterfactualQuery q;
    q.target = target;
    q.reg = make_regularizer(reg_kind, weights);
    q.margin = margin;
    q.tol = tolerance;

    std::vector<Vec> inputs;
    if (*input_opt)
      inputs.push_back(resolve_input(input_arg));
    else
      inputs = parse_csv_rows(read_file(batch_path));
    if (inputs.empty()) {
      std::cerr << "cfx: no input rows\n";
      return 3;
    }
    for (const auto& row : inputs)
      if (row.size() != m.dimension)
        throw cfx::DimensionMismatch(
            "input has " + std::to_string(row.size()) + " features, model wants " +
            std::to_string(m.dimension));

    // rows are independent; reports are emitted in input order
    int worst = 0;
    std::string out;
    for (const auto& row : inputs) {
      q.x = row;
      RunOutcome one = run_one(m, q, method);
      worst = std::max(worst, one.code);
      out += one.record;
      out += "\n";
    }
    int wc = write_output(output_path, out);
    return wc ? wc : worst;
  } catch (const cfx::Error& e) {
    std::cerr << "cfx: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "cfx: " << e.what() << "\n";
    return 3;
  }
}
