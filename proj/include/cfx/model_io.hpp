#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfx/model.hpp"

namespace cfx {

namespace detail {

using nlohmann::json;

inline const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end())
    throw ParseError(std::string("model: missing field \"") + key + "\"");
  return *it;
}

inline double as_number(const json& j, const char* what) {
  if (!j.is_number())
    throw ParseError(std::string("model: ") + what + " must be a number");
  return j.get<double>();
}

inline Vec as_vec(const json& j, const char* what) {
  if (!j.is_array())
    throw ParseError(std::string("model: ") + what + " must be an array");
  Vec v;
  v.reserve(j.size());
  for (const auto& e : j) v.push_back(as_number(e, what));
  return v;
}

inline Mat as_mat(const json& j, const char* what) {
  if (!j.is_array() || j.empty())
    throw ParseError(std::string("model: ") + what +
                     " must be a non-empty array of rows");
  std::size_t rows = j.size();
  Vec first = as_vec(j[0], what);
  std::size_t cols = first.size();
  Vec entries;
  entries.reserve(rows * cols);
  entries.insert(entries.end(), first.begin(), first.end());
  for (std::size_t r = 1; r < rows; ++r) {
    Vec row = as_vec(j[r], what);
    if (row.size() != cols)
      throw ParseError(std::string("model: ") + what + " rows differ in size");
    entries.insert(entries.end(), row.begin(), row.end());
  }
  return Mat(rows, cols, std::move(entries));
}

inline std::vector<Vec> as_vec_list(const json& j, const char* what) {
  if (!j.is_array())
    throw ParseError(std::string("model: ") + what + " must be an array");
  std::vector<Vec> out;
  for (const auto& e : j) out.push_back(as_vec(e, what));
  return out;
}

inline int parse_tree_node(const json& j, TreeModel& t) {
  if (!j.is_object()) throw ParseError("model: tree node must be an object");
  int idx = static_cast<int>(t.nodes.size());
  if (j.contains("leaf")) {
    TreeNode n;
    n.is_leaf = true;
    n.value = as_number(j["leaf"], "leaf");
    t.nodes.push_back(n);
    return idx;
  }
  TreeNode n;
  n.is_leaf = false;
  double f = as_number(field(j, "feature"), "feature");
  if (f < 0.0 || f != std::floor(f))
    throw ParseError("model: feature must be a non-negative integer");
  n.feature = static_cast<std::size_t>(f);
  n.threshold = as_number(field(j, "threshold"), "threshold");
  t.nodes.push_back(n);
  int l = parse_tree_node(field(j, "left"), t);
  int r = parse_tree_node(field(j, "right"), t);
  t.nodes[static_cast<std::size_t>(idx)].left = l;
  t.nodes[static_cast<std::size_t>(idx)].right = r;
  return idx;
}

inline json tree_node_json(const TreeModel& t, int idx) {
  const TreeNode& n = t.nodes[static_cast<std::size_t>(idx)];
  json j;
  if (n.is_leaf) {
    j["leaf"] = n.value;
    return j;
  }
  j["feature"] = n.feature;
  j["threshold"] = n.threshold;
  j["left"] = tree_node_json(t, n.left);
  j["right"] = tree_node_json(t, n.right);
  return j;
}

inline json mat_json(const Mat& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace detail

inline Model load_model(const std::string& text) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("model: document must be an object");

  std::string fam;
  try {
    fam = detail::field(doc, "family").get<std::string>();
  } catch (const json::exception&) {
    throw ParseError("model: family must be a string");
  }

  double dim_raw = detail::as_number(detail::field(doc, "dimension"),
                                     "dimension");
  if (dim_raw < 1.0 || dim_raw != std::floor(dim_raw))
    throw ParseError("model: dimension must be a positive integer");

  Model m;
  m.dimension = static_cast<std::size_t>(dim_raw);
  const json& p = detail::field(doc, "params");
  if (!p.is_object()) throw ParseError("model: params must be an object");

  try {
    if (fam == "hyperplane" || fam == "logistic") {
      // logistic regression with threshold 0.5 reduces to the sign rule
      HyperplaneModel h;
      h.w = detail::as_vec(detail::field(p, "w"), "w");
      h.b = detail::as_number(detail::field(p, "b"), "b");
      m.family = Family::Hyperplane;
      m.impl = std::move(h);
    } else if (fam == "softmax") {
      SoftmaxModel s;
      s.w = detail::as_vec_list(detail::field(p, "w"), "w");
      s.b = detail::as_vec(detail::field(p, "b"), "b");
      m.family = Family::Softmax;
      m.impl = std::move(s);
    } else if (fam == "linear" || fam == "poisson" || fam == "exponential") {
      GlmModel g;
      g.kind = fam == "linear" ? GlmKind::Linear
               : fam == "poisson" ? GlmKind::Poisson
                                  : GlmKind::Exponential;
      g.w = detail::as_vec(detail::field(p, "w"), "w");
      g.b = detail::as_number(detail::field(p, "b"), "b");
      m.family = fam == "linear" ? Family::Linear
                 : fam == "poisson" ? Family::Poisson
                                    : Family::Exponential;
      m.impl = std::move(g);
    } else if (fam == "gnb") {
      GnbModel g;
      g.mean = detail::as_vec_list(detail::field(p, "mean"), "mean");
      g.var = detail::as_vec_list(detail::field(p, "variance"), "variance");
      g.prior = detail::as_vec(detail::field(p, "prior"), "prior");
      m.family = Family::Gnb;
      m.impl = std::move(g);
    } else if (fam == "qda") {
      QdaModel q;
      q.mean = detail::as_vec_list(detail::field(p, "mean"), "mean");
      const json& cov = detail::field(p, "covariance");
      if (!cov.is_array())
        throw ParseError("model: covariance must be an array of matrices");
      for (const auto& c : cov) q.cov.push_back(detail::as_mat(c, "covariance"));
      q.prior = detail::as_vec(detail::field(p, "prior"), "prior");
      m.family = Family::Qda;
      m.impl = std::move(q);
    } else if (fam == "lvq") {
      LvqModel l;
      l.prototypes =
          detail::as_vec_list(detail::field(p, "prototypes"), "prototypes");
      const json& labels = detail::field(p, "labels");
      if (!labels.is_array())
        throw ParseError("model: labels must be an array");
      for (const auto& e : labels) {
        double v = detail::as_number(e, "labels");
        if (v != std::floor(v))
          throw ParseError("model: lvq labels must be integers");
        l.labels.push_back(static_cast<int>(v));
      }
      const json& metric = detail::field(p, "metric");
      if (metric.is_string() && metric.get<std::string>() == "identity") {
        l.metric = LvqMetric::Identity;
      } else if (metric.is_object() && metric.contains("global")) {
        l.metric = LvqMetric::Global;
        l.omega = detail::as_mat(metric["global"], "metric.global");
      } else if (metric.is_object() && metric.contains("per_prototype")) {
        l.metric = LvqMetric::PerPrototype;
        const json& os = metric["per_prototype"];
        if (!os.is_array())
          throw ParseError("model: per_prototype must be an array");
        for (const auto& o : os)
          l.omegas.push_back(detail::as_mat(o, "metric.per_prototype"));
      } else {
        throw ParseError("model: unknown lvq metric");
      }
      m.family = Family::Lvq;
      m.impl = std::move(l);
    } else if (fam == "tree") {
      TreeModel t;
      detail::parse_tree_node(detail::field(p, "root"), t);
      m.family = Family::Tree;
      m.impl = std::move(t);
    } else if (fam == "ensemble") {
      EnsembleModel e;
      const json& trees = detail::field(p, "trees");
      if (!trees.is_array())
        throw ParseError("model: trees must be an array");
      for (const auto& tj : trees) {
        TreeModel t;
        detail::parse_tree_node(tj, t);
        e.trees.push_back(std::move(t));
      }
      std::string agg;
      try {
        agg = detail::field(p, "aggregation").get<std::string>();
      } catch (const json::exception&) {
        throw ParseError("model: aggregation must be a string");
      }
      if (agg == "majority-vote")
        e.aggregation = Aggregation::MajorityVote;
      else if (agg == "mean")
        e.aggregation = Aggregation::Mean;
      else
        throw ParseError("model: unknown aggregation \"" + agg + "\"");
      m.family = Family::Ensemble;
      m.impl = std::move(e);
    } else {
      throw UnsupportedFamily("model: unsupported family \"" + fam + "\"");
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("model: ") + e.what());
  }

  validate(m);
  if (m.family == Family::Qda) prepare(std::get<QdaModel>(m.impl));
  return m;
}

inline Model load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("model: cannot open \"" + path + "\"");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_model(ss.str());
}

inline std::string save_model(const Model& m) {
  using detail::json;
  json doc;
  doc["family"] = family_name(m.family);
  doc["dimension"] = m.dimension;
  json p;
  switch (m.family) {
    case Family::Hyperplane: {
      const auto& h = m.as<HyperplaneModel>();
      p["w"] = h.w;
      p["b"] = h.b;
      break;
    }
    case Family::Softmax: {
      const auto& s = m.as<SoftmaxModel>();
      p["w"] = s.w;
      p["b"] = s.b;
      break;
    }
    case Family::Linear:
    case Family::Poisson:
    case Family::Exponential: {
      const auto& g = m.as<GlmModel>();
      p["w"] = g.w;
      p["b"] = g.b;
      break;
    }
    case Family::Gnb: {
      const auto& g = m.as<GnbModel>();
      p["mean"] = g.mean;
      p["variance"] = g.var;
      p["prior"] = g.prior;
      break;
    }
    case Family::Qda: {
      const auto& q = m.as<QdaModel>();
      p["mean"] = q.mean;
      json cov = json::array();
      for (const auto& c : q.cov) cov.push_back(detail::mat_json(c));
      p["covariance"] = cov;
      p["prior"] = q.prior;
      break;
    }
    case Family::Lvq: {
      const auto& l = m.as<LvqModel>();
      p["prototypes"] = l.prototypes;
      p["labels"] = l.labels;
      if (l.metric == LvqMetric::Identity) {
        p["metric"] = "identity";
      } else if (l.metric == LvqMetric::Global) {
        p["metric"] = json{{"global", detail::mat_json(l.omega)}};
      } else {
        json os = json::array();
        for (const auto& o : l.omegas) os.push_back(detail::mat_json(o));
        p["metric"] = json{{"per_prototype", os}};
      }
      break;
    }
    case Family::Tree:
      p["root"] = detail::tree_node_json(m.as<TreeModel>(), 0);
      break;
    case Family::Ensemble: {
      const auto& e = m.as<EnsembleModel>();
      json trees = json::array();
      for (const auto& t : e.trees) trees.push_back(detail::tree_node_json(t, 0));
      p["trees"] = trees;
      p["aggregation"] =
          e.aggregation == Aggregation::MajorityVote ? "majority-vote" : "mean";
      break;
    }
  }
  doc["params"] = std::move(p);
  return doc.dump(2);
}

}  // namespace cfx
