#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <variant>
#include <vector>

#include "cfx/errors.hpp"
#include "cfx/linalg.hpp"

namespace cfx {

// h(x) = sign(w^T x + b); the boundary itself goes to -1 (lowest label).
// Also covers logistic regression with threshold 0.5, which reduces to the
// same sign rule.
struct HyperplaneModel {
  Vec w;
  double b = 0.0;
};

// h(x) = argmax_i w_i^T x + b_i, lowest class index on ties.
struct SoftmaxModel {
  std::vector<Vec> w;  // one weight vector per class
  Vec b;               // one intercept per class
  std::size_t classes() const { return w.size(); }
};

enum class GlmKind { Linear, Poisson, Exponential };

// f(x) = z, exp(z) or -1/z with z = w^T x + b.
struct GlmModel {
  GlmKind kind = GlmKind::Linear;
  Vec w;
  double b = 0.0;
};

// Gaussian naive Bayes: per class a diagonal Gaussian plus a prior.
struct GnbModel {
  std::vector<Vec> mean;  // [class][feature]
  std::vector<Vec> var;   // [class][feature], all > 0
  Vec prior;              // > 0, sums to 1
  std::size_t classes() const { return mean.size(); }
};

// Quadratic discriminant analysis: per class a full-covariance Gaussian.
// cov_inv/cov_logdet are caches filled by prepare(); predict falls back to
// factoring on the fly when they are absent.
struct QdaModel {
  std::vector<Vec> mean;
  std::vector<Mat> cov;
  Vec prior;

  std::vector<Mat> cov_inv;
  Vec cov_logdet;

  std::size_t classes() const { return mean.size(); }
  bool prepared() const { return cov_inv.size() == cov.size(); }
};

inline void prepare(QdaModel& m) {
  m.cov_inv.clear();
  m.cov_logdet.clear();
  for (const auto& s : m.cov) {
    Cholesky ch(s);
    m.cov_inv.push_back(ch.inverse());
    m.cov_logdet.push_back(ch.log_det());
  }
}

enum class LvqMetric { Identity, Global, PerPrototype };

// Nearest-prototype classifier. Distance is squared Euclidean, optionally
// under a shared matrix Omega or one matrix per prototype.
struct LvqModel {
  std::vector<Vec> prototypes;
  std::vector<int> labels;
  LvqMetric metric = LvqMetric::Identity;
  Mat omega;                 // Global
  std::vector<Mat> omegas;   // PerPrototype
};

// Flat tree storage: node 0 is the root, children are indices.
struct TreeNode {
  bool is_leaf = true;
  std::size_t feature = 0;
  double threshold = 0.0;
  int left = -1;   // x_feature <= threshold
  int right = -1;  // x_feature >  threshold
  double value = 0.0;
};

struct TreeModel {
  std::vector<TreeNode> nodes;
};

enum class Aggregation { MajorityVote, Mean };

struct EnsembleModel {
  std::vector<TreeModel> trees;
  Aggregation aggregation = Aggregation::MajorityVote;
};

enum class Family {
  Hyperplane,
  Softmax,
  Linear,
  Poisson,
  Exponential,
  Gnb,
  Qda,
  Lvq,
  Tree,
  Ensemble
};

inline const char* family_name(Family f) {
  switch (f) {
    case Family::Hyperplane: return "hyperplane";
    case Family::Softmax: return "softmax";
    case Family::Linear: return "linear";
    case Family::Poisson: return "poisson";
    case Family::Exponential: return "exponential";
    case Family::Gnb: return "gnb";
    case Family::Qda: return "qda";
    case Family::Lvq: return "lvq";
    case Family::Tree: return "tree";
    case Family::Ensemble: return "ensemble";
  }
  return "?";
}

struct Model {
  Family family = Family::Hyperplane;
  std::size_t dimension = 0;
  std::variant<HyperplaneModel, SoftmaxModel, GlmModel, GnbModel, QdaModel,
               LvqModel, TreeModel, EnsembleModel>
      impl;

  template <class T>
  const T& as() const {
    return std::get<T>(impl);
  }
};

inline bool is_regressor(const Model& m) {
  return m.family == Family::Linear || m.family == Family::Poisson ||
         m.family == Family::Exponential ||
         (m.family == Family::Ensemble &&
          m.as<EnsembleModel>().aggregation == Aggregation::Mean);
}

// ---- prediction -----------------------------------------------------------

inline double predict(const HyperplaneModel& m, const Vec& x) {
  return dot(m.w, x) + m.b > 0.0 ? 1.0 : -1.0;
}

inline double predict(const SoftmaxModel& m, const Vec& x) {
  std::size_t best = 0;
  double bs = dot(m.w[0], x) + m.b[0];
  for (std::size_t i = 1; i < m.classes(); ++i) {
    double s = dot(m.w[i], x) + m.b[i];
    if (s > bs) {
      bs = s;
      best = i;
    }
  }
  return static_cast<double>(best);
}

inline double predict(const GlmModel& m, const Vec& x) {
  double z = dot(m.w, x) + m.b;
  switch (m.kind) {
    case GlmKind::Linear: return z;
    case GlmKind::Poisson: return std::exp(z);
    case GlmKind::Exponential:
      if (std::abs(z) < 1e-12)
        throw EvaluationError("exponential regressor: w^T x + b is zero");
      return -1.0 / z;
  }
  return z;
}

inline double predict(const GnbModel& m, const Vec& x) {
  std::size_t best = 0;
  double bs = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m.classes(); ++i) {
    double s = std::log(m.prior[i]);
    for (std::size_t k = 0; k < x.size(); ++k) {
      double d = x[k] - m.mean[i][k];
      s += -0.5 * std::log(2.0 * std::numbers::pi * m.var[i][k]) -
           d * d / (2.0 * m.var[i][k]);
    }
    if (s > bs) {
      bs = s;
      best = i;
    }
  }
  return static_cast<double>(best);
}

inline double predict(const QdaModel& m, const Vec& x) {
  std::size_t best = 0;
  double bs = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m.classes(); ++i) {
    Vec d = sub(x, m.mean[i]);
    double quad, logdet;
    if (m.prepared()) {
      quad = dot(d, m.cov_inv[i].mul(d));
      logdet = m.cov_logdet[i];
    } else {
      Cholesky ch(m.cov[i]);
      quad = dot(d, ch.solve(d));
      logdet = ch.log_det();
    }
    double s = std::log(m.prior[i]) - 0.5 * logdet - 0.5 * quad;
    if (s > bs) {
      bs = s;
      best = i;
    }
  }
  return static_cast<double>(best);
}

inline double lvq_distance(const LvqModel& m, std::size_t i, const Vec& x) {
  Vec d = sub(x, m.prototypes[i]);
  switch (m.metric) {
    case LvqMetric::Identity: return norm2_sq(d);
    case LvqMetric::Global: return dot(d, m.omega.mul(d));
    case LvqMetric::PerPrototype: return dot(d, m.omegas[i].mul(d));
  }
  return norm2_sq(d);
}

inline double predict(const LvqModel& m, const Vec& x) {
  std::size_t best = 0;
  double bd = lvq_distance(m, 0, x);
  for (std::size_t i = 1; i < m.prototypes.size(); ++i) {
    double d = lvq_distance(m, i, x);
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return static_cast<double>(m.labels[best]);
}

inline double predict(const TreeModel& m, const Vec& x) {
  int n = 0;
  while (!m.nodes[static_cast<std::size_t>(n)].is_leaf) {
    const TreeNode& nd = m.nodes[static_cast<std::size_t>(n)];
    n = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
  return m.nodes[static_cast<std::size_t>(n)].value;
}

inline double predict(const EnsembleModel& m, const Vec& x) {
  if (m.aggregation == Aggregation::Mean) {
    double s = 0.0;
    for (const auto& t : m.trees) s += predict(t, x);
    return s / static_cast<double>(m.trees.size());
  }
  std::map<double, int> votes;  // ascending keys: first max is lowest label
  for (const auto& t : m.trees) ++votes[predict(t, x)];
  double best = votes.begin()->first;
  int bc = votes.begin()->second;
  for (const auto& [label, n] : votes)
    if (n > bc) {
      bc = n;
      best = label;
    }
  return best;
}

inline double predict(const Model& m, const Vec& x) {
  if (x.size() != m.dimension)
    throw DimensionMismatch("predict: input has wrong dimension");
  return std::visit([&](const auto& impl) { return predict(impl, x); },
                    m.impl);
}

// Label set of a classification model, ascending. Empty for regressors.
inline std::vector<double> class_labels(const Model& m) {
  std::vector<double> out;
  switch (m.family) {
    case Family::Hyperplane: out = {-1.0, 1.0}; break;
    case Family::Softmax:
      for (std::size_t i = 0; i < m.as<SoftmaxModel>().classes(); ++i)
        out.push_back(static_cast<double>(i));
      break;
    case Family::Gnb:
      for (std::size_t i = 0; i < m.as<GnbModel>().classes(); ++i)
        out.push_back(static_cast<double>(i));
      break;
    case Family::Qda:
      for (std::size_t i = 0; i < m.as<QdaModel>().classes(); ++i)
        out.push_back(static_cast<double>(i));
      break;
    case Family::Lvq:
      for (int l : m.as<LvqModel>().labels)
        out.push_back(static_cast<double>(l));
      break;
    case Family::Tree:
      for (const auto& n : m.as<TreeModel>().nodes)
        if (n.is_leaf) out.push_back(n.value);
      break;
    case Family::Ensemble:
      if (m.as<EnsembleModel>().aggregation == Aggregation::Mean) break;
      for (const auto& t : m.as<EnsembleModel>().trees)
        for (const auto& n : t.nodes)
          if (n.is_leaf) out.push_back(n.value);
      break;
    default: break;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---- invariant checks (shared by loader and direct construction) ----------

namespace detail {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

inline void check_finite(const Vec& v, const std::string& what) {
  require(all_finite(v), what + ": non-finite entry");
}

inline void check_priors(const Vec& prior, const std::string& what) {
  require(prior.size() >= 2, what + ": needs at least two classes");
  double s = 0.0;
  for (double p : prior) {
    require(std::isfinite(p) && p > 0.0, what + ": priors must be positive");
    s += p;
  }
  require(std::abs(s - 1.0) <= 1e-9, what + ": priors must sum to 1");
}

inline void check_psd(const Mat& m, const std::string& what) {
  require(m.max_asymmetry() <= kSymmetryTol, what + ": matrix not symmetric");
  SymEigen e = sym_eigen(m.symmetrized());
  double emax = std::max(1.0, std::abs(e.values.back()));
  require(e.values.front() >= -1e-8 * emax,
          what + ": matrix not positive semi-definite");
}

inline void check_tree(const TreeModel& t, std::size_t dim,
                       const std::string& what) {
  require(!t.nodes.empty(), what + ": empty tree");
  for (const auto& n : t.nodes) {
    if (n.is_leaf) {
      require(std::isfinite(n.value), what + ": non-finite leaf value");
      continue;
    }
    require(n.feature < dim, what + ": feature index out of range");
    require(std::isfinite(n.threshold), what + ": non-finite threshold");
    require(n.left >= 0 && n.right >= 0 &&
                n.left < static_cast<int>(t.nodes.size()) &&
                n.right < static_cast<int>(t.nodes.size()),
            what + ": child index out of range");
  }
}

}  // namespace detail

// Validate every family invariant against the declared dimension. Loaders
// call this after populating impl; tests may call it on hand-built models.
inline void validate(const Model& m) {
  using detail::require;
  require(m.dimension >= 1, "model: dimension must be >= 1");
  switch (m.family) {
    case Family::Hyperplane: {
      const auto& h = m.as<HyperplaneModel>();
      require(h.w.size() == m.dimension, "hyperplane: dim(w) != dimension");
      detail::check_finite(h.w, "hyperplane w");
      require(std::isfinite(h.b), "hyperplane: non-finite b");
      break;
    }
    case Family::Softmax: {
      const auto& s = m.as<SoftmaxModel>();
      require(s.classes() >= 2, "softmax: needs K >= 2 classes");
      require(s.b.size() == s.classes(), "softmax: |b| != K");
      for (const auto& w : s.w) {
        require(w.size() == m.dimension, "softmax: dim(w_i) != dimension");
        detail::check_finite(w, "softmax w");
      }
      detail::check_finite(s.b, "softmax b");
      break;
    }
    case Family::Linear:
    case Family::Poisson:
    case Family::Exponential: {
      const auto& g = m.as<GlmModel>();
      require(g.w.size() == m.dimension, "glm: dim(w) != dimension");
      detail::check_finite(g.w, "glm w");
      require(std::isfinite(g.b), "glm: non-finite b");
      break;
    }
    case Family::Gnb: {
      const auto& g = m.as<GnbModel>();
      detail::check_priors(g.prior, "gnb");
      require(g.mean.size() == g.prior.size() &&
                  g.var.size() == g.prior.size(),
              "gnb: class count mismatch");
      for (std::size_t i = 0; i < g.classes(); ++i) {
        require(g.mean[i].size() == m.dimension &&
                    g.var[i].size() == m.dimension,
                "gnb: feature count mismatch");
        detail::check_finite(g.mean[i], "gnb mean");
        for (double v : g.var[i])
          require(std::isfinite(v) && v > 0.0,
                  "gnb: variances must be positive");
      }
      break;
    }
    case Family::Qda: {
      const auto& q = m.as<QdaModel>();
      detail::check_priors(q.prior, "qda");
      require(q.mean.size() == q.prior.size() &&
                  q.cov.size() == q.prior.size(),
              "qda: class count mismatch");
      for (std::size_t i = 0; i < q.classes(); ++i) {
        require(q.mean[i].size() == m.dimension, "qda: dim(mean) mismatch");
        detail::check_finite(q.mean[i], "qda mean");
        require(q.cov[i].rows() == m.dimension &&
                    q.cov[i].cols() == m.dimension,
                "qda: covariance shape mismatch");
        require(q.cov[i].max_asymmetry() <= kSymmetryTol,
                "qda: covariance not symmetric");
        try {
          Cholesky ch(q.cov[i].symmetrized());
          (void)ch;
        } catch (const Error&) {
          throw ValidationError("qda: covariance not positive-definite");
        }
      }
      break;
    }
    case Family::Lvq: {
      const auto& l = m.as<LvqModel>();
      require(l.prototypes.size() >= 2, "lvq: needs at least 2 prototypes");
      require(l.labels.size() == l.prototypes.size(),
              "lvq: label count mismatch");
      for (const auto& p : l.prototypes) {
        require(p.size() == m.dimension, "lvq: prototype dimension mismatch");
        detail::check_finite(p, "lvq prototype");
      }
      if (l.metric == LvqMetric::Global) {
        require(l.omega.rows() == m.dimension && l.omega.cols() == m.dimension,
                "lvq: omega shape mismatch");
        detail::check_psd(l.omega, "lvq omega");
      } else if (l.metric == LvqMetric::PerPrototype) {
        require(l.omegas.size() == l.prototypes.size(),
                "lvq: omega count mismatch");
        for (const auto& o : l.omegas) {
          require(o.rows() == m.dimension && o.cols() == m.dimension,
                  "lvq: omega shape mismatch");
          detail::check_psd(o, "lvq omega");
        }
      }
      break;
    }
    case Family::Tree:
      detail::check_tree(m.as<TreeModel>(), m.dimension, "tree");
      break;
    case Family::Ensemble: {
      const auto& e = m.as<EnsembleModel>();
      require(!e.trees.empty(), "ensemble: needs at least one tree");
      for (const auto& t : e.trees)
        detail::check_tree(t, m.dimension, "ensemble tree");
      break;
    }
  }
}

}  // namespace cfx
