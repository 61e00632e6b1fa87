#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "cfx/model_io.hpp"

using namespace cfx;

TEST_CASE("hyperplane document loads with direct field mapping") {
  Model m = load_model(R"({
    "family": "hyperplane", "dimension": 2,
    "params": {"w": [1, 0], "b": -1}
  })");
  CHECK(m.family == Family::Hyperplane);
  CHECK(m.dimension == 2);
  CHECK(m.as<HyperplaneModel>().w == Vec{1.0, 0.0});
  CHECK(m.as<HyperplaneModel>().b == -1.0);
  CHECK(predict(m, {2.0, 0.0}) == 1.0);
}

TEST_CASE("logistic documents normalize to the hyperplane family") {
  Model m = load_model(R"({
    "family": "logistic", "dimension": 1,
    "params": {"w": [2.0], "b": -3.0}
  })");
  CHECK(m.family == Family::Hyperplane);
  // p(y=1|x) >= 1/2 iff 2x - 3 >= 0
  CHECK(predict(m, {2.0}) == 1.0);
  CHECK(predict(m, {1.0}) == -1.0);
  CHECK(save_model(m).find("\"hyperplane\"") != std::string::npos);
}

TEST_CASE("invalid documents raise typed errors") {
  CHECK_THROWS_AS(load_model("{not json"), ParseError);
  CHECK_THROWS_AS(load_model("[1,2,3]"), ParseError);
  CHECK_THROWS_AS(load_model(R"({"family": "hyperplane"})"), ParseError);
  CHECK_THROWS_AS(load_model(R"({
    "family": "kernel-svm", "dimension": 2, "params": {}
  })"),
                  UnsupportedFamily);
  CHECK_THROWS_AS(load_model(R"({
    "family": "hyperplane", "dimension": 0, "params": {"w": [], "b": 0}
  })"),
                  ParseError);
  CHECK_THROWS_AS(load_model(R"({
    "family": "hyperplane", "dimension": 2, "params": {"w": "oops", "b": 0}
  })"),
                  ParseError);
  CHECK_THROWS_AS(load_model(R"({
    "family": "hyperplane", "dimension": 2, "params": {"b": 0}
  })"),
                  ParseError);
  // wrong dimension is a model invariant, not a syntax problem
  CHECK_THROWS_AS(load_model(R"({
    "family": "hyperplane", "dimension": 3, "params": {"w": [1, 0], "b": 0}
  })"),
                  ValidationError);
  CHECK_THROWS_AS(load_model_file("/nonexistent/model.json"), ParseError);
}

TEST_CASE("gnb zero variance raises ValidationError") {
  CHECK_THROWS_AS(load_model(R"({
    "family": "gnb", "dimension": 1,
    "params": {"mean": [[-1], [1]], "variance": [[1], [0]],
               "prior": [0.5, 0.5]}
  })"),
                  ValidationError);
}

TEST_CASE("qda with noticeably asymmetric covariance raises ValidationError") {
  CHECK_THROWS_AS(load_model(R"({
    "family": "qda", "dimension": 2,
    "params": {"mean": [[0, 0], [1, 1]],
               "covariance": [[[1, 0.5], [0.2, 1]], [[1, 0], [0, 1]]],
               "prior": [0.5, 0.5]}
  })"),
                  ValidationError);

  // asymmetry below the 1e-10 gate is accepted as numeric drift
  Model ok = load_model(R"({
    "family": "qda", "dimension": 2,
    "params": {"mean": [[0, 0], [1, 1]],
               "covariance": [[[1, 1e-12], [0, 1]], [[1, 0], [0, 1]]],
               "prior": [0.5, 0.5]}
  })");
  CHECK(ok.as<QdaModel>().prepared());
}

TEST_CASE("priors must be positive and sum to one") {
  CHECK_THROWS_AS(load_model(R"({
    "family": "gnb", "dimension": 1,
    "params": {"mean": [[-1], [1]], "variance": [[1], [1]],
               "prior": [0.6, 0.6]}
  })"),
                  ValidationError);
  CHECK_THROWS_AS(load_model(R"({
    "family": "gnb", "dimension": 1,
    "params": {"mean": [[-1], [1]], "variance": [[1], [1]],
               "prior": [1.2, -0.2]}
  })"),
                  ValidationError);
}

TEST_CASE("tree documents parse nested nodes") {
  Model m = load_model(R"({
    "family": "tree", "dimension": 2,
    "params": {"root": {
      "feature": 0, "threshold": 5,
      "left": {"leaf": 0},
      "right": {"feature": 1, "threshold": 1.5,
                "left": {"leaf": 1}, "right": {"leaf": 2}}
    }}
  })");
  CHECK(predict(m, {3.0, 9.0}) == 0.0);
  CHECK(predict(m, {6.0, 1.0}) == 1.0);
  CHECK(predict(m, {6.0, 2.0}) == 2.0);

  CHECK_THROWS_AS(load_model(R"({
    "family": "tree", "dimension": 1,
    "params": {"root": {"feature": 5, "threshold": 0,
                        "left": {"leaf": 0}, "right": {"leaf": 1}}}
  })"),
                  ValidationError);  // feature index out of range
  CHECK_THROWS_AS(load_model(R"({
    "family": "tree", "dimension": 1,
    "params": {"root": {"feature": 0, "threshold": 0,
                        "left": {"leaf": 0}}}
  })"),
                  ParseError);  // missing right child
}

TEST_CASE("ensemble documents parse trees and aggregation") {
  Model m = load_model(R"({
    "family": "ensemble", "dimension": 1,
    "params": {
      "aggregation": "majority-vote",
      "trees": [
        {"feature": 0, "threshold": 1, "left": {"leaf": 0}, "right": {"leaf": 1}},
        {"feature": 0, "threshold": 2, "left": {"leaf": 0}, "right": {"leaf": 1}},
        {"feature": 0, "threshold": 3, "left": {"leaf": 0}, "right": {"leaf": 1}}
      ]
    }
  })");
  CHECK(predict(m, {2.5}) == 1.0);
  CHECK(predict(m, {1.5}) == 0.0);

  CHECK_THROWS_AS(load_model(R"({
    "family": "ensemble", "dimension": 1,
    "params": {"aggregation": "median",
               "trees": [{"leaf": 0}]}
  })"),
                  ParseError);
  CHECK_THROWS_AS(load_model(R"({
    "family": "ensemble", "dimension": 1,
    "params": {"aggregation": "mean", "trees": []}
  })"),
                  ValidationError);
}

TEST_CASE("lvq metric forms parse") {
  Model mi = load_model(R"({
    "family": "lvq", "dimension": 2,
    "params": {"prototypes": [[-1, 0], [1, 0]], "labels": [1, 2],
               "metric": "identity"}
  })");
  CHECK(mi.as<LvqModel>().metric == LvqMetric::Identity);
  CHECK(predict(mi, {0.3, 0.0}) == 2.0);

  Model mg = load_model(R"({
    "family": "lvq", "dimension": 2,
    "params": {"prototypes": [[-1, 0], [1, 0]], "labels": [1, 2],
               "metric": {"global": [[1, 0], [0, 1]]}}
  })");
  CHECK(mg.as<LvqModel>().metric == LvqMetric::Global);

  Model mp = load_model(R"({
    "family": "lvq", "dimension": 2,
    "params": {"prototypes": [[-1, 0], [1, 0]], "labels": [1, 2],
               "metric": {"per_prototype": [[[1, 0], [0, 1]],
                                            [[2, 0], [0, 2]]]}}
  })");
  CHECK(mp.as<LvqModel>().metric == LvqMetric::PerPrototype);
  CHECK(mp.as<LvqModel>().omegas.size() == 2);

  CHECK_THROWS_AS(load_model(R"({
    "family": "lvq", "dimension": 2,
    "params": {"prototypes": [[-1, 0], [1, 0]], "labels": [1, 2],
               "metric": "mahalanobis"}
  })"),
                  ParseError);
  // omega must be PSD
  CHECK_THROWS_AS(load_model(R"({
    "family": "lvq", "dimension": 2,
    "params": {"prototypes": [[-1, 0], [1, 0]], "labels": [1, 2],
               "metric": {"global": [[1, 0], [0, -1]]}}
  })"),
                  ValidationError);
}

TEST_CASE("documents round-trip bit-identically") {
  const char* docs[] = {
      R"({"family": "hyperplane", "dimension": 3,
          "params": {"w": [0.1, -0.333333333333333314829616256247390992939472198486328125, 17], "b": 2.5}})",
      R"({"family": "softmax", "dimension": 2,
          "params": {"w": [[0.1, 0.2], [1e-17, -3.7], [2, 0.30000000000000004]],
                     "b": [0.5, -0.25, 1e17]}})",
      R"({"family": "poisson", "dimension": 2,
          "params": {"w": [0.7, 3.141592653589793], "b": -0.1}})",
      R"({"family": "exponential", "dimension": 1,
          "params": {"w": [-2.2250738585072014e-308], "b": -1}})",
      R"({"family": "linear", "dimension": 1, "params": {"w": [0.3], "b": 0}})",
      R"({"family": "gnb", "dimension": 2,
          "params": {"mean": [[-1.1, 0.2], [0.9, -0.4]],
                     "variance": [[0.5, 1.5], [2.25, 0.1]],
                     "prior": [0.25, 0.75]}})",
      R"({"family": "qda", "dimension": 2,
          "params": {"mean": [[0.1, 0.2], [1.5, -0.5]],
                     "covariance": [[[2, 0.3], [0.3, 1]], [[1, 0], [0, 4]]],
                     "prior": [0.5, 0.5]}})",
      R"({"family": "lvq", "dimension": 2,
          "params": {"prototypes": [[-1, 0.1], [1, -0.1], [3.3, 2.2]],
                     "labels": [1, 2, 1],
                     "metric": {"per_prototype": [[[1, 0], [0, 1]],
                                                  [[2, 0.1], [0.1, 2]],
                                                  [[1, 0], [0, 3]]]}}})",
      R"({"family": "tree", "dimension": 2,
          "params": {"root": {"feature": 1, "threshold": 0.15,
                              "left": {"leaf": -2.5},
                              "right": {"feature": 0, "threshold": 1e-3,
                                        "left": {"leaf": 0.1},
                                        "right": {"leaf": 7}}}}})",
      R"({"family": "ensemble", "dimension": 1,
          "params": {"aggregation": "mean",
                     "trees": [{"feature": 0, "threshold": 0.1,
                                "left": {"leaf": 1.25}, "right": {"leaf": -0.5}},
                               {"leaf": 3.5}]}})",
  };
  for (const char* doc : docs) {
    CAPTURE(doc);
    Model m1 = load_model(doc);
    std::string s1 = save_model(m1);
    Model m2 = load_model(s1);
    std::string s2 = save_model(m2);
    CHECK(s1 == s2);
  }

  // spot-check bitwise field survival through the round trip
  Model m = load_model(docs[0]);
  Model back = load_model(save_model(m));
  CHECK(back.as<HyperplaneModel>().w == m.as<HyperplaneModel>().w);
  CHECK(back.as<HyperplaneModel>().b == m.as<HyperplaneModel>().b);

  Model g1 = load_model(docs[5]);
  Model g2 = load_model(save_model(g1));
  CHECK(g2.as<GnbModel>().mean == g1.as<GnbModel>().mean);
  CHECK(g2.as<GnbModel>().var == g1.as<GnbModel>().var);
  CHECK(g2.as<GnbModel>().prior == g1.as<GnbModel>().prior);
}

TEST_CASE("loading prepares the qda covariance cache") {
  Model m = load_model(R"({
    "family": "qda", "dimension": 1,
    "params": {"mean": [[-1], [1]], "covariance": [[[1]], [[4]]],
               "prior": [0.5, 0.5]}
  })");
  const auto& q = m.as<QdaModel>();
  REQUIRE(q.prepared());
  CHECK(q.cov_inv[1](0, 0) == Catch::Approx(0.25));
  CHECK(q.cov_logdet[1] == Catch::Approx(std::log(4.0)));
}
