#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "cfx/linalg.hpp"

namespace cfx {

struct NmParams {
  int max_iterations = 4000;
  double diameter_tol = 1e-8;  // stop when the simplex collapses
  double spread_tol = 1e-10;   // ... or the value spread does
  double initial_step = 0.05;  // relative vertex offset
  double zero_step = 0.00025;  // offset used where x0_i == 0
  // when sized to d, vertex i starts at x0 + initial_offsets[i] * e_i and the
  // relative rule above is ignored; lets callers probe a fixed radius
  Vec initial_offsets;
};

struct NmResult {
  Vec point;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Classic downhill simplex (reflection 1, expansion 2, contraction 1/2,
// shrink 1/2). Deterministic given x0.
inline NmResult downhill_simplex(const std::function<double(const Vec&)>& f,
                                 const Vec& x0, const NmParams& prm = {}) {
  const std::size_t d = x0.size();
  std::vector<Vec> v;
  v.push_back(x0);
  for (std::size_t i = 0; i < d; ++i) {
    Vec p = x0;
    if (prm.initial_offsets.size() == d)
      p[i] += prm.initial_offsets[i];
    else
      p[i] += (p[i] != 0.0) ? prm.initial_step * p[i] : prm.zero_step;
    v.push_back(p);
  }
  std::vector<double> fv(d + 1);
  for (std::size_t i = 0; i <= d; ++i) fv[i] = f(v[i]);

  auto order = [&] {
    std::vector<std::size_t> idx(d + 1);
    for (std::size_t i = 0; i <= d; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    std::vector<Vec> nv(d + 1);
    std::vector<double> nf(d + 1);
    for (std::size_t i = 0; i <= d; ++i) nv[i] = v[idx[i]], nf[i] = fv[idx[i]];
    v = std::move(nv);
    fv = std::move(nf);
  };

  NmResult out;
  int it = 0;
  bool spread_armed = false;
  for (; it < prm.max_iterations; ++it) {
    order();
    double diam = 0.0;
    for (std::size_t i = 1; i <= d; ++i)
      diam = std::max(diam, norm_inf(sub(v[i], v[0])));
    double spread = std::abs(fv[d] - fv[0]);
    if (diam < prm.diameter_tol) {
      out.converged = true;
      break;
    }
    if (spread < prm.spread_tol) {
      // a flat spread can be a symmetric straddle of a minimum; shrink once
      // and only exit if it stays flat
      if (spread_armed) {
        out.converged = true;
        break;
      }
      spread_armed = true;
      for (std::size_t i = 1; i <= d; ++i) {
        for (std::size_t j = 0; j < d; ++j) v[i][j] = v[0][j] + 0.5 * (v[i][j] - v[0][j]);
        fv[i] = f(v[i]);
      }
      continue;
    }
    spread_armed = false;

    Vec centroid(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) axpy(centroid, 1.0, v[i]);
    for (double& c : centroid) c /= static_cast<double>(d);

    auto along = [&](double t) {
      Vec p(d);
      for (std::size_t i = 0; i < d; ++i) p[i] = centroid[i] + t * (centroid[i] - v[d][i]);
      return p;
    };

    Vec xr = along(1.0);
    double fr = f(xr);
    if (fr < fv[0]) {
      Vec xe = along(2.0);
      double fe = f(xe);
      if (fe < fr)
        v[d] = xe, fv[d] = fe;
      else
        v[d] = xr, fv[d] = fr;
    } else if (fr < fv[d - 1]) {
      v[d] = xr, fv[d] = fr;
    } else {
      bool outside = fr < fv[d];
      Vec xc = along(outside ? 0.5 : -0.5);
      double fc = f(xc);
      if (fc < (outside ? fr : fv[d])) {
        v[d] = xc, fv[d] = fc;
      } else {
        for (std::size_t i = 1; i <= d; ++i) {
          for (std::size_t j = 0; j < d; ++j) v[i][j] = v[0][j] + 0.5 * (v[i][j] - v[0][j]);
          fv[i] = f(v[i]);
        }
      }
    }
  }
  order();
  out.point = v[0];
  out.value = fv[0];
  out.iterations = it;
  return out;
}

}  // namespace cfx
