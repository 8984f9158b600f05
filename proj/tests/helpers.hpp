#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "hullnet/geometry.hpp"

namespace testutil {

using hullnet::PointSet;

inline PointSet translated(const PointSet& ps, const std::vector<double>& v) {
  PointSet out(ps.dim());
  std::vector<double> p(ps.dim());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    auto row = ps[i];
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = row[k] + v[k];
    out.add(p);
  }
  return out;
}

inline PointSet scaled(const PointSet& ps, double s) {
  PointSet out(ps.dim());
  std::vector<double> p(ps.dim());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    auto row = ps[i];
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = s * row[k];
    out.add(p);
  }
  return out;
}

inline PointSet random_points(std::mt19937_64& rng, std::size_t n,
                              std::size_t dim, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> uni(lo, hi);
  PointSet ps(dim);
  std::vector<double> p(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& c : p) c = uni(rng);
    ps.add(p);
  }
  return ps;
}

// Two gaussian clouds pushed apart along the first axis; linearly separable
// for gap comfortably above the cloud radius.
inline std::pair<PointSet, PointSet> make_blobs(std::mt19937_64& rng,
                                                std::size_t n, std::size_t dim,
                                                double gap = 6.0,
                                                double sigma = 1.0) {
  std::normal_distribution<double> gauss(0.0, sigma);
  PointSet a(dim), b(dim);
  std::vector<double> p(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& c : p) c = gauss(rng);
    a.add(p);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& c : p) c = gauss(rng);
    p[0] += gap;
    b.add(p);
  }
  return {std::move(a), std::move(b)};
}

// Four tight clusters at the corners of a square, opposite corners sharing a
// label; convexly entangled by construction. Extra dimensions get small noise.
inline std::pair<PointSet, PointSet> make_noisy_xor(std::mt19937_64& rng,
                                                    std::size_t n_per_cluster,
                                                    std::size_t dim,
                                                    double noise = 0.08) {
  std::normal_distribution<double> gauss(0.0, noise);
  const double corners[4][2] = {{0, 0}, {1, 1}, {0, 1}, {1, 0}};
  PointSet a(dim), b(dim);
  std::vector<double> p(dim);
  for (int c = 0; c < 4; ++c) {
    for (std::size_t i = 0; i < n_per_cluster; ++i) {
      p.assign(dim, 0.0);
      p[0] = corners[c][0] + gauss(rng);
      if (dim > 1) p[1] = corners[c][1] + gauss(rng);
      for (std::size_t k = 2; k < dim; ++k) p[k] = gauss(rng);
      (c < 2 ? a : b).add(p);
    }
  }
  return {std::move(a), std::move(b)};
}

// Inner ring of one class nested inside an outer ring of the other, embedded
// in the first two coordinates; the outer hull contains the inner hull.
inline std::pair<PointSet, PointSet> make_rings(std::mt19937_64& rng,
                                                std::size_t n, std::size_t dim,
                                                double r_inner = 1.0,
                                                double r_outer = 2.0,
                                                double noise = 0.05) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * 3.14159265358979323846);
  std::normal_distribution<double> gauss(0.0, noise);
  PointSet a(dim), b(dim);
  std::vector<double> p(dim);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = angle(rng);
    p.assign(dim, 0.0);
    p[0] = r_inner * std::cos(t) + gauss(rng);
    if (dim > 1) p[1] = r_inner * std::sin(t) + gauss(rng);
    for (std::size_t k = 2; k < dim; ++k) p[k] = gauss(rng);
    a.add(p);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double t = angle(rng);
    p.assign(dim, 0.0);
    p[0] = r_outer * std::cos(t) + gauss(rng);
    if (dim > 1) p[1] = r_outer * std::sin(t) + gauss(rng);
    for (std::size_t k = 2; k < dim; ++k) p[k] = gauss(rng);
    b.add(p);
  }
  return {std::move(a), std::move(b)};
}

// ---------------------------------------------------------------------------
// Independent oracle for the hull distance: brute-force minimization over
// convex-combination coefficients. Coarse simplex grid, then pattern-search
// refinement with pairwise mass moves (no gradients, no support points), so
// it shares nothing with the production solver.

inline void enumerate_simplex(std::size_t n, std::size_t k,
                              std::vector<std::size_t>& partial,
                              std::vector<std::vector<double>>& out) {
  if (partial.size() + 1 == n) {
    std::size_t used = std::accumulate(partial.begin(), partial.end(), std::size_t{0});
    std::vector<double> w(n);
    for (std::size_t i = 0; i < partial.size(); ++i)
      w[i] = double(partial[i]) / double(k);
    w[n - 1] = double(k - used) / double(k);
    out.push_back(std::move(w));
    return;
  }
  std::size_t used = std::accumulate(partial.begin(), partial.end(), std::size_t{0});
  for (std::size_t v = 0; v + used <= k; ++v) {
    partial.push_back(v);
    enumerate_simplex(n, k, partial, out);
    partial.pop_back();
  }
}

inline std::vector<std::vector<double>> simplex_grid(std::size_t n, std::size_t k) {
  std::vector<std::vector<double>> out;
  std::vector<std::size_t> partial;
  enumerate_simplex(n, k, partial, out);
  return out;
}

inline std::vector<double> combine(const PointSet& ps,
                                   const std::vector<double>& w) {
  std::vector<double> p(ps.dim(), 0.0);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    auto row = ps[i];
    for (std::size_t k = 0; k < p.size(); ++k) p[k] += w[i] * row[k];
  }
  return p;
}

inline double oracle_hull_distance(const PointSet& a_set, const PointSet& b_set,
                                   std::size_t grid = 6) {
  const std::size_t na = a_set.size(), nb = b_set.size();
  const auto wa_grid = simplex_grid(na, grid);
  const auto wb_grid = simplex_grid(nb, grid);

  std::vector<std::vector<double>> pa, pb;
  pa.reserve(wa_grid.size());
  pb.reserve(wb_grid.size());
  for (const auto& w : wa_grid) pa.push_back(combine(a_set, w));
  for (const auto& w : wb_grid) pb.push_back(combine(b_set, w));

  double best = std::numeric_limits<double>::infinity();
  std::vector<double> wa, wb;
  for (std::size_t i = 0; i < pa.size(); ++i)
    for (std::size_t j = 0; j < pb.size(); ++j) {
      const double d = hullnet::squared_distance(pa[i], pb[j]);
      if (d < best) {
        best = d;
        wa = wa_grid[i];
        wb = wb_grid[j];
      }
    }

  auto dist2 = [&](const std::vector<double>& x, const std::vector<double>& y) {
    return hullnet::squared_distance(combine(a_set, x), combine(b_set, y));
  };
  double h = 1.0 / double(grid);
  while (h > 1e-10) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (int side = 0; side < 2; ++side) {
        auto& w = side == 0 ? wa : wb;
        for (std::size_t i = 0; i < w.size(); ++i)
          for (std::size_t j = 0; j < w.size(); ++j) {
            if (i == j || w[j] < h) continue;
            w[i] += h;
            w[j] -= h;
            const double d = dist2(wa, wb);
            if (d < best - 1e-18) {
              best = d;
              improved = true;
            } else {
              w[i] -= h;
              w[j] += h;
            }
          }
      }
    }
    h *= 0.5;
  }
  return std::sqrt(best);
}

// Spearman rank correlation with average ranks for ties.
inline double spearman(const std::vector<double>& xs,
                       const std::vector<double>& ys) {
  auto ranks = [](const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = 0.5 * double(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(xs), ry = ranks(ys);
  const std::size_t n = xs.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= double(n);
  my /= double(n);
  double num = 0, dx = 0, dy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  if (dx == 0.0 || dy == 0.0) return 0.0;
  return num / std::sqrt(dx * dy);
}

}  // namespace testutil
