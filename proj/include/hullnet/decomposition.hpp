#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "hullnet/geometry.hpp"
#include "hullnet/parallel.hpp"

namespace hullnet {

// Partition of two labeled point sets into parts whose convex hulls are
// pairwise disjoint across classes. Parts hold indices into the input sets.
struct Decomposition {
  std::vector<std::vector<std::size_t>> parts_x;  // class-1 parts
  std::vector<std::vector<std::size_t>> parts_y;  // class-2 parts
  std::uint64_t seed = 0;
  std::size_t projections_used = 0;
  std::size_t peel_iterations = 0;

  std::size_t l1() const { return parts_x.size(); }
  std::size_t l2() const { return parts_y.size(); }
};

// One pass of mean-difference splitting: project both sets on my - mx, keep
// as "outside" the X points strictly below the Y minimum cy and the Y points
// strictly above the X maximum cx; the rest is the overlap.
struct PeelResult {
  PointSet outside_x, outside_y;
  PointSet overlap_x, overlap_y;
  double cx = 0.0;  // max projection of X
  double cy = 0.0;  // min projection of Y
};

struct ZeroDirectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<double> mean_of(const PointSet& base,
                                   const std::vector<std::size_t>& idx) {
  std::vector<double> m(base.dim(), 0.0);
  for (std::size_t i : idx) {
    auto p = base[i];
    for (std::size_t k = 0; k < m.size(); ++k) m[k] += p[k];
  }
  for (auto& v : m) v /= double(idx.size());
  return m;
}

struct PeelSplit {
  std::vector<std::size_t> outside_x, outside_y, overlap_x, overlap_y;
  double cx = 0.0, cy = 0.0;
};

inline PeelSplit peel_split(const PointSet& x_base, const PointSet& y_base,
                            const std::vector<std::size_t>& xs,
                            const std::vector<std::size_t>& ys,
                            std::span<const double> direction) {
  PeelSplit out;
  double cx = -std::numeric_limits<double>::infinity();
  double cy = std::numeric_limits<double>::infinity();
  std::vector<double> px(xs.size()), py(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    px[i] = dot(direction, x_base[xs[i]]);
    cx = std::max(cx, px[i]);
  }
  for (std::size_t j = 0; j < ys.size(); ++j) {
    py[j] = dot(direction, y_base[ys[j]]);
    cy = std::min(cy, py[j]);
  }
  for (std::size_t i = 0; i < xs.size(); ++i)
    (px[i] >= cy ? out.overlap_x : out.outside_x).push_back(xs[i]);
  for (std::size_t j = 0; j < ys.size(); ++j)
    (py[j] <= cx ? out.overlap_y : out.outside_y).push_back(ys[j]);
  out.cx = cx;
  out.cy = cy;
  return out;
}

inline std::vector<double> random_unit_vector(std::size_t dim,
                                              std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(dim);
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (auto& c : v) {
      c = gauss(rng);
      n2 += c * c;
    }
  } while (n2 == 0.0);
  const double inv = 1.0 / std::sqrt(n2);
  for (auto& c : v) c *= inv;
  return v;
}

}  // namespace detail

inline PeelResult peel_overlap(const PointSet& x_set, const PointSet& y_set) {
  if (x_set.empty() || y_set.empty())
    throw std::invalid_argument("peel_overlap: empty operand");
  if (x_set.dim() != y_set.dim())
    throw std::invalid_argument("peel_overlap: dimension mismatch");
  std::vector<std::size_t> xs(x_set.size()), ys(y_set.size());
  std::iota(xs.begin(), xs.end(), 0);
  std::iota(ys.begin(), ys.end(), 0);
  const auto mx = detail::mean_of(x_set, xs);
  const auto my = detail::mean_of(y_set, ys);
  std::vector<double> dir(x_set.dim());
  for (std::size_t k = 0; k < dir.size(); ++k) dir[k] = my[k] - mx[k];
  if (dot(dir, dir) == 0.0)
    throw ZeroDirectionError(
        "peel_overlap: class means coincide; fall back to a random direction");
  const auto split = detail::peel_split(x_set, y_set, xs, ys, dir);
  PeelResult res;
  res.outside_x = x_set.gather(split.outside_x);
  res.outside_y = y_set.gather(split.outside_y);
  res.overlap_x = x_set.gather(split.overlap_x);
  res.overlap_y = y_set.gather(split.overlap_y);
  res.cx = split.cx;
  res.cy = split.cy;
  return res;
}

// Number of class switches when both projection lists are merged and sorted.
// Equal values sort class-1 first, so a tie costs one boundary at most.
inline std::size_t count_alternations(const std::vector<double>& scalars_1,
                                      const std::vector<double>& scalars_2) {
  std::vector<std::pair<double, int>> merged;
  merged.reserve(scalars_1.size() + scalars_2.size());
  for (double v : scalars_1) merged.emplace_back(v, 0);
  for (double v : scalars_2) merged.emplace_back(v, 1);
  std::sort(merged.begin(), merged.end());
  std::size_t changes = 0;
  for (std::size_t i = 1; i < merged.size(); ++i)
    if (merged[i].second != merged[i - 1].second) ++changes;
  return changes;
}

// Maximal same-class runs of the merged, sorted projections. Each run is a
// part; run membership is reported as positions into the input lists.
struct RunsPartition {
  std::vector<std::vector<std::size_t>> runs_x;  // positions into scalars_1
  std::vector<std::vector<std::size_t>> runs_y;  // positions into scalars_2
  bool has_cross_tie = false;  // equal values across classes (degenerate)
};

inline RunsPartition decompose_1d(const std::vector<double>& scalars_1,
                                  const std::vector<double>& scalars_2) {
  struct Entry {
    double v;
    int cls;
    std::size_t pos;
  };
  std::vector<Entry> merged;
  merged.reserve(scalars_1.size() + scalars_2.size());
  for (std::size_t i = 0; i < scalars_1.size(); ++i)
    merged.push_back({scalars_1[i], 0, i});
  for (std::size_t j = 0; j < scalars_2.size(); ++j)
    merged.push_back({scalars_2[j], 1, j});
  std::sort(merged.begin(), merged.end(), [](const Entry& a, const Entry& b) {
    if (a.v != b.v) return a.v < b.v;
    return a.cls < b.cls;
  });
  RunsPartition out;
  int prev_cls = -1;
  for (std::size_t i = 0; i < merged.size(); ++i) {
    const auto& e = merged[i];
    if (i > 0 && merged[i - 1].v == e.v && merged[i - 1].cls != e.cls)
      out.has_cross_tie = true;
    auto& runs = e.cls == 0 ? out.runs_x : out.runs_y;
    if (e.cls != prev_cls) runs.emplace_back();
    runs.back().push_back(e.pos);
    prev_cls = e.cls;
  }
  return out;
}

// Estimates a disjoint convex hull decomposition: peel while the overlap
// strictly shrinks (each pass contributes the nonempty outside regions as one
// part per class), then split the residual overlap with the best of
// n_projections random 1-D projections, minimizing max(L1, L2) with ties
// broken by fewer total parts then lower draw index. n_projections = 0 falls
// back to singleton parts on the residual. Deterministic given the seed.
inline Decomposition estimate_decomposition(const PointSet& x_set,
                                            const PointSet& y_set,
                                            std::size_t n_projections,
                                            std::uint64_t seed) {
  if (x_set.empty() || y_set.empty())
    throw std::invalid_argument("estimate_decomposition: empty class");
  if (x_set.dim() != y_set.dim())
    throw std::invalid_argument("estimate_decomposition: dimension mismatch");
  const std::size_t d = x_set.dim();

  // Exact duplicates: within a class collapse to one representative; across
  // classes they violate disjointness and are a hard error.
  std::map<std::vector<double>, std::pair<int, std::size_t>> seen;
  std::vector<std::size_t> ux, uy;
  std::vector<std::pair<int, std::size_t>> dup_of;  // (class, representative)
  for (std::size_t i = 0; i < x_set.size(); ++i) {
    auto p = x_set[i];
    std::vector<double> key(p.begin(), p.end());
    auto [it, inserted] = seen.try_emplace(std::move(key), 0, i);
    if (inserted)
      ux.push_back(i);
    else if (it->second.first != 0)
      throw std::invalid_argument(
          "estimate_decomposition: a point appears in both classes");
    else
      dup_of.push_back({0, i});
  }
  for (std::size_t j = 0; j < y_set.size(); ++j) {
    auto p = y_set[j];
    std::vector<double> key(p.begin(), p.end());
    auto [it, inserted] = seen.try_emplace(std::move(key), 1, j);
    if (inserted)
      uy.push_back(j);
    else if (it->second.first != 1)
      throw std::invalid_argument(
          "estimate_decomposition: a point appears in both classes");
    else
      dup_of.push_back({1, j});
  }

  std::mt19937_64 rng(seed);
  Decomposition dec;
  dec.seed = seed;

  std::vector<std::size_t> cur_x = ux, cur_y = uy;
  std::size_t prev_size = ux.size() + uy.size() + 1;
  while (!cur_x.empty() && !cur_y.empty() &&
         cur_x.size() + cur_y.size() < prev_size) {
    prev_size = cur_x.size() + cur_y.size();
    auto mx = detail::mean_of(x_set, cur_x);
    auto my = detail::mean_of(y_set, cur_y);
    std::vector<double> dir(d);
    for (std::size_t k = 0; k < d; ++k) dir[k] = my[k] - mx[k];
    if (dot(dir, dir) == 0.0) dir = detail::random_unit_vector(d, rng);
    auto split = detail::peel_split(x_set, y_set, cur_x, cur_y, dir);
    if (split.outside_x.empty() && split.outside_y.empty()) break;
    if (!split.outside_x.empty()) dec.parts_x.push_back(std::move(split.outside_x));
    if (!split.outside_y.empty()) dec.parts_y.push_back(std::move(split.outside_y));
    cur_x = std::move(split.overlap_x);
    cur_y = std::move(split.overlap_y);
    ++dec.peel_iterations;
  }

  if (cur_x.empty() && cur_y.empty()) {
    // fully peeled
  } else if (cur_y.empty()) {
    dec.parts_x.push_back(cur_x);
  } else if (cur_x.empty()) {
    dec.parts_y.push_back(cur_y);
  } else if (n_projections == 0) {
    for (std::size_t i : cur_x) dec.parts_x.push_back({i});
    for (std::size_t j : cur_y) dec.parts_y.push_back({j});
  } else {
    std::vector<double> px(cur_x.size()), py(cur_y.size());
    RunsPartition best;
    std::size_t best_max = std::numeric_limits<std::size_t>::max();
    std::size_t best_total = best_max;
    bool found = false;
    for (std::size_t t = 0; t < n_projections; ++t) {
      const auto dir = detail::random_unit_vector(d, rng);
      for (std::size_t i = 0; i < cur_x.size(); ++i)
        px[i] = dot(dir, x_set[cur_x[i]]);
      for (std::size_t j = 0; j < cur_y.size(); ++j)
        py[j] = dot(dir, y_set[cur_y[j]]);
      auto runs = decompose_1d(px, py);
      if (runs.has_cross_tie) continue;  // touching 1-D hulls, unusable
      const std::size_t mx = std::max(runs.runs_x.size(), runs.runs_y.size());
      const std::size_t tot = runs.runs_x.size() + runs.runs_y.size();
      if (mx < best_max || (mx == best_max && tot < best_total)) {
        best = std::move(runs);
        best_max = mx;
        best_total = tot;
        found = true;
      }
    }
    dec.projections_used = n_projections;
    if (!found) {
      for (std::size_t i : cur_x) dec.parts_x.push_back({i});
      for (std::size_t j : cur_y) dec.parts_y.push_back({j});
    } else {
      for (const auto& run : best.runs_x) {
        std::vector<std::size_t> part;
        part.reserve(run.size());
        for (std::size_t pos : run) part.push_back(cur_x[pos]);
        dec.parts_x.push_back(std::move(part));
      }
      for (const auto& run : best.runs_y) {
        std::vector<std::size_t> part;
        part.reserve(run.size());
        for (std::size_t pos : run) part.push_back(cur_y[pos]);
        dec.parts_y.push_back(std::move(part));
      }
    }
  }

  // Re-attach exact duplicates to their representative's part.
  if (!dup_of.empty()) {
    std::map<std::vector<double>, std::pair<int, std::size_t>> part_of;
    for (std::size_t pi = 0; pi < dec.parts_x.size(); ++pi)
      for (std::size_t i : dec.parts_x[pi]) {
        auto p = x_set[i];
        part_of[{p.begin(), p.end()}] = {0, pi};
      }
    for (std::size_t pj = 0; pj < dec.parts_y.size(); ++pj)
      for (std::size_t j : dec.parts_y[pj]) {
        auto p = y_set[j];
        part_of[{p.begin(), p.end()}] = {1, pj};
      }
    for (const auto& [cls, idx] : dup_of) {
      auto p = cls == 0 ? x_set[idx] : y_set[idx];
      const auto it = part_of.find({p.begin(), p.end()});
      if (it == part_of.end())
        throw std::logic_error("estimate_decomposition: lost duplicate point");
      auto& parts = cls == 0 ? dec.parts_x : dec.parts_y;
      parts[it->second.second].push_back(idx);
    }
  }
  for (auto& part : dec.parts_x) std::sort(part.begin(), part.end());
  for (auto& part : dec.parts_y) std::sort(part.begin(), part.end());
  return dec;
}

struct DecompositionValidation {
  bool valid = false;
  double min_distance = 0.0;  // min over cross-class part pairs (the data's
                              // inter-hull gap for this decomposition)
  std::vector<double> pair_distances;  // row-major l1 x l2
  std::vector<std::array<std::size_t, 2>> failing_pairs;
};

// Checks every cross-class part pair for a hull gap above tol. This is the
// independent check that an estimated decomposition really is one.
inline DecompositionValidation validate_decomposition(const PointSet& x_set,
                                                      const PointSet& y_set,
                                                      const Decomposition& dec,
                                                      double tol = -1.0,
                                                      int threads = 1) {
  if (tol < 0.0) tol = separation_tolerance(x_set, y_set);
  DecompositionValidation out;
  const std::size_t l1 = dec.l1(), l2 = dec.l2();
  out.pair_distances.assign(l1 * l2, 0.0);

  std::vector<PointSet> xs, ys;
  xs.reserve(l1);
  ys.reserve(l2);
  for (const auto& part : dec.parts_x) xs.push_back(x_set.gather(part));
  for (const auto& part : dec.parts_y) ys.push_back(y_set.gather(part));

  parallel_for(l1 * l2, threads, [&](std::size_t idx) {
    const std::size_t i = idx / l2, j = idx % l2;
    out.pair_distances[idx] = hull_distance(xs[i], ys[j]).distance;
  });

  out.valid = true;
  out.min_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < l1; ++i)
    for (std::size_t j = 0; j < l2; ++j) {
      const double dist = out.pair_distances[i * l2 + j];
      out.min_distance = std::min(out.min_distance, dist);
      if (dist <= tol) {
        out.valid = false;
        out.failing_pairs.push_back({i, j});
      }
    }
  if (l1 * l2 == 0) out.min_distance = 0.0;
  return out;
}

}  // namespace hullnet
