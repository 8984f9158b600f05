#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hullnet {

using Point = std::vector<double>;

// Finite point set in R^d, row-major flat storage.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::size_t dim) : dim_(dim) {}

  static PointSet from_rows(const std::vector<std::vector<double>>& rows) {
    PointSet ps(rows.empty() ? 0 : rows.front().size());
    for (const auto& r : rows) ps.add(r);
    return ps;
  }

  void add(std::span<const double> p) {
    if (dim_ == 0 && data_.empty()) dim_ = p.size();
    if (p.size() != dim_)
      throw std::invalid_argument("PointSet::add: dimension mismatch (" +
                                  std::to_string(p.size()) + " vs " +
                                  std::to_string(dim_) + ")");
    for (double v : p)
      if (!std::isfinite(v))
        throw std::invalid_argument("PointSet::add: non-finite coordinate");
    data_.insert(data_.end(), p.begin(), p.end());
  }

  std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  bool empty() const { return data_.empty(); }

  std::span<const double> operator[](std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& mutable_data() { return data_; }

  PointSet gather(std::span<const std::size_t> indices) const {
    PointSet out(dim_);
    out.data_.reserve(indices.size() * dim_);
    for (std::size_t i : indices) out.add((*this)[i]);
    return out;
  }

 private:
  std::vector<double> data_;
  std::size_t dim_ = 0;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double squared_distance(std::span<const double> a,
                               std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double max_abs_coord(const PointSet& ps) {
  double m = 0.0;
  for (double v : ps.data()) m = std::max(m, std::abs(v));
  return m;
}

// Default threshold below which two hulls count as touching. "Disjoint" is
// exact in the math; floating point needs a data-scaled tolerance.
inline double separation_tolerance(const PointSet& a, const PointSet& b) {
  return 1e-9 * (1.0 + std::max(max_abs_coord(a), max_abs_coord(b)));
}

struct NotSeparableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Affine functional w.x + b. Sign convention everywhere: the first set of the
// defining pair lies on the nonpositive side.
struct SeparatorPlane {
  std::vector<double> normal;  // w, nonzero
  double offset = 0.0;         // b
  double margin = 0.0;         // Euclidean gap between the two hulls along normal/|normal|

  double value(std::span<const double> x) const {
    return dot(normal, x) + offset;
  }
};

struct HullDistanceResult {
  double distance = 0.0;
  Point witness_a;  // in C(A)
  Point witness_b;  // in C(B)
  bool converged = false;
  std::size_t iterations = 0;
};

namespace detail {

// Index of the extreme point of ps in direction dir (max of <dir, p>), or the
// min when maximize is false.
inline std::size_t support_index(const PointSet& ps, std::span<const double> dir,
                                 bool maximize) {
  const std::size_t n = ps.size(), d = ps.dim();
  const double* p = ps.data().data();
  std::size_t best = 0;
  double best_val = maximize ? -std::numeric_limits<double>::infinity()
                             : std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i, p += d) {
    double v = 0.0;
    for (std::size_t k = 0; k < d; ++k) v += dir[k] * p[k];
    if (maximize ? (v > best_val) : (v < best_val)) {
      best_val = v;
      best = i;
    }
  }
  return best;
}

// Solves the (k+1)x(k+1) dense system M x = rhs by Gaussian elimination with
// partial pivoting. Returns false if the pivot collapses.
inline bool solve_dense(std::vector<double> m, std::vector<double> rhs,
                        std::size_t n, std::vector<double>& out) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    double best = std::abs(m[col * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::abs(m[r * n + col]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best < 1e-300) return false;
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(m[piv * n + c], m[col * n + c]);
      std::swap(rhs[piv], rhs[col]);
    }
    const double inv = 1.0 / m[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = m[r * n + col] * inv;
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) m[r * n + c] -= f * m[col * n + c];
      rhs[r] -= f * rhs[col];
    }
  }
  out.assign(n, 0.0);
  for (std::size_t r = n; r-- > 0;) {
    double s = rhs[r];
    for (std::size_t c = r + 1; c < n; ++c) s -= m[r * n + c] * out[c];
    out[r] = s / m[r * n + r];
  }
  return true;
}

}  // namespace detail

// Minimum Euclidean distance between C(A) and C(B), with witness points as
// convex combinations of the inputs.
//
// Solver: min-norm point over the difference body {a - b | a in A, b in B}
// (Wolfe's method; the support-point oracle is the Gilbert/Frank-Wolfe step,
// the affine sub-solves give finite termination). Matrix-free over the input
// rows, so it only needs inner products per iteration.
//
// Stops when the duality gap drops below tol relative to the current
// distance, or at max_iter support steps (then converged=false with the best
// iterate so far). Distance 0 within tolerance iff the hulls intersect.
inline HullDistanceResult hull_distance(const PointSet& a_set,
                                        const PointSet& b_set,
                                        double tol = 1e-7,
                                        std::size_t max_iter = 10000) {
  if (a_set.empty() || b_set.empty())
    throw std::invalid_argument("hull_distance: empty operand");
  if (a_set.dim() != b_set.dim())
    throw std::invalid_argument("hull_distance: dimension mismatch");
  if (tol <= 0.0) throw std::invalid_argument("hull_distance: tol must be > 0");

  const std::size_t d = a_set.dim();
  const double scale = 1.0 + std::max(max_abs_coord(a_set), max_abs_coord(b_set));
  const double zero_eps2 = (1e-12 * scale) * (1e-12 * scale);

  struct Atom {
    std::size_t ia, ib;
  };
  std::vector<Atom> corral;
  std::vector<std::vector<double>> atom_vec;  // difference vectors
  std::vector<double> lambda;
  std::vector<double> gram;  // k x k, row-major

  auto atom_of = [&](std::size_t ia, std::size_t ib) {
    std::vector<double> p(d);
    auto pa = a_set[ia];
    auto pb = b_set[ib];
    for (std::size_t k = 0; k < d; ++k) p[k] = pa[k] - pb[k];
    return p;
  };

  auto push_atom = [&](std::size_t ia, std::size_t ib) {
    atom_vec.push_back(atom_of(ia, ib));
    corral.push_back({ia, ib});
    const std::size_t k = corral.size();
    std::vector<double> g(k * k, 0.0);
    for (std::size_t r = 0; r + 1 < k; ++r)
      for (std::size_t c = 0; c + 1 < k; ++c) g[r * k + c] = gram[r * (k - 1) + c];
    for (std::size_t r = 0; r < k; ++r) {
      const double v = dot(atom_vec[r], atom_vec[k - 1]);
      g[r * k + (k - 1)] = v;
      g[(k - 1) * k + r] = v;
    }
    gram.swap(g);
  };

  auto drop_atoms = [&](const std::vector<char>& keep) {
    const std::size_t k = corral.size();
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < k; ++i)
      if (keep[i]) idx.push_back(i);
    const std::size_t k2 = idx.size();
    std::vector<double> g(k2 * k2);
    for (std::size_t r = 0; r < k2; ++r)
      for (std::size_t c = 0; c < k2; ++c) g[r * k2 + c] = gram[idx[r] * k + idx[c]];
    gram.swap(g);
    auto compact = [&](auto& vec) {
      for (std::size_t i = 0; i < k2; ++i) vec[i] = std::move(vec[idx[i]]);
      vec.resize(k2);
    };
    compact(corral);
    compact(atom_vec);
    std::vector<double> l2(k2);
    for (std::size_t i = 0; i < k2; ++i) l2[i] = lambda[idx[i]];
    lambda.swap(l2);
  };

  // Initial atom: support in the mean-difference direction.
  {
    std::vector<double> dir(d, 0.0);
    for (std::size_t i = 0; i < a_set.size(); ++i) {
      auto p = a_set[i];
      for (std::size_t k = 0; k < d; ++k) dir[k] += p[k] / double(a_set.size());
    }
    for (std::size_t i = 0; i < b_set.size(); ++i) {
      auto p = b_set[i];
      for (std::size_t k = 0; k < d; ++k) dir[k] -= p[k] / double(b_set.size());
    }
    if (dot(dir, dir) == 0.0) dir[0] = 1.0;
    const std::size_t ia = detail::support_index(a_set, dir, false);
    const std::size_t ib = detail::support_index(b_set, dir, true);
    push_atom(ia, ib);
    lambda = {1.0};
  }

  std::vector<double> v = atom_vec[0];
  auto recompute_v = [&] {
    std::fill(v.begin(), v.end(), 0.0);
    for (std::size_t i = 0; i < corral.size(); ++i)
      for (std::size_t k = 0; k < d; ++k) v[k] += lambda[i] * atom_vec[i][k];
  };

  HullDistanceResult res;
  bool converged = false;
  std::size_t iter = 0;

  for (; iter < max_iter; ++iter) {
    const double vv = dot(v, v);
    if (vv <= zero_eps2) {
      converged = true;  // hulls intersect (within fp)
      break;
    }
    const std::size_t ia = detail::support_index(a_set, v, false);
    const std::size_t ib = detail::support_index(b_set, v, true);
    const std::vector<double> p = atom_of(ia, ib);
    const double vp = dot(v, p);

    const double dist = std::sqrt(vv);
    const double lower = vp / dist;
    if (dist - std::max(lower, 0.0) <= tol * (1.0 + dist)) {
      converged = true;
      break;
    }
    bool already = false;
    for (const auto& at : corral)
      if (at.ia == ia && at.ib == ib) {
        already = true;
        break;
      }
    if (already) {
      converged = true;  // cannot improve further at fp resolution
      break;
    }
    push_atom(ia, ib);
    lambda.push_back(0.0);

    // Minor cycles: pull v to the min-norm point of the corral's convex hull,
    // dropping atoms whose weight hits zero.
    while (true) {
      const std::size_t k = corral.size();
      const std::size_t n = k + 1;
      double trace = 0.0;
      for (std::size_t i = 0; i < k; ++i) trace += gram[i * k + i];
      // Affine min-norm weights over the corral: KKT system with the Gram
      // matrix. Solved plain first; a tiny ridge only on failure (affinely
      // dependent atoms), so exact zero distances stay exact.
      std::vector<double> sol;
      bool ok = false;
      for (double ridge : {0.0, 1e-13 * (trace / double(k) + 1.0)}) {
        std::vector<double> m(n * n, 0.0), rhs(n, 0.0);
        for (std::size_t r = 0; r < k; ++r) {
          for (std::size_t c = 0; c < k; ++c) m[r * n + c] = gram[r * k + c];
          m[r * n + r] += ridge;
          m[r * n + k] = 1.0;
          m[k * n + r] = 1.0;
        }
        rhs[k] = 1.0;
        if (!detail::solve_dense(std::move(m), std::move(rhs), n, sol)) continue;
        ok = true;
        for (double w : sol) {
          if (!std::isfinite(w) || std::abs(w) > 1e12) {
            ok = false;
            break;
          }
        }
        if (ok) break;
      }
      if (!ok) break;  // degenerate corral beyond repair; keep current v
      sol.resize(k);   // affine weights
      bool feasible = true;
      for (double w : sol)
        if (w < -1e-12) {
          feasible = false;
          break;
        }
      if (feasible) {
        for (std::size_t i = 0; i < k; ++i) lambda[i] = std::max(sol[i], 0.0);
        double s = std::accumulate(lambda.begin(), lambda.end(), 0.0);
        for (auto& l : lambda) l /= s;
        recompute_v();
        break;
      }
      double theta = 1.0;
      for (std::size_t i = 0; i < k; ++i)
        if (sol[i] < 1e-14 && lambda[i] > sol[i])
          theta = std::min(theta, lambda[i] / (lambda[i] - sol[i]));
      theta = std::clamp(theta, 0.0, 1.0);
      std::vector<char> keep(k, 1);
      bool dropped = false;
      for (std::size_t i = 0; i < k; ++i) {
        lambda[i] = (1.0 - theta) * lambda[i] + theta * sol[i];
        if (lambda[i] <= 1e-14) {
          keep[i] = 0;
          dropped = true;
        }
      }
      if (!dropped) keep[std::min_element(lambda.begin(), lambda.end()) - lambda.begin()] = 0;
      drop_atoms(keep);
      double s = std::accumulate(lambda.begin(), lambda.end(), 0.0);
      if (s <= 0.0) {  // should not happen; restart from the last atom
        lambda.assign(corral.size(), 1.0 / double(corral.size()));
      } else {
        for (auto& l : lambda) l /= s;
      }
      recompute_v();
      if (corral.size() <= 1) break;
    }
  }

  res.iterations = iter;
  res.converged = converged;
  res.witness_a.assign(d, 0.0);
  res.witness_b.assign(d, 0.0);
  for (std::size_t i = 0; i < corral.size(); ++i) {
    auto pa = a_set[corral[i].ia];
    auto pb = b_set[corral[i].ib];
    for (std::size_t k = 0; k < d; ++k) {
      res.witness_a[k] += lambda[i] * pa[k];
      res.witness_b[k] += lambda[i] * pb[k];
    }
  }
  res.distance = std::sqrt(squared_distance(res.witness_a, res.witness_b));
  if (res.distance * res.distance <= zero_eps2) res.distance = 0.0;
  return res;
}

// Maximum-margin separating hyperplane. Normal is the unit vector from the
// A-side witness to the B-side witness; offset places the plane midway
// between the extreme functional values, so A sits strictly negative and B
// strictly positive. Throws NotSeparableError when the hulls are not
// separated beyond tol (the caller must refine its decomposition).
inline SeparatorPlane max_margin_separator(const PointSet& a_set,
                                           const PointSet& b_set,
                                           double tol = -1.0) {
  if (tol < 0.0) tol = separation_tolerance(a_set, b_set);
  const auto hd = hull_distance(a_set, b_set);
  if (hd.distance <= tol)
    throw NotSeparableError("max_margin_separator: hull distance " +
                            std::to_string(hd.distance) +
                            " is within tolerance " + std::to_string(tol));
  const std::size_t d = a_set.dim();
  SeparatorPlane plane;
  plane.normal.resize(d);
  for (std::size_t k = 0; k < d; ++k)
    plane.normal[k] = hd.witness_b[k] - hd.witness_a[k];
  const double len = norm(plane.normal);
  for (auto& w : plane.normal) w /= len;

  double max_a = -std::numeric_limits<double>::infinity();
  double min_b = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a_set.size(); ++i)
    max_a = std::max(max_a, dot(plane.normal, a_set[i]));
  for (std::size_t i = 0; i < b_set.size(); ++i)
    min_b = std::min(min_b, dot(plane.normal, b_set[i]));
  if (min_b - max_a <= 0.0)
    throw NotSeparableError(
        "max_margin_separator: witness direction does not separate the sets");
  plane.offset = -0.5 * (max_a + min_b);
  plane.margin = min_b - max_a;
  return plane;
}

// True iff p lies within tol of C(A).
inline bool point_in_hull(std::span<const double> p, const PointSet& a_set,
                          double tol = -1.0) {
  if (p.size() != a_set.dim())
    throw std::invalid_argument("point_in_hull: dimension mismatch");
  PointSet single(p.size());
  single.add(p);
  if (tol < 0.0) tol = separation_tolerance(single, a_set);
  return hull_distance(single, a_set).distance <= tol;
}

enum class Separability {
  linearly_separable,
  convexly_separable,
  convexly_inseparable_candidate,
};

inline const char* to_string(Separability s) {
  switch (s) {
    case Separability::linearly_separable: return "linearly_separable";
    case Separability::convexly_separable: return "convexly_separable";
    default: return "convexly_inseparable_candidate";
  }
}

// Classifies the pair: hulls disjoint => linearly separable; otherwise
// convexly separable when at least one class keeps all its points out of the
// other's hull. Inseparability over all decompositions is not decided here;
// the third value is only a candidate flag.
inline Separability separability_class(const PointSet& a_set,
                                       const PointSet& b_set,
                                       double tol = -1.0) {
  if (a_set.dim() != b_set.dim())
    throw std::invalid_argument("separability_class: dimension mismatch");
  for (std::size_t i = 0; i < a_set.size(); ++i)
    for (std::size_t j = 0; j < b_set.size(); ++j)
      if (squared_distance(a_set[i], b_set[j]) == 0.0)
        throw std::invalid_argument(
            "separability_class: sets share a point; inputs must be disjoint");
  if (tol < 0.0) tol = separation_tolerance(a_set, b_set);
  if (hull_distance(a_set, b_set).distance > tol)
    return Separability::linearly_separable;
  bool b_outside_a = true;
  for (std::size_t j = 0; j < b_set.size() && b_outside_a; ++j)
    if (point_in_hull(b_set[j], a_set, tol)) b_outside_a = false;
  if (b_outside_a) return Separability::convexly_separable;
  bool a_outside_b = true;
  for (std::size_t i = 0; i < a_set.size() && a_outside_b; ++i)
    if (point_in_hull(a_set[i], b_set, tol)) a_outside_b = false;
  if (a_outside_b) return Separability::convexly_separable;
  return Separability::convexly_inseparable_candidate;
}

inline std::vector<double> project_1d(const PointSet& a_set,
                                      std::span<const double> direction) {
  if (direction.size() != a_set.dim())
    throw std::invalid_argument("project_1d: dimension mismatch");
  if (dot(direction, direction) == 0.0)
    throw std::invalid_argument("project_1d: zero direction");
  std::vector<double> out(a_set.size());
  for (std::size_t i = 0; i < a_set.size(); ++i)
    out[i] = dot(direction, a_set[i]);
  return out;
}

// Exact pairwise scan.
inline double diameter(const PointSet& a_set) {
  if (a_set.empty()) throw std::invalid_argument("diameter: empty set");
  const std::size_t n = a_set.size();
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      best = std::max(best, squared_distance(a_set[i], a_set[j]));
  return std::sqrt(best);
}

}  // namespace hullnet

#include "hullnet/parallel.hpp"

namespace hullnet {

// Same exact scan, rows split across threads.
inline double diameter(const PointSet& a_set, int threads) {
  if (threads <= 1) return diameter(a_set);
  if (a_set.empty()) throw std::invalid_argument("diameter: empty set");
  const std::size_t n = a_set.size();
  std::vector<double> best(threads, 0.0);
  parallel_for(threads, threads, [&](std::size_t t) {
    double local = 0.0;
    for (std::size_t i = t; i < n; i += std::size_t(threads))
      for (std::size_t j = i + 1; j < n; ++j)
        local = std::max(local, squared_distance(a_set[i], a_set[j]));
    best[t] = local;
  });
  double m = 0.0;
  for (double v : best) m = std::max(m, v);
  return std::sqrt(m);
}

}  // namespace hullnet
