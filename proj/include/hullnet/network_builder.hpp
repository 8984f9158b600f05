#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hullnet/activation.hpp"
#include "hullnet/decomposition.hpp"
#include "hullnet/geometry.hpp"
#include "hullnet/parallel.hpp"

namespace hullnet {

struct LayerAffine {
  std::size_t out_dim = 0, in_dim = 0;
  std::vector<double> weights;  // row-major out_dim x in_dim
  std::vector<double> biases;

  void apply(std::span<const double> x, std::span<double> out) const {
    for (std::size_t r = 0; r < out_dim; ++r) {
      const double* w = weights.data() + r * in_dim;
      double s = biases[r];
      for (std::size_t k = 0; k < in_dim; ++k) s += w[k] * x[k];
      out[r] = s;
    }
  }

  // Pre-activation images of every point.
  PointSet forward(const PointSet& in) const {
    if (in.dim() != in_dim)
      throw std::invalid_argument("LayerAffine::forward: dimension mismatch");
    PointSet out(out_dim);
    std::vector<double> row(out_dim);
    for (std::size_t i = 0; i < in.size(); ++i) {
      apply(in[i], row);
      out.add(row);
    }
    return out;
  }

  void set_row(std::size_t r, const SeparatorPlane& plane) {
    std::copy(plane.normal.begin(), plane.normal.end(),
              weights.begin() + r * in_dim);
    biases[r] = plane.offset;
  }
};

// Element-wise activation of the affine map applied to every point.
inline PointSet forward_images(const LayerAffine& layer, const ActivationSpec& act,
                               const PointSet& in) {
  PointSet pre = layer.forward(in);
  auto& data = pre.mutable_data();
  for (auto& v : data) v = act.eval(v);
  return pre;
}

// Rescales and shifts a separating functional so that its maximum over A is
// exactly x0 and its minimum over B is exactly x0 + delta. The input plane
// must strictly separate A (negative side) from B.
inline SeparatorPlane calibrate_plane(const SeparatorPlane& plane,
                                      const PointSet& a_set, const PointSet& b_set,
                                      double x0, double delta) {
  if (delta <= 0.0)
    throw std::invalid_argument("calibrate_plane: delta must be > 0");
  double max_a = -std::numeric_limits<double>::infinity();
  double min_b = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a_set.size(); ++i)
    max_a = std::max(max_a, plane.value(a_set[i]));
  for (std::size_t j = 0; j < b_set.size(); ++j)
    min_b = std::min(min_b, plane.value(b_set[j]));
  const double gap = min_b - max_a;
  if (gap <= 0.0)
    throw NotSeparableError("calibrate_plane: input plane does not separate");
  const double s = delta / gap;
  SeparatorPlane out;
  out.normal.resize(plane.normal.size());
  for (std::size_t k = 0; k < plane.normal.size(); ++k)
    out.normal[k] = s * plane.normal[k];
  out.offset = s * plane.offset + (x0 - s * max_a);
  out.margin = plane.margin;
  return out;
}

// First hidden layer: one calibrated max-margin classifier per part pair,
// row (i, j) at index i*L2 + j. Class-1 parts sit at x0 (nonpositive role),
// class-2 parts at or beyond x0 + delta.
inline LayerAffine build_first_layer(const PointSet& x_set, const PointSet& y_set,
                                     const Decomposition& dec,
                                     const MarginCertificate& cert,
                                     int threads = 1) {
  const std::size_t l1 = dec.l1(), l2 = dec.l2();
  LayerAffine layer;
  layer.in_dim = x_set.dim();
  layer.out_dim = l1 * l2;
  layer.weights.assign(layer.out_dim * layer.in_dim, 0.0);
  layer.biases.assign(layer.out_dim, 0.0);

  std::vector<PointSet> xs, ys;
  for (const auto& part : dec.parts_x) xs.push_back(x_set.gather(part));
  for (const auto& part : dec.parts_y) ys.push_back(y_set.gather(part));

  parallel_for(l1 * l2, threads, [&](std::size_t idx) {
    const std::size_t i = idx / l2, j = idx % l2;
    try {
      const auto raw = max_margin_separator(xs[i], ys[j]);
      layer.set_row(idx, calibrate_plane(raw, xs[i], ys[j], cert.x0, cert.delta));
    } catch (const NotSeparableError& e) {
      throw NotSeparableError("first layer pair (" + std::to_string(i) + ", " +
                              std::to_string(j) +
                              "): decomposition is not valid: " + e.what());
    }
  });
  return layer;
}

// Second hidden layer: one row per class-1 part. The class-2 image hull takes
// the nonpositive role so that, after activation, class-2 lands in the small
// hypercube and class-1 outside it. The max-margin call doubles as the
// numeric check that the first layer really separated the image hulls.
inline LayerAffine build_second_layer(const std::vector<PointSet>& z1_parts,
                                      const PointSet& z2,
                                      const MarginCertificate& cert,
                                      int threads = 1) {
  if (z1_parts.empty())
    throw std::invalid_argument("build_second_layer: no class-1 parts");
  LayerAffine layer;
  layer.in_dim = z2.dim();
  layer.out_dim = z1_parts.size();
  layer.weights.assign(layer.out_dim * layer.in_dim, 0.0);
  layer.biases.assign(layer.out_dim, 0.0);
  parallel_for(z1_parts.size(), threads, [&](std::size_t i) {
    try {
      const auto raw = max_margin_separator(z2, z1_parts[i]);
      layer.set_row(i, calibrate_plane(raw, z2, z1_parts[i], cert.x0, cert.delta));
    } catch (const NotSeparableError& e) {
      throw NotSeparableError(
          "second layer: class-2 image hull meets class-1 image part " +
          std::to_string(i) + ": " + e.what());
    }
  });
  return layer;
}

// Output hyperplane over the final images. The analytic choice is the
// all-ones functional thresholded from the certificate bounds (small-cube
// class negative); if floating-point slack leaves any point on the wrong
// side, the threshold moves to the measured midpoint, and as a last resort
// the plane is replaced by a max-margin separator on the final images.
inline SeparatorPlane output_plane(const PointSet& final_outside,
                                   const PointSet& final_cube,
                                   const MarginCertificate& cert,
                                   const ActivationSpec& act) {
  if (final_outside.empty() || final_cube.empty())
    throw std::invalid_argument("output_plane: empty image set");
  const std::size_t d = final_cube.dim();
  const double inv_len = 1.0 / std::sqrt(double(d));

  double max_cube = -std::numeric_limits<double>::infinity();
  double min_out = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < final_cube.size(); ++i) {
    double s = 0.0;
    for (double v : final_cube[i]) s += v;
    max_cube = std::max(max_cube, s);
  }
  for (std::size_t i = 0; i < final_outside.size(); ++i) {
    double s = 0.0;
    for (double v : final_outside[i]) s += v;
    min_out = std::min(min_out, s);
  }

  double theta;
  if (act.kind == Activation::leaky_relu) {
    theta = 0.0;  // cube side sums are nonpositive, far side strictly positive
  } else {
    theta = double(d) * (cert.epsilon + act.left_asymptote());
  }
  if (!(max_cube < theta && theta < min_out)) {
    if (max_cube < min_out) {
      theta = 0.5 * (max_cube + min_out);
    } else {
      return max_margin_separator(final_cube, final_outside);
    }
  }
  SeparatorPlane plane;
  plane.normal.assign(d, inv_len);
  plane.offset = -theta * inv_len;
  plane.margin = (min_out - max_cube) * inv_len;
  return plane;
}

struct SeparationReport {
  bool all_correct = false;
  std::vector<std::size_t> misclassified;  // class-1 points as 0..|X|-1,
                                           // class-2 points offset by |X|
  double final_hull_distance = 0.0;
  double epsilon_1 = 0.0, epsilon_2 = 0.0;
  double delta_used_1 = 0.0, delta_used_2 = 0.0;
};

struct ConstructOptions {
  double slack = 0.1;
  double user_delta = 0.0;       // floor for the imposed per-layer gap
  bool leaky_auto_slope = true;  // shrink the negative slope when the slope
                                 // ratio cannot satisfy the margin condition
  int threads = 1;
  int max_slope_rounds = 8;
};

// Explicit two-hidden-layer network together with its separation evidence.
struct ConstructedNetwork {
  LayerAffine layer1;  // l1*l2 rows
  LayerAffine layer2;  // l1 rows
  SeparatorPlane plane;  // over the final images; class 2 on the negative side
  ActivationSpec activation;  // as used in the network
  std::optional<ActivationSpec> requested_activation;  // set when adapted
  MarginCertificate cert1, cert2;
  Decomposition decomposition;
  std::size_t in_dim = 0;

  std::vector<double> forward(std::span<const double> x) const {
    std::vector<double> h1(layer1.out_dim), h2(layer2.out_dim);
    layer1.apply(x, h1);
    for (auto& v : h1) v = activation.eval(v);
    layer2.apply(h1, h2);
    for (auto& v : h2) v = activation.eval(v);
    return h2;
  }
};

struct ConstructionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline PointSet concat(const PointSet& a, const PointSet& b) {
  PointSet out(a.dim());
  for (std::size_t i = 0; i < a.size(); ++i) out.add(a[i]);
  for (std::size_t i = 0; i < b.size(); ++i) out.add(b[i]);
  return out;
}

// Largest negative slope for which the leaky margin condition
// D*c1/(delta*c2 + D*c1) <= (1-slack)/L holds at the measured image geometry.
inline double leaky_slope_bound(double pos_slope, double delta, double big_d,
                                std::size_t parts, double slack) {
  const double l = static_cast<double>(parts);
  const double denom = big_d * (l - (1.0 - slack));
  if (denom <= 0.0) return pos_slope;  // condition vacuous
  return pos_slope * delta * (1.0 - slack) / denom;
}

}  // namespace detail

// Builds the full construction: per-pair calibrated max-margin classifiers
// (l1*l2 rows), a second layer of l1 rows over the first-layer images, and
// the output plane, with margin certificates solved per layer. The per-layer
// gap is imposed through calibration scaling, so the construction never
// depends on the raw data gap being large.
//
// For the leaky kind the required gap/diameter ratio is scale-invariant, so
// no weight scaling can fix an infeasible slope pair. When the user's slopes
// violate the condition and leaky_auto_slope is set, the negative slope is
// shrunk to the measured bound (with slack) and the build restarts; the
// resulting network still uses a leaky activation, with the adjustment
// recorded in requested_activation.
inline ConstructedNetwork construct(const PointSet& x_set, const PointSet& y_set,
                                    const Decomposition& dec,
                                    const ActivationSpec& requested,
                                    const ConstructOptions& opts = {}) {
  if (dec.l1() == 0 || dec.l2() == 0)
    throw std::invalid_argument("construct: decomposition has no parts");
  const std::size_t l1 = dec.l1(), l2 = dec.l2();

  ConstructedNetwork net;
  net.decomposition = dec;
  net.in_dim = x_set.dim();
  ActivationSpec act = requested;

  const PointSet all_points = detail::concat(x_set, y_set);
  const bool leaky = requested.kind == Activation::leaky_relu;
  const int rounds = leaky ? std::max(1, opts.max_slope_rounds) : 1;

  for (int round = 0; round < rounds; ++round) {
    // Layer 1: certificates are solved for the class-2 part count.
    double delta1;
    if (leaky) {
      delta1 = opts.user_delta > 0.0 ? opts.user_delta : 1.0;
      net.cert1 = MarginCertificate{0.0, delta1, 0.0, l2, 0.0};
    } else {
      delta1 = std::max(opts.user_delta, feasible_delta(act, l2, opts.slack));
      net.cert1 = solve_x0(act, delta1, l2, opts.slack);
    }
    net.layer1 = build_first_layer(x_set, y_set, dec, net.cert1, opts.threads);

    if (leaky) {
      const double d1 = diameter(net.layer1.forward(all_points));
      try {
        net.cert1 = solve_x0(act, delta1, l2, opts.slack, d1);
      } catch (const DeltaTooSmallError&) {
        const double bound = detail::leaky_slope_bound(act.pos_slope, delta1, d1,
                                                       l2, opts.slack);
        if (!opts.leaky_auto_slope || round + 1 >= rounds)
          throw ConstructionError(
              "construct: leaky slope ratio infeasible for the first layer; "
              "need neg_slope <= " + std::to_string(bound));
        act = ActivationSpec::make_leaky(
            std::min(act.neg_slope, bound / (1.0 + opts.slack)), act.pos_slope);
        continue;
      }
    }

    const PointSet z_x = forward_images(net.layer1, act, x_set);
    const PointSet z_y = forward_images(net.layer1, act, y_set);
    std::vector<PointSet> z1_parts;
    z1_parts.reserve(l1);
    for (const auto& part : dec.parts_x) z1_parts.push_back(z_x.gather(part));

    // Layer 2: roles swap, certificates solved for the class-1 part count.
    double delta2;
    if (leaky) {
      delta2 = opts.user_delta > 0.0 ? opts.user_delta : 1.0;
      net.cert2 = MarginCertificate{0.0, delta2, 0.0, l1, 0.0};
    } else {
      delta2 = std::max(opts.user_delta, feasible_delta(act, l1, opts.slack));
      net.cert2 = solve_x0(act, delta2, l1, opts.slack);
    }
    net.layer2 = build_second_layer(z1_parts, z_y, net.cert2, opts.threads);

    if (leaky) {
      const double d2 =
          diameter(net.layer2.forward(detail::concat(z_x, z_y)));
      try {
        net.cert2 = solve_x0(act, delta2, l1, opts.slack, d2);
      } catch (const DeltaTooSmallError&) {
        const double bound = detail::leaky_slope_bound(act.pos_slope, delta2, d2,
                                                       l1, opts.slack);
        if (!opts.leaky_auto_slope || round + 1 >= rounds)
          throw ConstructionError(
              "construct: leaky slope ratio infeasible for the second layer; "
              "need neg_slope <= " + std::to_string(bound));
        act = ActivationSpec::make_leaky(
            std::min(act.neg_slope, bound / (1.0 + opts.slack)), act.pos_slope);
        continue;
      }
    }

    const PointSet f_x = forward_images(net.layer2, act, z_x);
    const PointSet f_y = forward_images(net.layer2, act, z_y);
    net.plane = output_plane(f_x, f_y, net.cert2, act);
    net.activation = act;
    if (leaky && act.neg_slope != requested.neg_slope)
      net.requested_activation = requested;
    return net;
  }
  throw ConstructionError("construct: slope adaptation did not settle");
}

// Forward-maps every training point and applies the output plane sign:
// class 1 must land strictly positive, class 2 strictly negative. Also
// reports the hull distance of the two final image sets.
inline SeparationReport verify_separation(const ConstructedNetwork& net,
                                          const PointSet& x_set,
                                          const PointSet& y_set) {
  if (x_set.dim() != net.in_dim || y_set.dim() != net.in_dim)
    throw std::invalid_argument("verify_separation: dimension mismatch");
  SeparationReport rep;
  rep.epsilon_1 = net.cert1.epsilon;
  rep.epsilon_2 = net.cert2.epsilon;
  rep.delta_used_1 = net.cert1.delta;
  rep.delta_used_2 = net.cert2.delta;

  PointSet f_x(net.layer2.out_dim), f_y(net.layer2.out_dim);
  for (std::size_t i = 0; i < x_set.size(); ++i) {
    const auto z = net.forward(x_set[i]);
    if (!(net.plane.value(z) > 0.0)) rep.misclassified.push_back(i);
    f_x.add(z);
  }
  for (std::size_t j = 0; j < y_set.size(); ++j) {
    const auto z = net.forward(y_set[j]);
    if (!(net.plane.value(z) < 0.0))
      rep.misclassified.push_back(x_set.size() + j);
    f_y.add(z);
  }
  rep.all_correct = rep.misclassified.empty();
  rep.final_hull_distance = hull_distance(f_x, f_y).distance;
  return rep;
}

}  // namespace hullnet
