#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace hullnet {

enum class Activation { sigmoid, tanh, relu, leaky_relu };

// Activation function plus the constants the margin analysis needs: the left
// asymptote for the saturating kinds, the two slopes for the leaky kind.
struct ActivationSpec {
  Activation kind = Activation::relu;
  double neg_slope = 0.2;  // leaky only, slope for x <= 0
  double pos_slope = 1.0;  // leaky only, slope for x >= 0

  static ActivationSpec make_sigmoid() { return {Activation::sigmoid}; }
  static ActivationSpec make_tanh() { return {Activation::tanh}; }
  static ActivationSpec make_relu() { return {Activation::relu}; }
  static ActivationSpec make_leaky(double neg, double pos) {
    if (!(pos > neg && neg > 0.0))
      throw std::invalid_argument("leaky_relu requires pos_slope > neg_slope > 0");
    ActivationSpec a{Activation::leaky_relu};
    a.neg_slope = neg;
    a.pos_slope = pos;
    return a;
  }

  bool has_left_asymptote() const { return kind != Activation::leaky_relu; }

  double left_asymptote() const {
    switch (kind) {
      case Activation::sigmoid: return 0.0;
      case Activation::tanh: return -1.0;
      case Activation::relu: return 0.0;
      default:
        throw std::logic_error("leaky_relu has no left asymptote");
    }
  }

  double eval(double x) const {
    switch (kind) {
      case Activation::sigmoid: return stable_sigmoid(x);
      case Activation::tanh: return std::tanh(x);
      case Activation::relu: return x > 0.0 ? x : 0.0;
      default: return x > 0.0 ? pos_slope * x : neg_slope * x;
    }
  }

  // f(x) - left asymptote, computed without cancellation. tanh(x)+1 evaluated
  // directly underflows to 0 for x below about -19, which would break ratio
  // computations deep in the tail; 2*sigmoid(2x) is exact there.
  double shifted_eval(double x) const {
    switch (kind) {
      case Activation::sigmoid: return stable_sigmoid(x);
      case Activation::tanh: return 2.0 * stable_sigmoid(2.0 * x);
      case Activation::relu: return x > 0.0 ? x : 0.0;
      default:
        throw std::logic_error("shifted_eval: leaky_relu has no left asymptote");
    }
  }

  double derivative(double x) const {
    switch (kind) {
      case Activation::sigmoid: {
        const double s = stable_sigmoid(x);
        return s * (1.0 - s);
      }
      case Activation::tanh: {
        const double t = std::tanh(x);
        return 1.0 - t * t;
      }
      case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
      default: return x > 0.0 ? pos_slope : neg_slope;
    }
  }

  std::string name() const {
    switch (kind) {
      case Activation::sigmoid: return "sigmoid";
      case Activation::tanh: return "tanh";
      case Activation::relu: return "relu";
      default:
        return "leaky_relu:" + format_slope(neg_slope) + ":" + format_slope(pos_slope);
    }
  }

  // Accepts "sigmoid", "tanh", "relu", "leaky_relu[:<neg>:<pos>]".
  static ActivationSpec parse(const std::string& s) {
    if (s == "sigmoid") return make_sigmoid();
    if (s == "tanh") return make_tanh();
    if (s == "relu") return make_relu();
    if (s.rfind("leaky_relu", 0) == 0) {
      double neg = 0.2, pos = 1.0;
      if (s.size() > 10) {
        if (s[10] != ':')
          throw std::invalid_argument("bad activation spec: " + s);
        const auto rest = s.substr(11);
        const auto colon = rest.find(':');
        if (colon == std::string::npos)
          throw std::invalid_argument("leaky_relu needs two slopes: " + s);
        neg = std::stod(rest.substr(0, colon));
        pos = std::stod(rest.substr(colon + 1));
      }
      return make_leaky(neg, pos);
    }
    throw std::invalid_argument("unknown activation: " + s);
  }

 private:
  static double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  }

  static std::string format_slope(double v) {
    std::string s = std::to_string(v);
    while (s.size() > 1 && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }
};

// (f(x0) - c) / (f(x0 + delta) - c) for kinds with a left asymptote c.
// 0/0 is defined as 0.
inline double shifted_ratio(const ActivationSpec& a, double x0, double delta) {
  if (!a.has_left_asymptote())
    throw std::invalid_argument("shifted_ratio: use leaky_ratio for leaky_relu");
  if (delta <= 0.0) throw std::invalid_argument("shifted_ratio: delta must be > 0");
  const double num = a.shifted_eval(x0);
  const double den = a.shifted_eval(x0 + delta);
  if (num == 0.0 && den == 0.0) return 0.0;
  return num / den;
}

// (f(x0) - f(x0-D)) / (f(x0+delta) - f(x0-D)) for the leaky kind. The infimum
// over x0 sits at the kink x0 = 0.
inline double leaky_ratio(const ActivationSpec& a, double x0, double delta,
                          double big_d) {
  if (a.kind != Activation::leaky_relu)
    throw std::invalid_argument("leaky_ratio: activation is not leaky_relu");
  if (delta <= 0.0) throw std::invalid_argument("leaky_ratio: delta must be > 0");
  if (big_d < 0.0) throw std::invalid_argument("leaky_ratio: D must be >= 0");
  const double num = a.eval(x0) - a.eval(x0 - big_d);
  const double den = a.eval(x0 + delta) - a.eval(x0 - big_d);
  if (num == 0.0 && den == 0.0) return 0.0;
  return num / den;
}

// Smallest hull gap delta for which a margin certificate with L parts exists:
// sigmoid ln L, tanh (1/2) ln L, relu 0, leaky (L-1) * D * neg/pos (from
// requiring D*c1 / (delta*c2 + D*c1) < 1/L).
inline double min_delta(const ActivationSpec& a, std::size_t parts,
                        std::optional<double> big_d = std::nullopt) {
  if (parts == 0) throw std::invalid_argument("min_delta: L must be >= 1");
  const double l = static_cast<double>(parts);
  switch (a.kind) {
    case Activation::sigmoid: return std::log(l);
    case Activation::tanh: return 0.5 * std::log(l);
    case Activation::relu: return 0.0;
    default:
      if (!big_d) throw std::invalid_argument("min_delta: leaky_relu needs D");
      return (l - 1.0) * (*big_d) * a.neg_slope / a.pos_slope;
  }
}

// Threshold certificate: pre-activations at or below x0 land within epsilon
// of the asymptote, pre-activations at or above x0 + delta map strictly above
// parts * epsilon. For the leaky kind the window is [x0 - D, x0] mapping into
// [-epsilon, 0] with the far side above (parts - 1) * epsilon.
struct MarginCertificate {
  double x0 = 0.0;
  double delta = 0.0;
  double epsilon = 0.0;
  std::size_t parts = 1;  // the L this certificate serves
  double ratio = 0.0;     // achieved ratio, strictly below 1/parts
};

struct DeltaTooSmallError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Gap value at which solve_x0 succeeds with the given slack, with headroom.
inline double feasible_delta(const ActivationSpec& a, std::size_t parts,
                             double slack, double big_d = 0.0) {
  if (parts == 0) throw std::invalid_argument("feasible_delta: L must be >= 1");
  const double l = static_cast<double>(parts);
  const double lifted = l / (1.0 - slack);
  switch (a.kind) {
    case Activation::sigmoid: return std::log(lifted) * (1.0 + slack);
    case Activation::tanh: return 0.5 * std::log(lifted) * (1.0 + slack);
    case Activation::relu: return 1.0;
    default:
      return big_d * (a.neg_slope / a.pos_slope) * (lifted - 1.0) * (1.0 + slack);
  }
}

// Finds x0 with shifted_ratio(a, x0, delta) <= (1 - slack)/parts. The ratio is
// monotone increasing in x0 for sigmoid and tanh, so bisection applies; relu
// takes x0 = 0 with epsilon = delta/(L(1+slack)); leaky takes the kink x0 = 0
// with epsilon = -f(-D). Throws DeltaTooSmallError when no x0 can reach the
// target (the caller must enlarge delta, which calibration scaling permits).
inline MarginCertificate solve_x0(const ActivationSpec& a, double delta,
                                  std::size_t parts, double slack = 0.1,
                                  double big_d = 0.0) {
  if (parts == 0) throw std::invalid_argument("solve_x0: L must be >= 1");
  if (delta <= 0.0) throw std::invalid_argument("solve_x0: delta must be > 0");
  if (slack <= 0.0 || slack >= 1.0)
    throw std::invalid_argument("solve_x0: slack must be in (0,1)");
  const double l = static_cast<double>(parts);
  const double target = (1.0 - slack) / l;

  MarginCertificate cert;
  cert.delta = delta;
  cert.parts = parts;

  switch (a.kind) {
    case Activation::relu:
      cert.x0 = 0.0;
      cert.epsilon = delta / (l * (1.0 + slack));
      cert.ratio = 0.0;
      return cert;
    case Activation::leaky_relu: {
      cert.x0 = 0.0;
      cert.ratio = leaky_ratio(a, 0.0, delta, big_d);
      if (cert.ratio > target)
        throw DeltaTooSmallError(
            "solve_x0: leaky ratio " + std::to_string(cert.ratio) +
            " exceeds target " + std::to_string(target));
      cert.epsilon = -a.eval(-big_d);  // = neg_slope * D
      return cert;
    }
    default: break;
  }

  const double limit = a.kind == Activation::sigmoid ? std::exp(-delta)
                                                     : std::exp(-2.0 * delta);
  if (limit >= target)
    throw DeltaTooSmallError("solve_x0: ratio limit " + std::to_string(limit) +
                             " at delta " + std::to_string(delta) +
                             " cannot reach target " + std::to_string(target));
  if (shifted_ratio(a, 0.0, delta) <= target) {
    cert.x0 = 0.0;
  } else {
    double lo = -1.0;
    while (shifted_ratio(a, lo, delta) > target && lo > -120.0) lo *= 2.0;
    if (shifted_ratio(a, lo, delta) > target)
      throw DeltaTooSmallError("solve_x0: no x0 reaches the target ratio");
    double hi = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(lo)); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (shifted_ratio(a, mid, delta) <= target)
        lo = mid;
      else
        hi = mid;
    }
    cert.x0 = lo;
  }
  cert.ratio = shifted_ratio(a, cert.x0, delta);
  cert.epsilon = a.shifted_eval(cert.x0);
  return cert;
}

}  // namespace hullnet
