#pragma once

// The six worked problems as parameter descriptors. Each one knows its exact
// recurrence (the oracle), how to drive the engine, and the published closed
// form used for regression.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "nmren/error.hpp"
#include "nmren/renorm.hpp"
#include "nmren/scalar.hpp"
#include "nmren/shift_poly.hpp"

namespace nmren {

inline constexpr double kOracleDivergence = 1e6;

struct IllustrationCase {
  double epsilon = 0.05;
};

struct VanDerPolCase {
  double theta = std::numbers::pi / 5.0;
  double epsilon = 0.01;
  Closure closure = Closure::Linear;
  std::complex<double> a0{0.005, 0.0};
};

struct BoundaryLayerCase {
  double epsilon = 0.01;
  double a = 2.0;
  double b = 1.0;
  long N = 20;
  double alpha = 1.0;
  double beta = 0.5;
};

/// Delta x = eps f(x, y), Delta y = -y + g(x).
struct ReductionModel {
  std::string name;
  std::function<double(double, double)> f;
  std::function<double(double)> g;
  std::function<double(double)> g_prime;
};

inline ReductionModel reduction_model(const std::string& name) {
  if (name == "square-product")
    return {name, [](double x, double y) { return -x * y; }, [](double x) { return x * x; },
            [](double x) { return 2.0 * x; }};
  if (name == "zero-drift")
    return {name, [](double, double) { return 0.0; }, [](double x) { return x * x; },
            [](double x) { return 2.0 * x; }};
  throw Error("cases", "unknown reduction model '" + name + "' (square-product, zero-drift)");
}

struct ReductionCase {
  double epsilon = 0.02;
  ReductionModel model = reduction_model("square-product");
  double x0 = 0.5;
  std::optional<double> y0;  // unset: start on the manifold
};

struct HtrCubicCase {
  double eta = 0.01;
  double b0 = 0.1;
};

struct HtrDomainWallCase {
  double D = 1.0;
  double lambda = 0.2;
  double k = 1.0;
  long n_max = 0;  // 0: ceil(20 / lambda)
};

using CaseStudy =
    std::variant<IllustrationCase, VanDerPolCase, BoundaryLayerCase, ReductionCase, HtrCubicCase, HtrDomainWallCase>;

inline const std::vector<std::string>& case_names() {
  static const std::vector<std::string> names{"illustration", "van-der-pol",     "boundary-layer",
                                              "reduction",    "htr-cubic",       "htr-domain-wall"};
  return names;
}

inline std::string case_name(const CaseStudy& c) { return case_names().at(c.index()); }

inline CaseStudy default_case(const std::string& name) {
  if (name == "illustration") return IllustrationCase{};
  if (name == "van-der-pol") return VanDerPolCase{};
  if (name == "boundary-layer") return BoundaryLayerCase{};
  if (name == "reduction") return ReductionCase{};
  if (name == "htr-cubic") return HtrCubicCase{};
  if (name == "htr-domain-wall") return HtrDomainWallCase{};
  throw Error("cases", "unknown case '" + name + "'");
}

namespace detail {

inline long ceil_window(double x) { return static_cast<long>(std::ceil(x - 1e-9)); }

inline void require_small(const char* what, double v) {
  if (!(v > 0.0 && v <= 0.5)) throw Error("cases", std::string(what) + " must lie in (0, 0.5], got " + std::to_string(v));
}

inline void check_derivative(const ReductionModel& m, double x0) {
  const double h = 1e-5;
  for (int i = -2; i <= 2; ++i) {
    double x = x0 + 0.25 * i;
    double cd = (m.g(x + h) - m.g(x - h)) / (2.0 * h);
    if (std::abs(cd - m.g_prime(x)) > 1e-6 * std::max(1.0, std::abs(cd)))
      throw Error("cases", "g' of model '" + m.name + "' disagrees with a central difference at x = " +
                               std::to_string(x));
  }
}

}  // namespace detail

inline void validate(const CaseStudy& cs) {
  std::visit(
      [](const auto& c) {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, IllustrationCase>) {
          detail::require_small("epsilon", c.epsilon);
        } else if constexpr (std::is_same_v<C, VanDerPolCase>) {
          detail::require_small("epsilon", c.epsilon);
          if (!(c.theta > 0.0 && c.theta < std::numbers::pi)) throw Error("cases", "theta must lie in (0, pi)");
          if (std::abs(std::polar(1.0, 2.0 * c.theta) - 1.0) < 0.1)
            throw Error("cases", "theta too close to resonance: |e^{2i theta} - 1| < 0.1");
        } else if constexpr (std::is_same_v<C, BoundaryLayerCase>) {
          detail::require_small("epsilon", c.epsilon);
          if (c.a == 0.0 || c.b == 0.0) throw Error("cases", "a and b must be nonzero");
          if (c.N < 2) throw Error("cases", "N must be at least 2");
        } else if constexpr (std::is_same_v<C, ReductionCase>) {
          detail::require_small("epsilon", c.epsilon);
          if (!c.model.f || !c.model.g || !c.model.g_prime) throw Error("cases", "reduction model is incomplete");
          detail::check_derivative(c.model, c.x0);
        } else if constexpr (std::is_same_v<C, HtrCubicCase>) {
          detail::require_small("eta", c.eta);
        } else {
          if (!(c.lambda > 0.0)) throw Error("cases", "lambda must be positive");
          if (c.n_max < 0) throw Error("cases", "N_max must be nonnegative");
        }
      },
      cs);
}

// ---------------------------------------------------------------------------
// Small-parameter plumbing shared by the CLI and the ladders.

inline std::string small_parameter_key(const CaseStudy& c) {
  if (std::holds_alternative<HtrCubicCase>(c)) return "eta";
  if (std::holds_alternative<HtrDomainWallCase>(c)) return "lambda";
  return "epsilon";
}

inline double small_parameter(const CaseStudy& cs) {
  return std::visit(
      [](const auto& c) -> double {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, HtrCubicCase>)
          return c.eta;
        else if constexpr (std::is_same_v<C, HtrDomainWallCase>)
          return c.lambda;
        else
          return c.epsilon;
      },
      cs);
}

inline std::vector<double> default_ladder(const CaseStudy& c) {
  switch (c.index()) {
    case 0: return {0.1, 0.05, 0.025};
    case 1: return {0.02, 0.01, 0.005};
    case 2: return {0.04, 0.02, 0.01};
    case 3: return {0.04, 0.02, 0.01};
    case 4: return {0.02, 0.01, 0.005};
    default: return {0.1, 0.2, 0.4};
  }
}

/// Validity window [0, last]: ceil(1/eps), N for the boundary-value case,
/// ceil(20/lambda) for the domain wall.
inline long default_window(const CaseStudy& cs) {
  if (auto* bl = std::get_if<BoundaryLayerCase>(&cs)) return bl->N;
  if (auto* dw = std::get_if<HtrDomainWallCase>(&cs))
    return dw->n_max > 0 ? dw->n_max : detail::ceil_window(20.0 / dw->lambda);
  return detail::ceil_window(1.0 / small_parameter(cs));
}

/// The form in which each published answer is written: e^{c m} for the
/// oscillators, the literal power form elsewhere.
inline Form preferred_form(const CaseStudy& c) {
  return std::holds_alternative<IllustrationCase>(c) || std::holds_alternative<VanDerPolCase>(c) ? Form::Exponential
                                                                                                 : Form::Power;
}

// ---------------------------------------------------------------------------
// JSON config: {"case": name, "params": {...}}.

inline nlohmann::ordered_json params_to_json(const CaseStudy& cs) {
  nlohmann::ordered_json p = nlohmann::ordered_json::object();
  std::visit(
      [&p](const auto& c) {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, IllustrationCase>) {
          p["epsilon"] = c.epsilon;
        } else if constexpr (std::is_same_v<C, VanDerPolCase>) {
          p["theta"] = c.theta;
          p["epsilon"] = c.epsilon;
          p["closure"] = to_string(c.closure);
          p["a0_re"] = c.a0.real();
          p["a0_im"] = c.a0.imag();
        } else if constexpr (std::is_same_v<C, BoundaryLayerCase>) {
          p["epsilon"] = c.epsilon;
          p["a"] = c.a;
          p["b"] = c.b;
          p["N"] = c.N;
          p["alpha"] = c.alpha;
          p["beta"] = c.beta;
        } else if constexpr (std::is_same_v<C, ReductionCase>) {
          p["epsilon"] = c.epsilon;
          p["model"] = c.model.name;
          p["x0"] = c.x0;
          if (c.y0) p["y0"] = *c.y0;
        } else if constexpr (std::is_same_v<C, HtrCubicCase>) {
          p["eta"] = c.eta;
          p["B0"] = c.b0;
        } else {
          p["D"] = c.D;
          p["lambda"] = c.lambda;
          p["k"] = c.k;
          p["N_max"] = c.n_max;
        }
      },
      cs);
  return p;
}

inline nlohmann::ordered_json to_json(const CaseStudy& cs) {
  nlohmann::ordered_json j;
  j["case"] = case_name(cs);
  j["params"] = params_to_json(cs);
  return j;
}

namespace detail {

inline double number(const std::string& key, const nlohmann::json& v) {
  if (!v.is_number()) throw Error("cases", "parameter '" + key + "' must be a number");
  return v.get<double>();
}

inline long integer(const std::string& key, const nlohmann::json& v) {
  if (!v.is_number_integer()) throw Error("cases", "parameter '" + key + "' must be an integer");
  return v.get<long>();
}

inline Closure closure_from(const std::string& s) {
  if (s == "linear") return Closure::Linear;
  if (s == "full") return Closure::Full;
  throw Error("cases", "closure must be 'linear' or 'full', got '" + s + "'");
}

}  // namespace detail

inline Closure parse_closure(const std::string& s) { return detail::closure_from(s); }

inline CaseStudy from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("case") || !doc["case"].is_string())
    throw Error("cases", "config needs a string field \"case\"");
  CaseStudy cs = default_case(doc["case"].get<std::string>());
  const nlohmann::json params = doc.value("params", nlohmann::json::object());
  if (!params.is_object()) throw Error("cases", "\"params\" must be an object");
  for (const auto& [key, v] : params.items()) {
    bool known = std::visit(
        [&](auto& c) -> bool {
          using C = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<C, IllustrationCase>) {
            if (key == "epsilon") return c.epsilon = detail::number(key, v), true;
          } else if constexpr (std::is_same_v<C, VanDerPolCase>) {
            if (key == "theta") return c.theta = detail::number(key, v), true;
            if (key == "epsilon") return c.epsilon = detail::number(key, v), true;
            if (key == "a0_re") return c.a0.real(detail::number(key, v)), true;
            if (key == "a0_im") return c.a0.imag(detail::number(key, v)), true;
            if (key == "closure") {
              if (!v.is_string()) throw Error("cases", "parameter 'closure' must be a string");
              c.closure = detail::closure_from(v.get<std::string>());
              return true;
            }
          } else if constexpr (std::is_same_v<C, BoundaryLayerCase>) {
            if (key == "epsilon") return c.epsilon = detail::number(key, v), true;
            if (key == "a") return c.a = detail::number(key, v), true;
            if (key == "b") return c.b = detail::number(key, v), true;
            if (key == "N") return c.N = detail::integer(key, v), true;
            if (key == "alpha") return c.alpha = detail::number(key, v), true;
            if (key == "beta") return c.beta = detail::number(key, v), true;
          } else if constexpr (std::is_same_v<C, ReductionCase>) {
            if (key == "epsilon") return c.epsilon = detail::number(key, v), true;
            if (key == "x0") return c.x0 = detail::number(key, v), true;
            if (key == "y0") return c.y0 = detail::number(key, v), true;
            if (key == "model") {
              if (!v.is_string()) throw Error("cases", "parameter 'model' must be a string");
              c.model = reduction_model(v.get<std::string>());
              return true;
            }
          } else if constexpr (std::is_same_v<C, HtrCubicCase>) {
            if (key == "eta") return c.eta = detail::number(key, v), true;
            if (key == "B0") return c.b0 = detail::number(key, v), true;
          } else {
            if (key == "D") return c.D = detail::number(key, v), true;
            if (key == "lambda") return c.lambda = detail::number(key, v), true;
            if (key == "k") return c.k = detail::number(key, v), true;
            if (key == "N_max") return c.n_max = detail::integer(key, v), true;
          }
          return false;
        },
        cs);
    if (!known) throw Error("cases", "unknown parameter '" + key + "' for case " + case_name(cs));
  }
  validate(cs);
  return cs;
}

/// Copy of the case with one parameter replaced (by its config key).
inline CaseStudy with_parameter(const CaseStudy& cs, const std::string& key, const nlohmann::json& value) {
  nlohmann::ordered_json doc = to_json(cs);
  if (!doc["params"].contains(key) && !(key == "y0" && std::holds_alternative<ReductionCase>(cs)))
    throw Error("cases", "case " + case_name(cs) + " has no parameter '" + key + "'");
  doc["params"][key] = value;
  return from_json(nlohmann::json::parse(doc.dump()));
}

// ---------------------------------------------------------------------------
// Reduction of the fast-slow map.

inline double reduction_manifold(const ReductionModel& m, double epsilon, double x) {
  return m.g(x) - epsilon * m.g_prime(x) * m.f(x, m.g(x));
}

/// First-order pieces at the anchor n0 with x0 = c, y0 = g(c):
/// x1 = f (n - n0) + b, y1 = g' f (n - n0) + b g' - g' f, derived by
/// substitution into Delta y1 = -y1 + g'(c) x1.
struct FirstOrderReduction {
  double c = 0.0;
  double b = 0.0;
  long n0 = 0;
  double drift = 0.0;  // f(c, g(c))
  double slope = 0.0;  // g'(c)
  double x0 = 0.0;
  double y0 = 0.0;

  double x1(long n) const { return drift * static_cast<double>(n - n0) + b; }
  double y1(long n) const { return slope * drift * static_cast<double>(n - n0) + b * slope - slope * drift; }
  /// Coefficients of (n - n0) in x1 and y1: the secular parts.
  double x1_secular() const { return drift; }
  double y1_secular() const { return slope * drift; }
};

inline FirstOrderReduction first_order_reduction(const ReductionModel& m, double c, double b, long n0 = 0) {
  FirstOrderReduction r;
  r.c = c;
  r.b = b;
  r.n0 = n0;
  r.x0 = c;
  r.y0 = m.g(c);
  r.drift = m.f(c, r.y0);
  r.slope = m.g_prime(c);
  return r;
}

struct ManifoldResult {
  double epsilon = 0.0;
  ReductionModel model;
  FirstOrderReduction first_order;
  std::vector<double> slow;  // c(n)
  std::vector<double> x;
  std::vector<double> y;

  /// Delta c = eps f(c, g(c)).
  double reduced_update(double c) const { return epsilon * model.f(c, model.g(c)); }
  /// Renormalizing b away (Delta b = 0, b = 0) leaves y = g(c) - eps g'(c) f(c, g(c)).
  double manifold(double xv) const { return reduction_manifold(model, epsilon, xv); }
};

inline ManifoldResult reduction_pipeline(const ReductionCase& rc, long n_max) {
  ManifoldResult out;
  out.epsilon = rc.epsilon;
  out.model = rc.model;
  out.first_order = first_order_reduction(rc.model, rc.x0, 0.0);
  const auto& m = rc.model;
  double c = rc.x0, x = rc.x0, y = rc.y0 ? *rc.y0 : out.manifold(rc.x0);
  for (long n = 0; n <= n_max; ++n) {
    out.slow.push_back(c);
    out.x.push_back(x);
    out.y.push_back(y);
    if (!(std::abs(x) <= kOracleDivergence && std::abs(y) <= kOracleDivergence && std::abs(c) <= kOracleDivergence))
      throw Error("cases", "reduction trajectory diverged at n = " + std::to_string(n));
    c += out.reduced_update(c);
    double xn = x + rc.epsilon * m.f(x, y);
    y = m.g(x);
    x = xn;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Oracles.

using Trajectory = std::vector<std::complex<double>>;

struct CaseModel {
  std::string name;
  std::string equation;
  /// y(0..n_max) of the exact original problem.
  std::function<Trajectory(long)> trajectory;
  /// Defining equation evaluated on a candidate solution; zero on exact ones.
  ResidualFunctional<FloatComplex> residual;
};

namespace detail {

inline void guard(double v, long n) {
  if (!std::isfinite(v) || std::abs(v) > kOracleDivergence)
    throw Error("cases", "oracle diverged at n = " + std::to_string(n));
}

inline Trajectory iterate2(double y0, double y1, long n_max, const std::function<double(double, double)>& step) {
  Trajectory t;
  double a = y0, b = y1;
  for (long n = 0; n <= n_max; ++n) {
    guard(a, n);
    t.emplace_back(a, 0.0);
    double c = step(a, b);
    a = b;
    b = c;
  }
  return t;
}

inline FloatComplex illustration_phase_amplitude(double eps) {
  const double phi = (eps + std::numbers::pi) / 2.0;
  const double d0 = -std::cos(phi) / std::sin(phi);
  return FloatComplex(1.0, -d0) / 2.0;
}

inline FloatComplex vdp_second_value(const VanDerPolCase& c) {
  return 2.0 * (c.a0 * std::exp(FloatComplex(c.epsilon, c.theta))).real();
}

/// Slow and fast roots of eps r^2 + a r + b = 0 and the two-root solution
/// with y(0) = alpha, y(N) = beta, written so that no power overflows.
struct TwoRoot {
  double slow, fast, p, q_scaled;  // y = p slow^n + q_scaled (fast)^(n - N)
  long N;
  double operator()(long n) const {
    return p * std::pow(slow, static_cast<double>(n)) + q_scaled * std::pow(fast, static_cast<double>(n - N));
  }
};

inline TwoRoot boundary_two_root(const BoundaryLayerCase& c) {
  const double disc = c.a * c.a - 4.0 * c.epsilon * c.b;
  if (disc < 0.0) throw Error("cases", "boundary layer roots are complex for these parameters");
  const double s = std::sqrt(disc);
  const double q = -0.5 * (c.a + std::copysign(s, c.a));
  const double fast = q / c.epsilon, slow = c.b / q;
  const double nn = static_cast<double>(c.N);
  // p + q' fast^{-N} = alpha, p slow^N + q' = beta
  const double fi = std::pow(fast, -nn), sN = std::pow(slow, nn);
  const double det = 1.0 - fi * sN;
  TwoRoot t;
  t.slow = slow;
  t.fast = fast;
  t.N = c.N;
  t.p = (c.alpha - c.beta * fi) / det;
  t.q_scaled = (c.beta - c.alpha * sN) / det;
  return t;
}

/// Decaying solution of y(n+2) = 2y(n+1) - y(n) + D(y - y^3) from y(0) = 1,
/// found by bisection on y(1). Once the computed orbit peels off (sign change
/// or growth) the true orbit lies below double resolution and is set to 0.
inline Trajectory domain_wall_shooting(double D, long n_max) {
  if (!(D > 0.0 && D <= 1.0)) throw Error("cases", "domain-wall oracle needs 0 < D <= 1");
  auto run = [D](double s, long len, std::vector<double>* out) -> int {
    double a = 1.0, b = s;
    if (out) out->assign({a, b});
    for (long n = 2; n <= len; ++n) {
      double c = 2.0 * b - a + D * (a - a * a * a);
      if (c < 0.0) return -1;
      if (c > b) return 1;
      if (out) out->push_back(c);
      a = b;
      b = c;
    }
    return 0;
  };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    int cls = run(mid, n_max + 2, nullptr);
    if (cls < 0)
      lo = mid;
    else if (cls > 0)
      hi = mid;
    else
      lo = hi = mid;
  }
  std::vector<double> ys;
  run(0.5 * (lo + hi), n_max, &ys);
  if (ys.size() <= static_cast<std::size_t>(n_max) && std::abs(ys.back()) > 1e-8)
    throw Error("cases", "shooting did not resolve the decaying orbit");
  Trajectory t;
  for (long n = 0; n <= n_max; ++n)
    t.emplace_back(n < static_cast<long>(ys.size()) ? ys[n] : 0.0, 0.0);
  return t;
}

}  // namespace detail

/// The oracle without parameter validation (limits such as eps = 0).
inline CaseModel build_model(const CaseStudy& cs) {
  using FC = FloatComplex;
  using Y = std::function<FC(long)>;
  CaseModel out;
  out.name = case_name(cs);
  std::visit(
      [&out](const auto& c) {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, IllustrationCase>) {
          const double eps = c.epsilon;
          out.equation = "y(n+2) + eps y(n+1) + y(n) = 0, y(0) = 1, y(1) = 0";
          out.trajectory = [eps](long n_max) {
            return detail::iterate2(1.0, 0.0, n_max, [eps](double a, double b) { return -eps * b - a; });
          };
          out.residual = [eps](const Y& y, long n) { return y(n + 2) + eps * y(n + 1) + y(n); };
        } else if constexpr (std::is_same_v<C, VanDerPolCase>) {
          const double eps = c.epsilon, two_cos = 2.0 * std::cos(c.theta);
          const double y0 = 2.0 * c.a0.real(), y1 = detail::vdp_second_value(c).real();
          out.equation = "y(n+2) - 2cos(theta) y(n+1) + y(n) = eps (1 - y(n+1)^2)(y(n+2) - y(n))";
          out.trajectory = [=](long n_max) {
            return detail::iterate2(y0, y1, n_max, [=](double a, double b) {
              double k = eps * (1.0 - b * b);
              return (two_cos * b - a - k * a) / (1.0 - k);
            });
          };
          out.residual = [=](const Y& y, long n) {
            FC y1n = y(n + 1);
            return y(n + 2) - two_cos * y1n + y(n) - eps * (1.0 - y1n * y1n) * (y(n + 2) - y(n));
          };
        } else if constexpr (std::is_same_v<C, BoundaryLayerCase>) {
          const auto tr = detail::boundary_two_root(c);
          const double eps = c.epsilon, a = c.a, b = c.b;
          out.equation = "eps y(n+2) + a y(n+1) + b y(n) = 0, y(0) = alpha, y(N) = beta";
          out.trajectory = [tr](long n_max) {
            Trajectory t;
            for (long n = 0; n <= n_max; ++n) t.emplace_back(tr(n), 0.0);
            return t;
          };
          out.residual = [=](const Y& y, long n) { return eps * y(n + 2) + a * y(n + 1) + b * y(n); };
        } else if constexpr (std::is_same_v<C, ReductionCase>) {
          out.equation = "Delta x = eps f(x, y), Delta y = -y + g(x); x(n) reported";
          ReductionCase rc = c;
          out.trajectory = [rc](long n_max) {
            auto r = reduction_pipeline(rc, n_max);
            Trajectory t;
            for (double v : r.x) t.emplace_back(v, 0.0);
            return t;
          };
          // Candidate x(n) with y on the manifold: the x update defect and the
          // y update defect, packed as real and imaginary parts.
          out.residual = [rc](const Y& y, long n) {
            const auto& m = rc.model;
            double xn = y(n).real(), xn1 = y(n + 1).real();
            double rx = xn1 - xn - rc.epsilon * m.f(xn, reduction_manifold(m, rc.epsilon, xn));
            double ry = reduction_manifold(m, rc.epsilon, xn1) - m.g(xn);
            return FC(rx, ry);
          };
        } else if constexpr (std::is_same_v<C, HtrCubicCase>) {
          const double eta = c.eta, b0 = c.b0;
          out.equation = "Delta y = eta (y + y^3), y(0) = B0";
          out.trajectory = [=](long n_max) {
            Trajectory t;
            double y = b0;
            for (long n = 0; n <= n_max; ++n) {
              detail::guard(y, n);
              t.emplace_back(y, 0.0);
              y += eta * (y + y * y * y);
            }
            return t;
          };
          out.residual = [=](const Y& y, long n) {
            FC v = y(n);
            return y(n + 1) - v - eta * (v + v * v * v);
          };
        } else {
          const double D = c.D;
          out.equation = "y(n+2) - 2y(n+1) + y(n) = D (y - y^3), y(0) = 1, y -> 0";
          out.trajectory = [D](long n_max) { return detail::domain_wall_shooting(D, n_max); };
          out.residual = [D](const Y& y, long n) {
            FC v = y(n);
            return y(n + 2) - 2.0 * y(n + 1) + v - D * (v - v * v * v);
          };
        }
      },
      cs);
  return out;
}

inline CaseModel build(const CaseStudy& cs) {
  validate(cs);
  return build_model(cs);
}

/// Closed-form root solution for the linear constant-coefficient cases.
inline std::optional<std::function<std::complex<double>(long)>> closed_form_solution(const CaseStudy& cs) {
  if (auto* il = std::get_if<IllustrationCase>(&cs)) {
    const double e = il->epsilon;
    const FloatComplex rp(-e / 2.0, std::sqrt(4.0 - e * e) / 2.0), rm = std::conj(rp);
    const FloatComplex p = -rm / (rp - rm), q = rp / (rp - rm);
    return [=](long n) {
      return p * std::pow(rp, static_cast<double>(n)) + q * std::pow(rm, static_cast<double>(n));
    };
  }
  if (auto* bl = std::get_if<BoundaryLayerCase>(&cs)) {
    auto tr = detail::boundary_two_root(*bl);
    return [tr](long n) { return std::complex<double>(tr(n), 0.0); };
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Engine runs.

struct EngineOptions {
  int order = 1;
  std::optional<Closure> closure;  // unset: the case's own (linear by default)
};

/// One term c r^n C(n - m, k) of a dumped sequence.
struct DumpTerm {
  std::complex<double> coeff;
  std::complex<double> base;
  long anchor = 0;
  int degree = 0;
};

struct EngineRun {
  std::string case_name;
  ExpansionMode mode = ExpansionMode::TR;
  Closure closure = Closure::Linear;
  int order = 1;
  Form form = Form::Power;
  double validity_scale = 0.0;
  std::function<std::complex<double>(long)> value;  // the assembled solution in `form`
  std::string solution;
  std::string renorm_equations;
  std::vector<std::string> amplitude_names;
  std::vector<std::complex<double>> amplitude_initial;
  std::vector<std::string> amplitude_metadata;
  std::vector<std::vector<DumpTerm>> orders;  // y_k with the initial amplitudes substituted
  std::vector<DumpTerm> global_terms;         // empty for shaped (kernel) solutions
  std::vector<std::string> warnings;
};

namespace detail {

template <Scalar S>
EngineRun finish_run(const CaseStudy& cs, const PerturbationSolution<S>& sol, const GlobalSolution<S>& g, Form form) {
  using T = scalar_traits<S>;
  EngineRun run;
  run.case_name = case_name(cs);
  run.mode = sol.mode;
  run.closure = g.system().closure;
  run.order = std::max(1, sol.order());  // shaped kernels carry no order table
  run.form = form;
  run.validity_scale = g.validity_scale();
  run.value = [g, form](long n) { return T::to_complex(g.evaluate(n, form)); };
  run.solution = g.describe();
  run.renorm_equations = g.system().describe();
  run.amplitude_names = g.amplitude_names();
  const auto& init = g.paths().initial();
  for (const auto& v : init) run.amplitude_initial.push_back(T::to_complex(v));
  run.amplitude_metadata = g.paths().metadata(g.amplitude_names());
  for (const auto& yk : sol.orders) {
    std::vector<DumpTerm> terms;
    for (const auto& t : yk.terms())
      terms.push_back({T::to_complex(t.coeff.value(init)), T::to_complex(t.base), yk.anchor(), t.degree});
    run.orders.push_back(std::move(terms));
  }
  for (const auto& t : g.terms())
    if (!t.shape) run.global_terms.push_back({T::to_complex(t.coeff.value(init)), T::to_complex(t.base), 0, 0});
  return run;
}

}  // namespace detail

inline EngineRun run_engine(const CaseStudy& cs, const EngineOptions& opt = {}) {
  validate(cs);
  using FC = FloatComplex;
  using EC = ExactComplex;
  using SP = ShiftPoly<FC>;
  const bool tr_case = cs.index() <= 2;
  if (opt.order < 1 || opt.order > 2) throw Error("cases", "expansion order must be 1 or 2");
  if (opt.order != 1 && !tr_case) throw Error("cases", case_name(cs) + " supports expansion order 1 only");
  const Form form = preferred_form(cs);
  // Nonlinear amplitude tables cover twice the validity window.
  const long m_max = 2 * default_window(cs) + 8;

  return std::visit(
      [&](const auto& c) -> EngineRun {
        using C = std::decay_t<decltype(c)>;
        const Closure closure = opt.closure.value_or(Closure::Linear);
        if constexpr (std::is_same_v<C, IllustrationCase>) {
          TrProblem<FC> prob{LinearRecurrence<FC>({FC(1.0), FC(0.0), FC(1.0)}),
                             SP::y(1) * FC(-1.0),
                             FC(c.epsilon),
                             0,
                             opt.order,
                             {{"A", FC(0.0, 1.0), std::nullopt}, {"B", FC(0.0, -1.0), 0}},
                             {},
                             "eps"};
          auto sol = perturb_expand(prob);
          auto sys = form_renorm_system(sol, collect_Y(sol), closure);
          auto g = assemble_global(sol, sys, {detail::illustration_phase_amplitude(c.epsilon), FC()});
          return detail::finish_run(cs, sol, g, form);
        } else if constexpr (std::is_same_v<C, VanDerPolCase>) {
          const FC lam = std::polar(1.0, c.theta);
          SP one = SP::constant(FC(1.0));
          TrProblem<FC> prob{LinearRecurrence<FC>({FC(1.0), FC(-2.0 * std::cos(c.theta)), FC(1.0)}),
                             (one - SP::y(1) * SP::y(1)) * (SP::y(2) - SP::y(0)),
                             FC(c.epsilon),
                             0,
                             opt.order,
                             {{"A", lam, std::nullopt}, {"B", std::conj(lam), 0}},
                             {},
                             "eps"};
          auto sol = perturb_expand(prob);
          auto sys = form_renorm_system(sol, collect_Y(sol), opt.closure.value_or(c.closure));
          auto g = assemble_global(sol, sys, {c.a0, FC()}, {false, m_max, 0.0});
          return detail::finish_run(cs, sol, g, form);
        } else if constexpr (std::is_same_v<C, BoundaryLayerCase>) {
          // Exact scalars: the fitted constants are large and nearly cancel.
          using T = scalar_traits<EC>;
          const EC a = T::from_double(c.a), b = T::from_double(c.b), eps = T::from_double(c.epsilon);
          TrProblem<EC> prob{LinearRecurrence<EC>({a, b}), ShiftPoly<EC>::y(2) * EC(-1L), eps, 0, opt.order,
                             {{"A", -b / a, std::nullopt}}, {"B" + std::to_string(opt.order - 1)}, "eps"};
          auto sol = perturb_expand(prob);
          auto sys = form_renorm_system(sol, collect_Y(sol), closure);
          if (sys.kind != RenormKind::LinearDiagonal)
            throw Error("cases", "boundary fitting needs the linear closure");
          auto g = assemble_global(sol, sys, {EC(), EC()});
          auto fitted = apply_boundary(g, {{0, T::from_double(c.alpha)}, {c.N, T::from_double(c.beta)}}, {0, 1});
          return detail::finish_run(cs, sol, fitted, form);
        } else if constexpr (std::is_same_v<C, ReductionCase>) {
          EngineRun run;
          run.case_name = case_name(cs);
          run.closure = closure;
          run.form = form;
          run.validity_scale = 1.0 / c.epsilon;
          auto r = reduction_pipeline(c, 0);
          ReductionCase rc = c;
          run.value = [rc](long n) {
            if (n < 0) throw Error("cases", "negative index");
            return std::complex<double>(reduction_pipeline(rc, n).slow.back(), 0.0);
          };
          const auto& fo = r.first_order;
          run.solution = "c(n+1) = c(n) + eps f(c, g(c)); y = g(x) - eps g'(x) f(x, g(x))";
          run.renorm_equations = "Delta c = " + std::to_string(c.epsilon) + " * f(c, g(c)); Delta b = 0";
          run.amplitude_names = {"c", "b"};
          run.amplitude_initial = {c.x0, 0.0};
          run.amplitude_metadata = {"c: slow variable", "b: absorbed into c"};
          run.orders = {{{fo.x0, 1.0, 0, 0}}, {{fo.drift, 1.0, 0, 1}, {fo.b, 1.0, 0, 0}}};
          return run;
        } else if constexpr (std::is_same_v<C, HtrCubicCase>) {
          using S = ShiftPoly<FC>;
          const FC eta(c.eta);
          S target = S::y(1) - S::y(0) - S::y(0) * eta - S::y(0) * S::y(0) * S::y(0) * eta;
          HtrConstantCoefficient<FC> h{LinearRecurrence<FC>({FC(1.0), FC(-0.5)}), target, 0,
                                       {{"K0", FC(0.5), std::nullopt}}};
          auto sol = htr_expand(h);
          auto sys = form_renorm_system(sol, collect_Y(sol), closure);
          auto g = assemble_global(sol, sys, {FC(c.b0)}, {false, m_max, 1.0 / c.eta});
          return detail::finish_run(cs, sol, g, form);
        } else {
          auto sol = htr_expand(HtrDomainWallKernel{c.lambda, c.k, c.D, 0});
          auto y = collect_Y(sol);
          auto lin = form_renorm_system(sol, y, Closure::Linear);
          const long far = default_window(cs);
          auto base = assemble_global(sol, lin, {FC()}, {false, m_max, 1.0 / c.lambda});
          auto fitted = apply_boundary(base, {{0, FC(1.0)}}, {0}, {{far, FC(0.0), 1e-6}});
          if (closure == Closure::Linear) return detail::finish_run(cs, sol, fitted, form);
          auto full = form_renorm_system(sol, y, Closure::Full);
          auto g = assemble_global(sol, full, fitted.paths().initial(), {false, m_max, 1.0 / c.lambda});
          return detail::finish_run(cs, sol, g, form);
        }
      },
      cs);
}

// ---------------------------------------------------------------------------
// Published closed forms.

inline GlobalSolution<FloatComplex> published_answer(const CaseStudy& cs) {
  validate(cs);
  using FC = FloatComplex;
  using G = GlobalSolution<FC>;
  return std::visit(
      [&cs](const auto& c) -> G {
        using C = std::decay_t<decltype(c)>;
        const double scale = 1.0 / small_parameter(cs);
        if constexpr (std::is_same_v<C, IllustrationCase>) {
          const double phi = (c.epsilon + std::numbers::pi) / 2.0;
          const double c0 = 1.0, d0 = -std::cos(phi) / std::sin(phi);
          return G::from_function(
              [=](long n) { return FC(c0 * std::cos(n * phi) + d0 * std::sin(n * phi), 0.0); },
              "C0 cos(n (eps + pi)/2) + D0 sin(n (eps + pi)/2), C0 = 1, D0 = " + std::to_string(d0), scale);
        } else if constexpr (std::is_same_v<C, VanDerPolCase>) {
          const FC a0 = c.a0, up(c.epsilon, c.theta), down(c.epsilon, -c.theta);
          return G::from_function(
              [=](long n) { return a0 * std::exp(up * double(n)) + std::conj(a0) * std::exp(down * double(n)); },
              "A0 e^{n(eps + i theta)} + conj(A0) e^{n(eps - i theta)}", scale);
        } else if constexpr (std::is_same_v<C, BoundaryLayerCase>) {
          using EC = ExactComplex;
          using T = scalar_traits<EC>;
          const EC a = T::from_double(c.a), b = T::from_double(c.b), eps = T::from_double(c.epsilon);
          const EC alpha = T::from_double(c.alpha), beta = T::from_double(c.beta);
          const EC g = EC(1L) + eps * b / (a * a), rho = -b / a;
          const EC growth = ipow(g, c.N), ratio = ipow(-a / b, c.N);
          const EC a0 = (beta * ratio - alpha) / (growth - EC(1L));
          const EC b0 = (alpha * growth - beta * ratio) / ((growth - EC(1L)) * eps);
          return G::from_function(
              [=](long n) { return T::to_complex(a0 * ipow(g, n) * ipow(rho, n) + eps * b0 * ipow(rho, n)); },
              "A0 (1 + eps b/a^2)^n (-b/a)^n + eps B0 (-b/a)^n, A0 = " + T::to_string(a0) +
                  ", B0 = " + T::to_string(b0),
              scale);
        } else if constexpr (std::is_same_v<C, ReductionCase>) {
          ReductionCase rc = c;
          return G::from_function(
              [rc](long n) {
                if (n < 0) throw Error("cases", "negative index");
                return FC(reduction_pipeline(rc, n).slow.back(), 0.0);
              },
              "c(n) with Delta c = eps f(c, g(c)), c(0) = x(0)", scale);
        } else if constexpr (std::is_same_v<C, HtrCubicCase>) {
          const double eta = c.eta, b0 = c.b0;
          return G::from_function([=](long n) { return FC(std::pow(1.0 + eta, double(n)) * b0, 0.0); },
                                  "(1 + eta)^n B0", scale);
        } else {
          const double lambda = c.lambda;
          return G::from_function(
              [=](long n) { return FC(2.0 * logistic_kernel(lambda * double(n)), 0.0); }, "2/(1 + e^{lambda n})",
              scale);
        }
      },
      cs);
}

}  // namespace nmren
