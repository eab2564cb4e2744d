#pragma once

// Renormalization engine. A problem N[y] = eps M[y] with N linear is expanded
// order by order (y_k solved by lindiff with secular terms kept), the Newton
// expansion at a general anchor m is collected into Y0 and Y1, the secular
// coefficients become updates Delta A(m) for the integration constants, and
// the solved amplitudes are substituted back into Y0.

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nmren/amp_poly.hpp"
#include "nmren/error.hpp"
#include "nmren/lindiff.hpp"
#include "nmren/linalg.hpp"
#include "nmren/seqalg.hpp"
#include "nmren/shift_poly.hpp"

namespace nmren {

enum class Closure { Linear, Full };
enum class ExpansionMode { TR, HTR };
/// Power: amplitudes as the renormalization equation produces them,
/// A0 (1+c)^m. Exponential: the identification A0 exp(c m).
enum class Form { Power, Exponential };

inline std::string to_string(Closure c) { return c == Closure::Linear ? "linear" : "full"; }
inline std::string to_string(Form f) { return f == Form::Power ? "power" : "exponential"; }

template <Scalar S>
struct ModeSpec {
  std::string name;
  S root;
  std::optional<std::size_t> conjugate_of;
};

template <Scalar S>
struct AmplitudeSymbol {
  std::string name;
  S mode;         // base r of the homogeneous mode r^n it multiplies
  int order = 0;  // power of eps at which the constant enters
  std::optional<std::size_t> conjugate_link;
};

/// coeff(amplitudes) * factor(m), where factor is m_base^m or a tabulated
/// profile for variable-coefficient operators.
template <Scalar S>
struct RateTerm {
  AmpPoly<S> coeff;
  S m_base = scalar_traits<S>::one();
  std::function<S(long)> profile;

  bool m_independent() const { return !profile && scalar_traits<S>::same_base(m_base, scalar_traits<S>::one()); }
  S factor(long m) const { return profile ? profile(m) : ipow(m_base, m); }
};

template <Scalar S>
struct TrProblem {
  LinearRecurrence<S> base;  // N
  ShiftPoly<S> perturbation;  // M
  S epsilon;
  long anchor = 0;
  int order = 1;
  std::vector<ModeSpec<S>> modes;  // empty: derived from the characteristic roots
  /// Extra homogeneous constants attached at the top order, one per mode
  /// (needed when boundary data outnumber the order-0 constants).
  std::vector<std::string> top_order_constants;
  std::string epsilon_symbol = "eps";
};

template <Scalar S>
struct PerturbationSolution {
  ExpansionMode mode = ExpansionMode::TR;
  std::string epsilon_symbol = "eps";
  S epsilon = scalar_traits<S>::zero();
  long anchor = 0;
  std::vector<PolySeq<S>> orders;       // y_0 .. y_K
  std::vector<PolySeq<S>> homogeneous;  // constant-carrying homogeneous part of each order
  std::vector<AmplitudeSymbol<S>> amplitudes;
  // Variable-coefficient entries: order-0 shape per amplitude (amplitude * shape(n)).
  std::vector<std::function<S(long)>> shapes;
  // HTR frozen variation-of-constants rates per amplitude (empty when unused).
  std::vector<std::vector<RateTerm<S>>> frozen_rates;
  // Linear closures fixed by the operator registry rather than derived.
  std::vector<std::optional<std::vector<RateTerm<S>>>> registered_linear;

  int order() const { return static_cast<int>(orders.size()) - 1; }
  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& a : amplitudes) out.push_back(a.name);
    return out;
  }
};

namespace detail {

inline std::string default_amplitude_name(std::size_t i) {
  static const char* const kNames[] = {"A", "B", "C", "D", "E", "F", "G", "H"};
  return i < 8 ? kNames[i] : "A" + std::to_string(i);
}

template <Scalar S>
bool is_characteristic_root(const LinearRecurrence<S>& rec, const S& r) {
  using T = scalar_traits<S>;
  if constexpr (T::exact) {
    return T::is_zero(rec.characteristic(r));
  } else {
    double scale = 0.0;
    for (int j = 0; j <= rec.order(); ++j) scale += std::abs(rec.at(j)) * std::pow(std::abs(r), j);
    return std::abs(rec.characteristic(r)) <= kBaseMatchTolerance * std::max(scale, 1.0);
  }
}

}  // namespace detail

/// Order-by-order solve for K <= 2: N y0 = 0, N y1 = M(y0), N y2 = M'(y0)[y1].
template <Scalar S>
PerturbationSolution<S> perturb_expand(const TrProblem<S>& prob) {
  using T = scalar_traits<S>;
  if (prob.order < 1 || prob.order > 2) throw Error("renorm", "expansion order must be 1 or 2");
  PerturbationSolution<S> sol;
  sol.epsilon = prob.epsilon;
  sol.epsilon_symbol = prob.epsilon_symbol;
  sol.anchor = prob.anchor;

  std::vector<ModeSpec<S>> modes = prob.modes;
  if (modes.empty()) {
    RootSet<S> roots;
    try {
      roots = char_roots(prob.base);
    } catch (const Error& e) {
      throw Error("renorm", std::string("order-0 equation not solvable in the exponential-binomial algebra (") +
                                e.what() + ")");
    }
    for (const auto& r : roots.roots()) {
      if (r.multiplicity > 1)
        throw Error("renorm", "repeated characteristic root " + T::to_string(r.value) +
                                  ": the order-0 solution would itself be secular");
      modes.push_back({detail::default_amplitude_name(modes.size()), r.value, std::nullopt});
    }
  }
  for (const auto& md : modes)
    if (!detail::is_characteristic_root(prob.base, md.root))
      throw Error("renorm", "mode " + md.name + " = " + T::to_string(md.root) + " is not a characteristic root");

  PolySeq<S> y0(prob.anchor);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    sol.amplitudes.push_back({modes[i].name, modes[i].root, 0, modes[i].conjugate_of});
    y0 = add(y0, make_term<S, AmpPoly<S>>(AmpPoly<S>::variable(static_cast<int>(i)), modes[i].root, prob.anchor, 0));
  }
  sol.orders.push_back(y0);
  sol.homogeneous.push_back(y0);

  for (int k = 1; k <= prob.order; ++k) {
    PolySeq<S> forcing =
        k == 1 ? prob.perturbation.apply(y0) : prob.perturbation.linearized(y0, sol.orders[1]);
    PolySeq<S> yk = particular_solution(prob.base, forcing);
    if (yk.is_zero()) yk = PolySeq<S>(prob.anchor);
    PolySeq<S> hom(prob.anchor);
    if (k == prob.order && !prob.top_order_constants.empty()) {
      if (prob.top_order_constants.size() != modes.size())
        throw Error("renorm", "need one top-order constant name per mode");
      for (std::size_t i = 0; i < modes.size(); ++i) {
        int id = static_cast<int>(sol.amplitudes.size());
        sol.amplitudes.push_back({prob.top_order_constants[i], modes[i].root, k, std::nullopt});
        hom = add(hom, make_term<S, AmpPoly<S>>(AmpPoly<S>::variable(id), modes[i].root, prob.anchor, 0));
      }
    }
    sol.orders.push_back(add(yk, hom));
    sol.homogeneous.push_back(hom);
  }
  return sol;
}

/// Per-base view of the Newton expansion at n = m. Only binomial degrees 0
/// and 1 survive there: Y0 reads degree 0, Y1 = (r-1) c0 + r c1.
template <Scalar S>
struct ModeCollection {
  S base;
  std::vector<AmpPoly<S>> y0_coeff;  // per order
  std::vector<AmpPoly<S>> secular;   // per order, coefficient of r^n C(n-m,1)

  AmpPoly<S> y1_coeff(std::size_t k) const {
    using T = scalar_traits<S>;
    return y0_coeff[k] * (base - T::one()) + secular[k] * base;
  }
};

template <Scalar S>
struct CollectedY {
  S epsilon;
  std::vector<ModeCollection<S>> modes;

  /// Y0(m) = sum_k eps^k y_k(m) with the amplitudes frozen at `amps`.
  S Y0(long m, std::span<const S> amps) const { return sum(m, amps, false); }
  /// Y1(m) = sum_k eps^k (delta y_k)(m).
  S Y1(long m, std::span<const S> amps) const { return sum(m, amps, true); }

 private:
  S sum(long m, std::span<const S> amps, bool first_difference) const {
    using T = scalar_traits<S>;
    S acc = T::zero();
    for (const auto& md : modes) {
      S eps_k = T::one();
      S mode_acc = T::zero();
      for (std::size_t k = 0; k < md.y0_coeff.size(); ++k) {
        const AmpPoly<S> c = first_difference ? md.y1_coeff(k) : md.y0_coeff[k];
        mode_acc = mode_acc + eps_k * c.value(amps);
        eps_k = eps_k * epsilon;
      }
      acc = acc + mode_acc * ipow(md.base, m);
    }
    return acc;
  }
};

template <Scalar S>
CollectedY<S> collect_Y(const PerturbationSolution<S>& sol) {
  using T = scalar_traits<S>;
  CollectedY<S> out{sol.epsilon, {}};
  const std::size_t orders = sol.orders.size();
  auto slot = [&](const S& base) -> ModeCollection<S>& {
    for (auto& md : out.modes)
      if (T::same_base(md.base, base)) return md;
    out.modes.push_back({base, std::vector<AmpPoly<S>>(orders), std::vector<AmpPoly<S>>(orders)});
    return out.modes.back();
  };
  for (std::size_t k = 0; k < orders; ++k) {
    for (const auto& t : sol.orders[k].terms()) {
      if (t.degree > 1) continue;
      auto& md = slot(t.base);
      if (t.degree == 0)
        md.y0_coeff[k] += t.coeff;
      else
        md.secular[k] += t.coeff;
    }
  }
  return out;
}

enum class RenormKind { LinearDiagonal, Nonlinear };

template <Scalar S>
struct RenormEquation {
  std::size_t amplitude = 0;
  std::vector<RateTerm<S>> rate;  // Delta A(m) = sum of terms, eps powers included
};

template <Scalar S>
struct RenormSystem {
  std::vector<AmplitudeSymbol<S>> unknowns;
  std::vector<RenormEquation<S>> updates;  // one per unknown, same order
  RenormKind kind = RenormKind::LinearDiagonal;
  Closure closure = Closure::Linear;
  std::vector<S> diagonal_rates;  // c_A for linear-diagonal systems

  S rate(std::size_t a, long m, std::span<const S> amps) const {
    S acc = scalar_traits<S>::zero();
    for (const auto& t : updates[a].rate) acc = acc + t.coeff.value(amps) * t.factor(m);
    return acc;
  }

  std::string describe() const {
    std::vector<std::string> names;
    for (const auto& u : unknowns) names.push_back(u.name);
    std::string out;
    for (std::size_t a = 0; a < updates.size(); ++a) {
      if (a != 0) out += "; ";
      out += "Delta " + names[a] + " = ";
      if (updates[a].rate.empty()) out += "0";
      for (std::size_t i = 0; i < updates[a].rate.size(); ++i) {
        const auto& t = updates[a].rate[i];
        if (i != 0) out += " + ";
        out += "(" + t.coeff.to_string(names) + ")";
        if (t.profile)
          out += "*g(m)";
        else if (!t.m_independent())
          out += "*" + scalar_traits<S>::to_string(t.m_base) + "^m";
      }
    }
    return out;
  }
};

namespace detail {

template <Scalar S>
std::vector<RateTerm<S>> close_rate(const std::vector<RateTerm<S>>& full, Closure closure) {
  if (closure == Closure::Full) return full;
  std::vector<RateTerm<S>> out;
  for (const auto& t : full) {
    if (!t.m_independent()) continue;
    AmpPoly<S> lin = t.coeff.homogeneous_part(1);
    if (!lin.is_zero()) out.push_back({lin, t.m_base, {}});
  }
  return out;
}

}  // namespace detail

/// One update per amplitude. The secular coefficient of a mode drives the
/// order-0 amplitude on that mode; constants entering at higher orders get
/// Delta = 0. Linear closure keeps amplitude-linear, m-independent parts.
template <Scalar S>
RenormSystem<S> form_renorm_system(const PerturbationSolution<S>& sol, const CollectedY<S>& collected,
                                   Closure closure) {
  using T = scalar_traits<S>;
  RenormSystem<S> sys;
  sys.unknowns = sol.amplitudes;
  sys.closure = closure;
  const std::size_t n_amp = sol.amplitudes.size();
  std::vector<std::vector<RateTerm<S>>> full(n_amp);

  for (const auto& md : collected.modes) {
    AmpPoly<S> secular;
    S eps_k = T::one();
    for (const auto& c : md.secular) {
      secular += c * eps_k;
      eps_k = eps_k * collected.epsilon;
    }
    if (secular.is_zero()) continue;
    std::optional<std::size_t> owner;
    for (std::size_t a = 0; a < n_amp; ++a)
      if (sol.amplitudes[a].order == 0 && T::same_base(sol.amplitudes[a].mode, md.base)) owner = a;
    if (!owner)
      throw Error("renorm", "unmatched secular mode " + T::to_string(md.base) + ": not a homogeneous mode");
    full[*owner].push_back({secular, T::one(), {}});
  }
  for (std::size_t a = 0; a < sol.frozen_rates.size() && a < n_amp; ++a)
    if (!sol.frozen_rates[a].empty()) full[a] = sol.frozen_rates[a];

  sys.kind = RenormKind::LinearDiagonal;
  sys.diagonal_rates.assign(n_amp, T::zero());
  for (std::size_t a = 0; a < n_amp; ++a) {
    std::vector<RateTerm<S>> rate;
    if (closure == Closure::Linear && a < sol.registered_linear.size() && sol.registered_linear[a])
      rate = *sol.registered_linear[a];
    else
      rate = detail::close_rate(full[a], closure);
    AmpPoly<S> total;
    bool constant_in_m = true;
    for (const auto& t : rate) {
      constant_in_m = constant_in_m && t.m_independent();
      total += t.coeff;
    }
    if (!constant_in_m) {
      sys.kind = RenormKind::Nonlinear;
    } else if (!total.is_zero()) {
      auto c = total.as_multiple_of(static_cast<int>(a));
      if (c)
        sys.diagonal_rates[a] = *c;
      else
        sys.kind = RenormKind::Nonlinear;
    }
    sys.updates.push_back({a, std::move(rate)});
  }
  if (sys.kind == RenormKind::Nonlinear) sys.diagonal_rates.clear();
  return sys;
}

/// Solved amplitude sequences A(m).
template <Scalar S>
class AmplitudePaths {
  using T = scalar_traits<S>;

 public:
  AmplitudePaths() = default;
  static AmplitudePaths closed(std::vector<S> initial, std::vector<S> rates) {
    AmplitudePaths p;
    p.closed_ = true;
    p.initial_ = std::move(initial);
    p.rates_ = std::move(rates);
    return p;
  }
  static AmplitudePaths tabulated(std::vector<S> initial, std::vector<std::vector<S>> table) {
    AmplitudePaths p;
    p.closed_ = false;
    p.initial_ = std::move(initial);
    p.table_ = std::move(table);
    return p;
  }

  bool closed_form() const { return closed_; }
  const std::vector<S>& initial() const { return initial_; }
  const std::vector<S>& rates() const { return rates_; }
  std::size_t size() const { return initial_.size(); }
  long table_limit() const { return closed_ || table_.empty() ? -1 : static_cast<long>(table_[0].size()) - 1; }

  S value(std::size_t a, long m, Form form) const {
    if (closed_) {
      if (form == Form::Power) return initial_[a] * ipow(T::one() + rates_[a], m);
      std::complex<double> v =
          T::to_complex(initial_[a]) * std::exp(T::to_complex(rates_[a]) * static_cast<double>(m));
      return T::from_complex(v);
    }
    if (m < 0 || m > table_limit())
      throw Error("renorm", "amplitude requested at m = " + std::to_string(m) + " outside the iterated range [0, " +
                                std::to_string(table_limit()) + "]");
    return table_[a][static_cast<std::size_t>(m)];
  }

  /// The (1+c)^m ~ exp(c m) identification, one line per amplitude.
  std::vector<std::string> metadata(std::span<const std::string> names) const {
    std::vector<std::string> out;
    for (std::size_t a = 0; a < initial_.size(); ++a) {
      std::string n = a < names.size() ? names[a] : "A" + std::to_string(a);
      if (closed_) {
        std::string c = T::to_string(rates_[a]);
        out.push_back(n + "(m) = " + n + "(0) * (1 + " + c + ")^m ~ " + n + "(0) * exp(" + c + " m)");
      } else {
        out.push_back(n + "(m) tabulated by forward iteration for m <= " + std::to_string(table_limit()));
      }
    }
    return out;
  }

 private:
  bool closed_ = true;
  std::vector<S> initial_;
  std::vector<S> rates_;
  std::vector<std::vector<S>> table_;
};

inline constexpr long kDefaultIterationLimit = 4096;
inline constexpr double kAmplitudeDivergence = 1e6;

/// Closed form for linear-diagonal systems; forward iteration otherwise.
template <Scalar S>
AmplitudePaths<S> solve_renorm(const RenormSystem<S>& sys, std::vector<S> initial,
                               long m_max = kDefaultIterationLimit) {
  using T = scalar_traits<S>;
  if (initial.size() != sys.unknowns.size())
    throw Error("renorm", "need one initial value per amplitude (" + std::to_string(sys.unknowns.size()) + ")");
  if (sys.kind == RenormKind::LinearDiagonal) return AmplitudePaths<S>::closed(std::move(initial), sys.diagonal_rates);

  if constexpr (T::exact) {
    throw Error("renorm", "nonlinear renormalization systems are iterated in float mode");
  } else {
    std::vector<std::vector<S>> table(initial.size());
    std::vector<S> cur = initial;
    for (long m = 0; m <= m_max; ++m) {
      for (std::size_t a = 0; a < cur.size(); ++a) table[a].push_back(cur[a]);
      if (m == m_max) break;
      std::vector<S> next = cur;
      for (std::size_t a = 0; a < cur.size(); ++a) next[a] = cur[a] + sys.rate(a, m, cur);
      // The guard applies to A(m) r^m: an amplitude may legitimately grow to
      // cancel a decaying mode, as in homotopy runs.
      for (std::size_t a = 0; a < next.size(); ++a) {
        double size = std::abs(next[a]) * std::pow(std::abs(sys.unknowns[a].mode), static_cast<double>(m + 1));
        if (!std::isfinite(std::abs(next[a])) || !(size <= kAmplitudeDivergence))
          throw Error("renorm", "amplitude iteration diverged at m = " + std::to_string(m + 1));
      }
      cur = std::move(next);
    }
    return AmplitudePaths<S>::tabulated(std::move(initial), std::move(table));
  }
}

/// coeff(amplitudes(n)) * base^n, or * shape(n) when a shape is set.
template <Scalar S>
struct GlobalTerm {
  AmpPoly<S> coeff;
  S base = scalar_traits<S>::one();
  std::function<S(long)> shape;
};

template <Scalar S>
class GlobalSolution {
  using T = scalar_traits<S>;

 public:
  GlobalSolution() = default;
  GlobalSolution(std::vector<GlobalTerm<S>> terms, RenormSystem<S> sys, std::vector<S> initial, long m_max,
                 double validity_scale)
      : terms_(std::move(terms)), system_(std::move(sys)), m_max_(m_max), validity_scale_(validity_scale) {
    for (const auto& u : system_.unknowns) names_.push_back(u.name);
    apply_links(initial);
    paths_ = solve_renorm(system_, std::move(initial), m_max_);
  }

  /// Wraps a closed-form answer (used for the published solutions).
  static GlobalSolution from_function(std::function<S(long)> f, std::string description, double validity_scale) {
    GlobalSolution g;
    g.direct_ = std::move(f);
    g.description_ = std::move(description);
    g.validity_scale_ = validity_scale;
    return g;
  }

  S evaluate(long n, Form form = Form::Power) const {
    if (direct_) return direct_(n);
    std::vector<S> amps;
    amps.reserve(paths_.size());
    for (std::size_t a = 0; a < paths_.size(); ++a) amps.push_back(paths_.value(a, n, form));
    S acc = T::zero();
    for (const auto& t : terms_) acc = acc + t.coeff.value(amps) * (t.shape ? t.shape(n) : ipow(t.base, n));
    return acc;
  }

  GlobalSolution with_initial(std::vector<S> initial) const {
    if (direct_) throw Error("renorm", "a closed-form solution has no free constants");
    return GlobalSolution(terms_, system_, std::move(initial), m_max_, validity_scale_);
  }

  bool is_closed_form_wrapper() const { return static_cast<bool>(direct_); }
  const std::vector<GlobalTerm<S>>& terms() const { return terms_; }
  const RenormSystem<S>& system() const { return system_; }
  const AmplitudePaths<S>& paths() const { return paths_; }
  const std::vector<std::string>& amplitude_names() const { return names_; }
  std::size_t amplitude_count() const { return names_.size(); }
  double validity_scale() const { return validity_scale_; }

  std::string describe() const {
    if (direct_) return description_;
    std::string out;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (i != 0) out += " + ";
      out += "(" + terms_[i].coeff.to_string(names_) + ")";
      out += terms_[i].shape ? "*shape(n)" : "*" + T::to_string(terms_[i].base) + "^n";
    }
    return out;
  }

 private:
  void apply_links(std::vector<S>& initial) const {
    if (initial.size() != system_.unknowns.size())
      throw Error("renorm", "need one initial value per amplitude (" + std::to_string(system_.unknowns.size()) + ")");
    for (std::size_t a = 0; a < initial.size(); ++a)
      if (auto link = system_.unknowns[a].conjugate_link) initial[a] = T::conj(initial.at(*link));
  }

  std::vector<GlobalTerm<S>> terms_;
  RenormSystem<S> system_;
  AmplitudePaths<S> paths_;
  std::vector<std::string> names_;
  long m_max_ = kDefaultIterationLimit;
  double validity_scale_ = 0.0;
  std::function<S(long)> direct_;
  std::string description_;
};

struct AssembleOptions {
  /// Keep the non-secular particular parts of orders >= 1 (for example the
  /// third harmonic of a cubic nonlinearity). The worked answers drop them.
  bool include_nonsecular = false;
  long m_max = kDefaultIterationLimit;
  double validity_scale = 0.0;  // 0: 1/|eps|
};

/// Y0 with every amplitude replaced by its solved sequence. Linked
/// amplitudes take the conjugate of their partner's initial value.
template <Scalar S>
GlobalSolution<S> assemble_global(const PerturbationSolution<S>& sol, const RenormSystem<S>& sys,
                                  std::vector<S> initial, const AssembleOptions& opt = {}) {
  using T = scalar_traits<S>;
  std::vector<GlobalTerm<S>> terms;
  if (!sol.shapes.empty()) {
    for (std::size_t a = 0; a < sol.shapes.size(); ++a)
      terms.push_back({AmpPoly<S>::variable(static_cast<int>(a)), T::one(), sol.shapes[a]});
  } else {
    S eps_k = T::one();
    for (std::size_t k = 0; k < sol.orders.size(); ++k) {
      const PolySeq<S>& part = opt.include_nonsecular ? sol.orders[k] : sol.homogeneous[k];
      for (const auto& t : part.terms())
        if (t.degree == 0) terms.push_back({t.coeff * eps_k, t.base, {}});
      eps_k = eps_k * sol.epsilon;
    }
  }
  double scale = opt.validity_scale;
  if (scale == 0.0) {
    double e = T::magnitude(sol.epsilon);
    scale = e > 0.0 ? 1.0 / e : 0.0;
  }
  return GlobalSolution<S>(std::move(terms), sys, std::move(initial), opt.m_max, scale);
}

template <Scalar S>
struct BoundaryCondition {
  long n = 0;
  S value;
};

/// Condition y(probe) ~ value standing in for a limit at infinity; checked
/// after fitting, never used to fix a constant.
template <Scalar S>
struct AsymptoticCondition {
  long probe = 0;
  S value;
  double tolerance = 1e-6;
};

/// Fits the free amplitudes (by index) to pointwise boundary conditions.
/// Requires a linear-diagonal system so that y(n) is linear in the
/// initial amplitudes.
template <Scalar S>
GlobalSolution<S> apply_boundary(const GlobalSolution<S>& global, const std::vector<BoundaryCondition<S>>& conditions,
                                 std::vector<std::size_t> free, const std::vector<AsymptoticCondition<S>>& at_infinity = {}) {
  using T = scalar_traits<S>;
  if (global.is_closed_form_wrapper()) throw Error("renorm", "a closed-form solution has no free constants");
  if (global.system().kind != RenormKind::LinearDiagonal)
    throw Error("renorm", "boundary fitting needs a linear-diagonal renormalization system");
  if (conditions.size() != free.size())
    throw Error("renorm", std::to_string(conditions.size()) + " boundary conditions for " +
                              std::to_string(free.size()) + " free constants");
  for (auto a : free) {
    if (a >= global.amplitude_count()) throw Error("renorm", "free constant index out of range");
    if (global.system().unknowns[a].conjugate_link) throw Error("renorm", "a conjugate-linked amplitude cannot be free");
  }
  std::vector<S> base_init = global.paths().initial();
  for (auto a : free) base_init[a] = T::zero();
  GlobalSolution<S> offset = global.with_initial(base_init);

  const std::size_t k = free.size();
  std::vector<std::vector<S>> mat(k, std::vector<S>(k));
  std::vector<S> rhs(k);
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<S> unit = base_init;
    unit[free[j]] = T::one();
    GlobalSolution<S> col = global.with_initial(unit);
    for (std::size_t i = 0; i < k; ++i) mat[i][j] = col.evaluate(conditions[i].n) - offset.evaluate(conditions[i].n);
  }
  for (std::size_t i = 0; i < k; ++i) rhs[i] = conditions[i].value - offset.evaluate(conditions[i].n);
  std::vector<S> x;
  try {
    x = detail::solve_linear<S, S>(std::move(mat), std::move(rhs), "renorm", "boundary system");
  } catch (const Error&) {
    throw Error("renorm", "singular boundary system");
  }
  std::vector<S> init = base_init;
  for (std::size_t j = 0; j < k; ++j) init[free[j]] = x[j];
  GlobalSolution<S> fitted = global.with_initial(init);
  for (const auto& c : at_infinity) {
    double miss = T::distance(fitted.evaluate(c.probe), c.value);
    if (miss > c.tolerance)
      throw Error("renorm", "condition at infinity not met: |y(" + std::to_string(c.probe) + ") - target| = " +
                                std::to_string(miss));
  }
  return fitted;
}

template <Scalar S>
using ResidualFunctional = std::function<S(const std::function<S(long)>&, long)>;

struct ResidualScan {
  long first = 0;
  std::vector<double> values;  // |residual(n)| for n = first, first+1, ...
  double sup = 0.0;
  long argsup = 0;
};

template <Scalar S>
ResidualScan residual_scan(const std::function<S(long)>& y, const ResidualFunctional<S>& residual, long n0, long n1) {
  ResidualScan scan;
  scan.first = n0;
  scan.argsup = n0;
  for (long n = n0; n <= n1; ++n) {
    double r = scalar_traits<S>::magnitude(residual(y, n));
    scan.values.push_back(r);
    if (r > scan.sup) {
      scan.sup = r;
      scan.argsup = n;
    }
  }
  return scan;
}

template <Scalar S>
ResidualScan residual_scan(const GlobalSolution<S>& g, const ResidualFunctional<S>& residual, long n0, long n1,
                           Form form = Form::Power) {
  std::function<S(long)> y = [&g, form](long n) { return g.evaluate(n, form); };
  return residual_scan<S>(y, residual, n0, n1);
}

// ---------------------------------------------------------------------------
// Homotopy renormalization. The homotopy (1-eps) L + eps N = 0 reads
// L y = eps (L - N) y, so each order solves L y_{k+1} = (L - N)-forcing and
// eps is set to 1 at assembly. Two base operators are registered.

/// Constant-coefficient base operator L with target N (both as shift
/// polynomials; L must be linear).
template <Scalar S>
struct HtrConstantCoefficient {
  LinearRecurrence<S> base_operator;
  ShiftPoly<S> target;
  long anchor = 0;
  std::vector<ModeSpec<S>> modes;
};

/// L y = y(n+1) - phi(n+1)/phi(n) y(n) with phi(n) = 1/(1+e^{lambda n}),
/// target N y = y(n+2) - 2y(n+1) + y(n) - D (y - y^3) scaled by gain k.
struct HtrDomainWallKernel {
  double lambda = 0.2;
  double gain = 1.0;
  double D = 1.0;
  long anchor = 0;
};

/// 1/(1+e^x) without overflow.
inline double logistic_kernel(double x) {
  if (x > 0.0) {
    double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

template <Scalar S>
PerturbationSolution<S> htr_expand(const HtrConstantCoefficient<S>& h, int order = 1) {
  using T = scalar_traits<S>;
  TrProblem<S> prob{h.base_operator, ShiftPoly<S>::from_recurrence(h.base_operator) - h.target, T::one(), h.anchor,
                    order, h.modes, {}, "eps"};
  PerturbationSolution<S> sol = perturb_expand(prob);
  sol.mode = ExpansionMode::HTR;

  // First-order L: variation of constants with the summand frozen at j = m,
  // y1(n) ~ rho^n f(m) / (c1 rho^{m+1}) (n - m). Resonant forcing reproduces
  // the lindiff secular coefficient; nonresonant forcing r^n adds the
  // m-dependent rate c/(c1 rho) (r/rho)^m.
  if (h.base_operator.order() == 1 && order == 1) {
    const S c1 = h.base_operator.at(1);
    const S rho = -h.base_operator.at(0) / c1;
    PolySeq<S> forcing = prob.perturbation.apply(sol.orders[0]);
    sol.frozen_rates.assign(sol.amplitudes.size(), {});
    for (std::size_t a = 0; a < sol.amplitudes.size(); ++a) {
      if (!T::same_base(sol.amplitudes[a].mode, rho)) continue;
      for (const auto& t : forcing.terms()) {
        if (t.degree != 0) continue;
        sol.frozen_rates[a].push_back({t.coeff * T::inverse(c1 * rho), t.base / rho, {}});
      }
    }
  }
  return sol;
}

inline PerturbationSolution<FloatComplex> htr_expand(const HtrDomainWallKernel& h) {
  using S = FloatComplex;
  if (!(h.lambda > 0.0)) throw Error("renorm", "domain-wall kernel needs lambda > 0");
  const double lambda = h.lambda, k = h.gain, D = h.D;
  auto phi = [lambda](long n) { return logistic_kernel(lambda * static_cast<double>(n)); };

  PerturbationSolution<S> sol;
  sol.mode = ExpansionMode::HTR;
  sol.epsilon = S(1.0);
  sol.anchor = h.anchor;
  sol.amplitudes.push_back({"A", S(1.0), 0, std::nullopt});
  sol.shapes.push_back([phi](long n) { return S(phi(n)); });

  // f(m) = k (delta^2 y0 - D (y0 - y0^3)) with y0 = A phi, over phi(m+1).
  auto linear_profile = [phi, D](long m) {
    double d2 = phi(m + 2) - 2.0 * phi(m + 1) + phi(m);
    return S((d2 - D * phi(m)) / phi(m + 1));
  };
  auto cubic_profile = [phi, D](long m) { return S(D * std::pow(phi(m), 3) / phi(m + 1)); };
  const AmpPoly<S> a = AmpPoly<S>::variable(0);
  sol.frozen_rates.push_back({{a * S(k), S(1.0), linear_profile}, {a * a * a * S(k), S(1.0), cubic_profile}});
  // The linear closure k(1 - D) A is registered with the operator; it is not
  // the amplitude-linear part of the frozen rate.
  sol.registered_linear.push_back(std::vector<RateTerm<S>>{{a * S(k * (1.0 - D)), S(1.0), {}}});
  return sol;
}

}  // namespace nmren
