#pragma once

// Verification harness: exact iteration, pointwise comparison over the
// validity window, ladder order fits and report serialization.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nmren/cases.hpp"
#include "nmren/error.hpp"

namespace nmren {

struct Window {
  long first = 0;
  long last = 0;
};

struct VerificationRow {
  long n = 0;
  std::complex<double> exact;
  std::complex<double> asym;
  double abs_err = 0.0;
  double residual = 0.0;
};

struct LadderPoint {
  double parameter = 0.0;
  double sup_error = 0.0;
};

struct VerificationReport {
  std::string case_name;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  std::string form;
  std::string closure;
  int order = 1;
  Window window;
  std::vector<VerificationRow> rows;
  double sup_error = 0.0;
  long argsup = 0;
  double residual_sup = 0.0;
  std::vector<LadderPoint> ladder;
  std::optional<double> empirical_order;  // +inf when every ladder error is zero
  std::vector<std::string> warnings;
  nlohmann::ordered_json extras = nlohmann::ordered_json::object();
  double wall_time = 0.0;  // seconds; never serialized
};

/// Direct iteration of the unexpanded problem. Linear constant-coefficient
/// cases are cross-checked against their root solutions.
inline Trajectory iterate_exact(const CaseStudy& cs, long n_max) {
  if (n_max < 0) throw Error("verify", "n_max must be nonnegative");
  CaseModel model = build(cs);
  Trajectory t = model.trajectory(n_max);
  if (std::holds_alternative<IllustrationCase>(cs)) {
    auto closed = *closed_form_solution(cs);
    for (long n = 0; n <= n_max; ++n)
      if (std::abs(t[n] - closed(n)) > 1e-10 * std::max(1.0, std::abs(t[n])))
        throw Error("verify", "iteration and root solution disagree at n = " + std::to_string(n));
  } else if (auto* bl = std::get_if<BoundaryLayerCase>(&cs)) {
    // Backward iteration from the right end of the closed form.
    Trajectory full = n_max >= bl->N ? t : model.trajectory(bl->N);
    long double y2 = full[bl->N].real(), y1 = full[bl->N - 1].real();
    for (long n = bl->N - 2; n >= 0; --n) {
      long double y0 = -(bl->a * y1 + bl->epsilon * y2) / bl->b;
      if (std::abs(static_cast<double>(y0) - full[n].real()) > 1e-12 * std::max(1.0, std::abs(full[n].real())))
        throw Error("verify", "backward iteration and root solution disagree at n = " + std::to_string(n));
      y2 = y1;
      y1 = y0;
    }
  }
  return t;
}

inline VerificationReport compare(const std::function<std::complex<double>(long)>& asym, const Trajectory& exact,
                                  Window w, const ResidualFunctional<FloatComplex>& residual = {}) {
  if (w.first < 0 || w.last < w.first || w.last >= static_cast<long>(exact.size()))
    throw Error("verify", "window [" + std::to_string(w.first) + ", " + std::to_string(w.last) +
                              "] outside the trajectory");
  VerificationReport r;
  r.window = w;
  r.argsup = w.first;
  std::function<FloatComplex(long)> y = asym;
  for (long n = w.first; n <= w.last; ++n) {
    VerificationRow row;
    row.n = n;
    row.exact = exact[n];
    row.asym = asym(n);
    row.abs_err = std::abs(row.exact - row.asym);
    row.residual = residual ? std::abs(residual(y, n)) : 0.0;
    if (row.abs_err > r.sup_error) {
      r.sup_error = row.abs_err;
      r.argsup = n;
    }
    r.residual_sup = std::max(r.residual_sup, row.residual);
    r.rows.push_back(row);
  }
  return r;
}

/// Least-squares slope of log(sup_error) against log(parameter).
inline double order_fit(const std::vector<LadderPoint>& ladder) {
  if (ladder.size() < 3) throw Error("verify", "an order fit needs at least 3 ladder points");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (!(ladder[i].parameter > 0.0)) throw Error("verify", "ladder parameters must be positive");
    for (std::size_t j = 0; j < i; ++j)
      if (ladder[i].parameter == ladder[j].parameter) throw Error("verify", "ladder parameters must be distinct");
  }
  for (const auto& p : ladder)
    if (p.sup_error == 0.0) return std::numeric_limits<double>::infinity();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(ladder.size());
  for (const auto& p : ladder) {
    double x = std::log(p.parameter), y = std::log(p.sup_error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

/// True when sup_error does not increase as the parameter decreases.
inline bool monotone_ladder(std::vector<LadderPoint> ladder) {
  std::sort(ladder.begin(), ladder.end(), [](const auto& a, const auto& b) { return a.parameter > b.parameter; });
  for (std::size_t i = 1; i < ladder.size(); ++i)
    if (ladder[i].sup_error > ladder[i - 1].sup_error) return false;
  return true;
}

/// |y(n)| interpolated between its local maxima; nullopt outside the first
/// and last maxima. |y| of a real oscillation repeats every half period, so
/// the sliding window spans half the nominal period.
inline std::vector<std::optional<double>> envelope(const Trajectory& t, long period) {
  if (period < 1) throw Error("verify", "envelope period must be positive");
  const long len = static_cast<long>(t.size()), half = std::max(1L, period / 4);
  std::vector<long> peaks;
  for (long n = 0; n < len; ++n) {
    const double v = std::abs(t[n]);
    bool peak = v > 0.0;
    for (long j = std::max(0L, n - half); j <= std::min(len - 1, n + half) && peak; ++j)
      if (std::abs(t[j]) > v || (std::abs(t[j]) == v && j < n)) peak = false;
    if (peak) peaks.push_back(n);
  }
  std::vector<std::optional<double>> env(t.size());
  for (std::size_t i = 0; i + 1 < peaks.size(); ++i) {
    const long a = peaks[i], b = peaks[i + 1];
    const double va = std::abs(t[a]), vb = std::abs(t[b]);
    for (long n = a; n <= b; ++n) env[n] = va + (vb - va) * static_cast<double>(n - a) / static_cast<double>(b - a);
  }
  if (peaks.size() == 1) env[peaks[0]] = std::abs(t[peaks[0]]);
  return env;
}

struct EnvelopeComparison {
  std::vector<long> n;
  std::vector<double> envelope;
  std::vector<double> target;
  double max_relative = 0.0;
};

inline EnvelopeComparison compare_envelope(const Trajectory& t, long period,
                                           const std::function<double(long)>& target, Window w) {
  auto env = envelope(t, period);
  EnvelopeComparison out;
  for (long n = w.first; n <= w.last && n < static_cast<long>(env.size()); ++n) {
    if (!env[n]) continue;
    double tv = target(n);
    out.n.push_back(n);
    out.envelope.push_back(*env[n]);
    out.target.push_back(tv);
    out.max_relative = std::max(out.max_relative, std::abs(*env[n] - tv) / std::abs(tv));
  }
  return out;
}

/// d(n) = |y(n) - R(x(n))| with R the manifold map of the result.
inline std::vector<double> manifold_distance(const ManifoldResult& r, const std::vector<double>& x,
                                             const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error("verify", "trajectory components differ in length");
  std::vector<double> d;
  for (std::size_t n = 0; n < x.size(); ++n) d.push_back(std::abs(y[n] - r.manifold(x[n])));
  return d;
}

inline std::vector<double> manifold_distance(const ManifoldResult& r) { return manifold_distance(r, r.x, r.y); }

// ---------------------------------------------------------------------------
// Whole-case runs.

struct RunOptions {
  EngineOptions engine;
  std::optional<long> window_last;
};

inline VerificationReport run_case(const CaseStudy& cs, const RunOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  EngineRun run = run_engine(cs, opt.engine);
  CaseModel model = build(cs);
  const long last = opt.window_last.value_or(default_window(cs));
  if (last < 0) throw Error("verify", "window end must be nonnegative");
  Trajectory exact = iterate_exact(cs, last);
  VerificationReport r = compare(run.value, exact, {0, last}, model.residual);
  r.case_name = case_name(cs);
  r.parameters = params_to_json(cs);
  r.form = to_string(run.form);
  r.closure = to_string(run.closure);
  r.order = run.order;
  r.warnings = run.warnings;
  r.extras["renormalization"] = run.renorm_equations;
  r.extras["solution"] = run.solution;

  if (auto* v = std::get_if<VanDerPolCase>(&cs)) {
    const long period = static_cast<long>(std::ceil(2.0 * std::numbers::pi / v->theta));
    Trajectory longer = iterate_exact(cs, last + period);
    const double amp = 2.0 * std::abs(v->a0), eps = v->epsilon;
    auto env = compare_envelope(longer, period, [=](long n) { return amp * std::exp(eps * double(n)); }, {0, last});
    r.extras["envelope"] = {{"period", period}, {"max_relative_deviation", env.max_relative}, {"points", env.n.size()}};
  } else if (auto* rc = std::get_if<ReductionCase>(&cs)) {
    auto m = reduction_pipeline(*rc, last);
    auto d = manifold_distance(m);
    double dsup = 0.0;
    for (double v : d) dsup = std::max(dsup, v);
    r.extras["manifold_distance_sup"] = dsup;
    r.extras["manifold_distance"] = d;
  } else if (std::holds_alternative<HtrDomainWallCase>(cs)) {
    r.extras["y0"] = run.value(0).real();
    r.extras["tail_after_window"] = std::abs(run.value(last + 1));
  }
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

/// One run per ladder value; the table of the last point is kept.
inline VerificationReport run_ladder(const CaseStudy& cs, const std::vector<double>& values,
                                     const RunOptions& opt = {}) {
  if (values.empty()) throw Error("verify", "empty ladder");
  const auto start = std::chrono::steady_clock::now();
  const std::string key = small_parameter_key(cs);
  std::vector<LadderPoint> ladder;
  VerificationReport last;
  for (double v : values) {
    CaseStudy c = with_parameter(cs, key, v);
    last = run_case(c, opt);  // without an override the window follows the parameter
    ladder.push_back({v, last.sup_error});
  }
  last.ladder = ladder;
  if (ladder.size() >= 3) last.empirical_order = order_fit(ladder);
  last.extras["ladder_parameter"] = key;
  last.extras["monotone_ladder"] = monotone_ladder(ladder);
  last.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return last;
}

// ---------------------------------------------------------------------------
// Serialization.

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string to_csv(const VerificationReport& r) {
  std::string out = "n,exact_re,exact_im,asym_re,asym_im,abs_err,residual\n";
  for (const auto& row : r.rows) {
    out += std::to_string(row.n);
    for (double v : {row.exact.real(), row.exact.imag(), row.asym.real(), row.asym.imag(), row.abs_err, row.residual})
      out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

inline nlohmann::ordered_json json_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return nullptr;
  return v;
}

inline nlohmann::ordered_json to_json(const VerificationReport& r) {
  nlohmann::ordered_json j;
  j["case"] = r.case_name;
  j["parameters"] = r.parameters;
  j["form"] = r.form;
  j["closure"] = r.closure;
  j["order"] = r.order;
  j["window"] = {{"first", r.window.first}, {"last", r.window.last}};
  j["sup_error"] = json_number(r.sup_error);
  j["argsup"] = r.argsup;
  j["residual_sup"] = json_number(r.residual_sup);
  nlohmann::ordered_json ladder = nlohmann::ordered_json::array();
  for (const auto& p : r.ladder) ladder.push_back({{"parameter", p.parameter}, {"sup_error", json_number(p.sup_error)}});
  j["ladder"] = ladder;
  if (r.empirical_order) j["empirical_order"] = json_number(*r.empirical_order);
  j["warnings"] = r.warnings;
  j["extras"] = r.extras;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"n", row.n},
                    {"exact_re", json_number(row.exact.real())},
                    {"exact_im", json_number(row.exact.imag())},
                    {"asym_re", json_number(row.asym.real())},
                    {"asym_im", json_number(row.asym.imag())},
                    {"abs_err", json_number(row.abs_err)},
                    {"residual", json_number(row.residual)}});
  j["rows"] = rows;
  return j;
}

}  // namespace nmren
