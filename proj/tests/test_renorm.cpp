#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nmren/newton.hpp"
#include "nmren/renorm.hpp"
#include "test_support.hpp"

namespace nmren {
namespace {

using testing::EC;
using testing::gauss;
using FC = FloatComplex;
using P = AmpPoly<EC>;
using FP = AmpPoly<FC>;

const EC kI = EC::i();

TrProblem<EC> illustration(const EC& eps, int order = 1) {
  return {LinearRecurrence<EC>({EC(1L), EC(), EC(1L)}),
          ShiftPoly<EC>::y(1) * EC(-1L),
          eps,
          0,
          order,
          {{"A", kI, std::nullopt}, {"B", -kI, 0}},
          {},
          "eps"};
}

TrProblem<FC> van_der_pol(double theta, double eps) {
  using SP = ShiftPoly<FC>;
  const FC lam = std::polar(1.0, theta);
  SP one = SP::constant(FC(1.0));
  SP m = (one - SP::y(1) * SP::y(1)) * (SP::y(2) - SP::y(0));
  return {LinearRecurrence<FC>({FC(1.0), FC(-2.0 * std::cos(theta)), FC(1.0)}),
          m,
          FC(eps),
          0,
          1,
          {{"A", lam, std::nullopt}, {"B", std::conj(lam), 0}},
          {},
          "eps"};
}

TrProblem<EC> boundary_layer(const EC& a, const EC& b, const EC& eps) {
  return {LinearRecurrence<EC>({a, b}), ShiftPoly<EC>::y(2) * EC(-1L), eps, 0, 1, {{"A", -b / a, std::nullopt}},
          {"B0"}, "eps"};
}

/// Least-squares slope of log(err) against log(eps).
double slope(const std::vector<double>& eps, const std::vector<double>& err) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    double x = std::log(eps[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

const ModeCollection<EC>& mode_at(const CollectedY<EC>& y, const EC& base) {
  for (const auto& md : y.modes)
    if (md.base == base) return md;
  throw Error("test", "no such mode");
}

double poly_distance(const FP& a, const FP& b) {
  double worst = 0.0;
  for (const auto& [mono, c] : (a - b).terms()) worst = std::max(worst, std::abs(c));
  return worst;
}

TEST(PerturbExpand, IllustrationSecularTerms) {
  const EC eps = EC::ratio(1, 20);
  auto sol = perturb_expand(illustration(eps));
  ASSERT_EQ(sol.order(), 1);
  const P a = P::variable(0), b = P::variable(1);
  EXPECT_EQ(sol.orders[0], (PolySeq<EC>(0, {{a, kI, 0}, {b, -kI, 0}})));
  // y1 = (i/2) A i^n (n-m) - (i/2) B (-i)^n (n-m); no (-1)^m cross terms.
  const EC half_i = kI * EC::ratio(1, 2);
  EXPECT_EQ(sol.orders[1], (PolySeq<EC>(0, {{a * half_i, kI, 1}, {b * (-half_i), -kI, 1}})));
  for (const auto& t : sol.orders[0].terms()) EXPECT_EQ(t.degree, 0);
}

TEST(PerturbExpand, VanDerPolSecularStructure) {
  auto sol = perturb_expand(van_der_pol(std::numbers::pi / 5, 0.01));
  const FP a = FP::variable(0), b = FP::variable(1);
  const FC lam = std::polar(1.0, std::numbers::pi / 5);
  int found = 0;
  for (const auto& t : sol.orders[1].terms()) {
    if (t.degree != 1) continue;
    if (std::abs(t.base - lam) < 1e-9) {
      EXPECT_LE(poly_distance(t.coeff, a - a * a * b), 1e-12);
      ++found;
    } else if (std::abs(t.base - std::conj(lam)) < 1e-9) {
      EXPECT_LE(poly_distance(t.coeff, b - a * b * b), 1e-12);
      ++found;
    } else {
      ADD_FAILURE() << "unexpected secular base " << t.base;
    }
  }
  EXPECT_EQ(found, 2);
}

TEST(PerturbExpand, BoundaryLayerSecularTerm) {
  const EC a(2L), b(1L), eps = EC::ratio(1, 100);
  auto sol = perturb_expand(boundary_layer(a, b, eps));
  ASSERT_EQ(sol.amplitudes.size(), 2u);
  EXPECT_EQ(sol.amplitudes[1].name, "B0");
  EXPECT_EQ(sol.amplitudes[1].order, 1);
  const EC rho = -b / a;
  const P amp = P::variable(0), b0 = P::variable(1);
  EXPECT_EQ(sol.orders[1], (PolySeq<EC>(0, {{b0, rho, 0}, {amp * (b / (a * a)), rho, 1}})));
}

TEST(PerturbExpand, Errors) {
  auto bad = illustration(EC::ratio(1, 10));
  bad.order = 3;
  EXPECT_THROW(perturb_expand(bad), Error);
  // Irrational roots cannot be solved exactly.
  TrProblem<EC> irrational{LinearRecurrence<EC>({EC(1L), EC(), EC(-2L)}), ShiftPoly<EC>::y(0), EC::ratio(1, 10),
                           0, 1, {}, {}, "eps"};
  EXPECT_THROW(perturb_expand(irrational), Error);
  auto wrong_mode = illustration(EC::ratio(1, 10));
  wrong_mode.modes[0].root = EC(2L);
  EXPECT_THROW(perturb_expand(wrong_mode), Error);
}

TEST(CollectY, IllustrationModes) {
  const EC eps = EC::ratio(1, 20);
  auto sol = perturb_expand(illustration(eps));
  auto y = collect_Y(sol);
  ASSERT_EQ(y.modes.size(), 2u);
  const auto& plus = mode_at(y, kI);
  EXPECT_EQ(plus.secular[1], P::variable(0) * (kI * EC::ratio(1, 2)));
  // Y1 on mode i at order 1 is i * (i/2) A since y1 has no degree-0 part.
  EXPECT_EQ(plus.y1_coeff(1), P::variable(0) * (kI * kI * EC::ratio(1, 2)));
}

TEST(CollectY, BoundaryLayerMode) {
  const EC a(2L), b(1L);
  auto y = collect_Y(perturb_expand(boundary_layer(a, b, EC::ratio(1, 100))));
  ASSERT_EQ(y.modes.size(), 1u);
  EXPECT_EQ(y.modes[0].secular[1], P::variable(0) * (b / (a * a)));
}

TEST(CollectY, AtZeroEpsilonY1IsDeltaY0) {
  auto sol = perturb_expand(illustration(EC()));
  auto y = collect_Y(sol);
  const std::vector<EC> amps{gauss(2, 1), gauss(-1, 3)};
  for (long m = -3; m <= 10; ++m) EXPECT_EQ(y.Y1(m, amps), y.Y0(m + 1, amps) - y.Y0(m, amps));
}

TEST(FormRenormSystem, IllustrationRates) {
  const EC eps = EC::ratio(1, 20);
  auto sol = perturb_expand(illustration(eps));
  auto sys = form_renorm_system(sol, collect_Y(sol), Closure::Linear);
  ASSERT_EQ(sys.kind, RenormKind::LinearDiagonal);
  EXPECT_EQ(sys.diagonal_rates[0], kI * eps * EC::ratio(1, 2));
  EXPECT_EQ(sys.diagonal_rates[1], -kI * eps * EC::ratio(1, 2));
}

TEST(FormRenormSystem, IllustrationSecondOrderRate) {
  // lambda/i = sqrt(1 - eps^2/4) + i eps/2 = 1 + i eps/2 - eps^2/8 + O(eps^4)
  const EC eps = EC::ratio(1, 20);
  auto sol = perturb_expand(illustration(eps, 2));
  auto sys = form_renorm_system(sol, collect_Y(sol), Closure::Linear);
  ASSERT_EQ(sys.kind, RenormKind::LinearDiagonal);
  EXPECT_EQ(sys.diagonal_rates[0], kI * eps * EC::ratio(1, 2) - eps * eps * EC::ratio(1, 8));
}

TEST(FormRenormSystem, VanDerPolClosures) {
  const double eps = 0.01;
  auto sol = perturb_expand(van_der_pol(std::numbers::pi / 5, eps));
  auto y = collect_Y(sol);
  auto lin = form_renorm_system(sol, y, Closure::Linear);
  ASSERT_EQ(lin.kind, RenormKind::LinearDiagonal);
  EXPECT_NEAR(std::abs(lin.diagonal_rates[0] - FC(eps)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(lin.diagonal_rates[1] - FC(eps)), 0.0, 1e-14);

  auto full = form_renorm_system(sol, y, Closure::Full);
  ASSERT_EQ(full.kind, RenormKind::Nonlinear);
  const FP a = FP::variable(0), b = FP::variable(1);
  ASSERT_EQ(full.updates[0].rate.size(), 1u);
  EXPECT_LE(poly_distance(full.updates[0].rate[0].coeff, (a - a * a * b) * FC(eps)), 1e-14);
  EXPECT_LE(poly_distance(full.updates[1].rate[0].coeff, (b - a * b * b) * FC(eps)), 1e-14);
}

TEST(FormRenormSystem, UnmatchedSecularModeAborts) {
  PerturbationSolution<EC> sol;
  sol.epsilon = EC::ratio(1, 10);
  sol.amplitudes.push_back({"A", EC(1L), 0, std::nullopt});
  sol.orders.push_back(PolySeq<EC>(0, {{P::variable(0), EC(1L), 0}}));
  sol.orders.push_back(PolySeq<EC>(0, {{P::variable(0), EC(2L), 1}}));
  sol.homogeneous = {sol.orders[0], PolySeq<EC>(0)};
  EXPECT_THROW(form_renorm_system(sol, collect_Y(sol), Closure::Linear), Error);
}

TEST(SolveRenorm, ClosedFormAndMetadata) {
  const EC eps = EC::ratio(1, 10);
  auto sol = perturb_expand(illustration(eps));
  auto sys = form_renorm_system(sol, collect_Y(sol), Closure::Linear);
  auto paths = solve_renorm(sys, {gauss(1, 0), gauss(1, 0)});
  ASSERT_TRUE(paths.closed_form());
  const EC growth = EC(1L) + kI * eps * EC::ratio(1, 2);
  for (long m = 0; m <= 12; ++m) EXPECT_EQ(paths.value(0, m, Form::Power), ipow(growth, m));
  auto meta = paths.metadata(sol.names());
  ASSERT_EQ(meta.size(), 2u);
  EXPECT_NE(meta[0].find("exp("), std::string::npos);
}

TEST(SolveRenorm, LogisticAmplitudeConvergesToStableRoots) {
  // Delta B = eps B (1 - k B^2) with eps = 0.01, k = 1: 0 unstable, 1 stable.
  const FP b = FP::variable(0);
  RenormSystem<FC> sys;
  sys.unknowns.push_back({"B", FC(1.0), 0, std::nullopt});
  sys.updates.push_back({0, {{(b - b * b * b) * FC(0.01), FC(1.0), {}}}});
  sys.kind = RenormKind::Nonlinear;
  sys.closure = Closure::Full;
  for (double b0 : {0.1, 2.0}) {
    auto paths = solve_renorm(sys, {FC(b0)}, 5000);
    EXPECT_NEAR(paths.value(0, 5000, Form::Power).real(), 1.0, 1e-3) << b0;
  }
  auto zero = solve_renorm(sys, {FC(0.0)}, 5000);
  EXPECT_EQ(zero.value(0, 5000, Form::Power), FC(0.0));
  EXPECT_THROW(zero.value(0, 5001, Form::Power), Error);
}

TEST(AssembleGlobal, IllustrationMatchesTrigonometricForm) {
  const double eps = 0.05;
  TrProblem<FC> prob{LinearRecurrence<FC>({FC(1.0), FC(0.0), FC(1.0)}),
                     ShiftPoly<FC>::y(1) * FC(-1.0),
                     FC(eps),
                     0,
                     1,
                     {{"A", FC(0.0, 1.0), std::nullopt}, {"B", FC(0.0, -1.0), 0}},
                     {},
                     "eps"};
  auto sol = perturb_expand(prob);
  auto sys = form_renorm_system(sol, collect_Y(sol), Closure::Linear);
  const double c0 = 1.0, d0 = -0.3;
  const FC a0 = FC(c0, -d0) / 2.0;
  auto g = assemble_global(sol, sys, {a0, FC()});
  const double phi = (eps + std::numbers::pi) / 2.0;
  for (long n = 0; n <= 200; ++n) {
    double published = c0 * std::cos(n * phi) + d0 * std::sin(n * phi);
    EXPECT_NEAR(std::abs(g.evaluate(n, Form::Exponential) - published), 0.0, 1e-9) << n;
    EXPECT_LE(std::abs(g.evaluate(n, Form::Power).imag()), 1e-12 * (1.0 + std::abs(g.evaluate(n))));
  }
  EXPECT_NEAR(g.validity_scale(), 20.0, 1e-12);
}

TEST(AssembleGlobal, VanDerPolGrowingOscillation) {
  const double eps = 0.01, theta = std::numbers::pi / 5;
  auto sol = perturb_expand(van_der_pol(theta, eps));
  auto sys = form_renorm_system(sol, collect_Y(sol), Closure::Linear);
  const FC a0(0.005, 0.0);
  auto g = assemble_global(sol, sys, {a0, FC()});
  for (long n = 0; n <= 100; ++n) {
    FC expected = a0 * std::exp(FC(eps, theta) * double(n)) + std::conj(a0) * std::exp(FC(eps, -theta) * double(n));
    EXPECT_NEAR(std::abs(g.evaluate(n, Form::Exponential) - expected), 0.0, 1e-12);
  }
}

TEST(AssembleGlobal, RealityWithConjugateLinks) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double eps = 0.01 + 0.1 * std::abs(u(rng));
    const double theta = 0.3 + 2.0 * std::abs(u(rng));
    auto sol = perturb_expand(van_der_pol(theta, eps));
    for (Closure c : {Closure::Linear, Closure::Full}) {
      auto sys = form_renorm_system(sol, collect_Y(sol), c);
      auto g = assemble_global(sol, sys, {FC(0.01 * u(rng), 0.01 * u(rng)), FC(7.0, 7.0)}, {false, 200, 0.0});
      for (long n = 0; n <= 200; ++n) {
        FC v = g.evaluate(n);
        EXPECT_LE(std::abs(v.imag()), 1e-12 * std::max(1.0, std::abs(v))) << trial << " " << n;
      }
    }
  }
}

TEST(AssembleGlobal, NonsecularPartsAreOptIn) {
  auto sol = perturb_expand(van_der_pol(std::numbers::pi / 5, 0.01));
  auto sys = form_renorm_system(sol, collect_Y(sol), Closure::Linear);
  auto plain = assemble_global(sol, sys, {FC(0.2), FC()});
  auto with = assemble_global(sol, sys, {FC(0.2), FC()}, {true, kDefaultIterationLimit, 0.0});
  EXPECT_EQ(plain.terms().size(), 2u);
  EXPECT_GT(with.terms().size(), plain.terms().size());
}

TEST(ApplyBoundary, BoundaryLayerConstantsMatchClosedForm) {
  const EC a(2L), b(1L), alpha(1L), beta = EC::ratio(1, 2);
  const long big_n = 20;
  for (long inv : {25L, 50L, 100L}) {
    const EC eps = EC::ratio(1, inv);
    auto sol = perturb_expand(boundary_layer(a, b, eps));
    auto sys = form_renorm_system(sol, collect_Y(sol), Closure::Linear);
    ASSERT_EQ(sys.kind, RenormKind::LinearDiagonal);
    EXPECT_EQ(sys.diagonal_rates[0], eps * b / (a * a));
    EXPECT_EQ(sys.diagonal_rates[1], EC());
    auto g = assemble_global(sol, sys, {EC(), EC()});
    auto fitted = apply_boundary(g, {{0, alpha}, {big_n, beta}}, {0, 1});

    const EC growth = ipow(EC(1L) + eps * b / (a * a), big_n);
    const EC ratio = ipow(-a / b, big_n);
    const EC a0 = (beta * ratio - alpha) / (growth - EC(1L));
    const EC b0 = (alpha * growth - beta * ratio) / ((growth - EC(1L)) * eps);
    EXPECT_EQ(fitted.paths().initial()[0], a0);
    EXPECT_EQ(fitted.paths().initial()[1], b0);
    EXPECT_EQ(fitted.evaluate(0), alpha);
    EXPECT_EQ(fitted.evaluate(big_n), beta);
    EXPECT_EQ(a0 + eps * b0, alpha);  // eps B0 -> alpha - A0 at every eps
  }
}

TEST(ApplyBoundary, Errors) {
  auto sol = perturb_expand(boundary_layer(EC(2L), EC(1L), EC::ratio(1, 100)));
  auto sys = form_renorm_system(sol, collect_Y(sol), Closure::Linear);
  auto g = assemble_global(sol, sys, {EC(), EC()});
  EXPECT_THROW(apply_boundary(g, {{0, EC(1L)}}, {0, 1}), Error);
  EXPECT_THROW(apply_boundary(g, {{3, EC(1L)}, {3, EC(2L)}}, {0, 1}), Error);
}

TEST(HtrExpand, CubicFrozenRate) {
  const EC eta = EC::ratio(1, 100);
  using SP = ShiftPoly<EC>;
  // N y = delta y - eta (y + y^3); L y = delta y + y/2.
  SP target = SP::y(1) - SP::y(0) - SP::y(0) * eta - SP::y(0) * SP::y(0) * SP::y(0) * eta;
  HtrConstantCoefficient<EC> h{LinearRecurrence<EC>({EC(1L), EC::ratio(-1, 2)}), target, 0,
                               {{"K0", EC::ratio(1, 2), std::nullopt}}};
  auto sol = htr_expand(h);
  EXPECT_EQ(sol.mode, ExpansionMode::HTR);
  EXPECT_EQ(sol.orders[0], (PolySeq<EC>(0, {{P::variable(0), EC::ratio(1, 2), 0}})));
  // lindiff secular coefficient on (1/2)^n: (1 + 2 eta) K0
  const P k0 = P::variable(0);
  bool seen = false;
  for (const auto& t : sol.orders[1].terms())
    if (t.degree == 1) {
      EXPECT_EQ(t.base, EC::ratio(1, 2));
      EXPECT_EQ(t.coeff, k0 * (EC(1L) + EC(2L) * eta));
      seen = true;
    }
  EXPECT_TRUE(seen);
  // Frozen rate: (1 + 2 eta) K0 + 2 eta K0^3 (1/4)^m
  ASSERT_EQ(sol.frozen_rates.size(), 1u);
  ASSERT_EQ(sol.frozen_rates[0].size(), 2u);
  for (const auto& t : sol.frozen_rates[0]) {
    if (t.m_independent())
      EXPECT_EQ(t.coeff, k0 * (EC(1L) + EC(2L) * eta));
    else {
      EXPECT_EQ(t.m_base, EC::ratio(1, 4));
      EXPECT_EQ(t.coeff, k0 * k0 * k0 * (EC(2L) * eta));
    }
  }

  auto y = collect_Y(sol);
  auto lin = form_renorm_system(sol, y, Closure::Linear);
  ASSERT_EQ(lin.kind, RenormKind::LinearDiagonal);
  EXPECT_EQ(lin.diagonal_rates[0], EC(1L) + EC(2L) * eta);
  const EC b0 = EC::ratio(1, 10);
  auto g = assemble_global(sol, lin, {b0}, {false, kDefaultIterationLimit, 100.0});
  for (long n = 0; n <= 60; ++n) {
    EXPECT_EQ(g.paths().value(0, n, Form::Power), ipow(EC(2L), n) * ipow(EC(1L) + eta, n) * b0);
    EXPECT_EQ(g.evaluate(n), ipow(EC(1L) + eta, n) * b0);
  }
  auto full = form_renorm_system(sol, y, Closure::Full);
  EXPECT_EQ(full.kind, RenormKind::Nonlinear);
  EXPECT_THROW(assemble_global(sol, full, {b0}), Error);  // exact scalars do not iterate
}

TEST(HtrExpand, DomainWall) {
  for (double lambda : {0.1, 0.2, 0.4}) {
    auto sol = htr_expand(HtrDomainWallKernel{lambda, 1.0, 1.0, 0});
    auto y = collect_Y(sol);
    auto lin = form_renorm_system(sol, y, Closure::Linear);
    ASSERT_EQ(lin.kind, RenormKind::LinearDiagonal);
    EXPECT_EQ(lin.diagonal_rates[0], FC(0.0));  // k (1 - D) with D = 1
    auto g = assemble_global(sol, lin, {FC()}, {false, kDefaultIterationLimit, 1.0 / lambda});
    const long far = static_cast<long>(std::ceil(20.0 / lambda));
    auto fitted = apply_boundary(g, {{0, FC(1.0)}}, {0}, {{far, FC(0.0), 1e-6}});
    EXPECT_NEAR(std::abs(fitted.paths().initial()[0] - FC(2.0)), 0.0, 1e-14);
    EXPECT_EQ(fitted.evaluate(0), FC(1.0));
    for (long n = 0; n <= far; ++n)
      EXPECT_NEAR(fitted.evaluate(n).real(), 2.0 / (1.0 + std::exp(lambda * n)), 1e-15);
    EXPECT_LT(std::abs(fitted.evaluate(far + 1)), 1e-6);

    auto full = form_renorm_system(sol, y, Closure::Full);
    EXPECT_EQ(full.kind, RenormKind::Nonlinear);
  }
  // D != 1 grows the amplitude; the far condition can no longer hold.
  auto sol = htr_expand(HtrDomainWallKernel{0.1, 1.0, -2.0, 0});
  auto sys = form_renorm_system(sol, collect_Y(sol), Closure::Linear);
  auto g = assemble_global(sol, sys, {FC()});
  EXPECT_THROW(apply_boundary(g, {{0, FC(1.0)}}, {0}, {{200, FC(0.0), 1e-6}}), Error);
  EXPECT_THROW(htr_expand(HtrDomainWallKernel{0.0, 1.0, 1.0, 0}), Error);
}

TEST(HtrExpand, AgreesWithTrForTheIllustration) {
  const EC eps = EC::ratio(1, 40);
  using SP = ShiftPoly<EC>;
  LinearRecurrence<EC> l({EC(1L), EC(), EC(1L)});
  SP target = SP::y(2) + SP::y(1) * eps + SP::y(0);
  HtrConstantCoefficient<EC> h{l, target, 0, {{"A", kI, std::nullopt}, {"B", -kI, 0}}};
  auto hsol = htr_expand(h);
  auto tsol = perturb_expand(illustration(eps));
  auto hsys = form_renorm_system(hsol, collect_Y(hsol), Closure::Linear);
  auto tsys = form_renorm_system(tsol, collect_Y(tsol), Closure::Linear);
  EXPECT_EQ(hsys.diagonal_rates, tsys.diagonal_rates);
  auto hg = assemble_global(hsol, hsys, {gauss(1, 1), EC()});
  auto tg = assemble_global(tsol, tsys, {gauss(1, 1), EC()});
  for (long n = 0; n <= 40; ++n) EXPECT_EQ(hg.evaluate(n), tg.evaluate(n));
}

TEST(ResidualScan, ExactSolutionHasZeroResidual) {
  // y(n+2) - (5/2) y(n+1) + y(n) = 0 has roots 2 and 1/2.
  std::function<EC(long)> y = [](long n) { return ipow(EC(2L), n) + ipow(EC::ratio(1, 2), n); };
  ResidualFunctional<EC> r = [](const std::function<EC(long)>& f, long n) {
    return f(n + 2) - EC::ratio(5, 2) * f(n + 1) + f(n);
  };
  auto scan = residual_scan<EC>(y, r, 0, 30);
  EXPECT_EQ(scan.sup, 0.0);
  EXPECT_EQ(scan.values.size(), 31u);
}

TEST(RenormConsistency, LadderOrderForLinearDiagonalSystems) {
  // delta(Y0 with A(m)) - Y1 with the same substitution, sup over m in [0, 2/eps].
  auto residual_sup = [](const TrProblem<FC>& prob, FC a0, Form form) {
    auto sol = perturb_expand(prob);
    auto y = collect_Y(sol);
    auto sys = form_renorm_system(sol, y, Closure::Linear);
    auto paths = solve_renorm(sys, {a0, std::conj(a0)});
    auto amps = [&](long m) {
      return std::vector<FC>{paths.value(0, m, form), paths.value(1, m, form)};
    };
    SequenceOracle<FC> y0 = [&](long m) { return y.Y0(m, amps(m)); };
    const long m_max = static_cast<long>(std::ceil(2.0 / std::abs(prob.epsilon)));
    double sup = 0.0;
    for (long m = 0; m <= m_max; ++m) {
      auto t0 = difference_table(y0, m, 1);
      std::vector<DifferenceTable<FC>> t1{{m, {y.Y1(m, amps(m))}}};
      sup = std::max(sup, std::abs(renorm_consistency_ladder<FC>(t0, t1)[0]));
    }
    return sup;
  };
  const std::vector<double> ladder{0.1, 0.05, 0.025};
  std::vector<double> ill, vdp;
  for (double eps : ladder) {
    TrProblem<FC> prob{LinearRecurrence<FC>({FC(1.0), FC(0.0), FC(1.0)}),
                       ShiftPoly<FC>::y(1) * FC(-1.0),
                       FC(eps),
                       0,
                       1,
                       {{"A", FC(0.0, 1.0), std::nullopt}, {"B", FC(0.0, -1.0), 0}},
                       {},
                       "eps"};
    ill.push_back(residual_sup(prob, FC(0.5, 0.2), Form::Exponential));
    // The power form satisfies the renormalization equation exactly.
    EXPECT_LE(residual_sup(prob, FC(0.5, 0.2), Form::Power), 1e-13);
    vdp.push_back(residual_sup(van_der_pol(std::numbers::pi / 5, eps), FC(0.005), Form::Exponential));
  }
  EXPECT_GE(slope(ladder, ill), 1.7);
  EXPECT_GE(slope(ladder, vdp), 1.7);
}

}  // namespace
}  // namespace nmren
