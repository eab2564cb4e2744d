#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "nmren/verify.hpp"

namespace nmren {
namespace {

using FC = FloatComplex;

TEST(IterateExact, IllustrationWithoutPerturbationIsFourPeriodic) {
  Trajectory t = build_model(IllustrationCase{0.0}).trajectory(40);
  const double cycle[] = {1.0, 0.0, -1.0, 0.0};
  for (long n = 0; n <= 40; ++n) EXPECT_EQ(t[n], FC(cycle[n % 4]));
}

TEST(IterateExact, CrossChecksLinearCases) {
  EXPECT_NO_THROW(iterate_exact(IllustrationCase{0.1}, 100));
  for (double eps : {0.04, 0.02, 0.01}) {
    BoundaryLayerCase bl;
    bl.epsilon = eps;
    Trajectory t = iterate_exact(bl, 5);  // checked over the whole interval regardless
    EXPECT_EQ(t.size(), 6u);
  }
  EXPECT_THROW(iterate_exact(IllustrationCase{}, -1), Error);
}

TEST(IterateExact, VanDerPolSmallAmplitudeStaysBounded) {
  VanDerPolCase v;
  Trajectory t = iterate_exact(v, static_cast<long>(2.0 / v.epsilon));
  for (const auto& y : t) EXPECT_LT(std::abs(y), 1.0);
}

TEST(Compare, ExactAgainstItselfIsZero) {
  Trajectory t = iterate_exact(IllustrationCase{0.05}, 20);
  auto self = [&t](long n) { return t[n]; };
  auto r = compare(self, t, {0, 20});
  EXPECT_EQ(r.sup_error, 0.0);
  EXPECT_EQ(r.rows.size(), 21u);
  EXPECT_THROW(compare(self, t, {0, 21}), Error);
  EXPECT_THROW(compare(self, t, {5, 4}), Error);
}

TEST(Compare, SupIsMaximumOfRows) {
  auto r = run_case(VanDerPolCase{});
  double worst = 0.0;
  for (const auto& row : r.rows) worst = std::max(worst, row.abs_err);
  EXPECT_EQ(r.sup_error, worst);
  EXPECT_EQ(r.window.last, 100);
}

TEST(OrderFit, SyntheticPowerLaws) {
  std::vector<LadderPoint> sq{{0.1, 3e-2}, {0.05, 7.5e-3}, {0.025, 1.875e-3}};
  EXPECT_NEAR(order_fit(sq), 2.0, 1e-12);
  std::vector<LadderPoint> lin{{0.4, 0.8}, {0.2, 0.4}, {0.1, 0.2}, {0.05, 0.1}};
  EXPECT_NEAR(order_fit(lin), 1.0, 1e-12);
  std::vector<LadderPoint> zero{{0.1, 0.0}, {0.05, 0.0}, {0.025, 0.0}};
  EXPECT_EQ(order_fit(zero), std::numeric_limits<double>::infinity());
  EXPECT_THROW(order_fit({{0.1, 1.0}, {0.05, 0.5}}), Error);
  EXPECT_THROW(order_fit({{0.1, 1.0}, {0.1, 0.5}, {0.05, 0.2}}), Error);
  EXPECT_TRUE(monotone_ladder(sq));
  EXPECT_FALSE(monotone_ladder({{0.1, 1.0}, {0.05, 2.0}, {0.025, 0.1}}));
}

TEST(Verify, IllustrationErrorAndLadder) {
  auto r = run_case(IllustrationCase{0.05});
  EXPECT_EQ(r.window.last, 20);
  EXPECT_LE(r.sup_error, 5 * 0.05);
  auto ladder = run_ladder(IllustrationCase{}, {0.1, 0.05, 0.025});
  ASSERT_TRUE(ladder.empirical_order);
  EXPECT_GE(*ladder.empirical_order, 1.7);
  EXPECT_LE(*ladder.empirical_order, 2.3);
  EXPECT_EQ(ladder.ladder.size(), 3u);
  EXPECT_EQ(ladder.window.last, 40);
  EXPECT_TRUE(ladder.extras["monotone_ladder"].get<bool>());
}

TEST(Verify, TwoPointLadderHasNoOrder) {
  auto r = run_ladder(IllustrationCase{}, {0.1, 0.05});
  EXPECT_FALSE(r.empirical_order);
}

TEST(Envelope, SyntheticGrowingCosine) {
  Trajectory t;
  const double theta = std::numbers::pi / 5;
  for (long n = 0; n <= 200; ++n) t.emplace_back(0.01 * std::exp(0.005 * n) * std::cos(theta * n), 0.0);
  auto cmp = compare_envelope(t, 10, [](long n) { return 0.01 * std::exp(0.005 * n); }, {0, 150});
  EXPECT_GT(cmp.n.size(), 100u);
  EXPECT_LT(cmp.max_relative, 1e-3);
  EXPECT_THROW(envelope(t, 0), Error);
}

TEST(Envelope, VanDerPolWithinTenPercent) {
  auto r = run_case(VanDerPolCase{});
  EXPECT_LE(r.extras["envelope"]["max_relative_deviation"].get<double>(), 0.1);
}

TEST(ManifoldDistance, OnManifoldStart) {
  for (double eps : {0.04, 0.02, 0.01}) {
    ReductionCase rc;
    rc.epsilon = eps;
    const long last = static_cast<long>(std::ceil(1.0 / eps - 1e-9));
    auto m = reduction_pipeline(rc, last);
    auto d = manifold_distance(m);
    for (long n = 0; n <= last; ++n) EXPECT_LE(d[n], 5 * eps * eps) << eps << " " << n;
  }
}

TEST(ManifoldDistance, OffManifoldStartRelaxes) {
  ReductionCase rc;
  rc.y0 = reduction_manifold(rc.model, rc.epsilon, rc.x0) + 0.1;
  auto m = reduction_pipeline(rc, 50);
  auto d = manifold_distance(m);
  EXPECT_NEAR(d[0], 0.1, 1e-15);
  for (long n = 30; n <= 50; ++n) EXPECT_LE(d[n], 5 * rc.epsilon * rc.epsilon);
}

TEST(ManifoldDistance, FrozenSlowVariable) {
  ReductionCase rc;
  rc.epsilon = 0.0;
  rc.y0 = 0.9;
  auto m = reduction_pipeline(rc, 10);
  auto d = manifold_distance(m);
  EXPECT_NEAR(d[0], 0.9 - 0.25, 1e-15);
  for (long n = 1; n <= 10; ++n) EXPECT_EQ(d[n], 0.0);  // y(1) = g(x(0)) already
  EXPECT_THROW(manifold_distance(m, {1.0}, {}), Error);
}

TEST(Reports, CsvLayoutAndDeterminism) {
  auto a = run_case(default_case("boundary-layer"));
  auto b = run_case(default_case("boundary-layer"));
  std::string csv = to_csv(a);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "n,exact_re,exact_im,asym_re,asym_im,abs_err,residual");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 22);
  EXPECT_EQ(csv, to_csv(b));
  EXPECT_EQ(to_json(a).dump(2), to_json(b).dump(2));
  EXPECT_EQ(to_json(a).dump().find("wall_time"), std::string::npos);
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}

TEST(Reports, JsonFields) {
  auto r = run_ladder(default_case("htr-domain-wall"), {0.1, 0.2, 0.4});
  auto j = to_json(r);
  EXPECT_EQ(j["case"], "htr-domain-wall");
  EXPECT_EQ(j["ladder"].size(), 3u);
  EXPECT_TRUE(j.contains("empirical_order"));
  EXPECT_EQ(j["extras"]["y0"].get<double>(), 1.0);
  EXPECT_EQ(j["rows"][0]["n"], 0);
  EXPECT_EQ(json_number(std::numeric_limits<double>::infinity()), "inf");
}

TEST(Reports, EveryDefaultCaseRuns) {
  for (const auto& name : case_names()) {
    auto r = run_case(default_case(name));
    EXPECT_EQ(r.case_name, name);
    EXPECT_EQ(r.rows.size(), static_cast<std::size_t>(default_window(default_case(name)) + 1));
    EXPECT_TRUE(std::isfinite(r.sup_error));
  }
}

}  // namespace
}  // namespace nmren
