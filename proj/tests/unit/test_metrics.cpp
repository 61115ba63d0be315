#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "checks.h"
#include "congfu/errors.h"
#include "congfu/metrics.h"
#include "oracles.h"

using namespace congfu;
using namespace congfu::metrics;

namespace {

struct Instance {
  std::vector<double> s;
  std::vector<int> y;
};

Instance random_instance(std::mt19937_64& rng, std::size_t n, bool coarse) {
  Instance in;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    in.s.push_back(coarse ? std::floor(u(rng) * 4) / 4 : u(rng));
    in.y.push_back(u(rng) < 0.4);
  }
  in.y[0] = 1;
  in.y[1] = 0;
  return in;
}

}  // namespace

TEST(Metrics, WorkedExamples) {
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  const std::vector<int> y{0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(auroc(s, y), 0.75);
  EXPECT_NEAR(aucpr(s, y), 0.5 * 1.0 + 0.5 * (2.0 / 3.0), 1e-15);
  EXPECT_DOUBLE_EQ(auroc(std::vector<double>{1, 1, 1}, std::vector<int>{1, 0, 1}), 0.5);
  EXPECT_DOUBLE_EQ(aucpr(std::vector<double>{1, 1, 1}, std::vector<int>{1, 0, 1}), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(auroc(std::vector<double>{0.2, 0.9}, std::vector<int>{0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(aucpr(std::vector<double>{0.2, 0.9}, std::vector<int>{0, 1}), 1.0);
}

TEST(Metrics, AgreeWithBruteForceOracles) {
  const auto c = congfu::testing::check_metric_oracles(300, 1);
  EXPECT_TRUE(c.ok) << c.detail;
  std::mt19937_64 rng(2);
  for (int k = 0; k < 100; ++k) {
    const auto in = random_instance(rng, 3 + k % 40, k % 2 == 0);
    EXPECT_NEAR(auroc(in.s, in.y), congfu::testing::brute_auroc(in.s, in.y), 1e-12);
    EXPECT_NEAR(aucpr(in.s, in.y), congfu::testing::sweep_aucpr(in.s, in.y), 1e-12);
  }
}

TEST(Metrics, MonotoneTransformInvariance) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 50; ++k) {
    const auto in = random_instance(rng, 30, k % 2 == 1);
    std::vector<double> t;
    for (double v : in.s) t.push_back(std::exp(3 * v) - 7);
    EXPECT_NEAR(auroc(t, in.y), auroc(in.s, in.y), 1e-12);
    EXPECT_NEAR(aucpr(t, in.y), aucpr(in.s, in.y), 1e-12);
  }
}

TEST(Metrics, NegatedScoresComplementAuroc) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 50; ++k) {
    const auto in = random_instance(rng, 25, k % 2 == 0);
    std::vector<double> neg;
    for (double v : in.s) neg.push_back(-v);
    EXPECT_NEAR(auroc(in.s, in.y) + auroc(neg, in.y), 1.0, 1e-12);
  }
}

TEST(Metrics, ShuffleInvariance) {
  std::mt19937_64 rng(5);
  auto in = random_instance(rng, 60, true);
  const double a = auroc(in.s, in.y), p = aucpr(in.s, in.y);
  std::vector<std::size_t> order(in.s.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Instance sh;
  for (auto i : order) {
    sh.s.push_back(in.s[i]);
    sh.y.push_back(in.y[i]);
  }
  EXPECT_NEAR(auroc(sh.s, sh.y), a, 1e-12);
  EXPECT_NEAR(aucpr(sh.s, sh.y), p, 1e-12);
}

TEST(Metrics, UndefinedAndInvalidInputs) {
  const std::vector<double> s{0.1, 0.2};
  EXPECT_THROW(auroc(s, std::vector<int>{1, 1}), UndefinedMetricError);
  EXPECT_THROW(auroc(s, std::vector<int>{0, 0}), UndefinedMetricError);
  EXPECT_THROW(aucpr(s, std::vector<int>{0, 0}), UndefinedMetricError);
  EXPECT_DOUBLE_EQ(aucpr(s, std::vector<int>{1, 1}), 1.0);
  EXPECT_THROW(auroc(s, std::vector<int>{1}), DimensionError);
  EXPECT_THROW(auroc(s, std::vector<int>{1, 2}), ValidationError);
  EXPECT_THROW(aucpr(std::vector<double>{0.1, NAN}, std::vector<int>{1, 0}), ValidationError);
}

TEST(Metrics, MeanStdFormatting) {
  const auto m = mean_std(std::vector<double>{0.975, 0.976, 0.977});
  EXPECT_NEAR(m.mean, 0.976, 1e-12);
  EXPECT_NEAR(m.std, 0.001, 1e-12);
  EXPECT_EQ(format_mean_std(m), "0.976 ± 0.001");
  EXPECT_EQ(format_mean_std({0.5, 0.0}, 2), "0.50 ± 0.00");
  EXPECT_EQ(mean_std(std::vector<double>{0.3}).std, 0.0);
  const auto two = mean_std(std::vector<double>{1.0, 3.0});
  EXPECT_DOUBLE_EQ(two.std, std::sqrt(2.0));
}

TEST(Metrics, RowFormat) {
  EXPECT_EQ(format_row({"fixture200", "transductive", "0", 0.5, 0.25}),
            "fixture200,transductive,0,0.500000,0.250000");
}
