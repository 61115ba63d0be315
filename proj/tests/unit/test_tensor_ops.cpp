#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "congfu/errors.h"
#include "congfu/gradcheck.h"
#include "congfu/ops.h"
#include "congfu/optim.h"
#include "oracles.h"

using namespace congfu;
using congfu::testing::random_tensor;
using Td = Tensor<double>;

namespace {

std::vector<Index> idx(std::initializer_list<Index> v) { return v; }

double grad_err(const std::function<Td()>& f, std::vector<Td> inputs, std::uint64_t seed = 0) {
  return gradient_check(f, std::move(inputs), {1e-4, 0, seed}).max_rel_error;
}

}  // namespace

TEST(Matmul, IdentityTimesMatrix) {
  const Td a({2, 2}, {1, 0, 0, 1});
  const Td b({2, 2}, {2, 3, 4, 5});
  EXPECT_EQ(matmul(a, b).to_vector(), (std::vector<double>{2, 3, 4, 5}));
}

TEST(Matmul, RowTimesColumn) {
  const Td a({1, 2}, {1, 2});
  const Td b({2, 1}, {3, 4});
  EXPECT_EQ(matmul(a, b).item(), 11.0);
}

TEST(Matmul, ShapeMismatchNamesBothShapes) {
  const Td a({2, 3}, std::vector<double>(6, 1.0));
  const Td b({2, 2}, std::vector<double>(4, 1.0));
  try {
    matmul(a, b);
    FAIL();
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("[2x3]"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("[2x2]"), std::string::npos) << e.what();
  }
}

TEST(Matmul, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(1);
  auto a = random_tensor({3, 3}, rng), b = random_tensor({3, 3}, rng);
  EXPECT_LT(grad_err([&] { return sum(matmul(a, b)); }, {a, b}), 1e-4);
}

TEST(Relu, ForwardAndZeroSubgradient) {
  Td x({3}, {-1, 0, 2});
  x.set_requires_grad(true);
  const auto y = relu(x);
  EXPECT_EQ(y.to_vector(), (std::vector<double>{0, 0, 2}));
  backward(sum(y));
  EXPECT_EQ(std::vector<double>(x.grad().begin(), x.grad().end()), (std::vector<double>{0, 0, 1}));
}

TEST(Relu, AllNegativeGivesZeroOutputAndGradient) {
  Td x({4}, {-1, -2, -0.5, -3});
  x.set_requires_grad(true);
  const auto y = relu(x);
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
  backward(sum(y));
  for (double g : x.grad()) EXPECT_EQ(g, 0.0);
}

TEST(Relu, GradientAwayFromKinks) {
  std::mt19937_64 rng(2);
  auto x = random_tensor({5, 4}, rng, -2, 2, 1e-2);
  EXPECT_LT(grad_err([&] { return sum(mul_rows(relu(x), Td({5}, {1, 2, 3, 4, 5}))); }, {x}), 1e-4);
}

TEST(SegmentSoftmax, UniformScores) {
  const Td s({2}, {0, 0});
  const auto seg = idx({0, 0});
  EXPECT_EQ(segment_softmax(s, seg, 1).to_vector(), (std::vector<double>{0.5, 0.5}));
}

TEST(SegmentSoftmax, SingleElementSegmentIsOne) {
  const Td s({3}, {5, -1, 2});
  const auto seg = idx({0, 1, 1});
  EXPECT_EQ(segment_softmax(s, seg, 2)[0], 1.0);
}

TEST(SegmentSoftmax, MatchesExtendedPrecisionOracle) {
  const Td s({3}, {1, 2, 3});
  const auto seg = idx({0, 0, 0});
  const auto y = segment_softmax(s, seg, 1);
  long double z = 0;
  for (int k = 1; k <= 3; ++k) z += std::exp(static_cast<long double>(k));
  for (int k = 1; k <= 3; ++k) {
    EXPECT_NEAR(y[k - 1], static_cast<double>(std::exp(static_cast<long double>(k)) / z), 1e-7);
  }
}

TEST(SegmentSoftmax, SumsToOneAndShiftInvariant) {
  std::mt19937_64 rng(3);
  auto s = random_tensor({9}, rng, -5, 5);
  const auto seg = idx({0, 0, 0, 1, 2, 2, 2, 2, 2});
  const auto y = segment_softmax(s, seg, 4);  // segment 3 is empty
  double s0 = 0, s1 = 0, s2 = 0;
  for (int i = 0; i < 3; ++i) s0 += y[i];
  s1 = y[3];
  for (int i = 4; i < 9; ++i) s2 += y[i];
  EXPECT_NEAR(s0, 1.0, 1e-6);
  EXPECT_NEAR(s1, 1.0, 1e-6);
  EXPECT_NEAR(s2, 1.0, 1e-6);
  auto shifted = s.to_vector();
  for (int i = 4; i < 9; ++i) shifted[i] += 123.0;
  const auto y2 = segment_softmax(Td({9}, shifted), seg, 4);
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(y[i], y2[i], 1e-12);
}

TEST(SegmentSoftmax, Gradient) {
  std::mt19937_64 rng(4);
  auto s = random_tensor({7}, rng, -2, 2);
  auto w = random_tensor({7, 1}, rng);
  const auto seg = idx({0, 0, 1, 1, 1, 2, 2});
  EXPECT_LT(grad_err([&] { return sum(mul_rows(w, segment_softmax(s, seg, 3))); }, {s}), 1e-4);
}

TEST(SegmentSum, SmallExample) {
  const Td v({3, 1}, {1, 2, 3});
  const auto seg = idx({0, 0, 1});
  EXPECT_EQ(segment_sum(v, seg, 2).to_vector(), (std::vector<double>{3, 3}));
}

TEST(SegmentSum, OneSegmentPerRowIsIdentity) {
  std::mt19937_64 rng(5);
  const auto v = random_tensor({4, 3}, rng);
  const auto seg = idx({0, 1, 2, 3});
  EXPECT_EQ(segment_sum(v, seg, 4).to_vector(), v.to_vector());
}

TEST(SegmentSum, MatchesLoopOracleExactly) {
  std::mt19937_64 rng(6);
  const auto v = random_tensor({50, 8}, rng);
  std::vector<Index> seg(50);
  for (auto& s : seg) s = rng() % 5;
  const auto y = segment_sum(v, seg, 5);
  std::vector<double> oracle(5 * 8, 0.0);
  for (std::size_t i = 0; i < 50; ++i)
    for (std::size_t j = 0; j < 8; ++j) oracle[seg[i] * 8 + j] += v.at(i, j);
  EXPECT_EQ(y.to_vector(), oracle);
}

TEST(SegmentSum, EmptySegmentIsZeroRowAndOutOfRangeThrows) {
  const Td v({2, 2}, {1, 2, 3, 4});
  const auto seg = idx({0, 2});
  const auto y = segment_sum(v, seg, 3);
  EXPECT_EQ(y.at(1, 0), 0.0);
  EXPECT_EQ(y.at(1, 1), 0.0);
  const auto bad = idx({0, 3});
  EXPECT_THROW(segment_sum(v, bad, 3), IndexError);
}

TEST(SegmentSum, Gradient) {
  std::mt19937_64 rng(7);
  auto v = random_tensor({6, 3}, rng);
  auto w = random_tensor({3, 3}, rng);
  const auto seg = idx({2, 0, 0, 1, 2, 2});
  EXPECT_LT(grad_err([&] { return sum(matmul(segment_sum(v, seg, 3), w)); }, {v, w}), 1e-4);
}

TEST(ConcatRows, Basics) {
  EXPECT_EQ(concat_rows<double>({Td({1, 1}, {1}), Td({1, 1}, {2})}).to_vector(), (std::vector<double>{1, 2}));
  const Td a({2, 2}, {1, 2, 3, 4});
  const auto with_empty = concat_rows<double>({a, Td::zeros({2, 0})});
  EXPECT_EQ(with_empty.shape(), (Shape{2, 2}));
  EXPECT_EQ(with_empty.to_vector(), a.to_vector());
  const auto wide = concat_rows<double>({Td::zeros({1, 300}), Td::zeros({1, 300}), Td::zeros({1, 300})});
  EXPECT_EQ(wide.dim(1), 900u);
  EXPECT_THROW(concat_rows<double>({Td::zeros({1, 2}), Td::zeros({2, 2})}), DimensionError);
}

TEST(ConcatRows, Gradient) {
  std::mt19937_64 rng(8);
  auto a = random_tensor({3, 2}, rng), b = random_tensor({3, 4}, rng), w = random_tensor({6, 2}, rng);
  EXPECT_LT(grad_err([&] { return sum(matmul(concat_rows<double>({a, b}), w)); }, {a, b, w}), 1e-4);
}

TEST(EmbeddingLookup, GathersRowsAndScatterAddsGradient) {
  Td table({2, 2}, {1, 2, 3, 4});
  table.set_requires_grad(true);
  const auto ids = idx({1, 0, 1});
  const auto y = embedding_lookup(table, ids);
  EXPECT_EQ(y.to_vector(), (std::vector<double>{3, 4, 1, 2, 3, 4}));
  backward(sum(y));
  EXPECT_EQ(std::vector<double>(table.grad().begin(), table.grad().end()), (std::vector<double>{1, 1, 2, 2}));
}

TEST(EmbeddingLookup, CarbonIsRowSixAndOutOfRangeNamesId) {
  std::vector<double> data(119 * 2);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = double(i / 2);
  const Td table({119, 2}, data);
  const auto c = idx({6});
  EXPECT_EQ(embedding_lookup(table, c).to_vector(), (std::vector<double>{6, 6}));
  const auto bad = idx({119});
  try {
    embedding_lookup(table, bad);
    FAIL();
  } catch (const IndexError& e) {
    EXPECT_NE(std::string(e.what()).find("119"), std::string::npos);
  }
}

TEST(EmbeddingLookup, Gradient) {
  std::mt19937_64 rng(9);
  auto table = random_tensor({5, 3}, rng), w = random_tensor({3, 2}, rng);
  const auto ids = idx({4, 1, 1, 0, 3});
  EXPECT_LT(grad_err([&] { return sum(matmul(embedding_lookup(table, ids), w)); }, {table}), 1e-4);
}

TEST(BatchNorm, NormalizesTwoRowColumn) {
  const Td x({2, 1}, {1, 3});
  const auto gamma = Td::full({1}, 1.0), beta = Td::zeros({1});
  BatchNormState<double> st(1);
  st.eps = 0.0;
  const auto y = batch_norm(x, gamma, beta, st, Mode::Train);
  EXPECT_NEAR(y[0], -1.0, 1e-12);
  EXPECT_NEAR(y[1], 1.0, 1e-12);
}

TEST(BatchNorm, ConstantColumnGivesBeta) {
  const Td x({3, 1}, {4, 4, 4});
  BatchNormState<double> st(1);
  const auto y = batch_norm(x, Td::full({1}, 2.0), Td::full({1}, 0.7), st, Mode::Train);
  for (double v : y.data()) EXPECT_NEAR(v, 0.7, 1e-12);
}

TEST(BatchNorm, RunningStatsUpdateWithMomentum) {
  const Td x({2, 1}, {1, 3});
  BatchNormState<double> st(1);
  batch_norm(x, Td::full({1}, 1.0), Td::zeros({1}), st, Mode::Train);
  EXPECT_NEAR(st.running_mean[0], 0.1 * 2.0, 1e-12);
  EXPECT_NEAR(st.running_var[0], 0.9 * 1.0 + 0.1 * 2.0, 1e-12);  // unbiased batch variance is 2
}

TEST(BatchNorm, EvalOutputIndependentOfOtherRows) {
  BatchNormState<double> st(2);
  st.running_mean = {0.5, -1.0};
  st.running_var = {2.0, 0.25};
  const auto gamma = Td({2}, {1.5, 0.5}), beta = Td({2}, {0.1, -0.2});
  const auto y1 = batch_norm(Td({2, 2}, {1, 2, 3, 4}), gamma, beta, st, Mode::Eval);
  const auto y2 = batch_norm(Td({3, 2}, {9, 9, -7, 0, 1, 2}), gamma, beta, st, Mode::Eval);
  EXPECT_EQ(y1.at(0, 0), y2.at(2, 0));
  EXPECT_EQ(y1.at(0, 1), y2.at(2, 1));
}

TEST(BatchNorm, EmptyBatchThrows) {
  BatchNormState<double> st(2);
  EXPECT_THROW(batch_norm(Td::zeros({0, 2}), Td::full({2}, 1.0), Td::zeros({2}), st, Mode::Train), ContractError);
}

TEST(BatchNorm, GradientTrainMode) {
  std::mt19937_64 rng(10);
  auto x = random_tensor({5, 3}, rng), gamma = random_tensor({3}, rng), beta = random_tensor({3}, rng);
  auto w = random_tensor({3, 1}, rng);
  BatchNormState<double> st(3);
  EXPECT_LT(grad_err([&] { return sum(matmul(batch_norm(x, gamma, beta, st, Mode::Train), w)); }, {x, gamma, beta}),
            1e-4);
}

TEST(Bce, KnownValuesAndStability) {
  const std::vector<double> one{1.0};
  EXPECT_NEAR(bce_with_logits_loss(Td({1}, {0.0}), one).item(), std::log(2.0), 1e-12);
  const auto big = bce_with_logits_loss(Td({1}, {20.0}), one).item();
  EXPECT_TRUE(std::isfinite(big));
  EXPECT_LT(big, 1e-8);
  const std::vector<double> zero{0.0};
  EXPECT_NEAR(bce_with_logits_loss(Td({1}, {-800.0}), zero).item(), 0.0, 1e-12);
  EXPECT_NEAR(bce_with_logits_loss(Td({1}, {800.0}), zero).item(), 800.0, 1e-9);
}

TEST(Bce, NonBinaryLabelRejected) {
  const std::vector<double> bad{0.5};
  EXPECT_THROW(bce_with_logits_loss(Td({1}, {0.0}), bad), ValidationError);
}

TEST(Bce, GradientIsSigmoidMinusLabelOverN) {
  std::mt19937_64 rng(11);
  auto z = random_tensor({6}, rng, -3, 3);
  const std::vector<double> y{1, 0, 0, 1, 1, 0};
  EXPECT_LT(grad_err([&] { return bce_with_logits_loss(z, y); }, {z}), 1e-4);
  auto z2 = z.detach();
  z2.set_requires_grad(true);
  backward(bce_with_logits_loss(z2, y));
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(z2.grad()[i], (1 / (1 + std::exp(-z2[i])) - y[i]) / 6.0, 1e-12);
}

TEST(Backward, SumGivesOnesAndUnusedStaysZero) {
  Td x({3}, {1, 2, 3}), unused({2}, {5, 6});
  x.set_requires_grad(true);
  unused.set_requires_grad(true);
  unused.zero_grad();
  backward(sum(x));
  for (double g : x.grad()) EXPECT_EQ(g, 1.0);
  for (double g : unused.grad()) EXPECT_EQ(g, 0.0);
}

TEST(Backward, NonScalarRootIsContractError) {
  Td x({3}, {1, 2, 3});
  x.set_requires_grad(true);
  EXPECT_THROW(backward(relu(x)), ContractError);
}

TEST(Backward, GradientLinearityIsExact) {
  std::mt19937_64 rng(12);
  auto x = random_tensor({4, 3}, rng), w = random_tensor({3, 2}, rng), v = random_tensor({3, 3}, rng);
  x.set_requires_grad(true);
  const auto l1 = [&] { return sum(matmul(x, w)); };
  const auto l2 = [&] { return sum(relu(matmul(x, v))); };
  x.zero_grad();
  backward(l1());
  backward(l2());
  const std::vector<double> separate(x.grad().begin(), x.grad().end());
  x.zero_grad();
  backward(add(l1(), l2()));
  const std::vector<double> joint(x.grad().begin(), x.grad().end());
  for (std::size_t i = 0; i < joint.size(); ++i) EXPECT_DOUBLE_EQ(joint[i], separate[i]);
}

TEST(Ops, ForwardIsBitIdenticalAcrossCalls) {
  std::mt19937_64 rng(13);
  const auto x = random_tensor({7, 5}, rng), w = random_tensor({5, 4}, rng);
  const auto seg = idx({0, 0, 1, 1, 1, 2, 2});
  const auto f = [&] {
    const auto h = relu(matmul(x, w));
    return segment_sum(mul_rows(h, segment_softmax(reshape(matmul(h, Td::full({4, 1}, 0.3)), {7}), seg, 3)), seg, 3);
  };
  EXPECT_EQ(f().to_vector(), f().to_vector());
}

TEST(Ops, RemainingOpGradients) {
  std::mt19937_64 rng(14);
  auto a = random_tensor({3, 4}, rng), b = random_tensor({3, 4}, rng), bias = random_tensor({4}, rng);
  auto s = random_tensor({1}, rng), w = random_tensor({3}, rng), col = random_tensor({4, 1}, rng);
  EXPECT_LT(grad_err([&] { return sum(matmul(add(a, b), col)); }, {a, b}), 1e-4);
  EXPECT_LT(grad_err([&] { return sum(matmul(add_bias(a, bias), col)); }, {a, bias}), 1e-4);
  EXPECT_LT(grad_err([&] { return sum(matmul(scale(a, 2.5), col)); }, {a}), 1e-4);
  EXPECT_LT(grad_err([&] { return sum(matmul(scale_by(a, s, 1.0), col)); }, {a, s}), 1e-4);
  EXPECT_LT(grad_err([&] { return sum(matmul(mul_rows(a, w), col)); }, {a, w}), 1e-4);
  auto away = random_tensor({3, 4}, rng, -1, 1, 1e-2);
  EXPECT_LT(grad_err([&] { return sum(matmul(leaky_relu(away, 0.2), col)); }, {away}), 1e-4);
  const auto col3 = random_tensor({3, 1}, rng);
  EXPECT_LT(grad_err([&] { return sum(matmul(reshape(a, {4, 3}), col3)); }, {a}), 1e-4);
}

TEST(Adam, FirstStepMovesByLearningRateTimesSign) {
  Td p({3}, {1.0, -2.0, 0.5});
  p.set_requires_grad(true);
  p.mutable_grad()[0] = 0.3;
  p.mutable_grad()[1] = -4.0;
  p.mutable_grad()[2] = 1e-3;
  AdamState<double> st(3, AdamOptions{});
  adam_step(p, st);
  EXPECT_NEAR(p[0], 1.0 - 1e-4, 1e-9);
  EXPECT_NEAR(p[1], -2.0 + 1e-4, 1e-9);
  EXPECT_NEAR(p[2], 0.5 - 1e-4, 1e-8);
  EXPECT_EQ(st.t, 1);
}

TEST(Adam, ZeroGradLeavesParamButCountsStep) {
  Td p({2}, {1.0, 2.0});
  p.set_requires_grad(true);
  p.zero_grad();
  AdamState<double> st(2, AdamOptions{});
  adam_step(p, st);
  adam_step(p, st);
  EXPECT_EQ(p.to_vector(), (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(st.t, 2);
}

TEST(Adam, MissingGradIsContractError) {
  Td p({2}, {1.0, 2.0});
  AdamState<double> st(2, AdamOptions{});
  EXPECT_THROW(adam_step(p, st), ContractError);
}

TEST(Adam, QuadraticMatchesScalarRecurrence) {
  Td w({1}, {1.0});
  w.set_requires_grad(true);
  Adam<double> opt({w}, AdamOptions{0.1});
  double ref = 1.0, m = 0, v = 0;
  for (int t = 1; t <= 100; ++t) {
    opt.zero_grad();
    backward(sum(mul_rows(reshape(w, {1, 1}), w)));
    opt.step();
    const double g = 2 * ref;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    ref -= 0.1 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
  }
  EXPECT_LT(std::abs(w[0]), 0.5);
  EXPECT_NEAR(w[0], ref, 1e-12);
}

TEST(GradientCheck, SumOfSquares) {
  std::mt19937_64 rng(15);
  auto x = random_tensor({10}, rng);
  const auto f = [&] { return sum(mul_rows(reshape(x, {10, 1}), x)); };
  EXPECT_LT(gradient_check(f, {x}).max_rel_error, 1e-8);
}

TEST(GradientCheck, ReluAwayFromKinks) {
  std::mt19937_64 rng(16);
  auto x = random_tensor({6, 3}, rng, -1, 1, 1e-2);
  const Td w({6}, {1, 2, 3, 4, 5, 6});
  const auto f = [&] { return sum(mul_rows(relu(x), w)); };
  EXPECT_LT(gradient_check(f, {x}).max_rel_error, 1e-5);
}

TEST(GradientCheck, NonFiniteIsEvaluationError) {
  Td x({1}, {1.0});
  const auto f = [&] { return scale(sum(x), std::numeric_limits<double>::infinity()); };
  EXPECT_THROW(gradient_check(f, {x}), EvaluationError);
}

TEST(Tensor, ShapeInvariant) {
  EXPECT_THROW(Td({2, 2}, {1, 2, 3}), DimensionError);
}
