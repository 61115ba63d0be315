#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "congfu/errors.h"
#include "congfu/gradcheck.h"
#include "congfu/layers.h"
#include "oracles.h"

using namespace congfu;
using namespace congfu::nn;
using namespace congfu::testing;
using Td = Tensor<double>;

namespace {

constexpr std::size_t D = 4;

struct Toy {
  GraphBatch a = batch_of({"CCO", "C1CC1N"});
  GraphBatch b = batch_of({"c1ccccc1", "C(=O)O"});
  std::mt19937_64 rng{42};
  Td xa = random_tensor({a.num_nodes(), D}, rng);
  Td xb = random_tensor({b.num_nodes(), D}, rng);
  Td c = random_tensor({2, D}, rng);
};

template <typename P>
P randomized(P p, std::mt19937_64& rng) {
  p.visit("p", randomizer(rng));
  return p;
}

CongFuLayerParams<double> random_congfu(std::mt19937_64& rng) {
  auto p = CongFuLayerParams<double>::init(ParamInit(5), "congfu.0", "gine.0", D);
  p.visit("congfu.0", "gine.0", randomizer(rng));
  for (auto& g : p.update.bn.gamma.data()) g = 1.0 + g;  // keep away from zero
  return p;
}

std::vector<Td> params_of(CongFuLayerParams<double>& p) {
  std::vector<Td> out;
  StateVisitor<double> v{[&](const std::string&, Td& t) { out.push_back(t); },
                         [](const std::string&, std::vector<double>&) {}};
  p.visit("c", "g", v);
  return out;
}

// Reverses the node order of every graph in a batch and permutes rows of x
// to match. Returns the new batch and x.
std::pair<GraphBatch, Td> reverse_nodes(const GraphBatch& g, const Td& x) {
  GraphBatch out;
  std::vector<double> data(x.size());
  for (std::size_t j = 0; j < g.num_graphs(); ++j) {
    auto m = g.unpack(j);
    const std::size_t n = m.node_ids.size();
    chem::ModelGraph r;
    r.node_ids.assign(m.node_ids.rbegin(), m.node_ids.rend());
    for (std::size_t e = m.src.size(); e-- > 0;) {
      r.src.push_back(n - 1 - m.src[e]);
      r.dst.push_back(n - 1 - m.dst[e]);
      r.edge_codes.push_back(m.edge_codes[e]);
    }
    const auto base = g.node_offsets[j];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < x.dim(1); ++k) data[(base + n - 1 - i) * x.dim(1) + k] = x.at(base + i, k);
    out.append(r);
  }
  return {out, Td(x.shape(), data)};
}

double grad_err(const std::function<Td()>& f, std::vector<Td> in) {
  return gradient_check(f, std::move(in), {1e-4, 0, 3}).max_rel_error;
}

}  // namespace

TEST(ContextTransform, IdentityWhenWidthsMatch) {
  Toy t;
  const auto y = context_transform<double>(t.c, nullptr, D);
  EXPECT_TRUE(y.same_storage(t.c));
}

TEST(ContextTransform, ZeroWeightAndMatmulOracle) {
  std::mt19937_64 rng(1);
  const auto c = random_tensor({2, 6}, rng);
  const auto zero = Td::zeros({6, D});
  const auto zeroed = context_transform<double>(c, &zero, D);
  for (double v : zeroed.data()) EXPECT_EQ(v, 0.0);
  const auto w = random_tensor({6, D}, rng);
  EXPECT_LT(max_abs_diff(context_transform<double>(c, &w, D), mat_mul(to_mat(c), to_mat(w))), 1e-12);
  const auto wrong = random_tensor({5, D}, rng);
  EXPECT_THROW(context_transform<double>(c, &wrong, D), DimensionError);
}

TEST(ContextPropagation, DeadWeightsReturnInput) {
  Toy t;
  const auto z = Td::zeros({D, D});
  const auto w3 = random_tensor({D, D}, t.rng);
  const auto y = context_propagation<double>(t.xa, t.c, t.a.segments, z, z, w3);
  EXPECT_EQ(y.to_vector(), t.xa.to_vector());
}

TEST(ContextPropagation, ZeroInputsGiveZero) {
  Toy t;
  const auto w1 = random_tensor({D, D}, t.rng), w2 = random_tensor({D, D}, t.rng), w3 = random_tensor({D, D}, t.rng);
  const auto y = context_propagation<double>(Td::zeros(t.xa.shape()), Td::zeros({2, D}), t.a.segments, w1, w2, w3);
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(ContextPropagation, MatchesDenseOracleAndIsNodeUniform) {
  Toy t;
  const auto w1 = random_tensor({D, D}, t.rng), w2 = random_tensor({D, D}, t.rng), w3 = random_tensor({D, D}, t.rng);
  const auto y = context_propagation<double>(t.xa, t.c, t.a.segments, w1, w2, w3);
  const auto oracle =
      oracle_context_propagation(to_mat(t.xa), to_mat(t.c), t.a.segments, to_mat(w1), to_mat(w2), to_mat(w3));
  EXPECT_LT(max_abs_diff(y, oracle), 1e-12);
  const auto self = mat_mul(to_mat(t.xa), to_mat(w1));
  for (std::size_t j = 0; j < t.a.num_graphs(); ++j) {
    const auto first = t.a.node_offsets[j];
    for (auto i = first; i < t.a.node_offsets[j + 1]; ++i)
      for (std::size_t k = 0; k < D; ++k) {
        const double term_i = y.at(i, k) - t.xa.at(i, k) - self(i, k);
        const double term_0 = y.at(first, k) - t.xa.at(first, k) - self(first, k);
        EXPECT_NEAR(term_i, term_0, 1e-12);
      }
  }
  auto wrong = random_tensor({2, D + 1}, t.rng);
  EXPECT_THROW(context_propagation<double>(t.xa, wrong, t.a.segments, w1, w2, w3), DimensionError);
  auto x = t.xa, c = t.c, a = w1, b = w2, d = w3;
  EXPECT_LT(grad_err([&] { return sum(relu(context_propagation<double>(x, c, t.a.segments, a, b, d))); }, {x, c, a, b, d}),
            1e-3);
}

TEST(Gine, MatchesDenseOracle) {
  Toy t;
  auto p = randomized(GineLayerParams<double>::init(ParamInit(1), "gine", D), t.rng);
  EXPECT_LT(max_abs_diff(gine_forward(t.xa, t.a, p), oracle_gine(to_mat(t.xa), t.a, p)), 1e-12);
  auto x = t.xa;
  std::vector<Td> in{x, p.eps, p.edge_embedding};
  for (auto& l : p.mlp.layers) {
    in.push_back(l.weight);
    in.push_back(l.bias);
  }
  EXPECT_LT(grad_err([&] { return sum(gine_forward(x, t.a, p)); }, in), 1e-3);
}

TEST(GraphUpdate, MatchesDenseOracle) {
  Toy t;
  auto p = GraphUpdateParams<double>::init(ParamInit(2), "gine", D);
  p.gine = randomized(p.gine, t.rng);
  const auto y = graph_update(t.xb, t.b, p, Mode::Train);
  EXPECT_LT(max_abs_diff(y, oracle_graph_update(to_mat(t.xb), t.b, p)), 1e-10);
  auto x = t.xb;
  EXPECT_LT(grad_err([&] { return sum(graph_update(x, t.b, p, Mode::Train)); }, {x, p.bn.gamma, p.bn.beta}), 1e-3);
}

TEST(Readout, MatchesDenseOracleAndAlphaSumsToOne) {
  Toy t;
  auto p = randomized(ReadoutParams<double>::init(ParamInit(3), "r", D), t.rng);
  std::vector<double> alpha;
  const auto oracle = oracle_readout(to_mat(t.xa), to_mat(t.c), p, t.a, &alpha);
  EXPECT_LT(max_abs_diff(attention_readout(t.xa, t.c, p, t.a), oracle), 1e-12);
  const auto got = readout_attention(t.xa, t.c, p, t.a);
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], alpha[i], 1e-12);
  for (std::size_t j = 0; j < t.a.num_graphs(); ++j) {
    double s = 0;
    for (auto i = t.a.node_offsets[j]; i < t.a.node_offsets[j + 1]; ++i) s += got[i];
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
  auto x = t.xa, c = t.c;
  EXPECT_LT(grad_err([&] { return sum(attention_readout(x, c, p, t.a)); }, {x, c, p.w4, p.d, p.b}), 1e-3);
}

TEST(Readout, ContextShiftsScoresUniformlyLeavingAlphaUnchanged) {
  Toy t;
  auto p = randomized(ReadoutParams<double>::init(ParamInit(3), "r", D), t.rng);
  const auto before = readout_attention(t.xa, t.c, p, t.a);
  const auto other_c = random_tensor({2, D}, t.rng, -5, 5);
  const auto after = readout_attention(t.xa, other_c, p, t.a);
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_NEAR(before[i], after[i], 1e-12);
}

TEST(Readout, EmptyGraphReadsOutBias) {
  std::mt19937_64 rng(4);
  GraphBatch g = batch_of({"CC"});
  g.append(chem::ModelGraph{});
  auto p = randomized(ReadoutParams<double>::init(ParamInit(3), "r", D), rng);
  const auto x = random_tensor({2, D}, rng), c = random_tensor({2, D}, rng);
  const auto y = attention_readout(x, c, p, g);
  for (std::size_t k = 0; k < D; ++k) EXPECT_EQ(y.at(1, k), p.b[k]);
}

TEST(Bottleneck, MatchesOracleAndIsSymmetric) {
  Toy t;
  auto p = randomized(ReadoutParams<double>::init(ParamInit(3), "r", D), t.rng);
  const auto ab = bottleneck(t.xa, t.xb, t.c, p, t.a, t.b);
  const auto ba = bottleneck(t.xb, t.xa, t.c, p, t.b, t.a);
  EXPECT_LT(max_abs_diff(ab, oracle_bottleneck(to_mat(t.xa), to_mat(t.xb), to_mat(t.c), p, t.a, t.b)), 1e-12);
  EXPECT_EQ(ab.to_vector(), ba.to_vector());
  auto xa = t.xa, xb = t.xb, c = t.c;
  EXPECT_LT(grad_err([&] { return sum(bottleneck(xa, xb, c, p, t.a, t.b)); }, {xa, xb, c, p.w4, p.d, p.b}), 1e-3);
}

TEST(MultiGraphBottleneck, SumsLocalContexts) {
  std::mt19937_64 rng(5);
  const auto a = random_tensor({2, 3}, rng), b = random_tensor({2, 3}, rng), c = random_tensor({2, 3}, rng);
  const auto s = multi_graph_bottleneck<double>({a, b, c});
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s[i], (a[i] + b[i]) + c[i]);
  EXPECT_EQ(multi_graph_bottleneck<double>({a}).to_vector(), a.to_vector());
  EXPECT_THROW(multi_graph_bottleneck<double>({}), ContractError);
}

TEST(CongFuLayer, MatchesDenseOracle) {
  Toy t;
  auto p = random_congfu(t.rng);
  const auto out = congfu_layer_forward(t.xa, t.xb, t.c, t.a, t.b, p, Mode::Train);
  const auto oracle = oracle_congfu_layer(to_mat(t.xa), to_mat(t.xb), to_mat(t.c), t.a, t.b, p);
  EXPECT_LT(max_abs_diff(out.xa, oracle.xa), 1e-10);
  EXPECT_LT(max_abs_diff(out.xb, oracle.xb), 1e-10);
  EXPECT_LT(max_abs_diff(out.context, oracle.c), 1e-10);
}

TEST(CongFuLayer, DeadContextBranchDegeneratesToGraphUpdate) {
  Toy t;
  auto p = random_congfu(t.rng);
  for (auto& v : p.w2.data()) v = 0.0;
  const auto out = congfu_layer_forward(t.xa, t.xb, t.c, t.a, t.b, p, Mode::Train);
  auto update = p.update;
  const auto h = add(t.xa, matmul(t.xa, p.w1));
  const auto ref = graph_update(h, t.a, update, Mode::Train);
  EXPECT_LT(max_abs_diff(out.xa, to_mat(ref)), 1e-12);
}

TEST(CongFuLayer, GraphSwapGivesSameContext) {
  Toy t;
  auto p = random_congfu(t.rng);
  auto q = p;
  const auto ab = congfu_layer_forward(t.xa, t.xb, t.c, t.a, t.b, p, Mode::Train);
  const auto ba = congfu_layer_forward(t.xb, t.xa, t.c, t.b, t.a, q, Mode::Train);
  EXPECT_LT(max_abs_diff(ab.context, to_mat(ba.context)), 1e-6);
  EXPECT_EQ(ab.xa.to_vector(), ba.xb.to_vector());
  EXPECT_EQ(ab.xb.to_vector(), ba.xa.to_vector());
}

TEST(CongFuLayer, NodePermutationEquivariance) {
  Toy t;
  auto p = random_congfu(t.rng);
  p.update.bn.state.running_mean = {0.1, -0.2, 0.3, 0.0};
  p.update.bn.state.running_var = {1.5, 0.5, 2.0, 1.0};
  const auto base = congfu_layer_forward(t.xa, t.xb, t.c, t.a, t.b, p, Mode::Eval);
  const auto [ga, xa] = reverse_nodes(t.a, t.xa);
  const auto perm = congfu_layer_forward(xa, t.xb, t.c, ga, t.b, p, Mode::Eval);
  EXPECT_LT(max_abs_diff(base.context, to_mat(perm.context)), 1e-6);
  const auto [unused, back] = reverse_nodes(ga, perm.xa);
  EXPECT_LT(max_abs_diff(base.xa, to_mat(back)), 1e-6);
}

TEST(CongFuLayer, Gradient) {
  Toy t;
  auto p = random_congfu(t.rng);
  auto xa = t.xa, xb = t.xb, c = t.c;
  auto in = params_of(p);
  in.insert(in.end(), {xa, xb, c});
  const auto f = [&] {
    const auto o = congfu_layer_forward(xa, xb, c, t.a, t.b, p, Mode::Train);
    return add(add(sum(o.context), sum(o.xa)), sum(o.xb));
  };
  EXPECT_LT(gradient_check(f, in, {1e-4, 0, 7}).max_rel_error, 1e-3);
}

TEST(CrossAttention, SinglePartnerGetsWeightOne) {
  std::mt19937_64 rng(6);
  const auto ga = batch_of({"CCO"}), gb = batch_of({"N"});
  auto p = randomized(CrossAttentionLayerParams<double>::init(ParamInit(1), "x", D), rng);
  const auto xa = random_tensor({3, D}, rng), xb = random_tensor({1, D}, rng);
  for (double w : cross_attention_weights(xa, xb, ga, gb, p)) EXPECT_DOUBLE_EQ(w, 1.0);
}

TEST(CrossAttention, MatchesLoopOracleAndWeightsSumToOne) {
  std::mt19937_64 rng(7);
  const auto ga = batch_of({"CCO", "C1CC1N"}), gb = batch_of({"C(C)CC", "OC"});  // 3x4 and 4x2
  auto p = randomized(CrossAttentionLayerParams<double>::init(ParamInit(1), "x", D), rng);
  const auto xa = random_tensor({ga.num_nodes(), D}, rng), xb = random_tensor({gb.num_nodes(), D}, rng);
  const auto out = cross_attention_layer_forward(xa, xb, ga, gb, p);
  std::vector<double> alpha;
  EXPECT_LT(max_abs_diff(out.xa, oracle_cross_attention(to_mat(xa), to_mat(xb), ga, gb, p, &alpha)), 1e-12);
  EXPECT_LT(max_abs_diff(out.xb, oracle_cross_attention(to_mat(xb), to_mat(xa), gb, ga, p)), 1e-12);
  const auto w = cross_attention_weights(xa, xb, ga, gb, p);
  ASSERT_EQ(w.size(), alpha.size());
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(w[i], alpha[i], 1e-12);
  std::size_t k = 0;
  for (std::size_t g = 0; g < ga.num_graphs(); ++g)
    for (std::size_t i = 0; i < ga.graph_size(g); ++i) {
      double s = 0;
      for (std::size_t j = 0; j < gb.graph_size(g); ++j) s += w[k++];
      EXPECT_NEAR(s, 1.0, 1e-6);
    }
  auto a = xa, b = xb;
  const auto f = [&] {
    const auto o = cross_attention_layer_forward(a, b, ga, gb, p);
    return add(sum(o.xa), sum(relu(o.xb)));
  };
  EXPECT_LT(grad_err(f, {a, b, p.weight, p.attention, p.bias}), 1e-3);
}

TEST(CrossAttention, EmptyPartnerIsContractError) {
  std::mt19937_64 rng(8);
  GraphBatch ga = batch_of({"CC"}), gb;
  gb.append(chem::ModelGraph{});
  auto p = CrossAttentionLayerParams<double>::init(ParamInit(1), "x", D);
  EXPECT_THROW(cross_attention_layer_forward(random_tensor({2, D}, rng), Td::zeros({0, D}), ga, gb, p), ContractError);
}

TEST(Mlp, IdentityLayer) {
  auto mlp = Mlp<double>::init(ParamInit(1), "m", {3, 3});
  auto w = mlp.layers[0].weight.data();
  for (std::size_t i = 0; i < 9; ++i) w[i] = i % 4 == 0 ? 1.0 : 0.0;
  std::mt19937_64 rng(9);
  const auto x = random_tensor({5, 3}, rng);
  EXPECT_EQ(mlp_forward(x, mlp).to_vector(), x.to_vector());
}

TEST(Mlp, CellEncoderShapeAndOracle) {
  const auto cell = Mlp<double>::init(ParamInit(1), "cell_mlp", {908, 512, 300});
  std::mt19937_64 rng(10);
  const auto x = random_tensor({1, 908}, rng);
  const auto y = mlp_forward(x, cell);
  EXPECT_EQ(y.shape(), (Shape{1, 300}));
  auto small = randomized(Mlp<double>::init(ParamInit(2), "m", {4, 6, 3}), rng);
  const auto xs = random_tensor({3, 4}, rng);
  auto h = mat_mul(to_mat(xs), to_mat(small.layers[0].weight));
  for (std::size_t r = 0; r < h.rows; ++r)
    for (std::size_t c = 0; c < h.cols; ++c) h(r, c) = std::max(0.0, h(r, c) + small.layers[0].bias[c]);
  auto o = mat_mul(h, to_mat(small.layers[1].weight));
  for (std::size_t r = 0; r < o.rows; ++r)
    for (std::size_t c = 0; c < o.cols; ++c) o(r, c) += small.layers[1].bias[c];
  EXPECT_LT(max_abs_diff(mlp_forward(xs, small), o), 1e-12);
  EXPECT_THROW(mlp_forward(random_tensor({3, 5}, rng), small), DimensionError);
  auto xv = xs;
  std::vector<Td> in{xv};
  for (auto& l : small.layers) in.insert(in.end(), {l.weight, l.bias});
  EXPECT_LT(grad_err([&] { return sum(mlp_forward(xv, small)); }, in), 1e-3);
}
