/*
 * Copyright 2026 The eegatt Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "eegatt/models.hpp"
#include "eegatt/random.hpp"
#include "eegatt/train.hpp"

namespace nd = eegatt::nd;
namespace md = eegatt::models;
namespace ft = eegatt::features;
using md::ModelKind;
using nd::NdValue;
using nd::Tape;

namespace {

std::vector<ft::SequenceSample> toy_batch(std::size_t B, std::size_t C, std::size_t T, eegatt::Rng& rng) {
  std::vector<ft::SequenceSample> out;
  for (std::size_t b = 0; b < B; ++b) {
    ft::SequenceSample s;
    s.recording_id = "r" + std::to_string(b);
    const int label = static_cast<int>(b % 2);
    s.one_hot = label ? std::array<double, 2>{0, 1} : std::array<double, 2>{1, 0};
    for (std::size_t t = 0; t < T; ++t) {
      ft::FrameFeatures f;
      f.recording_id = s.recording_id;
      f.frame_index = t;
      f.label = label;
      f.fs = 250;
      f.channels = C;
      for (std::size_t k = 0; k < C * ft::kFeatureCount; ++k) f.X.push_back(rng.uniform(-1.5, 1.5));
      f.R.assign(C * C, 1.0);
      for (std::size_t i = 0; i < C; ++i)
        for (std::size_t j = i + 1; j < C; ++j) f.R[i * C + j] = f.R[j * C + i] = rng.uniform(-1, 1);
      s.frames.push_back(std::move(f));
    }
    out.push_back(std::move(s));
  }
  return out;
}

md::ModelSpec toy_spec(ModelKind kind) { return md::ModelSpec::defaults(kind, 3, 2).capped(8); }

std::set<std::string> names(const md::Model& m) {
  std::set<std::string> out;
  for (const auto& [n, _] : m.params().entries()) out.insert(n);
  return out;
}

}  // namespace

TEST(ModelSpec, TableDefaults) {
  const auto ig = md::ModelSpec::defaults(ModelKind::instagats, 19);
  EXPECT_EQ(*ig.gat_out_channels, 64u);
  EXPECT_EQ(*ig.lstm_hidden, 64u);
  EXPECT_EQ(*ig.dense_dropout, 0.2);
  EXPECT_EQ(ig.learning_rate, 0.0005);
  const auto gnn = md::ModelSpec::defaults(ModelKind::gnn, 19);
  EXPECT_EQ(*gnn.gat_out_channels, 32u);
  EXPECT_EQ(*gnn.lstm_hidden, 64u);
  EXPECT_EQ(*gnn.dense_dropout, 0.15);
  EXPECT_EQ(gnn.learning_rate, 0.0001);
  for (auto kind : {ModelKind::lstm_att, ModelKind::lstm}) {
    const auto s = md::ModelSpec::defaults(kind, 19);
    EXPECT_EQ(*s.lstm_hidden, 128u);
    EXPECT_EQ(*s.l2_reg, 0.001);
    EXPECT_EQ(*s.input_dropout, 0.1);
    EXPECT_EQ(*s.layer1_dropout, 0.2);
    EXPECT_EQ(*s.layer2_dropout, 0.2);
    EXPECT_EQ(s.learning_rate, 0.0001);
  }
  const auto ca = md::ModelSpec::defaults(ModelKind::cnn_att, 19);
  EXPECT_EQ(*ca.conv_kernel, 3u);
  EXPECT_EQ(*ca.conv_filters, 32u);
  EXPECT_EQ(*ca.lstm_hidden, 256u);
  EXPECT_EQ(*ca.dense_dropout, 0.15);
  EXPECT_EQ(*ca.cbam_ratio, 16u);
  EXPECT_EQ(*ca.cbam_spatial_kernel, 7u);
  EXPECT_EQ(ca.learning_rate, 0.001);
  const auto cnn = md::ModelSpec::defaults(ModelKind::cnn, 19);
  EXPECT_EQ(*cnn.conv_filters, 8u);
  EXPECT_EQ(*cnn.lstm_hidden, 8u);
  EXPECT_EQ(*cnn.dense_dropout, 0.15);
  EXPECT_EQ(cnn.learning_rate, 0.001);
  for (auto kind : md::kAllKinds) EXPECT_NO_THROW(md::ModelSpec::defaults(kind, 19).validate());
}

TEST(ModelSpec, IrrelevantOrMissingFieldsRejected) {
  auto s = md::ModelSpec::defaults(ModelKind::lstm, 4);
  s.conv_filters = 8;
  EXPECT_THROW(s.validate(), eegatt::ConfigError);
  auto g = md::ModelSpec::defaults(ModelKind::instagats, 4);
  g.gat_out_channels.reset();
  EXPECT_THROW(g.validate(), eegatt::ConfigError);
  auto d = md::ModelSpec::defaults(ModelKind::cnn, 4);
  d.dense_dropout = 1.0;
  EXPECT_THROW(d.validate(), eegatt::ConfigError);
  EXPECT_THROW(md::parse_kind("transformer"), eegatt::ConfigError);
}

TEST(Model, ParameterShapesFollowTable) {
  const std::size_t C = 5;
  md::Model ig(md::ModelSpec::defaults(ModelKind::instagats, C), 1);
  EXPECT_EQ(ig.params().get("graph.W_G").shape(), (nd::Shape{C + 11, 64}));
  EXPECT_EQ(ig.params().get("graph.a").shape(), (nd::Shape{128}));
  EXPECT_EQ(ig.params().get("lstm.Wh").shape(), (nd::Shape{64, 256}));
  EXPECT_EQ(ig.params().get("dense.W").shape(), (nd::Shape{64, 2}));

  md::Model la(md::ModelSpec::defaults(ModelKind::lstm_att, C), 1);
  EXPECT_EQ(la.params().get("lstm1.Wh").shape(), (nd::Shape{128, 512}));
  EXPECT_EQ(la.params().get("lstm2.Wh").shape(), (nd::Shape{128, 512}));
  EXPECT_EQ(la.params().get("lstm1.Wx").shape(), (nd::Shape{C * (C + 11), 512}));

  md::Model cnn(md::ModelSpec::defaults(ModelKind::cnn, C), 1);
  EXPECT_EQ(cnn.params().get("conv.kernels").shape(), (nd::Shape{8, 1, 3}));
  EXPECT_EQ(cnn.params().get("lstm.Wh").shape(), (nd::Shape{8, 32}));
}

TEST(Model, AttentionFreeBaselinesDifferOnlyByAttentionParameters) {
  const std::vector<std::pair<ModelKind, ModelKind>> pairs = {
      {ModelKind::instagats, ModelKind::gnn}, {ModelKind::lstm_att, ModelKind::lstm}, {ModelKind::cnn_att, ModelKind::cnn}};
  for (const auto& [with, without] : pairs) {
    auto spec_with = md::ModelSpec::defaults(with, 4, 3).capped(16);
    auto spec_without = md::ModelSpec::defaults(without, 4, 3);
    // Equal widths on both sides.
    spec_without.gat_out_channels = spec_with.gat_out_channels;
    spec_without.lstm_hidden = spec_with.lstm_hidden;
    spec_without.conv_filters = spec_with.conv_filters;
    md::Model a(spec_with, 1), b(spec_without, 1);
    EXPECT_LT(b.params().scalar_count(), a.params().scalar_count());
    const auto na = names(a), nb = names(b);
    EXPECT_TRUE(std::includes(na.begin(), na.end(), nb.begin(), nb.end()));
    for (const auto& n : na) {
      if (nb.count(n)) continue;
      EXPECT_TRUE(n == "graph.a" || n.rfind("attention.", 0) == 0 || n.rfind("cbam.", 0) == 0) << n;
    }
  }
}

TEST(Model, ForwardRowsAreDistributionsAndEvalIsDeterministic) {
  eegatt::Rng data_rng(3);
  const auto batch = toy_batch(5, 3, 2, data_rng);
  for (auto kind : md::kAllKinds) {
    md::Model m(toy_spec(kind), 7);
    eegatt::Rng rng(1);
    Tape t;
    const auto p1 = m.forward(t, batch, md::Mode::eval, rng);
    const auto p2 = m.forward(t, batch, md::Mode::eval, rng);
    ASSERT_EQ(p1.shape(), (nd::Shape{5, 2}));
    for (std::size_t b = 0; b < 5; ++b) EXPECT_NEAR(p1.at({b, 0}) + p1.at({b, 1}), 1.0, 1e-12);
    EXPECT_TRUE(std::equal(p1.data().begin(), p1.data().end(), p2.data().begin()));
  }
}

TEST(Model, ZeroOutputWeightsGiveHalf) {
  eegatt::Rng data_rng(4);
  const auto batch = toy_batch(3, 3, 2, data_rng);
  for (auto kind : md::kAllKinds) {
    md::Model m(toy_spec(kind), 7);
    for (double& w : m.params().get("dense.W").mutable_data()) w = 0;
    eegatt::Rng rng(1);
    Tape t;
    {
      const auto held = m.forward(t, batch, md::Mode::train, rng);
      for (double p : held.data()) EXPECT_EQ(p, 0.5);
    }
  }
}

TEST(Model, BatchPermutationPermutesOutputs) {
  eegatt::Rng data_rng(5);
  auto batch = toy_batch(4, 3, 2, data_rng);
  for (auto kind : md::kAllKinds) {
    md::Model m(toy_spec(kind), 8);
    eegatt::Rng rng(1);
    Tape t;
    const auto p = m.forward(t, batch, md::Mode::eval, rng);
    std::vector<ft::SequenceSample> reversed(batch.rbegin(), batch.rend());
    const auto q = m.forward(t, reversed, md::Mode::eval, rng);
    for (std::size_t b = 0; b < 4; ++b)
      for (std::size_t c = 0; c < 2; ++c) EXPECT_NEAR(p.at({b, c}), q.at({3 - b, c}), 1e-12);
  }
}

TEST(Model, AttentionMapsExposed) {
  eegatt::Rng data_rng(6);
  const auto batch = toy_batch(2, 3, 2, data_rng);
  eegatt::Rng rng(1);
  Tape t;
  const auto ig = md::Model(toy_spec(ModelKind::instagats), 1).run(t, batch, md::Mode::eval, rng);
  EXPECT_EQ(ig.attention.at("graph").shape(), (nd::Shape{4, 3, 3}));
  const auto la = md::Model(toy_spec(ModelKind::lstm_att), 1).run(t, batch, md::Mode::eval, rng);
  EXPECT_EQ(la.attention.at("temporal").shape(), (nd::Shape{2, 2}));
  const auto ca = md::Model(toy_spec(ModelKind::cnn_att), 1).run(t, batch, md::Mode::eval, rng);
  EXPECT_EQ(ca.attention.at("cbam.channel").shape(), (nd::Shape{4, 8}));
  EXPECT_EQ(ca.attention.at("cbam.spatial").shape(), (nd::Shape{4, 42}));
}

TEST(Model, GradCheckEveryKind) {
  eegatt::Rng data_rng(7);
  const auto batch = toy_batch(2, 3, 2, data_rng);
  const auto targets = eegatt::train::one_hot_targets(batch);
  for (auto kind : md::kAllKinds) {
    md::Model m(toy_spec(kind), 11);
    auto params = m.params().values();
    const double err = nd::grad_check(
        [&](Tape& t) {
          eegatt::Rng rng(0);
          auto loss = eegatt::train::softmax_cross_entropy(t, m.run(t, batch, md::Mode::eval, rng).logits, targets);
          const auto reg = m.regularization(t);
          return reg.defined() ? nd::add(t, loss, reg) : loss;
        },
        params, {.eps = 1e-5, .max_coords = 24, .seed = 3});
    EXPECT_LT(err, 1e-4) << md::to_string(kind);
  }
}

TEST(Model, MeanPoolFlagChangesFrameWidth) {
  auto spec = toy_spec(ModelKind::instagats);
  spec.mean_pool_nodes = true;
  md::Model m(spec, 1);
  EXPECT_EQ(m.params().get("lstm.Wx").dim(0), *spec.gat_out_channels);
  spec.node_correlations = false;
  md::Model f(spec, 1);
  EXPECT_EQ(f.params().get("graph.W_G").dim(0), 11u);
}
