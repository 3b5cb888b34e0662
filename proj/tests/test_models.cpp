#include <doctest.h>

#include <set>

#include "octplaque/loss.hpp"
#include "octplaque/model.hpp"
#include "octplaque/optimizer.hpp"
#include "octplaque/weight_store.hpp"

using namespace octplaque;

namespace {

Tensor<float> random_input(Eigen::Index n, Eigen::Index s, RngStream& rng) {
  Tensor<float> x(n, s, s, 1);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.v[i] = rng.next_float();
  return x;
}

BackboneConfig tiny_residual() {
  BackboneConfig cfg;
  cfg.family = Family::residual;
  cfg.stage_blocks = {1, 1, 1, 1};
  cfg.base_width = 8;
  cfg.dropout_keep = 1.0;
  cfg.input_size = 16;
  return cfg;
}

/// One optimizer step on random data; returns per-group "changed" flags.
std::array<bool, 6> step_and_diff(Model& model, RngStream& rng, int steps) {
  std::vector<ArrayX<float>> before;
  for (const auto& p : model.graph.params()) before.push_back(p.value);

  Adam<float> opt(1e-3);
  const Eigen::Index s = model.cfg.input_size;
  for (int it = 0; it < steps; ++it) {
    Tensor<float> x = random_input(4, s, rng);
    std::vector<int> labels;
    for (int i = 0; i < 4; ++i)
      labels.push_back(static_cast<int>(rng.next_int(model.n_classes)));
    const Tensor<float>* out;
    if (model.two_path) {
      Tensor<float> x2 = random_input(4, s, rng);
      out = &model.forward(x, x2, true, &rng);
    } else {
      out = &model.forward(x, true, &rng);
    }
    MatrixX<float> logits = out->as_matrix(out->n, out->c);
    const auto res = weighted_cross_entropy(
        logits, labels, std::vector<double>(model.n_classes, 1.0));
    Tensor<float> d(res.dlogits.rows(), 1, 1, res.dlogits.cols());
    std::copy(res.dlogits.data(), res.dlogits.data() + res.dlogits.size(),
              d.data());
    model.ws.zero_param_grads();
    model.backward(d);
    opt.step(model.graph, model.ws);
  }

  std::array<bool, 6> changed{};
  const auto& params = model.graph.params();
  for (std::size_t i = 0; i < params.size(); ++i)
    if ((params[i].value != before[i]).any())
      changed[static_cast<std::size_t>(params[i].group)] = true;

  // Also confirm bit-exactness of frozen params.
  for (std::size_t i = 0; i < params.size(); ++i)
    if (!params[i].trainable)
      REQUIRE((params[i].value == before[i]).all());
  return changed;
}

}  // namespace

TEST_CASE("single-path shape contract") {
  BackboneConfig cfg = BackboneConfig::desk(Family::residual);
  cfg.input_size = 32;
  Model model = build_single_path<float>(cfg, 2);
  RngStream rng(1);
  model.init_params(rng);
  Tensor<float> x = random_input(5, 32, rng);
  const Tensor<float>& y = model.forward(x);
  CHECK(y.n == 5);
  CHECK(y.c == 2);
  CHECK(y.h == 1);
  CHECK(y.w == 1);
}

TEST_CASE("dense block grows features by L * k") {
  BackboneConfig cfg = BackboneConfig::desk(Family::dense);
  cfg.input_size = 32;
  Model model = build_single_path<float>(cfg, 2);
  // Stem emits 2k features; block 1 has L layers of growth k, so the first
  // transition consumes 2k + L*k input channels.
  const Eigen::Index expected_in =
      2 * cfg.growth_rate + cfg.stage_blocks[0] * cfg.growth_rate;
  const auto* trans = model.graph.find_param("trans1.conv.weight");
  REQUIRE(trans != nullptr);
  CHECK(trans->shape[2] == expected_in);
  CHECK(trans->shape[3] ==
        static_cast<Eigen::Index>(cfg.compression * expected_in));

  // And the bottleneck layers emit 4k / k channels.
  const auto* c1 = model.graph.find_param("block2.layer0.conv1.weight");
  REQUIRE(c1 != nullptr);
  CHECK(c1->shape[3] == 4 * cfg.growth_rate);
  const auto* c2 = model.graph.find_param("block2.layer0.conv2.weight");
  REQUIRE(c2 != nullptr);
  CHECK(c2->shape[3] == cfg.growth_rate);
}

TEST_CASE("full-scale residual parameter count matches the analytic oracle") {
  BackboneConfig cfg = BackboneConfig::paper(Family::residual);
  Model model = build_single_path<float>(cfg, 1000);

  // Independent count from the layer algebra.
  long long expected = 7 * 7 * 1 * 64 + 64;  // stem
  long long in_ch = 64;
  for (int s = 1; s <= 4; ++s) {
    const long long inner = 64LL << (s - 1);
    const long long out = inner * 4;
    for (int b = 0; b < cfg.stage_blocks[s - 1]; ++b) {
      expected += in_ch * inner + inner;            // conv1 1x1
      expected += 9 * inner * inner + inner;        // conv2 3x3
      expected += inner * out + out;                // conv3 1x1
      const bool project = b == 0;                  // stride or width change
      if (project) expected += in_ch * out + out;   // shortcut 1x1
      in_ch = out;
    }
  }
  expected += in_ch * 1000 + 1000;  // head

  CHECK(model.parameter_count() == expected);
  CHECK(std::abs(static_cast<double>(expected) - 25.6e6) / 25.6e6 < 0.10);
}

TEST_CASE("replace_head keeps the backbone bit-exact") {
  BackboneConfig cfg = tiny_residual();
  Model model = build_single_path<float>(cfg, 2);
  RngStream rng(2);
  model.init_params(rng);
  Tensor<float> x = random_input(3, 16, rng);
  const MatrixX<float> before =
      MatrixX<float>(model.forward(x).as_matrix(3, 2));
  const ArrayX<float> old_head = model.graph.find_param("head.fc.weight")->value;

  Model same = model;
  RngStream head_rng(77);
  replace_head(same, 2, head_rng);
  // New head differs from the previous one...
  CHECK((same.graph.find_param("head.fc.weight")->value != old_head).any());
  // ...but restoring the old head reproduces the original logits exactly.
  same.graph.find_param("head.fc.weight")->value = old_head;
  same.graph.find_param("head.fc.bias")->value =
      model.graph.find_param("head.fc.bias")->value;
  const MatrixX<float> after = MatrixX<float>(same.forward(x).as_matrix(3, 2));
  CHECK((after.array() == before.array()).all());

  // Widening to 3 classes changes only the logits width.
  Model widened = model;
  replace_head(widened, 3, head_rng);
  const Tensor<float>& y3 = widened.forward(x);
  CHECK(y3.c == 3);
}

TEST_CASE("freeze contract: frozen parameters never move") {
  BackboneConfig cfg = tiny_residual();
  RngStream rng(3);

  for (int point : {1, 2}) {
    Model model = build_single_path<float>(cfg, 2);
    model.init_params(rng);
    model.source_tag = "proxy-pretrain";  // as if loaded
    RngStream frng(4);
    apply_freeze(model, FreezeSpec::at(point), frng);

    std::set<int> frozen_groups, trainable_groups;
    for (const auto& p : model.graph.params())
      (p.trainable ? trainable_groups : frozen_groups).insert(p.group);
    for (int g = 0; g <= point; ++g) CHECK(frozen_groups.count(g) == 1);
    for (int g = point + 1; g <= 5; ++g) CHECK(trainable_groups.count(g) == 1);

    RngStream data_rng(5);
    const auto changed = step_and_diff(model, data_rng, 100);
    for (int g = 0; g <= point; ++g) CHECK_FALSE(changed[static_cast<std::size_t>(g)]);
    for (int g = point + 1; g <= 5; ++g) CHECK(changed[static_cast<std::size_t>(g)]);
  }
}

TEST_CASE("full fine-tuning moves every stage after one step") {
  Model model = build_single_path<float>(tiny_residual(), 2);
  RngStream rng(6);
  model.init_params(rng);
  RngStream frng(7);
  apply_freeze(model, FreezeSpec::full(), frng);
  RngStream data_rng(8);
  const auto changed = step_and_diff(model, data_rng, 1);
  for (int g = 0; g <= 5; ++g) CHECK(changed[static_cast<std::size_t>(g)]);
}

TEST_CASE("freeze_at(2) freezes a strict superset of freeze_at(1)") {
  RngStream rng(9), frng(10);
  Model m1 = build_single_path<float>(tiny_residual(), 2);
  m1.init_params(rng);
  m1.source_tag = "proxy-pretrain";
  Model m2 = m1;
  apply_freeze(m1, FreezeSpec::at(1), frng);
  apply_freeze(m2, FreezeSpec::at(2), frng);

  std::set<std::string> f1, f2;
  for (const auto& p : m1.graph.params())
    if (!p.trainable) f1.insert(p.name);
  for (const auto& p : m2.graph.params())
    if (!p.trainable) f2.insert(p.name);
  CHECK(f2.size() > f1.size());
  for (const auto& name : f1) CHECK(f2.count(name) == 1);
}

TEST_CASE("freeze_at without pretrained weights is rejected") {
  Model model = build_single_path<float>(tiny_residual(), 2);
  RngStream rng(11);
  model.init_params(rng);
  CHECK_THROWS_AS(apply_freeze(model, FreezeSpec::at(1), rng),
                  std::invalid_argument);
}

TEST_CASE("from_scratch re-randomizes everything and unfreezes") {
  Model model = build_single_path<float>(tiny_residual(), 2);
  RngStream rng(12);
  model.init_params(rng);
  model.source_tag = "proxy-pretrain";
  RngStream frng(13);
  apply_freeze(model, FreezeSpec::at(1), frng);

  const ArrayX<float> stem_before =
      model.graph.find_param("stem.conv.weight")->value;
  apply_freeze(model, FreezeSpec::from_scratch(), frng);
  CHECK((model.graph.find_param("stem.conv.weight")->value != stem_before).any());
  for (const auto& p : model.graph.params()) CHECK(p.trainable);
  CHECK(model.source_tag == "random");
}

TEST_CASE("two-path shape contract and fusion kernel widths") {
  BackboneConfig cfg = BackboneConfig::desk(Family::residual);
  cfg.input_size = 32;
  for (int cut : {2, 3}) {
    FusionConfig fusion;
    fusion.concat_point = cut;
    Model model = build_two_path<float>(cfg, fusion, 2);
    RngStream rng(14);
    model.init_params(rng);
    Tensor<float> xc = random_input(4, 32, rng);
    Tensor<float> xp = random_input(4, 32, rng);
    const Tensor<float>& y = model.forward(xc, xp);
    CHECK(y.n == 4);
    CHECK(y.c == 2);

    // The entry convolution consumes 2*F1 and restores the single-path F2.
    Model single = build_single_path<float>(cfg, 2);
    REQUIRE(!model.fusion_weight_names.empty());
    for (const auto& name : model.fusion_weight_names) {
      const auto* fused = model.graph.find_param(name);
      const auto* plain = single.graph.find_param(name);
      REQUIRE(fused != nullptr);
      REQUIRE(plain != nullptr);
      CHECK(fused->shape[2] == 2 * plain->shape[2]);
      CHECK(fused->shape[3] == plain->shape[3]);
    }
  }
}

TEST_CASE("silencing one path changes the logits") {
  BackboneConfig cfg = BackboneConfig::desk(Family::residual);
  cfg.input_size = 32;
  Model model = build_two_path<float>(cfg, FusionConfig{}, 2);
  RngStream rng(15);
  model.init_params(rng);
  Tensor<float> xc = random_input(2, 32, rng);
  Tensor<float> xp = random_input(2, 32, rng);
  Tensor<float> zeros(2, 32, 32, 1);
  zeros.setZero();

  const MatrixX<float> both = MatrixX<float>(model.forward(xc, xp).as_matrix(2, 2));
  const MatrixX<float> one = MatrixX<float>(model.forward(xc, zeros).as_matrix(2, 2));
  CHECK((both - one).cwiseAbs().maxCoeff() > 0.0f);
}

TEST_CASE("two-path parameter count grows with the concat point") {
  BackboneConfig cfg = BackboneConfig::desk(Family::residual);
  cfg.input_size = 32;
  Eigen::Index prev = 0;
  for (int cut : {2, 3, 4}) {
    FusionConfig fusion;
    fusion.concat_point = cut;
    Model model = build_two_path<float>(cfg, fusion, 2);
    // A later merge duplicates a longer prefix and must cost parameters.
    if (prev > 0) CHECK(model.parameter_count() > prev);
    prev = model.parameter_count();
  }
}

TEST_CASE("forward passes are deterministic in eval mode") {
  Model model = build_single_path<float>(tiny_residual(), 2);
  RngStream rng(16);
  model.init_params(rng);
  Tensor<float> x = random_input(3, 16, rng);
  const MatrixX<float> a = MatrixX<float>(model.forward(x).as_matrix(3, 2));
  const MatrixX<float> b = MatrixX<float>(model.forward(x).as_matrix(3, 2));
  CHECK((a.array() == b.array()).all());
}

TEST_CASE("dropout is identity in eval mode and mean-preserving in train") {
  Tensor<float> x(1, 1, 1, 20000);
  x.v.setConstant(1.0f);
  Tensor<float> y;
  ArrayX<float> mask;
  RngStream rng(17);

  dropout_forward(x, 0.8, /*train=*/false, rng, y, mask);
  CHECK((y.v == x.v).all());

  dropout_forward(x, 0.8, /*train=*/true, rng, y, mask);
  const double mean = y.v.cast<double>().mean();
  CHECK(std::abs(mean - 1.0) < 0.02);
  // Surviving units carry the inverted-dropout scale.
  for (Eigen::Index i = 0; i < 100; ++i)
    CHECK((y.v[i] == 0.0f || y.v[i] == doctest::Approx(1.25f)));
}
