#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "octplaque/graph.hpp"
#include "octplaque/model_config.hpp"

namespace octplaque {

/// A built classification network: the op graph plus the configuration it
/// was built from. Parameters are owned by the graph; a default workspace
/// covers the common single-threaded case.
template <typename T>
struct ModelT {
  Graph<T> graph;
  BackboneConfig cfg;
  FusionConfig fusion;
  int n_classes = 2;
  bool two_path = false;
  std::string source_tag = "random";
  /// Weight names whose input dimension doubles at the fusion point.
  std::vector<std::string> fusion_weight_names;

  Workspace<T> ws;

  Eigen::Index parameter_count() const { return graph.parameter_count(); }

  /// Variance-scaling (fan-in) normal init for weights, zero for biases.
  void init_params(RngStream& rng) {
    for (auto& p : graph.params()) {
      const bool is_bias = p.shape[0] == 1 && p.shape[1] == 1 && p.shape[2] == 1;
      if (is_bias && p.name.size() >= 5 &&
          p.name.compare(p.name.size() - 5, 5, ".bias") == 0) {
        p.value.setZero();
        continue;
      }
      const double fan_in =
          static_cast<double>(p.shape[0] * p.shape[1] * p.shape[2]);
      const T stddev = static_cast<T>(std::sqrt(2.0 / fan_in));
      for (Eigen::Index i = 0; i < p.value.size(); ++i)
        p.value[i] = stddev * static_cast<T>(rng.next_gaussian());
    }
    source_tag = "random";
  }

  const Tensor<T>& forward(const Tensor<T>& x, bool train = false,
                           RngStream* rng = nullptr) {
    if (two_path) throw std::logic_error("two-path model needs two inputs");
    return graph.forward(ws, {&x}, train, rng);
  }

  const Tensor<T>& forward(const Tensor<T>& cart, const Tensor<T>& polar,
                           bool train = false, RngStream* rng = nullptr) {
    if (!two_path) throw std::logic_error("single-path model takes one input");
    return graph.forward(ws, {&cart, &polar}, train, rng);
  }

  void backward(const Tensor<T>& dlogits) { graph.backward(ws, dlogits); }
};

using Model = ModelT<float>;

namespace detail {

/// Residual trunk: pre-activation bottleneck blocks, 4 stages, stride-2
/// between stages. Returns the final feature slot.
template <typename T>
int build_residual_trunk(Graph<T>& g, int x, const BackboneConfig& cfg,
                         const std::string& prefix, int upto_stage,
                         int from_stage, std::vector<std::string>* fusion_names,
                         bool fused_entry) {
  for (int s = from_stage; s <= upto_stage; ++s) {
    const Eigen::Index inner = static_cast<Eigen::Index>(cfg.base_width) << (s - 1);
    const Eigen::Index out = inner * 4;
    for (int b = 0; b < cfg.stage_blocks[s - 1]; ++b) {
      const int stride = (s > 1 && b == 0) ? 2 : 1;
      const std::string name =
          prefix + "stage" + std::to_string(s) + ".block" + std::to_string(b);
      g.set_group(s);
      const int pre = g.relu(x);
      int y = g.conv(pre, name + ".conv1", 1, 1, 0, inner);
      y = g.relu(y);
      y = g.conv(y, name + ".conv2", 3, stride, 1, inner);
      y = g.relu(y);
      y = g.conv(y, name + ".conv3", 1, 1, 0, out);
      int shortcut = x;
      const bool project = stride != 1 || g.channels(x) != out;
      if (project) shortcut = g.conv(pre, name + ".proj", 1, stride, 0, out);
      if (fused_entry && s == from_stage && b == 0 && fusion_names) {
        fusion_names->push_back(name + ".conv1.weight");
        if (project) fusion_names->push_back(name + ".proj.weight");
      }
      x = g.add(y, shortcut);
    }
  }
  return x;
}

/// Dense trunk: concat-growth blocks with compression transitions between
/// them. `single_path_channels` tracks what a one-path net would carry so a
/// fused entry compresses back to the single-path width.
template <typename T>
int build_dense_trunk(Graph<T>& g, int x, const BackboneConfig& cfg,
                      const std::string& prefix, int upto_stage, int from_stage,
                      Eigen::Index single_path_channels,
                      std::vector<std::string>* fusion_names, bool fused_entry,
                      bool stop_before_last_transition = false) {
  const Eigen::Index k = cfg.growth_rate;
  Eigen::Index single = single_path_channels;
  for (int s = from_stage; s <= upto_stage; ++s) {
    g.set_group(s);
    if (s > from_stage || !fused_entry) {
      for (int l = 0; l < cfg.stage_blocks[s - 1]; ++l) {
        const std::string name = prefix + "block" + std::to_string(s) +
                                 ".layer" + std::to_string(l);
        int b = g.relu(x);
        b = g.conv(b, name + ".conv1", 1, 1, 0, 4 * k);
        b = g.relu(b);
        b = g.conv(b, name + ".conv2", 3, 1, 1, k);
        x = g.concat(x, b);
        single += k;
      }
    }
    if (s == upto_stage && stop_before_last_transition) break;
    if (s < 4) {
      const std::string name = prefix + "trans" + std::to_string(s);
      const Eigen::Index compressed = static_cast<Eigen::Index>(
          std::floor(cfg.compression * static_cast<double>(single)));
      const int t = g.relu(x);
      const int conv = g.conv(t, name + ".conv", 1, 1, 0, compressed);
      if (fused_entry && s == from_stage && fusion_names)
        fusion_names->push_back(name + ".conv.weight");
      x = g.avgpool2(conv);
      single = compressed;
    }
  }
  return x;
}

template <typename T>
int build_stem(Graph<T>& g, int x, const BackboneConfig& cfg,
               const std::string& prefix) {
  g.set_group(0);
  const Eigen::Index stem_out = cfg.family == Family::residual
                                    ? cfg.base_width
                                    : 2 * cfg.growth_rate;
  x = g.conv(x, prefix + "stem.conv", 7, 2, 3, stem_out);
  x = g.relu(x);
  return g.maxpool(x, 3, 2, 1);
}

template <typename T>
int build_head(Graph<T>& g, int x, const BackboneConfig& cfg, int n_classes) {
  g.set_group(5);
  x = g.relu(x);
  x = g.global_avg_pool(x);
  x = g.dropout(x, cfg.dropout_keep);
  return g.dense(x, "head.fc", n_classes);
}

/// Channels a single-path trunk carries right after stage `s` (before the
/// following transition, for the dense family).
inline Eigen::Index dense_channels_after_block(const BackboneConfig& cfg,
                                               int stage) {
  Eigen::Index ch = 2 * cfg.growth_rate;
  for (int s = 1; s <= stage; ++s) {
    ch += static_cast<Eigen::Index>(cfg.stage_blocks[s - 1]) * cfg.growth_rate;
    if (s < stage)
      ch = static_cast<Eigen::Index>(
          std::floor(cfg.compression * static_cast<double>(ch)));
  }
  return ch;
}

}  // namespace detail

/// Single-path classifier: [B, S, S, 1] -> logits [B, n_classes].
template <typename T>
ModelT<T> build_single_path(const BackboneConfig& cfg, int n_classes) {
  cfg.validate();
  if (n_classes < 2) throw std::invalid_argument("need at least 2 classes");

  ModelT<T> model;
  model.cfg = cfg;
  model.n_classes = n_classes;
  Graph<T>& g = model.graph;
  int x = g.add_input(1);
  x = detail::build_stem(g, x, cfg, "");
  if (cfg.family == Family::residual)
    x = detail::build_residual_trunk(g, x, cfg, "", 4, 1, nullptr, false);
  else
    x = detail::build_dense_trunk(g, x, cfg, "", 4, 1, 2 * cfg.growth_rate,
                                  nullptr, false);
  g.set_output(detail::build_head(g, x, cfg, n_classes));
  return model;
}

/// Two-path classifier: weight-independent copies of the backbone prefix up
/// to `fusion.concat_point` fed by (cartesian, polar) inputs, channel
/// concatenation, then the shared single-path suffix and head.
template <typename T>
ModelT<T> build_two_path(const BackboneConfig& cfg, const FusionConfig& fusion,
                         int n_classes) {
  cfg.validate();
  fusion.validate();
  if (n_classes < 2) throw std::invalid_argument("need at least 2 classes");

  ModelT<T> model;
  model.cfg = cfg;
  model.fusion = fusion;
  model.n_classes = n_classes;
  model.two_path = true;
  Graph<T>& g = model.graph;
  const int cut = fusion.concat_point;

  auto build_path = [&](const std::string& prefix) {
    int x = g.add_input(1);
    x = detail::build_stem(g, x, cfg, prefix);
    if (cfg.family == Family::residual)
      return detail::build_residual_trunk(g, x, cfg, prefix, cut, 1, nullptr,
                                          false);
    // Concatenation happens after the last dense layer of block `cut`,
    // before that block's compression; the compression itself is shared.
    return detail::build_dense_trunk(g, x, cfg, prefix, cut, 1,
                                     2 * cfg.growth_rate, nullptr, false,
                                     /*stop_before_last_transition=*/true);
  };
  const int cart = build_path("cart.");
  const int polar = build_path("polar.");
  int x = g.concat(cart, polar);

  if (cut < 4) {
    if (cfg.family == Family::residual) {
      x = detail::build_residual_trunk(g, x, cfg, "", 4, cut + 1,
                                       &model.fusion_weight_names, true);
    } else {
      // The fused entry is the transition right after block `cut`; its
      // compression targets the single-path width.
      const Eigen::Index single = detail::dense_channels_after_block(cfg, cut);
      x = detail::build_dense_trunk(g, x, cfg, "", 4, cut, single,
                                    &model.fusion_weight_names, true);
    }
  }
  g.set_output(detail::build_head(g, x, cfg, n_classes));
  return model;
}

/// Fresh classification head; every non-head parameter is preserved bit for
/// bit. The new head is drawn from `rng`.
template <typename T>
void replace_head(ModelT<T>& model, int n_classes, RngStream& rng) {
  ModelT<T> next = model.two_path
                       ? build_two_path<T>(model.cfg, model.fusion, n_classes)
                       : build_single_path<T>(model.cfg, n_classes);
  next.init_params(rng);
  next.source_tag = model.source_tag;
  for (auto& p : next.graph.params()) {
    if (p.group == 5) continue;
    const Param<T>* old = model.graph.find_param(p.name);
    if (!old || old->shape != p.shape)
      throw std::logic_error("replace_head: backbone mismatch at " + p.name);
    p.value = old->value;
    p.trainable = old->trainable;
  }
  model = std::move(next);
}

/// Set the transfer-learning regime. `from_scratch` re-randomizes every
/// parameter; `freeze_at` requires pretrained weights to be loaded first.
template <typename T>
void apply_freeze(ModelT<T>& model, const FreezeSpec& spec, RngStream& rng) {
  switch (spec.mode) {
    case FreezeSpec::Mode::from_scratch:
      model.init_params(rng);
      for (auto& p : model.graph.params()) p.trainable = true;
      break;
    case FreezeSpec::Mode::full_finetune:
      for (auto& p : model.graph.params()) p.trainable = true;
      break;
    case FreezeSpec::Mode::freeze_at:
      if (spec.retrain_point != 1 && spec.retrain_point != 2)
        throw std::invalid_argument("retraining point must be 1 or 2");
      if (model.source_tag == "random")
        throw std::invalid_argument(
            "freeze_at requires pretrained weights to be loaded");
      for (auto& p : model.graph.params())
        p.trainable = p.group > spec.retrain_point;
      break;
  }
}

}  // namespace octplaque
