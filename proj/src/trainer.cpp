#include "octplaque/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "octplaque/geometry.hpp"
#include "octplaque/loss.hpp"
#include "octplaque/optimizer.hpp"
#include "octplaque/scheduler.hpp"

namespace octplaque {

std::string to_string(InputMode mode) {
  switch (mode) {
    case InputMode::polar: return "polar";
    case InputMode::cartesian: return "cartesian";
    case InputMode::two_path: return "two-path";
  }
  throw std::logic_error("bad input mode");
}

InputMode input_mode_from_string(const std::string& s) {
  if (s == "polar") return InputMode::polar;
  if (s == "cartesian") return InputMode::cartesian;
  if (s == "two-path" || s == "two_path") return InputMode::two_path;
  throw std::invalid_argument("unknown representation: " + s);
}

int effective_batch_size(const TrainConfig& cfg, bool two_path) {
  return cfg.batch_size > 0 ? cfg.batch_size : (two_path ? 20 : 30);
}

PolicyPair make_policies(bool train_mode, bool augment, int crop) {
  PolicyPair p;
  p.cart = train_mode && augment
               ? AugmentPolicy::train(Representation::cartesian, crop)
               : AugmentPolicy::eval(Representation::cartesian, crop);
  p.polar = train_mode && augment
                ? AugmentPolicy::train(Representation::polar, crop)
                : AugmentPolicy::eval(Representation::polar, crop);
  return p;
}

void TrainConfig::validate() const {
  if (!(lr0 > 0.0)) throw std::invalid_argument("lr0 must be > 0");
  if (batch_size < 0) throw std::invalid_argument("batch size must be >= 0");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (plateau_patience < 1)
    throw std::invalid_argument("plateau patience must be >= 1");
  if (!(plateau_factor > 0.0 && plateau_factor < 1.0))
    throw std::invalid_argument("plateau factor must be in (0,1)");
  for (double w : class_weights)
    if (!(w > 0.0)) throw std::invalid_argument("class weights must be > 0");
}

void TrainHistory::write_csv(const std::filesystem::path& path) const {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write history: " + path.string());
  out << "epoch,lr,train_loss,val_loss,val_acc,val_f1\n";
  for (const auto& e : epochs)
    out << e.epoch << ',' << e.lr << ',' << e.train_loss << ',' << e.val_loss
        << ',' << e.val_acc << ',' << e.val_f1 << '\n';
}

nlohmann::json TrainHistory::summary_json() const {
  return nlohmann::json{{"epochs", epochs.size()},
                        {"best_epoch", best_epoch},
                        {"best_val_f1", best_val_f1},
                        {"best_val_loss", best_val_loss}};
}

namespace {

/// Per-sample augmentation stream: a pure function of (seed, epoch, entry,
/// slot), so batch assembly order never changes the draw.
RngStream sample_stream(std::uint64_t seed, int epoch, int entry, int slot) {
  return RngStream(seed)
      .split(0xA46u)
      .split(static_cast<std::uint64_t>(epoch) * 0x10001u +
             static_cast<std::uint64_t>(entry) * 4u +
             static_cast<std::uint64_t>(slot));
}

void copy_into(const ImageMatrix<float>& img, Tensor<float>& batch,
               Eigen::Index b) {
  std::copy(img.data(), img.data() + img.size(),
            batch.data() + b * img.size());
}

void fill_batch(const FrameCache& cache, const std::vector<int>& order,
                std::size_t begin, std::size_t end, const PolicyPair& policies,
                InputMode mode, std::uint64_t seed, int epoch,
                Tensor<float>& cart_batch, Tensor<float>& polar_batch,
                std::vector<int>& labels) {
  const Eigen::Index bsz = static_cast<Eigen::Index>(end - begin);
  const int crop = mode == InputMode::polar ? policies.polar.crop_size
                                            : policies.cart.crop_size;
  if (mode != InputMode::polar) cart_batch.resize(bsz, crop, crop, 1);
  if (mode != InputMode::cartesian)
    polar_batch.resize(bsz, policies.polar.crop_size,
                       policies.polar.crop_size, 1);
  labels.resize(static_cast<std::size_t>(bsz));

  for (std::size_t i = begin; i < end; ++i) {
    const int entry_idx = order[i];
    const auto& entry = cache.entries[static_cast<std::size_t>(entry_idx)];
    const Eigen::Index b = static_cast<Eigen::Index>(i - begin);
    labels[static_cast<std::size_t>(b)] = entry.class_id;

    if (mode != InputMode::polar) {
      CartesianImage img{entry.cart, cache.fov_mask};
      RngStream rng = sample_stream(seed, epoch, entry_idx, 0);
      copy_into(apply_policy(img, policies.cart, rng).data, cart_batch, b);
    }
    if (mode != InputMode::cartesian) {
      PolarImage img{entry.polar};
      RngStream rng = sample_stream(seed, epoch, entry_idx, 1);
      copy_into(apply_policy(img, policies.polar, rng).data, polar_batch, b);
    }
  }
}

MatrixX<float> logits_of(Model& model, const Tensor<float>& cart,
                         const Tensor<float>& polar, InputMode mode,
                         bool train, RngStream* rng) {
  const Tensor<float>* out = nullptr;
  switch (mode) {
    case InputMode::cartesian: out = &model.forward(cart, train, rng); break;
    case InputMode::polar: out = &model.forward(polar, train, rng); break;
    case InputMode::two_path:
      out = &model.forward(cart, polar, train, rng);
      break;
  }
  return out->as_matrix(out->n, out->c);
}

std::vector<double> effective_weights(const TrainConfig& cfg, int n_classes) {
  if (cfg.class_weights.empty())
    return std::vector<double>(static_cast<std::size_t>(n_classes), 1.0);
  if (static_cast<int>(cfg.class_weights.size()) != n_classes)
    throw std::invalid_argument("class weight count does not match classes");
  return cfg.class_weights;
}

double f1_of_report(const EvalReport& report) {
  if (report.binary && report.binary->f1) return *report.binary->f1;
  if (report.multi_f1) return *report.multi_f1;
  return 0.0;
}

std::vector<ArrayX<float>> snapshot_params(const Model& model) {
  std::vector<ArrayX<float>> snap;
  snap.reserve(model.graph.params().size());
  for (const auto& p : model.graph.params()) snap.push_back(p.value);
  return snap;
}

void restore_params(Model& model, const std::vector<ArrayX<float>>& snap) {
  auto& params = model.graph.params();
  for (std::size_t i = 0; i < params.size(); ++i) params[i].value = snap[i];
}

}  // namespace

EvalOutcome evaluate_model(Model& model, const FrameCache& cache,
                           InputMode mode, int crop,
                           const std::vector<double>& class_weights) {
  if (cache.empty()) throw std::invalid_argument("evaluate: empty cache");
  const PolicyPair policies = make_policies(false, false, crop);
  std::vector<double> weights = class_weights;
  if (weights.empty())
    weights.assign(static_cast<std::size_t>(model.n_classes), 1.0);

  std::vector<int> order(cache.size());
  std::iota(order.begin(), order.end(), 0);

  EvalOutcome outcome;
  outcome.preds.reserve(cache.size());
  std::vector<int> labels_all;
  labels_all.reserve(cache.size());
  double loss_sum = 0.0;

  Tensor<float> cart_batch, polar_batch;
  std::vector<int> labels;
  const std::size_t batch = 64;
  for (std::size_t begin = 0; begin < order.size(); begin += batch) {
    const std::size_t end = std::min(order.size(), begin + batch);
    fill_batch(cache, order, begin, end, policies, mode, 0, 0, cart_batch,
               polar_batch, labels);
    MatrixX<float> logits =
        logits_of(model, cart_batch, polar_batch, mode, false, nullptr);
    if (!logits.allFinite())
      throw std::runtime_error(
          "model diverged: non-finite logits during evaluation");
    const auto res = weighted_cross_entropy(logits, labels, weights);
    loss_sum += res.loss * static_cast<double>(end - begin);
    for (Eigen::Index i = 0; i < logits.rows(); ++i)
      outcome.preds.push_back(argmax_class(logits.row(i).data(),
                                           model.n_classes));
    labels_all.insert(labels_all.end(), labels.begin(), labels.end());
  }
  outcome.loss = loss_sum / static_cast<double>(cache.size());
  outcome.report = make_report(outcome.preds, labels_all, model.n_classes);
  return outcome;
}

TrainHistory train_model(Model& model, const FrameCache& train,
                         const FrameCache& val, const PolicyPair& policies,
                         InputMode mode, const TrainConfig& cfg) {
  cfg.validate();
  if (train.empty() || val.empty())
    throw std::invalid_argument("train/val manifests must be non-empty");
  if ((mode == InputMode::two_path) != model.two_path)
    throw std::invalid_argument("input mode does not match model topology");
  if (train.n_classes != model.n_classes)
    throw std::invalid_argument("cache classes do not match model classes");
  const int crop = policies.cart.crop_size;
  if (crop != model.cfg.input_size || policies.polar.crop_size != crop)
    throw std::invalid_argument("crop size must match the model input size");

  const int batch = effective_batch_size(cfg, model.two_path);
  const auto weights = effective_weights(cfg, model.n_classes);

  Adam<float> opt(cfg.lr0);
  PlateauScheduler sched(cfg.lr0, cfg.plateau_patience, cfg.plateau_factor,
                         cfg.min_delta);
  RngStream root(cfg.seed);
  RngStream dropout_rng = root.split(0xD0u);

  TrainHistory history;
  std::vector<ArrayX<float>> best_snapshot = snapshot_params(model);
  history.best_val_f1 = -1.0;

  std::vector<int> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  Tensor<float> cart_batch, polar_batch, dlogits_tensor;
  std::vector<int> labels;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    RngStream shuffle_rng = root.split(0x5Fu).split(static_cast<std::uint64_t>(epoch));
    shuffle_rng.shuffle(order);

    double train_loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(batch)) {
      const std::size_t end =
          std::min(order.size(), begin + static_cast<std::size_t>(batch));
      fill_batch(train, order, begin, end, policies, mode, cfg.seed, epoch,
                 cart_batch, polar_batch, labels);
      MatrixX<float> logits =
          logits_of(model, cart_batch, polar_batch, mode, true, &dropout_rng);
      if (!logits.allFinite())
        throw std::runtime_error(
            "training diverged (non-finite logits) at epoch " +
            std::to_string(epoch) + ", step offset " + std::to_string(begin) +
            "; lower the learning rate");
      const auto res = weighted_cross_entropy(logits, labels, weights);
      if (!std::isfinite(res.loss))
        throw std::runtime_error(
            "training diverged (non-finite loss) at epoch " +
            std::to_string(epoch) + ", step offset " + std::to_string(begin));
      train_loss_sum += res.loss * static_cast<double>(end - begin);

      dlogits_tensor.resize(res.dlogits.rows(), 1, 1, res.dlogits.cols());
      std::copy(res.dlogits.data(),
                res.dlogits.data() + res.dlogits.size(),
                dlogits_tensor.data());
      model.ws.zero_param_grads();
      model.backward(dlogits_tensor);
      opt.step(model.graph, model.ws);
    }

    EvalOutcome val_out = evaluate_model(model, val, mode, crop, weights);
    const double val_f1 = f1_of_report(val_out.report);
    double val_acc = 0.0;
    if (val_out.report.n > 0)
      val_acc = static_cast<double>(val_out.report.confusion.trace()) /
                static_cast<double>(val_out.report.n);

    EpochStats stats;
    stats.epoch = epoch;
    stats.lr = opt.learning_rate();
    stats.train_loss = train_loss_sum / static_cast<double>(train.size());
    stats.val_loss = val_out.loss;
    stats.val_acc = val_acc;
    stats.val_f1 = val_f1;
    history.epochs.push_back(stats);

    if (val_f1 > history.best_val_f1) {
      history.best_val_f1 = val_f1;
      history.best_val_loss = val_out.loss;
      history.best_epoch = epoch;
      best_snapshot = snapshot_params(model);
    }
    opt.set_learning_rate(sched.observe(val_out.loss));
  }

  restore_params(model, best_snapshot);
  return history;
}

std::vector<GridPoint> expand_grid(const std::vector<double>& lrs,
                                   const std::vector<double>& keeps,
                                   const std::vector<int>& resizes,
                                   const std::vector<int>& crops) {
  std::vector<GridPoint> grid;
  for (double lr : lrs)
    for (double keep : keeps)
      for (int rs : resizes)
        for (int crop : crops) grid.push_back(GridPoint{lr, keep, rs, crop});
  return grid;
}

GridOutcome grid_search(const std::vector<GridPoint>& grid,
                        const DatasetManifest& train_manifest,
                        const std::filesystem::path& root, int k,
                        const BackboneConfig& base_cfg,
                        const TrainConfig& base_train, InputMode mode,
                        bool binary, bool augment) {
  if (grid.empty()) throw std::invalid_argument("grid_search: empty grid");
  const auto folds = kfold(train_manifest, k);

  GridOutcome outcome;
  bool have_best = false;
  GridScore best_score;

  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const GridPoint& point = grid[gi];
    if (point.crop > point.resize)
      throw std::invalid_argument("grid point crop exceeds resize");

    BackboneConfig cfg = base_cfg;
    cfg.dropout_keep = point.dropout_keep;
    cfg.input_size = point.crop;

    double f1_sum = 0.0;
    Eigen::Index param_count = 0;
    for (std::size_t fi = 0; fi < folds.size(); ++fi) {
      const FrameCache train_cache =
          build_frame_cache(folds[fi].first, root, point.resize, binary);
      const FrameCache val_cache =
          build_frame_cache(folds[fi].second, root, point.resize, binary);

      Model model = mode == InputMode::two_path
                        ? build_two_path<float>(cfg, FusionConfig{},
                                                train_cache.n_classes)
                        : build_single_path<float>(cfg, train_cache.n_classes);
      TrainConfig tcfg = base_train;
      tcfg.lr0 = point.lr;
      tcfg.seed = RngStream(base_train.seed)
                      .split(0x6Du)
                      .split(gi * 131u + fi)
                      .next_u64();
      RngStream init_rng(tcfg.seed);
      model.init_params(init_rng);
      param_count = model.parameter_count();

      const PolicyPair policies = make_policies(true, augment, point.crop);
      const TrainHistory h =
          train_model(model, train_cache, val_cache, policies, mode, tcfg);
      f1_sum += h.best_val_f1;
    }

    GridScore score;
    score.point = point;
    score.mean_f1 = f1_sum / static_cast<double>(folds.size());
    score.param_count = param_count;
    outcome.scores.push_back(score);

    const bool better =
        !have_best || score.mean_f1 > best_score.mean_f1 ||
        (score.mean_f1 == best_score.mean_f1 &&
         (score.param_count < best_score.param_count ||
          (score.param_count == best_score.param_count &&
           score.point.lr < best_score.point.lr)));
    if (better) {
      best_score = score;
      have_best = true;
    }
  }
  outcome.best = best_score.point;
  outcome.best_f1 = best_score.mean_f1;
  return outcome;
}

WeightStore proxy_pretrain(const BackboneConfig& cfg,
                           const std::vector<ProxyFrame>& proxy_frames,
                           Representation rep, const TrainConfig& train_cfg,
                           int resize_size) {
  if (proxy_frames.size() < 10)
    throw std::invalid_argument("proxy pretraining needs more frames");

  FrameCache train_cache, val_cache;
  for (FrameCache* c : {&train_cache, &val_cache}) {
    c->resize_size = resize_size;
    c->binary = false;
    c->n_classes = kProxyClasses;
    c->fov_mask = circular_fov_mask(resize_size);
  }

  for (std::size_t i = 0; i < proxy_frames.size(); ++i) {
    const auto& pf = proxy_frames[i];
    FrameCacheEntry entry;
    entry.polar = resize(pf.polar, resize_size, resize_size).data;
    const CartesianImage cart =
        polar_to_cartesian(pf.polar, 2 * pf.polar.depth());
    entry.cart = resize(cart, resize_size, resize_size).data;
    entry.class_id = pf.artifact_class;
    entry.patient_id = "proxy";
    entry.frame_index = static_cast<int>(i);
    // Every 7th frame validates.
    (i % 7 == 3 ? val_cache : train_cache).entries.push_back(std::move(entry));
  }

  Model model = build_single_path<float>(cfg, kProxyClasses);
  RngStream init_rng(train_cfg.seed ^ 0x9E37u);
  model.init_params(init_rng);

  const InputMode mode =
      rep == Representation::cartesian ? InputMode::cartesian : InputMode::polar;
  const PolicyPair policies = make_policies(true, true, cfg.input_size);
  train_model(model, train_cache, val_cache, policies, mode, train_cfg);
  return WeightStore::from_model(model, "proxy-pretrain");
}

}  // namespace octplaque
