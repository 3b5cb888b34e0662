// Acceptance gate: runs every shipping criterion end to end and prints one
// PASS/FAIL line per criterion. Exits nonzero if any criterion fails.
//
// The workspace (dataset, proxy store, table runs) lives under the directory
// named by OCTPLAQUE_ACCEPT_DIR (default: <tmp>/octplaque_acceptance) and is
// reused across invocations when the generator parameters match.
//
// Usage: acceptance [--only N[,M,...]]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "octplaque/cli.hpp"
#include "octplaque/loss.hpp"
#include "octplaque/optimizer.hpp"
#include "octplaque/trainer.hpp"

#include "test_util.hpp"

using namespace octplaque;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Gate {
  int failures = 0;
  std::set<int> only;

  bool enabled(int n) const { return only.empty() || only.count(n); }

  void report(int n, const std::string& name, bool pass,
              const std::string& detail) {
    std::printf("[%s] criterion %2d: %s  (%s)\n", pass ? "PASS" : "FAIL", n,
                name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  }
};

// ---------------------------------------------------------------------------
// Shared desk-scale training protocol for the directional checks. Short runs
// on a patient subset keep pretraining/fusion effects visible (long training
// would saturate the synthetic task).

constexpr int kResize = 64;
constexpr int kCrop = 56;
constexpr double kDeskLr = 1e-3;
constexpr int kShortEpochs = 6;
constexpr int kShortTrainPatients = 6;
constexpr int kProxyFrames = 420;
constexpr int kProxyEpochs = 6;
constexpr int kMultiEpochs = 10;

struct Bench {
  fs::path root;
  DatasetManifest manifest;
  DatasetManifest train_m, val_m, test_m;

  FrameCache cache(const DatasetManifest& part, bool binary) const {
    return build_frame_cache(part, root, kResize, binary);
  }
};

Bench make_bench(const fs::path& workspace) {
  Bench b;
  b.root = workspace / "data";
  PhantomParams params;  // desk defaults: 24 x 60, 192 x 224, mix .5/.4/.1
  params.seed = 1;
  const fs::path manifest_path = b.root / "manifest.jsonl";
  bool reuse = false;
  if (fs::exists(manifest_path)) {
    b.manifest = load_manifest(manifest_path);
    reuse = b.manifest.provenance == params.to_json();
  }
  if (!reuse) {
    fs::remove_all(b.root);
    std::printf("-- generating desk dataset under %s\n", b.root.string().c_str());
    b.manifest = generate_dataset(params, b.root);
  }

  RngStream rng(7);
  auto [train_all, test] = patient_split(b.manifest, 0.25, rng);
  auto patients = train_all.patient_ids();
  std::vector<std::string> val_p(patients.end() - 3, patients.end());
  std::vector<std::string> train_p(patients.begin(), patients.end() - 3);
  b.train_m = filter_patients(train_all, train_p, SplitTag::train);
  b.val_m = filter_patients(train_all, val_p, SplitTag::val);
  b.test_m = test;
  return b;
}

DatasetManifest patient_subset(const DatasetManifest& m, int n_patients,
                               std::uint64_t seed) {
  auto patients = m.patient_ids();
  RngStream rng(seed);
  rng.shuffle(patients);
  patients.resize(static_cast<std::size_t>(
      std::min<int>(n_patients, static_cast<int>(patients.size()))));
  return filter_patients(m, patients, SplitTag::train);
}

BackboneConfig desk_backbone() {
  BackboneConfig cfg = BackboneConfig::desk(Family::residual);
  cfg.input_size = kCrop;
  return cfg;
}

const WeightStore& shared_proxy_store(const fs::path& workspace) {
  static WeightStore store = [&] {
    const fs::path dir = workspace / "proxy_store";
    if (fs::exists(dir / "manifest.json")) {
      WeightStore loaded = WeightStore::load(dir);
      if (loaded.source_tag == "proxy-pretrain") return loaded;
    }
    std::printf("-- proxy pretraining (artifact classification)\n");
    PhantomParams params;
    params.artifact_rate = 0.5;
    params.seed = 900;  // disjoint from the task dataset seed range
    const auto frames =
        generate_proxy_frames(params, kProxyFrames, RngStream(901));
    TrainConfig tc;
    tc.lr0 = kDeskLr;
    tc.epochs = kProxyEpochs;
    tc.seed = 902;
    WeightStore fresh = proxy_pretrain(desk_backbone(), frames,
                                       Representation::cartesian, tc, kResize);
    fresh.save(dir);
    return fresh;
  }();
  return store;
}

struct ShortRun {
  InputMode mode = InputMode::cartesian;
  bool pretrained = true;
  bool multiclass = false;
  bool class_weighted = false;
  FusionConfig fusion;
  int epochs = kShortEpochs;
  int train_patients = kShortTrainPatients;
};

EvalOutcome run_short(const Bench& bench, const fs::path& workspace,
                      const ShortRun& spec, std::uint64_t seed) {
  const DatasetManifest train_m =
      patient_subset(bench.train_m, spec.train_patients, seed);
  const FrameCache train_c = bench.cache(train_m, !spec.multiclass);
  const FrameCache val_c = bench.cache(bench.val_m, !spec.multiclass);
  const FrameCache test_c = bench.cache(bench.test_m, !spec.multiclass);

  const BackboneConfig cfg = desk_backbone();
  const int n_classes = spec.multiclass ? kNumClasses : 2;
  Model model = spec.mode == InputMode::two_path
                    ? build_two_path<float>(cfg, spec.fusion, n_classes)
                    : build_single_path<float>(cfg, n_classes);
  RngStream init_rng(seed * 1000003ull + 17);
  model.init_params(init_rng);
  if (spec.pretrained) {
    load_weights(model, shared_proxy_store(workspace), /*strict=*/false);
    replace_head(model, n_classes, init_rng);
  }

  TrainConfig tc;
  tc.lr0 = kDeskLr;
  tc.epochs = spec.epochs;
  tc.seed = seed;
  if (spec.class_weighted) tc.class_weights = class_weights(train_m, false);
  const PolicyPair policies = make_policies(true, true, kCrop);
  train_model(model, train_c, val_c, policies, spec.mode, tc);
  return evaluate_model(model, test_c, spec.mode, kCrop, tc.class_weights);
}

double median5(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

// ---------------------------------------------------------------------------

void criterion1_equivariance(Gate& gate) {
  const auto t0 = Clock::now();
  RngStream rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index A = 96 + 8 * rng.next_int(5);
    const Eigen::Index D = 80 + 8 * rng.next_int(5);
    const PolarImage phantom = testutil::smooth_polar_phantom(A, D, rng);
    const long long s = rng.next_int(1, A - 1);
    const CartesianImage via_shift =
        polar_to_cartesian(circular_shift_polar(phantom, s), 2 * D);
    const CartesianImage via_rotate = rotate_cartesian(
        polar_to_cartesian(phantom, 2 * D),
        360.0 * static_cast<double>(s) / static_cast<double>(A));
    worst = std::max(worst,
                     testutil::mean_abs_diff_in_fov(via_shift, via_rotate));
  }
  const double elapsed = seconds_since(t0);
  char detail[128];
  std::snprintf(detail, sizeof(detail),
                "worst in-FOV MAE %.4f over 50 phantoms, %.1fs", worst, elapsed);
  gate.report(1, "shift/rotation equivariance", worst < 0.02 && elapsed < 60.0,
              detail);
}

void criterion2_round_trip(Gate& gate) {
  RngStream rng(22);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index A = 96, D = 96;
    const PolarImage phantom = testutil::smooth_polar_phantom(A, D, rng);
    const PolarImage back =
        cartesian_to_polar(polar_to_cartesian(phantom, 2 * D), A, D);
    const Eigen::Index skip = (D * 5 + 99) / 100;
    double sum = 0.0;
    for (Eigen::Index a = 0; a < A; ++a)
      for (Eigen::Index d = skip; d < D; ++d)
        sum += std::abs(static_cast<double>(phantom.data(a, d)) -
                        back.data(a, d));
    worst = std::max(worst, sum / static_cast<double>(A * (D - skip)));
  }

  PolarImage flat;
  flat.data.setConstant(64, 64, 0.37f);
  const CartesianImage cart = polar_to_cartesian(flat, 128);
  double const_err = 0.0;
  for (Eigen::Index i = 0; i < 128; ++i)
    for (Eigen::Index j = 0; j < 128; ++j)
      if (cart.fov_mask(i, j))
        const_err = std::max(const_err,
                             std::abs(static_cast<double>(cart.data(i, j)) - 0.37));
  const PolarImage flat_back = cartesian_to_polar(cart, 64, 64);
  for (Eigen::Index a = 0; a < 64; ++a)
    for (Eigen::Index d = 0; d < 64; ++d)
      const_err = std::max(
          const_err, std::abs(static_cast<double>(flat_back.data(a, d)) - 0.37));

  char detail[128];
  std::snprintf(detail, sizeof(detail),
                "worst MAE %.4f (20 phantoms), constant error %.2e", worst,
                const_err);
  gate.report(2, "polar->cartesian->polar round trip", worst < 0.02 && const_err < 1e-6,
              detail);
}

void criterion3_permutations(Gate& gate) {
  RngStream rng(33);
  const Eigen::Index A = 128, D = 32;
  PolarImage img;
  img.data.resize(A, D);
  for (Eigen::Index i = 0; i < img.data.size(); ++i)
    img.data.data()[i] = rng.next_float();

  auto sorted_rows = [&](const PolarImage& p) {
    std::vector<std::vector<float>> rows;
    for (Eigen::Index r = 0; r < p.angles(); ++r)
      rows.emplace_back(p.data.row(r).data(), p.data.row(r).data() + p.depth());
    std::sort(rows.begin(), rows.end());
    return rows;
  };
  const auto base = sorted_rows(img);
  bool lossless = sorted_rows(circular_shift_polar(img, 41)) == base &&
                  sorted_rows(flip_polar(img)) == base;

  bool additive = true;
  for (int trial = 0; trial < 1000 && additive; ++trial) {
    const long long s1 = rng.next_int(-400, 400);
    const long long s2 = rng.next_int(-400, 400);
    const PolarImage two = circular_shift_polar(circular_shift_polar(img, s1), s2);
    const PolarImage one = circular_shift_polar(img, s1 + s2);
    additive = (two.data.array() == one.data.array()).all();
  }
  gate.report(3, "permutation losslessness and shift additivity",
              lossless && additive,
              lossless ? (additive ? "1000 random (s1, s2) bit-exact"
                                   : "additivity violated")
                       : "row multiset changed");
}

void criterion4_loss(Gate& gate) {
  bool ok = true;
  std::ostringstream detail;

  MatrixX<double> uniform = MatrixX<double>::Constant(3, 3, 0.25);
  const double l1 =
      weighted_cross_entropy(uniform, std::vector<int>{0, 1, 2},
                             {1.0, 1.0, 1.0})
          .loss;
  ok &= std::abs(l1 - std::log(3.0)) < 1e-6;
  detail << "ln3 err " << std::abs(l1 - std::log(3.0));

  MatrixX<double> two(1, 2);
  two << 0.0, std::log(3.0);
  const double l2 =
      weighted_cross_entropy(two, std::vector<int>{0}, {2.0, 1.0}).loss;
  ok &= std::abs(l2 - 2.7726) < 1e-4;

  // Loss-layer gradient vs central differences (double precision).
  RngStream rng(44);
  MatrixX<double> logits(4, 3);
  for (Eigen::Index i = 0; i < logits.size(); ++i)
    logits.data()[i] = rng.next_gaussian();
  const std::vector<int> labels = {0, 2, 1, 1};
  const std::vector<double> weights = {0.7, 1.1, 2.2};
  const auto res = weighted_cross_entropy(logits, labels, weights);
  double worst_loss_layer = 0.0;
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index c = 0; c < 3; ++c) {
      MatrixX<double> lp = logits, lm = logits;
      lp(i, c) += 1e-6;
      lm(i, c) -= 1e-6;
      const double fd = (weighted_cross_entropy(lp, labels, weights).loss -
                         weighted_cross_entropy(lm, labels, weights).loss) /
                        2e-6;
      const double rel = std::abs(fd - res.dlogits(i, c)) /
                         std::max({std::abs(fd), std::abs(res.dlogits(i, c)), 1e-9});
      worst_loss_layer = std::max(worst_loss_layer, rel);
    }
  ok &= worst_loss_layer < 1e-6;
  detail << ", loss-layer FD rel " << worst_loss_layer;

  // End-to-end gradients on the tiny model vs central differences.
  BackboneConfig tiny;
  tiny.stage_blocks = {1, 1, 1, 1};
  tiny.base_width = 8;
  tiny.dropout_keep = 1.0;
  tiny.input_size = 16;
  ModelT<double> model = build_single_path<double>(tiny, 2);
  RngStream irng(45);
  model.init_params(irng);
  Tensor<double> x(2, 16, 16, 1);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.v[i] = rng.next_double();
  const std::vector<int> mlabels = {0, 1};
  const std::vector<double> mweights = {1.0, 1.0};

  auto model_loss = [&]() {
    const Tensor<double>& out = model.graph.forward(model.ws, {&x}, true, nullptr);
    MatrixX<double> lg = out.as_matrix(2, 2);
    return weighted_cross_entropy(lg, mlabels, mweights);
  };
  const auto base = model_loss();
  Tensor<double> d(2, 1, 1, 2);
  std::copy(base.dlogits.data(), base.dlogits.data() + 4, d.data());
  model.ws.zero_param_grads();
  model.graph.backward(model.ws, d);
  const auto grads = model.ws.param_grads;

  double worst_model = 0.0;
  auto& params = model.graph.params();
  for (int chk = 0; chk < 20; ++chk) {
    const std::size_t pi = static_cast<std::size_t>(
        rng.next_int(static_cast<long long>(params.size())));
    const Eigen::Index ei = rng.next_int(params[pi].value.size());
    const double w0 = params[pi].value[ei];
    const double h = 1e-5 * (1.0 + std::abs(w0));
    params[pi].value[ei] = w0 + h;
    const double lp = model_loss().loss;
    params[pi].value[ei] = w0 - h;
    const double lm = model_loss().loss;
    params[pi].value[ei] = w0;
    const double fd = (lp - lm) / (2 * h);
    const double an = grads[pi][ei];
    worst_model = std::max(worst_model, std::abs(fd - an) /
                                            std::max({std::abs(fd), std::abs(an), 1e-8}));
  }
  ok &= worst_model < 1e-3;
  detail << ", model FD rel " << worst_model;
  gate.report(4, "weighted cross-entropy and gradients", ok, detail.str());
}

void criterion5_freeze(Gate& gate) {
  bool ok = true;
  std::ostringstream detail;
  BackboneConfig tiny;
  tiny.stage_blocks = {1, 1, 1, 1};
  tiny.base_width = 8;
  tiny.dropout_keep = 1.0;
  tiny.input_size = 16;

  for (int point : {1, 2}) {
    Model model = build_single_path<float>(tiny, 2);
    RngStream rng(50 + static_cast<std::uint64_t>(point));
    model.init_params(rng);
    model.source_tag = "proxy-pretrain";
    RngStream frng(52);
    apply_freeze(model, FreezeSpec::at(point), frng);

    std::vector<ArrayX<float>> before;
    for (const auto& p : model.graph.params()) before.push_back(p.value);

    Adam<float> opt(1e-3);
    RngStream data_rng(53);
    for (int step = 0; step < 100; ++step) {
      Tensor<float> x(4, 16, 16, 1);
      for (Eigen::Index i = 0; i < x.size(); ++i) x.v[i] = data_rng.next_float();
      std::vector<int> labels;
      for (int i = 0; i < 4; ++i)
        labels.push_back(static_cast<int>(data_rng.next_int(2)));
      const Tensor<float>& out = model.forward(x, true, &data_rng);
      MatrixX<float> logits = out.as_matrix(4, 2);
      const auto res = weighted_cross_entropy(logits, labels, {1.0, 1.0});
      Tensor<float> dl(4, 1, 1, 2);
      std::copy(res.dlogits.data(), res.dlogits.data() + 8, dl.data());
      model.ws.zero_param_grads();
      model.backward(dl);
      opt.step(model.graph, model.ws);
    }

    std::array<bool, 6> changed{};
    const auto& params = model.graph.params();
    for (std::size_t i = 0; i < params.size(); ++i) {
      const bool moved = (params[i].value != before[i]).any();
      if (!params[i].trainable && moved) ok = false;
      if (moved) changed[static_cast<std::size_t>(params[i].group)] = true;
    }
    for (int g = 0; g <= point; ++g)
      if (changed[static_cast<std::size_t>(g)]) ok = false;
    for (int g = point + 1; g <= 5; ++g)
      if (!changed[static_cast<std::size_t>(g)]) ok = false;
    detail << "p_r=" << point << (ok ? " ok " : " VIOLATED ");
  }
  gate.report(5, "freeze-point contract over 100 optimizer steps", ok,
              detail.str());
}

void criterion6_fusion_identity(Gate& gate) {
  RngStream rng(66);
  const Eigen::Index f1 = 32, f2 = 16;
  WeightStore::Entry w;
  w.shape = {1, 1, f1, f2};
  for (Eigen::Index i = 0; i < f1 * f2; ++i)
    w.data.push_back(static_cast<float>(rng.next_gaussian()));
  const WeightStore::Entry sliced = init_fusion_compression(w);

  // Run the duplicated features through the real convolution op.
  Tensor<float> x(2, 5, 5, f1);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    x.v[i] = static_cast<float>(rng.next_gaussian());
  Tensor<float> xx;
  concat_channels_forward(x, x, xx);

  ArrayX<float> bias(f2);
  for (Eigen::Index i = 0; i < f2; ++i)
    bias[i] = static_cast<float>(rng.next_gaussian());

  Eigen::Map<const MatrixX<float>> wm(w.data.data(), f1, f2);
  Eigen::Map<const MatrixX<float>> sm(sliced.data.data(), 2 * f1, f2);
  const MatrixX<float> single = x.by_channels() * wm;
  MatrixX<float> fused = xx.by_channels() * sm;
  fused.rowwise() += bias.transpose().matrix();
  const MatrixX<float> expect =
      (2.0f * single).rowwise() + bias.transpose().matrix();

  double worst = 0.0;
  for (Eigen::Index i = 0; i < fused.size(); ++i) {
    const double rel = std::abs(fused.data()[i] - expect.data()[i]) /
                       std::max(1e-6, std::abs(static_cast<double>(expect.data()[i])));
    worst = std::max(worst, rel);
  }
  char detail[96];
  std::snprintf(detail, sizeof(detail), "worst relative deviation %.2e", worst);
  gate.report(6, "sliced fusion init doubles the linear response",
              worst <= 1e-5, detail);
}

void criterion7_metric_oracle(Gate& gate) {
  RngStream rng(77);
  bool ok = true;
  for (int trial = 0; trial < 1000 && ok; ++trial) {
    const int classes = 2 + static_cast<int>(rng.next_int(2));  // 2 or 3
    const int n = 1 + static_cast<int>(rng.next_int(80));
    std::vector<int> preds, labels;
    for (int i = 0; i < n; ++i) {
      preds.push_back(static_cast<int>(rng.next_int(classes)));
      labels.push_back(static_cast<int>(rng.next_int(classes)));
    }
    const ConfusionMatrix m = confusion_matrix(preds, labels, classes);

    // Brute-force tallies straight from the pair lists.
    for (int c = 0; c < classes && ok; ++c) {
      long long hit = 0, tot = 0;
      for (int i = 0; i < n; ++i)
        if (labels[static_cast<std::size_t>(i)] == c) {
          ++tot;
          hit += preds[static_cast<std::size_t>(i)] == c;
        }
      const auto wa = per_class_weighted_accuracy(m)[static_cast<std::size_t>(c)];
      if (tot == 0) {
        ok &= !wa.has_value();
      } else {
        ok &= wa.has_value() &&
              std::abs(*wa - static_cast<double>(hit) / static_cast<double>(tot)) <= 1e-12;
      }
    }
    if (classes == 2) {
      long long tp = 0, tn = 0, fp = 0, fn = 0;
      for (int i = 0; i < n; ++i) {
        const int l = labels[static_cast<std::size_t>(i)];
        const int p = preds[static_cast<std::size_t>(i)];
        tp += l == 1 && p == 1;
        tn += l == 0 && p == 0;
        fp += l == 0 && p == 1;
        fn += l == 1 && p == 0;
      }
      const BinaryMetrics b = binary_metrics(m, 1);
      ok &= std::abs(*b.acc - double(tp + tn) / n) <= 1e-12;
      if (tp + fn > 0) ok &= std::abs(*b.sens - double(tp) / double(tp + fn)) <= 1e-12;
      else ok &= !b.sens.has_value();
      if (tn + fp > 0) ok &= std::abs(*b.spec - double(tn) / double(tn + fp)) <= 1e-12;
      else ok &= !b.spec.has_value();
      if (2 * tp + fp + fn > 0)
        ok &= std::abs(*b.f1 - 2.0 * tp / double(2 * tp + fp + fn)) <= 1e-12;
      else ok &= !b.f1.has_value();
    }
    // Macro F1 against a direct per-class loop.
    double macro = 0.0;
    for (int c = 0; c < classes; ++c) {
      long long tp = 0, fp = 0, fn = 0;
      for (int i = 0; i < n; ++i) {
        const int l = labels[static_cast<std::size_t>(i)];
        const int p = preds[static_cast<std::size_t>(i)];
        tp += l == c && p == c;
        fp += l != c && p == c;
        fn += l == c && p != c;
      }
      macro += 2 * tp + fp + fn == 0 ? 0.0 : 2.0 * tp / double(2 * tp + fp + fn);
    }
    macro /= classes;
    ok &= std::abs(multiclass_f1(m) - macro) <= 1e-12;
  }
  gate.report(7, "metrics agree with the counting oracle (1000 matrices)", ok,
              ok ? "exact to 1e-12" : "disagreement found");
}

void criterion8_learnability(Gate& gate, const Bench& bench,
                             const fs::path& workspace) {
  // Main run: full desk protocol, 40 epochs, from random init.
  const auto t0 = Clock::now();
  const FrameCache train_c = bench.cache(bench.train_m, true);
  const FrameCache val_c = bench.cache(bench.val_m, true);
  const FrameCache test_c = bench.cache(bench.test_m, true);

  Model model = build_single_path<float>(desk_backbone(), 2);
  RngStream init_rng(80);
  model.init_params(init_rng);
  TrainConfig tc;
  tc.lr0 = kDeskLr;
  tc.epochs = 40;
  tc.seed = 81;
  const PolicyPair policies = make_policies(true, true, kCrop);
  train_model(model, train_c, val_c, policies, InputMode::cartesian, tc);
  const EvalOutcome out =
      evaluate_model(model, test_c, InputMode::cartesian, kCrop, {});
  const double acc = out.report.binary->acc.value_or(0.0);
  const double elapsed = seconds_since(t0);

  // Direction: proxy-pretrained full fine-tuning beats training from
  // scratch on short runs.
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ShortRun scratch;
    scratch.pretrained = false;
    ShortRun full;
    full.pretrained = true;
    const double acc_scratch =
        run_short(bench, workspace, scratch, 800 + seed).report.binary->acc.value_or(0.0);
    const double acc_full =
        run_short(bench, workspace, full, 800 + seed).report.binary->acc.value_or(0.0);
    wins += acc_full > acc_scratch;
    std::printf("   seed %llu: from-scratch %.3f vs pretrained %.3f\n",
                static_cast<unsigned long long>(seed), acc_scratch, acc_full);
  }

  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "test acc %.4f in %.0fs (40 epochs); pretrained>scratch %d/5",
                acc, elapsed, wins);
  gate.report(8, "desk-scale learnability and transfer direction",
              acc >= 0.95 && elapsed < 600.0 && wins >= 4, detail);
}

void criterion9_fusion_direction(Gate& gate, const Bench& bench,
                                 const fs::path& workspace) {
  int fusion_wins = 0, init_wins = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ShortRun cart;
    cart.mode = InputMode::cartesian;
    ShortRun polar;
    polar.mode = InputMode::polar;
    ShortRun fused;
    fused.mode = InputMode::two_path;
    fused.fusion.concat_point = 3;
    fused.fusion.sliced_init = true;
    ShortRun noinit = fused;
    noinit.fusion.sliced_init = false;

    const double f1_cart =
        run_short(bench, workspace, cart, 900 + seed).report.binary->f1.value_or(0.0);
    const double f1_polar =
        run_short(bench, workspace, polar, 900 + seed).report.binary->f1.value_or(0.0);
    const double f1_fused =
        run_short(bench, workspace, fused, 900 + seed).report.binary->f1.value_or(0.0);
    const double f1_noinit =
        run_short(bench, workspace, noinit, 900 + seed).report.binary->f1.value_or(0.0);

    fusion_wins += f1_fused >= std::max(f1_cart, f1_polar);
    init_wins += f1_fused >= f1_noinit;
    std::printf("   seed %llu: cart %.3f polar %.3f fused %.3f no-init %.3f\n",
                static_cast<unsigned long long>(seed), f1_cart, f1_polar,
                f1_fused, f1_noinit);
  }
  char detail[128];
  std::snprintf(detail, sizeof(detail),
                "fused>=best single %d/5, sliced>=no-init %d/5", fusion_wins,
                init_wins);
  gate.report(9, "two-path fusion benefit direction",
              fusion_wins >= 4 && init_wins >= 4, detail);
}

void criterion10_class_weighting(Gate& gate, const Bench& bench,
                                 const fs::path& workspace) {
  std::vector<double> weighted_wa, drop;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ShortRun weighted;
    weighted.multiclass = true;
    weighted.class_weighted = true;
    weighted.epochs = kMultiEpochs;
    weighted.train_patients = 10;
    ShortRun plain = weighted;
    plain.class_weighted = false;

    const auto w = run_short(bench, workspace, weighted, 1000 + seed);
    const auto p = run_short(bench, workspace, plain, 1000 + seed);
    const double wa_w =
        w.report.per_class_weighted_acc[static_cast<int>(Label::calcified)]
            .value_or(0.0);
    const double wa_p =
        p.report.per_class_weighted_acc[static_cast<int>(Label::calcified)]
            .value_or(0.0);
    weighted_wa.push_back(wa_w);
    drop.push_back(wa_w - wa_p);
    std::printf("   seed %llu: calcified recall weighted %.3f vs plain %.3f\n",
                static_cast<unsigned long long>(seed), wa_w, wa_p);
  }
  const double med_wa = median5(weighted_wa);
  const double med_drop = median5(drop);
  char detail[128];
  std::snprintf(detail, sizeof(detail),
                "median weighted recall %.3f, median drop without weights %.3f",
                med_wa, med_drop);
  gate.report(10, "inverse-frequency weighting lifts the rare class",
              med_wa > 0.8 && med_drop >= 0.05, detail);
}

void criterion11_dataset_protocol(Gate& gate, const Bench& bench) {
  bool ok = true;
  for (std::uint64_t seed = 0; seed < 100 && ok; ++seed) {
    RngStream rng(seed);
    auto [train, test] = patient_split(bench.manifest, 0.25, rng);
    const auto tp = train.patient_ids();
    const auto vp = test.patient_ids();
    std::set<std::string> train_set(tp.begin(), tp.end());
    for (const auto& p : vp) ok &= train_set.count(p) == 0;
    ok &= tp.size() + vp.size() == bench.manifest.patient_ids().size();
  }

  const auto folds = kfold(bench.manifest, 3);
  std::set<std::string> seen;
  std::size_t total = 0;
  for (const auto& [train, val] : folds) {
    for (const auto& p : val.patient_ids()) {
      ok &= seen.insert(p).second;
      ++total;
    }
  }
  ok &= total == bench.manifest.patient_ids().size();
  gate.report(11, "patient-level splits never leak", ok,
              ok ? "100 split seeds + 3-fold partition clean"
                 : "leak detected");
}

void criterion12_tables(Gate& gate, const fs::path& workspace) {
  const auto t0 = Clock::now();
  RunConfig cfg;
  cfg.seed = 7;
  cfg.name = "acceptance";
  cfg.out_dir = workspace / "runs";
  cfg.data_root = workspace / "tables_data";
  cfg.resize = kResize;
  cfg.crop = kCrop;
  cfg.train.lr0 = kDeskLr;
  cfg.tables_epochs = 8;
  cfg.tables_patients = 16;
  cfg.tables_frames = 45;
  cfg.tables_proxy_frames = 300;
  cfg.tables_proxy_epochs = 5;
  cfg.validate();

  const fs::path report = cli::cmd_reproduce_tables(cfg);
  std::ifstream in(report);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string md = buf.str();

  const std::vector<std::string> required = {
      "Table I analogue",  "Table II analogue", "Table III analogue",
      "Table IV analogue", "Densenet Cart.",    "Densenet Polar.",
      "Resnet Cart.",      "Resnet Polar",      "Densenet Full",
      "Densenet From Scratch", "Densenet p_r=1", "Densenet p_r=2",
      "Densenet From Scratch (Polar)", "Resnet Full", "Resnet From Scratch",
      "Resnet p_r=1", "Resnet p_r=2", "Resnet From Scratch (Polar)",
      "Densenet No Init.", "Densenet c_c=2", "Densenet c_c=3",
      "Densenet c_c=4", "Resnet No Init.", "Resnet c_c=2", "Resnet c_c=3",
      "Resnet c_c=4"};
  std::vector<std::string> missing;
  for (const auto& row : required)
    if (md.find(row) == std::string::npos) missing.push_back(row);

  const double hours = seconds_since(t0) / 3600.0;
  char detail[160];
  std::snprintf(detail, sizeof(detail), "%zu required rows present, %.2f h%s%s",
                required.size() - missing.size(), hours,
                missing.empty() ? "" : ", missing: ",
                missing.empty() ? "" : missing.front().c_str());
  gate.report(12, "reproduce-tables emits all four analogues in budget",
              missing.empty() && hours < 4.0, detail);
}

}  // namespace

int main(int argc, char** argv) {
  Gate gate;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string tok;
      while (std::getline(ss, tok, ',')) gate.only.insert(std::stoi(tok));
    }
  }

  fs::path workspace = fs::temp_directory_path() / "octplaque_acceptance";
  if (const char* env = std::getenv("OCTPLAQUE_ACCEPT_DIR")) workspace = env;
  fs::create_directories(workspace);
  std::printf("workspace: %s\n", workspace.string().c_str());

  const auto t0 = Clock::now();
  if (gate.enabled(1)) criterion1_equivariance(gate);
  if (gate.enabled(2)) criterion2_round_trip(gate);
  if (gate.enabled(3)) criterion3_permutations(gate);
  if (gate.enabled(4)) criterion4_loss(gate);
  if (gate.enabled(5)) criterion5_freeze(gate);
  if (gate.enabled(6)) criterion6_fusion_identity(gate);
  if (gate.enabled(7)) criterion7_metric_oracle(gate);

  const bool needs_bench = gate.enabled(8) || gate.enabled(9) ||
                           gate.enabled(10) || gate.enabled(11);
  if (needs_bench) {
    const Bench bench = make_bench(workspace);
    if (gate.enabled(8)) criterion8_learnability(gate, bench, workspace);
    if (gate.enabled(9)) criterion9_fusion_direction(gate, bench, workspace);
    if (gate.enabled(10)) criterion10_class_weighting(gate, bench, workspace);
    if (gate.enabled(11)) criterion11_dataset_protocol(gate, bench);
  }
  if (gate.enabled(12)) criterion12_tables(gate, workspace);

  std::printf("%d criterion(s) failed; total %.1f min\n", gate.failures,
              seconds_since(t0) / 60.0);
  return gate.failures == 0 ? 0 : 1;
}
