#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "octplaque/run_config.hpp"
#include "octplaque/tomlmini.hpp"
#include "octplaque/weight_store.hpp"

using namespace octplaque;
namespace fs = std::filesystem;

namespace {

BackboneConfig tiny_cfg() {
  BackboneConfig cfg;
  cfg.family = Family::residual;
  cfg.stage_blocks = {1, 1, 1, 1};
  cfg.base_width = 8;
  cfg.dropout_keep = 1.0;
  cfg.input_size = 16;
  return cfg;
}

Tensor<float> random_input(Eigen::Index n, Eigen::Index s, RngStream& rng) {
  Tensor<float> x(n, s, s, 1);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.v[i] = rng.next_float();
  return x;
}

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("octplaque_store_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("weight store round trip reproduces forward outputs exactly") {
  Model model = build_single_path<float>(tiny_cfg(), 2);
  RngStream rng(21);
  model.init_params(rng);
  Tensor<float> x = random_input(2, 16, rng);
  const MatrixX<float> before = MatrixX<float>(model.forward(x).as_matrix(2, 2));

  const fs::path dir = temp_dir("roundtrip");
  WeightStore::from_model(model, "proxy-pretrain").save(dir);
  const WeightStore loaded = WeightStore::load(dir);
  CHECK(loaded.source_tag == "proxy-pretrain");

  Model rebuilt = model_from_store(loaded);
  CHECK(rebuilt.source_tag == "proxy-pretrain");
  const MatrixX<float> after = MatrixX<float>(rebuilt.forward(x).as_matrix(2, 2));
  CHECK((before.array() == after.array()).all());

  // Blobs are raw float32: byte size must be 4x the element count.
  for (const auto& p : model.graph.params()) {
    const fs::path blob = dir / (p.name + ".bin");
    REQUIRE(fs::exists(blob));
    CHECK(fs::file_size(blob) == static_cast<std::uintmax_t>(p.size()) * 4);
  }
  fs::remove_all(dir);
}

TEST_CASE("strict loading reports every offending path") {
  Model model = build_single_path<float>(tiny_cfg(), 2);
  RngStream rng(22);
  model.init_params(rng);
  WeightStore store = WeightStore::from_model(model, "external");
  store.params.at("stem.conv.weight").shape[3] += 1;  // corrupt one shape
  store.params.erase("head.fc.bias");

  try {
    load_weights(model, store, /*strict=*/true);
    FAIL("expected load_weights to throw");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("stem.conv.weight") != std::string::npos);
    CHECK(msg.find("head.fc.bias") != std::string::npos);
  }
}

TEST_CASE("fusion compression init duplicates the kernel along its input") {
  WeightStore::Entry w;
  w.shape = {1, 1, 2, 1};
  w.data = {3.0f, 5.0f};  // [[a],[b]]
  const WeightStore::Entry out = init_fusion_compression(w);
  CHECK(out.shape == Shape4{1, 1, 4, 1});
  CHECK(out.data == std::vector<float>{3.0f, 5.0f, 3.0f, 5.0f});

  WeightStore::Entry bad;
  bad.shape = {3, 3, 2, 1};
  bad.data.assign(18, 0.0f);
  CHECK_THROWS_AS(init_fusion_compression(bad), std::invalid_argument);
}

TEST_CASE("sliced kernel doubles the linear response on duplicated features") {
  RngStream rng(23);
  const Eigen::Index f1 = 6, f2 = 4, pixels = 10;
  WeightStore::Entry w;
  w.shape = {1, 1, f1, f2};
  for (Eigen::Index i = 0; i < f1 * f2; ++i)
    w.data.push_back(static_cast<float>(rng.next_gaussian()));
  const WeightStore::Entry sliced = init_fusion_compression(w);

  MatrixX<float> x(pixels, f1);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    x.data()[i] = static_cast<float>(rng.next_gaussian());
  MatrixX<float> xx(pixels, 2 * f1);
  xx << x, x;

  Eigen::Map<const MatrixX<float>> wm(w.data.data(), f1, f2);
  Eigen::Map<const MatrixX<float>> sm(sliced.data.data(), 2 * f1, f2);
  ArrayX<float> bias(f2);
  for (Eigen::Index i = 0; i < f2; ++i)
    bias[i] = static_cast<float>(rng.next_gaussian());

  const MatrixX<float> single = (x * wm).rowwise() + bias.transpose().matrix();
  const MatrixX<float> fused = (xx * sm).rowwise() + bias.transpose().matrix();
  // 2*W*x + b, to float tolerance.
  const MatrixX<float> expect =
      (2.0f * (x * wm)).rowwise() + bias.transpose().matrix();
  CHECK(((fused - expect).cwiseAbs().maxCoeff()) < 1e-5f);
  CHECK(((fused - single).cwiseAbs().maxCoeff()) > 0.0f);
}

TEST_CASE("lenient load reuses the full prefix of a two-path model") {
  BackboneConfig cfg = tiny_cfg();
  Model pretrained = build_single_path<float>(cfg, 3);
  RngStream rng(24);
  pretrained.init_params(rng);
  const WeightStore store = WeightStore::from_model(pretrained, "proxy-pretrain");

  FusionConfig fusion;
  fusion.concat_point = 3;
  Model fused = build_two_path<float>(cfg, fusion, 3);
  RngStream rng2(25);
  fused.init_params(rng2);
  load_weights(fused, store, /*strict=*/false);
  CHECK(fused.source_tag == "proxy-pretrain");

  std::size_t prefix_params = 0, matched = 0;
  for (const auto& p : fused.graph.params()) {
    const bool is_prefix = p.name.rfind("cart.", 0) == 0 ||
                           p.name.rfind("polar.", 0) == 0;
    if (!is_prefix) continue;
    ++prefix_params;
    const std::string canonical = p.name.substr(p.name.find('.') + 1);
    const auto& entry = store.params.at(canonical);
    bool equal = entry.shape == p.shape;
    if (equal)
      for (Eigen::Index i = 0; i < p.value.size(); ++i)
        if (p.value[i] != entry.data[static_cast<std::size_t>(i)]) {
          equal = false;
          break;
        }
    if (equal) ++matched;
  }
  CHECK(prefix_params > 0);
  CHECK(matched == prefix_params);  // 100% of the prefix transfers

  // The fusion entry kernels are the sliced duplication of the store's.
  for (const auto& name : fused.fusion_weight_names) {
    const auto* p = fused.graph.find_param(name);
    const auto sliced = init_fusion_compression(store.params.at(name));
    REQUIRE(p->shape == sliced.shape);
    for (Eigen::Index i = 0; i < p->value.size(); ++i)
      CHECK(p->value[i] == sliced.data[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("without sliced init the fusion kernels keep their random values") {
  BackboneConfig cfg = tiny_cfg();
  Model pretrained = build_single_path<float>(cfg, 2);
  RngStream rng(26);
  pretrained.init_params(rng);
  const WeightStore store = WeightStore::from_model(pretrained, "proxy-pretrain");

  FusionConfig fusion;
  fusion.concat_point = 2;
  fusion.sliced_init = false;
  Model fused = build_two_path<float>(cfg, fusion, 2);
  RngStream rng2(27);
  fused.init_params(rng2);
  std::vector<ArrayX<float>> random_fusion;
  for (const auto& name : fused.fusion_weight_names)
    random_fusion.push_back(fused.graph.find_param(name)->value);

  load_weights(fused, store, /*strict=*/false);
  for (std::size_t i = 0; i < fused.fusion_weight_names.size(); ++i) {
    const auto* p = fused.graph.find_param(fused.fusion_weight_names[i]);
    CHECK((p->value == random_fusion[i]).all());
  }
}

TEST_CASE("lenient load averages 3-channel first layers for grayscale") {
  BackboneConfig cfg = tiny_cfg();
  Model model = build_single_path<float>(cfg, 2);
  RngStream rng(28);
  model.init_params(rng);
  WeightStore store = WeightStore::from_model(model, "external");

  // Widen the stored stem to 3 input channels, as a natural-image
  // checkpoint would have.
  auto& stem = store.params.at("stem.conv.weight");
  const Eigen::Index taps = stem.shape[0] * stem.shape[1];
  const Eigen::Index cout = stem.shape[3];
  std::vector<float> rgb(static_cast<std::size_t>(taps * 3 * cout));
  RngStream wrng(29);
  for (auto& v : rgb) v = static_cast<float>(wrng.next_gaussian());
  stem.shape = {stem.shape[0], stem.shape[1], 3, cout};
  stem.data = rgb;

  load_weights(model, store, /*strict=*/false);
  const auto* p = model.graph.find_param("stem.conv.weight");
  for (Eigen::Index t = 0; t < taps; ++t)
    for (Eigen::Index co = 0; co < cout; ++co) {
      const float mean = (rgb[static_cast<std::size_t>((t * 3 + 0) * cout + co)] +
                          rgb[static_cast<std::size_t>((t * 3 + 1) * cout + co)] +
                          rgb[static_cast<std::size_t>((t * 3 + 2) * cout + co)]) /
                         3.0f;
      CHECK(p->value[t * cout + co] == doctest::Approx(mean));
    }
}

TEST_CASE("toml subset round trips and rejects malformed input") {
  const std::string text = R"(# run configuration
seed = 42
name = "desk run"

[dataset]
patients = 24
class_mix = [0.5, 0.4, 0.1]
paper_scale = false

[train]
lr = 1e-4
)";
  const auto doc = tomlmini::parse(text);
  CHECK(doc.at("seed").as_int() == 42);
  CHECK(doc.at("name").as_string() == "desk run");
  CHECK(doc.at("dataset.patients").as_int() == 24);
  CHECK(doc.at("dataset.class_mix").as_array()[1].as_number() ==
        doctest::Approx(0.4));
  CHECK(doc.at("dataset.paper_scale").as_bool() == false);
  CHECK(doc.at("train.lr").as_number() == doctest::Approx(1e-4));

  const auto again = tomlmini::parse(tomlmini::write(doc));
  CHECK(again.size() == doc.size());
  CHECK(again.at("name").as_string() == "desk run");
  CHECK(again.at("train.lr").as_number() == doctest::Approx(1e-4));

  CHECK_THROWS_WITH_AS(tomlmini::parse("key 42\n"),
                       doctest::Contains("line 1"), std::runtime_error);
  CHECK_THROWS_WITH_AS(tomlmini::parse("a = 1\nb = [1, \n"),
                       doctest::Contains("line 2"), std::runtime_error);
  CHECK_THROWS_AS(tomlmini::parse("a = 1\na = 2\n"), std::runtime_error);
}

TEST_CASE("run config rejects unknown keys and bad values") {
  CHECK_THROWS_WITH_AS(
      RunConfig::from_document(tomlmini::parse("typo_key = 1\n")),
      doctest::Contains("unknown config key"), ConfigError);
  CHECK_THROWS_AS(
      RunConfig::from_document(tomlmini::parse("[augment]\ncrop = 80\nresize = 64\n")),
      ConfigError);
  CHECK_THROWS_AS(
      RunConfig::from_document(tomlmini::parse("[model]\nfreeze = \"p3\"\n")),
      ConfigError);
  CHECK_THROWS_AS(RunConfig::from_document(
                      tomlmini::parse("[dataset]\nclass_mix = [0.9, 0.4, 0.1]\n")),
                  ConfigError);
}

TEST_CASE("run config snapshot round trips to the same document") {
  RunConfig cfg;
  cfg.seed = 99;
  cfg.name = "snapshot";
  cfg.multiclass = true;
  cfg.representation = InputMode::two_path;
  cfg.fusion.concat_point = 2;
  cfg.train.epochs = 17;
  cfg.validate();

  const fs::path dir = temp_dir("cfg");
  cfg.save(dir / "config.toml");
  const RunConfig back = RunConfig::from_file(dir / "config.toml");
  CHECK(back.to_document() == cfg.to_document());
  CHECK(back.seed == 99);
  CHECK(back.multiclass);
  CHECK(back.representation == InputMode::two_path);
  CHECK(back.fusion.concat_point == 2);
  CHECK(back.train.epochs == 17);
  fs::remove_all(dir);
}

TEST_CASE("freeze points demand a pretrained store") {
  tomlmini::Document doc = tomlmini::parse("[model]\nfreeze = \"p1\"\n");
  CHECK_THROWS_AS(RunConfig::from_document(doc), ConfigError);
  doc = tomlmini::parse(
      "[model]\nfreeze = \"p1\"\npretrained = \"/tmp/store\"\n");
  const RunConfig cfg = RunConfig::from_document(doc);
  CHECK(cfg.freeze_spec().mode == FreezeSpec::Mode::freeze_at);
  CHECK(cfg.freeze_spec().retrain_point == 1);
}
