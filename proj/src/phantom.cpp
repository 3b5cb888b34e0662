#include "octplaque/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "octplaque/geometry.hpp"
#include "octplaque/png_io.hpp"

namespace octplaque {

namespace {

// Appearance constants. Depth-like values are fractions of the depth extent
// D, angles are in radians unless noted.
//
//   background        0.030   noise floor outside tissue
//   lumen interior    0.020   blood-flushed lumen
//   wall peak         0.880   backscatter at the lumen boundary
//   cap thickness     0.030   bright intima band beyond the boundary
//   decay length      0.170   healthy wall signal decay
//   lumen base        0.16 .. 0.30  per-patient mean lumen radius
//   harmonic amp      0.035   lumen shape harmonics, orders 1..3
//   sector width      60 .. 110 deg plaque sector extent
//   calc offset       0.035   pocket start beyond the boundary
//   calc depth        0.10 .. 0.16 pocket radial extent
//   calc interior     0.14    multiplier inside the pocket
//   calc border       0.95    rim intensity, sharply delimited
//   calc border width 0.025   rim shell thickness
//   lipid decay fctr  0.28    decay-length multiplier in the sector
//   lipid edge taper  14 deg  smooth angular falloff of the shadowing
//   speckle sigma     0.13    multiplicative speckle
//   guidewire width   7 deg   zeroed wedge
//   haze amplitude    0.14    residual-blood haze in the lumen
constexpr double kBackground = 0.030;
constexpr double kLumenIntensity = 0.020;
constexpr double kWallPeak = 0.880;
constexpr double kCapThickness = 0.030;
constexpr double kDecayLength = 0.170;
constexpr double kLumenBaseLo = 0.16;
constexpr double kLumenBaseHi = 0.30;
constexpr double kHarmonicAmp = 0.035;
constexpr double kSectorWidthLoDeg = 60.0;
constexpr double kSectorWidthHiDeg = 110.0;
constexpr double kCalcOffset = 0.035;
constexpr double kCalcDepthLo = 0.10;
constexpr double kCalcDepthHi = 0.16;
constexpr double kCalcInterior = 0.14;
constexpr double kCalcBorder = 0.95;
constexpr double kCalcBorderWidth = 0.025;
constexpr double kLipidDecayFactor = 0.28;
constexpr double kLipidEdgeTaperDeg = 14.0;
constexpr double kSpeckleSigma = 0.13;
constexpr double kGuidewireWidthDeg = 7.0;
constexpr double kHazeAmplitude = 0.14;
constexpr double kSectorStrengthLo = 0.72;  // weakest rendered plaque sector
constexpr int kRunLengthLo = 5;             // frames per plaque run
constexpr int kRunLengthHi = 12;

constexpr double kDegToRad = kTwoPi / 360.0;

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  return a < 0 ? a + kTwoPi : a;
}

/// Signed circular distance from `a` to the sector center, in radians.
double angle_dist(double a, double center) {
  double d = wrap_angle(a - center);
  if (d > kTwoPi / 2) d -= kTwoPi;
  return d;
}

struct FrameRecipe {
  // lumen shape
  double lumen_base = 0.22;                  // fraction of D
  std::array<double, 3> harmonic_amp{};      // fraction of D
  std::array<double, 3> harmonic_phase{};    // radians
  // plaque sector
  Label label = Label::no_plaque;
  double sector_center = 0.0;  // radians
  double sector_half = 0.0;    // radians
  double sector_strength = 1.0;
  double calc_depth = 0.12;  // fraction of D
  // artifacts
  bool guidewire = false;
  double guidewire_center = 0.0;
  bool haze = false;
};

double lumen_radius(const FrameRecipe& r, double theta, int depth) {
  double v = r.lumen_base;
  for (int k = 0; k < 3; ++k)
    v += r.harmonic_amp[k] * std::cos((k + 1) * theta + r.harmonic_phase[k]);
  return std::clamp(v, 0.08, 0.45) * depth;
}

/// Render one B-scan. Row-major over angles so each A-scan is one pass.
PolarImage render_frame(const FrameRecipe& recipe, int n_angles, int n_depth,
                        RngStream& rng) {
  PolarImage img;
  img.data.resize(n_angles, n_depth);
  const double depth_d = static_cast<double>(n_depth);

  const double taper = kLipidEdgeTaperDeg * kDegToRad;
  const double gw_half = 0.5 * kGuidewireWidthDeg * kDegToRad;

  for (int a = 0; a < n_angles; ++a) {
    const double theta = kTwoPi * a / n_angles;
    const double r_l = lumen_radius(recipe, theta, n_depth);

    // Sector membership for this A-scan.
    const double sector_d = std::abs(angle_dist(theta, recipe.sector_center));
    const bool in_sector =
        recipe.label != Label::no_plaque && sector_d <= recipe.sector_half;
    // Lipid shadowing fades in smoothly at the sector edges.
    double lipid_mix = 0.0;
    if (recipe.label == Label::lipid_fibrous && in_sector) {
      const double edge = recipe.sector_half - sector_d;
      lipid_mix = std::min(1.0, edge / taper) * recipe.sector_strength;
    }
    double decay = kDecayLength * depth_d;
    if (lipid_mix > 0.0)
      decay *= 1.0 + lipid_mix * (kLipidDecayFactor - 1.0);

    const bool calc_scan = recipe.label == Label::calcified && in_sector;
    const double pocket_lo = r_l + kCalcOffset * depth_d;
    const double pocket_hi = pocket_lo + recipe.calc_depth * depth_d;
    const double border = kCalcBorderWidth * depth_d;
    // Sharp angular rim: A-scans within one border width of the sector edge.
    const bool calc_edge_scan =
        calc_scan && recipe.sector_half - sector_d <= 1.5 * kDegToRad;

    const bool gw_scan =
        recipe.guidewire &&
        std::abs(angle_dist(theta, recipe.guidewire_center)) <= gw_half;
    const double gw_start = 0.75 * r_l;

    for (int d = 0; d < n_depth; ++d) {
      const double dd = static_cast<double>(d);
      double v;
      if (dd < r_l) {
        v = kLumenIntensity + kBackground * 0.5;
        if (recipe.haze)
          v += kHazeAmplitude * std::exp(-dd / (0.30 * depth_d));
      } else {
        const double t = dd - r_l;
        v = kWallPeak * std::exp(-t / decay) + kBackground;
        if (t < kCapThickness * depth_d) v = std::max(v, 0.92);
        if (calc_scan && dd >= pocket_lo && dd <= pocket_hi) {
          const bool rim = dd - pocket_lo <= border ||
                           pocket_hi - dd <= border || calc_edge_scan;
          if (rim) {
            v = std::max(v, kCalcBorder * recipe.sector_strength);
          } else {
            const double inside =
                1.0 + recipe.sector_strength * (kCalcInterior - 1.0);
            v *= inside;
          }
        }
      }
      if (gw_scan && dd > gw_start) {
        // Bright reflex at the wire surface, black shadow behind it.
        v = dd - gw_start < 0.015 * depth_d ? 0.95 : v * 0.05 + kBackground;
      }
      const double speckle = 1.0 + kSpeckleSigma * rng.next_gaussian();
      v *= std::max(0.0, speckle);
      img.data(a, d) = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return img;
}

/// Split the pullback into runs of consecutive frames and hand each run a
/// class, tracking largest-remainder quotas so the empirical mix stays close
/// to `class_mix`.
std::vector<FrameRecipe> plan_pullback(const PhantomParams& params,
                                       RngStream& rng) {
  const int n = params.frames_per_pullback;

  std::array<double, 3> want{};
  for (int c = 0; c < 3; ++c) want[c] = params.class_mix[c] * n;
  std::array<int, 3> assigned{};

  struct Run {
    int begin, length;
    Label label;
  };
  std::vector<Run> runs;
  int at = 0;
  while (at < n) {
    // Class with the largest unmet quota wins the run; the run length is
    // capped near that quota so small classes are not crowded out.
    int best = 0;
    double best_deficit = -1e18;
    for (int c = 0; c < 3; ++c) {
      const double deficit = want[c] - assigned[c];
      if (deficit > best_deficit + 1e-12) {
        best_deficit = deficit;
        best = c;
      }
    }
    int len = static_cast<int>(rng.next_int(kRunLengthLo, kRunLengthHi));
    len = std::min(len, std::max(2, static_cast<int>(std::ceil(best_deficit))));
    len = std::min(len, n - at);
    runs.push_back({at, len, static_cast<Label>(best)});
    assigned[best] += len;
    at += len;
  }
  rng.shuffle(runs);

  // Per-pullback anatomy, drifting slowly from frame to frame.
  FrameRecipe base;
  base.lumen_base = rng.next_uniform(kLumenBaseLo, kLumenBaseHi);
  for (int k = 0; k < 3; ++k) {
    base.harmonic_amp[k] = rng.next_uniform(0.2, 1.0) * kHarmonicAmp;
    base.harmonic_phase[k] = rng.next_uniform(0.0, kTwoPi);
  }
  const bool guidewire = rng.next_double() < params.artifact_rate;
  const double gw_center = rng.next_uniform(0.0, kTwoPi);

  std::vector<FrameRecipe> recipes(n, base);
  for (const auto& run : runs) {
    FrameRecipe sector;
    sector.label = run.label;
    if (run.label != Label::no_plaque) {
      sector.sector_center = rng.next_uniform(0.0, kTwoPi);
      sector.sector_half = 0.5 * kDegToRad *
                           rng.next_uniform(kSectorWidthLoDeg, kSectorWidthHiDeg);
      sector.sector_strength = rng.next_uniform(kSectorStrengthLo, 1.0);
      sector.calc_depth = rng.next_uniform(kCalcDepthLo, kCalcDepthHi);
    }
    for (int i = run.begin; i < run.begin + run.length; ++i) {
      recipes[i].label = sector.label;
      recipes[i].sector_center = sector.sector_center;
      recipes[i].sector_half = sector.sector_half;
      recipes[i].sector_strength = sector.sector_strength;
      recipes[i].calc_depth = sector.calc_depth;
    }
  }
  for (int i = 0; i < n; ++i) {
    FrameRecipe& r = recipes[i];
    r.lumen_base =
        std::clamp(base.lumen_base + 0.010 * rng.next_gaussian(),
                   kLumenBaseLo, kLumenBaseHi);
    for (int k = 0; k < 3; ++k)
      r.harmonic_phase[k] = base.harmonic_phase[k] + 0.02 * i;
    r.sector_center += 0.01 * rng.next_gaussian();
    r.guidewire = guidewire;
    r.guidewire_center = gw_center + 0.015 * i;
    r.haze = rng.next_double() < params.artifact_rate;
  }
  return recipes;
}

Label flip_label(Label label, RngStream& rng) {
  const int other = static_cast<int>(rng.next_int(2));
  int v = static_cast<int>(label);
  v = (v + 1 + other) % 3;
  return static_cast<Label>(v);
}

}  // namespace

PhantomParams PhantomParams::desk() { return PhantomParams{}; }

PhantomParams PhantomParams::paper_scale() {
  PhantomParams p;
  p.n_patients = 49;
  p.frames_per_pullback = 82;
  p.polar_angles = 496;
  p.polar_depth = 960;
  return p;
}

void PhantomParams::validate() const {
  if (n_patients < 1 || frames_per_pullback < 1)
    throw std::invalid_argument("phantom: need at least one patient and frame");
  if (polar_angles < 4 || polar_depth < 4)
    throw std::invalid_argument("phantom: degenerate polar shape");
  double sum = 0;
  for (double p : class_mix) {
    if (p < 0.0 || p > 1.0)
      throw std::invalid_argument("phantom: class mix entries must be in [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("phantom: class mix must sum to 1");
  if (artifact_rate < 0.0 || artifact_rate > 1.0 || label_noise_rate < 0.0 ||
      label_noise_rate > 1.0)
    throw std::invalid_argument("phantom: rates must be probabilities");
}

nlohmann::json PhantomParams::to_json() const {
  return nlohmann::json{{"n_patients", n_patients},
                        {"frames_per_pullback", frames_per_pullback},
                        {"polar_angles", polar_angles},
                        {"polar_depth", polar_depth},
                        {"class_mix", class_mix},
                        {"artifact_rate", artifact_rate},
                        {"label_noise_rate", label_noise_rate},
                        {"seed", seed}};
}

PhantomParams PhantomParams::from_json(const nlohmann::json& j) {
  PhantomParams p;
  p.n_patients = j.at("n_patients").get<int>();
  p.frames_per_pullback = j.at("frames_per_pullback").get<int>();
  p.polar_angles = j.at("polar_angles").get<int>();
  p.polar_depth = j.at("polar_depth").get<int>();
  p.class_mix = j.at("class_mix").get<std::array<double, 3>>();
  p.artifact_rate = j.at("artifact_rate").get<double>();
  p.label_noise_rate = j.at("label_noise_rate").get<double>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.validate();
  return p;
}

std::vector<LabeledFrame> generate_pullback(const PhantomParams& params,
                                            const std::string& patient_id,
                                            const std::filesystem::path& root,
                                            RngStream rng) {
  params.validate();
  const std::string pullback_id = "pb00";
  const std::filesystem::path dir = root / patient_id / pullback_id;
  std::filesystem::create_directories(dir);

  auto recipes = plan_pullback(params, rng);
  std::vector<LabeledFrame> frames;
  frames.reserve(recipes.size());
  for (int i = 0; i < static_cast<int>(recipes.size()); ++i) {
    const PolarImage img =
        render_frame(recipes[i], params.polar_angles, params.polar_depth, rng);
    char name[32];
    std::snprintf(name, sizeof(name), "%05d.png", i);
    save_png16(dir / name, img.data);

    LabeledFrame f;
    f.patient_id = patient_id;
    f.pullback_id = pullback_id;
    f.frame_index = i;
    f.polar_path = patient_id + "/" + pullback_id + "/" + name;
    f.label = recipes[i].label;
    if (params.label_noise_rate > 0.0 &&
        rng.next_double() < params.label_noise_rate)
      f.label = flip_label(f.label, rng);
    frames.push_back(std::move(f));
  }
  return frames;
}

DatasetManifest generate_dataset(const PhantomParams& params,
                                 const std::filesystem::path& root) {
  params.validate();
  DatasetManifest manifest;
  manifest.provenance = params.to_json();
  const RngStream dataset_rng(params.seed);
  for (int p = 0; p < params.n_patients; ++p) {
    char pid[32];
    std::snprintf(pid, sizeof(pid), "patient%03d", p);
    auto frames = generate_pullback(params, pid, root,
                                    dataset_rng.split(static_cast<std::uint64_t>(p)));
    manifest.frames.insert(manifest.frames.end(), frames.begin(), frames.end());
  }
  save_manifest(manifest, root / "manifest.jsonl");
  return manifest;
}

std::vector<ProxyFrame> generate_proxy_frames(const PhantomParams& params,
                                              int n_frames, RngStream rng) {
  params.validate();
  if (n_frames < kProxyClasses)
    throw std::invalid_argument("proxy set needs at least one frame per class");

  std::vector<int> classes(n_frames);
  for (int i = 0; i < n_frames; ++i) classes[i] = i % kProxyClasses;
  rng.shuffle(classes);

  // Reuse the pullback planner for plausible anatomy; artifacts get forced
  // to the requested class per frame.
  PhantomParams plan_params = params;
  plan_params.frames_per_pullback = n_frames;
  auto recipes = plan_pullback(plan_params, rng);

  std::vector<ProxyFrame> out;
  out.reserve(n_frames);
  for (int i = 0; i < n_frames; ++i) {
    FrameRecipe r = recipes[i];
    r.guidewire = classes[i] == 1;
    if (r.guidewire) r.guidewire_center = rng.next_uniform(0.0, kTwoPi);
    r.haze = classes[i] == 2;
    ProxyFrame f;
    f.artifact_class = classes[i];
    f.polar = render_frame(r, params.polar_angles, params.polar_depth, rng);
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace octplaque
