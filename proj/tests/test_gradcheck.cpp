#include <doctest.h>

#include <cmath>

#include "octplaque/loss.hpp"
#include "octplaque/model.hpp"

using namespace octplaque;

namespace {

// Double precision end-to-end gradient check: backprop through the graph
// against central finite differences on randomly chosen parameter entries.

struct Problem {
  ModelT<double> model;
  Tensor<double> cart, polar;
  std::vector<int> labels;
  std::vector<double> weights;
};

double loss_of(Problem& p) {
  const Tensor<double>* out =
      p.model.two_path ? &p.model.graph.forward(p.model.ws, {&p.cart, &p.polar},
                                                true, nullptr)
                       : &p.model.graph.forward(p.model.ws, {&p.cart}, true,
                                                nullptr);
  MatrixX<double> logits = out->as_matrix(out->n, out->c);
  return weighted_cross_entropy(logits, p.labels, p.weights).loss;
}

void backward_loss(Problem& p) {
  const Tensor<double>* out =
      p.model.two_path ? &p.model.graph.forward(p.model.ws, {&p.cart, &p.polar},
                                                true, nullptr)
                       : &p.model.graph.forward(p.model.ws, {&p.cart}, true,
                                                nullptr);
  MatrixX<double> logits = out->as_matrix(out->n, out->c);
  const auto res = weighted_cross_entropy(logits, p.labels, p.weights);
  Tensor<double> d(res.dlogits.rows(), 1, 1, res.dlogits.cols());
  std::copy(res.dlogits.data(), res.dlogits.data() + res.dlogits.size(),
            d.data());
  p.model.ws.zero_param_grads();
  p.model.graph.backward(p.model.ws, d);
}

Problem make_problem(ModelT<double> model, RngStream& rng) {
  Problem p{std::move(model), {}, {}, {}, {}};
  const Eigen::Index s = p.model.cfg.input_size;
  p.cart.resize(2, s, s, 1);
  p.polar.resize(2, s, s, 1);
  for (Eigen::Index i = 0; i < p.cart.size(); ++i) p.cart.v[i] = rng.next_double();
  for (Eigen::Index i = 0; i < p.polar.size(); ++i) p.polar.v[i] = rng.next_double();
  p.labels = {static_cast<int>(rng.next_int(p.model.n_classes)),
              static_cast<int>(rng.next_int(p.model.n_classes))};
  for (int c = 0; c < p.model.n_classes; ++c)
    p.weights.push_back(0.5 + rng.next_double());
  return p;
}

/// Checks `n_checks` randomly chosen parameter entries; returns the largest
/// relative error seen.
double check_gradients(Problem& p, int n_checks, RngStream& rng) {
  backward_loss(p);
  std::vector<ArrayX<double>> grads = p.model.ws.param_grads;

  double worst = 0.0;
  auto& params = p.model.graph.params();
  for (int chk = 0; chk < n_checks; ++chk) {
    const std::size_t pi =
        static_cast<std::size_t>(rng.next_int(static_cast<long long>(params.size())));
    const Eigen::Index ei = rng.next_int(params[pi].value.size());
    const double w0 = params[pi].value[ei];
    const double h = 1e-5 * (1.0 + std::abs(w0));

    params[pi].value[ei] = w0 + h;
    const double lp = loss_of(p);
    params[pi].value[ei] = w0 - h;
    const double lm = loss_of(p);
    params[pi].value[ei] = w0;

    const double fd = (lp - lm) / (2.0 * h);
    const double an = grads[pi][ei];
    const double denom = std::max({std::abs(fd), std::abs(an), 1e-8});
    worst = std::max(worst, std::abs(fd - an) / denom);
  }
  return worst;
}

BackboneConfig tiny(Family family) {
  BackboneConfig cfg;
  cfg.family = family;
  cfg.stage_blocks = {1, 1, 1, 1};
  cfg.base_width = 8;
  cfg.growth_rate = 4;
  cfg.dropout_keep = 1.0;  // keep the loss deterministic for the check
  cfg.input_size = family == Family::dense ? 32 : 16;
  return cfg;
}

}  // namespace

TEST_CASE("residual backprop matches finite differences") {
  RngStream rng(101);
  ModelT<double> model = build_single_path<double>(tiny(Family::residual), 3);
  model.init_params(rng);
  Problem p = make_problem(std::move(model), rng);
  CHECK(check_gradients(p, 20, rng) < 1e-3);
}

TEST_CASE("dense backprop matches finite differences") {
  RngStream rng(102);
  ModelT<double> model = build_single_path<double>(tiny(Family::dense), 2);
  model.init_params(rng);
  Problem p = make_problem(std::move(model), rng);
  CHECK(check_gradients(p, 15, rng) < 1e-3);
}

TEST_CASE("two-path backprop matches finite differences") {
  RngStream rng(103);
  for (int cut : {2, 3, 4}) {
    FusionConfig fusion;
    fusion.concat_point = cut;
    ModelT<double> model =
        build_two_path<double>(tiny(Family::residual), fusion, 2);
    model.init_params(rng);
    Problem p = make_problem(std::move(model), rng);
    CHECK(check_gradients(p, 12, rng) < 1e-3);
  }
}

TEST_CASE("two-path dense backprop matches finite differences") {
  RngStream rng(104);
  FusionConfig fusion;
  fusion.concat_point = 3;
  ModelT<double> model = build_two_path<double>(tiny(Family::dense), fusion, 2);
  model.init_params(rng);
  Problem p = make_problem(std::move(model), rng);
  CHECK(check_gradients(p, 12, rng) < 1e-3);
}

TEST_CASE("dropout scales gradients by the surviving mask") {
  // With a fixed mask (replayed stream), d(loss)/d(input) through dropout
  // must equal mask-weighted pass-through.
  Tensor<double> x(1, 1, 1, 64);
  RngStream rng(105);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.v[i] = rng.next_double();

  Tensor<double> y;
  ArrayX<double> mask;
  RngStream mask_rng(7);
  dropout_forward(x, 0.5, true, mask_rng, y, mask);

  Tensor<double> dy(1, 1, 1, 64);
  dy.v.setConstant(1.0);
  Tensor<double> dx(1, 1, 1, 64);
  dx.setZero();
  dropout_backward_add(mask, dy, dx);
  for (Eigen::Index i = 0; i < 64; ++i) CHECK(dx.v[i] == mask[i]);
}
