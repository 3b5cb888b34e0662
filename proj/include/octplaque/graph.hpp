#pragma once

#include <string>
#include <vector>

#include "octplaque/nn_ops.hpp"

namespace octplaque {

/// Named parameter with a [kh, kw, cin, cout] logical shape. Bias tensors use
/// [1, 1, 1, cout]. `group` tags the network stage for freeze-point logic
/// (0 = stem, 1..4 = stages/blocks, 5 = head).
template <typename T>
struct Param {
  std::string name;
  Shape4 shape{1, 1, 1, 1};
  ArrayX<T> value;
  bool trainable = true;
  int group = -1;

  Eigen::Index size() const { return shape_size(shape); }

  Eigen::Map<MatrixX<T>> as_matrix() {
    return Eigen::Map<MatrixX<T>>(value.data(), shape[0] * shape[1] * shape[2],
                                  shape[3]);
  }
  Eigen::Map<const MatrixX<T>> as_matrix() const {
    return Eigen::Map<const MatrixX<T>>(value.data(),
                                        shape[0] * shape[1] * shape[2],
                                        shape[3]);
  }
};

/// Per-call state for one forward/backward pass: activations, activation
/// gradients, parameter gradients and layer caches. A graph is read-only
/// during forward/backward, so concurrent passes just use separate
/// workspaces.
template <typename T>
struct Workspace {
  std::vector<Tensor<T>> acts;
  std::vector<Tensor<T>> grads;
  std::vector<ArrayX<T>> param_grads;

  struct Cache {
    MatrixX<T> cols;               // conv patches / dense input copy
    ArrayX<Eigen::Index> indices;  // maxpool argmax
    ArrayX<T> mask;                // dropout
  };
  std::vector<Cache> caches;

  void zero_param_grads() {
    for (auto& g : param_grads) g.setZero();
  }
};

enum class OpKind {
  input,
  conv,
  relu,
  maxpool,
  avgpool2,
  gap,
  dropout,
  dense,
  add,
  concat
};

/// Static computation DAG in topological order. Build once, then run
/// forward/backward against a Workspace.
template <typename T>
class Graph {
 public:
  struct Op {
    OpKind kind;
    int in0 = -1, in1 = -1;
    int wparam = -1, bparam = -1;
    ConvGeom geom;
    double keep = 1.0;
    Eigen::Index out_channels = 0;
  };

  int add_input(Eigen::Index channels) {
    Op op;
    op.kind = OpKind::input;
    op.out_channels = channels;
    ++n_inputs_;
    return push(op);
  }

  void set_group(int group) { group_ = group; }

  int conv(int in, const std::string& name, int kernel, int stride, int pad,
           Eigen::Index out_channels) {
    Op op;
    op.kind = OpKind::conv;
    op.in0 = in;
    op.geom = ConvGeom{kernel, stride, pad};
    op.out_channels = out_channels;
    const Eigen::Index cin = ops_[in].out_channels;
    op.wparam = add_param(name + ".weight",
                          {kernel, kernel, cin, out_channels});
    op.bparam = add_param(name + ".bias", {1, 1, 1, out_channels});
    return push(op);
  }

  int relu(int in) { return push_unary(OpKind::relu, in); }

  int maxpool(int in, int kernel, int stride, int pad) {
    Op op;
    op.kind = OpKind::maxpool;
    op.in0 = in;
    op.geom = ConvGeom{kernel, stride, pad};
    op.out_channels = ops_[in].out_channels;
    return push(op);
  }

  int avgpool2(int in) { return push_unary(OpKind::avgpool2, in); }
  int global_avg_pool(int in) { return push_unary(OpKind::gap, in); }

  int dropout(int in, double keep) {
    Op op;
    op.kind = OpKind::dropout;
    op.in0 = in;
    op.keep = keep;
    op.out_channels = ops_[in].out_channels;
    return push(op);
  }

  int dense(int in, const std::string& name, Eigen::Index out) {
    Op op;
    op.kind = OpKind::dense;
    op.in0 = in;
    op.out_channels = out;
    const Eigen::Index cin = ops_[in].out_channels;
    op.wparam = add_param(name + ".weight", {1, 1, cin, out});
    op.bparam = add_param(name + ".bias", {1, 1, 1, out});
    return push(op);
  }

  int add(int a, int b) {
    Op op;
    op.kind = OpKind::add;
    op.in0 = a;
    op.in1 = b;
    op.out_channels = ops_[a].out_channels;
    return push(op);
  }

  int concat(int a, int b) {
    Op op;
    op.kind = OpKind::concat;
    op.in0 = a;
    op.in1 = b;
    op.out_channels = ops_[a].out_channels + ops_[b].out_channels;
    return push(op);
  }

  void set_output(int slot) { output_ = slot; }
  int output() const { return output_; }
  int n_inputs() const { return n_inputs_; }
  Eigen::Index channels(int slot) const { return ops_[slot].out_channels; }

  std::vector<Param<T>>& params() { return params_; }
  const std::vector<Param<T>>& params() const { return params_; }

  Param<T>* find_param(const std::string& name) {
    for (auto& p : params_)
      if (p.name == name) return &p;
    return nullptr;
  }
  const Param<T>* find_param(const std::string& name) const {
    for (const auto& p : params_)
      if (p.name == name) return &p;
    return nullptr;
  }

  Eigen::Index parameter_count() const {
    Eigen::Index total = 0;
    for (const auto& p : params_) total += p.size();
    return total;
  }

  void init_workspace(Workspace<T>& ws) const {
    ws.acts.resize(ops_.size());
    ws.grads.resize(ops_.size());
    ws.caches.resize(ops_.size());
    ws.param_grads.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i)
      if (ws.param_grads[i].size() != params_[i].size())
        ws.param_grads[i] = ArrayX<T>::Zero(params_[i].size());
  }

  /// Runs the DAG on `inputs` (one tensor per input op, in creation order)
  /// and returns the output activation, which stays valid inside `ws` until
  /// the next forward call.
  const Tensor<T>& forward(Workspace<T>& ws,
                           const std::vector<const Tensor<T>*>& inputs,
                           bool train, RngStream* dropout_rng) const {
    if (static_cast<int>(inputs.size()) != n_inputs_)
      throw std::invalid_argument("graph: wrong number of inputs");
    if (output_ < 0) throw std::logic_error("graph: no output set");
    init_workspace(ws);

    int next_input = 0;
    for (std::size_t i = 0; i < ops_.size(); ++i) {
      const Op& op = ops_[i];
      Tensor<T>& out = ws.acts[i];
      switch (op.kind) {
        case OpKind::input: {
          const Tensor<T>& in = *inputs[next_input++];
          if (in.c != op.out_channels)
            throw std::invalid_argument("graph: input channel mismatch");
          out = in;
          break;
        }
        case OpKind::conv: {
          const Tensor<T>& x = ws.acts[op.in0];
          auto& cache = ws.caches[i];
          im2col(x, op.geom, cache.cols);
          const Eigen::Index ho = op.geom.out_dim(x.h);
          const Eigen::Index wo = op.geom.out_dim(x.w);
          out.resize(x.n, ho, wo, op.out_channels);
          auto w = params_[op.wparam].as_matrix();
          auto b = params_[op.bparam].as_matrix();
          auto y = out.as_matrix(x.n * ho * wo, op.out_channels);
          y.noalias() = cache.cols * w;
          y.rowwise() += b.row(0);
          break;
        }
        case OpKind::relu:
          relu_forward(ws.acts[op.in0], out);
          break;
        case OpKind::maxpool:
          maxpool_forward(ws.acts[op.in0], op.geom, out, ws.caches[i].indices);
          break;
        case OpKind::avgpool2:
          avgpool2_forward(ws.acts[op.in0], out);
          break;
        case OpKind::gap:
          global_avg_pool_forward(ws.acts[op.in0], out);
          break;
        case OpKind::dropout: {
          if (train && op.keep < 1.0 && dropout_rng == nullptr)
            throw std::invalid_argument("dropout needs an rng in train mode");
          RngStream unused(0);
          dropout_forward(ws.acts[op.in0], op.keep, train,
                          dropout_rng ? *dropout_rng : unused, out,
                          ws.caches[i].mask);
          break;
        }
        case OpKind::dense: {
          const Tensor<T>& x = ws.acts[op.in0];
          if (x.h != 1 || x.w != 1)
            throw std::invalid_argument("dense expects pooled 1x1 input");
          out.resize(x.n, 1, 1, op.out_channels);
          auto w = params_[op.wparam].as_matrix();
          auto b = params_[op.bparam].as_matrix();
          auto y = out.as_matrix(x.n, op.out_channels);
          y.noalias() = x.as_matrix(x.n, x.c) * w;
          y.rowwise() += b.row(0);
          break;
        }
        case OpKind::add: {
          const Tensor<T>& a = ws.acts[op.in0];
          const Tensor<T>& b = ws.acts[op.in1];
          if (!a.same_shape(b))
            throw std::invalid_argument("add: shape mismatch");
          out.resize_like(a);
          out.v = a.v + b.v;
          break;
        }
        case OpKind::concat:
          concat_channels_forward(ws.acts[op.in0], ws.acts[op.in1], out);
          break;
      }
    }
    return ws.acts[static_cast<std::size_t>(output_)];
  }

  /// Backpropagate `dout` (the gradient at the output op); parameter
  /// gradients accumulate into ws.param_grads. Requires a preceding forward
  /// call on the same workspace.
  void backward(Workspace<T>& ws, const Tensor<T>& dout) const {
    for (std::size_t i = 0; i < ops_.size(); ++i) {
      ws.grads[i].resize_like(ws.acts[i]);
      ws.grads[i].setZero();
    }
    ws.grads[static_cast<std::size_t>(output_)].v = dout.v;

    for (std::size_t ri = ops_.size(); ri-- > 0;) {
      const Op& op = ops_[ri];
      const Tensor<T>& dy = ws.grads[ri];
      switch (op.kind) {
        case OpKind::input:
          break;
        case OpKind::conv: {
          const Tensor<T>& x = ws.acts[op.in0];
          auto& cache = ws.caches[ri];
          const Eigen::Index rows = dy.n * dy.h * dy.w;
          auto dym = dy.as_matrix(rows, op.out_channels);
          auto w = params_[op.wparam].as_matrix();
          Eigen::Map<MatrixX<T>> dw(ws.param_grads[op.wparam].data(),
                                    w.rows(), w.cols());
          dw.noalias() += cache.cols.transpose() * dym;
          Eigen::Map<MatrixX<T>> db(ws.param_grads[op.bparam].data(), 1,
                                    op.out_channels);
          db.row(0) += dym.colwise().sum();
          MatrixX<T> dcols(rows, w.rows());
          dcols.noalias() = dym * w.transpose();
          col2im_add(dcols, op.geom, ws.grads[op.in0]);
          (void)x;
          break;
        }
        case OpKind::relu:
          relu_backward_add(ws.acts[ri], dy, ws.grads[op.in0]);
          break;
        case OpKind::maxpool:
          maxpool_backward_add(ws.caches[ri].indices, dy, ws.grads[op.in0]);
          break;
        case OpKind::avgpool2:
          avgpool2_backward_add(dy, ws.grads[op.in0]);
          break;
        case OpKind::gap:
          global_avg_pool_backward_add(dy, ws.grads[op.in0]);
          break;
        case OpKind::dropout:
          dropout_backward_add(ws.caches[ri].mask, dy, ws.grads[op.in0]);
          break;
        case OpKind::dense: {
          const Tensor<T>& x = ws.acts[op.in0];
          auto dym = dy.as_matrix(dy.n, op.out_channels);
          auto w = params_[op.wparam].as_matrix();
          Eigen::Map<MatrixX<T>> dw(ws.param_grads[op.wparam].data(),
                                    w.rows(), w.cols());
          dw.noalias() += x.as_matrix(x.n, x.c).transpose() * dym;
          Eigen::Map<MatrixX<T>> db(ws.param_grads[op.bparam].data(), 1,
                                    op.out_channels);
          db.row(0) += dym.colwise().sum();
          auto dxm = ws.grads[op.in0].as_matrix(x.n, x.c);
          dxm.noalias() += dym * w.transpose();
          break;
        }
        case OpKind::add:
          ws.grads[op.in0].v += dy.v;
          ws.grads[op.in1].v += dy.v;
          break;
        case OpKind::concat:
          concat_channels_backward_add(dy, ws.grads[op.in0],
                                       ws.grads[op.in1]);
          break;
      }
    }
  }

 private:
  int push(const Op& op) {
    ops_.push_back(op);
    return static_cast<int>(ops_.size()) - 1;
  }

  int push_unary(OpKind kind, int in) {
    Op op;
    op.kind = kind;
    op.in0 = in;
    op.out_channels = ops_[in].out_channels;
    return push(op);
  }

  int add_param(const std::string& name, Shape4 shape) {
    Param<T> p;
    p.name = name;
    p.shape = shape;
    p.value = ArrayX<T>::Zero(shape_size(shape));
    p.group = group_;
    params_.push_back(std::move(p));
    return static_cast<int>(params_.size()) - 1;
  }

  std::vector<Op> ops_;
  std::vector<Param<T>> params_;
  int output_ = -1;
  int n_inputs_ = 0;
  int group_ = -1;
};

}  // namespace octplaque
