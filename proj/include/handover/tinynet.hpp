#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace handover {

enum Activation { act_linear = 0, act_relu = 1, act_tanh = 2 };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct Layer {
  Eigen::MatrixXd w;  // rows = outputs, cols = inputs
  Eigen::VectorXd b;
  Activation act = act_linear;
};

struct LayerGrad {
  Eigen::MatrixXd w;
  Eigen::VectorXd b;
};

// fully connected net over column batches: x is (in x n), output (out x n).
// forward/backward are explicit so callers can route gradients through
// pooling or custom losses before stepping.
class Mlp {
 public:
  Mlp() = default;
  // dims = {in, h0, ..., out}; acts has dims.size()-1 entries.
  Mlp(const std::vector<int>& dims, const std::vector<Activation>& acts,
      uint64_t seed);

  struct Tape {
    std::vector<Eigen::MatrixXd> pre;   // pre-activation per layer
    std::vector<Eigen::MatrixXd> post;  // post[0] = input, post[i+1] = layer i out
  };

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Tape& tape) const;

  // grad_out = dL/dy. accumulates into grads (shape-matched, see make_grads)
  // and returns dL/dx.
  Eigen::MatrixXd backward(const Tape& tape, const Eigen::MatrixXd& grad_out,
                           std::vector<LayerGrad>& grads) const;

  std::vector<LayerGrad> make_grads() const;

  // w -= lr * (gw + weight_decay * w); b -= lr * gb
  void sgd_step(const std::vector<LayerGrad>& grads, double lr,
                double weight_decay);

  int input_dim() const;
  int output_dim() const;
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  nlohmann::json to_json() const;
  static Mlp from_json(const nlohmann::json& j);

 private:
  std::vector<Layer> layers_;
};

// mean over all entries of (pred - target)^2; grad = dL/dpred.
double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target,
                Eigen::MatrixXd* grad);

}  // namespace handover
