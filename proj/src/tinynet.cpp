#include "handover/tinynet.hpp"

#include <cmath>
#include <stdexcept>

#include "handover/rng.hpp"

namespace handover {

const char* activation_name(Activation a) {
  switch (a) {
    case act_linear: return "linear";
    case act_relu: return "relu";
    case act_tanh: return "tanh";
  }
  return "linear";
}

Activation activation_from_name(const std::string& name) {
  if (name == "linear") return act_linear;
  if (name == "relu") return act_relu;
  if (name == "tanh") return act_tanh;
  throw std::runtime_error("unknown activation: " + name);
}

namespace {

Eigen::MatrixXd apply_act(Activation a, const Eigen::MatrixXd& x) {
  switch (a) {
    case act_linear: return x;
    case act_relu: return x.cwiseMax(0.0);
    case act_tanh: return x.array().tanh().matrix();
  }
  return x;
}

// derivative of the activation expressed through pre-activation values
Eigen::MatrixXd act_deriv(Activation a, const Eigen::MatrixXd& pre) {
  switch (a) {
    case act_linear: return Eigen::MatrixXd::Ones(pre.rows(), pre.cols());
    case act_relu:
      return (pre.array() > 0.0).cast<double>().matrix();
    case act_tanh: {
      Eigen::ArrayXXd t = pre.array().tanh();
      return (1.0 - t * t).matrix();
    }
  }
  return Eigen::MatrixXd::Ones(pre.rows(), pre.cols());
}

}  // namespace

Mlp::Mlp(const std::vector<int>& dims, const std::vector<Activation>& acts,
         uint64_t seed) {
  if (dims.size() < 2 || acts.size() != dims.size() - 1)
    throw std::runtime_error("mlp dims/activations mismatch");
  layers_.resize(dims.size() - 1);
  for (size_t i = 0; i < layers_.size(); ++i) {
    int fan_in = dims[i], fan_out = dims[i + 1];
    double a = std::sqrt(6.0 / (fan_in + fan_out));
    auto rng = make_rng(derive_seed(seed, i));
    Layer& l = layers_[i];
    l.w.resize(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) l.w(r, c) = uniform(rng, -a, a);
    l.b = Eigen::VectorXd::Zero(fan_out);
    l.act = acts[i];
  }
}

int Mlp::input_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.front().w.cols());
}

int Mlp::output_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.back().w.rows());
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd h = x;
  for (const Layer& l : layers_)
    h = apply_act(l.act, (l.w * h).colwise() + l.b);
  return h;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Tape& tape) const {
  tape.pre.clear();
  tape.post.clear();
  tape.post.push_back(x);
  for (const Layer& l : layers_) {
    Eigen::MatrixXd pre = (l.w * tape.post.back()).colwise() + l.b;
    tape.pre.push_back(pre);
    tape.post.push_back(apply_act(l.act, pre));
  }
  return tape.post.back();
}

Eigen::MatrixXd Mlp::backward(const Tape& tape, const Eigen::MatrixXd& grad_out,
                              std::vector<LayerGrad>& grads) const {
  if (grads.size() != layers_.size())
    throw std::runtime_error("mlp gradient buffer shape mismatch");
  Eigen::MatrixXd delta = grad_out;
  for (int i = static_cast<int>(layers_.size()) - 1; i >= 0; --i) {
    delta = delta.cwiseProduct(act_deriv(layers_[i].act, tape.pre[i]));
    grads[i].w += delta * tape.post[i].transpose();
    grads[i].b += delta.rowwise().sum();
    delta = (layers_[i].w.transpose() * delta).eval();
  }
  return delta;
}

std::vector<LayerGrad> Mlp::make_grads() const {
  std::vector<LayerGrad> grads(layers_.size());
  for (size_t i = 0; i < layers_.size(); ++i) {
    grads[i].w = Eigen::MatrixXd::Zero(layers_[i].w.rows(), layers_[i].w.cols());
    grads[i].b = Eigen::VectorXd::Zero(layers_[i].b.size());
  }
  return grads;
}

void Mlp::sgd_step(const std::vector<LayerGrad>& grads, double lr,
                   double weight_decay) {
  if (grads.size() != layers_.size())
    throw std::runtime_error("mlp gradient buffer shape mismatch");
  for (size_t i = 0; i < layers_.size(); ++i) {
    layers_[i].w -= lr * (grads[i].w + weight_decay * layers_[i].w);
    layers_[i].b -= lr * grads[i].b;
  }
}

nlohmann::json Mlp::to_json() const {
  nlohmann::json j;
  j["version"] = 1;
  std::vector<int> dims;
  std::vector<std::string> acts;
  dims.push_back(input_dim());
  for (const Layer& l : layers_) {
    dims.push_back(static_cast<int>(l.w.rows()));
    acts.emplace_back(activation_name(l.act));
  }
  j["dims"] = dims;
  j["activations"] = acts;
  nlohmann::json layers = nlohmann::json::array();
  for (const Layer& l : layers_) {
    nlohmann::json lj;
    std::vector<double> w;  // row-major
    w.reserve(l.w.size());
    for (int r = 0; r < l.w.rows(); ++r)
      for (int c = 0; c < l.w.cols(); ++c) w.push_back(l.w(r, c));
    lj["w"] = w;
    lj["b"] = std::vector<double>(l.b.data(), l.b.data() + l.b.size());
    layers.push_back(lj);
  }
  j["layers"] = layers;
  return j;
}

Mlp Mlp::from_json(const nlohmann::json& j) {
  if (j.at("version").get<int>() != 1)
    throw std::runtime_error("unsupported net version");
  std::vector<int> dims = j.at("dims").get<std::vector<int>>();
  std::vector<std::string> acts =
      j.at("activations").get<std::vector<std::string>>();
  Mlp net;
  net.layers_.resize(dims.size() - 1);
  const nlohmann::json& layers = j.at("layers");
  for (size_t i = 0; i + 1 < dims.size(); ++i) {
    Layer& l = net.layers_[i];
    l.act = activation_from_name(acts[i]);
    l.w.resize(dims[i + 1], dims[i]);
    std::vector<double> w = layers.at(i).at("w").get<std::vector<double>>();
    if (static_cast<int>(w.size()) != l.w.size())
      throw std::runtime_error("net weight size mismatch");
    size_t k = 0;
    for (int r = 0; r < l.w.rows(); ++r)
      for (int c = 0; c < l.w.cols(); ++c) l.w(r, c) = w[k++];
    std::vector<double> b = layers.at(i).at("b").get<std::vector<double>>();
    l.b = Eigen::Map<Eigen::VectorXd>(b.data(), b.size());
  }
  return net;
}

double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target,
                Eigen::MatrixXd* grad) {
  Eigen::MatrixXd diff = pred - target;
  double n = static_cast<double>(diff.size());
  if (grad) *grad = 2.0 * diff / n;
  return diff.squaredNorm() / n;
}

}  // namespace handover
