#include "policy.hpp"

#include <cmath>

#include "errors.hpp"
#include "rng.hpp"

namespace risauction {

Mlp::Mlp(const std::vector<std::size_t>& sizes) {
  if (sizes.size() < 2) throw ConfigError("Mlp: need input and output sizes");
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const auto in = static_cast<Eigen::Index>(sizes[i]);
    const auto out = static_cast<Eigen::Index>(sizes[i + 1]);
    layers.push_back({Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)});
  }
}

void Mlp::orthogonal_init(Rng& rng, double output_gain) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& w = layers[l].weight;
    const Eigen::Index rows = w.rows(), cols = w.cols();
    const Eigen::Index big = std::max(rows, cols), small = std::min(rows, cols);
    Eigen::MatrixXd g(big, small);
    for (Eigen::Index i = 0; i < big; ++i)
      for (Eigen::Index j = 0; j < small; ++j) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
    // Sign correction makes the distribution uniform over orthogonal matrices.
    const Eigen::MatrixXd r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < small; ++j)
      if (r(j, j) < 0.0) q.col(j) *= -1.0;
    const double gain = (l + 1 == layers.size()) ? output_gain : std::sqrt(2.0);
    w = gain * (rows >= cols ? q : Eigen::MatrixXd(q.transpose()));
    layers[l].bias.setZero();
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Eigen::MatrixXd z = (layers[l].weight * a).colwise() + layers[l].bias;
    a = (l + 1 == layers.size()) ? std::move(z) : Eigen::MatrixXd(z.array().tanh());
  }
  return a;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Cache& cache) const {
  cache.activations.clear();
  cache.activations.push_back(x);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Eigen::MatrixXd z = (layers[l].weight * cache.activations.back()).colwise() + layers[l].bias;
    if (l + 1 == layers.size()) return z;
    cache.activations.push_back(z.array().tanh());
  }
  return {};
}

void Mlp::backward(const Cache& cache, const Eigen::MatrixXd& grad_out, Mlp& grads) const {
  Eigen::MatrixXd delta = grad_out;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Eigen::MatrixXd& input = cache.activations[l];
    grads.layers[l].weight.noalias() += delta * input.transpose();
    grads.layers[l].bias += delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd upstream = layers[l].weight.transpose() * delta;
    // tanh' = 1 - tanh^2, and activations[l] holds tanh of layer l-1.
    delta = upstream.array() * (1.0 - input.array().square());
  }
}

std::size_t Mlp::input_size() const { return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().weight.cols()); }
std::size_t Mlp::output_size() const { return layers.empty() ? 0 : static_cast<std::size_t>(layers.back().weight.rows()); }

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

PolicyParams PolicyParams::create(std::size_t obs_dim, std::size_t act_dim, const std::vector<std::size_t>& hidden,
                                  Rng& rng) {
  std::vector<std::size_t> actor_sizes{obs_dim};
  actor_sizes.insert(actor_sizes.end(), hidden.begin(), hidden.end());
  std::vector<std::size_t> critic_sizes = actor_sizes;
  actor_sizes.push_back(act_dim);
  critic_sizes.push_back(1);
  PolicyParams p{Mlp(actor_sizes), Mlp(critic_sizes)};
  p.actor.orthogonal_init(rng, 0.01);
  p.critic.orthogonal_init(rng, 1.0);
  return p;
}

PolicyParams PolicyParams::zeros_like(const PolicyParams& other) {
  PolicyParams p = other;
  for (Mlp* net : {&p.actor, &p.critic})
    for (auto& l : net->layers) {
      l.weight.setZero();
      l.bias.setZero();
    }
  return p;
}

std::vector<std::size_t> PolicyParams::hidden_sizes() const {
  std::vector<std::size_t> h;
  for (std::size_t l = 0; l + 1 < actor.layers.size(); ++l) h.push_back(static_cast<std::size_t>(actor.layers[l].weight.rows()));
  return h;
}

Eigen::VectorXd PolicyParams::flat() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index pos = 0;
  for (const Mlp* net : {&actor, &critic})
    for (const auto& l : net->layers) {
      out.segment(pos, l.weight.size()) = l.weight.reshaped();
      pos += l.weight.size();
      out.segment(pos, l.bias.size()) = l.bias;
      pos += l.bias.size();
    }
  return out;
}

void PolicyParams::set_flat(const Eigen::VectorXd& values) {
  if (values.size() != static_cast<Eigen::Index>(parameter_count()))
    throw StructureError("PolicyParams::set_flat: parameter count mismatch");
  Eigen::Index pos = 0;
  for (Mlp* net : {&actor, &critic})
    for (auto& l : net->layers) {
      l.weight.reshaped() = values.segment(pos, l.weight.size());
      pos += l.weight.size();
      l.bias = values.segment(pos, l.bias.size());
      pos += l.bias.size();
    }
}

bool PolicyParams::is_finite() const { return flat().allFinite(); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double bernoulli_log_prob(const Eigen::VectorXd& logits, const std::vector<std::uint8_t>& bits) {
  if (static_cast<std::size_t>(logits.size()) != bits.size()) throw StructureError("bernoulli_log_prob: size mismatch");
  double lp = 0.0;
  // log p = -softplus(-z), log(1 - p) = -softplus(z)
  for (Eigen::Index i = 0; i < logits.size(); ++i)
    lp += bits[static_cast<std::size_t>(i)] ? -softplus(-logits[i]) : -softplus(logits[i]);
  return lp;
}

PolicyOutput policy_forward(const PolicyParams& params, const Eigen::VectorXd& obs) {
  if (!obs.allFinite()) throw ArgumentError("policy_forward: non-finite observation");
  if (static_cast<std::size_t>(obs.size()) != params.obs_dim())
    throw StructureError("policy_forward: observation size does not match the policy");
  PolicyOutput out;
  const Eigen::VectorXd logits = params.actor.forward(obs);
  out.probabilities = logits.unaryExpr([](double z) { return sigmoid(z); });
  out.value = params.critic.forward(obs)(0, 0);
  return out;
}

}  // namespace risauction
