#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "maas/errors.hpp"
#include "maas/rng.hpp"

namespace maas {

// Small fully connected network: ReLU hidden layers, linear output, double
// precision throughout so finite-difference gradient checks are meaningful.

struct Mlp {
  std::vector<int> widths;                    // input, hidden..., output
  std::vector<std::vector<double>> weights;   // per layer, row-major out x in
  std::vector<std::vector<double>> biases;

  int layer_count() const { return static_cast<int>(widths.size()) - 1; }
  int input_size() const { return widths.front(); }
  int output_size() const { return widths.back(); }
};

inline Mlp make_mlp(const std::vector<int>& widths, Rng& rng) {
  if (widths.size() < 2) throw ShapeError("network needs at least input and output widths");
  for (int w : widths)
    if (w < 1) throw ShapeError("layer width must be positive");
  Mlp net;
  net.widths = widths;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int fan_in = widths[l];
    const int fan_out = widths[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::vector<double> w(static_cast<std::size_t>(fan_in) * fan_out);
    for (double& x : w) x = rng.uniform(-limit, limit);
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::vector<double>(fan_out, 0.0));
  }
  return net;
}

struct ForwardCache {
  std::vector<std::vector<double>> activations;  // [0] = input, per layer after
  std::vector<std::vector<double>> pre;          // pre-activation per layer
};

inline std::vector<double> forward(const Mlp& net, const std::vector<double>& input,
                                   ForwardCache* cache = nullptr) {
  if (static_cast<int>(input.size()) != net.input_size())
    throw ShapeError("input length does not match the network");
  std::vector<double> a = input;
  if (cache) {
    cache->activations.clear();
    cache->pre.clear();
    cache->activations.push_back(a);
  }
  const int layers = net.layer_count();
  for (int l = 0; l < layers; ++l) {
    const int in = net.widths[l];
    const int out = net.widths[l + 1];
    std::vector<double> z(out);
    const double* w = net.weights[l].data();
    for (int r = 0; r < out; ++r) {
      double acc = net.biases[l][r];
      const double* row = w + static_cast<std::size_t>(r) * in;
      for (int k = 0; k < in; ++k) acc += row[k] * a[k];
      z[r] = acc;
    }
    if (cache) cache->pre.push_back(z);
    if (l + 1 < layers)
      for (double& x : z) x = x > 0.0 ? x : 0.0;  // ReLU on hidden layers
    a = std::move(z);
    if (cache) cache->activations.push_back(a);
  }
  return a;
}

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

inline Gradients zero_gradients(const Mlp& net) {
  Gradients g;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    g.weights.push_back(std::vector<double>(net.weights[l].size(), 0.0));
    g.biases.push_back(std::vector<double>(net.biases[l].size(), 0.0));
  }
  return g;
}

// Backpropagate an arbitrary gradient of the loss w.r.t. the network output,
// accumulating into `grads`. The cache must come from forward() on this net.
inline void backward_from_output(const Mlp& net, const ForwardCache& cache,
                                 std::vector<double> out_grad, Gradients& grads) {
  if (static_cast<int>(out_grad.size()) != net.output_size())
    throw ShapeError("output gradient length mismatch");
  const int layers = net.layer_count();
  std::vector<double> dz = std::move(out_grad);  // output layer is linear
  for (int l = layers - 1; l >= 0; --l) {
    const int in = net.widths[l];
    const int out = net.widths[l + 1];
    const std::vector<double>& a_prev = cache.activations[l];
    for (int r = 0; r < out; ++r) {
      grads.biases[l][r] += dz[r];
      double* wrow = grads.weights[l].data() + static_cast<std::size_t>(r) * in;
      for (int k = 0; k < in; ++k) wrow[k] += dz[r] * a_prev[k];
    }
    if (l == 0) break;
    std::vector<double> da(in, 0.0);
    const double* w = net.weights[l].data();
    for (int r = 0; r < out; ++r) {
      const double* row = w + static_cast<std::size_t>(r) * in;
      for (int k = 0; k < in; ++k) da[k] += row[k] * dz[r];
    }
    // ReLU derivative at the previous layer's pre-activation
    dz.assign(in, 0.0);
    for (int k = 0; k < in; ++k) dz[k] = cache.pre[l - 1][k] > 0.0 ? da[k] : 0.0;
  }
}

// Gradients of the squared-error loss L = sum_k (y_k - target_k)^2.
inline Gradients backward(const Mlp& net, const std::vector<double>& input,
                          const std::vector<double>& target) {
  if (static_cast<int>(target.size()) != net.output_size())
    throw ShapeError("target length mismatch");
  ForwardCache cache;
  const std::vector<double> y = forward(net, input, &cache);
  std::vector<double> out_grad(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) out_grad[k] = 2.0 * (y[k] - target[k]);
  Gradients g = zero_gradients(net);
  backward_from_output(net, cache, std::move(out_grad), g);
  return g;
}

inline double loss(const Mlp& net, const std::vector<double>& input,
                   const std::vector<double>& target) {
  const std::vector<double> y = forward(net, input);
  double total = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) total += (y[k] - target[k]) * (y[k] - target[k]);
  return total;
}

struct AdamState {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<std::vector<double>> m_w, v_w, m_b, v_b;
};

inline AdamState make_adam(const Mlp& net, double lr = 1e-4) {
  AdamState s;
  s.lr = lr;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    s.m_w.push_back(std::vector<double>(net.weights[l].size(), 0.0));
    s.v_w.push_back(std::vector<double>(net.weights[l].size(), 0.0));
    s.m_b.push_back(std::vector<double>(net.biases[l].size(), 0.0));
    s.v_b.push_back(std::vector<double>(net.biases[l].size(), 0.0));
  }
  return s;
}

inline void adam_step(AdamState& s, Mlp& net, const Gradients& grads) {
  if (grads.weights.size() != net.weights.size())
    throw ShapeError("gradient shape mismatch");
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  auto update = [&](std::vector<double>& params, const std::vector<double>& g,
                    std::vector<double>& m, std::vector<double>& v) {
    if (params.size() != g.size()) throw ShapeError("gradient shape mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
      v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      params[i] -= s.lr * mhat / (std::sqrt(vhat) + s.eps);
    }
  };
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    update(net.weights[l], grads.weights[l], s.m_w[l], s.v_w[l]);
    update(net.biases[l], grads.biases[l], s.m_b[l], s.v_b[l]);
  }
}

// -- checkpoints ---------------------------------------------------------
// Layout: u32 count, u32 widths..., then per layer the row-major weight
// matrix and the bias vector as little-endian f64.

inline void save_checkpoint(const Mlp& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write checkpoint: " + path);
  auto put_u32 = [&](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  auto put_f64 = [&](double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
  };
  put_u32(static_cast<std::uint32_t>(net.widths.size()));
  for (int w : net.widths) put_u32(static_cast<std::uint32_t>(w));
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    for (double x : net.weights[l]) put_f64(x);
    for (double x : net.biases[l]) put_f64(x);
  }
}

inline Mlp load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read checkpoint: " + path);
  auto get_u32 = [&]() {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw ConfigError("truncated checkpoint");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  };
  auto get_f64 = [&]() {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw ConfigError("truncated checkpoint");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double x;
    std::memcpy(&x, &bits, 8);
    return x;
  };
  Mlp net;
  const std::uint32_t count = get_u32();
  if (count < 2 || count > 64) throw ConfigError("corrupt checkpoint header");
  for (std::uint32_t i = 0; i < count; ++i) net.widths.push_back(static_cast<int>(get_u32()));
  for (std::size_t l = 0; l + 1 < net.widths.size(); ++l) {
    const std::size_t wn = static_cast<std::size_t>(net.widths[l]) * net.widths[l + 1];
    std::vector<double> w(wn);
    for (double& x : w) x = get_f64();
    net.weights.push_back(std::move(w));
    std::vector<double> b(static_cast<std::size_t>(net.widths[l + 1]));
    for (double& x : b) x = get_f64();
    net.biases.push_back(std::move(b));
  }
  return net;
}

}  // namespace maas
