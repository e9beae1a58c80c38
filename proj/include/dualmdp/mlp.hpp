#pragma once

#include <cstdint>
#include <vector>

namespace dualmdp {

// Fixed-topology scalar-output MLP (in -> 64 -> 64 -> 1, tanh hidden, linear
// output) with hand-derived backprop.  Small enough to verify against finite
// differences, which the tests do.
struct Mlp {
  int in_dim = 6;
  static constexpr int kHidden = 64;

  std::vector<double> w1, b1;  // kHidden x in_dim, kHidden
  std::vector<double> w2, b2;  // kHidden x kHidden, kHidden
  std::vector<double> w3;      // kHidden
  double b3 = 0.0;

  static Mlp init(int in_dim, uint64_t seed);

  double forward(const double* x) const;

  // Forward pass keeping activations for backprop.
  struct Trace {
    std::vector<double> x, h1, h2;
    double y = 0.0;
  };
  Trace forward_trace(const double* x) const;

  // Accumulate d(dy * y)/dparams into grad (same layout as the parameters).
  void backward(const Trace& t, double dy, Mlp& grad) const;

  size_t param_count() const;
  void add_scaled(const Mlp& g, double s);
  void scale(double s);
  void zero();

  std::vector<double> flatten() const;
  void unflatten(const std::vector<double>& flat);
};

// Plain SGD with momentum over an Mlp's parameters.
struct SgdMomentum {
  double lr = 1e-2;
  double momentum = 0.9;
  Mlp velocity;

  explicit SgdMomentum(const Mlp& shape, double lr_, double momentum_ = 0.9);
  void apply(Mlp& params, const Mlp& grad);
};

}  // namespace dualmdp
