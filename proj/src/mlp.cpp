#include "dualmdp/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "dualmdp/rng.hpp"

namespace dualmdp {

Mlp Mlp::init(int in_dim, uint64_t seed) {
  Mlp m;
  m.in_dim = in_dim;
  Rng rng(seed);
  auto fill = [&](std::vector<double>& v, size_t n, double scale) {
    v.resize(n);
    for (double& x : v) x = rng.normal(0.0, scale);
  };
  fill(m.w1, static_cast<size_t>(kHidden) * in_dim, 1.0 / std::sqrt(in_dim));
  fill(m.b1, kHidden, 0.0);
  fill(m.w2, static_cast<size_t>(kHidden) * kHidden, 1.0 / std::sqrt(kHidden));
  fill(m.b2, kHidden, 0.0);
  fill(m.w3, kHidden, 1.0 / std::sqrt(kHidden));
  m.b3 = 0.0;
  return m;
}

double Mlp::forward(const double* x) const {
  double h1[kHidden], h2[kHidden];
  for (int i = 0; i < kHidden; ++i) {
    double a = b1[static_cast<size_t>(i)];
    for (int j = 0; j < in_dim; ++j)
      a += w1[static_cast<size_t>(i) * in_dim + j] * x[j];
    h1[i] = std::tanh(a);
  }
  for (int i = 0; i < kHidden; ++i) {
    double a = b2[static_cast<size_t>(i)];
    for (int j = 0; j < kHidden; ++j)
      a += w2[static_cast<size_t>(i) * kHidden + j] * h1[j];
    h2[i] = std::tanh(a);
  }
  double y = b3;
  for (int i = 0; i < kHidden; ++i) y += w3[static_cast<size_t>(i)] * h2[i];
  return y;
}

Mlp::Trace Mlp::forward_trace(const double* x) const {
  Trace t;
  t.x.assign(x, x + in_dim);
  t.h1.resize(kHidden);
  t.h2.resize(kHidden);
  for (int i = 0; i < kHidden; ++i) {
    double a = b1[static_cast<size_t>(i)];
    for (int j = 0; j < in_dim; ++j)
      a += w1[static_cast<size_t>(i) * in_dim + j] * x[j];
    t.h1[static_cast<size_t>(i)] = std::tanh(a);
  }
  for (int i = 0; i < kHidden; ++i) {
    double a = b2[static_cast<size_t>(i)];
    for (int j = 0; j < kHidden; ++j)
      a += w2[static_cast<size_t>(i) * kHidden + j] * t.h1[static_cast<size_t>(j)];
    t.h2[static_cast<size_t>(i)] = std::tanh(a);
  }
  t.y = b3;
  for (int i = 0; i < kHidden; ++i)
    t.y += w3[static_cast<size_t>(i)] * t.h2[static_cast<size_t>(i)];
  return t;
}

void Mlp::backward(const Trace& t, double dy, Mlp& grad) const {
  double dh2[kHidden], dh1[kHidden];
  for (int i = 0; i < kHidden; ++i) {
    grad.w3[static_cast<size_t>(i)] += dy * t.h2[static_cast<size_t>(i)];
    dh2[i] = dy * w3[static_cast<size_t>(i)];
  }
  grad.b3 += dy;
  for (int i = 0; i < kHidden; ++i) {
    const double da = dh2[i] * (1.0 - t.h2[static_cast<size_t>(i)] *
                                         t.h2[static_cast<size_t>(i)]);
    grad.b2[static_cast<size_t>(i)] += da;
    for (int j = 0; j < kHidden; ++j)
      grad.w2[static_cast<size_t>(i) * kHidden + j] +=
          da * t.h1[static_cast<size_t>(j)];
    dh2[i] = da;  // reuse as pre-activation grad
  }
  for (int j = 0; j < kHidden; ++j) {
    double acc = 0.0;
    for (int i = 0; i < kHidden; ++i)
      acc += dh2[i] * w2[static_cast<size_t>(i) * kHidden + j];
    dh1[j] = acc;
  }
  for (int i = 0; i < kHidden; ++i) {
    const double da = dh1[i] * (1.0 - t.h1[static_cast<size_t>(i)] *
                                         t.h1[static_cast<size_t>(i)]);
    grad.b1[static_cast<size_t>(i)] += da;
    for (int j = 0; j < in_dim; ++j)
      grad.w1[static_cast<size_t>(i) * in_dim + j] +=
          da * t.x[static_cast<size_t>(j)];
  }
}

size_t Mlp::param_count() const {
  return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + 1;
}

void Mlp::add_scaled(const Mlp& g, double s) {
  auto axpy = [s](std::vector<double>& a, const std::vector<double>& b) {
    for (size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
  };
  axpy(w1, g.w1);
  axpy(b1, g.b1);
  axpy(w2, g.w2);
  axpy(b2, g.b2);
  axpy(w3, g.w3);
  b3 += s * g.b3;
}

void Mlp::scale(double s) {
  for (auto* v : {&w1, &b1, &w2, &b2, &w3})
    for (double& x : *v) x *= s;
  b3 *= s;
}

void Mlp::zero() { scale(0.0); }

std::vector<double> Mlp::flatten() const {
  std::vector<double> flat;
  flat.reserve(param_count());
  for (const auto* v : {&w1, &b1, &w2, &b2, &w3})
    flat.insert(flat.end(), v->begin(), v->end());
  flat.push_back(b3);
  return flat;
}

void Mlp::unflatten(const std::vector<double>& flat) {
  if (flat.size() != param_count())
    throw std::invalid_argument("Mlp::unflatten: size mismatch");
  size_t k = 0;
  for (auto* v : {&w1, &b1, &w2, &b2, &w3})
    for (double& x : *v) x = flat[k++];
  b3 = flat[k];
}

SgdMomentum::SgdMomentum(const Mlp& shape, double lr_, double momentum_)
    : lr(lr_), momentum(momentum_), velocity(shape) {
  velocity.zero();
}

void SgdMomentum::apply(Mlp& params, const Mlp& grad) {
  velocity.scale(momentum);
  velocity.add_scaled(grad, 1.0);
  params.add_scaled(velocity, -lr);
}

}  // namespace dualmdp
