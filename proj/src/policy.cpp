#include "dualmdp/policy.hpp"

#include <cmath>

#include "dualmdp/rng.hpp"

namespace dualmdp {

namespace {
constexpr double kLogStdInit = -3.5;
constexpr double kLogStdMin = -4.6;  // sigma floor ~0.01
constexpr double kLogStdMax = -1.2;  // sigma ceiling ~0.30
constexpr double kHalfLog2Pi = 0.9189385332046727;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// y = W x + b, W is rows x cols row-major
inline void affine(const double* W, const double* b, const double* x, int rows,
                   int cols, double* y) {
  for (int i = 0; i < rows; ++i) {
    double a = b ? b[i] : 0.0;
    const double* w = W + static_cast<size_t>(i) * cols;
    for (int j = 0; j < cols; ++j) a += w[j] * x[j];
    y[i] = a;
  }
}

// accumulate outer product: dW += dy x^T, db += dy
inline void affine_backward(const double* dy, const double* x, int rows,
                            int cols, double* dW, double* db) {
  for (int i = 0; i < rows; ++i) {
    double* w = dW + static_cast<size_t>(i) * cols;
    for (int j = 0; j < cols; ++j) w[j] += dy[i] * x[j];
    if (db) db[i] += dy[i];
  }
}

// dx += W^T dy
inline void affine_input_grad(const double* W, const double* dy, int rows,
                              int cols, double* dx) {
  for (int i = 0; i < rows; ++i) {
    const double* w = W + static_cast<size_t>(i) * cols;
    for (int j = 0; j < cols; ++j) dx[j] += w[j] * dy[i];
  }
}

}  // namespace

void PolicyParams::compute_offsets() {
  size_t k = 0;
  auto take = [&](size_t n) {
    const size_t at = k;
    k += n;
    return at;
  };
  const size_t V = static_cast<size_t>(vocab_size);
  off_emb_ = take(V * kEmbeddingDim);
  off_w_in_ = take(static_cast<size_t>(kHiddenDim) * kInputDim);
  off_b_in_ = take(kHiddenDim);
  off_w_z_ = take(static_cast<size_t>(kHiddenDim) * kHiddenDim);
  off_u_z_ = take(static_cast<size_t>(kHiddenDim) * kHiddenDim);
  off_b_z_ = take(kHiddenDim);
  off_w_r_ = take(static_cast<size_t>(kHiddenDim) * kHiddenDim);
  off_u_r_ = take(static_cast<size_t>(kHiddenDim) * kHiddenDim);
  off_b_r_ = take(kHiddenDim);
  off_w_h_ = take(static_cast<size_t>(kHiddenDim) * kHiddenDim);
  off_u_h_ = take(static_cast<size_t>(kHiddenDim) * kHiddenDim);
  off_b_h_ = take(kHiddenDim);
  off_w_mu_ = take(static_cast<size_t>(kActDim) * kHiddenDim);
  off_b_mu_ = take(kActDim);
  off_log_std_ = take(kActDim);
  off_w_v_ = take(kHiddenDim);
  off_b_v_ = take(1);
  flat.resize(k, 0.0);
}

PolicyParams PolicyParams::init(int vocab_size, uint64_t seed) {
  PolicyParams P;
  P.vocab_size = vocab_size;
  P.seed = seed;
  P.compute_offsets();
  Rng rng(seed * 0x9e3779b97f4a7c15ull + 0xabcd);
  auto fill = [&](double* p, size_t n, double scale) {
    for (size_t i = 0; i < n; ++i) p[i] = rng.normal(0.0, scale);
  };
  fill(P.emb(), static_cast<size_t>(vocab_size) * kEmbeddingDim, 0.5);
  fill(P.w_in(), static_cast<size_t>(kHiddenDim) * kInputDim,
       1.0 / std::sqrt(kInputDim));
  const double hs = 1.0 / std::sqrt(kHiddenDim);
  for (double* w : {P.w_z(), P.u_z(), P.w_r(), P.u_r(), P.w_h(), P.u_h()})
    fill(w, static_cast<size_t>(kHiddenDim) * kHiddenDim, hs);
  fill(P.w_mu(), static_cast<size_t>(kActDim) * kHiddenDim, 0.01);
  fill(P.w_v(), kHiddenDim, 0.1);
  for (int i = 0; i < kActDim; ++i) P.log_std()[i] = kLogStdInit;
  return P;
}

uint64_t PolicyParams::hash() const {
  return fnv1a(flat.data(), flat.size() * sizeof(double));
}

PolicyParams PolicyParams::zeros_like() const {
  PolicyParams g;
  g.vocab_size = vocab_size;
  g.seed = seed;
  g.compute_offsets();
  return g;
}

std::array<double, kActDim> squash_scale() {
  return {Action::kMaxStep, Action::kMaxStep, Action::kMaxStep, 0.5};
}

std::array<double, kActDim> squash_mean(const std::array<double, kActDim>& u) {
  const auto sc = squash_scale();
  std::array<double, kActDim> mu;
  for (int i = 0; i < 3; ++i) mu[static_cast<size_t>(i)] = sc[static_cast<size_t>(i)] * std::tanh(u[static_cast<size_t>(i)]);
  mu[3] = 0.5 + 0.5 * std::tanh(u[3]);
  return mu;
}

double effective_sigma(double log_std) {
  const double c = std::min(std::max(log_std, kLogStdMin), kLogStdMax);
  return std::exp(c);
}

std::vector<double> embed_counts(const PolicyParams& P,
                                 const std::vector<double>& counts) {
  std::vector<double> e(kEmbeddingDim, 0.0);
  const double* W = P.emb();
  for (size_t r = 0; r < counts.size(); ++r) {
    if (counts[r] == 0.0) continue;
    for (int c = 0; c < kEmbeddingDim; ++c)
      e[static_cast<size_t>(c)] += counts[r] * W[r * kEmbeddingDim + c];
  }
  for (double& x : e) x = std::tanh(x);
  return e;
}

void build_input(const Obs& obs, const std::array<double, kActDim>& prev_action,
                 double prev_reward, double done_flag,
                 const std::vector<double>& emb,
                 std::array<double, kInputDim>* x) {
  int k = 0;
  for (int i = 0; i < kObsDim; ++i) (*x)[k++] = obs[static_cast<size_t>(i)];
  for (int i = 0; i < kActDim; ++i) (*x)[k++] = prev_action[static_cast<size_t>(i)];
  (*x)[k++] = prev_reward;
  (*x)[k++] = done_flag;
  for (int i = 0; i < kEmbeddingDim; ++i) (*x)[k++] = emb[static_cast<size_t>(i)];
}

void policy_step(const PolicyParams& P, const std::array<double, kInputDim>& x,
                 const std::array<double, kHiddenDim>& h_prev, CellTrace* tr) {
  tr->x = x;
  tr->h_prev = h_prev;
  affine(P.w_in(), P.b_in(), x.data(), kHiddenDim, kInputDim, tr->p.data());

  double az[kHiddenDim], ar[kHiddenDim], ah[kHiddenDim];
  affine(P.w_z(), P.b_z(), tr->p.data(), kHiddenDim, kHiddenDim, az);
  affine(P.w_r(), P.b_r(), tr->p.data(), kHiddenDim, kHiddenDim, ar);
  for (int i = 0; i < kHiddenDim; ++i) {
    double sz = 0.0, sr = 0.0;
    const double* uz = P.u_z() + static_cast<size_t>(i) * kHiddenDim;
    const double* ur = P.u_r() + static_cast<size_t>(i) * kHiddenDim;
    for (int j = 0; j < kHiddenDim; ++j) {
      sz += uz[j] * h_prev[static_cast<size_t>(j)];
      sr += ur[j] * h_prev[static_cast<size_t>(j)];
    }
    tr->z[static_cast<size_t>(i)] = sigmoid(az[i] + sz);
    tr->r[static_cast<size_t>(i)] = sigmoid(ar[i] + sr);
  }
  for (int i = 0; i < kHiddenDim; ++i)
    tr->rh[static_cast<size_t>(i)] =
        tr->r[static_cast<size_t>(i)] * h_prev[static_cast<size_t>(i)];
  affine(P.w_h(), P.b_h(), tr->p.data(), kHiddenDim, kHiddenDim, ah);
  for (int i = 0; i < kHiddenDim; ++i) {
    double s = 0.0;
    const double* uh = P.u_h() + static_cast<size_t>(i) * kHiddenDim;
    for (int j = 0; j < kHiddenDim; ++j) s += uh[j] * tr->rh[static_cast<size_t>(j)];
    tr->hc[static_cast<size_t>(i)] = std::tanh(ah[i] + s);
  }
  for (int i = 0; i < kHiddenDim; ++i) {
    const double z = tr->z[static_cast<size_t>(i)];
    tr->h[static_cast<size_t>(i)] =
        (1.0 - z) * h_prev[static_cast<size_t>(i)] +
        z * tr->hc[static_cast<size_t>(i)];
  }

  affine(P.w_mu(), P.b_mu(), tr->h.data(), kActDim, kHiddenDim, tr->u.data());
  tr->mu = squash_mean(tr->u);
  double v = *P.b_v();
  for (int i = 0; i < kHiddenDim; ++i) v += P.w_v()[i] * tr->h[static_cast<size_t>(i)];
  tr->v = v;
}

void policy_backward_step(const PolicyParams& P, const CellTrace& tr,
                          const std::array<double, kActDim>& dmu, double dv,
                          std::array<double, kHiddenDim>* dh,
                          std::array<double, kInputDim>* dx,
                          PolicyParams* grad) {
  // heads
  double du[kActDim];
  const auto sc = squash_scale();
  for (int i = 0; i < kActDim; ++i) {
    const double th = std::tanh(tr.u[static_cast<size_t>(i)]);
    du[i] = dmu[static_cast<size_t>(i)] * sc[static_cast<size_t>(i)] * (1.0 - th * th);
  }
  std::array<double, kHiddenDim> dht = *dh;  // total grad wrt h_t
  affine_backward(du, tr.h.data(), kActDim, kHiddenDim, grad->w_mu(),
                  grad->b_mu());
  affine_input_grad(P.w_mu(), du, kActDim, kHiddenDim, dht.data());
  for (int i = 0; i < kHiddenDim; ++i) {
    grad->w_v()[i] += dv * tr.h[static_cast<size_t>(i)];
    dht[static_cast<size_t>(i)] += dv * P.w_v()[i];
  }
  *grad->b_v() += dv;

  // GRU cell
  std::array<double, kHiddenDim> dz, dhc, dh_prev, drh, dp;
  dp.fill(0.0);
  for (int i = 0; i < kHiddenDim; ++i) {
    const double d = dht[static_cast<size_t>(i)];
    const double z = tr.z[static_cast<size_t>(i)];
    dz[static_cast<size_t>(i)] =
        d * (tr.hc[static_cast<size_t>(i)] - tr.h_prev[static_cast<size_t>(i)]);
    dhc[static_cast<size_t>(i)] = d * z;
    dh_prev[static_cast<size_t>(i)] = d * (1.0 - z);
  }
  // candidate
  double dah[kHiddenDim];
  for (int i = 0; i < kHiddenDim; ++i) {
    const double hc = tr.hc[static_cast<size_t>(i)];
    dah[i] = dhc[static_cast<size_t>(i)] * (1.0 - hc * hc);
  }
  affine_backward(dah, tr.p.data(), kHiddenDim, kHiddenDim, grad->w_h(),
                  grad->b_h());
  affine_backward(dah, tr.rh.data(), kHiddenDim, kHiddenDim, grad->u_h(),
                  nullptr);
  affine_input_grad(P.w_h(), dah, kHiddenDim, kHiddenDim, dp.data());
  drh.fill(0.0);
  affine_input_grad(P.u_h(), dah, kHiddenDim, kHiddenDim, drh.data());
  std::array<double, kHiddenDim> dr;
  for (int i = 0; i < kHiddenDim; ++i) {
    dr[static_cast<size_t>(i)] =
        drh[static_cast<size_t>(i)] * tr.h_prev[static_cast<size_t>(i)];
    dh_prev[static_cast<size_t>(i)] +=
        drh[static_cast<size_t>(i)] * tr.r[static_cast<size_t>(i)];
  }
  // gates
  double daz[kHiddenDim], dar[kHiddenDim];
  for (int i = 0; i < kHiddenDim; ++i) {
    const double z = tr.z[static_cast<size_t>(i)];
    const double r = tr.r[static_cast<size_t>(i)];
    daz[i] = dz[static_cast<size_t>(i)] * z * (1.0 - z);
    dar[i] = dr[static_cast<size_t>(i)] * r * (1.0 - r);
  }
  affine_backward(daz, tr.p.data(), kHiddenDim, kHiddenDim, grad->w_z(),
                  grad->b_z());
  affine_backward(daz, tr.h_prev.data(), kHiddenDim, kHiddenDim, grad->u_z(),
                  nullptr);
  affine_backward(dar, tr.p.data(), kHiddenDim, kHiddenDim, grad->w_r(),
                  grad->b_r());
  affine_backward(dar, tr.h_prev.data(), kHiddenDim, kHiddenDim, grad->u_r(),
                  nullptr);
  affine_input_grad(P.w_z(), daz, kHiddenDim, kHiddenDim, dp.data());
  affine_input_grad(P.w_r(), dar, kHiddenDim, kHiddenDim, dp.data());
  for (int i = 0; i < kHiddenDim; ++i) {
    double sz = 0.0, sr = 0.0;
    for (int k = 0; k < kHiddenDim; ++k) {
      sz += P.u_z()[static_cast<size_t>(k) * kHiddenDim + i] * daz[k];
      sr += P.u_r()[static_cast<size_t>(k) * kHiddenDim + i] * dar[k];
    }
    dh_prev[static_cast<size_t>(i)] += sz + sr;
  }

  // input projection
  dx->fill(0.0);
  affine_backward(dp.data(), tr.x.data(), kHiddenDim, kInputDim, grad->w_in(),
                  grad->b_in());
  affine_input_grad(P.w_in(), dp.data(), kHiddenDim, kInputDim, dx->data());
  *dh = dh_prev;
}

void embedding_backward(const PolicyParams& P, const std::vector<double>& counts,
                        const std::vector<double>& emb,
                        const std::vector<double>& de, PolicyParams* grad) {
  double* G = grad->emb();
  for (size_t r = 0; r < counts.size(); ++r) {
    if (counts[r] == 0.0) continue;
    for (int c = 0; c < kEmbeddingDim; ++c) {
      const double e = emb[static_cast<size_t>(c)];
      G[r * kEmbeddingDim + c] +=
          counts[r] * de[static_cast<size_t>(c)] * (1.0 - e * e);
    }
  }
}

double gaussian_logp(const std::array<double, kActDim>& a,
                     const std::array<double, kActDim>& mu,
                     const double* log_std) {
  double lp = 0.0;
  for (int i = 0; i < kActDim; ++i) {
    const double s = effective_sigma(log_std[i]);
    const double d = (a[static_cast<size_t>(i)] - mu[static_cast<size_t>(i)]) / s;
    lp += -0.5 * d * d - std::log(s) - kHalfLog2Pi;
  }
  return lp;
}

void Adam::step(std::vector<double>& params, const std::vector<double>& grad) {
  ++t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (size_t i = 0; i < params.size(); ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    params[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
  }
}

double global_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace dualmdp
