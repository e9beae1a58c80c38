#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dualmdp/embedding.hpp"
#include "dualmdp/geometry.hpp"

namespace dualmdp {

// Language-conditioned recurrent policy: a GRU over a projected input of
// [obs(6), prev action(4), prev reward(1), done flag(1), instruction
// embedding(16)], with a squashed-Gaussian action head, a global log-std and
// a scalar value head.  Parameters live in one flat vector so the optimizer
// and the finite-difference checks can treat them uniformly.
constexpr int kObsDim = 6;
constexpr int kActDim = 4;
constexpr int kHiddenDim = 64;
constexpr int kInputDim = kObsDim + kActDim + 1 + 1 + kEmbeddingDim;

struct PolicyParams {
  int vocab_size = 0;
  std::vector<double> flat;
  uint64_t seed = 0;

  static PolicyParams init(int vocab_size, uint64_t seed);

  size_t size() const { return flat.size(); }
  uint64_t hash() const;

  // Views into the flat vector (row-major matrices).
  double* emb() { return flat.data() + off_emb_; }            // V x 16
  double* w_in() { return flat.data() + off_w_in_; }          // H x In
  double* b_in() { return flat.data() + off_b_in_; }          // H
  double* w_z() { return flat.data() + off_w_z_; }            // H x H
  double* u_z() { return flat.data() + off_u_z_; }
  double* b_z() { return flat.data() + off_b_z_; }
  double* w_r() { return flat.data() + off_w_r_; }
  double* u_r() { return flat.data() + off_u_r_; }
  double* b_r() { return flat.data() + off_b_r_; }
  double* w_h() { return flat.data() + off_w_h_; }
  double* u_h() { return flat.data() + off_u_h_; }
  double* b_h() { return flat.data() + off_b_h_; }
  double* w_mu() { return flat.data() + off_w_mu_; }          // 4 x H
  double* b_mu() { return flat.data() + off_b_mu_; }          // 4
  double* log_std() { return flat.data() + off_log_std_; }    // 4
  double* w_v() { return flat.data() + off_w_v_; }            // H
  double* b_v() { return flat.data() + off_b_v_; }            // 1
  const double* emb() const { return flat.data() + off_emb_; }
  const double* w_in() const { return flat.data() + off_w_in_; }
  const double* b_in() const { return flat.data() + off_b_in_; }
  const double* w_z() const { return flat.data() + off_w_z_; }
  const double* u_z() const { return flat.data() + off_u_z_; }
  const double* b_z() const { return flat.data() + off_b_z_; }
  const double* w_r() const { return flat.data() + off_w_r_; }
  const double* u_r() const { return flat.data() + off_u_r_; }
  const double* b_r() const { return flat.data() + off_b_r_; }
  const double* w_h() const { return flat.data() + off_w_h_; }
  const double* u_h() const { return flat.data() + off_u_h_; }
  const double* b_h() const { return flat.data() + off_b_h_; }
  const double* w_mu() const { return flat.data() + off_w_mu_; }
  const double* b_mu() const { return flat.data() + off_b_mu_; }
  const double* log_std() const { return flat.data() + off_log_std_; }
  const double* w_v() const { return flat.data() + off_w_v_; }
  const double* b_v() const { return flat.data() + off_b_v_; }

  void compute_offsets();
  PolicyParams zeros_like() const;

 private:
  size_t off_emb_ = 0, off_w_in_ = 0, off_b_in_ = 0;
  size_t off_w_z_ = 0, off_u_z_ = 0, off_b_z_ = 0;
  size_t off_w_r_ = 0, off_u_r_ = 0, off_b_r_ = 0;
  size_t off_w_h_ = 0, off_u_h_ = 0, off_b_h_ = 0;
  size_t off_w_mu_ = 0, off_b_mu_ = 0, off_log_std_ = 0;
  size_t off_w_v_ = 0, off_b_v_ = 0;
};

// Per-step activations retained for backprop through time.
struct CellTrace {
  std::array<double, kInputDim> x;
  std::array<double, kHiddenDim> p, z, r, hc, rh, h_prev, h;
  std::array<double, kActDim> u, mu;  // pre-squash and squashed mean
  double v = 0.0;
};

// Action mean squashing: displacement dims in [-0.05, 0.05], force in [0, 1].
std::array<double, kActDim> squash_mean(const std::array<double, kActDim>& u);
std::array<double, kActDim> squash_scale();  // d(mu)/d(tanh u) per dim

// Effective per-dim stddev with exploration floor/ceiling.
double effective_sigma(double log_std);

// tanh(W_emb^T counts); counts has vocab_size entries.
std::vector<double> embed_counts(const PolicyParams& P,
                                 const std::vector<double>& counts);

void build_input(const Obs& obs, const std::array<double, kActDim>& prev_action,
                 double prev_reward, double done_flag,
                 const std::vector<double>& emb,
                 std::array<double, kInputDim>* x);

// One GRU step; h_prev may alias trace->h_prev.
void policy_step(const PolicyParams& P, const std::array<double, kInputDim>& x,
                 const std::array<double, kHiddenDim>& h_prev, CellTrace* tr);

// Backward through one step.  dmu/dv/dh are upstream gradients; on return
// *dh holds the gradient w.r.t. h_prev and *dx the input gradient.
void policy_backward_step(const PolicyParams& P, const CellTrace& tr,
                          const std::array<double, kActDim>& dmu, double dv,
                          std::array<double, kHiddenDim>* dh,
                          std::array<double, kInputDim>* dx,
                          PolicyParams* grad);

// Embedding backward: de is the gradient w.r.t. the tanh'd embedding.
void embedding_backward(const PolicyParams& P, const std::vector<double>& counts,
                        const std::vector<double>& emb,
                        const std::vector<double>& de, PolicyParams* grad);

double gaussian_logp(const std::array<double, kActDim>& a,
                     const std::array<double, kActDim>& mu,
                     const double* log_std);

// Adam over flat parameter vectors.
struct Adam {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<double> m, v;
  long t = 0;

  explicit Adam(size_t n, double lr_) : lr(lr_), m(n, 0.0), v(n, 0.0) {}
  void step(std::vector<double>& params, const std::vector<double>& grad);
};

double global_norm(const std::vector<double>& v);

}  // namespace dualmdp
