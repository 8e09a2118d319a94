#pragma once

#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "xplain/kernel.hpp"

namespace xplain {

/// Zero-mean GP posterior over triples conditioned on noisy rewards.
///
///   mean(ξ)     = k_T(ξ)ᵀ (K_T + σ²I)⁻¹ f_T
///   variance(ξ) = k(ξ, ξ) − k_T(ξ)ᵀ (K_T + σ²I)⁻¹ k_T(ξ)
///
/// The inverse is never formed: the lower Cholesky factor L of K_T + σ²I is
/// kept together with α = (K_T + σ²I)⁻¹ f_T. Instances are immutable;
/// append_observation returns a new posterior.
class GpPosterior {
 public:
  /// Prior (T = 0).
  GpPosterior(KernelExpr kernel, double sigma2);

  /// Throws InputError on size mismatch, sigma2 <= 0 or mixed triple shapes;
  /// InternalError if K_T + σ²I is not numerically positive definite.
  static GpPosterior fit(KernelExpr kernel, std::vector<Triple> triples,
                         std::vector<double> rewards, double sigma2);

  double posterior_mean(const Triple& query) const;
  /// Clamped at 0 for rounding in [-1e-9, 0); InternalError below that.
  double posterior_var(const Triple& query) const;

  struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
  };
  Prediction predict(const Triple& query) const;

  /// Extends the Cholesky factor by one row, O(T²).
  GpPosterior append_observation(const Triple& triple, double reward) const&;
  GpPosterior append_observation(const Triple& triple, double reward) &&;

  std::size_t size() const { return triples_.size(); }
  double sigma2() const { return sigma2_; }
  const KernelExpr& kernel() const { return kernel_; }
  const std::vector<Triple>& triples() const { return triples_; }
  const std::vector<double>& rewards() const { return rewards_; }

 private:
  void check_shape(const Triple& query) const;
  Eigen::VectorXd cross_covariance(const Triple& query) const;
  void extend(const Triple& triple, double reward);
  void refresh_weights();

  KernelExpr kernel_;
  double sigma2_;
  std::vector<Triple> triples_;
  std::vector<double> rewards_;
  Eigen::MatrixXd chol_;  // lower factor, size T x T
  Eigen::VectorXd alpha_;
};

}  // namespace xplain
