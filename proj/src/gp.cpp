#include "xplain/gp.hpp"

#include <cmath>
#include <sstream>

#include "xplain/error.hpp"

namespace xplain {

namespace {
constexpr double kVarianceTolerance = 1e-9;
}

GpPosterior::GpPosterior(KernelExpr kernel, double sigma2)
    : kernel_(std::move(kernel)), sigma2_(sigma2) {
  if (!(sigma2 > 0.0 && std::isfinite(sigma2))) {
    throw InputError("GP noise variance must be positive and finite");
  }
}

GpPosterior GpPosterior::fit(KernelExpr kernel, std::vector<Triple> triples,
                             std::vector<double> rewards, double sigma2) {
  if (triples.size() != rewards.size()) {
    throw InputError("fit: " + std::to_string(triples.size()) + " triples but " +
                     std::to_string(rewards.size()) + " rewards");
  }
  GpPosterior gp(std::move(kernel), sigma2);
  const auto n = static_cast<Eigen::Index>(triples.size());
  if (n == 0) return gp;

  const TripleShape shape = shape_of(triples.front());
  for (const auto& t : triples) {
    if (shape_of(t) != shape) throw InputError("fit: triples differ in structure");
  }

  Eigen::MatrixXd k = gram(gp.kernel_, triples);
  k.diagonal().array() += sigma2;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) {
    const Eigen::VectorXd d = k.diagonal();
    std::ostringstream msg;
    msg << "fit: K + sigma2*I is not positive definite (T=" << n << ", sigma2=" << sigma2
        << ", diag range [" << d.minCoeff() << ", " << d.maxCoeff()
        << "]); the kernel is probably not PSD";
    throw InternalError(msg.str());
  }
  gp.chol_ = llt.matrixL();
  gp.triples_ = std::move(triples);
  gp.rewards_ = std::move(rewards);
  gp.refresh_weights();
  return gp;
}

void GpPosterior::refresh_weights() {
  const Eigen::Map<const Eigen::VectorXd> f(rewards_.data(), static_cast<Eigen::Index>(rewards_.size()));
  alpha_ = chol_.triangularView<Eigen::Lower>().solve(f);
  chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha_);
}

void GpPosterior::check_shape(const Triple& query) const {
  if (!triples_.empty() && shape_of(query) != shape_of(triples_.front())) {
    throw InputError("query triple differs in structure from the training triples");
  }
}

Eigen::VectorXd GpPosterior::cross_covariance(const Triple& query) const {
  Eigen::VectorXd k(static_cast<Eigen::Index>(triples_.size()));
  for (std::size_t i = 0; i < triples_.size(); ++i) {
    k[static_cast<Eigen::Index>(i)] = kernel_(triples_[i], query);
  }
  return k;
}

GpPosterior::Prediction GpPosterior::predict(const Triple& query) const {
  check_shape(query);
  const double prior = kernel_(query, query);
  if (triples_.empty()) return {0.0, prior};

  const Eigen::VectorXd k = cross_covariance(query);
  const double mean = k.dot(alpha_);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
  double var = prior - v.squaredNorm();
  if (var < 0.0) {
    if (var < -kVarianceTolerance) {
      std::ostringstream msg;
      msg << "posterior variance " << var << " below tolerance (T=" << triples_.size() << ")";
      throw InternalError(msg.str());
    }
    var = 0.0;
  }
  return {mean, var};
}

double GpPosterior::posterior_mean(const Triple& query) const {
  check_shape(query);
  if (triples_.empty()) return 0.0;
  return cross_covariance(query).dot(alpha_);
}

double GpPosterior::posterior_var(const Triple& query) const { return predict(query).variance; }

void GpPosterior::extend(const Triple& triple, double reward) {
  check_shape(triple);
  const auto n = static_cast<Eigen::Index>(triples_.size());
  const Eigen::VectorXd k = cross_covariance(triple);
  const double diag = kernel_(triple, triple) + sigma2_;

  Eigen::VectorXd row = n > 0 ? Eigen::VectorXd(chol_.triangularView<Eigen::Lower>().solve(k))
                              : Eigen::VectorXd{};
  const double pivot2 = diag - row.squaredNorm();
  if (!(pivot2 > 0.0)) {
    std::ostringstream msg;
    msg << "append_observation: Cholesky pivot " << pivot2 << " is not positive (T=" << n
        << ", sigma2=" << sigma2_ << "); the kernel is probably not PSD";
    throw InternalError(msg.str());
  }

  chol_.conservativeResize(n + 1, n + 1);
  chol_.row(n).head(n) = row.transpose();
  chol_.col(n).head(n).setZero();
  chol_(n, n) = std::sqrt(pivot2);

  triples_.push_back(triple);
  rewards_.push_back(reward);
  refresh_weights();
}

GpPosterior GpPosterior::append_observation(const Triple& triple, double reward) const& {
  GpPosterior next = *this;
  next.extend(triple, reward);
  return next;
}

GpPosterior GpPosterior::append_observation(const Triple& triple, double reward) && {
  extend(triple, reward);
  return std::move(*this);
}

}  // namespace xplain
