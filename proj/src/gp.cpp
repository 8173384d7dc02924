#include "mvmf/gp.hpp"

#include <cmath>

namespace mvmf {

void Hyperparams::validate() const {
  if (length_scale <= 0.0 || signal_std <= 0.0 || noise_std <= 0.0) {
    throw std::invalid_argument("hyperparameters must be strictly positive");
  }
}

EstimatedField::EstimatedField(Rect workspace, std::vector<Measurement> training,
                               Hyperparams hp)
    : FlowField(workspace), training_(std::move(training)), hp_(hp) {
  hp_.validate();
  if (training_.empty()) throw std::invalid_argument("need at least 1 measurement");

  const size_t n = training_.size();
  Eigen::MatrixXd K(2 * n, 2 * n);
  Eigen::VectorXd y(2 * n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      K.block<2, 2>(2 * i, 2 * j) = kernel_block(training_[i].p, training_[j].p);
    }
    y(2 * i) = training_[i].v.x;
    y(2 * i + 1) = training_[i].v.y;
  }
  double sn2 = hp_.noise_std * hp_.noise_std;
  double jitter = 1e-8 * hp_.signal_std * hp_.signal_std;
  K.diagonal().array() += sn2 + jitter;

  gram_ldlt_.compute(K);
  // A pivot at the jitter floor (ratio ~1e-8 of the leading pivot) means the
  // kernel itself collapsed and only the regularization is holding it up.
  if (gram_ldlt_.info() != Eigen::Success ||
      gram_ldlt_.vectorD().minCoeff() <= 3e-8 * gram_ldlt_.vectorD().maxCoeff()) {
    throw SingularKernelError(
        "divergence-free kernel matrix numerically singular (length_scale=" +
        std::to_string(hp_.length_scale) + "); check for duplicate points");
  }
  alpha_ = gram_ldlt_.solve(y);
}

Eigen::Matrix2d EstimatedField::kernel_block(const Vec2& a, const Vec2& b) const {
  // Stream-function kernel sf^2 l^2 exp(-|d|^2 / 2 l^2), curl applied on both
  // arguments. The l^2 scaling makes signal_std the velocity prior std:
  // K(0) = sf^2 I.
  double l2 = hp_.length_scale * hp_.length_scale;
  Vec2 d = a - b;
  double k = hp_.signal_std * hp_.signal_std * std::exp(-(d.x * d.x + d.y * d.y) / (2.0 * l2));
  Eigen::Matrix2d out;
  out(0, 0) = (1.0 - d.y * d.y / l2) * k;
  out(0, 1) = (d.x * d.y / l2) * k;
  out(1, 0) = out(0, 1);
  out(1, 1) = (1.0 - d.x * d.x / l2) * k;
  return out;
}

Vec2 EstimatedField::velocity(const Vec2& p, double) const {
  double u = 0.0, v = 0.0;
  for (size_t i = 0; i < training_.size(); ++i) {
    Eigen::Matrix2d kq = kernel_block(p, training_[i].p);
    u += kq(0, 0) * alpha_(2 * i) + kq(0, 1) * alpha_(2 * i + 1);
    v += kq(1, 0) * alpha_(2 * i) + kq(1, 1) * alpha_(2 * i + 1);
  }
  return {u, v};
}

double EstimatedField::covariance_trace(const Vec2& p) const {
  const size_t n = training_.size();
  Eigen::MatrixXd kq(2 * n, 2);
  for (size_t i = 0; i < n; ++i) {
    kq.block<2, 2>(2 * i, 0) = kernel_block(training_[i].p, p);
  }
  Eigen::MatrixXd sol = gram_ldlt_.solve(kq);
  Eigen::Matrix2d post = kernel_block(p, p) - kq.transpose() * sol;
  return post.trace();
}

EstimatedField fit_divergence_free_gp(Rect workspace,
                                      const std::vector<Measurement>& measurements,
                                      const Hyperparams& hp) {
  return EstimatedField(workspace, measurements, hp);
}

}  // namespace mvmf
