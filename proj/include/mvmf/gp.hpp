#pragma once

#include <memory>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "mvmf/flowfield.hpp"
#include "mvmf/tracks.hpp"

namespace mvmf {

struct Hyperparams {
  double length_scale = 100.0;  // meters
  double signal_std = 0.1;      // m/s
  double noise_std = 0.01;      // m/s

  void validate() const;
};

class SingularKernelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Posterior mean of a Gaussian process over velocity with a matrix-valued
/// divergence-free kernel: the squared-exponential stream-function kernel with
/// the curl operator applied on both arguments, so every mean field this
/// produces has zero divergence by construction.
class EstimatedField : public FlowField {
 public:
  EstimatedField(Rect workspace, std::vector<Measurement> training, Hyperparams hp);

  Vec2 velocity(const Vec2& p, double t) const override;

  /// Trace of the 2x2 posterior velocity covariance at p, (m/s)^2.
  double covariance_trace(const Vec2& p) const;

  const Hyperparams& hyperparams() const { return hp_; }
  const std::vector<Measurement>& training() const { return training_; }

 private:
  Eigen::Matrix2d kernel_block(const Vec2& a, const Vec2& b) const;

  std::vector<Measurement> training_;
  Hyperparams hp_;
  Eigen::LDLT<Eigen::MatrixXd> gram_ldlt_;
  Eigen::VectorXd alpha_;
};

/// Fits the divergence-free GP to the measurements. Throws SingularKernelError
/// if the Gram matrix is not numerically positive definite after the
/// documented 1e-8*sigma_f^2 jitter (typically: length scale too large or
/// duplicate measurement locations).
EstimatedField fit_divergence_free_gp(Rect workspace,
                                      const std::vector<Measurement>& measurements,
                                      const Hyperparams& hp);

}  // namespace mvmf
