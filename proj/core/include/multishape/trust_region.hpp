#pragma once

#include <Eigen/Dense>
#include <vector>

namespace multishape {

/// Value of the local quadratic model relative to the current energy:
/// g'p + 0.5 p'Hp.
double model_decrease(const Eigen::VectorXd& g, const Eigen::MatrixXd& hessian,
                      const Eigen::VectorXd& p);

/// Steepest-descent minimizer of the quadratic model inside the ball.
Eigen::VectorXd cauchy_point(const Eigen::VectorXd& g, const Eigen::MatrixXd& hessian,
                             double radius);

/// Dogleg path point for positive definite H (kInvalidArgument otherwise).
Eigen::VectorXd dogleg_step(const Eigen::VectorXd& g, const Eigen::MatrixXd& hessian,
                            double radius);

/// Minimizer of g'p + 0.5 p'Hp subject to |p| <= radius. For positive definite
/// H this is the exact solution (never worse than the dogleg point); otherwise
/// the Cauchy point. Throws kZeroGradient for a zero gradient.
Eigen::VectorXd trust_region_step(const Eigen::VectorXd& g, const Eigen::MatrixXd& hessian,
                                  double radius);

/// Symmetric-rank-one quasi-Newton approximation seeded with the identity.
class Sr1Hessian {
 public:
  explicit Sr1Hessian(int dim) : matrix_(Eigen::MatrixXd::Identity(dim, dim)) {}

  /// Applies the update for step s and gradient change y. Returns false when
  /// the safeguard |s'(y - Hs)| <= 1e-8 |s| |y - Hs| skips it.
  bool update(const Eigen::VectorXd& s, const Eigen::VectorXd& y);

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }

 private:
  Eigen::MatrixXd matrix_;
};

struct SecantPair {
  Eigen::VectorXd step;
  Eigen::VectorXd gradient_change;
};

/// Replays `history` through Sr1Hessian; empty history yields the identity.
Eigen::MatrixXd hessian_approx(int dim, const std::vector<SecantPair>& history);

}  // namespace multishape
