#include "multishape/trust_region.hpp"

#include <cmath>

#include "multishape/error.hpp"

namespace multishape {

double model_decrease(const Eigen::VectorXd& g, const Eigen::MatrixXd& hessian,
                      const Eigen::VectorXd& p) {
  return g.dot(p) + 0.5 * p.dot(hessian * p);
}

Eigen::VectorXd cauchy_point(const Eigen::VectorXd& g, const Eigen::MatrixXd& hessian,
                             double radius) {
  const double gnorm = g.norm();
  const double curvature = g.dot(hessian * g);
  double tau = 1.0;
  if (curvature > 0.0) {
    tau = std::min(1.0, gnorm * gnorm * gnorm / (radius * curvature));
  }
  return -(tau * radius / gnorm) * g;
}

namespace {

void check_problem(const Eigen::VectorXd& g, const Eigen::MatrixXd& hessian, double radius) {
  if (g.size() != hessian.rows() || hessian.rows() != hessian.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "gradient and Hessian sizes disagree");
  }
  if (!(radius > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "trust radius must be positive");
  }
  if (g.norm() == 0.0) {
    throw Error(ErrorCode::kZeroGradient, "gradient vanishes; stationary point");
  }
}

// Rescaling can overshoot the radius by an ulp; shrink until it does not.
Eigen::VectorXd clip_to_ball(Eigen::VectorXd p, double radius) {
  for (double norm = p.norm(); norm > radius; norm = p.norm()) {
    p *= std::nextafter(radius / norm, 0.0);
  }
  return p;
}

Eigen::VectorXd dogleg_from_newton(const Eigen::VectorXd& g, const Eigen::MatrixXd& hessian,
                                   const Eigen::VectorXd& newton, double radius) {
  if (newton.norm() <= radius) return newton;
  const double gnorm = g.norm();
  const double curvature = g.dot(hessian * g);
  const Eigen::VectorXd unconstrained = -(gnorm * gnorm / curvature) * g;
  const double unorm = unconstrained.norm();
  if (unorm >= radius) return clip_to_ball(-(radius / gnorm) * g, radius);

  // Boundary crossing of the leg from the steepest-descent minimizer to the
  // Newton point: |u + tau (n - u)| = radius with tau in [0, 1].
  const Eigen::VectorXd leg = newton - unconstrained;
  const double a = leg.squaredNorm();
  const double b = 2.0 * unconstrained.dot(leg);
  const double c = unorm * unorm - radius * radius;
  const double disc = std::sqrt(std::max(0.0, b * b - 4.0 * a * c));
  // c < 0, so the positive root; this form avoids cancellation when b > 0.
  const double tau = b > 0.0 ? (-2.0 * c) / (b + disc) : (-b + disc) / (2.0 * a);
  return clip_to_ball(unconstrained + tau * leg, radius);
}

// Global minimizer on the ball for positive definite H: p(mu) = -(H + mu I)^-1 g
// with |p(mu)| = radius, found by bisection on the monotone secular function.
Eigen::VectorXd exact_step(const Eigen::VectorXd& g, const Eigen::MatrixXd& hessian,
                           double radius) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hessian);
  const Eigen::VectorXd lambda = eig.eigenvalues();
  const Eigen::VectorXd gq = eig.eigenvectors().transpose() * g;
  auto step = [&](double mu) {
    return Eigen::VectorXd(-(eig.eigenvectors() *
                             (gq.array() / (lambda.array() + mu)).matrix()));
  };
  Eigen::VectorXd p = step(0.0);
  if (p.norm() <= radius) return p;
  double lo = 0.0;
  double hi = g.norm() / radius;  // |p(hi)| <= |g| / hi = radius
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (step(mid).norm() > radius ? lo : hi) = mid;
  }
  return clip_to_ball(step(hi), radius);
}

}  // namespace

Eigen::VectorXd dogleg_step(const Eigen::VectorXd& g, const Eigen::MatrixXd& hessian,
                            double radius) {
  check_problem(g, hessian, radius);
  Eigen::LLT<Eigen::MatrixXd> llt(hessian);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kInvalidArgument, "dogleg needs a positive definite Hessian");
  }
  return dogleg_from_newton(g, hessian, -llt.solve(g), radius);
}

Eigen::VectorXd trust_region_step(const Eigen::VectorXd& g, const Eigen::MatrixXd& hessian,
                                  double radius) {
  check_problem(g, hessian, radius);
  Eigen::LLT<Eigen::MatrixXd> llt(hessian);
  if (llt.info() != Eigen::Success) return clip_to_ball(cauchy_point(g, hessian, radius), radius);

  const Eigen::VectorXd newton = -llt.solve(g);
  if (newton.norm() <= radius) return newton;
  // The exact boundary solution is optimal in exact arithmetic; the dogleg
  // point guards against an ill-conditioned eigendecomposition.
  Eigen::VectorXd exact = exact_step(g, hessian, radius);
  Eigen::VectorXd dogleg = dogleg_from_newton(g, hessian, newton, radius);
  return model_decrease(g, hessian, exact) <= model_decrease(g, hessian, dogleg) ? exact
                                                                                : dogleg;
}

bool Sr1Hessian::update(const Eigen::VectorXd& s, const Eigen::VectorXd& y) {
  if (s.size() != dim() || y.size() != dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "secant pair size does not match Hessian");
  }
  const Eigen::VectorXd r = y - matrix_ * s;
  const double denom = r.dot(s);
  if (std::abs(denom) <= 1e-8 * s.norm() * r.norm() || denom == 0.0) return false;
  matrix_ += (r * r.transpose()) / denom;
  matrix_ = 0.5 * (matrix_ + matrix_.transpose());
  return true;
}

Eigen::MatrixXd hessian_approx(int dim, const std::vector<SecantPair>& history) {
  Sr1Hessian h(dim);
  for (const auto& pair : history) h.update(pair.step, pair.gradient_change);
  return h.matrix();
}

}  // namespace multishape
