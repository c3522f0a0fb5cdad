#include "oat/fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oat {

namespace {

Eigen::VectorXd residuals(const std::function<double(double, const Eigen::VectorXd&)>& model,
                          const std::vector<double>& xs, const std::vector<double>& ys,
                          const Eigen::VectorXd& p) {
  Eigen::VectorXd r(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) r[i] = model(xs[i], p) - ys[i];
  return r;
}

Eigen::MatrixXd jacobian(const std::function<double(double, const Eigen::VectorXd&)>& model,
                         const std::vector<double>& xs, const Eigen::VectorXd& p,
                         const Eigen::VectorXd& f0,
                         const std::vector<double>& ys) {
  const Eigen::Index n = static_cast<Eigen::Index>(xs.size()), np = p.size();
  Eigen::MatrixXd J(n, np);
  for (Eigen::Index j = 0; j < np; ++j) {
    const double h = 1e-7 * std::max(1.0, std::abs(p[j]));
    Eigen::VectorXd pj = p;
    pj[j] += h;
    const Eigen::VectorXd fj = residuals(model, xs, ys, pj);
    J.col(j) = (fj - f0) / h;
  }
  return J;
}

}  // namespace

FitResult fit_least_squares(const std::function<double(double, const Eigen::VectorXd&)>& model,
                            const std::vector<double>& xs, const std::vector<double>& ys,
                            Eigen::VectorXd p, double ftol, int max_iter) {
  if (xs.size() != ys.size() || xs.empty())
    throw std::invalid_argument("fit_least_squares: bad data");
  if (xs.size() < static_cast<std::size_t>(p.size()))
    throw std::invalid_argument("fit_least_squares: fewer points than parameters");

  const Eigen::Index np = p.size();
  double mu = 1e-3;
  Eigen::VectorXd f = residuals(model, xs, ys, p);
  double cost = f.squaredNorm();
  FitResult res;

  int it = 0;
  for (; it < max_iter; ++it) {
    const Eigen::MatrixXd J = jacobian(model, xs, p, f, ys);
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * f;
    if (g.lpNorm<Eigen::Infinity>() < 1e-14) {
      res.converged = true;
      break;
    }
    bool moved = false;
    for (int tries = 0; tries < 40; ++tries) {
      Eigen::MatrixXd A = JtJ;
      A.diagonal().array() += mu * JtJ.diagonal().array().max(1e-12);
      const Eigen::VectorXd step = A.ldlt().solve(-g);
      const Eigen::VectorXd pn = p + step;
      const Eigen::VectorXd fn = residuals(model, xs, ys, pn);
      const double cn = fn.squaredNorm();
      if (cn < cost) {
        const double drop = cost - cn;
        p = pn;
        f = fn;
        const bool small = drop <= ftol * std::max(cost, 1e-300) || step.norm() < 1e-13;
        cost = cn;
        mu = std::max(mu / 3.0, 1e-12);
        moved = true;
        if (small) res.converged = true;
        break;
      }
      mu *= 4.0;
      if (mu > 1e12) break;
    }
    if (res.converged || !moved) break;
  }

  res.params = p;
  res.residual_norm = std::sqrt(cost);
  res.iterations = it;
  if (!res.converged && it >= max_iter) res.detail = "iteration cap reached";
  if (!res.converged && res.detail.empty()) res.detail = "no descent step found";

  // parameter covariance estimate from the final Jacobian
  const Eigen::MatrixXd J = jacobian(model, xs, p, f, ys);
  const Eigen::Index dof = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(xs.size()) - np);
  const double s2 = cost / static_cast<double>(dof);
  const Eigen::MatrixXd JtJ = J.transpose() * J;
  const Eigen::MatrixXd cov = s2 * JtJ.completeOrthogonalDecomposition().pseudoInverse();
  res.stderrs.resize(np);
  for (Eigen::Index j = 0; j < np; ++j)
    res.stderrs[j] = std::sqrt(std::max(0.0, cov(j, j)));
  return res;
}

FitResult fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw std::invalid_argument("fit_line: bad data");
  const auto n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double det = n * sxx - sx * sx;
  if (det == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  const double b = (n * sxy - sx * sy) / det;
  const double a = (sy - b * sx) / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (a + b * xs[i]);
    ss += r * r;
  }
  FitResult res;
  res.params.resize(2);
  res.params << a, b;
  res.residual_norm = std::sqrt(ss);
  res.converged = true;
  res.stderrs.resize(2);
  if (xs.size() > 2) {
    const double s2 = ss / (n - 2.0);
    res.stderrs << std::sqrt(s2 * sxx / det), std::sqrt(s2 * n / det);
  } else {
    res.stderrs << 0.0, 0.0;
  }
  res.window_lo = *std::min_element(xs.begin(), xs.end());
  res.window_hi = *std::max_element(xs.begin(), xs.end());
  return res;
}

}  // namespace oat
