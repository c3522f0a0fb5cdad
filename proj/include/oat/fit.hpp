#ifndef OAT_FIT_HPP
#define OAT_FIT_HPP

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace oat {

struct FitResult {
  Eigen::VectorXd params;
  Eigen::VectorXd stderrs;      // from the Jacobian at the optimum
  double residual_norm = 0.0;   // sqrt(sum of squared residuals)
  bool converged = false;
  int iterations = 0;
  double window_lo = 0.0, window_hi = 0.0;
  std::string detail;
};

// Deterministic Levenberg-Marquardt with forward-difference Jacobian: fixed
// initialization, fixed iteration cap, no randomness.  model(x, p) evaluates
// the fit function at abscissa x.
FitResult fit_least_squares(const std::function<double(double, const Eigen::VectorXd&)>& model,
                            const std::vector<double>& xs, const std::vector<double>& ys,
                            Eigen::VectorXd initial, double ftol = 1e-12, int max_iter = 200);

// Straight line y = a + b x by linear least squares, with parameter standard
// errors.  params = (a, b).
FitResult fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace oat

#endif
