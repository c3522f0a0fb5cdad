#ifndef OAT_ODE_HPP
#define OAT_ODE_HPP

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace oat {

// Adaptive Dormand-Prince 5(4) with PI-free standard step control.  One
// integrator serves all engines: the mean-field system (9 reals), the Dicke
// block vector, and the brute-force density matrix, all flattened to
// real-valued state vectors.

struct OdeOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double h_max = 0.0;  // 0 = no cap
  long max_steps = 100000000L;
};

struct OdeError : std::runtime_error {
  double t_fail;
  OdeError(const std::string& msg, double t) : std::runtime_error(msg), t_fail(t) {}
};

using OdeRhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt)>;

// Trajectory with stored nodes; queries use cubic Hermite interpolation on
// the accepted steps.  Only suitable for small state vectors (the mean-field
// engine); the big engines use the sampling interface below.
class DenseSolution {
 public:
  double t_begin() const { return ts_.front(); }
  double t_end() const { return ts_.back(); }
  Eigen::VectorXd eval(double t) const;
  const std::vector<double>& node_times() const { return ts_; }
  const Eigen::VectorXd& node_state(std::size_t i) const { return ys_[i]; }

 private:
  friend DenseSolution integrate_dense(const OdeRhs&, Eigen::VectorXd, double, double,
                                       const OdeOptions&);
  std::vector<double> ts_;
  std::vector<Eigen::VectorXd> ys_;
  std::vector<Eigen::VectorXd> fs_;
};

DenseSolution integrate_dense(const OdeRhs& rhs, Eigen::VectorXd y0, double t0, double t1,
                              const OdeOptions& opt = {});

// Integrate to t1 and return only the final state (exact endpoint hit, no
// interpolation).
Eigen::VectorXd integrate_to(const OdeRhs& rhs, Eigen::VectorXd y0, double t0, double t1,
                             const OdeOptions& opt = {});

// Integrate once, emitting interpolated states at the (sorted, within
// [t0,t1]) sample times.  Memory stays O(state size).
void integrate_sampled(const OdeRhs& rhs, Eigen::VectorXd y0, double t0, double t1,
                       std::span<const double> sample_ts,
                       const std::function<void(std::size_t idx, double t, const Eigen::VectorXd& y)>& on_sample,
                       const OdeOptions& opt = {});

}  // namespace oat

#endif
