#include <doctest.h>

#include <cmath>

#include "oat/ode.hpp"

using namespace oat;

TEST_CASE("dopri5 integrates exponential decay to tolerance") {
  OdeRhs f = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy = -2.0 * y; };
  Eigen::VectorXd y0(1);
  y0 << 1.0;
  auto y1 = integrate_to(f, y0, 0.0, 3.0, {.rtol = 1e-10, .atol = 1e-14});
  CHECK(y1[0] == doctest::Approx(std::exp(-6.0)).epsilon(1e-8));
}

TEST_CASE("dopri5 handles the harmonic oscillator over many periods") {
  OdeRhs f = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    dy.resize(2);
    dy[0] = y[1];
    dy[1] = -y[0];
  };
  Eigen::VectorXd y0(2);
  y0 << 1.0, 0.0;
  const double T = 20.0 * M_PI;
  auto y1 = integrate_to(f, y0, 0.0, T, {.rtol = 1e-10, .atol = 1e-12});
  CHECK(y1[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(y1[1] == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("dense output interpolates between nodes") {
  OdeRhs f = [](double t, const Eigen::VectorXd&, Eigen::VectorXd& dy) {
    dy.resize(1);
    dy[0] = std::cos(t);
  };
  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(1);
  DenseSolution sol = integrate_dense(f, y0, 0.0, 6.0, {});
  for (double t = 0.0; t <= 6.0; t += 0.037)
    CHECK(sol.eval(t)[0] == doctest::Approx(std::sin(t)).epsilon(1e-6));
}

TEST_CASE("sampling emits every requested time once") {
  OdeRhs f = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy = y; };
  Eigen::VectorXd y0(1);
  y0 << 1.0;
  std::vector<double> ts{0.0, 0.3, 0.7, 1.0};
  std::vector<double> got(ts.size(), -1.0);
  integrate_sampled(f, y0, 0.0, 1.0, ts,
                    [&](std::size_t i, double, const Eigen::VectorXd& y) { got[i] = y[0]; });
  for (std::size_t i = 0; i < ts.size(); ++i)
    CHECK(got[i] == doctest::Approx(std::exp(ts[i])).epsilon(1e-7));
}

TEST_CASE("zero-length integration returns the initial state") {
  OdeRhs f = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy = y; };
  Eigen::VectorXd y0(1);
  y0 << 4.2;
  CHECK(integrate_to(f, y0, 0.0, 0.0, {})[0] == 4.2);
}
