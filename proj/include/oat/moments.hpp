#ifndef OAT_MOMENTS_HPP
#define OAT_MOMENTS_HPP

#include <Eigen/Dense>
#include <optional>

namespace oat {

// First moments S_a = <S_a> and symmetrized covariances
// C_ab = <{S_a,S_b}>/2 - <S_a><S_b> of the collective spin.  This is both the
// state of the mean-field engine and the observable output of the exact
// engines.
struct SpinMoments {
  double sx = 0, sy = 0, sz = 0;
  double cxx = 0, cxy = 0, cxz = 0, cyy = 0, cyz = 0, czz = 0;

  Eigen::Vector3d spin() const { return {sx, sy, sz}; }
  Eigen::Matrix3d cov() const {
    Eigen::Matrix3d c;
    c << cxx, cxy, cxz, cxy, cyy, cyz, cxz, cyz, czz;
    return c;
  }
  double polarization() const { return spin().norm(); }

  // Smallest variance over directions perpendicular to the mean spin.
  // Undefined (nullopt) at zero polarization.
  std::optional<double> min_transverse_variance() const;

  // Coherent-spin state: polarization N/2 along axis, variance N/4 in both
  // transverse directions.
  static SpinMoments coherent(double N, const Eigen::Vector3d& axis);

  // Signal rotation e^{i phi S_y}: small phi > 0 tips +x polarization toward
  // +z.  S -> R S, C -> R C R^T.
  SpinMoments rotated_about_y(double phi) const;
};

// Wineland parameter xi_R^2 = N (dS_perp)^2_min / |<S>|^2; nullopt when the
// polarization vanishes.
std::optional<double> wineland_parameter(const SpinMoments& m, double N);

}  // namespace oat

#endif
