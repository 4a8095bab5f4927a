#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "brodylab/common.hpp"
#include "brodylab/curves.hpp"

namespace brodylab::nevanlinna {

// Tabulated r -> (disk energy, T(r), running estimates).  radii are >= 1 and
// increasing; characteristic and disk_energy are nondecreasing.
struct EnergyProfile {
  std::vector<double> radii;
  std::vector<double> disk_energy;           // int_{|z|<=r} |df|^2 dxdy
  std::vector<double> characteristic;        // T(r) = int_1^r A(t)/t dt
  std::vector<double> mean_energy_running;   // 2 T(r) / (pi r^2)
  std::vector<double> packing_running;       // disk_energy / (pi r^2)
  std::vector<double> quadrature_error;      // per-radius refinement delta

  void write_csv(std::ostream& os) const;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

struct LimsupEstimate {
  double estimate = 0.0;      // max of the running quantity over the window
  double window_argmax = 0.0; // radius attaining it
  double trend_slope = 0.0;   // least-squares slope against 1/r (diagnostic)
};

// Disk energy int_{|z|<=t} |df|^2 with refinement until the relative change
// is < tol.  Throws QuadratureError (carrying the last estimate) on
// non-convergence.
QuadratureResult area_energy(const curves::CurveFamily& curve, double t,
                             double tol = 1e-6);

// Shimizu-Ahlfors characteristic T(r, f); T(1) = 0.
double characteristic(const curves::CurveFamily& curve, double r, double tol = 1e-6);

// Full profile over the given radii (all >= 1, increasing).
EnergyProfile profile(const curves::CurveFamily& curve, std::vector<double> radii,
                      double tol = 1e-6);

// Window maximum of 2T(r)/(pi r^2) over geometric samples in
// [r_max/2, r_max], plus a trend slope.  Requires r_max >= 4.
LimsupEstimate mean_energy_estimate(const curves::CurveFamily& curve, double r_max,
                                    double tol = 1e-6);
// Same with the packing integrand disk_energy/(pi r^2).
LimsupEstimate packing_density_estimate(const curves::CurveFamily& curve,
                                        double r_max, double tol = 1e-6);

// Divisor of poles with multiplicities; locations must be distinct.
struct PoleDivisor {
  std::vector<std::pair<Complex, int>> poles;
};

// Integrated counting function
//   N(r) = sum_{0 < |p| <= r} m_p log(r/|p|) + m_0 log r.
double counting_function(const PoleDivisor& poles, double r);

// Number of worker threads used by profile quadrature (results are
// schedule-independent).  0 resets to the hardware default.
void set_threads(int n);
int threads();

}  // namespace brodylab::nevanlinna
