#pragma once

#include <vector>

#include "brodylab/common.hpp"

namespace brodylab::curves {

// Rank-2 lattice in the plane.  delta obeys the separation condition
// 2*delta <= |lambda1 - lambda2| for distinct lattice points; by default it
// is half the shortest nonzero vector (the largest admissible value).
class Lattice {
 public:
  Lattice(Complex omega1, Complex omega2);
  Lattice(Complex omega1, Complex omega2, double delta);

  Complex omega1() const { return omega1_; }
  Complex omega2() const { return omega2_; }
  double covolume() const { return covolume_; }
  double delta() const { return delta_; }
  double shortest_vector() const { return shortest_; }
  // Upper bound on the covering radius (half the longer diagonal of the
  // reduced fundamental parallelogram; exact for rectangular lattices).
  double covering_radius() const { return covering_; }
  double longest_generator() const;

  // Lattice point from integer coordinates in the reduced basis.
  Complex point(std::int64_t i, std::int64_t j) const;

  // Integer coordinates of the lattice point nearest to z.  Ties are broken
  // toward smaller |lambda|, then smaller arg.  If tie_gap is non-null it
  // receives d(second) - d(best), for ambiguity detection by callers.
  void nearest(Complex z, std::int64_t& i, std::int64_t& j,
               double* tie_gap = nullptr) const;
  Complex nearest_point(Complex z) const;
  double distance_to_lattice(Complex z) const;

  // All lattice points with |lambda - center| <= R, ordered by
  // (|lambda - center|, arg(lambda - center)).
  std::vector<Complex> points_in_disk(Complex center, double R) const;
  // Same points as integer coordinate pairs (unsorted, row-major); the fast
  // path used by curve evaluation.
  void indices_in_disk(Complex center, double R,
                       std::vector<std::pair<std::int64_t, std::int64_t>>& out) const;

  // Distinct radii |lambda| <= R, sorted ascending (used to align quadrature
  // panels with lattice rings).
  std::vector<double> ring_radii(double R) const;

  // Upper bound for sum_{|lambda - c| > R} |z - lambda|^{-s} (any window
  // center c, by translation invariance of the Voronoi argument):
  //   (2 pi / covol) * [ (R - 2 rho)^{2-s}/(s-2) + rho (R - 2 rho)^{1-s}/(s-1) ]
  // with rho the covering-radius bound.  Monotone decreasing in R.
  // Throws Error(DivergentSum) for s <= 2; requires R > 2 rho.
  double tail_bound(double s, double R) const;

  // Upper bound for sup over |z - lambda0| < delta of
  // sum_{lambda != lambda0} |z - lambda|^{-s}  (the near-pole constant of the
  // truncation analysis).
  double c2_bound(double s) const;

  // Full-lattice sums G_s = sum_{lambda != 0} lambda^{-s} for s = 4,6,8,10
  // (odd s vanish by symmetry), computed by direct disk summation of radius
  // R_G.  Cached after the first call.
  Complex eisenstein(int s, double R_G = 0.0) const;

 private:
  void init();

  Complex omega1_, omega2_;   // reduced basis
  double covolume_ = 0.0;
  double delta_ = 0.0;
  double shortest_ = 0.0;
  double covering_ = 0.0;
  mutable Complex G_[4] = {};       // s = 4, 6, 8, 10
  mutable bool G_ready_ = false;
};

}  // namespace brodylab::curves
