#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "brodylab/common.hpp"
#include "brodylab/curves.hpp"

namespace brodylab::brody {

// Scan region for sup-norm estimation.
struct Region {
  enum class Kind {
    Rectangle,          // axis-aligned [lo.re, hi.re] x [lo.im, hi.im]
    FundamentalDomain,  // one period cell (requires a periodic curve)
    Block3x3,           // 3x3 block of fundamental domains centered at 0
  };
  Kind kind = Kind::Rectangle;
  Complex lo{}, hi{};

  static Region rectangle(Complex lo, Complex hi) {
    return Region{Kind::Rectangle, lo, hi};
  }
  static Region fundamental_domain() { return Region{Kind::FundamentalDomain}; }
  static Region block3x3() { return Region{Kind::Block3x3}; }
  std::string describe() const;
};

struct SupNormReport {
  std::string curve_id;
  std::string region;
  int grid_levels = 0;
  double sup_estimate = 0.0;  // max of |df| over the finest grid
  std::vector<double> refinement_deltas;
  bool converged = false;
  // sup_estimate inflated by the last refinement delta and tol; what
  // brody_rescale should be fed so the rescaled curve is Brody within tol.
  double sup_upper() const;
};

// Grid maximum of energy_density^{1/2}; the grid is halved until successive
// sups differ by < tol (charts are used automatically near lattice poles).
// Non-convergence is reported with converged = false, not an error.
SupNormReport sup_norm_estimate(const curves::CurveFamily& curve, const Region& region,
                                double tol = 1e-4, int max_levels = 12);

// rescale(curve, sup): the returned curve satisfies |dg| = |df|(z/sup)/sup,
// so the sup-norm estimate drops to ~1.  sup must be positive (and an upper
// bound for ||df|| if the result is to be Brody).
curves::CurveFamily brody_rescale(const curves::CurveFamily& curve, double sup);

struct Prop31Row {
  int N = 0;
  int trial = 0;
  double sup = 0.0;
  bool converged = false;
};

struct Prop31Summary {
  int N = 0;
  double max_sup = 0.0;
  double mean_sup = 0.0;
};

struct Prop31Result {
  std::vector<Prop31Row> rows;         // ordered by (N, trial)
  std::vector<Prop31Summary> summary;  // one per N in input order
  double baseline_sup = 0.0;           // max sup at the smallest N
  void write_csv(std::ostream& os) const;
};

// For each N, draws `trials` random coefficient patterns (seeded
// deterministically from `seed`), estimates sup|df_a| over a 3x3 block of
// fundamental domains plus chart neighborhoods, and tabulates the results.
Prop31Result prop31_experiment(const curves::Lattice& lat, double A,
                               const std::vector<int>& N_list, int trials,
                               std::uint64_t seed, double tol = 2e-3);

struct BoundsReport {
  int N = 0;
  double e_value = 0.0;
  double covolume = 0.0;
  double lower_bound = 0.0;  // 2 N / covolume
  double upper_bound = 0.0;  // 4 e N
  bool consistent = false;   // lower <= upper
};

// The two-sided mean-dimension sandwich: 2N/|C/L| <= . <= 4 e N.
// Inconsistent inputs (lower > upper) are flagged, never clamped.
BoundsReport bounds_report(int N, double e_value, double covolume);

}  // namespace brodylab::brody
