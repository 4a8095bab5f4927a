#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "brodylab/common.hpp"
#include "brodylab/lattice.hpp"
#include "brodylab/projgeom.hpp"

namespace brodylab::curves {

enum class CurveKind { Constant, Rational, Exponential, WeierstrassP, LatticeFamily };

// Rule producing the coefficient a_{n,lambda} for each lattice point.  All
// produced moduli lie in the annulus [A, 2A].
struct CoefficientPattern {
  enum class Mode { Random, Constant, Periodic };

  Mode mode = Mode::Random;
  std::uint64_t seed = 0;                    // Random
  std::vector<Complex> constant;             // Constant: one value per component
  std::int64_t period_i = 1, period_j = 1;   // Periodic
  std::vector<std::vector<Complex>> block;   // block[(i mod p) + p*(j mod q)][n]

  static CoefficientPattern random(std::uint64_t seed);
  static CoefficientPattern constant_values(std::vector<Complex> values);
  static CoefficientPattern periodic(std::int64_t pi, std::int64_t pj,
                                     std::vector<std::vector<Complex>> block);

  // Deterministic, order-independent: a pure function of (A, n, i, j).
  Complex coefficient(double A, int n, std::int64_t i, std::int64_t j) const;
  bool translation_invariant() const { return mode == Mode::Constant; }
};

// Pole-free chart data near a lattice point (the z^3-rescaled lift of the
// lattice family).  g_n(z) = (z - lambda0)^3 f_n(z) in inner coordinates.
struct ChartData {
  Complex lambda0_outer;         // chart center in curve coordinates
  Complex lambda0_inner;         // same point in inner (unscaled) coordinates
  Complex local_offset;          // z_inner - lambda0_inner
  Complex local_factor;          // local_offset^3
  std::vector<Complex> g;        // N chart values
  std::vector<Complex> dg;       // N chart derivatives (inner variable)
  double inner_derivative = 1.0; // d(inner)/dz, the chain-rule factor

  projgeom::ProjectiveJet jet() const;
};

// A concrete holomorphic-curve family with exact jet evaluation.  Values are
// immutable after construction; evaluation is pure.
class CurveFamily {
 public:
  static CurveFamily constant(projgeom::ProjectivePoint p);
  // polys[i] holds the coefficients of the i-th homogeneous polynomial,
  // lowest degree first.  i = 0..N.
  static CurveFamily rational(std::vector<std::vector<Complex>> polys);
  // terms[i] = (c_i, a_i) giving the lift c_i e^{a_i z}, i = 0..N.
  static CurveFamily exponential(std::vector<std::pair<Complex, Complex>> terms);
  // [1 : wp(z)] for the given lattice.  r_cut <= 0 selects the default
  // window radius.
  static CurveFamily weierstrass_p(const Lattice& lat, double r_cut = 0.0);
  static CurveFamily lattice_family(const Lattice& lat, double A, int N,
                                    CoefficientPattern pattern, double r_cut = 0.0);

  CurveKind kind() const { return kind_; }
  int target_dim() const { return n_components_; }  // N of CP^N
  const Lattice* lattice() const { return lattice_ ? &*lattice_ : nullptr; }
  double scale() const { return scale_; }
  Complex offset() const { return offset_; }
  double amplitude() const { return A_; }
  double window_radius() const { return r_cut_; }
  const CoefficientPattern& pattern() const { return pattern_; }
  bool pole_bearing() const {
    return kind_ == CurveKind::WeierstrassP || kind_ == CurveKind::LatticeFamily;
  }
  // True when the curve is exactly periodic under its (scaled) lattice.
  bool periodic() const;
  // Generators of the period lattice in curve coordinates (pole-bearing only).
  Complex period1() const;
  Complex period2() const;
  double pole_guard() const;  // delta_inner * scale / 4

  // Rigorous truncation-error bounds for the homogeneous lift components
  // (pole-bearing kinds; zero for exact kinds).
  double value_tail_bound() const { return value_tail_bound_; }
  double deriv_tail_bound() const { return deriv_tail_bound_; }

  // Exact jet of the chosen lift.  Pole-bearing kinds throw
  // Error(PoleProximity) when d(z, poles) < delta/4 (callers switch to the
  // chart there).
  projgeom::ProjectiveJet eval_jet(Complex z) const;

  // Pole-free chart near the nearest lattice point; requires
  // |z - lambda0| < delta and an unambiguous nearest point.
  ChartData eval_chart(Complex z) const;

  // Pole-aware jet: dispatches to the chart lift near lattice points and the
  // plain lift elsewhere.  Defined everywhere.
  projgeom::ProjectiveJet jet(Complex z) const;

  // Jet evaluated with the truncation window and chart anchor frozen at
  // `pin`: within a small cluster around the pin (finite-difference stencils)
  // the evaluated map is one fixed holomorphic function.
  projgeom::ProjectiveJet jet_pinned(Complex z, Complex pin) const;

  double density(Complex z) const { return projgeom::energy_density(jet(z)); }

  // g(z) = f(z / c): exact coefficient reparameterization where possible,
  // otherwise the scale is stored and applied at evaluation.
  CurveFamily rescaled(double c) const;
  // g(z) = f(z + a).
  CurveFamily translated(Complex a) const;

  nlohmann::ordered_json to_json() const;
  static CurveFamily from_json(const nlohmann::ordered_json& j);
  std::string describe() const;

 private:
  CurveFamily() = default;
  void init_lattice_engine();
  // Window-resolved evaluation core for pole-bearing kinds (inner coords).
  projgeom::ProjectiveJet lattice_jet_inner(Complex zi, Complex pin,
                                            bool chart_ok) const;

  CurveKind kind_ = CurveKind::Constant;
  int n_components_ = 0;  // N
  double scale_ = 1.0;
  Complex offset_{0.0, 0.0};

  projgeom::ProjectivePoint constant_point_;
  std::vector<std::vector<Complex>> polys_;
  std::vector<std::pair<Complex, Complex>> exp_terms_;

  std::optional<Lattice> lattice_;
  double A_ = 0.0;
  CoefficientPattern pattern_;
  double r_cut_ = 0.0;
  double value_tail_bound_ = 0.0;
  double deriv_tail_bound_ = 0.0;

  // Weierstrass engine: fixed 0-anchored window plus Laurent tail
  // corrections from full-lattice sums (see src/curves.cpp).
  struct WpEngine;
  std::shared_ptr<const WpEngine> wp_;

  struct CoefficientTable;
  std::shared_ptr<CoefficientTable> coeffs_;
};

// Spec-level free functions.
inline std::vector<Complex> lattice_points_in_disk(const Lattice& lat, double R) {
  return lat.points_in_disk(Complex{0.0, 0.0}, R);
}
inline double lattice_sum_tail_bound(const Lattice& lat, double s, double R) {
  return lat.tail_bound(s, R);
}

// 5-point finite-difference Laplacian of (1/4pi) log(1 + sum |f_i|^2),
// an independent cross-check of the analytic energy density.  Throws
// Error(ChartError) when the stencil hits a pole of the affine lift.
double energy_density_fd(const CurveFamily& curve, Complex z, double h);

nlohmann::ordered_json lattice_to_json(const Lattice& lat);
Lattice lattice_from_json(const nlohmann::ordered_json& j);

}  // namespace brodylab::curves
