#pragma once

#include <vector>

#include <json.hpp>

#include "brodylab/common.hpp"
#include "brodylab/curves.hpp"

namespace brodylab::discretize {

// Restriction of a curve (or its 1-jet) to the lattice points in a window.
// Samples are stored with the canonical normalized lift, ordered by the
// lattice enumeration (|lambda|, arg lambda).
struct DiscretizedCurve {
  curves::Lattice lattice;
  double window_radius = 0.0;
  bool with_jets = false;

  struct Sample {
    Complex lambda;
    projgeom::ProjectivePoint value;     // normalized representative
    std::vector<Complex> derivative;     // parallel-normalized lift derivative
  };
  std::vector<Sample> samples;

  nlohmann::ordered_json to_json() const;
};

// f -> f|_Lambda on the window |lambda| <= R (charts used at poles).
DiscretizedCurve restrict_curve(const curves::CurveFamily& curve,
                                const curves::Lattice& lat, double R);

// f -> df|_Lambda: values plus lift derivatives.
DiscretizedCurve jet_restrict(const curves::CurveFamily& curve,
                              const curves::Lattice& lat, double R);

// Max over the window of the sample distance: chordal distance in value
// mode; chordal distance plus the gap of value-orthogonal tangent data in
// jet mode.  Zero iff the discretizations coincide.
double separation(const curves::CurveFamily& c1, const curves::CurveFamily& c2,
                  const curves::Lattice& lat, double R, bool use_jets);

struct PoleCountCheck {
  double N_of_r = 0.0;        // counting function over the lattice poles
  double leading_term = 0.0;  // m * pi r^2 / (2 covol)
  double relative_gap = 0.0;
};

// Consistency of the integrated lattice pole count against its leading term.
PoleCountCheck pole_counting_check(const curves::Lattice& lat, int multiplicity,
                                   double r);

}  // namespace brodylab::discretize
