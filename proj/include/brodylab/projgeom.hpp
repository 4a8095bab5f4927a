#pragma once

#include <vector>

#include "brodylab/common.hpp"

namespace brodylab::projgeom {

// A point of CP^N in homogeneous coordinates (N+1 entries, not all zero).
struct ProjectivePoint {
  std::vector<Complex> coords;

  ProjectivePoint() = default;
  explicit ProjectivePoint(std::vector<Complex> c) : coords(std::move(c)) {}

  std::size_t dim() const { return coords.empty() ? 0 : coords.size() - 1; }
};

// First-order jet of a holomorphic curve at a point: a homogeneous lift and
// the z-derivative of that same lift.  chart_scale records the factor
// relating the lift to the curve's reference chart (1 for affine lifts);
// energy_density is lift-independent so the field is informational.
struct ProjectiveJet {
  ProjectivePoint value;
  std::vector<Complex> derivative;
  Complex chart_scale{1.0, 0.0};
};

// Scale to unit norm with the first nonzero coordinate real positive.
// Throws Error(InvalidPoint) on an all-zero vector.
ProjectivePoint normalize(const ProjectivePoint& p);

// Fubini-Study chordal distance sqrt(1 - |<v,w>|^2 / (|v|^2 |w|^2)) in [0,1].
double chordal_distance(const ProjectivePoint& p, const ProjectivePoint& q);

// Pointwise energy density |df|^2 from a jet, via the lift-independent Gram
// form:  pi |df|^2 = (|v|^2 |v'|^2 - |<v,v'>|^2) / |v|^4.
double energy_density(const ProjectiveJet& jet);

// Jet with the value normalized and the derivative transported by the same
// constant scalar (a valid jet of the rescaled lift).
ProjectiveJet canonical_jet(const ProjectiveJet& jet);

// Derivative data modulo the lift ambiguity: the component of the canonical
// derivative orthogonal to the canonical value.  Two jets at the same
// projective point have equal tangent data iff they define the same df.
std::vector<Complex> tangent_data(const ProjectiveJet& jet);

}  // namespace brodylab::projgeom
