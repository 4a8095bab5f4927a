#include "brodylab/discretize.hpp"

#include <algorithm>
#include <cmath>

namespace brodylab::discretize {

namespace {

using curves::CurveFamily;
using curves::Lattice;
using projgeom::ProjectiveJet;

DiscretizedCurve sample(const CurveFamily& curve, const Lattice& lat, double R,
                        bool with_jets) {
  DiscretizedCurve out{lat, R, with_jets, {}};
  for (const Complex& lambda : lat.points_in_disk(Complex{0, 0}, R)) {
    const ProjectiveJet jet = projgeom::canonical_jet(curve.jet(lambda));
    DiscretizedCurve::Sample s;
    s.lambda = lambda;
    s.value = jet.value;
    if (with_jets) s.derivative = jet.derivative;
    out.samples.push_back(std::move(s));
  }
  return out;
}

}  // namespace

DiscretizedCurve restrict_curve(const CurveFamily& curve, const Lattice& lat,
                                double R) {
  return sample(curve, lat, R, false);
}

DiscretizedCurve jet_restrict(const CurveFamily& curve, const Lattice& lat, double R) {
  return sample(curve, lat, R, true);
}

double separation(const CurveFamily& c1, const CurveFamily& c2, const Lattice& lat,
                  double R, bool use_jets) {
  double sep = 0.0;
  for (const Complex& lambda : lat.points_in_disk(Complex{0, 0}, R)) {
    const ProjectiveJet j1 = c1.jet(lambda);
    const ProjectiveJet j2 = c2.jet(lambda);
    double d = projgeom::chordal_distance(j1.value, j2.value);
    if (use_jets) {
      const auto t1 = projgeom::tangent_data(j1);
      const auto t2 = projgeom::tangent_data(j2);
      double gap2 = 0.0;
      for (std::size_t i = 0; i < t1.size(); ++i) gap2 += std::norm(t1[i] - t2[i]);
      d += std::sqrt(gap2);
    }
    sep = std::max(sep, d);
  }
  return sep;
}

PoleCountCheck pole_counting_check(const Lattice& lat, int multiplicity, double r) {
  if (multiplicity != 1 && multiplicity != 2)
    throw Error(ErrorKind::InvalidInput, "multiplicity must be 1 or 2");
  if (!(r >= 2.0 * lat.longest_generator()))
    throw Error(ErrorKind::InvalidInput,
                "pole_counting_check needs r >= 2 * longest generator");
  PoleCountCheck out;
  for (const Complex& lambda : lat.points_in_disk(Complex{0, 0}, r)) {
    const double a = std::abs(lambda);
    out.N_of_r += multiplicity * std::log(r / (a == 0.0 ? 1.0 : a));
    // |lambda| = 0 contributes m log r = m log(r/1).
  }
  out.leading_term = multiplicity * kPi * r * r / (2.0 * lat.covolume());
  out.relative_gap = std::abs(out.N_of_r - out.leading_term) / out.leading_term;
  return out;
}

nlohmann::ordered_json DiscretizedCurve::to_json() const {
  nlohmann::ordered_json j;
  j["lattice"] = curves::lattice_to_json(lattice);
  j["R"] = window_radius;
  j["jets"] = with_jets;
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const Sample& s : samples) {
    nlohmann::ordered_json e;
    e["lambda"] = nlohmann::ordered_json::array({s.lambda.real(), s.lambda.imag()});
    nlohmann::ordered_json coords = nlohmann::ordered_json::array();
    for (const Complex& c : s.value.coords)
      coords.push_back(nlohmann::ordered_json::array({c.real(), c.imag()}));
    e["value"] = coords;
    if (with_jets) {
      nlohmann::ordered_json der = nlohmann::ordered_json::array();
      for (const Complex& c : s.derivative)
        der.push_back(nlohmann::ordered_json::array({c.real(), c.imag()}));
      e["derivative"] = der;
    }
    arr.push_back(e);
  }
  j["samples"] = arr;
  return j;
}

}  // namespace brodylab::discretize
