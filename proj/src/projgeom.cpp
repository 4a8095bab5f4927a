#include "brodylab/projgeom.hpp"

#include <algorithm>
#include <cmath>

namespace brodylab::projgeom {

namespace {

double norm_sq(const std::vector<Complex>& v) {
  double s = 0.0;
  for (const Complex& c : v) s += std::norm(c);
  return s;
}

Complex inner(const std::vector<Complex>& v, const std::vector<Complex>& w) {
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * std::conj(w[i]);
  return s;
}

void check_valid(const ProjectivePoint& p) {
  if (p.coords.empty()) throw Error(ErrorKind::InvalidPoint, "empty coordinate vector");
  for (const Complex& c : p.coords) {
    if (std::norm(c) > 0.0) return;
  }
  throw Error(ErrorKind::InvalidPoint, "all homogeneous coordinates are zero");
}

}  // namespace

ProjectivePoint normalize(const ProjectivePoint& p) {
  check_valid(p);
  const double n = std::sqrt(norm_sq(p.coords));
  std::vector<Complex> out(p.coords.size());
  for (std::size_t i = 0; i < p.coords.size(); ++i) out[i] = p.coords[i] / n;
  // Remove the residual phase using the first coordinate with non-negligible
  // modulus (relative threshold keeps the representative stable).
  for (const Complex& c : out) {
    const double m = std::abs(c);
    if (m > 1e-14) {
      const Complex phase = std::conj(c) / m;
      for (Complex& x : out) x *= phase;
      break;
    }
  }
  return ProjectivePoint{std::move(out)};
}

double chordal_distance(const ProjectivePoint& p, const ProjectivePoint& q) {
  check_valid(p);
  check_valid(q);
  if (p.coords.size() != q.coords.size())
    throw Error(ErrorKind::InvalidPoint, "dimension mismatch in chordal_distance");
  const double np = norm_sq(p.coords);
  const double nq = norm_sq(q.coords);
  const double ip = std::norm(inner(p.coords, q.coords));
  double s = 1.0 - ip / (np * nq);
  s = std::clamp(s, 0.0, 1.0);
  return std::sqrt(s);
}

ProjectiveJet canonical_jet(const ProjectiveJet& jet) {
  check_valid(jet.value);
  if (jet.derivative.size() != jet.value.coords.size())
    throw Error(ErrorKind::InvalidPoint, "jet derivative size mismatch");
  const double n = std::sqrt(norm_sq(jet.value.coords));
  Complex s{1.0 / n, 0.0};
  for (const Complex& c : jet.value.coords) {
    const double m = std::abs(c) / n;
    if (m > 1e-14) {
      s *= std::conj(c / n) / m;
      break;
    }
  }
  ProjectiveJet out;
  out.value.coords.resize(jet.value.coords.size());
  out.derivative.resize(jet.derivative.size());
  for (std::size_t i = 0; i < jet.value.coords.size(); ++i) {
    out.value.coords[i] = jet.value.coords[i] * s;
    out.derivative[i] = jet.derivative[i] * s;
  }
  out.chart_scale = jet.chart_scale / s;
  return out;
}

std::vector<Complex> tangent_data(const ProjectiveJet& jet) {
  const ProjectiveJet c = canonical_jet(jet);
  const Complex proj = inner(c.derivative, c.value.coords);  // |value| = 1
  std::vector<Complex> t(c.derivative.size());
  for (std::size_t i = 0; i < t.size(); ++i)
    t[i] = c.derivative[i] - proj * c.value.coords[i];
  return t;
}

double energy_density(const ProjectiveJet& jet) {
  check_valid(jet.value);
  const auto& v = jet.value.coords;
  const auto& dv = jet.derivative;
  if (dv.size() != v.size())
    throw Error(ErrorKind::InvalidPoint, "jet derivative size mismatch");
  const double nv = norm_sq(v);
  const double ndv = norm_sq(dv);
  const double cross = std::norm(inner(dv, v));
  double gram = nv * ndv - cross;
  if (gram < 0.0) gram = 0.0;  // cancellation guard
  return gram / (kPi * nv * nv);
}

}  // namespace brodylab::projgeom
