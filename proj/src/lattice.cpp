#include "brodylab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace brodylab::curves {

namespace {

double arg02pi(Complex z) {
  double a = std::arg(z);
  if (a < 0.0) a += 2.0 * kPi;
  return a;
}

}  // namespace

Lattice::Lattice(Complex omega1, Complex omega2) : omega1_(omega1), omega2_(omega2) {
  init();
  delta_ = 0.5 * shortest_;
}

Lattice::Lattice(Complex omega1, Complex omega2, double delta)
    : omega1_(omega1), omega2_(omega2) {
  init();
  if (!(delta > 0.0) || 2.0 * delta > shortest_ * (1.0 + 1e-12))
    throw Error(ErrorKind::InvalidInput,
                "delta must satisfy 0 < 2*delta <= shortest lattice vector");
  delta_ = delta;
}

void Lattice::init() {
  covolume_ = std::abs(std::imag(std::conj(omega1_) * omega2_));
  if (!(covolume_ > 0.0))
    throw Error(ErrorKind::InvalidInput, "lattice generators are linearly dependent");
  // Gauss (Lagrange) reduction; afterwards omega1_ is a shortest vector.
  for (int iter = 0; iter < 64; ++iter) {
    if (std::norm(omega2_) < std::norm(omega1_)) std::swap(omega1_, omega2_);
    const double mu =
        std::round(std::real(omega2_ * std::conj(omega1_)) / std::norm(omega1_));
    if (mu == 0.0) break;
    omega2_ -= mu * omega1_;
  }
  if (std::norm(omega2_) < std::norm(omega1_)) std::swap(omega1_, omega2_);
  shortest_ = std::abs(omega1_);
  covering_ = 0.5 * std::max(std::abs(omega1_ + omega2_), std::abs(omega1_ - omega2_));
}

double Lattice::longest_generator() const { return std::abs(omega2_); }

Complex Lattice::point(std::int64_t i, std::int64_t j) const {
  return static_cast<double>(i) * omega1_ + static_cast<double>(j) * omega2_;
}

void Lattice::nearest(Complex z, std::int64_t& i_out, std::int64_t& j_out,
                      double* tie_gap) const {
  // Real coordinates of z in the basis, via the dual.
  const double det = std::imag(std::conj(omega1_) * omega2_);
  const double a = std::imag(std::conj(z) * omega2_) / -det;
  const double b = std::imag(std::conj(omega1_) * z) / det;
  const auto ia = static_cast<std::int64_t>(std::floor(a));
  const auto jb = static_cast<std::int64_t>(std::floor(b));

  double best = std::numeric_limits<double>::infinity();
  double second = std::numeric_limits<double>::infinity();
  std::int64_t bi = ia, bj = jb;
  for (std::int64_t di = -1; di <= 2; ++di) {
    for (std::int64_t dj = -1; dj <= 2; ++dj) {
      const std::int64_t i = ia + di, j = jb + dj;
      const Complex lam = point(i, j);
      const double d = std::abs(lam - z);
      const bool better =
          d < best - 1e-14 ||
          (d < best + 1e-14 &&
           (std::abs(lam) < std::abs(point(bi, bj)) - 1e-14 ||
            (std::abs(lam) < std::abs(point(bi, bj)) + 1e-14 &&
             arg02pi(lam) < arg02pi(point(bi, bj)))));
      if (better) {
        second = best;
        best = d;
        bi = i;
        bj = j;
      } else if (d < second) {
        second = d;
      }
    }
  }
  i_out = bi;
  j_out = bj;
  if (tie_gap) *tie_gap = second - best;
}

Complex Lattice::nearest_point(Complex z) const {
  std::int64_t i, j;
  nearest(z, i, j);
  return point(i, j);
}

double Lattice::distance_to_lattice(Complex z) const {
  return std::abs(z - nearest_point(z));
}

void Lattice::indices_in_disk(
    Complex center, double R,
    std::vector<std::pair<std::int64_t, std::int64_t>>& out) const {
  out.clear();
  if (R < 0.0) return;
  const double jrad = std::abs(omega1_) * R / covolume_;
  const double det = std::imag(std::conj(omega1_) * omega2_);
  const double bc = std::imag(std::conj(omega1_) * center) / det;
  const auto jlo = static_cast<std::int64_t>(std::ceil(bc - jrad - 1e-12));
  const auto jhi = static_cast<std::int64_t>(std::floor(bc + jrad + 1e-12));
  const double n1 = std::norm(omega1_);
  for (std::int64_t j = jlo; j <= jhi; ++j) {
    // |i*omega1 + (j*omega2 - center)|^2 <= R^2, quadratic in i.
    const Complex w = static_cast<double>(j) * omega2_ - center;
    const double bq = std::real(std::conj(omega1_) * w);
    const double cq = std::norm(w) - R * R;
    const double disc = bq * bq - n1 * cq;
    if (disc < 0.0) continue;
    const double sq = std::sqrt(disc);
    const auto ilo = static_cast<std::int64_t>(std::ceil((-bq - sq) / n1 - 1e-12));
    const auto ihi = static_cast<std::int64_t>(std::floor((-bq + sq) / n1 + 1e-12));
    for (std::int64_t i = ilo; i <= ihi; ++i) {
      if (std::abs(point(i, j) - center) <= R * (1.0 + 1e-15)) out.emplace_back(i, j);
    }
  }
}

std::vector<Complex> Lattice::points_in_disk(Complex center, double R) const {
  std::vector<std::pair<std::int64_t, std::int64_t>> idx;
  indices_in_disk(center, R, idx);
  std::vector<Complex> pts;
  pts.reserve(idx.size());
  for (auto [i, j] : idx) pts.push_back(point(i, j));
  std::sort(pts.begin(), pts.end(), [&](Complex u, Complex v) {
    const double du = std::norm(u - center), dv = std::norm(v - center);
    if (du != dv) return du < dv;
    return arg02pi(u - center) < arg02pi(v - center);
  });
  return pts;
}

std::vector<double> Lattice::ring_radii(double R) const {
  std::vector<std::pair<std::int64_t, std::int64_t>> idx;
  indices_in_disk(Complex{0.0, 0.0}, R, idx);
  std::vector<double> radii;
  radii.reserve(idx.size());
  for (auto [i, j] : idx) {
    const double r = std::abs(point(i, j));
    if (r > 0.0) radii.push_back(r);
  }
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-9; }),
              radii.end());
  return radii;
}

double Lattice::tail_bound(double s, double R) const {
  if (s <= 2.0)
    throw Error(ErrorKind::DivergentSum, "lattice tail sum diverges for s <= 2");
  const double rho = covering_;
  if (!(R > 2.0 * rho))
    throw Error(ErrorKind::InvalidInput, "tail_bound requires R > 2 * covering radius");
  const double u = R - 2.0 * rho;
  const double main = std::pow(u, 2.0 - s) / (s - 2.0);
  const double corr = rho * std::pow(u, 1.0 - s) / (s - 1.0);
  return (2.0 * kPi / covolume_) * (main + corr);
}

double Lattice::c2_bound(double s) const {
  const double K = std::max(8.0 * longest_generator(), 4.0 * covering_ + delta_);
  std::vector<std::pair<std::int64_t, std::int64_t>> idx;
  indices_in_disk(Complex{0.0, 0.0}, K, idx);
  double sum = 0.0;
  for (auto [i, j] : idx) {
    const double r = std::abs(point(i, j));
    if (r == 0.0) continue;
    sum += std::pow(r - delta_, -s);
  }
  return sum + tail_bound(s, K) * std::pow(1.0 - delta_ / K, -s);
}

Complex Lattice::eisenstein(int s, double R_G) const {
  if (s != 4 && s != 6 && s != 8 && s != 10)
    throw Error(ErrorKind::InvalidInput, "eisenstein: s must be 4, 6, 8 or 10");
  if (!G_ready_) {
    const double scale = std::sqrt(covolume_);
    const double R = (R_G > 0.0) ? R_G : 2000.0 * scale;
    Complex acc[4] = {};
    const double jrad = std::abs(omega1_) * R / covolume_;
    const double n1 = std::norm(omega1_);
    const auto jmax = static_cast<std::int64_t>(std::floor(jrad + 1e-12));
    for (std::int64_t j = -jmax; j <= jmax; ++j) {
      const Complex w = static_cast<double>(j) * omega2_;
      const double bq = std::real(std::conj(omega1_) * w);
      const double disc = bq * bq - n1 * (std::norm(w) - R * R);
      if (disc < 0.0) continue;
      const double sq = std::sqrt(disc);
      const auto ilo = static_cast<std::int64_t>(std::ceil((-bq - sq) / n1 - 1e-12));
      const auto ihi = static_cast<std::int64_t>(std::floor((-bq + sq) / n1 + 1e-12));
      for (std::int64_t i = ilo; i <= ihi; ++i) {
        if (i == 0 && j == 0) continue;
        const Complex lam = point(i, j);
        const Complex inv2 = 1.0 / (lam * lam);
        const Complex inv4 = inv2 * inv2;
        const Complex inv6 = inv4 * inv2;
        acc[0] += inv4;
        acc[1] += inv6;
        acc[2] += inv4 * inv4;
        acc[3] += inv6 * inv4;
      }
    }
    for (int k = 0; k < 4; ++k) G_[k] = acc[k];
    G_ready_ = true;
  }
  return G_[(s - 4) / 2];
}

}  // namespace brodylab::curves
