#include "brodylab/nevanlinna.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

namespace brodylab::nevanlinna {

namespace {

std::atomic<int> g_threads{0};

int effective_threads() {
  const int n = g_threads.load();
  if (n > 0) return n;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(std::min(hw, 4u)) : 1;
}

// Gauss-Legendre nodes/weights on [-1, 1], Newton iteration from the
// Chebyshev initial guess.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(static_cast<std::size_t>(n));
  w.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 64; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / pp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[static_cast<std::size_t>(i)] = t;
    w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - t * t) * pp * pp);
  }
}

std::size_t pow2ceil(double v) {
  std::size_t m = 1;
  while (static_cast<double>(m) < v && m < (1u << 20)) m <<= 1;
  return m;
}

// Base angular node count at radius t, scaled so the finest density feature
// gets a few nodes per period before any refinement.
std::size_t angular_base(const curves::CurveFamily& curve, double t) {
  using curves::CurveKind;
  switch (curve.kind()) {
    case CurveKind::Constant:
      return 4;
    case CurveKind::Rational: {
      const double deg = static_cast<double>(curve.target_dim()) + 2.0;
      return std::max<std::size_t>(32, pow2ceil(8.0 * deg));
    }
    case CurveKind::Exponential:
      return std::max<std::size_t>(32, pow2ceil(8.0 * (t + 1.0)));
    case CurveKind::WeierstrassP:
    case CurveKind::LatticeFamily: {
      const double feature = curve.lattice()->delta() * curve.scale();
      return std::max<std::size_t>(32, pow2ceil(2.5 * 2.0 * kPi * t / feature));
    }
  }
  return 32;
}

// Moduli of poles inside |z| <= R (outer coordinates), for panel alignment.
std::vector<double> pole_moduli(const curves::CurveFamily& curve, double R) {
  std::vector<double> out;
  if (!curve.pole_bearing()) return out;
  const auto* lat = curve.lattice();
  const double scale = curve.scale();
  const Complex off = curve.offset();
  std::vector<std::pair<std::int64_t, std::int64_t>> idx;
  lat->indices_in_disk(off, R / scale + 2.0 * lat->covering_radius(), idx);
  for (auto [i, j] : idx) {
    const double m = std::abs(lat->point(i, j) - off) * scale;
    if (m <= R) out.push_back(m);
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct RadialGrid {
  std::vector<double> nodes;    // Gauss nodes in t over all panels
  std::vector<double> weights;  // matching weights
};

// Panel boundaries: 0, 1, the profile radii, pole-circle radii (deduplicated)
// and a width cap; `level` halves panels level times.
RadialGrid build_grid(const curves::CurveFamily& curve,
                      const std::vector<double>& radii, int level, int gauss_order) {
  const double r_max = radii.back();
  std::vector<double> b{0.0, 1.0};
  for (double r : radii) b.push_back(r);
  double cap;
  if (curve.pole_bearing()) {
    const double feature = curve.lattice()->delta() * curve.scale();
    cap = 0.5 * feature;
    const double dedup = std::max(0.25 * feature, 1e-6);
    double last = -1.0;
    for (double m : pole_moduli(curve, r_max)) {
      if (m > dedup && m < r_max - 1e-12 && m - last > dedup) {
        b.push_back(m);
        last = m;
      }
    }
  } else {
    cap = -1.0;  // geometric cap applied below
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end(),
                      [](double u, double v) { return v - u < 1e-12; }),
          b.end());
  while (b.back() > r_max) b.pop_back();
  if (std::abs(b.back() - r_max) > 1e-12) b.push_back(r_max);

  // Enforce the width cap, then the refinement level.
  std::vector<double> bb;
  for (std::size_t k = 0; k + 1 < b.size(); ++k) {
    bb.push_back(b[k]);
    const double width_cap =
        (cap > 0.0) ? cap : std::max(0.5, 0.5 * std::max(1.0, b[k]));
    const double w = b[k + 1] - b[k];
    const int parts = std::max(1, static_cast<int>(std::ceil(w / width_cap)));
    for (int p = 1; p < parts; ++p) bb.push_back(b[k] + w * p / parts);
  }
  bb.push_back(b.back());

  std::vector<double> bounds;
  const int sub = 1 << level;
  for (std::size_t k = 0; k + 1 < bb.size(); ++k)
    for (int p = 0; p < sub; ++p)
      bounds.push_back(bb[k] + (bb[k + 1] - bb[k]) * p / sub);
  bounds.push_back(bb.back());

  std::vector<double> gx, gw;
  gauss_legendre(gauss_order, gx, gw);
  RadialGrid grid;
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
    const double a = bounds[k], c = bounds[k + 1];
    const double half = 0.5 * (c - a), mid = 0.5 * (c + a);
    for (int g = 0; g < gauss_order; ++g) {
      grid.nodes.push_back(mid + half * gx[static_cast<std::size_t>(g)]);
      grid.weights.push_back(half * gw[static_cast<std::size_t>(g)]);
    }
  }
  return grid;
}

// I(t) = t * integral over theta of |df|^2(t e^{i theta}).
double ring_integral(const curves::CurveFamily& curve, double t, std::size_t m) {
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double th = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(m);
    sum += curve.density(Complex{t * std::cos(th), t * std::sin(th)});
  }
  return t * 2.0 * kPi * sum / static_cast<double>(m);
}

struct LevelResult {
  std::vector<double> A, T;
};

LevelResult evaluate_level(const curves::CurveFamily& curve,
                           const std::vector<double>& radii, int level) {
  const RadialGrid grid = build_grid(curve, radii, level, 8);
  const std::size_t n = grid.nodes.size();
  std::vector<double> I(n);
  const int nthreads = effective_threads();
  if (nthreads > 1 && n > 64) {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (int w = 0; w < nthreads; ++w)
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t k = next.fetch_add(8);
          if (k >= n) return;
          for (std::size_t i = k; i < std::min(n, k + 8); ++i)
            I[i] = ring_integral(curve, grid.nodes[i],
                                 angular_base(curve, grid.nodes[i]) << level);
        }
      });
    for (auto& th : pool) th.join();
  } else {
    for (std::size_t i = 0; i < n; ++i)
      I[i] = ring_integral(curve, grid.nodes[i],
                           angular_base(curve, grid.nodes[i]) << level);
  }

  LevelResult res;
  res.A.assign(radii.size(), 0.0);
  res.T.assign(radii.size(), 0.0);
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double r = radii[k];
    double A = 0.0, T = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = grid.nodes[i];
      if (t > r) break;  // nodes are sorted; profile radii are boundaries
      A += grid.weights[i] * I[i];
      if (t < r) T += grid.weights[i] * I[i] * std::log(r / std::max(1.0, t));
    }
    res.A[k] = A;
    res.T[k] = T;
  }
  return res;
}

}  // namespace

void set_threads(int n) { g_threads.store(n); }
int threads() { return effective_threads(); }

EnergyProfile profile(const curves::CurveFamily& curve, std::vector<double> radii,
                      double tol) {
  if (radii.empty()) throw Error(ErrorKind::InvalidInput, "profile needs radii");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (radii[k] < 1.0)
      throw Error(ErrorKind::InvalidInput, "profile radii must be >= 1");
    if (k > 0 && radii[k] <= radii[k - 1])
      throw Error(ErrorKind::InvalidInput, "profile radii must be increasing");
  }
  const int max_level = 6;
  LevelResult prev = evaluate_level(curve, radii, 0);
  std::vector<double> err(radii.size(), 0.0);
  for (int level = 1; level <= max_level; ++level) {
    LevelResult cur = evaluate_level(curve, radii, level);
    double worst = 0.0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
      const double scale = std::max({std::abs(cur.A[k]), std::abs(cur.T[k]), 1e-12});
      const double d =
          std::max(std::abs(cur.A[k] - prev.A[k]), std::abs(cur.T[k] - prev.T[k]));
      err[k] = d / scale;
      worst = std::max(worst, err[k]);
    }
    prev = cur;
    if (worst < tol) {
      EnergyProfile out;
      out.radii = std::move(radii);
      out.disk_energy = std::move(cur.A);
      out.characteristic = std::move(cur.T);
      for (std::size_t k = 0; k < out.radii.size(); ++k) {
        const double r = out.radii[k];
        out.mean_energy_running.push_back(2.0 * out.characteristic[k] / (kPi * r * r));
        out.packing_running.push_back(out.disk_energy[k] / (kPi * r * r));
      }
      out.quadrature_error = std::move(err);
      return out;
    }
  }
  throw QuadratureError("disk-energy quadrature did not converge to tol",
                        prev.A.back());
}

QuadratureResult area_energy(const curves::CurveFamily& curve, double t, double tol) {
  if (!(t > 0.0)) throw Error(ErrorKind::InvalidInput, "area_energy needs t > 0");
  // The profile machinery requires radii >= 1; for t < 1 integrate on [0, t]
  // by rescaling the curve (exact change of variables).
  if (t < 1.0) {
    const QuadratureResult r = area_energy(curve.rescaled(1.0 / t), 1.0, tol);
    return r;
  }
  EnergyProfile p = profile(curve, {t}, tol);
  return QuadratureResult{p.disk_energy[0], p.quadrature_error[0]};
}

double characteristic(const curves::CurveFamily& curve, double r, double tol) {
  if (!(r >= 1.0)) throw Error(ErrorKind::InvalidInput, "characteristic needs r >= 1");
  if (r == 1.0) return 0.0;
  EnergyProfile p = profile(curve, {r}, tol);
  return p.characteristic[0];
}

namespace {

LimsupEstimate window_estimate(const std::vector<double>& radii,
                               const std::vector<double>& values) {
  LimsupEstimate est;
  est.estimate = -1.0;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (values[k] > est.estimate) {
      est.estimate = values[k];
      est.window_argmax = radii[k];
    }
  }
  // Least-squares slope of value against 1/r (convergence diagnostic only).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(radii.size());
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double x = 1.0 / radii[k];
    sx += x;
    sy += values[k];
    sxx += x * x;
    sxy += x * values[k];
  }
  const double denom = n * sxx - sx * sx;
  est.trend_slope = (denom != 0.0) ? (n * sxy - sx * sy) / denom : 0.0;
  return est;
}

std::vector<double> geometric_window(double r_max) {
  const int samples = 9;
  std::vector<double> radii;
  for (int k = samples - 1; k >= 0; --k)
    radii.push_back(r_max * std::pow(0.5, static_cast<double>(k) / (samples - 1)));
  return radii;
}

}  // namespace

LimsupEstimate mean_energy_estimate(const curves::CurveFamily& curve, double r_max,
                                    double tol) {
  if (!(r_max >= 4.0))
    throw Error(ErrorKind::InvalidInput, "mean_energy_estimate needs r_max >= 4");
  EnergyProfile p = profile(curve, geometric_window(r_max), tol);
  return window_estimate(p.radii, p.mean_energy_running);
}

LimsupEstimate packing_density_estimate(const curves::CurveFamily& curve, double r_max,
                                        double tol) {
  if (!(r_max >= 4.0))
    throw Error(ErrorKind::InvalidInput, "packing_density_estimate needs r_max >= 4");
  EnergyProfile p = profile(curve, geometric_window(r_max), tol);
  return window_estimate(p.radii, p.packing_running);
}

double counting_function(const PoleDivisor& poles, double r) {
  if (!(r >= 1.0)) throw Error(ErrorKind::InvalidInput, "counting_function needs r >= 1");
  // Validate distinctness.
  std::vector<Complex> locs;
  for (const auto& [z, m] : poles.poles) {
    if (m <= 0) throw Error(ErrorKind::InvalidInput, "pole multiplicity must be positive");
    locs.push_back(z);
  }
  std::sort(locs.begin(), locs.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  for (std::size_t i = 0; i + 1 < locs.size(); ++i)
    if (std::abs(locs[i] - locs[i + 1]) < 1e-12)
      throw Error(ErrorKind::InvalidInput, "pole locations must be distinct");

  double N = 0.0;
  for (const auto& [z, m] : poles.poles) {
    const double a = std::abs(z);
    if (a == 0.0)
      N += m * std::log(r);
    else if (a <= r)
      N += m * std::log(r / a);
  }
  return N;
}

void EnergyProfile::write_csv(std::ostream& os) const {
  os << "r,disk_energy,T,mean_running,packing_running,err\n";
  char buf[160];
  for (std::size_t k = 0; k < radii.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", radii[k],
                  disk_energy[k], characteristic[k], mean_energy_running[k],
                  packing_running[k], quadrature_error[k]);
    os << buf;
  }
}

}  // namespace brodylab::nevanlinna
