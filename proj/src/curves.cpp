#include "brodylab/curves.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <shared_mutex>
#include <sstream>

namespace brodylab::curves {

namespace {

using projgeom::ProjectiveJet;
using projgeom::ProjectivePoint;

nlohmann::ordered_json cjson(Complex z) {
  return nlohmann::ordered_json::array({z.real(), z.imag()});
}

Complex cfrom(const nlohmann::ordered_json& j) {
  return Complex{j.at(0).get<double>(), j.at(1).get<double>()};
}

thread_local std::vector<std::pair<std::int64_t, std::int64_t>> tl_window;

}  // namespace

// ---------------------------------------------------------------------------
// CoefficientPattern

CoefficientPattern CoefficientPattern::random(std::uint64_t seed) {
  CoefficientPattern p;
  p.mode = Mode::Random;
  p.seed = seed;
  return p;
}

CoefficientPattern CoefficientPattern::constant_values(std::vector<Complex> values) {
  CoefficientPattern p;
  p.mode = Mode::Constant;
  p.constant = std::move(values);
  return p;
}

CoefficientPattern CoefficientPattern::periodic(std::int64_t pi, std::int64_t pj,
                                                std::vector<std::vector<Complex>> block) {
  if (pi < 1 || pj < 1 || block.size() != static_cast<std::size_t>(pi * pj))
    throw Error(ErrorKind::InvalidInput, "periodic pattern block size mismatch");
  CoefficientPattern p;
  p.mode = Mode::Periodic;
  p.period_i = pi;
  p.period_j = pj;
  p.block = std::move(block);
  return p;
}

Complex CoefficientPattern::coefficient(double A, int n, std::int64_t i,
                                        std::int64_t j) const {
  switch (mode) {
    case Mode::Random: {
      const std::uint64_t key = mix_key(seed, static_cast<std::uint64_t>(n) + 1,
                                        zigzag(i), zigzag(j));
      const double modulus = A * (1.0 + u64_to_unit(splitmix64(key)));
      const double phase =
          2.0 * kPi * u64_to_unit(splitmix64(key ^ 0xa5a5a5a55a5a5a5aULL));
      return Complex{modulus * std::cos(phase), modulus * std::sin(phase)};
    }
    case Mode::Constant:
      return constant.at(static_cast<std::size_t>(n));
    case Mode::Periodic: {
      const std::int64_t im = ((i % period_i) + period_i) % period_i;
      const std::int64_t jm = ((j % period_j) + period_j) % period_j;
      return block[static_cast<std::size_t>(im + period_i * jm)]
                  [static_cast<std::size_t>(n)];
    }
  }
  throw Error(ErrorKind::InvalidInput, "bad pattern mode");
}

// ---------------------------------------------------------------------------
// Coefficient table: dense lazily-grown grid over integer lattice indices.
// Entries are a pure function of (pattern, A, n, i, j), so regeneration after
// growth reproduces identical values regardless of access history.

struct CurveFamily::CoefficientTable {
  CoefficientPattern pattern;
  double A = 0.0;
  int N = 0;

  mutable std::shared_mutex mutex;
  mutable std::int64_t ilo = 0, jlo = 0;
  mutable std::int64_t ni = 0, nj = 0;
  mutable std::vector<Complex> data;

  void regenerate() const {
    data.assign(static_cast<std::size_t>(ni) * nj * N, Complex{});
    for (std::int64_t j = 0; j < nj; ++j)
      for (std::int64_t i = 0; i < ni; ++i) {
        Complex* row = &data[(static_cast<std::size_t>(j) * ni + i) * N];
        for (int n = 0; n < N; ++n)
          row[n] = pattern.coefficient(A, n, ilo + i, jlo + j);
      }
  }

  void ensure(std::int64_t i0, std::int64_t i1, std::int64_t j0, std::int64_t j1) const {
    if (i0 >= ilo && i1 < ilo + ni && j0 >= jlo && j1 < jlo + nj) return;
    const std::int64_t pad = 8;
    const std::int64_t nilo = std::min(ilo, i0 - pad);
    const std::int64_t nihi = std::max(ilo + ni - 1, i1 + pad);
    const std::int64_t njlo = std::min(jlo, j0 - pad);
    const std::int64_t njhi = std::max(jlo + nj - 1, j1 + pad);
    ilo = nilo;
    jlo = njlo;
    ni = nihi - nilo + 1;
    nj = njhi - njlo + 1;
    if (static_cast<double>(ni) * static_cast<double>(nj) > 4e7)
      throw Error(ErrorKind::SearchGuardExceeded,
                  "coefficient table would exceed the size guard");
    regenerate();
  }

  const Complex* row(std::int64_t i, std::int64_t j) const {
    return &data[(static_cast<std::size_t>(j - jlo) * ni + (i - ilo)) * N];
  }
};

// ---------------------------------------------------------------------------
// Weierstrass engine.  The value is computed from a fixed 0-anchored window
// after argument reduction,
//   wp(z0) = 1/z0^2 + sum_{0<|l|<=R} [1/(z0-l)^2 - 1/l^2]
//            + sum_{k=1..8} (k+1) z0^k T_{k+2},
// where T_s = G_s - S_s(window) is the exact tail of the Laurent expansion
// of the window complement (G_s full-lattice sums, odd s vanish).  The
// remainder is O(|z0|^9 * tail_{11}) and is recorded as value_err.
//
// The anchored derivative is the exact z-derivative of the same expression
// (used by pinned jets, charts and the finite-difference cross-check).  The
// public jet derivative instead uses the z-centered pure sum
//   wp'(z) = -2 sum_{|l-z|<=R} (z-l)^{-3},
// which is exactly Lambda-periodic and exactly odd about lattice midpoints,
// so symmetry identities (e.g. wp'(1/2) = 0) hold to rounding.

struct CurveFamily::WpEngine {
  std::vector<Complex> pts;  // 0-anchored window, origin excluded
  Complex S2{};              // sum over window of 1/l^2
  Complex T[9] = {};         // T[k] = G_{k+2} - S_{k+2}(window), k = 1..8
  double value_err = 0.0;
  double deriv_err_anchored = 0.0;

  void value_and_anchored_derivative(Complex z0, Complex& V, Complex& Vp) const {
    const Complex inv0 = 1.0 / z0;
    const Complex inv02 = inv0 * inv0;
    Complex sum2 = inv02;
    Complex sum3 = inv02 * inv0;
    for (const Complex& l : pts) {
      const Complex q = 1.0 / (z0 - l);
      const Complex q2 = q * q;
      sum2 += q2;
      sum3 += q2 * q;
    }
    // Horner on the tail-correction polynomials.
    Complex cv{}, cd{};
    for (int k = 8; k >= 1; --k) {
      cv = cv * z0 + static_cast<double>(k + 1) * T[k];
      cd = cd * z0 + static_cast<double>(k * (k + 1)) * T[k];
    }
    V = sum2 - S2 + cv * z0;
    Vp = -2.0 * sum3 + cd;
  }
};

void CurveFamily::init_lattice_engine() {
  const Lattice& lat = *lattice_;
  if (r_cut_ <= 0.0) r_cut_ = 20.0 * std::sqrt(lat.covolume());
  const double min_r = 2.0 * lat.covering_radius() + 2.0 * lat.longest_generator();
  r_cut_ = std::max(r_cut_, min_r);

  if (kind_ == CurveKind::WeierstrassP) {
    auto eng = std::make_shared<WpEngine>();
    eng->pts.clear();
    for (const Complex& l : lat.points_in_disk(Complex{0, 0}, r_cut_))
      if (std::norm(l) > 0.0) eng->pts.push_back(l);
    Complex S[11] = {};  // S[s] = sum l^{-s} over window, s = 2..10
    for (const Complex& l : eng->pts) {
      const Complex w = 1.0 / l;
      Complex p = w * w;
      for (int s = 2; s <= 10; ++s) {
        S[s] += p;
        p *= w;
      }
    }
    eng->S2 = S[2];
    for (int k = 1; k <= 8; ++k) {
      const int s = k + 2;
      const Complex G = (s % 2 == 0) ? lat.eisenstein(s > 10 ? 10 : s) : Complex{};
      eng->T[k] = G - S[s];
    }
    const double rho = lat.covering_radius();
    const double q = rho / r_cut_;
    const double tail11 = lat.tail_bound(11.0, r_cut_);
    const double g_err4 = lat.tail_bound(4.0, 2000.0 * std::sqrt(lat.covolume()));
    eng->value_err = 11.0 / ((1 - q) * (1 - q)) * std::pow(rho, 9.0) * tail11 +
                     4.0 * rho * rho * g_err4;
    eng->deriv_err_anchored =
        110.0 / std::pow(1 - q, 3.0) * std::pow(rho, 8.0) * tail11 +
        8.0 * rho * g_err4;
    wp_ = std::move(eng);
    value_tail_bound_ = wp_->value_err;
    deriv_tail_bound_ = 2.0 * lat.tail_bound(3.0, r_cut_);
  } else {
    const double sqn = std::sqrt(static_cast<double>(n_components_));
    value_tail_bound_ = (2.0 * A_ / sqn) * lat.tail_bound(3.0, r_cut_);
    deriv_tail_bound_ = (6.0 * A_ / sqn) * lat.tail_bound(4.0, r_cut_);
    auto table = std::make_shared<CoefficientTable>();
    table->pattern = pattern_;
    table->A = A_;
    table->N = n_components_;
    coeffs_ = std::move(table);
  }
}

// ---------------------------------------------------------------------------
// Constructors

CurveFamily CurveFamily::constant(ProjectivePoint p) {
  CurveFamily c;
  c.kind_ = CurveKind::Constant;
  c.constant_point_ = projgeom::normalize(p);
  c.n_components_ = static_cast<int>(c.constant_point_.coords.size()) - 1;
  return c;
}

CurveFamily CurveFamily::rational(std::vector<std::vector<Complex>> polys) {
  if (polys.size() < 2) throw Error(ErrorKind::InvalidInput, "need at least 2 polynomials");
  bool nonzero = false;
  for (const auto& p : polys)
    for (const Complex& a : p)
      if (std::norm(a) > 0.0) nonzero = true;
  if (!nonzero) throw Error(ErrorKind::InvalidInput, "all polynomials are zero");
  CurveFamily c;
  c.kind_ = CurveKind::Rational;
  c.polys_ = std::move(polys);
  c.n_components_ = static_cast<int>(c.polys_.size()) - 1;
  return c;
}

CurveFamily CurveFamily::exponential(std::vector<std::pair<Complex, Complex>> terms) {
  if (terms.size() < 2) throw Error(ErrorKind::InvalidInput, "need at least 2 terms");
  bool nonzero = false;
  for (const auto& [cn, an] : terms)
    if (std::norm(cn) > 0.0) nonzero = true;
  if (!nonzero) throw Error(ErrorKind::InvalidInput, "all exponential amplitudes are zero");
  CurveFamily c;
  c.kind_ = CurveKind::Exponential;
  c.exp_terms_ = std::move(terms);
  c.n_components_ = static_cast<int>(c.exp_terms_.size()) - 1;
  return c;
}

CurveFamily CurveFamily::weierstrass_p(const Lattice& lat, double r_cut) {
  CurveFamily c;
  c.kind_ = CurveKind::WeierstrassP;
  c.lattice_ = lat;
  c.n_components_ = 1;
  c.r_cut_ = r_cut;
  c.init_lattice_engine();
  return c;
}

CurveFamily CurveFamily::lattice_family(const Lattice& lat, double A, int N,
                                        CoefficientPattern pattern, double r_cut) {
  if (!(A > 0.0)) throw Error(ErrorKind::InvalidInput, "A must be positive");
  if (N < 1) throw Error(ErrorKind::InvalidInput, "N must be >= 1");
  auto check_annulus = [&](const std::vector<Complex>& v) {
    if (static_cast<int>(v.size()) != N)
      throw Error(ErrorKind::InvalidInput, "pattern component count != N");
    for (const Complex& a : v) {
      const double m = std::abs(a);
      if (m < A * (1.0 - 1e-12) || m > 2.0 * A * (1.0 + 1e-12))
        throw Error(ErrorKind::InvalidInput,
                    "pattern coefficient outside the annulus [A, 2A]");
    }
  };
  if (pattern.mode == CoefficientPattern::Mode::Constant) check_annulus(pattern.constant);
  if (pattern.mode == CoefficientPattern::Mode::Periodic)
    for (const auto& v : pattern.block) check_annulus(v);

  CurveFamily c;
  c.kind_ = CurveKind::LatticeFamily;
  c.lattice_ = lat;
  c.A_ = A;
  c.n_components_ = N;
  c.pattern_ = std::move(pattern);
  c.r_cut_ = r_cut;
  c.init_lattice_engine();
  return c;
}

bool CurveFamily::periodic() const {
  if (kind_ == CurveKind::WeierstrassP) return true;
  if (kind_ != CurveKind::LatticeFamily) return false;
  return pattern_.mode != CoefficientPattern::Mode::Random;
}

Complex CurveFamily::period1() const {
  if (!pole_bearing()) throw Error(ErrorKind::InvalidInput, "curve has no period lattice");
  const double pi = (kind_ == CurveKind::LatticeFamily &&
                     pattern_.mode == CoefficientPattern::Mode::Periodic)
                        ? static_cast<double>(pattern_.period_i)
                        : 1.0;
  return lattice_->omega1() * pi * scale_;
}

Complex CurveFamily::period2() const {
  if (!pole_bearing()) throw Error(ErrorKind::InvalidInput, "curve has no period lattice");
  const double pj = (kind_ == CurveKind::LatticeFamily &&
                     pattern_.mode == CoefficientPattern::Mode::Periodic)
                        ? static_cast<double>(pattern_.period_j)
                        : 1.0;
  return lattice_->omega2() * pj * scale_;
}

double CurveFamily::pole_guard() const {
  if (!pole_bearing()) return 0.0;
  return lattice_->delta() * scale_ * 0.25;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

ProjectiveJet scale_jet_derivative(ProjectiveJet jet, double inv_scale) {
  for (Complex& d : jet.derivative) d *= inv_scale;
  return jet;
}

}  // namespace

ProjectiveJet CurveFamily::lattice_jet_inner(Complex zi, Complex pin,
                                             bool chart_ok) const {
  const Lattice& lat = *lattice_;
  std::int64_t i0, j0;
  lat.nearest(pin, i0, j0);
  const Complex lam0 = lat.point(i0, j0);
  const double d = std::abs(zi - lam0);
  const bool use_chart = chart_ok && d < 0.5 * lat.delta();

  if (kind_ == CurveKind::WeierstrassP) {
    Complex V, Vp;
    const Complex z0 = zi - lam0;
    if (use_chart && std::norm(z0) == 0.0) {
      // Exact pole: [1:wp] extends to [0:1] with vanishing derivative.
      ProjectiveJet jet;
      jet.value = ProjectivePoint{{Complex{0, 0}, Complex{1, 0}}};
      jet.derivative = {Complex{0, 0}, Complex{0, 0}};
      return jet;
    }
    wp_->value_and_anchored_derivative(z0, V, Vp);
    ProjectiveJet jet;
    if (use_chart) {
      // Reciprocal lift [1/wp : 1]; value and derivative stay consistent
      // because both come from the anchored expression.
      const Complex invV = 1.0 / V;
      jet.value = ProjectivePoint{{invV, Complex{1, 0}}};
      jet.derivative = {-Vp * invV * invV, Complex{0, 0}};
      jet.chart_scale = V;
      return jet;
    }
    Complex D;
    if (std::abs(zi - pin) < 1e-15) {
      // Public derivative: z-centered pure sum (exactly periodic and odd).
      auto& win = tl_window;
      lat.indices_in_disk(zi, r_cut_, win);
      Complex s3{};
      for (auto [i, j] : win) {
        const Complex q = 1.0 / (zi - lat.point(i, j));
        s3 += q * q * q;
      }
      D = -2.0 * s3;
    } else {
      D = Vp;  // pinned evaluation keeps the anchored pair
    }
    jet.value = ProjectivePoint{{Complex{1, 0}, V}};
    jet.derivative = {Complex{0, 0}, D};
    return jet;
  }

  // Lattice family f_a.
  const int N = n_components_;
  const double inv_sqn = 1.0 / std::sqrt(static_cast<double>(N));
  auto& win = tl_window;
  lat.indices_in_disk(pin, r_cut_, win);
  // Make sure the chart center is inside the window even if the pin drifted.
  if (use_chart && std::abs(lam0 - pin) > r_cut_)
    throw Error(ErrorKind::ChartError, "chart center outside truncation window");

  std::int64_t bi0 = 0, bi1 = 0, bj0 = 0, bj1 = 0;
  bool first = true;
  for (auto [i, j] : win) {
    if (first) {
      bi0 = bi1 = i;
      bj0 = bj1 = j;
      first = false;
    } else {
      bi0 = std::min(bi0, i);
      bi1 = std::max(bi1, i);
      bj0 = std::min(bj0, j);
      bj1 = std::max(bj1, j);
    }
  }
  std::shared_lock<std::shared_mutex> lock;
  {
    std::unique_lock<std::shared_mutex> grow(coeffs_->mutex);
    coeffs_->ensure(bi0, bi1, bj0, bj1);
  }
  lock = std::shared_lock<std::shared_mutex>(coeffs_->mutex);

  std::vector<Complex> F(static_cast<std::size_t>(N)), dF(static_cast<std::size_t>(N));
  for (auto [i, j] : win) {
    if (use_chart && i == i0 && j == j0) continue;  // chart excludes its pole
    const Complex lam = lat.point(i, j);
    const Complex q = 1.0 / (zi - lam);
    const Complex q3 = q * q * q;
    const Complex q4 = q3 * q;
    const Complex* a = coeffs_->row(i, j);
    for (int n = 0; n < N; ++n) {
      F[static_cast<std::size_t>(n)] += a[n] * q3;
      dF[static_cast<std::size_t>(n)] += a[n] * q4;
    }
  }

  ProjectiveJet jet;
  if (use_chart) {
    const Complex zt = zi - lam0;
    const Complex zt2 = zt * zt;
    const Complex zt3 = zt2 * zt;
    const Complex* a0 = coeffs_->row(i0, j0);
    std::vector<Complex> v(static_cast<std::size_t>(N) + 1),
        dv(static_cast<std::size_t>(N) + 1);
    v[0] = zt3;
    dv[0] = 3.0 * zt2;
    for (int n = 0; n < N; ++n) {
      const Complex T = F[static_cast<std::size_t>(n)];
      const Complex dT = -3.0 * dF[static_cast<std::size_t>(n)];
      v[static_cast<std::size_t>(n) + 1] = (a0[n] + zt3 * T) * inv_sqn;
      dv[static_cast<std::size_t>(n) + 1] = (3.0 * zt2 * T + zt3 * dT) * inv_sqn;
    }
    jet.value = ProjectivePoint{std::move(v)};
    jet.derivative = std::move(dv);
    jet.chart_scale = zt3;
    return jet;
  }
  std::vector<Complex> v(static_cast<std::size_t>(N) + 1),
      dv(static_cast<std::size_t>(N) + 1);
  v[0] = Complex{1, 0};
  dv[0] = Complex{0, 0};
  for (int n = 0; n < N; ++n) {
    v[static_cast<std::size_t>(n) + 1] = F[static_cast<std::size_t>(n)] * inv_sqn;
    dv[static_cast<std::size_t>(n) + 1] = -3.0 * dF[static_cast<std::size_t>(n)] * inv_sqn;
  }
  jet.value = ProjectivePoint{std::move(v)};
  jet.derivative = std::move(dv);
  return jet;
}

ProjectiveJet CurveFamily::eval_jet(Complex z) const {
  const Complex zi = z / scale_ + offset_;
  const double inv_scale = 1.0 / scale_;
  switch (kind_) {
    case CurveKind::Constant: {
      ProjectiveJet jet;
      jet.value = constant_point_;
      jet.derivative.assign(jet.value.coords.size(), Complex{});
      return jet;
    }
    case CurveKind::Rational: {
      ProjectiveJet jet;
      std::vector<Complex> v, dv;
      for (const auto& p : polys_) {
        Complex val{}, der{};
        for (std::size_t k = p.size(); k-- > 0;) {
          der = der * zi + val;
          val = val * zi + p[k];
        }
        v.push_back(val);
        dv.push_back(der);
      }
      jet.value = ProjectivePoint{std::move(v)};
      jet.derivative = std::move(dv);
      return scale_jet_derivative(std::move(jet), inv_scale);
    }
    case CurveKind::Exponential: {
      // Stabilized lift: divide by exp(m) with m = max Re(a z) + log|c|
      // (a constant at fixed z, so the jet transforms by a plain scalar).
      double m = -1e300;
      for (const auto& [cn, an] : exp_terms_)
        if (std::norm(cn) > 0.0)
          m = std::max(m, std::real(an * zi) + std::log(std::abs(cn)));
      ProjectiveJet jet;
      std::vector<Complex> v, dv;
      for (const auto& [cn, an] : exp_terms_) {
        if (std::norm(cn) > 0.0) {
          const Complex e =
              cn * std::exp(Complex{std::real(an * zi) - m, std::imag(an * zi)});
          v.push_back(e);
          dv.push_back(an * e);
        } else {
          v.push_back(Complex{});
          dv.push_back(Complex{});
        }
      }
      jet.value = ProjectivePoint{std::move(v)};
      jet.derivative = std::move(dv);
      jet.chart_scale = Complex{std::exp(m), 0.0};
      return scale_jet_derivative(std::move(jet), inv_scale);
    }
    case CurveKind::WeierstrassP:
    case CurveKind::LatticeFamily: {
      if (lattice_->distance_to_lattice(zi) < 0.25 * lattice_->delta())
        throw Error(ErrorKind::PoleProximity,
                    "z within delta/4 of a lattice pole; use eval_chart");
      return scale_jet_derivative(lattice_jet_inner(zi, zi, false), inv_scale);
    }
  }
  throw Error(ErrorKind::InvalidInput, "bad curve kind");
}

ChartData CurveFamily::eval_chart(Complex z) const {
  if (kind_ != CurveKind::LatticeFamily)
    throw Error(ErrorKind::InvalidInput, "eval_chart is defined for lattice families");
  const Lattice& lat = *lattice_;
  const Complex zi = z / scale_ + offset_;
  std::int64_t i0, j0;
  double tie_gap = 0.0;
  lat.nearest(zi, i0, j0, &tie_gap);
  const Complex lam0 = lat.point(i0, j0);
  if (std::abs(zi - lam0) >= lat.delta())
    throw Error(ErrorKind::ChartError, "chart requires |z - lambda0| < delta");
  if (tie_gap < 1e-9 && std::abs(zi - lam0) > 0.25 * lat.delta())
    throw Error(ErrorKind::ChartError,
                "ambiguous nearest lattice point; perturb z and retry");

  const int N = n_components_;
  const double inv_sqn = 1.0 / std::sqrt(static_cast<double>(N));
  auto& win = tl_window;
  lat.indices_in_disk(zi, r_cut_, win);
  std::int64_t bi0 = i0, bi1 = i0, bj0 = j0, bj1 = j0;
  for (auto [i, j] : win) {
    bi0 = std::min(bi0, i);
    bi1 = std::max(bi1, i);
    bj0 = std::min(bj0, j);
    bj1 = std::max(bj1, j);
  }
  {
    std::unique_lock<std::shared_mutex> grow(coeffs_->mutex);
    coeffs_->ensure(bi0, bi1, bj0, bj1);
  }
  std::shared_lock<std::shared_mutex> lock(coeffs_->mutex);

  ChartData out;
  out.lambda0_inner = lam0;
  out.lambda0_outer = (lam0 - offset_) * scale_;
  out.inner_derivative = 1.0 / scale_;
  const Complex zt = zi - lam0;
  out.local_offset = zt;
  out.local_factor = zt * zt * zt;
  out.g.assign(static_cast<std::size_t>(N), Complex{});
  out.dg.assign(static_cast<std::size_t>(N), Complex{});

  std::vector<Complex> T(static_cast<std::size_t>(N)), dT(static_cast<std::size_t>(N));
  for (auto [i, j] : win) {
    if (i == i0 && j == j0) continue;
    const Complex lam = lat.point(i, j);
    const Complex q = 1.0 / (zi - lam);
    const Complex q3 = q * q * q;
    const Complex q4 = q3 * q;
    const Complex* a = coeffs_->row(i, j);
    for (int n = 0; n < N; ++n) {
      T[static_cast<std::size_t>(n)] += a[n] * q3;
      dT[static_cast<std::size_t>(n)] += a[n] * q4;
    }
  }
  const Complex zt2 = zt * zt;
  const Complex zt3 = out.local_factor;
  const Complex* a0 = coeffs_->row(i0, j0);
  for (int n = 0; n < N; ++n) {
    const std::size_t un = static_cast<std::size_t>(n);
    out.g[un] = (a0[n] + zt3 * T[un]) * inv_sqn;
    out.dg[un] = (3.0 * zt2 * T[un] - 3.0 * zt3 * dT[un]) * inv_sqn;
  }
  return out;
}

projgeom::ProjectiveJet ChartData::jet() const {
  projgeom::ProjectiveJet jet;
  std::vector<Complex> v(g.size() + 1), dv(g.size() + 1);
  v[0] = local_factor;
  dv[0] = 3.0 * local_offset * local_offset;
  for (std::size_t n = 0; n < g.size(); ++n) {
    v[n + 1] = g[n];
    dv[n + 1] = dg[n];
  }
  jet.value = projgeom::ProjectivePoint{std::move(v)};
  jet.derivative = std::move(dv);
  for (Complex& d : jet.derivative) d *= inner_derivative;
  jet.chart_scale = local_factor;
  return jet;
}

ProjectiveJet CurveFamily::jet(Complex z) const {
  if (!pole_bearing()) return eval_jet(z);
  const Complex zi = z / scale_ + offset_;
  return scale_jet_derivative(lattice_jet_inner(zi, zi, true), 1.0 / scale_);
}

ProjectiveJet CurveFamily::jet_pinned(Complex z, Complex pin) const {
  if (!pole_bearing()) return eval_jet(z);
  const Complex zi = z / scale_ + offset_;
  const Complex pin_inner = pin / scale_ + offset_;
  return scale_jet_derivative(lattice_jet_inner(zi, pin_inner, true), 1.0 / scale_);
}

// ---------------------------------------------------------------------------
// Reparameterizations

CurveFamily CurveFamily::rescaled(double c) const {
  if (!(c > 0.0)) throw Error(ErrorKind::InvalidInput, "rescale factor must be > 0");
  CurveFamily out = *this;
  switch (kind_) {
    case CurveKind::Constant:
      return out;
    case CurveKind::Rational: {
      for (auto& p : out.polys_) {
        double f = 1.0;
        for (std::size_t k = 0; k < p.size(); ++k) {
          p[k] *= f;
          f /= c;
        }
      }
      return out;
    }
    case CurveKind::Exponential: {
      for (auto& [cn, an] : out.exp_terms_) an /= c;
      return out;
    }
    case CurveKind::WeierstrassP:
    case CurveKind::LatticeFamily: {
      out.scale_ *= c;
      out.deriv_tail_bound_ /= c;
      return out;
    }
  }
  throw Error(ErrorKind::InvalidInput, "bad curve kind");
}

CurveFamily CurveFamily::translated(Complex a) const {
  CurveFamily out = *this;
  switch (kind_) {
    case CurveKind::Constant:
      return out;
    case CurveKind::Rational: {
      for (auto& p : out.polys_) {
        // p(z + a) via repeated synthetic division.
        std::vector<Complex> q = p;
        for (std::size_t k = 0; k + 1 < q.size(); ++k)
          for (std::size_t m = q.size() - 1; m > k; --m) q[m - 1] += a * q[m];
        p = std::move(q);
      }
      return out;
    }
    case CurveKind::Exponential: {
      for (auto& [cn, an] : out.exp_terms_) cn *= std::exp(an * a);
      return out;
    }
    case CurveKind::WeierstrassP:
    case CurveKind::LatticeFamily: {
      out.offset_ += a / scale_;
      return out;
    }
  }
  throw Error(ErrorKind::InvalidInput, "bad curve kind");
}

// ---------------------------------------------------------------------------
// Finite-difference oracle

double energy_density_fd(const CurveFamily& curve, Complex z, double h) {
  auto u = [&](Complex w) {
    const ProjectiveJet jet = curve.jet_pinned(w, z);
    const auto& v = jet.value.coords;
    const double n0 = std::norm(v[0]);
    double ns = 0.0;
    for (const Complex& c : v) ns += std::norm(c);
    if (!(n0 > 0.0) || n0 < ns * 1e-280)
      throw Error(ErrorKind::ChartError,
                  "finite-difference stencil hits a pole of the affine lift");
    // log(1 + sum |v_i/v_0|^2) without overflow.
    return (std::log(ns) - std::log(n0)) / (4.0 * kPi);
  };
  const double lap = (u(z + h) + u(z - h) + u(z + Complex{0, h}) + u(z - Complex{0, h}) -
                      4.0 * u(z)) /
                     (h * h);
  return lap;
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::ordered_json lattice_to_json(const Lattice& lat) {
  nlohmann::ordered_json j;
  j["omega1"] = cjson(lat.omega1());
  j["omega2"] = cjson(lat.omega2());
  j["delta"] = lat.delta();
  return j;
}

Lattice lattice_from_json(const nlohmann::ordered_json& j) {
  return Lattice(cfrom(j.at("omega1")), cfrom(j.at("omega2")),
                 j.at("delta").get<double>());
}

nlohmann::ordered_json CurveFamily::to_json() const {
  nlohmann::ordered_json j;
  switch (kind_) {
    case CurveKind::Constant: {
      j["kind"] = "constant";
      nlohmann::ordered_json coords = nlohmann::ordered_json::array();
      for (const Complex& c : constant_point_.coords) coords.push_back(cjson(c));
      j["point"] = coords;
      break;
    }
    case CurveKind::Rational: {
      j["kind"] = "rational";
      nlohmann::ordered_json polys = nlohmann::ordered_json::array();
      for (const auto& p : polys_) {
        nlohmann::ordered_json poly = nlohmann::ordered_json::array();
        for (const Complex& c : p) poly.push_back(cjson(c));
        polys.push_back(poly);
      }
      j["polys"] = polys;
      break;
    }
    case CurveKind::Exponential: {
      j["kind"] = "exponential";
      nlohmann::ordered_json terms = nlohmann::ordered_json::array();
      for (const auto& [cn, an] : exp_terms_)
        terms.push_back(nlohmann::ordered_json::array({cjson(cn), cjson(an)}));
      j["terms"] = terms;
      break;
    }
    case CurveKind::WeierstrassP: {
      j["kind"] = "weierstrass_p";
      j["lattice"] = lattice_to_json(*lattice_);
      j["r_cut"] = r_cut_;
      break;
    }
    case CurveKind::LatticeFamily: {
      j["kind"] = "lattice_family";
      j["lattice"] = lattice_to_json(*lattice_);
      j["A"] = A_;
      j["N"] = n_components_;
      nlohmann::ordered_json pat;
      switch (pattern_.mode) {
        case CoefficientPattern::Mode::Random:
          pat["mode"] = "random";
          pat["seed"] = pattern_.seed;
          pat["generator"] = kGeneratorId;
          break;
        case CoefficientPattern::Mode::Constant: {
          pat["mode"] = "constant";
          nlohmann::ordered_json vals = nlohmann::ordered_json::array();
          for (const Complex& c : pattern_.constant) vals.push_back(cjson(c));
          pat["values"] = vals;
          break;
        }
        case CoefficientPattern::Mode::Periodic: {
          pat["mode"] = "periodic";
          pat["period_i"] = pattern_.period_i;
          pat["period_j"] = pattern_.period_j;
          nlohmann::ordered_json blk = nlohmann::ordered_json::array();
          for (const auto& v : pattern_.block) {
            nlohmann::ordered_json vals = nlohmann::ordered_json::array();
            for (const Complex& c : v) vals.push_back(cjson(c));
            blk.push_back(vals);
          }
          pat["block"] = blk;
          break;
        }
      }
      j["pattern"] = pat;
      j["r_cut"] = r_cut_;
      j["value_tail_bound"] = value_tail_bound_;
      j["deriv_tail_bound"] = deriv_tail_bound_;
      break;
    }
  }
  if (scale_ != 1.0) j["scale"] = scale_;
  if (std::norm(offset_) > 0.0) j["offset"] = cjson(offset_);
  return j;
}

CurveFamily CurveFamily::from_json(const nlohmann::ordered_json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  CurveFamily out;
  if (kind == "constant") {
    std::vector<Complex> coords;
    for (const auto& c : j.at("point")) coords.push_back(cfrom(c));
    out = constant(ProjectivePoint{std::move(coords)});
  } else if (kind == "rational") {
    std::vector<std::vector<Complex>> polys;
    for (const auto& p : j.at("polys")) {
      std::vector<Complex> poly;
      for (const auto& c : p) poly.push_back(cfrom(c));
      polys.push_back(std::move(poly));
    }
    out = rational(std::move(polys));
  } else if (kind == "exponential") {
    std::vector<std::pair<Complex, Complex>> terms;
    for (const auto& t : j.at("terms")) terms.emplace_back(cfrom(t.at(0)), cfrom(t.at(1)));
    out = exponential(std::move(terms));
  } else if (kind == "weierstrass_p") {
    out = weierstrass_p(lattice_from_json(j.at("lattice")),
                        j.value("r_cut", 0.0));
  } else if (kind == "lattice_family") {
    const auto& pj = j.at("pattern");
    CoefficientPattern pat;
    const std::string mode = pj.at("mode").get<std::string>();
    if (mode == "random") {
      pat = CoefficientPattern::random(pj.at("seed").get<std::uint64_t>());
    } else if (mode == "constant") {
      std::vector<Complex> vals;
      for (const auto& c : pj.at("values")) vals.push_back(cfrom(c));
      pat = CoefficientPattern::constant_values(std::move(vals));
    } else if (mode == "periodic") {
      std::vector<std::vector<Complex>> blk;
      for (const auto& v : pj.at("block")) {
        std::vector<Complex> vals;
        for (const auto& c : v) vals.push_back(cfrom(c));
        blk.push_back(std::move(vals));
      }
      pat = CoefficientPattern::periodic(pj.at("period_i").get<std::int64_t>(),
                                         pj.at("period_j").get<std::int64_t>(),
                                         std::move(blk));
    } else {
      throw Error(ErrorKind::InvalidInput, "unknown pattern mode: " + mode);
    }
    out = lattice_family(lattice_from_json(j.at("lattice")), j.at("A").get<double>(),
                         j.at("N").get<int>(), std::move(pat), j.value("r_cut", 0.0));
  } else {
    throw Error(ErrorKind::InvalidInput, "unknown curve kind: " + kind);
  }
  if (j.contains("scale")) out = out.rescaled(j.at("scale").get<double>());
  if (j.contains("offset")) {
    const Complex off = cfrom(j.at("offset"));
    out = out.translated(off * out.scale_);
  }
  return out;
}

std::string CurveFamily::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case CurveKind::Constant:
      os << "constant";
      break;
    case CurveKind::Rational:
      os << "rational[N=" << n_components_ << "]";
      break;
    case CurveKind::Exponential:
      os << "exponential[N=" << n_components_ << "]";
      break;
    case CurveKind::WeierstrassP:
      os << "weierstrass_p";
      break;
    case CurveKind::LatticeFamily:
      os << "lattice_family[N=" << n_components_ << ",A=" << A_ << "]";
      break;
  }
  if (scale_ != 1.0) os << "@scale=" << scale_;
  return os.str();
}

}  // namespace brodylab::curves
