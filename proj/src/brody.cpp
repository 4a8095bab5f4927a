#include "brodylab/brody.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <thread>

#include "brodylab/nevanlinna.hpp"

namespace brodylab::brody {

namespace {

using curves::CurveFamily;

std::string Region_describe(const Region& r) {
  std::ostringstream os;
  switch (r.kind) {
    case Region::Kind::Rectangle:
      os << "rect[" << r.lo.real() << "," << r.hi.real() << "]x[" << r.lo.imag()
         << "," << r.hi.imag() << "]";
      break;
    case Region::Kind::FundamentalDomain:
      os << "fundamental_domain";
      break;
    case Region::Kind::Block3x3:
      os << "block3x3";
      break;
  }
  return os.str();
}

struct ParamRegion {
  // z = origin + u * e1 + v * e2, (u, v) in [0, 1]^2
  Complex origin, e1, e2;
};

ParamRegion resolve_region(const CurveFamily& curve, const Region& region) {
  switch (region.kind) {
    case Region::Kind::Rectangle: {
      if (!(region.hi.real() > region.lo.real() && region.hi.imag() > region.lo.imag()))
        throw Error(ErrorKind::InvalidInput, "degenerate rectangle region");
      return ParamRegion{region.lo, Complex{region.hi.real() - region.lo.real(), 0.0},
                         Complex{0.0, region.hi.imag() - region.lo.imag()}};
    }
    case Region::Kind::FundamentalDomain: {
      if (!curve.pole_bearing() || !curve.periodic())
        throw Error(ErrorKind::InvalidInput,
                    "fundamental-domain scan requires a lattice-periodic curve");
      return ParamRegion{Complex{0, 0}, curve.period1(), curve.period2()};
    }
    case Region::Kind::Block3x3: {
      if (!curve.pole_bearing())
        throw Error(ErrorKind::InvalidInput, "block scan requires a lattice curve");
      const Complex p1 = curve.lattice()->omega1() * curve.scale();
      const Complex p2 = curve.lattice()->omega2() * curve.scale();
      return ParamRegion{-1.5 * (p1 + p2), 3.0 * p1, 3.0 * p2};
    }
  }
  throw Error(ErrorKind::InvalidInput, "bad region kind");
}

// Pole positions (outer coordinates) inside the region bounding box plus a
// margin; chart-neighborhood rings are added around these.
std::vector<Complex> region_poles(const CurveFamily& curve, const ParamRegion& pr) {
  std::vector<Complex> out;
  if (!curve.pole_bearing()) return out;
  const auto* lat = curve.lattice();
  const double scale = curve.scale();
  const Complex off = curve.offset();
  const Complex center = pr.origin + 0.5 * (pr.e1 + pr.e2);
  const double rad = 0.5 * (std::abs(pr.e1) + std::abs(pr.e2)) +
                     lat->delta() * scale;
  std::vector<std::pair<std::int64_t, std::int64_t>> idx;
  lat->indices_in_disk(center / scale + off, rad / scale, idx);
  for (auto [i, j] : idx) out.push_back((lat->point(i, j) - off) * scale);
  return out;
}

double scan_level(const CurveFamily& curve, const ParamRegion& pr,
                  const std::vector<Complex>& poles, int level, int base) {
  const int n = base * (1 << level) + 1;
  double sup2 = 0.0;
  for (int iu = 0; iu < n; ++iu) {
    const double u = static_cast<double>(iu) / (n - 1);
    for (int iv = 0; iv < n; ++iv) {
      const double v = static_cast<double>(iv) / (n - 1);
      const Complex z = pr.origin + u * pr.e1 + v * pr.e2;
      sup2 = std::max(sup2, curve.density(z));
    }
  }
  // Polar rings around poles resolve the chart neighborhoods.
  if (!poles.empty()) {
    const double dhat = curve.lattice()->delta() * curve.scale();
    const int nr = 8;
    const int na = 32 * (1 << level);
    for (const Complex& p : poles) {
      for (int jr = 1; jr <= nr; ++jr) {
        const double rad = 0.5 * dhat * jr / nr;
        for (int ia = 0; ia < na; ++ia) {
          const double th = 2.0 * kPi * ia / na;
          const Complex z = p + Complex{rad * std::cos(th), rad * std::sin(th)};
          sup2 = std::max(sup2, curve.density(z));
        }
      }
    }
  }
  return std::sqrt(sup2);
}

}  // namespace

std::string Region::describe() const { return Region_describe(*this); }

double SupNormReport::sup_upper() const {
  const double slack = refinement_deltas.empty() ? 0.0 : refinement_deltas.back();
  return sup_estimate + 2.0 * slack + 1e-9 * std::max(1.0, sup_estimate);
}

SupNormReport sup_norm_estimate(const CurveFamily& curve, const Region& region,
                                double tol, int max_levels) {
  const ParamRegion pr = resolve_region(curve, region);
  const std::vector<Complex> poles = region_poles(curve, pr);

  // Base resolution: a few nodes per density feature.
  double feature = 0.25 * (std::abs(pr.e1) + std::abs(pr.e2));
  if (curve.pole_bearing())
    feature = std::min(feature, curve.lattice()->delta() * curve.scale());
  const double extent = std::max(std::abs(pr.e1), std::abs(pr.e2));
  const int base = std::max(8, static_cast<int>(std::ceil(4.0 * extent / feature)));

  SupNormReport report;
  report.curve_id = curve.describe();
  report.region = region.describe();
  double prev = scan_level(curve, pr, poles, 0, base);
  for (int level = 1; level <= max_levels; ++level) {
    const double cur = scan_level(curve, pr, poles, level, base);
    report.refinement_deltas.push_back(std::abs(cur - prev));
    report.grid_levels = level;
    report.sup_estimate = cur;
    prev = cur;
    if (report.refinement_deltas.back() < tol) {
      report.converged = true;
      return report;
    }
  }
  report.converged = false;
  return report;
}

curves::CurveFamily brody_rescale(const CurveFamily& curve, double sup) {
  if (!(sup > 0.0))
    throw Error(ErrorKind::InvalidInput, "brody_rescale needs a positive sup bound");
  return curve.rescaled(sup);
}

Prop31Result prop31_experiment(const curves::Lattice& lat, double A,
                               const std::vector<int>& N_list, int trials,
                               std::uint64_t seed, double tol) {
  if (trials < 1) throw Error(ErrorKind::InvalidInput, "trials must be >= 1");
  if (N_list.empty()) throw Error(ErrorKind::InvalidInput, "empty N list");

  Prop31Result result;
  result.rows.resize(N_list.size() * static_cast<std::size_t>(trials));

  // Deterministic work list; trials run concurrently, output slots fixed.
  struct Job {
    int N, trial;
    std::size_t slot;
  };
  std::vector<Job> jobs;
  for (std::size_t k = 0; k < N_list.size(); ++k)
    for (int t = 0; t < trials; ++t)
      jobs.push_back(Job{N_list[k], t, k * static_cast<std::size_t>(trials) +
                                           static_cast<std::size_t>(t)});

  auto run_job = [&](const Job& job) {
    const std::uint64_t trial_seed =
        mix_key(seed, static_cast<std::uint64_t>(job.N),
                static_cast<std::uint64_t>(job.trial), 0x70726f7033ULL);
    const CurveFamily curve = CurveFamily::lattice_family(
        lat, A, job.N, curves::CoefficientPattern::random(trial_seed));
    const SupNormReport rep =
        sup_norm_estimate(curve, Region::block3x3(), tol, 8);
    result.rows[job.slot] =
        Prop31Row{job.N, job.trial, rep.sup_estimate, rep.converged};
  };

  const int nthreads = std::min<int>(nevanlinna::threads(),
                                     static_cast<int>(jobs.size()));
  if (nthreads > 1) {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < nthreads; ++w)
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t k = next.fetch_add(1);
          if (k >= jobs.size()) return;
          run_job(jobs[k]);
        }
      });
    for (auto& th : pool) th.join();
  } else {
    for (const Job& job : jobs) run_job(job);
  }

  for (std::size_t k = 0; k < N_list.size(); ++k) {
    Prop31Summary s;
    s.N = N_list[k];
    double acc = 0.0;
    for (int t = 0; t < trials; ++t) {
      const Prop31Row& row = result.rows[k * static_cast<std::size_t>(trials) +
                                         static_cast<std::size_t>(t)];
      s.max_sup = std::max(s.max_sup, row.sup);
      acc += row.sup;
    }
    s.mean_sup = acc / trials;
    result.summary.push_back(s);
  }
  result.baseline_sup = result.summary.front().max_sup;
  return result;
}

void Prop31Result::write_csv(std::ostream& os) const {
  os << "N,trial,sup,converged\n";
  char buf[96];
  for (const Prop31Row& row : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%d\n", row.N, row.trial, row.sup,
                  row.converged ? 1 : 0);
    os << buf;
  }
}

BoundsReport bounds_report(int N, double e_value, double covolume) {
  if (N < 1) throw Error(ErrorKind::InvalidInput, "N must be >= 1");
  if (e_value < 0.0 || e_value > 1.0)
    throw Error(ErrorKind::InvalidInput, "mean energy must lie in [0, 1]");
  if (!(covolume > 0.0)) throw Error(ErrorKind::InvalidInput, "covolume must be > 0");
  BoundsReport r;
  r.N = N;
  r.e_value = e_value;
  r.covolume = covolume;
  r.lower_bound = 2.0 * N / covolume;
  r.upper_bound = 4.0 * e_value * N;
  r.consistent = r.lower_bound <= r.upper_bound;
  return r;
}

}  // namespace brodylab::brody
