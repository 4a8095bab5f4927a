#include "brodylab/widim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace brodylab::widim {

namespace {

void check_cover_shape(const GridBoxCover& cover) {
  if (cover.N < 1 || cover.m < 1)
    throw Error(ErrorKind::InvalidInput, "cover needs N >= 1 and m >= 1");
  for (const GridBox& b : cover.boxes) {
    if (static_cast<int>(b.intervals.size()) != cover.N)
      throw Error(ErrorKind::InvalidInput, "box dimension != N");
    for (auto [lo, hi] : b.intervals)
      if (lo < 0 || hi > cover.m || lo >= hi)
        throw Error(ErrorKind::InvalidInput, "box interval out of range or empty");
  }
}

// Half-step points per axis: 0..2m; box [lo, hi] contains half-step h iff
// 2 lo <= h <= 2 hi.
struct HalfStepIter {
  int N, side;
  std::vector<int> h;
  bool done = false;
  explicit HalfStepIter(int N_, int m) : N(N_), side(2 * m + 1), h(N_, 0) {}
  void next() {
    for (int d = 0; d < N; ++d) {
      if (++h[static_cast<std::size_t>(d)] < side) return;
      h[static_cast<std::size_t>(d)] = 0;
    }
    done = true;
  }
};

std::string point_string(const std::vector<int>& h, int m) {
  std::ostringstream os;
  os << "(";
  for (std::size_t d = 0; d < h.size(); ++d)
    os << (d ? "," : "") << h[d] << "/" << 2 * m;
  os << ")";
  return os.str();
}

}  // namespace

double GridBoxCover::mesh() const {
  double mesh = 0.0;
  for (const GridBox& b : boxes)
    for (auto [lo, hi] : b.intervals)
      mesh = std::max(mesh, static_cast<double>(hi - lo) / m);
  return mesh;
}

int cover_order(const GridBoxCover& cover) {
  check_cover_shape(cover);
  const double npoints = std::pow(2.0 * cover.m + 1.0, cover.N);
  if (npoints > 4e6)
    throw Error(ErrorKind::SearchGuardExceeded,
                "half-step lattice too large for cover_order");
  int max_mult = 0;
  for (HalfStepIter it(cover.N, cover.m); !it.done; it.next()) {
    int mult = 0;
    for (const GridBox& b : cover.boxes) {
      bool inside = true;
      for (int d = 0; d < cover.N; ++d) {
        const auto [lo, hi] = b.intervals[static_cast<std::size_t>(d)];
        const int h = it.h[static_cast<std::size_t>(d)];
        if (h < 2 * lo || h > 2 * hi) {
          inside = false;
          break;
        }
      }
      if (inside) ++mult;
    }
    if (mult == 0)
      throw Error(ErrorKind::InvalidInput,
                  "boxes do not cover the cube: uncovered half-step point " +
                      point_string(it.h, cover.m));
    max_mult = std::max(max_mult, mult);
  }
  return max_mult - 1;
}

namespace {

// Iterative-deepening exact cover search: does a set of candidate boxes
// cover all half-step points with multiplicity <= cap everywhere?
struct CoverSearch {
  int n_points = 0;
  int n_boxes = 0;
  std::vector<std::vector<int>> boxes_of_point;
  std::vector<std::vector<int>> points_of_box;
  long guard = 0;
  long nodes = 0;

  std::vector<int> count;     // per-point multiplicity of chosen boxes
  std::vector<char> chosen;
  std::vector<char> banned;   // boxes that would exceed the cap

  bool dfs(int cap, std::vector<int>& pick) {
    if (++nodes > guard)
      throw Error(ErrorKind::SearchGuardExceeded,
                  "min_order_box_cover exceeded the search-node guard");
    // Most-constrained uncovered point.
    int best_p = -1;
    std::size_t best_deg = 0;
    for (int p = 0; p < n_points; ++p) {
      if (count[static_cast<std::size_t>(p)] > 0) continue;
      std::size_t deg = 0;
      for (int b : boxes_of_point[static_cast<std::size_t>(p)])
        if (!banned[static_cast<std::size_t>(b)] && !chosen[static_cast<std::size_t>(b)])
          ++deg;
      if (deg == 0) return false;
      if (best_p < 0 || deg < best_deg) {
        best_p = p;
        best_deg = deg;
      }
    }
    if (best_p < 0) return true;  // everything covered within the cap

    std::vector<int> banned_here;
    for (int b : boxes_of_point[static_cast<std::size_t>(best_p)]) {
      if (banned[static_cast<std::size_t>(b)] || chosen[static_cast<std::size_t>(b)])
        continue;
      // Admissible only if no point of b is already at the cap.
      bool ok = true;
      for (int p : points_of_box[static_cast<std::size_t>(b)])
        if (count[static_cast<std::size_t>(p)] >= cap) {
          ok = false;
          break;
        }
      if (!ok) continue;
      chosen[static_cast<std::size_t>(b)] = 1;
      for (int p : points_of_box[static_cast<std::size_t>(b)])
        ++count[static_cast<std::size_t>(p)];
      pick.push_back(b);
      if (dfs(cap, pick)) return true;
      pick.pop_back();
      for (int p : points_of_box[static_cast<std::size_t>(b)])
        --count[static_cast<std::size_t>(p)];
      chosen[static_cast<std::size_t>(b)] = 0;
      // Solutions through b from this state are exhausted; exclude it from
      // the sibling branches covering the same point.
      banned[static_cast<std::size_t>(b)] = 1;
      banned_here.push_back(b);
    }
    for (int b : banned_here) banned[static_cast<std::size_t>(b)] = 0;
    return false;
  }
};

}  // namespace

MinOrderResult min_order_box_cover(const GridCube& cube, double eps, long guard) {
  if (cube.N < 1 || cube.m < 1)
    throw Error(ErrorKind::InvalidInput, "cube needs N >= 1 and m >= 1");
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidInput, "eps must be positive");

  const int L = std::min(cube.m, static_cast<int>(std::floor(
                                     eps * cube.m * (1.0 + 1e-12))));
  if (L < 1)
    throw Error(ErrorKind::InvalidInput,
                "no admissible boxes: eps below the grid resolution 1/m");

  // Candidate intervals per axis: [lo, hi], 1 <= hi - lo <= L.
  std::vector<std::pair<int, int>> intervals;
  for (int len = 1; len <= L; ++len)
    for (int lo = 0; lo + len <= cube.m; ++lo) intervals.emplace_back(lo, lo + len);

  const double n_boxes_d = std::pow(static_cast<double>(intervals.size()), cube.N);
  if (n_boxes_d > 200000.0)
    throw Error(ErrorKind::SearchGuardExceeded,
                "candidate box set too large for exhaustive search");
  const int n_boxes = static_cast<int>(n_boxes_d);
  const int side = 2 * cube.m + 1;
  const double n_points_d = std::pow(static_cast<double>(side), cube.N);
  if (n_points_d > 200000.0)
    throw Error(ErrorKind::SearchGuardExceeded,
                "half-step lattice too large for exhaustive search");
  const int n_points = static_cast<int>(n_points_d);

  // Enumerate boxes in canonical (lexicographic) order.
  std::vector<GridBox> boxes;
  boxes.reserve(static_cast<std::size_t>(n_boxes));
  std::vector<std::size_t> digit(static_cast<std::size_t>(cube.N), 0);
  for (int b = 0; b < n_boxes; ++b) {
    GridBox box;
    for (int d = 0; d < cube.N; ++d)
      box.intervals.push_back(intervals[digit[static_cast<std::size_t>(d)]]);
    boxes.push_back(std::move(box));
    for (int d = cube.N - 1; d >= 0; --d) {
      if (++digit[static_cast<std::size_t>(d)] < intervals.size()) break;
      digit[static_cast<std::size_t>(d)] = 0;
    }
  }

  CoverSearch search;
  search.n_points = n_points;
  search.n_boxes = n_boxes;
  search.guard = guard;
  search.boxes_of_point.assign(static_cast<std::size_t>(n_points), {});
  search.points_of_box.assign(static_cast<std::size_t>(n_boxes), {});
  for (int b = 0; b < n_boxes; ++b) {
    // Points of box b: product of per-axis half-step ranges.
    std::vector<int> h(static_cast<std::size_t>(cube.N));
    std::vector<std::pair<int, int>> range;
    for (auto [lo, hi] : boxes[static_cast<std::size_t>(b)].intervals)
      range.emplace_back(2 * lo, 2 * hi);
    for (int d = 0; d < cube.N; ++d) h[static_cast<std::size_t>(d)] = range[static_cast<std::size_t>(d)].first;
    for (;;) {
      int p = 0;
      for (int d = 0; d < cube.N; ++d) p = p * side + h[static_cast<std::size_t>(d)];
      search.points_of_box[static_cast<std::size_t>(b)].push_back(p);
      search.boxes_of_point[static_cast<std::size_t>(p)].push_back(b);
      int d = cube.N - 1;
      for (; d >= 0; --d) {
        if (++h[static_cast<std::size_t>(d)] <= range[static_cast<std::size_t>(d)].second) break;
        h[static_cast<std::size_t>(d)] = range[static_cast<std::size_t>(d)].first;
      }
      if (d < 0) break;
    }
  }

  MinOrderResult result;
  for (int order = 0; order <= n_boxes; ++order) {
    search.count.assign(static_cast<std::size_t>(n_points), 0);
    search.chosen.assign(static_cast<std::size_t>(n_boxes), 0);
    search.banned.assign(static_cast<std::size_t>(n_boxes), 0);
    std::vector<int> pick;
    if (search.dfs(order + 1, pick)) {
      result.order = order;
      result.nodes = search.nodes;
      result.witness.N = cube.N;
      result.witness.m = cube.m;
      std::sort(pick.begin(), pick.end());
      for (int b : pick) result.witness.boxes.push_back(boxes[static_cast<std::size_t>(b)]);
      return result;
    }
  }
  throw Error(ErrorKind::InvalidInput, "no cover exists (unreachable for L >= 1)");
}

double dynamical_distance(const CubeSequence& x, const CubeSequence& y,
                          const std::vector<std::vector<int>>& omega) {
  if (x.N != y.N || x.k != y.k)
    throw Error(ErrorKind::InvalidInput, "sequence shapes differ");
  const int k = x.k;
  for (const auto& g : omega)
    if (static_cast<int>(g.size()) != k)
      throw Error(ErrorKind::InvalidInput, "window element rank != k");
  auto check = [&](const CubeSequence& s) {
    for (const auto& [a, v] : s.values) {
      if (static_cast<int>(a.size()) != k)
        throw Error(ErrorKind::InvalidInput, "support index rank != k");
      if (static_cast<int>(v.size()) != s.N)
        throw Error(ErrorKind::InvalidInput, "cube point dimension != N");
    }
  };
  check(x);
  check(y);

  // Union of supports; off-support entries are the zero point of the cube.
  std::vector<std::vector<int>> support;
  for (const auto& [a, v] : x.values) support.push_back(a);
  for (const auto& [a, v] : y.values) support.push_back(a);
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());

  const std::vector<double> zero(static_cast<std::size_t>(x.N), 0.0);
  auto at = [&](const CubeSequence& s, const std::vector<int>& a)
      -> const std::vector<double>& {
    const auto it = s.values.find(a);
    return it == s.values.end() ? zero : it->second;
  };

  double best = 0.0;
  if (omega.empty()) throw Error(ErrorKind::InvalidInput, "empty window");
  for (const auto& g : omega) {
    double sum = 0.0;
    for (const auto& b : support) {
      const auto& xv = at(x, b);
      const auto& yv = at(y, b);
      double dinf = 0.0;
      for (int i = 0; i < x.N; ++i)
        dinf = std::max(dinf,
                        std::abs(xv[static_cast<std::size_t>(i)] -
                                 yv[static_cast<std::size_t>(i)]));
      if (dinf == 0.0) continue;
      int abs_a = 0;  // |a| with a = b - gamma
      for (int i = 0; i < k; ++i)
        abs_a += std::abs(b[static_cast<std::size_t>(i)] - g[static_cast<std::size_t>(i)]);
      sum += std::ldexp(dinf, -abs_a);  // 2^{-|a|} dinf, exact scaling
    }
    best = std::max(best, sum);
  }
  return best;
}

double weight_tail(int k, int s) {
  if (k < 1 || s < 0) throw Error(ErrorKind::InvalidInput, "weight_tail needs k>=1, s>=0");
  // c_k(j) = #{a in Z^k : |a|_1 = j} by convolving the k = 1 counts.
  const int jmax = s + 220;
  std::vector<double> c(static_cast<std::size_t>(jmax) + 1, 0.0);
  c[0] = 1.0;
  for (int dim = 0; dim < k; ++dim) {
    std::vector<double> nc(c.size(), 0.0);
    for (int j = 0; j <= jmax; ++j) {
      if (c[static_cast<std::size_t>(j)] == 0.0) continue;
      nc[static_cast<std::size_t>(j)] += c[static_cast<std::size_t>(j)];  // add 0
      for (int t = 1; j + t <= jmax; ++t)
        nc[static_cast<std::size_t>(j + t)] += 2.0 * c[static_cast<std::size_t>(j)];
    }
    c = std::move(nc);
  }
  double tail = 0.0;
  for (int j = jmax; j >= s; --j) tail += std::ldexp(c[static_cast<std::size_t>(j)], -j);
  return tail;
}

ScanResult widim_growth_scan(const ShiftSystem& sys, double eps,
                             const std::vector<long>& n_range, bool cross_validate) {
  if (sys.N < 1 || sys.k < 1)
    throw Error(ErrorKind::InvalidInput, "shift system needs N >= 1 and k >= 1");
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidInput, "eps must be positive");

  ScanResult out;
  out.lower_bound_valid = eps < 1.0;
  int s = 1;
  while (sys.base_diameter * weight_tail(sys.k, s) >= eps) {
    ++s;
    if (s > 4000) throw Error(ErrorKind::InvalidInput, "eps too small for the scan");
  }
  out.s = s;
  out.tail_constant = sys.base_diameter * weight_tail(sys.k, s);

  for (long n : n_range) {
    if (n < 1) throw Error(ErrorKind::InvalidInput, "n must be >= 1");
    ScanRow row;
    row.n = n;
    const double nk = std::pow(static_cast<double>(n), sys.k);
    row.L = out.lower_bound_valid ? sys.N * nk : 0.0;
    row.U = sys.N * std::pow(static_cast<double>(n) + 2.0 * s - 1.0, sys.k);
    row.L_rate = row.L / nk;
    row.U_rate = row.U / nk;
    if (cross_validate && out.lower_bound_valid) {
      const double dim = sys.N * nk;
      if (dim <= 2.5) {
        const MinOrderResult r =
            min_order_box_cover(GridCube{static_cast<int>(dim), 2}, eps);
        row.cross_check_order = r.order;
      }
    }
    out.rows.push_back(row);
  }
  return out;
}

double mean_dim_normalize(double rate_per_lattice, double covolume) {
  if (!(covolume > 0.0)) throw Error(ErrorKind::InvalidInput, "covolume must be > 0");
  return rate_per_lattice / covolume;
}

void ScanResult::write_csv(std::ostream& os) const {
  os << "n,L,U,L_rate,U_rate,s\n";
  char buf[160];
  for (const ScanRow& row : rows) {
    std::snprintf(buf, sizeof(buf), "%ld,%.17g,%.17g,%.17g,%.17g,%d\n", row.n, row.L,
                  row.U, row.L_rate, row.U_rate, s);
    os << buf;
  }
}

nlohmann::ordered_json GridBoxCover::to_json() const {
  nlohmann::ordered_json j;
  j["N"] = N;
  j["m"] = m;
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const GridBox& b : boxes) {
    nlohmann::ordered_json bx = nlohmann::ordered_json::array();
    for (auto [lo, hi] : b.intervals)
      bx.push_back(nlohmann::ordered_json::array({lo, hi}));
    arr.push_back(bx);
  }
  j["boxes"] = arr;
  return j;
}

}  // namespace brodylab::widim
