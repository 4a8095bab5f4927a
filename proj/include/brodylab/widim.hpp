#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include <json.hpp>

#include "brodylab/common.hpp"

namespace brodylab::widim {

// The cube [0,1]^N with the sup metric and grid points k/m.
struct GridCube {
  int N = 1;
  int m = 1;
};

// Product of closed grid-aligned intervals [lo/m, hi/m] per axis, lo < hi.
struct GridBox {
  std::vector<std::pair<int, int>> intervals;  // grid units
};

struct GridBoxCover {
  int N = 1;
  int m = 1;
  std::vector<GridBox> boxes;

  // Max box diameter in the sup metric: max over boxes of max axis length.
  double mesh() const;
  nlohmann::ordered_json to_json() const;
};

// Order = (max multiplicity over the half-step refinement lattice) - 1.
// Multiplicity of a family of closed grid boxes is constant on half-step
// cells, so the half-step evaluation is exact.  Throws Error(InvalidInput)
// naming an uncovered half-step point if the boxes do not cover the cube.
int cover_order(const GridBoxCover& cover);

struct MinOrderResult {
  int order = 0;
  GridBoxCover witness;
  long nodes = 0;  // branch-and-bound nodes explored
};

// Exact minimum of cover_order over grid-aligned closed box covers of mesh
// <= eps, by iterative-deepening branch and bound.  Refuses instances whose
// search exceeds `guard` nodes (Error(SearchGuardExceeded)); no silent
// approximation.
MinOrderResult min_order_box_cover(const GridCube& cube, double eps,
                                   long guard = 1000000);

// Finite-support sequence of cube points over Z^k.
struct CubeSequence {
  int N = 1;  // cube dimension
  int k = 1;  // group rank
  std::map<std::vector<int>, std::vector<double>> values;  // a -> point
};

// d_Omega(x, y) = max over gamma in Omega of
//   sum_a 2^{-|a|} dinf(x_{gamma+a}, y_{gamma+a})
// evaluated exactly over the union of supports (off-support points are 0).
double dynamical_distance(const CubeSequence& x, const CubeSequence& y,
                          const std::vector<std::vector<int>>& omega);

// Shift space ([0,1]^N)^{Z^k} with the weighted-sum metric.
struct ShiftSystem {
  int N = 1;
  int k = 1;
  double base_diameter = 1.0;  // diameter of the alphabet cube in dinf
};

struct ScanRow {
  long n = 0;
  double L = 0.0;       // N n^k
  double U = 0.0;       // N (n + 2s - 1)^k
  double L_rate = 0.0;  // L / n^k
  double U_rate = 0.0;  // U / n^k
  std::optional<int> cross_check_order;  // exhaustive check at tiny n
};

struct ScanResult {
  int s = 0;                // smallest s with tail constant < eps
  double tail_constant = 0.0;
  bool lower_bound_valid = true;  // false when eps >= 1
  std::vector<ScanRow> rows;
  void write_csv(std::ostream& os) const;
};

// Widim growth bounds for the cube shift: lower bound via the embedded cube
// of dimension N |I_n|, upper bound via projection to (-s, n+s)^k with the
// explicit weight-tail constant.  cross_validate runs min_order_box_cover on
// the embedded cube when its dimension is tiny (guarded).
ScanResult widim_growth_scan(const ShiftSystem& sys, double eps,
                             const std::vector<long>& n_range,
                             bool cross_validate = false);

// dim(X : Lambda) = |R^k/Lambda| dim(X : R^k): per-lattice rate to per-unit
// rate.
double mean_dim_normalize(double rate_per_lattice, double covolume);

// Exact weight-tail sum_{|a| >= s, a in Z^k} 2^{-|a|} (times diam factor in
// the scan); exposed for tests.
double weight_tail(int k, int s);

}  // namespace brodylab::widim
