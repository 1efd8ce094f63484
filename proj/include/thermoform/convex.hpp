#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace thermoform {

/// Admissible q-range of a pressure function.
enum class QDomain { PositiveQ, AllQ };
const char* to_string(QDomain d);

/// Real function sampled on a strictly increasing grid of at least 3 points.
class GridFunction {
 public:
  GridFunction(std::vector<double> grid, std::vector<double> values);
  static GridFunction sample(std::span<const double> grid, const std::function<double(double)>& f);

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return grid_.size(); }
  double front() const { return grid_.front(); }
  double back() const { return grid_.back(); }
  /// Largest spacing between neighbors.
  double spacing() const;
  /// Slope of the chord over [grid[i], grid[i+1]].
  double cell_slope(std::size_t i) const;
  /// Max over consecutive triples of f(x1) minus the chord through the
  /// outer two points at x1 (0 for convex data).
  double convexity_defect() const { return convexity_defect_; }
  /// Piecewise-linear interpolation; x must lie within the grid.
  double interpolate(double x) const;

 private:
  std::vector<double> grid_;
  std::vector<double> values_;
  double convexity_defect_ = 0.0;
};

/// Uniform grid of `count` points from start to stop inclusive.
std::vector<double> linspace(double start, double stop, std::size_t count);

double convexity_defect(std::span<const double> grid, std::span<const double> values);

struct Conjugate {
  GridFunction function;        // s -> max_x { s x - f(x) }
  std::vector<double> argmax;   // maximizing grid point, smallest on ties
  std::vector<bool> truncated;  // argmax sits on a grid edge, so the true sup may be larger
};

/// Discrete Legendre-Fenchel conjugate over the grid points of f.
Conjugate conjugate(const GridFunction& f, std::span<const double> s_grid);

/// Conjugate of a function on a finite point set in R^k, evaluated at the
/// dual points: f*(s) = max_j { s . x_j - f(x_j) }.
std::vector<double> conjugate_points(std::span<const std::vector<double>> points,
                                     std::span<const double> values,
                                     std::span<const std::vector<double>> dual_points);

struct LegendreResult {
  bool minus_infinity = false;
  double value = 0.0;    // inf of P(q) - alpha q when finite
  double argmin = 0.0;
  /// The minimizer sits on a grid edge or the edge test was inconclusive.
  bool boundary_active = false;
  double edge_slope = 0.0;  // objective slope at the decisive edge
  double margin = 0.0;      // noise margin used by the edge test
};

/// inf over the grid of P(q) - alpha q. With PositiveQ only points q > 0
/// are used and q -> 0+ is a finite end. An unbounded end yields
/// minus_infinity when the objective still descends there by more than 3x
/// the local slope noise and its value at that end is already negative
/// beyond rounding. Since P(q) - alpha q stays >= 0 for alpha inside the
/// domain, a negative edge value rules alpha out, while a descending edge
/// with a non-negative value is reported finite and boundary-active. When `exact` is given, the grid minimizer is refined by a
/// golden-section search between its neighbors.
LegendreResult legendre_inf(const GridFunction& pressure, double alpha, QDomain domain,
                            const std::function<double(double)>& exact = {});

struct SubdiffInterval {
  double q;
  double left;   // estimate of P'(q-)
  double right;  // estimate of P'(q+)
};

/// One-sided difference quotients at q (a grid point, or inside a cell),
/// widened by the convexity defect converted to slope units.
SubdiffInterval subdifferential(const GridFunction& pressure, double q);

enum class Direction { PlusInfinity, MinusInfinity };

struct AsymptoticSlope {
  double slope;                         // difference quotient at the edge
  std::vector<double> edge_quotients;   // up to 5 quotients approaching the edge
  bool monotone;                        // increasing toward +inf / decreasing toward -inf
};

AsymptoticSlope asymptotic_slope(const GridFunction& pressure, Direction direction);

struct BiconjugateReport {
  GridFunction biconjugate;
  std::vector<bool> on_hull;   // f equals its lower convex hull at the point
  double max_deviation;        // max |f** - f| over hull points
  double bound;                // C h with C the max |slope| and h the spacing
  double max_slope;
};

/// f** via two conjugate passes; the dual grid is uniform over the range of
/// cell slopes with as many points as f.
BiconjugateReport biconjugate_check(const GridFunction& f);

using MultiFunction = std::function<double(std::span<const double>)>;

struct DirectionalDerivative {
  double value;
  std::vector<double> quotients;  // one per step in the schedule
  bool monotone;                  // quotients non-increasing as h shrinks
};

inline const std::vector<double> kDefaultStepSchedule{1e-1, 1e-2, 1e-3};

/// One-sided derivative (P(q + h v) - P(q)) / h along a decreasing step
/// schedule with two-point Richardson extrapolation on the last two steps.
/// Throws DomainError if q + h v leaves the domain.
DirectionalDerivative directional_derivative(const MultiFunction& pressure, std::span<const double> q,
                                             std::span<const double> v, QDomain domain = QDomain::AllQ,
                                             std::span<const double> steps = kDefaultStepSchedule);

struct Polygon {
  std::vector<std::array<double, 2>> vertices;  // counter-clockwise
  std::vector<double> support;                  // P'(q; v_j) per sampled direction
};

/// Intersection of {a : a . v_j <= P'(q; v_j)} over n_directions equally
/// spaced unit vectors: an outer estimate of the subdifferential at q.
Polygon subgradient_set_2d(const MultiFunction& pressure, std::span<const double> q, std::size_t n_directions,
                           QDomain domain = QDomain::AllQ);

/// Hausdorff distance between a polygon (as a vertex set) and a segment.
double hausdorff_to_segment(const Polygon& polygon, std::array<double, 2> a, std::array<double, 2> b);

void write_csv(std::ostream& os, const GridFunction& f, std::string_view grid_name, std::string_view value_name);
GridFunction read_csv(std::istream& is);

}  // namespace thermoform
