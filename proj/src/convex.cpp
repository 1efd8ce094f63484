#include "thermoform/convex.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "thermoform/errors.hpp"

namespace thermoform {

const char* to_string(QDomain d) { return d == QDomain::PositiveQ ? "positive_q" : "all_q"; }

double convexity_defect(std::span<const double> grid, std::span<const double> values) {
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double t = (grid[i] - grid[i - 1]) / (grid[i + 1] - grid[i - 1]);
    const double chord = (1.0 - t) * values[i - 1] + t * values[i + 1];
    worst = std::max(worst, values[i] - chord);
  }
  return worst;
}

GridFunction::GridFunction(std::vector<double> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (grid_.size() != values_.size()) throw InvalidArgument("grid and values differ in length");
  if (grid_.size() < 3) throw InvalidArgument("grid function needs at least 3 points");
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    if (!std::isfinite(grid_[i]) || !std::isfinite(values_[i]))
      throw InvalidArgument("grid function entries must be finite");
    if (i > 0 && !(grid_[i] > grid_[i - 1])) throw InvalidArgument("grid must be strictly increasing");
  }
  convexity_defect_ = thermoform::convexity_defect(grid_, values_);
}

GridFunction GridFunction::sample(std::span<const double> grid, const std::function<double(double)>& f) {
  std::vector<double> values;
  values.reserve(grid.size());
  for (double x : grid) values.push_back(f(x));
  return GridFunction(std::vector<double>(grid.begin(), grid.end()), std::move(values));
}

double GridFunction::spacing() const {
  double h = 0.0;
  for (std::size_t i = 1; i < grid_.size(); ++i) h = std::max(h, grid_[i] - grid_[i - 1]);
  return h;
}

double GridFunction::cell_slope(std::size_t i) const {
  return (values_[i + 1] - values_[i]) / (grid_[i + 1] - grid_[i]);
}

double GridFunction::interpolate(double x) const {
  if (x < grid_.front() || x > grid_.back()) throw DomainError("interpolation outside the grid");
  auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
  if (it == grid_.end()) return values_.back();
  const std::size_t i = static_cast<std::size_t>(it - grid_.begin()) - 1;
  const double t = (x - grid_[i]) / (grid_[i + 1] - grid_[i]);
  return (1.0 - t) * values_[i] + t * values_[i + 1];
}

std::vector<double> linspace(double start, double stop, std::size_t count) {
  if (count < 2) throw InvalidArgument("linspace needs at least two points");
  std::vector<double> out(count);
  const double step = (stop - start) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = start + static_cast<double>(i) * step;
  out.back() = stop;
  return out;
}

// ---------------------------------------------------------------------------

Conjugate conjugate(const GridFunction& f, std::span<const double> s_grid) {
  const auto& x = f.grid();
  const auto& fx = f.values();
  std::vector<double> values, argmax;
  std::vector<bool> truncated;
  values.reserve(s_grid.size());
  for (double s : s_grid) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double v = s * x[i] - fx[i];
      if (v > best) {
        best = v;
        arg = i;
      }
    }
    values.push_back(best);
    argmax.push_back(x[arg]);
    truncated.push_back(arg == 0 || arg + 1 == x.size());
  }
  return {GridFunction(std::vector<double>(s_grid.begin(), s_grid.end()), std::move(values)), std::move(argmax),
          std::move(truncated)};
}

std::vector<double> conjugate_points(std::span<const std::vector<double>> points, std::span<const double> values,
                                     std::span<const std::vector<double>> dual_points) {
  if (points.size() != values.size() || points.empty()) throw InvalidArgument("points and values mismatch");
  std::vector<double> out;
  out.reserve(dual_points.size());
  for (const auto& s : dual_points) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (points[j].size() != s.size()) throw InvalidArgument("dimension mismatch");
      double dot = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) dot += s[i] * points[j][i];
      best = std::max(best, dot - values[j]);
    }
    out.push_back(best);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double slope_noise(double f0, double f1, double h, double defect) {
  const double rounding = 1e-12 * std::max({1.0, std::abs(f0), std::abs(f1)});
  return (rounding + defect) / h;
}

double golden_min(const std::function<double(double)>& obj, double lo, double hi, double& arg) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = obj(c), fd = obj(d);
  for (int it = 0; it < 80 && (b - a) > 1e-12 * std::max(1.0, std::abs(a)); ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = obj(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = obj(d);
    }
  }
  if (fc <= fd) {
    arg = c;
    return fc;
  }
  arg = d;
  return fd;
}

}  // namespace

LegendreResult legendre_inf(const GridFunction& pressure, double alpha, QDomain domain,
                            const std::function<double(double)>& exact) {
  std::vector<double> q, p;
  for (std::size_t i = 0; i < pressure.size(); ++i) {
    if (domain == QDomain::PositiveQ && !(pressure.grid()[i] > 0.0)) continue;
    q.push_back(pressure.grid()[i]);
    p.push_back(pressure.values()[i]);
  }
  if (q.size() < 3) throw InvalidArgument("legendre_inf needs at least 3 grid points in the domain");
  const std::size_t n = q.size();
  const double defect = convexity_defect(q, p);

  LegendreResult r;
  // Right edge: q -> +inf is always unbounded.
  const double h_r = q[n - 1] - q[n - 2];
  const double slope_r = (p[n - 1] - p[n - 2]) / h_r - alpha;
  const double margin_r = 3.0 * slope_noise(p[n - 2], p[n - 1], h_r, defect);
  const double value_r = p[n - 1] - alpha * q[n - 1];
  const double tol_r = 1e-12 * std::max({1.0, std::abs(p[n - 1]), std::abs(alpha * q[n - 1])});
  if (slope_r < -margin_r && value_r < -tol_r) {
    r.minus_infinity = true;
    r.edge_slope = slope_r;
    r.margin = margin_r;
    return r;
  }
  double slope_l = 0.0, margin_l = 0.0;
  if (domain == QDomain::AllQ) {
    const double h_l = q[1] - q[0];
    slope_l = (p[1] - p[0]) / h_l - alpha;
    margin_l = 3.0 * slope_noise(p[0], p[1], h_l, defect);
    const double value_l = p[0] - alpha * q[0];
    const double tol_l = 1e-12 * std::max({1.0, std::abs(p[0]), std::abs(alpha * q[0])});
    if (slope_l > margin_l && value_l < -tol_l) {
      r.minus_infinity = true;
      r.edge_slope = slope_l;
      r.margin = margin_l;
      return r;
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (p[i] - alpha * q[i] < p[best] - alpha * q[best]) best = i;
  r.value = p[best] - alpha * q[best];
  r.argmin = q[best];
  r.edge_slope = slope_r;
  r.margin = margin_r;
  r.boundary_active = best == 0 || best + 1 == n || slope_r <= margin_r ||
                      (domain == QDomain::AllQ && slope_l >= -margin_l);

  if (exact) {
    const double lo = q[best == 0 ? 0 : best - 1];
    const double hi = q[best + 1 == n ? n - 1 : best + 1];
    double arg = r.argmin;
    const double refined = golden_min([&](double t) { return exact(t) - alpha * t; }, lo, hi, arg);
    const double at_grid = exact(r.argmin) - alpha * r.argmin;
    if (refined < at_grid) {
      r.value = refined;
      r.argmin = arg;
    } else {
      r.value = at_grid;
    }
  }
  return r;
}

SubdiffInterval subdifferential(const GridFunction& pressure, double q) {
  const auto& x = pressure.grid();
  const double tol = 1e-9 * std::max(1.0, std::abs(q));
  if (!(q > x.front() + tol) || !(q < x.back() - tol))
    throw DomainError("subdifferential requires q strictly inside the grid");
  auto it = std::lower_bound(x.begin(), x.end(), q - tol);
  std::size_t i = static_cast<std::size_t>(it - x.begin());
  SubdiffInterval out{q, 0.0, 0.0};
  double h_min;
  if (std::abs(x[i] - q) <= tol) {
    out.left = pressure.cell_slope(i - 1);
    out.right = pressure.cell_slope(i);
    h_min = std::min(x[i] - x[i - 1], x[i + 1] - x[i]);
  } else {
    out.left = out.right = pressure.cell_slope(i - 1);
    h_min = x[i] - x[i - 1];
  }
  const double widen = pressure.convexity_defect() / h_min;
  out.left -= widen;
  out.right += widen;
  return out;
}

AsymptoticSlope asymptotic_slope(const GridFunction& pressure, Direction direction) {
  const std::size_t n = pressure.size();
  const std::size_t k = std::min<std::size_t>(5, n - 1);
  AsymptoticSlope out{0.0, {}, true};
  if (direction == Direction::PlusInfinity) {
    for (std::size_t c = n - 1 - k; c < n - 1; ++c) out.edge_quotients.push_back(pressure.cell_slope(c));
  } else {
    for (std::size_t c = k; c-- > 0;) out.edge_quotients.push_back(pressure.cell_slope(c));
  }
  out.slope = out.edge_quotients.back();
  const double tol = 1e-12 * std::max(1.0, std::abs(out.slope));
  for (std::size_t i = 1; i < out.edge_quotients.size(); ++i) {
    const double prev = out.edge_quotients[i - 1], cur = out.edge_quotients[i];
    if (direction == Direction::PlusInfinity ? cur < prev - tol : cur > prev + tol) out.monotone = false;
  }
  return out;
}

BiconjugateReport biconjugate_check(const GridFunction& f) {
  const std::size_t n = f.size();
  double smin = std::numeric_limits<double>::infinity(), smax = -smin;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    smin = std::min(smin, f.cell_slope(i));
    smax = std::max(smax, f.cell_slope(i));
  }
  const double c = std::max(std::abs(smin), std::abs(smax));
  std::vector<double> s_grid = (smax - smin > 1e-12 * std::max(1.0, c)) ? linspace(smin, smax, n)
                                                                         : std::vector<double>{smin - 1.0, smin, smin + 1.0};
  const Conjugate fstar = conjugate(f, s_grid);
  const Conjugate fss = conjugate(fstar.function, f.grid());

  // A point is on the lower hull iff some slope separates the chords to
  // its left from those to its right.
  const auto& x = f.grid();
  const auto& y = f.values();
  std::vector<bool> on_hull(n, true);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double left = -std::numeric_limits<double>::infinity();
    double right = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < i; ++j) left = std::max(left, (y[i] - y[j]) / (x[i] - x[j]));
    for (std::size_t k = i + 1; k < n; ++k) right = std::min(right, (y[k] - y[i]) / (x[k] - x[i]));
    on_hull[i] = left <= right + 1e-12 * std::max(1.0, c);
  }
  double dev = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (on_hull[i]) dev = std::max(dev, std::abs(fss.function.values()[i] - y[i]));
  return {fss.function, std::move(on_hull), dev, c * f.spacing(), c};
}

// ---------------------------------------------------------------------------

namespace {

void check_domain(std::span<const double> point, QDomain domain) {
  if (domain != QDomain::PositiveQ) return;
  for (double v : point)
    if (!(v > 0.0)) throw DomainError("step leaves the positive orthant");
}

}  // namespace

DirectionalDerivative directional_derivative(const MultiFunction& pressure, std::span<const double> q,
                                             std::span<const double> v, QDomain domain,
                                             std::span<const double> steps) {
  if (q.size() != v.size()) throw InvalidArgument("point and direction dimensions differ");
  if (steps.empty()) throw InvalidArgument("empty step schedule");
  check_domain(q, domain);
  const double base = pressure(q);
  DirectionalDerivative out{0.0, {}, true};
  std::vector<double> moved(q.size());
  for (double h : steps) {
    for (std::size_t i = 0; i < q.size(); ++i) moved[i] = q[i] + h * v[i];
    check_domain(moved, domain);
    out.quotients.push_back((pressure(moved) - base) / h);
  }
  for (std::size_t i = 1; i < out.quotients.size(); ++i) {
    const double tol = 1e-9 * std::max(1.0, std::abs(out.quotients[i]));
    if (out.quotients[i] > out.quotients[i - 1] + tol) out.monotone = false;
  }
  const std::size_t m = out.quotients.size();
  if (m >= 2 && out.monotone) {
    const double h1 = steps[m - 2], h2 = steps[m - 1];
    const double d1 = out.quotients[m - 2], d2 = out.quotients[m - 1];
    out.value = (h1 * d2 - h2 * d1) / (h1 - h2);
  } else {
    out.value = out.quotients.back();
  }
  return out;
}

namespace {

using Point = std::array<double, 2>;

constexpr double kSupportSlack = 1e-9;

/// Keeps the part of a convex polygon with a . v <= b.
std::vector<Point> clip(const std::vector<Point>& poly, Point v, double b) {
  std::vector<Point> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = poly[i];
    const Point& r = poly[(i + 1) % n];
    const double fp = p[0] * v[0] + p[1] * v[1] - b;
    const double fr = r[0] * v[0] + r[1] * v[1] - b;
    if (fp <= 0.0) out.push_back(p);
    if ((fp < 0.0 && fr > 0.0) || (fp > 0.0 && fr < 0.0)) {
      const double t = fp / (fp - fr);
      out.push_back({p[0] + t * (r[0] - p[0]), p[1] + t * (r[1] - p[1])});
    }
  }
  return out;
}

}  // namespace

Polygon subgradient_set_2d(const MultiFunction& pressure, std::span<const double> q, std::size_t n_directions,
                           QDomain domain) {
  if (q.size() != 2) throw InvalidArgument("subgradient_set_2d needs a point in R^2");
  if (n_directions < 3) throw InvalidArgument("at least 3 directions are needed");
  Polygon out;
  double extent = 1.0;
  std::vector<Point> dirs;
  for (std::size_t j = 0; j < n_directions; ++j) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_directions);
    Point v{std::cos(theta), std::sin(theta)};
    // Snap the axis-aligned components so that exact directions stay exact.
    for (double& c : v)
      if (std::abs(c) < 1e-15) c = 0.0;
    const double d = directional_derivative(pressure, q, v, domain).value;
    dirs.push_back(v);
    out.support.push_back(d);
    extent = std::max(extent, std::abs(d));
  }
  const double big = 4.0 * extent + 1.0;
  std::vector<Point> poly{{-big, -big}, {big, -big}, {big, big}, {-big, big}};
  for (std::size_t j = 0; j < dirs.size(); ++j) {
    // Slack absorbs rounding in the difference quotients; without it a
    // lower-dimensional subdifferential can clip to an empty set.
    const double slack = kSupportSlack * (1.0 + std::abs(out.support[j]));
    poly = clip(poly, dirs[j], out.support[j] + slack);
    if (poly.empty()) {
      std::ostringstream msg;
      msg << "subgradient halfspaces have empty intersection after direction " << j << " (support "
          << out.support[j] << ")";
      throw DomainError(msg.str());
    }
  }
  out.vertices = std::move(poly);
  return out;
}

double hausdorff_to_segment(const Polygon& polygon, std::array<double, 2> a, std::array<double, 2> b) {
  auto dist_to_segment = [&](const Point& p) {
    const double dx = b[0] - a[0], dy = b[1] - a[1];
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p[0] - (a[0] + t * dx), p[1] - (a[1] + t * dy));
  };
  // Distance from a point to the polygon (boundary or interior).
  const auto& vs = polygon.vertices;
  auto dist_to_polygon = [&](const Point& p) {
    bool inside = vs.size() >= 3;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const Point& u = vs[i];
      const Point& w = vs[(i + 1) % vs.size()];
      const double cross = (w[0] - u[0]) * (p[1] - u[1]) - (w[1] - u[1]) * (p[0] - u[0]);
      if (cross < 0.0) inside = false;
      const double dx = w[0] - u[0], dy = w[1] - u[1];
      const double len2 = dx * dx + dy * dy;
      double t = len2 > 0.0 ? ((p[0] - u[0]) * dx + (p[1] - u[1]) * dy) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      best = std::min(best, std::hypot(p[0] - (u[0] + t * dx), p[1] - (u[1] + t * dy)));
    }
    return inside ? 0.0 : best;
  };
  double h = 0.0;
  for (const auto& p : vs) h = std::max(h, dist_to_segment(p));
  // The segment side: sup over segment points of distance to the polygon is
  // attained at an endpoint or is bounded by the endpoint distances since
  // the distance to a convex set is convex along the segment.
  h = std::max({h, dist_to_polygon(a), dist_to_polygon(b)});
  return h;
}

// ---------------------------------------------------------------------------

void write_csv(std::ostream& os, const GridFunction& f, std::string_view grid_name, std::string_view value_name) {
  os << grid_name << ',' << value_name << '\n';
  os << std::setprecision(17);
  for (std::size_t i = 0; i < f.size(); ++i) os << f.grid()[i] << ',' << f.values()[i] << '\n';
}

GridFunction read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("empty CSV");
  std::vector<double> x, y;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw InvalidArgument("CSV row without comma: " + line);
    x.push_back(std::stod(line.substr(0, comma)));
    y.push_back(std::stod(line.substr(comma + 1)));
  }
  return GridFunction(std::move(x), std::move(y));
}

}  // namespace thermoform
