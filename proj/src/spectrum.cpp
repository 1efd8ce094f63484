#include "thermoform/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "thermoform/errors.hpp"
#include "thermoform/parallel.hpp"

namespace thermoform {

DomainEstimate lyapunov_domain(const PressureSequence& seq, QDomain domain, double q_far) {
  if (seq.n_max() < 2) throw InvalidArgument("lyapunov_domain needs n >= 2");
  if (!(q_far > 0.0)) throw InvalidArgument("q_far must be positive");
  DomainEstimate d;
  d.n = seq.n_max();
  d.max_averages = seq.max_averages();
  d.min_averages = seq.min_averages();
  d.upper = d.max_averages.back();
  if (seq.subadditive_at(1.0)) d.upper_bracket = *std::min_element(d.max_averages.begin(), d.max_averages.end());
  if (seq.subadditive_at(-1.0)) d.lower_bracket = *std::max_element(d.min_averages.begin(), d.min_averages.end());

  const LevelStatistics& level = seq.level(seq.n_max());
  auto p = [&](double q) { return level.pressure(q); };
  d.slope_upper = asymptotic_slope(GridFunction::sample(linspace(q_far / 2.0, q_far, 9), p), Direction::PlusInfinity).slope;
  if (domain == QDomain::AllQ) {
    d.slope_lower =
        asymptotic_slope(GridFunction::sample(linspace(-q_far, -q_far / 2.0, 9), p), Direction::MinusInfinity).slope;
    d.lower = *d.slope_lower;
    d.lower_source = "slope";
  } else {
    d.lower = d.min_averages.back();
    d.lower_source = "min_average";
  }
  return d;
}

DomainEstimate lyapunov_domain(const ShiftSpace& space, const WordPotential& phi, std::size_t n,
                               std::optional<QDomain> domain) {
  const PressureSequence seq(space, phi, n);
  return lyapunov_domain(seq, domain.value_or(default_domain(phi)));
}

std::vector<double> default_q_grid(QDomain domain) {
  return domain == QDomain::PositiveQ ? linspace(0.05, 8.0, 160) : linspace(-8.0, 8.0, 321);
}

SpectrumPoint spectrum_point(const LevelStatistics& level, double alpha, QDomain domain,
                             std::span<const double> q_grid) {
  const std::vector<double> grid = q_grid.empty() ? default_q_grid(domain)
                                                  : std::vector<double>(q_grid.begin(), q_grid.end());
  auto p = [&](double q) { return level.pressure(q); };
  const GridFunction f = GridFunction::sample(grid, p);
  SpectrumPoint out{ExtReal(0.0), legendre_inf(f, alpha, domain, p)};
  out.value = out.legendre.minus_infinity ? ExtReal::neg_infinity() : ExtReal(out.legendre.value);
  return out;
}

ExtReal spectrum_value(const ShiftSpace& space, const WordPotential& phi, double alpha, std::size_t n,
                       std::optional<QDomain> domain, std::span<const double> q_grid) {
  const LevelStatistics level = level_statistics(space, phi, n);
  return spectrum_point(level, alpha, domain.value_or(default_domain(phi)), q_grid).value;
}

SpectrumCurve spectrum_curve(const PressureSequence& seq, std::span<const double> alpha_grid,
                             std::optional<QDomain> domain, std::span<const double> q_grid) {
  if (alpha_grid.empty()) throw InvalidArgument("alpha grid is empty");
  SpectrumCurve c;
  c.q_domain = domain.value_or(default_domain(seq.potential()));
  c.q_grid = q_grid.empty() ? default_q_grid(c.q_domain) : std::vector<double>(q_grid.begin(), q_grid.end());
  c.n = seq.n_max();
  c.alpha_grid.assign(alpha_grid.begin(), alpha_grid.end());
  c.domain = lyapunov_domain(seq, c.q_domain);
  const LevelStatistics& level = seq.level(seq.n_max());
  std::vector<SpectrumPoint> points(alpha_grid.size());
  parallel_for(alpha_grid.size(),
               [&](std::size_t i) { points[i] = spectrum_point(level, alpha_grid[i], c.q_domain, c.q_grid); });
  for (const auto& pt : points) {
    c.values.push_back(pt.value);
    c.boundary_active.push_back(pt.legendre.boundary_active);
  }
  return c;
}

SpectrumCurve spectrum_curve(const ShiftSpace& space, const WordPotential& phi, std::span<const double> alpha_grid,
                             std::size_t n, std::optional<QDomain> domain, std::span<const double> q_grid) {
  const PressureSequence seq(space, phi, n);
  return spectrum_curve(seq, alpha_grid, domain, q_grid);
}

// ---------------------------------------------------------------------------

namespace {

/// f(q) = (1/n) log sum exp((L q) . x) - a . q over the joint statistics.
class JointObjective {
 public:
  JointObjective(const JointLevelStatistics& stats, std::vector<std::vector<double>> lin, std::vector<double> a)
      : stats_(stats), lin_(std::move(lin)), a_(std::move(a)) {}

  std::size_t dim() const { return a_.size(); }

  std::vector<double> coefficients(std::span<const double> q) const {
    std::vector<double> c(lin_.size(), 0.0);
    for (std::size_t r = 0; r < lin_.size(); ++r)
      for (std::size_t j = 0; j < q.size(); ++j) c[r] += lin_[r][j] * q[j];
    return c;
  }

  double value(std::span<const double> q) const {
    double v = stats_.pressure(coefficients(q));
    for (std::size_t j = 0; j < q.size(); ++j) v -= a_[j] * q[j];
    return v;
  }

  /// Exact gradient: L^T E_q[x] / n - a, skipping -inf entries.
  std::vector<double> gradient(std::span<const double> q) const {
    const auto c = coefficients(q);
    const std::size_t m = c.size();
    std::vector<double> logw;
    std::vector<std::size_t> idx;
    for (std::size_t t = 0; t < stats_.tuples.size(); ++t) {
      ExtReal total = 0.0;
      for (std::size_t r = 0; r < m; ++r) total = total + scale(c[r], stats_.tuples[t][r]);
      if (!total.is_finite()) continue;
      logw.push_back(total.value() + std::log(static_cast<double>(stats_.counts[t])));
      idx.push_back(t);
    }
    const double top = *std::max_element(logw.begin(), logw.end());
    std::vector<double> ex(m, 0.0);
    double z = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const double w = std::exp(logw[i] - top);
      z += w;
      for (std::size_t r = 0; r < m; ++r) {
        const ExtReal& x = stats_.tuples[idx[i]][r];
        if (x.is_finite()) ex[r] += w * x.value();
      }
    }
    std::vector<double> g(dim(), 0.0);
    for (std::size_t j = 0; j < dim(); ++j) {
      for (std::size_t r = 0; r < m; ++r) g[j] += lin_[r][j] * ex[r] / (z * static_cast<double>(stats_.n));
      g[j] -= a_[j];
    }
    return g;
  }

 private:
  const JointLevelStatistics& stats_;
  std::vector<std::vector<double>> lin_;
  std::vector<double> a_;
};

double safe_value(const JointObjective& f, std::span<const double> q) {
  try {
    return f.value(q);
  } catch (const DomainError&) {
    return std::numeric_limits<double>::infinity();
  }
}

double golden(const std::function<double(double)>& obj, double lo, double hi, double& arg) {
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
  arg = fc <= fd ? c : d;
  return std::min(fc, fd);
}

KdMinimum minimize_on_box(const JointObjective& f, const std::vector<std::vector<double>>& axes, QDomain domain) {
  const std::size_t k = axes.size();
  std::size_t total = 1;
  for (const auto& ax : axes) {
    if (ax.size() < 3) throw InvalidArgument("each q axis needs at least 3 points");
    if (!std::is_sorted(ax.begin(), ax.end()) || std::adjacent_find(ax.begin(), ax.end()) != ax.end())
      throw InvalidArgument("q axes must be strictly increasing");
    if (domain == QDomain::PositiveQ && !(ax.front() > 0.0))
      throw InvalidArgument("PositiveQ axes must be strictly positive");
    total *= ax.size();
  }

  auto point = [&](std::size_t flat) {
    std::vector<double> q(k);
    for (std::size_t j = k; j-- > 0;) {
      q[j] = axes[j][flat % axes[j].size()];
      flat /= axes[j].size();
    }
    return q;
  };

  std::vector<double> values(total);
  parallel_for(total, [&](std::size_t i) { values[i] = safe_value(f, point(i)); });
  const std::size_t best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  if (!std::isfinite(values[best])) throw DomainError("objective is undefined on the whole q grid");

  KdMinimum out;
  out.argmin = point(best);
  out.value = values[best];

  std::vector<double> lo(k), hi(k), h(k);
  for (std::size_t j = 0; j < k; ++j) {
    lo[j] = axes[j].front();
    hi[j] = axes[j].back();
    double gap = 0.0;
    for (std::size_t i = 0; i + 1 < axes[j].size(); ++i) gap = std::max(gap, axes[j][i + 1] - axes[j][i]);
    h[j] = gap;
  }
  for (int sweep = 0; sweep < 200; ++sweep) {
    const double before = out.value;
    for (std::size_t j = 0; j < k; ++j) {
      std::vector<double> q = out.argmin;
      auto obj = [&](double t) {
        q[j] = t;
        return safe_value(f, q);
      };
      double arg = out.argmin[j];
      const double v = golden(obj, std::max(lo[j], out.argmin[j] - h[j]), std::min(hi[j], out.argmin[j] + h[j]), arg);
      if (v < out.value) {
        out.value = v;
        out.argmin[j] = arg;
      }
    }
    if (!(before - out.value > 1e-15 * std::max(1.0, std::abs(out.value)))) break;
  }

  out.gradient = f.gradient(out.argmin);
  const bool negative = out.value < -1e-12 * std::max(1.0, std::abs(out.value));
  for (std::size_t j = 0; j < k; ++j) {
    const double margin = 3.0 * 1e-12 * std::max(1.0, std::abs(out.value)) / h[j];
    const double tol = 1e-9 * h[j];
    const bool at_hi = out.argmin[j] >= hi[j] - tol;
    const bool at_lo = out.argmin[j] <= lo[j] + tol;
    out.margin = std::max(out.margin, margin);
    if (at_hi && negative && out.gradient[j] < -margin) out.minus_infinity = true;
    if (at_lo && negative && domain == QDomain::AllQ && out.gradient[j] > margin) out.minus_infinity = true;
    if (at_hi || at_lo) out.boundary_active = true;
  }
  return out;
}

}  // namespace

std::vector<std::vector<double>> default_q_axes(std::size_t k, QDomain domain) {
  if (k < 1 || k > 3) throw InvalidArgument("k must be 1, 2 or 3");
  static constexpr std::size_t kPoints[] = {161, 81, 33};
  const std::size_t pts = kPoints[k - 1];
  const auto axis = domain == QDomain::AllQ ? linspace(-8.0, 8.0, pts) : linspace(8.0 / static_cast<double>(pts), 8.0, pts);
  return std::vector<std::vector<double>>(k, axis);
}

KdMinimum joint_spectrum_kd(const JointLevelStatistics& stats, std::span<const double> a,
                            const std::vector<std::vector<double>>& q_axes, QDomain domain) {
  const std::size_t k = stats.k;
  if (k < 1 || k > 3) throw InvalidArgument("joint spectrum supports k <= 3");
  if (a.size() != k) throw InvalidArgument("a has the wrong dimension");
  const auto axes = q_axes.empty() ? default_q_axes(k, domain) : q_axes;
  if (axes.size() != k) throw InvalidArgument("q axes have the wrong dimension");
  std::vector<std::vector<double>> lin(k, std::vector<double>(k, 0.0));
  for (std::size_t j = 0; j < k; ++j) lin[j][j] = 1.0;
  const JointObjective f(stats, std::move(lin), std::vector<double>(a.begin(), a.end()));
  return minimize_on_box(f, axes, domain);
}

ExtReal joint_spectrum_kd(const ShiftSpace& space, std::span<const WordPotential> phis, std::span<const double> a,
                          std::size_t n, const std::vector<std::vector<double>>& q_axes, QDomain domain) {
  if (phis.size() > 3) throw InvalidArgument("joint spectrum supports k <= 3");
  const auto stats = joint_level_statistics(space, phis, n);
  const KdMinimum m = joint_spectrum_kd(stats, a, q_axes, domain);
  return m.minus_infinity ? ExtReal::neg_infinity() : ExtReal(m.value);
}

const char* to_string(Membership m) {
  switch (m) {
    case Membership::Inside: return "inside";
    case Membership::Outside: return "outside";
    case Membership::BoundaryUncertain: return "boundary_uncertain";
  }
  return "unknown";
}

MembershipResult membership(const ShiftSpace& space, std::span<const WordPotential> phis,
                            std::span<const WordPotential> psis, std::span<const double> a, std::size_t n,
                            const MembershipOptions& options) {
  const std::size_t k = phis.size();
  if (k < 1 || k > 3) throw InvalidArgument("membership supports k <= 3");
  if (psis.size() != k || a.size() != k) throw InvalidArgument("Phi, Psi and a must have the same dimension");
  if (!(options.delta > 0.0)) throw InvalidArgument("delta must be positive");
  for (const auto& psi : psis)
    if (psi.structure() != Structure::Additive) throw InvalidArgument("normalizing potentials must be additive");

  std::vector<WordPotential> all(phis.begin(), phis.end());
  all.insert(all.end(), psis.begin(), psis.end());
  const auto stats = joint_level_statistics(space, all, n);

  MembershipResult out;
  out.psi_required = options.log_c + static_cast<double>(n) * std::log1p(options.delta);
  out.psi_min = std::numeric_limits<double>::infinity();
  for (const auto& t : stats.tuples)
    for (std::size_t j = k; j < 2 * k; ++j) {
      if (!t[j].is_finite()) throw DomainError("normalizing potential is -inf on some word");
      out.psi_min = std::min(out.psi_min, t[j].value());
    }
  if (out.psi_min < out.psi_required - 1e-12 * std::max(1.0, std::abs(out.psi_required)))
    throw DomainError("normalizing potential violates the growth bound log C + n log(1 + delta)");

  std::vector<std::vector<double>> lin(2 * k, std::vector<double>(k, 0.0));
  for (std::size_t j = 0; j < k; ++j) {
    lin[j][j] = 1.0;
    lin[k + j][j] = -a[j];
  }
  const JointObjective f(stats, std::move(lin), std::vector<double>(k, 0.0));
  const auto axes = options.q_axes.empty() ? default_q_axes(k, QDomain::AllQ) : options.q_axes;
  if (axes.size() != k) throw InvalidArgument("q axes have the wrong dimension");
  out.minimum = minimize_on_box(f, axes, QDomain::AllQ);

  const double v = out.minimum.value;
  if (v < -options.band)
    out.verdict = Membership::Outside;
  else if (!out.minimum.minus_infinity && !out.minimum.boundary_active && v > options.band)
    out.verdict = Membership::Inside;
  else
    out.verdict = Membership::BoundaryUncertain;
  return out;
}

ExtReal ratio_spectrum(const MembershipResult& m) {
  switch (m.verdict) {
    case Membership::Inside: return m.minimum.value;
    case Membership::Outside: return ExtReal::neg_infinity();
    case Membership::BoundaryUncertain: return std::max(m.minimum.value, 0.0);
  }
  return ExtReal::neg_infinity();
}

ExtReal ratio_spectrum(const ShiftSpace& space, std::span<const WordPotential> phis,
                       std::span<const WordPotential> psis, std::span<const double> a, std::size_t n,
                       const MembershipOptions& options) {
  return ratio_spectrum(membership(space, phis, psis, a, n, options));
}

}  // namespace thermoform
