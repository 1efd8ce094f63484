#include "thermoform/cli/verify.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "thermoform/cli/commands.hpp"
#include "thermoform/errors.hpp"
#include "thermoform/measures.hpp"
#include "thermoform/parallel.hpp"
#include "thermoform/pressure.hpp"
#include "thermoform/spectrum.hpp"

namespace thermoform::cli {

std::map<std::string, double*> VerifyTolerances::fields() {
  return {{"ex11_exact", &ex11_exact},
          {"ex11_limit", &ex11_limit},
          {"ex11_spectrum", &ex11_spectrum},
          {"binary_spectrum", &binary_spectrum},
          {"binary_pressure", &binary_pressure},
          {"biconjugate_factor", &biconjugate_factor},
          {"ex63_hausdorff", &ex63_hausdorff},
          {"ex62_interval", &ex62_interval},
          {"gibbs", &gibbs},
          {"fekete_slack", &fekete_slack},
          {"irreducibility", &irreducibility},
          {"membership", &membership},
          {"shift_covariance", &shift_covariance},
          {"scale_covariance", &scale_covariance}};
}

void VerifyTolerances::apply(const Json& overrides) {
  if (!overrides.is_object()) throw ConfigError("tolerances", "expected an object");
  auto f = fields();
  for (const auto& [k, v] : overrides.items()) {
    auto it = f.find(k);
    if (it == f.end()) throw ConfigError("tolerances." + k, "unknown tolerance");
    if (!v.is_number()) throw ConfigError("tolerances." + k, "expected a number");
    *it->second = v.get<double>();
  }
}

Json VerifyTolerances::to_json() const {
  Json j;
  for (const auto& [k, p] : const_cast<VerifyTolerances*>(this)->fields()) j[k] = *p;
  return j;
}

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

Json VerifyReport::to_json() const {
  Json j;
  j["passed"] = passed();
  j["checks"] = Json::array();
  for (const auto& c : checks)
    j["checks"].push_back({{"id", c.id},
                           {"name", c.name},
                           {"passed", c.passed},
                           {"measured", std::isfinite(c.measured) ? Json(c.measured) : Json(format_double(c.measured))},
                           {"tolerance", c.tolerance},
                           {"detail", c.detail},
                           {"seconds", c.seconds}});
  return j;
}

std::vector<std::pair<int, std::string>> acceptance_checks() {
  return {{1, "ex1_1 closed-form finite pressure"},
          {2, "ex1_1 Fekete bound vs limit pressure"},
          {3, "ex1_1 Legendre value at alpha = log 3"},
          {4, "additive_binary spectrum and pressure"},
          {5, "biconjugation on random grid functions"},
          {6, "ex6_3 subgradient polygon"},
          {7, "ex6_2 subdifferential at 0"},
          {8, "variational (Gibbs) inequality"},
          {9, "Fekete monotonicity"},
          {10, "irreducibility verdicts"},
          {11, "membership classification"},
          {12, "determinism of pressure CSV"},
          {13, "shift and scale covariance"}};
}

std::string format_check(const CheckResult& r) {
  std::ostringstream os;
  os << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << ": measured=" << format_double(r.measured)
     << " tol=" << format_double(r.tolerance);
  if (!r.detail.empty()) os << " (" << r.detail << ")";
  return os.str();
}

namespace {

const double kLog2 = std::numbers::ln2;
const double kLog3 = std::log(3.0);
const double kLog4 = std::log(4.0);

/// Lazily built inputs shared by the checks of one run.
class Context {
 public:
  explicit Context(const VerifyTolerances& tol) : tol(tol) {}
  const VerifyTolerances& tol;

  const RunConfig& example(const std::string& name) {
    auto it = examples_.find(name);
    if (it == examples_.end()) it = examples_.emplace(name, load_example(name)).first;
    return it->second;
  }
  const WordPotential& word(const std::string& example_name, const std::string& potential) {
    return *example(example_name).potential(potential, "verify").word;
  }
  const PressureSequence& sequence(const std::string& example_name, const std::string& potential) {
    const std::string key = example_name + "/" + potential;
    auto it = sequences_.find(key);
    if (it == sequences_.end())
      it = sequences_
               .emplace(key, std::make_unique<PressureSequence>(example(example_name).space,
                                                                word(example_name, potential), 12))
               .first;
    return *it->second;
  }

 private:
  std::map<std::string, RunConfig> examples_;
  std::map<std::string, std::unique_ptr<PressureSequence>> sequences_;
};

double ex11_closed_form(std::size_t n, double q) {
  const double nd = static_cast<double>(n);
  const double terms[] = {std::log(std::pow(4.0, nd) - std::pow(2.0, nd) - 2.0), nd * kLog2 + nd * q * kLog2,
                          nd * q * kLog3, nd * q * kLog4};
  const double top = *std::max_element(std::begin(terms), std::end(terms));
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - top);
  return (top + std::log(acc)) / nd;
}

double binary_entropy(double p) { return -p * std::log(p) - (1.0 - p) * std::log1p(-p); }

CheckResult check_ex11_exact(Context& ctx) {
  const auto& seq = ctx.sequence("ex1_1", "phi");
  double worst = 0.0;
  for (std::size_t n : {4, 6, 8})
    for (double q : {0.5, 1.0, 2.0}) {
      const double oracle = ex11_closed_form(n, q);
      worst = std::max(worst, std::abs(seq.finite_pressure(q, n) - oracle) / std::abs(oracle));
    }
  return {0, "", worst <= ctx.tol.ex11_exact, worst, ctx.tol.ex11_exact, "max relative error over n in {4,6,8}, q in {0.5,1,2}"};
}

CheckResult check_ex11_limit(Context& ctx) {
  const auto& seq = ctx.sequence("ex1_1", "phi");
  double worst = 0.0;
  std::ostringstream detail;
  bool all = true;
  for (double q : {0.25, 0.5, 1.0, 2.0}) {
    const double target = q >= 1.0 ? q * kLog4 : kLog4;
    const auto f = seq.fekete_upper(q);
    if (!f) {
      all = false;
      detail << "q=" << q << ": no Fekete bound; ";
      continue;
    }
    const double err = std::abs(*f - target);
    worst = std::max(worst, err);
    detail << "q=" << q << ": " << format_double(*f) << " vs " << format_double(target) << "; ";
  }
  return {0, "", all && worst <= ctx.tol.ex11_limit, worst, ctx.tol.ex11_limit, detail.str() + "n=12"};
}

CheckResult check_ex11_spectrum(Context& ctx) {
  const auto& seq = ctx.sequence("ex1_1", "phi");
  const auto grid = linspace(0.01, 3.0, 300);
  const SpectrumPoint pt = spectrum_point(seq.level(12), kLog3, QDomain::PositiveQ, grid);
  const double target = kLog4 - kLog3;
  const double err = pt.value.is_finite() ? std::abs(pt.value.value() - target) : std::numeric_limits<double>::infinity();
  return {0, "", err <= ctx.tol.ex11_spectrum, err, ctx.tol.ex11_spectrum,
          "value " + format_double(pt.value.as_double()) + " at q=" + format_double(pt.legendre.argmin) + ", target " +
              format_double(target) + ", n=12"};
}

CheckResult check_binary(Context& ctx) {
  const auto& seq = ctx.sequence("additive_binary", "phi");
  double p_err = 0.0;
  for (std::size_t n = 1; n <= seq.n_max(); ++n)
    for (double q : linspace(-8.0, 8.0, 65)) p_err = std::max(p_err, std::abs(seq.finite_pressure(q, n) - std::log1p(std::exp2(q))));
  double s_err = 0.0;
  for (int i = 1; i <= 21; ++i) {
    const double p = i / 22.0;
    const SpectrumPoint pt = spectrum_point(seq.level(seq.n_max()), p * kLog2, QDomain::AllQ);
    const double err = pt.value.is_finite() ? std::abs(pt.value.value() - binary_entropy(p)) : std::numeric_limits<double>::infinity();
    s_err = std::max(s_err, err);
  }
  const bool ok = s_err <= ctx.tol.binary_spectrum && p_err <= ctx.tol.binary_pressure;
  return {0, "", ok, s_err, ctx.tol.binary_spectrum,
          "pressure error " + format_double(p_err) + " (tol " + format_double(ctx.tol.binary_pressure) + ") over n=1..12"};
}

/// Lower convex hull by monotone chain, evaluated at the grid points.
std::vector<double> hull_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<std::size_t> h;
  for (std::size_t i = 0; i < x.size(); ++i) {
    while (h.size() >= 2) {
      const auto a = h[h.size() - 2], b = h.back();
      const double cross = (x[b] - x[a]) * (y[i] - y[a]) - (y[b] - y[a]) * (x[i] - x[a]);
      if (cross <= 0.0) h.pop_back();
      else break;
    }
    h.push_back(i);
  }
  std::vector<double> out(x.size());
  for (std::size_t s = 0; s + 1 < h.size(); ++s)
    for (std::size_t i = h[s]; i <= h[s + 1]; ++i) {
      const double t = (x[i] - x[h[s]]) / (x[h[s + 1]] - x[h[s]]);
      out[i] = y[h[s]] + t * (y[h[s + 1]] - y[h[s]]);
    }
  return out;
}

CheckResult check_biconjugate(Context& ctx) {
  Rng rng(20240501);
  const auto x = linspace(-1.0, 1.0, 101);
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::array<double, 2>> pieces(5);
    for (auto& p : pieces) p = {2.0 * rng.normal(), 0.5 * rng.normal()};
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      y[i] = -std::numeric_limits<double>::infinity();
      for (const auto& p : pieces) y[i] = std::max(y[i], p[0] * x[i] + p[1]);
    }
    const bool convex = trial < 50;
    if (!convex)
      for (auto& v : y) v += 0.6 * (rng.uniform() - 0.5);
    const GridFunction f(x, y);
    const BiconjugateReport r = biconjugate_check(f);
    const std::vector<double> reference = convex ? y : hull_oracle(x, y);
    double dev = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) dev = std::max(dev, std::abs(r.biconjugate.values()[i] - reference[i]));
    const double bound = r.max_slope * f.spacing();
    worst_ratio = std::max(worst_ratio, bound > 0.0 ? dev / bound : (dev > 0.0 ? 1e300 : 0.0));
  }
  return {0, "", worst_ratio <= ctx.tol.biconjugate_factor, worst_ratio, ctx.tol.biconjugate_factor,
          "max |f** - reference| / (C h) over 50 convex and 50 non-convex inputs"};
}

CheckResult check_ex63(Context& ctx) {
  const auto& pot = ctx.example("ex6_3").potential("P", "verify");
  const SyntheticPressure syn = *pot.synthetic;
  const std::vector<double> q{1.0, 1.0};
  const Polygon poly = subgradient_set_2d([&](std::span<const double> x) { return syn(x); }, q, 64, *pot.synthetic_domain);
  const double d = hausdorff_to_segment(poly, {1.0, 0.0}, {2.0, -1.0});
  return {0, "", d <= ctx.tol.ex63_hausdorff, d, ctx.tol.ex63_hausdorff,
          std::to_string(poly.vertices.size()) + " vertices, 64 directions at q=(1,1)"};
}

CheckResult check_ex62(Context& ctx) {
  const auto& pot = ctx.example("ex6_2").potential("P", "verify");
  const SyntheticPressure syn = *pot.synthetic;
  const GridFunction f = GridFunction::sample(linspace(-1.0, 1.0, 2001), [&](double q) { return syn(q); });
  const SubdiffInterval iv = subdifferential(f, 0.0);
  const double err = std::max(std::abs(iv.left + 1.0), std::abs(iv.right - 1.0));
  return {0, "", err <= ctx.tol.ex62_interval, err, ctx.tol.ex62_interval,
          "[" + format_double(iv.left) + ", " + format_double(iv.right) + "], h=1e-3"};
}

CheckResult check_gibbs(Context& ctx) {
  Rng rng(7);
  double violation = -std::numeric_limits<double>::infinity();
  const std::size_t n = 8;
  for (const char* name : {"ex1_1", "additive_binary"}) {
    const RunConfig& cfg = ctx.example(name);
    const WordPotential& phi = ctx.word(name, "phi");
    const LevelStatistics level = level_statistics(cfg.space, phi, n);
    const auto m = static_cast<Eigen::Index>(cfg.space.alphabet_size());
    for (int t = 0; t < 20; ++t) {
      Eigen::MatrixXd p(m, m);
      for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) p(i, j) = 0.05 + rng.uniform();
        p.row(i) /= p.row(i).sum();
      }
      const MarkovMeasure mu = MarkovMeasure::from_transition(p);
      const double h = entropy(mu);
      const ExtReal e = cylinder_expectation(cfg.space, mu, phi, n);
      for (double q : {0.5, 1.0, 2.0}) {
        const ExtReal lhs = ExtReal(h) + scale(q, e);
        if (lhs.is_finite()) violation = std::max(violation, lhs.value() - level.pressure(q));
      }
    }
  }
  double eq_err = 0.0;
  {
    const RunConfig& cfg = ctx.example("additive_binary");
    const WordPotential& phi = ctx.word("additive_binary", "phi");
    const LevelStatistics level = level_statistics(cfg.space, phi, n);
    for (double q : {0.5, 1.0, 2.0}) {
      const double w1 = std::exp2(q) / (1.0 + std::exp2(q));
      const std::vector<double> w{1.0 - w1, w1};
      const MarkovMeasure gibbs = MarkovMeasure::bernoulli(w);
      const double lhs = entropy(gibbs) + q * cylinder_expectation(cfg.space, gibbs, phi, n).value();
      eq_err = std::max(eq_err, std::abs(lhs - level.pressure(q)));
    }
  }
  const double measured = std::max(violation, eq_err);
  return {0, "", measured <= ctx.tol.gibbs, measured, ctx.tol.gibbs,
          "max violation " + format_double(violation) + ", Gibbs equality error " + format_double(eq_err) +
              ", 20 measures x 3 q x 2 potentials, n=8"};
}

CheckResult check_fekete(Context& ctx) {
  double worst = 0.0;
  for (const char* name : {"ex1_1", "positive_pair"}) {
    const auto& seq = ctx.sequence(name, "phi");
    for (double q : {0.5, 1.0, 2.0})
      for (std::size_t a = 1; a < 12; ++a)
        for (std::size_t b = 1; a + b <= 12; ++b) {
          const double whole = seq.level(a + b).log_sum(q);
          const double parts = seq.level(a).log_sum(q) + seq.level(b).log_sum(q);
          const double slack = ctx.tol.fekete_slack * std::max({1.0, std::abs(whole), std::abs(parts)});
          worst = std::max(worst, (whole - parts) - slack);
        }
    const auto beta = seq.max_averages();
    for (std::size_t i = 1; i < beta.size(); ++i)
      worst = std::max(worst, beta[i] - beta[i - 1] - ctx.tol.fekete_slack * std::max(1.0, std::abs(beta[i])));
  }
  return {0, "", worst <= 0.0, worst, 0.0,
          "max excess beyond relative slack " + format_double(ctx.tol.fekete_slack) + " over n+m <= 12 and beta_n, n <= 12"};
}

CheckResult check_irreducibility(Context& ctx) {
  const MatrixCocycle& ex = *ctx.example("ex1_1").potential("phi", "verify").cocycle;
  const MatrixCocycle& pos = *ctx.example("positive_pair").potential("phi", "verify").cocycle;
  const IrreducibilityVerdict v1 = check_irreducibility(ex);
  const IrreducibilityVerdict v2 = check_irreducibility(pos);
  double defect = std::numeric_limits<double>::infinity();
  bool witness_ok = false;
  if (!v1.irreducible && v1.witness.cols() >= 1 && v1.witness.cols() < v1.witness.rows()) {
    defect = invariance_defect(ex, v1.witness);
    witness_ok = defect <= ctx.tol.irreducibility;
  }
  const bool ok = witness_ok && v2.irreducible;
  return {0, "", ok, defect, ctx.tol.irreducibility,
          std::string("ex1_1 ") + (v1.irreducible ? "irreducible" : "reducible, witness dim " + std::to_string(v1.witness.cols())) +
              "; positive_pair " + (v2.irreducible ? "irreducible" : "reducible")};
}

CheckResult check_membership(Context& ctx) {
  const RunConfig& cfg = ctx.example("additive_binary");
  const std::vector<WordPotential> phis{ctx.word("additive_binary", "phi")};
  const std::vector<WordPotential> psis{ctx.word("additive_binary", "one")};
  const std::vector<double> inside{0.5 * kLog2}, outside{2.0 * kLog2};
  const MembershipResult m1 = membership(cfg.space, phis, psis, inside, 12);
  const MembershipResult m2 = membership(cfg.space, phis, psis, outside, 12);
  const ExtReal h = ratio_spectrum(m1);
  const double err = h.is_finite() ? std::abs(h.value() - binary_entropy(0.5)) : std::numeric_limits<double>::infinity();
  const bool ok = m1.verdict == Membership::Inside && m2.verdict == Membership::Outside && err <= ctx.tol.membership;
  return {0, "", ok, err, ctx.tol.membership,
          std::string("a=log2/2: ") + to_string(m1.verdict) + ", a=2 log2: " + to_string(m2.verdict)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

CheckResult check_determinism(Context& ctx) {
  const RunConfig& cfg = ctx.example("ex1_1");
  const std::size_t saved = thread_count();
  const auto base = std::filesystem::temp_directory_path() /
                    ("thermoform-verify-" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
  std::string a, b;
  set_thread_count(4);
  try {
    cmd_pressure(cfg, {base / "run1"});
    cmd_pressure(cfg, {base / "run2"});
    a = slurp(base / "run1" / "pressure.csv");
    b = slurp(base / "run2" / "pressure.csv");
  } catch (...) {
    set_thread_count(saved);
    std::filesystem::remove_all(base);
    throw;
  }
  set_thread_count(saved);
  std::filesystem::remove_all(base);
  const bool ok = !a.empty() && a == b;
  return {0, "", ok, ok ? 0.0 : 1.0, 0.0, std::to_string(a.size()) + " bytes, --threads 4, two runs"};
}

CheckResult check_covariance(Context& ctx) {
  const RunConfig& cfg = ctx.example("additive_binary");
  const WordPotential& phi = ctx.word("additive_binary", "phi");
  const std::size_t n = 12;
  const LevelStatistics base = level_statistics(cfg.space, phi, n);
  double shift_err = 0.0, scale_err = 0.0;
  for (double p : {0.2, 0.5, 0.8}) {
    const double alpha = p * kLog2;
    const double ref = spectrum_point(base, alpha, QDomain::AllQ).value.as_double();
    for (double c : {-1.0, 0.7}) {
      const LevelStatistics ls = level_statistics(cfg.space, shifted(cfg.space, phi, c), n);
      shift_err = std::max(shift_err, std::abs(spectrum_point(ls, alpha + c, QDomain::AllQ).value.as_double() - ref));
    }
    for (double lambda : {0.5, 3.0}) {
      const LevelStatistics ls = level_statistics(cfg.space, scaled(lambda, phi), n);
      scale_err =
          std::max(scale_err, std::abs(spectrum_point(ls, lambda * alpha, QDomain::AllQ).value.as_double() - ref));
    }
  }
  const bool ok = shift_err <= ctx.tol.shift_covariance && scale_err <= ctx.tol.scale_covariance;
  return {0, "", ok, shift_err, ctx.tol.shift_covariance,
          "scale error " + format_double(scale_err) + " (tol " + format_double(ctx.tol.scale_covariance) + ")"};
}

using CheckFn = CheckResult (*)(Context&);

CheckFn check_function(int id) {
  switch (id) {
    case 1: return check_ex11_exact;
    case 2: return check_ex11_limit;
    case 3: return check_ex11_spectrum;
    case 4: return check_binary;
    case 5: return check_biconjugate;
    case 6: return check_ex63;
    case 7: return check_ex62;
    case 8: return check_gibbs;
    case 9: return check_fekete;
    case 10: return check_irreducibility;
    case 11: return check_membership;
    case 12: return check_determinism;
    case 13: return check_covariance;
  }
  throw InvalidArgument("unknown acceptance check " + std::to_string(id));
}

}  // namespace

VerifyReport run_verify(const VerifyTolerances& tolerances, std::span<const int> ids) {
  const auto all = acceptance_checks();
  std::vector<int> selected(ids.begin(), ids.end());
  if (selected.empty())
    for (const auto& [id, name] : all) selected.push_back(id);
  Context ctx(tolerances);
  VerifyReport report;
  for (int id : selected) {
    const CheckFn fn = check_function(id);
    const auto start = std::chrono::steady_clock::now();
    CheckResult r;
    try {
      r = fn(ctx);
    } catch (const std::exception& e) {
      r = {0, "", false, std::numeric_limits<double>::quiet_NaN(), 0.0, std::string("exception: ") + e.what()};
    }
    r.id = id;
    r.name = all[static_cast<std::size_t>(id - 1)].second;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.checks.push_back(std::move(r));
  }
  return report;
}

}  // namespace thermoform::cli
