#include "thermoform/cli/commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "thermoform/cli/verify.hpp"
#include "thermoform/errors.hpp"
#include "thermoform/parallel.hpp"
#include "thermoform/pressure.hpp"
#include "thermoform/spectrum.hpp"

namespace thermoform::cli {

namespace {

Json ext_json(const ExtReal& x) { return x.is_finite() ? Json(x.value()) : Json("-inf"); }

Json opt_json(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

Json meta(const RunConfig& config, const std::string& command, std::size_t n) {
  Json m;
  m["tool"] = kToolName;
  m["version"] = kVersion;
  m["command"] = command;
  m["config_hash"] = config_hash(config.normalized);
  m["seed"] = config.seed();
  m["threads"] = thread_count();
  m["n"] = n;
  m["tolerances"] = {{"legendre_rounding_relative", 1e-12},
                     {"legendre_margin_factor", 3.0},
                     {"h1_rounding_slack", kH1RoundingSlack},
                     {"membership_band", config.normalized["tolerances"]["membership_band"]},
                     {"subgradient_support_slack", 1e-9}};
  return m;
}

void prepare(const RunConfig& config, const RunOptions& options) {
  std::filesystem::create_directories(options.out_dir);
  std::ofstream echo(options.out_dir / "config.json", std::ios::binary);
  echo << config.normalized.dump(2) << '\n';
}

void write_json(const RunOptions& options, const std::string& file, const Json& j) {
  std::ofstream out(options.out_dir / file, std::ios::binary);
  out << j.dump(2) << '\n';
  if (!out) throw Error("cannot write " + (options.out_dir / file).string());
}

void write_text(const RunOptions& options, const std::string& file, const std::string& text) {
  std::ofstream out(options.out_dir / file, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + (options.out_dir / file).string());
}

std::string opt_cell(const std::optional<double>& x) { return x ? format_double(*x) : std::string(); }

const WordPotential& word_of(const NamedPotential& p, const std::string& key) {
  if (!p.word) throw ConfigError(key, "\"" + p.name + "\" is not a word potential");
  return *p.word;
}

QDomain domain_of(const Json& sec) { return sec["domain"] == "all" ? QDomain::AllQ : QDomain::PositiveQ; }

std::string spectrum_flag(const SpectrumPoint& p) {
  if (p.legendre.minus_infinity) return "minus_infinity";
  return p.legendre.boundary_active ? "boundary" : "finite";
}

std::string kd_flag(const KdMinimum& m) {
  if (m.minus_infinity) return "minus_infinity";
  return m.boundary_active ? "boundary" : "finite";
}

}  // namespace

Json cmd_pressure(const RunConfig& config, const RunOptions& options) {
  if (config.normalized["pressure"].is_null()) throw ConfigError("pressure", "section missing");
  const Json& sec = config.section("pressure");
  const auto& pot = config.potential(sec["potential"].get<std::string>(), "pressure.potential");
  const auto grid = sec["q_grid"].get<std::vector<double>>();
  const auto n = sec["n"].get<std::size_t>();
  const QDomain domain = domain_of(sec);
  prepare(config, options);

  Json summary;
  summary["meta"] = meta(config, "pressure", n);
  summary["potential"] = pot.name;
  summary["domain"] = to_string(domain);

  std::ostringstream csv;
  csv << "q,value,upper,lower\n";
  if (pot.synthetic) {
    std::vector<double> values;
    for (double q : grid) values.push_back((*pot.synthetic)(q));
    for (std::size_t i = 0; i < grid.size(); ++i)
      csv << format_double(grid[i]) << ',' << format_double(values[i]) << ",,\n";
    summary["convexity_defect"] = grid.size() >= 3 ? convexity_defect(grid, values) : 0.0;
    summary["label"] = "synthetic pressure";
  } else {
    const WordPotential& phi = word_of(pot, "pressure.potential");
    std::optional<H2Certificate> cert;
    if (!sec["h2"].is_null()) {
      cert = search_h2(config.space, phi, sec["h2"]["n"].get<std::size_t>(), sec["h2"]["t_max"].get<std::size_t>());
      summary["h2"] = cert ? Json{{"n", cert->n}, {"t_n", cert->t_n}, {"c_n", cert->c_n}} : Json(nullptr);
    }
    PressureCurve curve;
    if (sec["brackets"].get<bool>()) {
      const PressureSequence seq(config.space, phi, n);
      curve = pressure_curve(seq, grid, domain, cert);
      const auto beta = seq.max_averages();
      summary["beta_n"] = beta.back();
      summary["beta_upper"] =
          seq.subadditive_at(1.0) ? Json(*std::min_element(beta.begin(), beta.end())) : Json(nullptr);
      summary["h1_depth"] = seq.h1_depth();
    } else {
      curve = pressure_curve(config.space, phi, grid, n, domain, false, cert);
      const LevelStatistics level = level_statistics(config.space, phi, n);
      summary["beta_n"] = level.max_value() / static_cast<double>(n);
      summary["beta_upper"] = nullptr;
    }
    for (std::size_t i = 0; i < curve.q_grid.size(); ++i)
      csv << format_double(curve.q_grid[i]) << ',' << format_double(curve.values[i]) << ','
          << opt_cell(curve.upper[i]) << ',' << opt_cell(curve.lower[i]) << '\n';
    summary["convexity_defect"] = curve.convexity_defect;
    summary["label"] = curve.label;
  }
  write_text(options, "pressure.csv", csv.str());
  write_json(options, "pressure.json", summary);
  return summary;
}

Json cmd_spectrum(const RunConfig& config, const RunOptions& options) {
  if (config.normalized["spectrum"].is_null()) throw ConfigError("spectrum", "section missing");
  const Json& sec = config.section("spectrum");
  const auto names = sec["potentials"].get<std::vector<std::string>>();
  const auto norm_names = sec["normalizers"].get<std::vector<std::string>>();
  const auto n = sec["n"].get<std::size_t>();
  const QDomain domain = domain_of(sec);
  const auto q_grid = sec["q_grid"].get<std::vector<double>>();
  const std::size_t k = names.size();
  prepare(config, options);

  Json summary;
  summary["meta"] = meta(config, "spectrum", n);
  summary["potentials"] = names;
  summary["q_domain"] = to_string(domain);
  summary["provenance"] = kSpectrumProvenance;
  std::ostringstream csv;

  if (!norm_names.empty()) {
    std::vector<WordPotential> phis, psis;
    for (std::size_t i = 0; i < k; ++i) {
      phis.push_back(word_of(config.potential(names[i], "spectrum.potentials"), "spectrum.potentials"));
      psis.push_back(word_of(config.potential(norm_names[i], "spectrum.normalizers"), "spectrum.normalizers"));
    }
    if (sec["alpha_grid"].is_null()) throw ConfigError("spectrum.alpha_grid", "required for ratio spectra");
    MembershipOptions mo;
    mo.log_c = sec["log_c"].get<double>();
    mo.delta = sec["delta"].get<double>();
    mo.band = config.normalized["tolerances"]["membership_band"].get<double>();
    mo.q_axes.assign(k, q_grid);
    summary["normalizers"] = norm_names;
    summary["kind"] = "ratio";
    for (std::size_t j = 0; j < k; ++j) csv << 'a' << (j + 1) << ',';
    csv << "value,flag\n";
    Json points = Json::array();
    const Json& grid = sec["alpha_grid"];
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto a = k == 1 ? std::vector<double>{grid[i].get<double>()} : grid[i].get<std::vector<double>>();
      const MembershipResult m = membership(config.space, phis, psis, a, n, mo);
      const ExtReal h = ratio_spectrum(m);
      for (double x : a) csv << format_double(x) << ',';
      csv << format_double(h.as_double()) << ',' << to_string(m.verdict) << '\n';
    }
  } else if (k == 1 && config.potential(names[0], "spectrum.potentials").synthetic) {
    const auto& syn = *config.potential(names[0], "spectrum.potentials").synthetic;
    auto p = [&](double q) { return syn(q); };
    const GridFunction f = GridFunction::sample(q_grid, p);
    const auto up = asymptotic_slope(f, Direction::PlusInfinity);
    Json dom{{"upper", up.slope}, {"lower", nullptr}};
    if (domain == QDomain::AllQ) dom["lower"] = asymptotic_slope(f, Direction::MinusInfinity).slope;
    summary["domain"] = dom;
    summary["kind"] = "synthetic";
    std::vector<double> alphas;
    if (sec["alpha_grid"].is_null()) {
      const double lo = dom["lower"].is_null() ? f.cell_slope(0) : dom["lower"].get<double>();
      alphas = lo < up.slope ? linspace(lo, up.slope, 41) : std::vector<double>{up.slope};
    } else {
      alphas = sec["alpha_grid"].get<std::vector<double>>();
    }
    csv << "alpha,value,flag\n";
    for (double alpha : alphas) {
      SpectrumPoint pt{ExtReal(0.0), legendre_inf(f, alpha, domain, p)};
      pt.value = pt.legendre.minus_infinity ? ExtReal::neg_infinity() : ExtReal(pt.legendre.value);
      csv << format_double(alpha) << ',' << format_double(pt.value.as_double()) << ',' << spectrum_flag(pt) << '\n';
    }
  } else if (k == 1) {
    const WordPotential& phi = word_of(config.potential(names[0], "spectrum.potentials"), "spectrum.potentials");
    const PressureSequence seq(config.space, phi, n);
    std::vector<double> alphas;
    if (sec["alpha_grid"].is_null()) {
      const DomainEstimate d = lyapunov_domain(seq, domain);
      alphas = d.lower < d.upper ? linspace(d.lower, d.upper, 41) : std::vector<double>{d.upper};
    } else {
      alphas = sec["alpha_grid"].get<std::vector<double>>();
    }
    const SpectrumCurve curve = spectrum_curve(seq, alphas, domain, q_grid);
    summary["kind"] = "lyapunov";
    summary["domain"] = {{"lower", curve.domain.lower},
                         {"upper", curve.domain.upper},
                         {"lower_source", curve.domain.lower_source},
                         {"upper_bracket", opt_json(curve.domain.upper_bracket)},
                         {"lower_bracket", opt_json(curve.domain.lower_bracket)},
                         {"slope_upper", curve.domain.slope_upper}};
    csv << "alpha,value,flag\n";
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      const std::string flag = !curve.values[i].is_finite() ? "minus_infinity"
                               : curve.boundary_active[i]   ? "boundary"
                                                            : "finite";
      csv << format_double(alphas[i]) << ',' << format_double(curve.values[i].as_double()) << ',' << flag << '\n';
    }
  } else {
    std::vector<WordPotential> phis;
    for (const auto& nm : names) phis.push_back(word_of(config.potential(nm, "spectrum.potentials"), "spectrum.potentials"));
    const auto stats = joint_level_statistics(config.space, phis, n);
    const std::vector<std::vector<double>> axes(k, q_grid);
    summary["kind"] = "joint";
    for (std::size_t j = 0; j < k; ++j) csv << 'a' << (j + 1) << ',';
    csv << "value,flag\n";
    const Json& grid = sec["alpha_grid"];
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto a = grid[i].get<std::vector<double>>();
      const KdMinimum m = joint_spectrum_kd(stats, a, axes, domain);
      for (double x : a) csv << format_double(x) << ',';
      csv << format_double(m.minus_infinity ? -std::numeric_limits<double>::infinity() : m.value) << ','
          << kd_flag(m) << '\n';
    }
  }
  write_text(options, "spectrum.csv", csv.str());
  write_json(options, "spectrum.json", summary);
  return summary;
}

Json cmd_domain(const RunConfig& config, const RunOptions& options) {
  if (config.normalized["domain"].is_null()) throw ConfigError("domain", "section missing");
  const Json& sec = config.section("domain");
  const auto& pot = config.potential(sec["potential"].get<std::string>(), "domain.potential");
  const auto n = sec["n"].get<std::size_t>();
  const QDomain domain = domain_of(sec);
  const double q_far = sec["q_far"].get<double>();
  prepare(config, options);
  Json summary;
  summary["meta"] = meta(config, "domain", n);
  summary["potential"] = pot.name;
  summary["q_domain"] = to_string(domain);
  if (pot.synthetic) {
    auto p = [&](double q) { return (*pot.synthetic)(q); };
    summary["upper"] = asymptotic_slope(GridFunction::sample(linspace(q_far / 2, q_far, 9), p), Direction::PlusInfinity).slope;
    summary["lower"] = domain == QDomain::AllQ
                           ? Json(asymptotic_slope(GridFunction::sample(linspace(-q_far, -q_far / 2, 9), p),
                                                   Direction::MinusInfinity)
                                      .slope)
                           : Json(nullptr);
  } else {
    const PressureSequence seq(config.space, word_of(pot, "domain.potential"), n);
    const DomainEstimate d = lyapunov_domain(seq, domain, q_far);
    summary["lower"] = d.lower;
    summary["upper"] = d.upper;
    summary["lower_source"] = d.lower_source;
    summary["upper_bracket"] = opt_json(d.upper_bracket);
    summary["lower_bracket"] = opt_json(d.lower_bracket);
    summary["slope_upper"] = d.slope_upper;
    summary["slope_lower"] = opt_json(d.slope_lower);
    summary["max_averages"] = d.max_averages;
    summary["min_averages"] = d.min_averages;
  }
  write_json(options, "domain.json", summary);
  return summary;
}

Json cmd_membership(const RunConfig& config, const RunOptions& options) {
  if (config.normalized["membership"].is_null()) throw ConfigError("membership", "section missing");
  const Json& sec = config.section("membership");
  const auto names = sec["potentials"].get<std::vector<std::string>>();
  const auto norm_names = sec["normalizers"].get<std::vector<std::string>>();
  const auto n = sec["n"].get<std::size_t>();
  std::vector<WordPotential> phis, psis;
  for (std::size_t i = 0; i < names.size(); ++i) {
    phis.push_back(word_of(config.potential(names[i], "membership.potentials"), "membership.potentials"));
    psis.push_back(word_of(config.potential(norm_names[i], "membership.normalizers"), "membership.normalizers"));
  }
  MembershipOptions mo;
  mo.log_c = sec["log_c"].get<double>();
  mo.delta = sec["delta"].get<double>();
  mo.band = config.normalized["tolerances"]["membership_band"].get<double>();
  mo.q_axes.assign(names.size(), sec["q_grid"].get<std::vector<double>>());
  prepare(config, options);
  const auto a = sec["a"].get<std::vector<double>>();
  const MembershipResult m = membership(config.space, phis, psis, a, n, mo);
  Json summary;
  summary["meta"] = meta(config, "membership", n);
  summary["a"] = a;
  summary["verdict"] = to_string(m.verdict);
  summary["infimum"] = m.minimum.value;
  summary["argmin"] = m.minimum.argmin;
  summary["edge_unbounded"] = m.minimum.minus_infinity;
  summary["boundary_active"] = m.minimum.boundary_active;
  summary["ratio_spectrum"] = ext_json(ratio_spectrum(m));
  summary["psi_min"] = m.psi_min;
  summary["psi_required"] = m.psi_required;
  summary["provenance"] = kSpectrumProvenance;
  write_json(options, "membership.json", summary);
  return summary;
}

Json cmd_subdiff(const RunConfig& config, const RunOptions& options) {
  if (config.normalized["subdiff"].is_null()) throw ConfigError("subdiff", "section missing");
  const Json& sec = config.section("subdiff");
  const auto names = sec["potentials"].get<std::vector<std::string>>();
  const auto q = sec["q"].get<std::vector<double>>();
  const auto n = sec["n"].get<std::size_t>();
  prepare(config, options);

  MultiFunction f;
  QDomain domain = QDomain::AllQ;
  std::optional<JointLevelStatistics> stats;
  const auto& first = config.potential(names[0], "subdiff.potentials");
  if (first.synthetic) {
    const SyntheticPressure syn = *first.synthetic;
    f = [syn](std::span<const double> x) { return syn(x); };
    domain = *first.synthetic_domain;
  } else {
    std::vector<WordPotential> phis;
    bool additive = true;
    for (const auto& nm : names) {
      phis.push_back(word_of(config.potential(nm, "subdiff.potentials"), "subdiff.potentials"));
      additive = additive && phis.back().structure() == Structure::Additive;
    }
    domain = additive ? QDomain::AllQ : QDomain::PositiveQ;
    stats = joint_level_statistics(config.space, phis, n);
    f = [&stats](std::span<const double> x) { return stats->pressure(x); };
  }
  if (domain == QDomain::PositiveQ)
    for (double x : q)
      if (!(x > 0.0)) throw DomainError("q must be positive for sub-additive potentials");

  Json summary;
  summary["meta"] = meta(config, "subdiff", n);
  summary["q"] = q;
  summary["q_domain"] = to_string(domain);
  if (q.size() == 1) {
    const double h = sec["h"].get<double>();
    auto half = static_cast<std::ptrdiff_t>(std::llround(sec["half_width"].get<double>() / h));
    if (domain == QDomain::PositiveQ)
      half = std::min<std::ptrdiff_t>(half, static_cast<std::ptrdiff_t>(std::floor(q[0] / h - 1e-9)));
    if (half < 1) throw DomainError("q is too close to 0 for the step h");
    std::vector<double> grid;
    for (std::ptrdiff_t i = -half; i <= half; ++i) grid.push_back(q[0] + static_cast<double>(i) * h);
    const GridFunction g = GridFunction::sample(grid, [&](double x) { return f(std::span<const double>(&x, 1)); });
    const SubdiffInterval iv = subdifferential(g, q[0]);
    summary["kind"] = "interval";
    summary["left"] = iv.left;
    summary["right"] = iv.right;
    summary["h"] = h;
    summary["convexity_defect"] = g.convexity_defect();
  } else {
    const Polygon poly = subgradient_set_2d(f, q, sec["directions"].get<std::size_t>(), domain);
    summary["kind"] = "polygon";
    Json verts = Json::array();
    for (const auto& v : poly.vertices) verts.push_back({v[0], v[1]});
    summary["vertices"] = verts;
    summary["support"] = poly.support;
    summary["directions"] = sec["directions"];
  }
  write_json(options, "subdiff.json", summary);
  return summary;
}

// ---------------------------------------------------------------------------

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"thermoform: pressure, Lyapunov spectra and subdifferentials of sub-additive potentials"};
  app.footer(
      "Verbs: pressure | spectrum | domain | membership | subdiff | verify\n"
      "Environment: THERMOFORM_THREADS and THERMOFORM_SEED supply --threads and --seed;\n"
      "THERMOFORM_DATA_DIR overrides the built-in example directory.\n"
      "Exit codes: 0 ok, 1 verification failure, 2 configuration error, 3 numeric domain error.");
  std::string verb;
  std::string config_path, example;
  std::string out_dir = "out";
  std::size_t threads = 0;
  std::uint64_t seed = 0;
  app.add_option("verb", verb, "Command to run")
      ->required()
      ->check(CLI::IsMember({"pressure", "spectrum", "domain", "membership", "subdiff", "verify"}));
  app.add_option("--config", config_path, "JSON run configuration (for verify: tolerance overrides)");
  app.add_option("--example", example, "Built-in example name");
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads (default: all cores)")
                          ->envname("THERMOFORM_THREADS")
                          ->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "Seed recorded in outputs and used by sampling")->envname("THERMOFORM_SEED");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*threads_opt) set_thread_count(threads);
    RunOptions options{out_dir};

    if (verb == "verify") {
      VerifyTolerances tol;
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("--config", "cannot open " + config_path);
        Json j;
        try {
          j = Json::parse(in);
        } catch (const Json::parse_error& e) {
          throw ConfigError("--config", std::string("malformed JSON: ") + e.what());
        }
        tol.apply(j.contains("tolerances") ? j["tolerances"] : j);
      }
      const VerifyReport report = run_verify(tol);
      for (const auto& c : report.checks) std::cout << format_check(c) << '\n';
      std::filesystem::create_directories(options.out_dir);
      Json j = report.to_json();
      j["meta"] = {{"tool", kToolName}, {"version", kVersion}, {"threads", thread_count()}};
      std::ofstream(options.out_dir / "verify.json", std::ios::binary) << j.dump(2) << '\n';
      std::cout << (report.passed() ? "verify: all checks passed\n" : "verify: FAILED\n");
      return report.passed() ? 0 : 1;
    }

    if (config_path.empty() == example.empty()) throw ConfigError("--config", "give exactly one of --config or --example");
    RunConfig config = config_path.empty() ? load_example(example) : load_config(config_path);
    if (*seed_opt) config.normalized["seed"] = seed;

    Json summary;
    if (verb == "pressure") summary = cmd_pressure(config, options);
    else if (verb == "spectrum") summary = cmd_spectrum(config, options);
    else if (verb == "domain") summary = cmd_domain(config, options);
    else if (verb == "membership") summary = cmd_membership(config, options);
    else summary = cmd_subdiff(config, options);
    std::cout << summary.dump(2) << '\n';
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return 2;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace thermoform::cli
