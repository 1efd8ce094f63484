#include "thermoform/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>

#include "thermoform/errors.hpp"
#include "thermoform/markov.hpp"
#include "thermoform/spectrum.hpp"

#ifndef THERMOFORM_DEFAULT_DATA_DIR
#define THERMOFORM_DEFAULT_DATA_DIR "data/examples"
#endif

namespace thermoform::cli {

// ---------------------------------------------------------------------------
// SyntheticPressure

SyntheticPressure SyntheticPressure::affine_max(std::vector<std::vector<double>> rows) {
  if (rows.empty()) throw InvalidArgument("affine_max needs at least one row");
  SyntheticPressure p;
  p.dim_ = rows.front().size() - 1;
  if (p.dim_ < 1) throw InvalidArgument("affine rows need a constant and at least one slope");
  for (const auto& r : rows) {
    if (r.size() != p.dim_ + 1) throw InvalidArgument("affine rows differ in length");
    for (double v : r)
      if (!std::isfinite(v)) throw InvalidArgument("affine rows must be finite");
  }
  p.rows_ = std::move(rows);
  return p;
}

SyntheticPressure SyntheticPressure::tabulated(std::vector<double> grid, std::vector<double> values) {
  SyntheticPressure p;
  p.table_.emplace(std::move(grid), std::move(values));
  return p;
}

double SyntheticPressure::operator()(std::span<const double> q) const {
  if (q.size() != dim_) throw InvalidArgument("synthetic pressure evaluated with the wrong dimension");
  if (table_) return table_->interpolate(q[0]);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& r : rows_) {
    double v = r[0];
    for (std::size_t j = 0; j < dim_; ++j) v += r[j + 1] * q[j];
    best = std::max(best, v);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Validation helpers

namespace {

std::string join(std::string_view path, std::string_view key) {
  return path.empty() ? std::string(key) : std::string(path) + "." + std::string(key);
}

void only_keys(const Json& obj, std::string_view path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string(path), "expected an object");
  for (const auto& [k, v] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw ConfigError(join(path, k), "unknown key");
  }
}

double get_number(const Json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(key, "expected a finite number");
  return x;
}

std::int64_t get_integer(const Json& v, const std::string& key, std::int64_t lo, std::int64_t hi) {
  if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
  const auto x = v.get<std::int64_t>();
  if (x < lo || x > hi)
    throw ConfigError(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return x;
}

std::string get_string(const Json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_vector(const Json& v, const std::string& key) {
  if (!v.is_array()) throw ConfigError(key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_number(v[i], key + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::vector<double>> get_matrix(const Json& v, const std::string& key) {
  if (!v.is_array() || v.empty()) throw ConfigError(key, "expected a non-empty array of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < v.size(); ++i) rows.push_back(get_vector(v[i], key + "[" + std::to_string(i) + "]"));
  for (const auto& r : rows)
    if (r.size() != rows.front().size() || r.empty()) throw ConfigError(key, "rows must be non-empty and of equal length");
  return rows;
}

Eigen::MatrixXd to_eigen(const std::vector<std::vector<double>>& rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

/// Grids: an explicit strictly increasing array, or {start, stop, count}.
std::vector<double> get_grid(const Json& v, const std::string& key) {
  std::vector<double> g;
  if (v.is_object()) {
    only_keys(v, key, {"start", "stop", "count"});
    if (!v.contains("start") || !v.contains("stop") || !v.contains("count"))
      throw ConfigError(key, "grid objects need start, stop and count");
    const double a = get_number(v["start"], key + ".start");
    const double b = get_number(v["stop"], key + ".stop");
    const auto c = get_integer(v["count"], key + ".count", 0, 1'000'000);
    if (c == 0) throw ConfigError(key, "grid is empty");
    if (c == 1) return {a};
    g = linspace(a, b, static_cast<std::size_t>(c));
  } else {
    g = get_vector(v, key);
  }
  if (g.empty()) throw ConfigError(key, "grid is empty");
  for (std::size_t i = 1; i < g.size(); ++i)
    if (!(g[i] > g[i - 1])) throw ConfigError(key, "grid must be strictly increasing");
  return g;
}

std::string domain_name(QDomain d) { return d == QDomain::AllQ ? "all" : "positive"; }

QDomain parse_domain(const Json& v, const std::string& key) {
  const std::string s = get_string(v, key);
  if (s == "all") return QDomain::AllQ;
  if (s == "positive") return QDomain::PositiveQ;
  throw ConfigError(key, "expected \"positive\", \"all\" or \"auto\"");
}

// --- system ---------------------------------------------------------------

Json normalize_system(const Json& raw) {
  const std::string path = "system";
  only_keys(raw, path, {"alphabet_size", "transitions", "word_budget", "symbol_base"});
  if (!raw.contains("alphabet_size")) throw ConfigError("system.alphabet_size", "missing");
  Json out;
  const auto m = get_integer(raw["alphabet_size"], "system.alphabet_size", 1, 64);
  out["alphabet_size"] = m;
  out["word_budget"] = raw.contains("word_budget")
                           ? get_integer(raw["word_budget"], "system.word_budget", 1, std::int64_t{1} << 40)
                           : static_cast<std::int64_t>(kDefaultWordBudget);
  out["symbol_base"] = raw.contains("symbol_base") ? get_integer(raw["symbol_base"], "system.symbol_base", 0, 1) : 0;
  out["transitions"] = nullptr;
  if (raw.contains("transitions") && !raw["transitions"].is_null()) {
    const auto t = get_matrix(raw["transitions"], "system.transitions");
    if (t.size() != static_cast<std::size_t>(m) || t.front().size() != static_cast<std::size_t>(m))
      throw ConfigError("system.transitions", "must be alphabet_size x alphabet_size");
    Json rows = Json::array();
    for (const auto& r : t) {
      Json row = Json::array();
      for (double x : r) {
        if (x != 0.0 && x != 1.0) throw ConfigError("system.transitions", "entries must be 0 or 1");
        row.push_back(static_cast<int>(x));
      }
      rows.push_back(row);
    }
    out["transitions"] = rows;
  }
  return out;
}

ShiftSpace build_space(const Json& sys) {
  const auto m = sys["alphabet_size"].get<std::size_t>();
  const auto budget = sys["word_budget"].get<std::uint64_t>();
  if (sys["transitions"].is_null()) return ShiftSpace::full(m, budget);
  std::vector<std::vector<bool>> t(m, std::vector<bool>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) t[i][j] = sys["transitions"][i][j].get<int>() == 1;
  try {
    return ShiftSpace::subshift(std::move(t), budget);
  } catch (const InvalidArgument& e) {
    throw ConfigError("system.transitions", e.what());
  }
}

// --- potentials -----------------------------------------------------------

Json normalize_potential(const Json& raw, const std::string& path, std::size_t m) {
  if (!raw.is_object()) throw ConfigError(path, "expected an object");
  if (!raw.contains("type")) throw ConfigError(path + ".type", "missing");
  if (!raw.contains("name")) throw ConfigError(path + ".name", "missing");
  const std::string type = get_string(raw["type"], path + ".type");
  Json out;
  out["name"] = get_string(raw["name"], path + ".name");
  if (out["name"].get<std::string>().empty()) throw ConfigError(path + ".name", "must be non-empty");
  out["type"] = type;
  if (raw.contains("description")) out["description"] = get_string(raw["description"], path + ".description");

  if (type == "cocycle") {
    only_keys(raw, path, {"name", "type", "description", "matrices", "kind", "index"});
    if (!raw.contains("matrices") || !raw["matrices"].is_array()) throw ConfigError(path + ".matrices", "missing");
    if (raw["matrices"].size() != m) throw ConfigError(path + ".matrices", "need one matrix per symbol");
    Json mats = Json::array();
    for (std::size_t i = 0; i < m; ++i) {
      const std::string key = path + ".matrices[" + std::to_string(i) + "]";
      const auto rows = get_matrix(raw["matrices"][i], key);
      if (rows.size() != rows.front().size()) throw ConfigError(key, "matrix must be square");
      if (!mats.empty() && mats.front().size() != rows.size()) throw ConfigError(key, "matrices differ in size");
      mats.push_back(rows);
    }
    out["matrices"] = mats;
    out["kind"] = raw.contains("kind") ? get_string(raw["kind"], path + ".kind") : "norm";
    if (out["kind"] != "norm" && out["kind"] != "singular_value")
      throw ConfigError(path + ".kind", "expected \"norm\" or \"singular_value\"");
    out["index"] = raw.contains("index")
                       ? get_integer(raw["index"], path + ".index", 1, static_cast<std::int64_t>(mats.front().size()))
                       : 1;
  } else if (type == "window") {
    only_keys(raw, path, {"name", "type", "description", "symbol_values", "constant", "window", "entries"});
    const int forms = static_cast<int>(raw.contains("symbol_values")) + static_cast<int>(raw.contains("constant")) +
                      static_cast<int>(raw.contains("entries"));
    if (forms != 1) throw ConfigError(path, "give exactly one of symbol_values, constant or entries");
    if (raw.contains("symbol_values")) {
      const auto v = get_vector(raw["symbol_values"], path + ".symbol_values");
      if (v.size() != m) throw ConfigError(path + ".symbol_values", "need one value per symbol");
      out["symbol_values"] = v;
    } else if (raw.contains("constant")) {
      out["constant"] = get_number(raw["constant"], path + ".constant");
    } else {
      if (!raw.contains("window")) throw ConfigError(path + ".window", "missing");
      out["window"] = get_integer(raw["window"], path + ".window", 1, 16);
      if (!raw["entries"].is_array()) throw ConfigError(path + ".entries", "expected an array");
      Json entries = Json::array();
      for (std::size_t i = 0; i < raw["entries"].size(); ++i) {
        const std::string key = path + ".entries[" + std::to_string(i) + "]";
        const Json& e = raw["entries"][i];
        only_keys(e, key, {"word", "value"});
        if (!e.contains("word") || !e.contains("value")) throw ConfigError(key, "entries need word and value");
        Json word = Json::array();
        if (!e["word"].is_array()) throw ConfigError(key + ".word", "expected an array of symbols");
        for (std::size_t j = 0; j < e["word"].size(); ++j)
          word.push_back(get_integer(e["word"][j], key + ".word", 0, 64));
        entries.push_back({{"word", word}, {"value", get_number(e["value"], key + ".value")}});
      }
      out["entries"] = entries;
    }
  } else if (type == "measure") {
    only_keys(raw, path, {"name", "type", "description", "transition"});
    if (!raw.contains("transition")) throw ConfigError(path + ".transition", "missing");
    const auto p = get_matrix(raw["transition"], path + ".transition");
    if (p.size() != m || p.front().size() != m) throw ConfigError(path + ".transition", "must be alphabet_size square");
    out["transition"] = p;
  } else if (type == "synthetic") {
    only_keys(raw, path, {"name", "type", "description", "affine_max", "grid", "values", "domain"});
    if (raw.contains("affine_max") == (raw.contains("grid") || raw.contains("values")))
      throw ConfigError(path, "give either affine_max or grid with values");
    if (raw.contains("affine_max")) {
      out["affine_max"] = get_matrix(raw["affine_max"], path + ".affine_max");
      if (out["affine_max"][0].size() < 2) throw ConfigError(path + ".affine_max", "rows need a constant and slopes");
    } else {
      if (!raw.contains("grid") || !raw.contains("values")) throw ConfigError(path, "tabulated pressure needs grid and values");
      const auto g = get_grid(raw["grid"], path + ".grid");
      const auto v = get_vector(raw["values"], path + ".values");
      if (g.size() != v.size() || g.size() < 3) throw ConfigError(path + ".values", "need at least 3 values, one per grid point");
      out["grid"] = g;
      out["values"] = v;
    }
    out["domain"] = raw.contains("domain") ? domain_name(parse_domain(raw["domain"], path + ".domain")) : "all";
  } else {
    throw ConfigError(path + ".type", "expected cocycle, window, measure or synthetic");
  }
  return out;
}

NamedPotential build_potential(const Json& p, const ShiftSpace& space, std::int64_t symbol_base,
                               const std::string& path) {
  NamedPotential np;
  np.name = p["name"].get<std::string>();
  np.type = p["type"].get<std::string>();
  try {
    if (np.type == "cocycle") {
      std::vector<Eigen::MatrixXd> mats;
      for (const auto& rows : p["matrices"]) mats.push_back(to_eigen(rows.get<std::vector<std::vector<double>>>()));
      np.cocycle.emplace(std::move(mats));
      np.word = p["kind"] == "norm" ? norm_potential(*np.cocycle)
                                    : singular_value_potential(*np.cocycle, p["index"].get<std::size_t>());
    } else if (np.type == "window") {
      if (p.contains("symbol_values")) {
        const auto v = p["symbol_values"].get<std::vector<double>>();
        np.word = birkhoff_potential(space, AdditiveWindowPotential::from_symbol_values(space, v));
      } else if (p.contains("constant")) {
        np.word = birkhoff_potential(space, AdditiveWindowPotential::constant(space, p["constant"].get<double>()));
      } else {
        std::vector<std::pair<Word, double>> entries;
        for (const auto& e : p["entries"]) {
          Word w;
          for (const auto& s : e["word"]) {
            const auto x = s.get<std::int64_t>() - symbol_base;
            if (x < 0) throw ConfigError(path + ".entries", "symbol below symbol_base");
            w.push_back(static_cast<Symbol>(x));
          }
          entries.emplace_back(std::move(w), e["value"].get<double>());
        }
        np.word = birkhoff_potential(
            space, AdditiveWindowPotential::from_entries(space, p["window"].get<std::size_t>(), entries));
      }
    } else if (np.type == "measure") {
      const auto mu = MarkovMeasure::from_transition(to_eigen(p["transition"].get<std::vector<std::vector<double>>>()));
      np.word = measure_potential(space, mu);
    } else {
      np.synthetic_domain = p["domain"] == "all" ? QDomain::AllQ : QDomain::PositiveQ;
      if (p.contains("affine_max"))
        np.synthetic = SyntheticPressure::affine_max(p["affine_max"].get<std::vector<std::vector<double>>>());
      else
        np.synthetic =
            SyntheticPressure::tabulated(p["grid"].get<std::vector<double>>(), p["values"].get<std::vector<double>>());
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(path, e.what());
  }
  return np;
}

// --- command sections -----------------------------------------------------

struct PotentialIndex {
  std::vector<std::string> names;
  std::vector<std::string> types;
  std::vector<Json> specs;

  std::size_t find(const std::string& name, const std::string& key) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    throw ConfigError(key, "unknown potential \"" + name + "\"");
  }
  bool is_synthetic(std::size_t i) const { return types[i] == "synthetic"; }
  std::size_t synthetic_dim(std::size_t i) const {
    return specs[i].contains("affine_max") ? specs[i]["affine_max"][0].size() - 1 : 1;
  }
  QDomain auto_domain(const std::vector<std::size_t>& ids) const {
    bool all = true;
    for (auto i : ids) {
      if (types[i] == "synthetic") all = all && specs[i]["domain"] == "all";
      else all = all && types[i] == "window";
    }
    return all ? QDomain::AllQ : QDomain::PositiveQ;
  }
};

std::vector<std::string> potential_list(const Json& sec, const std::string& path, const PotentialIndex& idx,
                                        bool required) {
  std::vector<std::string> names;
  if (sec.contains("potential") && sec.contains("potentials"))
    throw ConfigError(path, "give potential or potentials, not both");
  if (sec.contains("potential")) {
    names.push_back(get_string(sec["potential"], path + ".potential"));
  } else if (sec.contains("potentials")) {
    if (!sec["potentials"].is_array() || sec["potentials"].empty())
      throw ConfigError(path + ".potentials", "expected a non-empty array of names");
    for (const auto& v : sec["potentials"]) names.push_back(get_string(v, path + ".potentials"));
  } else if (required) {
    throw ConfigError(path + ".potentials", "missing");
  } else {
    names.push_back(idx.names.front());
  }
  for (const auto& n : names) idx.find(n, path + ".potentials");
  return names;
}

std::vector<std::size_t> ids_of(const std::vector<std::string>& names, const PotentialIndex& idx, const std::string& key) {
  std::vector<std::size_t> ids;
  for (const auto& n : names) ids.push_back(idx.find(n, key));
  return ids;
}

QDomain section_domain(const Json& sec, const std::string& path, const PotentialIndex& idx,
                       const std::vector<std::size_t>& ids) {
  if (!sec.contains("domain") || sec["domain"] == "auto") return idx.auto_domain(ids);
  return parse_domain(sec["domain"], path + ".domain");
}

void check_positive_grid(const std::vector<double>& g, QDomain d, const std::string& key) {
  if (d == QDomain::PositiveQ && !(g.front() > 0.0))
    throw ConfigError(key, "positive domain needs a strictly positive q grid");
}

std::int64_t section_n(const Json& sec, const std::string& path) {
  return sec.contains("n") ? get_integer(sec["n"], path + ".n", 1, 64) : 8;
}

Json normalize_pressure(const Json& sec, const PotentialIndex& idx) {
  const std::string path = "pressure";
  only_keys(sec, path, {"potential", "potentials", "n", "q_grid", "domain", "brackets", "h2"});
  const auto names = potential_list(sec, path, idx, false);
  if (names.size() != 1) throw ConfigError(path + ".potentials", "pressure takes one potential");
  const auto ids = ids_of(names, idx, path + ".potential");
  const QDomain d = section_domain(sec, path, idx, ids);
  Json out;
  out["potential"] = names.front();
  out["n"] = section_n(sec, path);
  out["domain"] = domain_name(d);
  const auto grid = sec.contains("q_grid") ? get_grid(sec["q_grid"], path + ".q_grid")
                                           : (d == QDomain::PositiveQ ? linspace(0.1, 3.0, 30) : linspace(-3.0, 3.0, 61));
  check_positive_grid(grid, d, path + ".q_grid");
  out["q_grid"] = grid;
  if (sec.contains("brackets") && !sec["brackets"].is_boolean()) throw ConfigError(path + ".brackets", "expected a boolean");
  out["brackets"] = sec.contains("brackets") ? sec["brackets"].get<bool>() : true;
  out["h2"] = nullptr;
  if (sec.contains("h2") && !sec["h2"].is_null()) {
    only_keys(sec["h2"], path + ".h2", {"n", "t_max"});
    out["h2"] = {{"n", sec["h2"].contains("n") ? get_integer(sec["h2"]["n"], path + ".h2.n", 1, 16) : 1},
                 {"t_max", sec["h2"].contains("t_max") ? get_integer(sec["h2"]["t_max"], path + ".h2.t_max", 0, 16) : 2}};
  }
  if (idx.is_synthetic(ids.front()) && idx.synthetic_dim(ids.front()) != 1)
    throw ConfigError(path + ".potential", "pressure curves need a 1-d potential");
  return out;
}

Json normalize_spectrum(const Json& sec, const PotentialIndex& idx) {
  const std::string path = "spectrum";
  only_keys(sec, path, {"potential", "potentials", "normalizers", "n", "alpha_grid", "q_grid", "domain", "log_c",
                        "delta"});
  const auto names = potential_list(sec, path, idx, false);
  if (names.size() > 3) throw ConfigError(path + ".potentials", "at most 3 potentials");
  const auto ids = ids_of(names, idx, path + ".potentials");
  for (auto i : ids)
    if (idx.is_synthetic(i) && (names.size() != 1 || idx.synthetic_dim(i) != 1))
      throw ConfigError(path + ".potentials", "synthetic spectra are 1-d only");
  Json out;
  out["potentials"] = names;
  out["normalizers"] = Json::array();
  if (sec.contains("normalizers")) {
    if (!sec["normalizers"].is_array()) throw ConfigError(path + ".normalizers", "expected an array of names");
    for (const auto& v : sec["normalizers"]) {
      const auto s = get_string(v, path + ".normalizers");
      if (idx.types[idx.find(s, path + ".normalizers")] != "window")
        throw ConfigError(path + ".normalizers", "normalizers must be window potentials");
      out["normalizers"].push_back(s);
    }
    if (!out["normalizers"].empty() && out["normalizers"].size() != names.size())
      throw ConfigError(path + ".normalizers", "need one normalizer per potential");
  }
  const bool ratio = !out["normalizers"].empty();
  const QDomain d = ratio ? QDomain::AllQ : section_domain(sec, path, idx, ids);
  out["domain"] = domain_name(d);
  out["n"] = section_n(sec, path);
  const std::size_t k = names.size();
  out["alpha_grid"] = nullptr;
  if (sec.contains("alpha_grid") && !sec["alpha_grid"].is_null()) {
    if (k == 1) {
      out["alpha_grid"] = get_grid(sec["alpha_grid"], path + ".alpha_grid");
    } else {
      const auto pts = get_matrix(sec["alpha_grid"], path + ".alpha_grid");
      if (pts.front().size() != k) throw ConfigError(path + ".alpha_grid", "points must have one entry per potential");
      out["alpha_grid"] = pts;
    }
  } else if (k > 1) {
    throw ConfigError(path + ".alpha_grid", "required for joint spectra");
  }
  std::vector<double> q;
  if (sec.contains("q_grid")) q = get_grid(sec["q_grid"], path + ".q_grid");
  else q = k == 1 ? default_q_grid(d) : default_q_axes(k, d).front();
  check_positive_grid(q, d, path + ".q_grid");
  if (q.size() < 3) throw ConfigError(path + ".q_grid", "need at least 3 points");
  out["q_grid"] = q;
  out["log_c"] = sec.contains("log_c") ? get_number(sec["log_c"], path + ".log_c") : 0.0;
  out["delta"] = sec.contains("delta") ? get_number(sec["delta"], path + ".delta") : 1.0;
  if (!(out["delta"].get<double>() > 0.0)) throw ConfigError(path + ".delta", "must be positive");
  return out;
}

Json normalize_domain(const Json& sec, const PotentialIndex& idx) {
  const std::string path = "domain";
  only_keys(sec, path, {"potential", "potentials", "n", "domain", "q_far"});
  const auto names = potential_list(sec, path, idx, false);
  if (names.size() != 1) throw ConfigError(path + ".potentials", "domain takes one potential");
  const auto ids = ids_of(names, idx, path + ".potential");
  if (idx.is_synthetic(ids.front()) && idx.synthetic_dim(ids.front()) != 1)
    throw ConfigError(path + ".potential", "domain needs a 1-d potential");
  Json out;
  out["potential"] = names.front();
  out["n"] = section_n(sec, path);
  if (out["n"].get<std::int64_t>() < 2) throw ConfigError(path + ".n", "must be >= 2");
  out["domain"] = domain_name(section_domain(sec, path, idx, ids));
  out["q_far"] = sec.contains("q_far") ? get_number(sec["q_far"], path + ".q_far") : 64.0;
  if (!(out["q_far"].get<double>() > 0.0)) throw ConfigError(path + ".q_far", "must be positive");
  return out;
}

Json normalize_membership(const Json& sec, const PotentialIndex& idx) {
  const std::string path = "membership";
  only_keys(sec, path, {"potential", "potentials", "normalizers", "a", "n", "log_c", "delta", "q_grid"});
  const auto names = potential_list(sec, path, idx, true);
  if (names.size() > 3) throw ConfigError(path + ".potentials", "at most 3 potentials");
  for (auto i : ids_of(names, idx, path + ".potentials"))
    if (idx.is_synthetic(i)) throw ConfigError(path + ".potentials", "membership needs word potentials");
  Json out;
  out["potentials"] = names;
  if (!sec.contains("normalizers") || !sec["normalizers"].is_array())
    throw ConfigError(path + ".normalizers", "missing");
  out["normalizers"] = Json::array();
  for (const auto& v : sec["normalizers"]) {
    const auto s = get_string(v, path + ".normalizers");
    if (idx.types[idx.find(s, path + ".normalizers")] != "window")
      throw ConfigError(path + ".normalizers", "normalizers must be window potentials");
    out["normalizers"].push_back(s);
  }
  if (out["normalizers"].size() != names.size()) throw ConfigError(path + ".normalizers", "need one per potential");
  if (!sec.contains("a")) throw ConfigError(path + ".a", "missing");
  const auto a = sec["a"].is_number() ? std::vector<double>{get_number(sec["a"], path + ".a")} : get_vector(sec["a"], path + ".a");
  if (a.size() != names.size()) throw ConfigError(path + ".a", "need one entry per potential");
  out["a"] = a;
  out["n"] = section_n(sec, path);
  out["log_c"] = sec.contains("log_c") ? get_number(sec["log_c"], path + ".log_c") : 0.0;
  out["delta"] = sec.contains("delta") ? get_number(sec["delta"], path + ".delta") : 1.0;
  if (!(out["delta"].get<double>() > 0.0)) throw ConfigError(path + ".delta", "must be positive");
  const auto q = sec.contains("q_grid") ? get_grid(sec["q_grid"], path + ".q_grid")
                                        : default_q_axes(names.size(), QDomain::AllQ).front();
  if (q.size() < 3) throw ConfigError(path + ".q_grid", "need at least 3 points");
  out["q_grid"] = q;
  return out;
}

Json normalize_subdiff(const Json& sec, const PotentialIndex& idx) {
  const std::string path = "subdiff";
  only_keys(sec, path, {"potential", "potentials", "q", "n", "directions", "h", "half_width"});
  const auto names = potential_list(sec, path, idx, false);
  const auto ids = ids_of(names, idx, path + ".potentials");
  std::size_t dim = 0;
  for (auto i : ids) {
    if (idx.is_synthetic(i) && names.size() != 1)
      throw ConfigError(path + ".potentials", "a synthetic pressure must be used alone");
    dim += idx.is_synthetic(i) ? idx.synthetic_dim(i) : 1;
  }
  if (dim > 2) throw ConfigError(path + ".potentials", "subdifferentials are supported in 1 or 2 dimensions");
  Json out;
  out["potentials"] = names;
  if (!sec.contains("q")) throw ConfigError(path + ".q", "missing");
  const auto q = sec["q"].is_number() ? std::vector<double>{get_number(sec["q"], path + ".q")} : get_vector(sec["q"], path + ".q");
  if (q.size() != dim) throw ConfigError(path + ".q", "dimension does not match the potentials");
  out["q"] = q;
  out["n"] = section_n(sec, path);
  out["directions"] = sec.contains("directions") ? get_integer(sec["directions"], path + ".directions", 3, 4096) : 64;
  out["h"] = sec.contains("h") ? get_number(sec["h"], path + ".h") : 1e-3;
  out["half_width"] = sec.contains("half_width") ? get_number(sec["half_width"], path + ".half_width") : 1.0;
  if (!(out["h"].get<double>() > 0.0)) throw ConfigError(path + ".h", "must be positive");
  if (!(out["half_width"].get<double>() > 2.0 * out["h"].get<double>()))
    throw ConfigError(path + ".half_width", "must exceed 2 h");
  return out;
}

}  // namespace

Json normalize_config(const Json& raw) {
  only_keys(raw, "", {"description", "system", "potentials", "pressure", "spectrum", "domain", "membership", "subdiff",
                      "seed", "tolerances"});
  if (!raw.contains("system")) throw ConfigError("system", "missing");
  Json out;
  if (raw.contains("description")) out["description"] = get_string(raw["description"], "description");
  out["system"] = normalize_system(raw["system"]);
  const auto m = out["system"]["alphabet_size"].get<std::size_t>();

  if (!raw.contains("potentials") || !raw["potentials"].is_array() || raw["potentials"].empty())
    throw ConfigError("potentials", "expected a non-empty array");
  PotentialIndex idx;
  out["potentials"] = Json::array();
  std::set<std::string> seen;
  for (std::size_t i = 0; i < raw["potentials"].size(); ++i) {
    const std::string path = "potentials[" + std::to_string(i) + "]";
    Json p = normalize_potential(raw["potentials"][i], path, m);
    const auto name = p["name"].get<std::string>();
    if (!seen.insert(name).second) throw ConfigError(path + ".name", "duplicate name \"" + name + "\"");
    idx.names.push_back(name);
    idx.types.push_back(p["type"].get<std::string>());
    idx.specs.push_back(p);
    out["potentials"].push_back(std::move(p));
  }

  auto section = [&](const char* key) { return raw.contains(key) && !raw[key].is_null() ? raw[key] : Json::object(); };
  // Sections left out are filled from defaults when those fit the
  // potentials, and recorded as null otherwise.
  auto defaulted = [&](const char* key, Json (*fn)(const Json&, const PotentialIndex&)) -> Json {
    if (raw.contains(key) && !raw[key].is_null()) return fn(raw[key], idx);
    try {
      return fn(Json::object(), idx);
    } catch (const ConfigError&) {
      return nullptr;
    }
  };
  out["pressure"] = defaulted("pressure", normalize_pressure);
  out["spectrum"] = defaulted("spectrum", normalize_spectrum);
  out["domain"] = defaulted("domain", normalize_domain);
  out["membership"] = raw.contains("membership") && !raw["membership"].is_null()
                          ? normalize_membership(raw["membership"], idx)
                          : Json(nullptr);
  out["subdiff"] = raw.contains("subdiff") && !raw["subdiff"].is_null() ? normalize_subdiff(raw["subdiff"], idx)
                                                                         : Json(nullptr);
  out["seed"] = raw.contains("seed") ? get_integer(raw["seed"], "seed", 0, std::numeric_limits<std::int64_t>::max()) : 1;
  const Json tol = section("tolerances");
  only_keys(tol, "tolerances", {"membership_band"});
  out["tolerances"]["membership_band"] =
      tol.contains("membership_band") ? get_number(tol["membership_band"], "tolerances.membership_band") : 1e-6;
  if (!(out["tolerances"]["membership_band"].get<double>() >= 0.0))
    throw ConfigError("tolerances.membership_band", "must be non-negative");
  return out;
}

RunConfig build_config(const Json& raw) {
  RunConfig cfg;
  cfg.normalized = normalize_config(raw);
  cfg.space = build_space(cfg.normalized["system"]);
  const auto base = cfg.normalized["system"]["symbol_base"].get<std::int64_t>();
  for (std::size_t i = 0; i < cfg.normalized["potentials"].size(); ++i)
    cfg.potentials.push_back(
        build_potential(cfg.normalized["potentials"][i], cfg.space, base, "potentials[" + std::to_string(i) + "]"));
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  Json raw;
  try {
    raw = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("--config", std::string("malformed JSON: ") + e.what());
  }
  return build_config(raw);
}

const NamedPotential& RunConfig::potential(std::string_view name, std::string_view key) const {
  for (const auto& p : potentials)
    if (p.name == name) return p;
  throw ConfigError(std::string(key), "unknown potential \"" + std::string(name) + "\"");
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("THERMOFORM_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return THERMOFORM_DEFAULT_DATA_DIR;
}

std::vector<std::string> example_names() {
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto& e : std::filesystem::directory_iterator(data_dir(), ec))
    if (e.path().extension() == ".json") names.push_back(e.path().stem().string());
  std::sort(names.begin(), names.end());
  return names;
}

RunConfig load_example(std::string_view name) {
  const auto path = data_dir() / (std::string(name) + ".json");
  if (!std::filesystem::exists(path)) throw ConfigError("--example", "unknown example \"" + std::string(name) + "\"");
  return load_config(path);
}

std::string config_hash(const Json& normalized) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : normalized.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x < 0 ? "-inf" : "inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace thermoform::cli
