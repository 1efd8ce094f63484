#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "thermoform/cocycle.hpp"
#include "thermoform/convex.hpp"
#include "thermoform/potentials.hpp"
#include "thermoform/symbolic.hpp"

namespace thermoform::cli {

inline constexpr const char* kToolName = "thermoform";
inline constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::json;

/// Pressure function given directly as data: the maximum of affine maps
/// c + s . q, or a tabulated 1-d function interpolated linearly.
class SyntheticPressure {
 public:
  static SyntheticPressure affine_max(std::vector<std::vector<double>> rows);
  static SyntheticPressure tabulated(std::vector<double> grid, std::vector<double> values);

  std::size_t dim() const { return dim_; }
  double operator()(std::span<const double> q) const;
  double operator()(double q) const { return (*this)(std::span<const double>(&q, 1)); }

 private:
  std::size_t dim_ = 1;
  std::vector<std::vector<double>> rows_;
  std::optional<GridFunction> table_;
};

struct NamedPotential {
  std::string name;
  std::string type;  // cocycle | window | measure | synthetic
  std::optional<WordPotential> word;
  std::optional<MatrixCocycle> cocycle;
  std::optional<SyntheticPressure> synthetic;
  std::optional<QDomain> synthetic_domain;
};

struct RunConfig {
  Json normalized;  // canonical echo with every default filled in
  ShiftSpace space = ShiftSpace::full(2);
  std::vector<NamedPotential> potentials;

  /// Throws ConfigError(key) for an unknown name.
  const NamedPotential& potential(std::string_view name, std::string_view key) const;
  std::uint64_t seed() const { return normalized.at("seed").get<std::uint64_t>(); }
  const Json& section(std::string_view name) const { return normalized.at(std::string(name)); }
};

/// Validates and fills defaults. Idempotent: normalize(normalize(j)) ==
/// normalize(j). Throws ConfigError naming the offending key.
Json normalize_config(const Json& raw);
/// Builds the model objects from a raw or normalized config.
RunConfig build_config(const Json& raw);
RunConfig load_config(const std::filesystem::path& path);

/// Built-in example directory: $THERMOFORM_DATA_DIR, else the compiled-in path.
std::filesystem::path data_dir();
std::vector<std::string> example_names();
RunConfig load_example(std::string_view name);

/// FNV-1a 64 of the compact normalized JSON, as 16 hex digits.
std::string config_hash(const Json& normalized);

/// 17 significant digits; "-inf"/"inf"/"nan" for non-finite values.
std::string format_double(double x);

}  // namespace thermoform::cli
