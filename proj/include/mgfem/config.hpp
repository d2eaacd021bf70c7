#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mgfem/apps.hpp"

namespace mgfem {

enum class Problem { transport_diffusion, elasticity, driven_cavity };

std::string to_string(Problem p);
Problem parse_problem(const std::string& s);

struct RunConfig {
  Problem problem = Problem::transport_diffusion;
  TransportDiffusionConfig td;
  ElasticityConfig elasticity;
  NavierStokesConfig ns;
  SolverSettings solver;
  std::string output_dir = "out";
  int snapshot_stride = 0;  ///< 0 writes no snapshots
  std::string backend = "reference";

  /// Checks every section; throws Error naming the offending key.
  void validate() const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parse or validation failure, tied to a key and (when known) a line.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string key, int line)
      : Error(what), key_(std::move(key)), line_(line) {}
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

/// Every accepted key in serialization order.
std::vector<std::string> config_keys();

/// Flat "key = value" text; '#' starts a comment. Unset keys keep their
/// defaults. The result is validated.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Sets one key from its text form (used for command-line overrides). Not validated.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_value(const RunConfig& cfg, const std::string& key);

/// Every key, one per line, in config_keys() order.
std::string serialize_config(const RunConfig& cfg);

}  // namespace mgfem
