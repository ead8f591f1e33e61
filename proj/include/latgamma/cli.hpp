#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "latgamma/field.hpp"
#include "latgamma/gammalab.hpp"
#include "latgamma/kernel.hpp"

namespace latgamma {

/// Settings for one invocation: "section.key" values from the INI file with
/// command-line flags layered on top.
struct RunConfig {
  std::string command;
  std::map<std::string, std::string> values;
  std::filesystem::path out_dir = ".";
  bool out_given = false;
  std::optional<std::size_t> threads;
  std::uint64_t seed = 0;

  /// Reads an INI file into "section.key" entries (ConfigError on syntax, IoError if unreadable).
  static std::map<std::string, std::string> load_ini(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values.count(key) != 0; }
  std::string text(const std::string& key, const std::string& fallback) const;
  double real(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<double> reals(const std::string& key) const;
  std::optional<double> maybe_real(const std::string& key) const;
};

/// "ball:r", "exp:rate:cutoff" or "table:path".
Kernel kernel_from_descriptor(const std::string& desc, int d);

Kernel kernel_from_config(const RunConfig& c, int d);
Schedule schedule_from_config(const RunConfig& c);
TargetSet target_from_config(const RunConfig& c, int d);
PeriodicLattice lattice_from_config(const RunConfig& c, int d);

/// Runs the command line; returns the process exit status (0, 2 config, 3 numeric, 4 I/O).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace latgamma
