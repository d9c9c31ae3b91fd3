#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kramers/problem.hpp"

namespace kramers {

/// One config entry: a number, a bare string, or a list of numbers.
struct ConfigValue {
  enum class Type { Number, String, NumberList };
  Type type = Type::Number;
  double number = 0.0;
  std::string str;
  std::vector<double> list;

  static ConfigValue make_number(double x);
  static ConfigValue make_string(std::string s);
  static ConfigValue make_list(std::vector<double> xs);
  bool operator==(const ConfigValue& other) const;
};

/// Plain-text key/value config with nested tables (sections). Canonical
/// serialization sorts sections and keys, so parse -> serialize -> parse is
/// the identity on the parsed representation.
struct Config {
  std::map<std::string, std::map<std::string, ConfigValue>> tables;

  void set(const std::string& section, const std::string& key, ConfigValue v);
  const ConfigValue* find(const std::string& section, const std::string& key) const;
  bool operator==(const Config& other) const { return tables == other.tables; }
};

Config parse_config(const std::string& text);
Config parse_config_file(const std::string& path);
std::string serialize_config(const Config& cfg);

/// FNV-1a over the canonical serialization.
std::uint64_t config_hash(const Config& cfg);

/// Access wrapper that records which keys were read; `check_consumed` rejects
/// configs containing anything the caller did not understand.
class ConfigReader {
 public:
  explicit ConfigReader(const Config& cfg) : cfg_(cfg) {}

  bool has(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const;
  double number(const std::string& section, const std::string& key);
  double number_or(const std::string& section, const std::string& key, double dflt);
  std::string str(const std::string& section, const std::string& key);
  std::string str_or(const std::string& section, const std::string& key,
                     const std::string& dflt);
  std::vector<double> list(const std::string& section, const std::string& key);
  std::optional<std::vector<double>> list_opt(const std::string& section,
                                              const std::string& key);

  /// Sections whose unread keys should be reported; prefixes match nested
  /// tables.
  void check_consumed(const std::vector<std::string>& owned_prefixes) const;

 private:
  const ConfigValue& get(const std::string& section, const std::string& key);
  const Config& cfg_;
  mutable std::set<std::pair<std::string, std::string>> used_;
};

// Problem descriptors <-> config tables (sections "<prefix>",
// "<prefix>.potential", "<prefix>.kinetic", "<prefix>.diffusion",
// "<prefix>.effective_a", "<prefix>.mass_field", "<prefix>.friction_field").
ProblemSpec problem_from_config(ConfigReader& reader,
                                const std::string& prefix = "problem");
void problem_to_config(const ProblemSpec& problem, Config& cfg,
                       const std::string& prefix = "problem");

}  // namespace kramers
