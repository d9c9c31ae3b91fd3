#include "kramers/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace kramers {

ConfigValue ConfigValue::make_number(double x) {
  ConfigValue v;
  v.type = Type::Number;
  v.number = x;
  return v;
}

ConfigValue ConfigValue::make_string(std::string s) {
  ConfigValue v;
  v.type = Type::String;
  v.str = std::move(s);
  return v;
}

ConfigValue ConfigValue::make_list(std::vector<double> xs) {
  ConfigValue v;
  v.type = Type::NumberList;
  v.list = std::move(xs);
  return v;
}

bool ConfigValue::operator==(const ConfigValue& other) const {
  if (type != other.type) return false;
  switch (type) {
    case Type::Number:
      return number == other.number;
    case Type::String:
      return str == other.str;
    case Type::NumberList:
      return list == other.list;
  }
  return false;
}

void Config::set(const std::string& section, const std::string& key,
                 ConfigValue v) {
  tables[section][key] = std::move(v);
}

const ConfigValue* Config::find(const std::string& section,
                                const std::string& key) const {
  auto s = tables.find(section);
  if (s == tables.end()) return nullptr;
  auto k = s->second.find(key);
  if (k == s->second.end()) return nullptr;
  return &k->second;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool parse_number(const std::string& tok, double& out) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + tok.size() && tok.size() > 0;
}

ConfigValue parse_value(const std::string& raw, int line_no) {
  const std::string tok = trim(raw);
  if (tok.empty()) throw ConfigError("empty value at line " + std::to_string(line_no));
  if (tok.front() == '[') {
    if (tok.back() != ']') {
      throw ConfigError("unterminated list at line " + std::to_string(line_no));
    }
    std::vector<double> xs;
    std::string inner = tok.substr(1, tok.size() - 2);
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::string it = trim(item);
      if (it.empty()) {
        throw ConfigError("empty list item at line " + std::to_string(line_no));
      }
      double x;
      if (!parse_number(it, x)) {
        throw ConfigError("bad list number '" + it + "' at line " +
                          std::to_string(line_no));
      }
      xs.push_back(x);
    }
    return ConfigValue::make_list(std::move(xs));
  }
  double x;
  if (parse_number(tok, x)) return ConfigValue::make_number(x);
  if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"') {
    return ConfigValue::make_string(tok.substr(1, tok.size() - 2));
  }
  // Bare strings: a single identifier-like token.
  for (char c : tok) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      throw ConfigError("unquoted string with spaces at line " +
                        std::to_string(line_no));
    }
  }
  return ConfigValue::make_string(tok);
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

bool needs_quotes(const std::string& s) {
  if (s.empty()) return true;
  double x;
  if (parse_number(s, x)) return true;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '#' || c == '[' ||
        c == ']' || c == '"') {
      return true;
    }
  }
  return false;
}

}  // namespace

Config parse_config(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("bad section header at line " + std::to_string(line_no));
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw ConfigError("empty section name at line " + std::to_string(line_no));
      }
      // Sections may appear more than once; keys accumulate.
      cfg.tables[section];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected 'key = value' at line " + std::to_string(line_no));
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw ConfigError("empty key at line " + std::to_string(line_no));
    }
    if (section.empty()) {
      throw ConfigError("key outside any section at line " + std::to_string(line_no));
    }
    if (cfg.tables[section].count(key)) {
      throw ConfigError("duplicate key '" + section + "." + key + "' at line " +
                        std::to_string(line_no));
    }
    cfg.tables[section][key] = parse_value(line.substr(eq + 1), line_no);
  }
  return cfg;
}

Config parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const Config& cfg) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [section, table] : cfg.tables) {
    if (!first) out << "\n";
    first = false;
    out << "[" << section << "]\n";
    for (const auto& [key, value] : table) {
      out << key << " = ";
      switch (value.type) {
        case ConfigValue::Type::Number:
          out << format_number(value.number);
          break;
        case ConfigValue::Type::String:
          if (needs_quotes(value.str)) {
            out << '"' << value.str << '"';
          } else {
            out << value.str;
          }
          break;
        case ConfigValue::Type::NumberList: {
          out << "[";
          for (std::size_t i = 0; i < value.list.size(); ++i) {
            if (i) out << ", ";
            out << format_number(value.list[i]);
          }
          out << "]";
          break;
        }
      }
      out << "\n";
    }
  }
  return out.str();
}

std::uint64_t config_hash(const Config& cfg) {
  const std::string text = serialize_config(cfg);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

bool ConfigReader::has(const std::string& section, const std::string& key) const {
  return cfg_.find(section, key) != nullptr;
}

bool ConfigReader::has_section(const std::string& section) const {
  return cfg_.tables.count(section) > 0;
}

const ConfigValue& ConfigReader::get(const std::string& section,
                                     const std::string& key) {
  const ConfigValue* v = cfg_.find(section, key);
  if (!v) throw ConfigError("missing config key: " + section + "." + key);
  used_.insert({section, key});
  return *v;
}

double ConfigReader::number(const std::string& section, const std::string& key) {
  const ConfigValue& v = get(section, key);
  if (v.type != ConfigValue::Type::Number) {
    throw ConfigError("expected number: " + section + "." + key);
  }
  return v.number;
}

double ConfigReader::number_or(const std::string& section, const std::string& key,
                               double dflt) {
  return has(section, key) ? number(section, key) : dflt;
}

std::string ConfigReader::str(const std::string& section, const std::string& key) {
  const ConfigValue& v = get(section, key);
  if (v.type != ConfigValue::Type::String) {
    throw ConfigError("expected string: " + section + "." + key);
  }
  return v.str;
}

std::string ConfigReader::str_or(const std::string& section, const std::string& key,
                                 const std::string& dflt) {
  return has(section, key) ? str(section, key) : dflt;
}

std::vector<double> ConfigReader::list(const std::string& section,
                                       const std::string& key) {
  const ConfigValue& v = get(section, key);
  if (v.type == ConfigValue::Type::NumberList) return v.list;
  if (v.type == ConfigValue::Type::Number) return {v.number};
  throw ConfigError("expected number list: " + section + "." + key);
}

std::optional<std::vector<double>> ConfigReader::list_opt(
    const std::string& section, const std::string& key) {
  if (!has(section, key)) return std::nullopt;
  return list(section, key);
}

void ConfigReader::check_consumed(
    const std::vector<std::string>& owned_prefixes) const {
  std::vector<std::string> unknown;
  for (const auto& [section, table] : cfg_.tables) {
    bool owned = false;
    for (const std::string& p : owned_prefixes) {
      if (section == p || section.rfind(p + ".", 0) == 0) {
        owned = true;
        break;
      }
    }
    if (!owned) continue;
    for (const auto& [key, value] : table) {
      if (!used_.count({section, key})) unknown.push_back(section + "." + key);
    }
  }
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }
}

namespace {

Eigen::MatrixXd square_from_list(const std::vector<double>& flat, int d,
                                 const std::string& what) {
  if (static_cast<int>(flat.size()) != d * d) {
    throw ConfigError(what + ": expected " + std::to_string(d * d) + " entries");
  }
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = flat[i * d + j];
  return m;
}

Eigen::VectorXd vector_from_list(const std::vector<double>& flat, int d,
                                 const std::string& what) {
  if (static_cast<int>(flat.size()) != d) {
    throw ConfigError(what + ": expected " + std::to_string(d) + " entries");
  }
  return Eigen::Map<const Eigen::VectorXd>(flat.data(), d);
}

PotentialPtr potential_from_config(ConfigReader& r, const Domain& domain,
                                   const std::string& section) {
  const std::string kind = r.str(section, "kind");
  if (kind == "zero") return make_zero_potential(domain);
  if (kind == "quadratic") {
    return make_quadratic_potential(
        domain, square_from_list(r.list(section, "stiffness"), domain.dim, section));
  }
  if (kind == "cosine") {
    std::optional<double> period;
    if (r.has(section, "period")) period = r.number(section, "period");
    return make_cosine_potential(
        domain, vector_from_list(r.list(section, "amplitudes"), domain.dim, section),
        period);
  }
  if (kind == "double_well") return make_double_well_potential(domain);
  if (kind == "sum") {
    const int n = static_cast<int>(r.number(section, "terms"));
    if (n < 1) throw ConfigError(section + ": sum needs at least one term");
    std::vector<PotentialPtr> terms;
    for (int i = 0; i < n; ++i) {
      terms.push_back(
          potential_from_config(r, domain, section + ".term" + std::to_string(i)));
    }
    return make_sum_potential(std::move(terms));
  }
  throw ConfigError(section + ": unknown potential kind '" + kind + "'");
}

MatrixFieldPtr field_from_config(ConfigReader& r, const Domain& domain,
                                 const std::string& section) {
  const std::string kind = r.str(section, "kind");
  if (kind == "constant") {
    return make_constant_field(
        domain, square_from_list(r.list(section, "matrix"), domain.dim, section));
  }
  std::optional<double> period;
  if (r.has(section, "period")) period = r.number(section, "period");
  if (kind == "diagonal_trig") {
    return make_diagonal_trig_field(
        domain, vector_from_list(r.list(section, "offset"), domain.dim, section),
        vector_from_list(r.list(section, "cos_coeff"), domain.dim, section),
        vector_from_list(r.list(section, "sin_coeff"), domain.dim, section), period);
  }
  if (kind == "conformal") {
    return make_conformal_field(
        domain, r.number(section, "offset"),
        vector_from_list(r.list(section, "cos_coeff"), domain.dim, section),
        vector_from_list(r.list(section, "sin_coeff"), domain.dim, section), period);
  }
  throw ConfigError(section + ": unknown matrix field kind '" + kind + "'");
}

}  // namespace

ProblemSpec problem_from_config(ConfigReader& r, const std::string& prefix) {
  ProblemSpec p;
  const std::string dk = r.str(prefix, "domain");
  const int dim = static_cast<int>(r.number(prefix, "dim"));
  if (dk == "torus") {
    p.domain = Domain::torus(dim, r.number(prefix, "length"));
  } else if (dk == "euclidean") {
    p.domain = Domain::euclidean(dim);
  } else {
    throw ConfigError(prefix + ".domain: expected torus or euclidean");
  }
  p.beta = r.number(prefix, "beta");
  p.V = potential_from_config(r, p.domain, prefix + ".potential");

  const std::string ksec = prefix + ".kinetic";
  const std::string kkind = r.str(ksec, "kind");
  if (kkind == "quadratic") {
    p.U = KineticEnergy::quadratic(
        dim, square_from_list(r.list(ksec, "mass"), dim, ksec));
  } else if (kkind == "potential") {
    p.U = KineticEnergy::from_potential(
        potential_from_config(r, Domain::euclidean(dim), ksec + ".u"));
  } else {
    throw ConfigError(ksec + ": unknown kinetic kind '" + kkind + "'");
  }

  if (r.has_section(prefix + ".diffusion")) {
    p.D = field_from_config(r, p.domain, prefix + ".diffusion");
  }
  if (r.has_section(prefix + ".effective_a")) {
    p.A = field_from_config(r, p.domain, prefix + ".effective_a");
  }
  if (r.has_section(prefix + ".mass_field")) {
    p.mass = field_from_config(r, p.domain, prefix + ".mass_field");
  }
  if (r.has_section(prefix + ".friction_field")) {
    p.friction = field_from_config(r, p.domain, prefix + ".friction_field");
  }
  p.check_consistent();
  return p;
}

void problem_to_config(const ProblemSpec& p, Config& cfg,
                       const std::string& prefix) {
  cfg.set(prefix, "domain",
          ConfigValue::make_string(p.domain.is_torus() ? "torus" : "euclidean"));
  cfg.set(prefix, "dim", ConfigValue::make_number(p.domain.dim));
  if (p.domain.is_torus()) {
    cfg.set(prefix, "length", ConfigValue::make_number(p.domain.length));
  }
  cfg.set(prefix, "beta", ConfigValue::make_number(p.beta));
  p.V->serialize(cfg, prefix + ".potential");

  const std::string ksec = prefix + ".kinetic";
  if (p.U.is_quadratic()) {
    cfg.set(ksec, "kind", ConfigValue::make_string("quadratic"));
    const Eigen::MatrixXd& m = p.U.mass();
    std::vector<double> flat(m.size());
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) flat[i * m.cols() + j] = m(i, j);
    cfg.set(ksec, "mass", ConfigValue::make_list(std::move(flat)));
  } else {
    cfg.set(ksec, "kind", ConfigValue::make_string("potential"));
    p.U.potential()->serialize(cfg, ksec + ".u");
  }

  if (p.D) p.D->serialize(cfg, prefix + ".diffusion");
  if (p.A) p.A->serialize(cfg, prefix + ".effective_a");
  if (p.mass) p.mass->serialize(cfg, prefix + ".mass_field");
  if (p.friction) p.friction->serialize(cfg, prefix + ".friction_field");
}

}  // namespace kramers
