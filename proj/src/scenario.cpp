#include "semcrra/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "semcrra/errors.hpp"
#include "semcrra/fitting.hpp"

namespace semcrra {

namespace {

namespace pt = boost::property_tree;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

struct UnitEntry {
  std::string_view name;
  double scale;
  bool decibel;  // value is 10 log10(x / scale)
};

const std::vector<UnitEntry>& units_for(Quantity kind) {
  static const std::map<Quantity, std::vector<UnitEntry>> table{
      {Quantity::bandwidth, {{"hz", 1, false}, {"khz", 1e3, false}, {"mhz", 1e6, false}, {"ghz", 1e9, false}}},
      {Quantity::power, {{"w", 1, false}, {"mw", 1e-3, false}, {"uw", 1e-6, false}, {"dbm", 1e-3, true},
                         {"dbw", 1, true}}},
      {Quantity::psd, {{"w/hz", 1, false}, {"mw/hz", 1e-3, false}, {"dbm/hz", 1e-3, true}, {"dbw/hz", 1, true}}},
      {Quantity::data, {{"bit", 1, false}, {"bits", 1, false}, {"kbit", 1e3, false}, {"mbit", 1e6, false},
                        {"gbit", 1e9, false}, {"b", 8, false}, {"kb", 8e3, false}, {"mb", 8e6, false},
                        {"gb", 8e9, false}}},
      {Quantity::time, {{"s", 1, false}, {"ms", 1e-3, false}, {"us", 1e-6, false}}},
      {Quantity::length, {{"m", 1, false}, {"km", 1e3, false}}},
      {Quantity::plain, {}},
  };
  return table.at(kind);
}

double parse_number(std::string_view tok) {
  double v = 0.0;
  // from_chars has no leading '+' and no unicode minus.
  std::string s(tok);
  if (s.rfind("\xE2\x88\x92", 0) == 0) s.replace(0, 3, "-");
  if (!s.empty() && s.front() == '+') s.erase(0, 1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw DomainError("not a number: '" + std::string(tok) + "'");
  return v;
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      out.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.emplace_back(trim(cur));
  if (out.size() == 1 && out.front().empty()) out.clear();
  return out;
}

// Strips a trailing " ; ..." or " # ..." comment from a value.
std::string strip_comment(std::string_view value) {
  for (std::size_t i = 1; i < value.size(); ++i) {
    if ((value[i] == ';' || value[i] == '#') && std::isspace(static_cast<unsigned char>(value[i - 1]))) {
      return std::string(trim(value.substr(0, i)));
    }
  }
  return std::string(trim(value));
}

// Line of "key =" inside [section] in the raw text, 0 when absent.
int line_of(std::string_view text, const std::string& section, const std::string& key) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::string current;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto t = trim(line);
    if (t.empty() || t.front() == ';' || t.front() == '#') continue;
    if (t.front() == '[') {
      const auto end = t.find(']');
      current = std::string(trim(t.substr(1, end == std::string_view::npos ? t.size() - 1 : end - 1)));
      continue;
    }
    const auto eq = t.find('=');
    if (eq != std::string_view::npos && current == section && trim(t.substr(0, eq)) == key) return n;
  }
  return 0;
}

using Setter = void (*)(ScenarioConfig&, const std::string&, const std::filesystem::path&);

std::size_t parse_count(const std::string& v) {
  const double x = parse_number(v);
  if (!(x >= 0.0) || x != std::floor(x) || x > 1e9) throw DomainError("expected a non-negative integer");
  return static_cast<std::size_t>(x);
}

const std::map<std::string, std::map<std::string, Setter>>& setters() {
  static const std::map<std::string, std::map<std::string, Setter>> table{
      {"network",
       {{"users", [](ScenarioConfig& c, const std::string& v, const auto&) { c.users = parse_count(v); }},
        {"side", [](ScenarioConfig& c, const std::string& v, const auto&) {
           c.side = parse_quantity(v, Quantity::length);
         }},
        {"min_distance", [](ScenarioConfig& c, const std::string& v, const auto&) {
           c.min_distance = parse_quantity(v, Quantity::length);
         }},
        {"seed", [](ScenarioConfig& c, const std::string& v, const auto&) {
           std::uint64_t s = 0;
           const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
           if (ec != std::errc{} || ptr != v.data() + v.size()) throw DomainError("seed must be an unsigned integer");
           c.seed = s;
         }}}},
      {"link",
       {{"d0", [](ScenarioConfig& c, const std::string& v, const auto&) { c.d0 = parse_quantity(v, Quantity::data); }},
        {"t0", [](ScenarioConfig& c, const std::string& v, const auto&) {
           c.t0.clear();
           for (const auto& item : split_list(v)) c.t0.push_back(parse_quantity(item, Quantity::time));
         }},
        {"n0", [](ScenarioConfig& c, const std::string& v, const auto&) { c.n0 = parse_quantity(v, Quantity::psd); }}}},
      {"budgets",
       {{"b_min", [](ScenarioConfig& c, const std::string& v, const auto&) {
           c.budgets.b_min = parse_quantity(v, Quantity::bandwidth);
         }},
        {"b_max", [](ScenarioConfig& c, const std::string& v, const auto&) {
           c.budgets.b_max = parse_quantity(v, Quantity::bandwidth);
         }},
        {"p_min", [](ScenarioConfig& c, const std::string& v, const auto&) {
           c.budgets.p_min = parse_quantity(v, Quantity::power);
         }},
        {"p_max", [](ScenarioConfig& c, const std::string& v, const auto&) {
           c.budgets.p_max = parse_quantity(v, Quantity::power);
         }}}},
      {"channel",
       {{"model", [](ScenarioConfig& c, const std::string& v, const auto&) {
           const auto m = lower(v);
           if (m == "constant") c.delta.kind = DeltaSpec::Kind::constant;
           else if (m == "list") c.delta.kind = DeltaSpec::Kind::list;
           else if (m == "distance") c.delta.kind = DeltaSpec::Kind::distance;
           else throw DomainError("channel model must be constant, list or distance");
         }},
        {"value", [](ScenarioConfig& c, const std::string& v, const auto&) { c.delta.value = parse_number(v); }},
        {"values", [](ScenarioConfig& c, const std::string& v, const auto&) {
           c.delta.values.clear();
           for (const auto& item : split_list(v)) c.delta.values.push_back(parse_number(item));
         }},
        {"c", [](ScenarioConfig& c, const std::string& v, const auto&) { c.delta.c = parse_number(v); }},
        {"kappa", [](ScenarioConfig& c, const std::string& v, const auto&) { c.delta.kappa = parse_number(v); }}}},
      {"accuracy",
       {{"beta", [](ScenarioConfig& c, const std::string& v, const auto&) {
           const auto items = split_list(v);
           if (items.size() != 4) throw DomainError("beta needs four comma-separated numbers");
           for (std::size_t k = 0; k < 4; ++k) c.beta[k] = parse_number(items[k]);
         }},
        {"samples", [](ScenarioConfig& c, const std::string& v, const std::filesystem::path& base) {
           std::filesystem::path p(v);
           c.samples_file = p.is_relative() && !base.empty() ? base / p : p;
         }}}},
      {"compression",
       {{"features", [](ScenarioConfig& c, const std::string& v, const auto&) {
           c.features = static_cast<int>(std::min<std::size_t>(parse_count(v), 1u << 20));
         }},
        {"fcr_fixed_o", [](ScenarioConfig& c, const std::string& v, const auto&) {
           c.fcr_fixed_o = parse_number(v);
         }}}},
      {"sweep",
       {{"bandwidth_from", [](ScenarioConfig& c, const std::string& v, const auto&) {
           c.sweep.bandwidth_lo = parse_quantity(v, Quantity::bandwidth);
         }},
        {"bandwidth_to", [](ScenarioConfig& c, const std::string& v, const auto&) {
           c.sweep.bandwidth_hi = parse_quantity(v, Quantity::bandwidth);
         }},
        {"power_from", [](ScenarioConfig& c, const std::string& v, const auto&) {
           c.sweep.power_lo = parse_quantity(v, Quantity::power);
         }},
        {"power_to", [](ScenarioConfig& c, const std::string& v, const auto&) {
           c.sweep.power_hi = parse_quantity(v, Quantity::power);
         }},
        {"points", [](ScenarioConfig& c, const std::string& v, const auto&) {
           c.sweep.points = static_cast<int>(std::min<std::size_t>(parse_count(v), 100000));
         }}}},
  };
  return table;
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

void require_positive(double v, const char* field) {
  if (!positive(v)) throw ValidationError(field, "must be finite and positive");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double parse_quantity(std::string_view text, Quantity kind) {
  const auto t = trim(text);
  std::size_t split = 0;
  while (split < t.size() && !std::isspace(static_cast<unsigned char>(t[split])) &&
         (std::isdigit(static_cast<unsigned char>(t[split])) || t[split] == '.' || t[split] == '-' ||
          t[split] == '+' || static_cast<unsigned char>(t[split]) >= 0x80 ||
          ((t[split] == 'e' || t[split] == 'E') && split + 1 < t.size() &&
           (std::isdigit(static_cast<unsigned char>(t[split + 1])) || t[split + 1] == '-' || t[split + 1] == '+')))) {
    ++split;
  }
  if (split == 0) throw DomainError("missing number in '" + std::string(t) + "'");
  const double number = parse_number(t.substr(0, split));
  const auto unit = lower(trim(t.substr(split)));
  if (unit.empty()) return number;
  for (const auto& u : units_for(kind)) {
    if (u.name == unit) return u.decibel ? u.scale * std::pow(10.0, number / 10.0) : number * u.scale;
  }
  throw DomainError("unknown unit '" + unit + "'");
}

double watts_per_hz_to_dbm_per_hz(double w) noexcept { return 10.0 * std::log10(w / 1e-3); }

void ScenarioConfig::validate() const {
  if (users < 1) throw ValidationError("network.users", "must be at least 1");
  require_positive(side, "network.side");
  require_positive(min_distance, "network.min_distance");
  require_positive(d0, "link.d0");
  if (t0.empty()) throw ValidationError("link.t0", "needs at least one value");
  if (t0.size() != 1 && t0.size() != users) throw ValidationError("link.t0", "give one value or one per user");
  for (double t : t0) require_positive(t, "link.t0");
  require_positive(n0, "link.n0");
  require_positive(budgets.b_min, "budgets.b_min");
  require_positive(budgets.b_max, "budgets.b_max");
  require_positive(budgets.p_min, "budgets.p_min");
  require_positive(budgets.p_max, "budgets.p_max");
  budgets.check_feasible(users);
  switch (delta.kind) {
    case DeltaSpec::Kind::constant:
      require_positive(delta.value, "channel.value");
      break;
    case DeltaSpec::Kind::list:
      if (delta.values.size() != users) throw ValidationError("channel.values", "needs one value per user");
      for (double v : delta.values) require_positive(v, "channel.values");
      break;
    case DeltaSpec::Kind::distance:
      require_positive(delta.c, "channel.c");
      if (!std::isfinite(delta.kappa) || delta.kappa < 0.0) {
        throw ValidationError("channel.kappa", "must be finite and non-negative");
      }
      break;
  }
  for (double b : beta) {
    if (!std::isfinite(b)) throw ValidationError("accuracy.beta", "must be finite");
  }
  if (features < 2) throw ValidationError("compression.features", "must be at least 2");
  if (!(fcr_fixed_o > 0.0 && fcr_fixed_o < 1.0)) throw ValidationError("compression.fcr_fixed_o", "must lie in (0, 1)");
  require_positive(sweep.bandwidth_lo, "sweep.bandwidth_from");
  require_positive(sweep.power_lo, "sweep.power_from");
  if (!(sweep.bandwidth_hi > sweep.bandwidth_lo)) throw ValidationError("sweep.bandwidth_to", "must exceed bandwidth_from");
  if (!(sweep.power_hi > sweep.power_lo)) throw ValidationError("sweep.power_to", "must exceed power_from");
  if (!std::isfinite(sweep.bandwidth_hi)) throw ValidationError("sweep.bandwidth_to", "must be finite");
  if (!std::isfinite(sweep.power_hi)) throw ValidationError("sweep.power_to", "must be finite");
  if (sweep.points < 2) throw ValidationError("sweep.points", "must be at least 2");
  if (static_cast<double>(users) * budgets.b_min > sweep.bandwidth_lo) {
    throw InfeasibleError("sweep.bandwidth_from is below users * b_min");
  }
  if (static_cast<double>(users) * budgets.p_min > sweep.power_lo) {
    throw InfeasibleError("sweep.power_from is below users * p_min");
  }
}

ScenarioConfig parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.message(), static_cast<int>(e.line()));
  }

  ScenarioConfig config;
  const auto& table = setters();
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) {
      throw ParseError("key '" + section + "' outside any section", line_of(text, "", section));
    }
    const auto sec = table.find(section);
    if (sec == table.end()) {
      throw ParseError("unknown section [" + section + "]", 0);
    }
    for (const auto& [key, value] : body) {
      const int line = line_of(text, section, key);
      const auto setter = sec->second.find(key);
      if (setter == sec->second.end()) throw ParseError("unknown key '" + section + "." + key + "'", line);
      try {
        setter->second(config, strip_comment(value.data()), base_dir);
      } catch (const DomainError& e) {
        throw ParseError(section + "." + key + ": " + e.what(), line);
      }
    }
  }
  config.validate();
  return config;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file " + path.string(), 0);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.parent_path());
}

std::string format_scenario(const ScenarioConfig& c) {
  std::ostringstream out;
  out << "[network]\nusers = " << c.users << "\nside = " << fmt(c.side) << " m\nmin_distance = " << fmt(c.min_distance)
      << " m\nseed = " << c.seed << "\n\n[link]\nd0 = " << fmt(c.d0) << " bit\nt0 = ";
  for (std::size_t i = 0; i < c.t0.size(); ++i) out << (i ? ", " : "") << fmt(c.t0[i]) << " s";
  out << "\nn0 = " << fmt(c.n0) << " W/Hz\n\n[budgets]\nb_min = " << fmt(c.budgets.b_min)
      << " Hz\nb_max = " << fmt(c.budgets.b_max) << " Hz\np_min = " << fmt(c.budgets.p_min)
      << " W\np_max = " << fmt(c.budgets.p_max) << " W\n\n[channel]\n";
  switch (c.delta.kind) {
    case DeltaSpec::Kind::constant:
      out << "model = constant\nvalue = " << fmt(c.delta.value) << "\n";
      break;
    case DeltaSpec::Kind::list:
      out << "model = list\nvalues = ";
      for (std::size_t i = 0; i < c.delta.values.size(); ++i) out << (i ? ", " : "") << fmt(c.delta.values[i]);
      out << "\n";
      break;
    case DeltaSpec::Kind::distance:
      out << "model = distance\nc = " << fmt(c.delta.c) << "\nkappa = " << fmt(c.delta.kappa) << "\n";
      break;
  }
  out << "\n[accuracy]\n";
  if (c.samples_file.empty()) {
    out << "beta = " << fmt(c.beta[0]) << ", " << fmt(c.beta[1]) << ", " << fmt(c.beta[2]) << ", " << fmt(c.beta[3])
        << "\n";
  } else {
    out << "samples = " << c.samples_file.string() << "\n";
  }
  out << "\n[compression]\nfeatures = " << c.features << "\nfcr_fixed_o = " << fmt(c.fcr_fixed_o)
      << "\n\n[sweep]\nbandwidth_from = " << fmt(c.sweep.bandwidth_lo) << " Hz\nbandwidth_to = "
      << fmt(c.sweep.bandwidth_hi) << " Hz\npower_from = " << fmt(c.sweep.power_lo) << " W\npower_to = "
      << fmt(c.sweep.power_hi) << " W\npoints = " << c.sweep.points << "\n";
  return out.str();
}

std::vector<Position> place_users(const ScenarioConfig& config) {
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> coord(-0.5 * config.side, 0.5 * config.side);
  std::vector<Position> out;
  out.reserve(config.users);
  for (std::size_t i = 0; i < config.users; ++i) {
    const double x = coord(rng);
    const double y = coord(rng);
    out.push_back({x, y});
  }
  return out;
}

std::vector<double> resolve_deltas(const ScenarioConfig& config) {
  switch (config.delta.kind) {
    case DeltaSpec::Kind::constant:
      return std::vector<double>(config.users, config.delta.value);
    case DeltaSpec::Kind::list:
      return config.delta.values;
    case DeltaSpec::Kind::distance:
      break;
  }
  std::vector<double> out;
  for (const auto& p : place_users(config)) {
    const double d = std::max(std::hypot(p.x, p.y), config.min_distance);
    out.push_back(config.delta.c * std::pow(d, -0.5 * config.delta.kappa));
  }
  return out;
}

std::vector<UserLink> generate_users(const ScenarioConfig& config) {
  config.validate();
  const auto deltas = resolve_deltas(config);
  const double u = static_cast<double>(config.users);
  std::vector<UserLink> links;
  links.reserve(config.users);
  for (std::size_t i = 0; i < config.users; ++i) {
    links.emplace_back(LinkParams{config.d0, config.t0_of(i), deltas[i], config.n0, config.budgets.b_max / u,
                                  config.budgets.p_max / u});
  }
  return links;
}

AccuracyModel resolve_accuracy_model(const ScenarioConfig& config) {
  if (config.samples_file.empty()) {
    try {
      return AccuracyModel(config.beta);
    } catch (const DomainError& e) {
      throw ValidationError("accuracy.beta", e.what());
    }
  }
  const auto samples = read_samples(config.samples_file);
  FitConfig fit;
  fit.multi_start = true;
  const auto report = fit_accuracy_model(samples, default_fit_init(samples), fit);
  if (!report.in_unit_range) throw ValidationError("accuracy.samples", "fitted curve leaves [0, 1]");
  return report.model;
}

Instance make_instance(const ScenarioConfig& config) {
  auto links = generate_users(config);
  const auto model = resolve_accuracy_model(config);
  Instance inst{std::move(links), std::vector<AccuracyModel>(config.users, model), config.budgets,
                CompressionGrid(config.features)};
  inst.validate();
  return inst;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace semcrra
