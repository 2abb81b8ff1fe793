#include "memqkd/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <utility>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "memqkd/errors.hpp"

namespace memqkd {
namespace {

struct Preset {
  std::string_view name;
  std::string_view text;
};

constexpr Preset kPresets[] = {
#include "memqkd/presets.inc"
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, std::string_view raw) {
  const std::string s = trim(raw);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("invalid value '" + s + "' for " + key);
  }
  return value;
}

bool parse_bool(const std::string& key, std::string_view raw) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("invalid boolean '" + s + "' for " + key + " (use true or false)");
}

std::vector<double> parse_list(const std::string& key, std::string_view raw) {
  std::vector<double> out;
  const std::string s = trim(raw);
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(parse_number<double>(key, std::string_view(s).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string fmt_double(double v) { return fmt::format("{}", v); }

struct Field {
  std::string_view section;
  std::string_view key;
  std::function<void(ScenarioConfig&, const std::string& name, const std::string& value)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

#define MEMQKD_DOUBLE(sec, member, k)                                                           \
  Field {                                                                                       \
    sec, #k, [](ScenarioConfig& c, const std::string& n, const std::string& v) {                \
      c.member.k = parse_number<double>(n, v);                                                  \
    },                                                                                          \
        [](const ScenarioConfig& c) { return fmt_double(c.member.k); }                          \
  }

#define MEMQKD_INTEGER(sec, member, k, T)                                                       \
  Field {                                                                                       \
    sec, #k, [](ScenarioConfig& c, const std::string& n, const std::string& v) {                \
      c.member.k = parse_number<T>(n, v);                                                       \
    },                                                                                          \
        [](const ScenarioConfig& c) { return fmt::format("{}", c.member.k); }                   \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      MEMQKD_DOUBLE("cavity", cavity, g),
      MEMQKD_DOUBLE("cavity", cavity, kappa),
      MEMQKD_DOUBLE("cavity", cavity, kappa_wg),
      MEMQKD_DOUBLE("cavity", cavity, gamma),
      MEMQKD_DOUBLE("cavity", cavity, delta_c),

      MEMQKD_DOUBLE("noise", noise, eps_leak),
      MEMQKD_DOUBLE("noise", noise, p_mw),
      MEMQKD_DOUBLE("noise", noise, p_scatter_dephase),
      MEMQKD_DOUBLE("noise", noise, f_readout),
      MEMQKD_DOUBLE("noise", noise, f_init),

      MEMQKD_INTEGER("sequence", sequence, n_pi, int),
      MEMQKD_INTEGER("sequence", sequence, n_sub, int),
      MEMQKD_DOUBLE("sequence", sequence, delta_t_ns),
      MEMQKD_DOUBLE("sequence", sequence, pi_time_ns),
      MEMQKD_DOUBLE("sequence", timing, lock_time_s),
      MEMQKD_INTEGER("sequence", timing, cycles_per_lock, std::uint64_t),
      MEMQKD_DOUBLE("sequence", timing, readout_time_s),
      MEMQKD_DOUBLE("sequence", timing, readouts_per_cycle),
      MEMQKD_DOUBLE("sequence", timing, duty_multiplier),

      MEMQKD_DOUBLE("channel", channel, n_m),
      MEMQKD_DOUBLE("channel", channel, eta),
      Field{"channel", "sender_mode",
            [](ScenarioConfig& c, const std::string&, const std::string& v) {
              c.channel.sender_mode = parse_sender_mode(trim(v));
            },
            [](const ScenarioConfig& c) {
              return std::string(sender_mode_name(c.channel.sender_mode));
            }},

      Field{"parties", "mode",
            [](ScenarioConfig& c, const std::string&, const std::string& v) {
              c.parties.mode = parse_session_mode(trim(v));
            },
            [](const ScenarioConfig& c) { return std::string(session_mode_name(c.parties.mode)); }},
      MEMQKD_DOUBLE("parties", parties, basis_bias),

      MEMQKD_INTEGER("run", run, seed, std::uint64_t),
      MEMQKD_INTEGER("run", run, cycles, std::uint64_t),
      MEMQKD_INTEGER("run", run, threads, unsigned),
      Field{"run", "frame_correction",
            [](ScenarioConfig& c, const std::string& n, const std::string& v) {
              c.run.frame_correction = parse_bool(n, v);
            },
            [](const ScenarioConfig& c) {
              return std::string(c.run.frame_correction ? "true" : "false");
            }},
      Field{"run", "sweep_axis",
            [](ScenarioConfig& c, const std::string&, const std::string& v) {
              c.run.sweep_axis = parse_sweep_axis(trim(v));
            },
            [](const ScenarioConfig& c) { return std::string(sweep_axis_name(c.run.sweep_axis)); }},
      Field{"run", "sweep_values",
            [](ScenarioConfig& c, const std::string& n, const std::string& v) {
              c.run.sweep_values = parse_list(n, v);
            },
            [](const ScenarioConfig& c) {
              std::string out;
              for (std::size_t i = 0; i < c.run.sweep_values.size(); ++i) {
                if (i > 0) out += ", ";
                out += fmt_double(c.run.sweep_values[i]);
              }
              return out;
            }},
  };
  return table;
}

#undef MEMQKD_DOUBLE
#undef MEMQKD_INTEGER

const Field* find_field(std::string_view section, std::string_view key) {
  for (const auto& f : fields()) {
    if (f.section == section && f.key == key) return &f;
  }
  return nullptr;
}

}  // namespace

std::string_view sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::None: return "none";
    case SweepAxis::N: return "N";
    case SweepAxis::NM: return "n_m";
  }
  return "?";
}

SweepAxis parse_sweep_axis(std::string_view name) {
  if (name == "none" || name.empty()) return SweepAxis::None;
  if (name == "N" || name == "n") return SweepAxis::N;
  if (name == "n_m" || name == "nm") return SweepAxis::NM;
  throw ConfigError("unknown sweep axis '" + std::string(name) + "' (use N or n_m)");
}

void RunConfig::validate() const {
  if (cycles < 1) throw ConfigError("run.cycles must be >= 1");
  if (threads < 1) throw ConfigError("run.threads must be >= 1");
  for (double v : sweep_values) {
    if (!(v > 0.0)) throw ConfigError("run.sweep_values must all be > 0");
    if (sweep_axis == SweepAxis::N && v != static_cast<double>(static_cast<int>(v))) {
      throw ConfigError("run.sweep_values must be integers when sweeping N");
    }
  }
}

void ScenarioConfig::validate() const {
  cavity.validate();
  noise.validate();
  sequence.validate();
  timing.validate();
  channel.validate();
  if (channel.n_slots != sequence.n_slots) throw ConfigError("channel and sequence disagree on N");
  parties.validate();
  run.validate();
}

SessionOptions ScenarioConfig::session_options() const {
  SessionOptions opt;
  opt.frame_correction = run.frame_correction;
  opt.threads = run.threads;
  opt.timing = timing;
  return opt;
}

ScenarioConfig parse_scenario(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed scenario: ") + e.what());
  }

  ScenarioConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigError("key '" + section + "' outside a section, or empty section [" + section + "]");
    }
    for (const auto& [key, node] : body) {
      const Field* f = find_field(section, key);
      if (f == nullptr) throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
      f->set(cfg, section + "." + key, node.data());
    }
  }
  cfg.sequence.n_slots = cfg.sequence.n_pi * cfg.sequence.n_sub;
  cfg.channel.n_slots = cfg.sequence.n_slots;
  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const ScenarioConfig& config) {
  std::string out;
  std::string_view current;
  for (const auto& f : fields()) {
    if (f.section != current) {
      if (!current.empty()) out += '\n';
      out += fmt::format("[{}]\n", f.section);
      current = f.section;
    }
    out += fmt::format("{} = {}\n", f.key, f.get(config));
  }
  return out;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& p : kPresets) names.emplace_back(p.name);
  return names;
}

std::string_view preset_text(std::string_view name) {
  for (const auto& p : kPresets) {
    if (p.name == name) return p.text;
  }
  std::string known;
  for (const auto& p : kPresets) known += (known.empty() ? "" : ", ") + std::string(p.name);
  throw ConfigError("unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

ScenarioConfig load_preset(std::string_view name) {
  const std::string_view text = preset_text(name);
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  pt::read_ini(in, tree);
  if (!tree.get_child_optional("run.seed")) {
    throw ConfigError("preset '" + std::string(name) + "' does not set [run] seed");
  }
  return parse_scenario(text);
}

}  // namespace memqkd
