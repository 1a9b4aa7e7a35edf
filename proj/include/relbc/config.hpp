// Copyright 2026 The relbc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "relbc/channel.hpp"
#include "relbc/protocol.hpp"

namespace relbc {

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trimmed(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

/// Sectioned key/value config text:
///
///   [code]
///   N = 8
///   k = 16
///   [channel]
///   name = rotate
///   theta = 0.3927
///
/// Lines starting with '#' or ';' are comments. Later duplicates overwrite.
struct ConfigFile {
  std::map<std::string, std::map<std::string, std::string>> sections;

  static ConfigFile parse(const std::string& text) {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::string t = detail::trimmed(line);
      if (t.empty() || t[0] == '#' || t[0] == ';') continue;
      if (t.front() == '[') {
        if (t.back() != ']')
          throw config_error("config line " + std::to_string(line_no) + ": unterminated section");
        section = detail::trimmed(t.substr(1, t.size() - 2));
        if (section.empty())
          throw config_error("config line " + std::to_string(line_no) + ": empty section name");
        cfg.sections[section];
        continue;
      }
      std::size_t eq = t.find('=');
      if (eq == std::string::npos)
        throw config_error("config line " + std::to_string(line_no) + ": expected key = value");
      std::string key = detail::trimmed(t.substr(0, eq));
      std::string value = detail::trimmed(t.substr(eq + 1));
      if (key.empty())
        throw config_error("config line " + std::to_string(line_no) + ": empty key");
      if (section.empty())
        throw config_error("config line " + std::to_string(line_no) + ": key outside any section");
      cfg.sections[section][key] = value;
    }
    return cfg;
  }

  static ConfigFile load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

  bool has(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    return s != sections.end() && s->second.count(key) > 0;
  }

  std::string get_str(const std::string& section, const std::string& key,
                      const std::string& fallback) const {
    auto s = sections.find(section);
    if (s == sections.end()) return fallback;
    auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
  }

  std::string require_str(const std::string& section, const std::string& key) const {
    if (!has(section, key)) throw config_error("config: missing " + section + "." + key);
    return sections.at(section).at(key);
  }

  double get_num(const std::string& section, const std::string& key, double fallback) const {
    if (!has(section, key)) return fallback;
    return parse_num(section, key, sections.at(section).at(key));
  }

  double require_num(const std::string& section, const std::string& key) const {
    return parse_num(section, key, require_str(section, key));
  }

  std::uint64_t get_uint(const std::string& section, const std::string& key,
                         std::uint64_t fallback) const {
    if (!has(section, key)) return fallback;
    const std::string& v = sections.at(section).at(key);
    try {
      std::size_t pos = 0;
      std::uint64_t out = std::stoull(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing characters");
      return out;
    } catch (const std::exception&) {
      throw config_error("config: " + section + "." + key + " is not an unsigned integer: " + v);
    }
  }

  bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string& v = sections.at(section).at(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw config_error("config: " + section + "." + key + " is not a boolean: " + v);
  }

  /// Sorted single-line rendering; embedded in run records so outputs are
  /// self-describing and reproducible from the record alone.
  std::string canonical() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [section, kv] : sections)
      for (const auto& [key, value] : kv) {
        if (!first) os << ' ';
        os << section << '.' << key << '=' << value;
        first = false;
      }
    return os.str();
  }

 private:
  static double parse_num(const std::string& section, const std::string& key,
                          const std::string& v) {
    try {
      std::size_t pos = 0;
      double out = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing characters");
      return out;
    } catch (const std::exception&) {
      throw config_error("config: " + section + "." + key + " is not a number: " + v);
    }
  }
};

namespace detail {

inline std::vector<double> parse_num_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item = trimmed(item);
    if (item.empty()) continue;
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw config_error("config: bad number '" + item + "' in " + what);
    }
  }
  if (out.empty()) throw config_error("config: empty list for " + what);
  return out;
}

}  // namespace detail

/// Build the channel named in [channel]. Custom channels give explicit mode
/// lists: `modes = lambda shift theta0 theta1 ; ...` where the profile is F
/// shifted by `shift` (orthonormalized in listed order) and the polarization
/// images are e0, e1 rotated by theta0, theta1.
inline ChannelModel make_channel_from_config(const ConfigFile& cfg, const WavepacketSpec& spec,
                                             const TauGrid& grid) {
  std::string name = cfg.get_str("channel", "name", "ideal");
  double d_tau = cfg.get_num("channel", "d_tau", 8.0 * spec.sigma);
  if (name == "ideal") return make_ideal_channel(spec, grid, d_tau);
  if (name == "rotate")
    return make_rotate_channel(spec, grid, cfg.require_num("channel", "theta"),
                               cfg.get_num("channel", "lambda", 1.0), d_tau);
  if (name == "collapse")
    return make_collapse_channel(spec, grid, cfg.get_num("channel", "lambda", 1.0), d_tau);
  if (name == "absorbing") return make_absorbing_channel(spec, grid, d_tau);
  if (name == "jitter") {
    std::vector<double> shifts =
        detail::parse_num_list(cfg.get_str("channel", "shifts", "0, 2.5"), "channel.shifts");
    std::vector<double> lambdas =
        detail::parse_num_list(cfg.get_str("channel", "lambdas", "0.5, 0.3"), "channel.lambdas");
    return make_jitter_channel(spec, grid, shifts, lambdas, d_tau);
  }
  if (name == "custom") {
    ChannelModel model;
    model.name = "custom";
    model.d_tau = d_tau;
    model.input = make_double_hump(spec, grid);
    std::string modes_text = cfg.require_str("channel", "modes");
    std::vector<Amplitude> profiles;
    std::vector<double> weights;
    std::vector<std::pair<double, double>> thetas;
    std::istringstream in(modes_text);
    std::string entry;
    while (std::getline(in, entry, ';')) {
      entry = detail::trimmed(entry);
      if (entry.empty()) continue;
      std::istringstream fields(entry);
      double lambda, shift, th0, th1;
      if (!(fields >> lambda >> shift >> th0 >> th1))
        throw config_error("config: channel.modes entry needs 4 numbers: '" + entry + "'");
      weights.push_back(lambda);
      thetas.emplace_back(th0, th1);
      profiles.push_back(shifted_by_tau(model.input, shift));
    }
    if (profiles.empty()) throw config_error("config: channel.modes has no entries");
    profiles = detail::orthonormalized(std::move(profiles));
    for (std::size_t i = 0; i < profiles.size(); ++i)
      model.modes.push_back({weights[i], profiles[i],
                             {pol_rotated(0, thetas[i].first), pol_rotated(1, thetas[i].second)}});
    return model;
  }
  throw config_error("config: unknown channel name '" + name + "'");
}

/// Assemble a ProtocolConfig from the parsed file. extra_tail widens the grid
/// (needed when delayed states will be pushed past tau0).
inline ProtocolConfig make_protocol_config(const ConfigFile& cfg, double extra_tail = 0.0) {
  ProtocolConfig pc;
  pc.code = BlockCode(static_cast<std::size_t>(cfg.get_num("code", "N", 8)),
                      static_cast<std::size_t>(cfg.get_num("code", "k", 16)));
  pc.spec.sigma = cfg.get_num("wavepacket", "sigma", 1.0);
  pc.spec.tau0 = cfg.get_num("wavepacket", "tau0", 20.0);
  pc.spec.delta_tau = cfg.get_num("wavepacket", "delta_tau", 5.0);
  pc.spec.delta = cfg.get_num("wavepacket", "delta", 1e-6);
  pc.spec.validate();
  TauGrid grid = default_grid(pc.spec, extra_tail);
  pc.channel = make_channel_from_config(cfg, pc.spec, grid);
  pc.d_tau = pc.channel.d_tau;
  pc.seed_a = cfg.get_uint("run", "seed_a", 1);
  pc.seed_b = cfg.get_uint("run", "seed_b", 2);
  pc.permutation_enabled = cfg.get_bool("run", "permutation", true);
  return pc;
}

struct RunSettings {
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
};

inline RunSettings make_run_settings(const ConfigFile& cfg) {
  RunSettings rs;
  rs.trials = static_cast<std::size_t>(cfg.get_uint("run", "trials", 1000));
  rs.seed = cfg.get_uint("run", "seed", 1);
  return rs;
}

}  // namespace relbc
