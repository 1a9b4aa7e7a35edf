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

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relbc/commands.hpp"
#include "relbc/version.hpp"

namespace {

std::optional<std::size_t> opt_size(std::int64_t v) {
  if (v < 0) return std::nullopt;
  return static_cast<std::size_t>(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relbc - relativistic bit-commitment channel simulator"};
  app.set_version_flag("--version", std::string("relbc ") + relbc::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::int64_t trials = -1;
  std::int64_t seed = -1;

  auto* validate = app.add_subcommand("validate", "check a channel config against the protocol");
  validate->add_option("config", config_path, "config file")->required();

  auto* run = app.add_subcommand("run", "honest protocol runs with per-trial CSV output");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--trials", trials, "override [run] trials");
  run->add_option("--seed", seed, "override [run] seed");
  run->add_option("--out", out_path, "CSV output path ('-' for stdout)");

  relbc::AttackOptions attack_opts;
  auto* attack = app.add_subcommand("attack", "simulate a cheating strategy");
  attack->add_option("config", config_path, "config file")->required();
  attack->add_option("--kind", attack_opts.kind, "early | delay | flip")->required();
  attack->add_option("--s", attack_opts.shift, "delay shift in tau units (delay attacks)");
  attack->add_option("--block", attack_opts.target_block, "target block index");
  attack->add_option("--trials", trials, "override [run] trials");
  attack->add_option("--seed", seed, "override [run] seed");
  attack->add_option("--out", out_path, "CSV output path ('-' for stdout)");

  relbc::TableOptions table_opts;
  std::string n_csv, k_csv, p_csv;
  auto* tables = app.add_subcommand("tables", "tabulate the coding formulas as CSV");
  tables->add_option("--family", table_opts.family, "eq22 | eq25 | eq28 | eq34")->required();
  tables->add_option("--N", n_csv, "comma-separated N values");
  tables->add_option("--k", k_csv, "comma-separated k values");
  tables->add_option("--p", p_csv, "comma-separated probabilities");
  tables->add_option("--out", out_path, "CSV output path ('-' for stdout)");

  CLI11_PARSE(app, argc, argv);

  auto opt_seed = [&]() -> std::optional<std::uint64_t> {
    if (seed < 0) return std::nullopt;
    return static_cast<std::uint64_t>(seed);
  };

  try {
    if (validate->parsed())
      return relbc::cmd_validate(config_path, std::cout, std::cerr);
    if (run->parsed())
      return relbc::cmd_run(config_path, opt_size(trials), opt_seed(), out_path, std::cout,
                            std::cerr);
    if (attack->parsed())
      return relbc::cmd_attack(config_path, attack_opts, opt_size(trials), opt_seed(), out_path,
                               std::cout, std::cerr);
    if (tables->parsed()) {
      auto parse_sizes = [](const std::string& text) {
        std::vector<std::size_t> out;
        if (text.empty()) return out;
        for (double v : relbc::detail::parse_num_list(text, "list option"))
          out.push_back(static_cast<std::size_t>(v));
        return out;
      };
      table_opts.n_list = parse_sizes(n_csv);
      table_opts.k_list = parse_sizes(k_csv);
      if (!p_csv.empty()) table_opts.p_list = relbc::detail::parse_num_list(p_csv, "--p");
      return relbc::cmd_tables(table_opts, out_path, std::cout, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return relbc::kExitUsage;
  }
  return relbc::kExitUsage;
}
