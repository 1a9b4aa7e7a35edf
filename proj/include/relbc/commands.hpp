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

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "relbc/attacks.hpp"
#include "relbc/coding.hpp"
#include "relbc/config.hpp"
#include "relbc/protocol.hpp"
#include "relbc/version.hpp"

namespace relbc {

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainFailure = 1;
inline constexpr int kExitUsage = 2;

/// Fixed-format rendering so identical runs are byte-identical.
inline std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline double rate_std_error(double rate, std::size_t trials) {
  if (trials == 0) return 0.0;
  return std::sqrt(std::max(0.0, rate * (1.0 - rate)) / static_cast<double>(trials));
}

/// Self-describing record of one CLI invocation: the config it ran, the
/// master seed, and the analytic-vs-empirical results. Emitted as '#'
/// comments around the CSV body.
struct RunResult {
  std::string name;
  double analytic = 0.0;
  double empirical = 0.0;
  std::size_t trials = 0;
  double std_error = 0.0;
};

struct RunRecord {
  std::string config_snapshot;
  std::uint64_t master_seed = 0;
  std::vector<RunResult> results;
  std::string version = kVersion;

  void write_header(std::ostream& os) const {
    os << "# relbc v" << version << "\n";
    os << "# seed: " << master_seed << "\n";
    os << "# config: " << config_snapshot << "\n";
  }

  void write_summary(std::ostream& os) const {
    for (const RunResult& r : results)
      os << "# result: " << r.name << " analytic=" << fmt_num(r.analytic)
         << " empirical=" << fmt_num(r.empirical) << " trials=" << r.trials
         << " stderr=" << fmt_num(r.std_error) << "\n";
  }
};

/// Relative output paths land in $RELBC_OUT_DIR when it is set.
inline std::filesystem::path resolve_out_path(const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute()) return p;
  if (const char* dir = std::getenv("RELBC_OUT_DIR")) return std::filesystem::path(dir) / p;
  return p;
}

namespace detail {

struct CsvSink {
  std::ofstream file;
  std::ostream* os = nullptr;

  // Binary mode keeps the bytes identical across platforms and runs.
  explicit CsvSink(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      os = &fallback;
      return;
    }
    std::filesystem::path p = resolve_out_path(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    file.open(p, std::ios::binary | std::ios::trunc);
    if (!file) throw config_error("cannot open output file: " + p.string());
    os = &file;
  }

  std::ostream& stream() { return *os; }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// relbc validate

inline int cmd_validate(const std::string& config_path, std::ostream& out, std::ostream& err) {
  ConfigFile cfg;
  try {
    cfg = ConfigFile::load(config_path);
  } catch (const config_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    ProtocolConfig pc = make_protocol_config(cfg);
    ValidationReport report = validate_channel(pc.channel, pc.spec);
    out << "channel: " << pc.channel.name << "\n" << report.to_string();
    out << (report.all_pass() ? "all checks passed\n" : "validation failed\n");
    return report.all_pass() ? kExitOk : kExitDomainFailure;
  } catch (const config_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainFailure;
  }
}

// ---------------------------------------------------------------------------
// relbc run

inline int cmd_run(const std::string& config_path, std::optional<std::size_t> trials_override,
                   std::optional<std::uint64_t> seed_override, const std::string& out_path,
                   std::ostream& out, std::ostream& err) {
  ConfigFile cfg;
  try {
    cfg = ConfigFile::load(config_path);
  } catch (const config_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    ProtocolConfig pc = make_protocol_config(cfg);
    RunSettings rs = make_run_settings(cfg);
    if (trials_override) rs.trials = *trials_override;
    if (seed_override) rs.seed = *seed_override;

    RunRecord record;
    record.config_snapshot = cfg.canonical();
    record.master_seed = rs.seed;

    detail::CsvSink sink(out_path, out);
    record.write_header(sink.stream());
    sink.stream() << "trial,committed_bit,recovered_bit,accepted,n_perp,n_noclick\n";
    HonestRunStats stats = run_honest(
        pc, rs.trials, rs.seed,
        [&](std::size_t t, const ProtocolTranscript& tr, const VerificationReport& r) {
          sink.stream() << t << ',' << tr.committed_bit << ',' << r.recovered_bit << ','
                        << (r.accepted ? 1 : 0) << ',' << r.n_perp << ',' << r.n_noclick << '\n';
        });
    record.results.push_back({"parity_error", stats.analytic_parity_error,
                              stats.empirical_parity_error, stats.trials,
                              rate_std_error(stats.empirical_parity_error, stats.trials)});
    record.results.push_back({"acceptance_rate", 1.0 - stats.analytic_parity_error,
                              stats.acceptance_rate, stats.trials,
                              rate_std_error(stats.acceptance_rate, stats.trials)});
    record.write_summary(sink.stream());
    if (&sink.stream() != &out) record.write_summary(out);
    return kExitOk;
  } catch (const config_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainFailure;
  }
}

// ---------------------------------------------------------------------------
// relbc attack

struct AttackOptions {
  std::string kind;  // early | delay | flip
  double shift = 0.0;
  std::size_t target_block = 0;
};

inline int cmd_attack(const std::string& config_path, const AttackOptions& opts,
                      std::optional<std::size_t> trials_override,
                      std::optional<std::uint64_t> seed_override, const std::string& out_path,
                      std::ostream& out, std::ostream& err) {
  ConfigFile cfg;
  try {
    cfg = ConfigFile::load(config_path);
  } catch (const config_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    if (opts.kind != "early" && opts.kind != "delay" && opts.kind != "flip") {
      err << "error: unknown attack kind '" << opts.kind << "' (want early|delay|flip)\n";
      return kExitUsage;
    }
    double extra_tail = opts.kind == "delay" ? opts.shift : 0.0;
    ProtocolConfig pc = make_protocol_config(cfg, extra_tail);
    RunSettings rs = make_run_settings(cfg);
    if (trials_override) rs.trials = *trials_override;
    if (seed_override) rs.seed = *seed_override;

    RunRecord record;
    record.config_snapshot = cfg.canonical();
    record.master_seed = rs.seed;

    detail::CsvSink sink(out_path, out);
    record.write_header(sink.stream());

    if (opts.kind == "early") {
      sink.stream() << "trial,committed_bit,guessed_parity,correct,bit_errors,n_noclick\n";
      EarlyMeasurementStats stats = run_early_measurement(
          pc, rs.trials, rs.seed, EarlyMeasureOptions{},
          [&](std::size_t t, int committed, int guessed, std::size_t errors, std::size_t noclick) {
            sink.stream() << t << ',' << committed << ',' << guessed << ','
                          << (guessed == committed ? 1 : 0) << ',' << errors << ',' << noclick
                          << '\n';
          });
      record.results.push_back({"parity_success", stats.eq24_bound, stats.parity_success_rate,
                                stats.trials,
                                rate_std_error(stats.parity_success_rate, stats.trials)});
      record.results.push_back({"per_bit_error", 0.25, stats.per_bit_error_rate, stats.total_bits,
                                rate_std_error(stats.per_bit_error_rate, stats.total_bits)});
    } else if (opts.kind == "delay") {
      // Snap the requested delay to the grid so shifted states stay exact.
      double dt = pc.channel.input.grid.dt();
      double shift = std::round(opts.shift / dt) * dt;
      sink.stream() << "trial,committed_bit,announced_bit,detected,n_perp,n_noclick\n";
      DelayAttackStats stats = run_delay_attack(
          pc, DelayAttack{shift, opts.target_block}, rs.trials, rs.seed,
          [&](std::size_t t, int committed, int announced, bool detected, std::size_t n_perp,
              std::size_t n_noclick) {
            sink.stream() << t << ',' << committed << ',' << announced << ',' << (detected ? 1 : 0)
                          << ',' << n_perp << ',' << n_noclick << '\n';
          });
      record.results.push_back({"undetected_rate", stats.predicted_undetected,
                                stats.undetected_rate, stats.trials,
                                rate_std_error(stats.undetected_rate, stats.trials)});
      record.results.push_back({"p_perp", stats.p_perp, stats.p_perp, stats.trials, 0.0});
    } else {
      sink.stream() << "trial,committed_bit,announced_bit,detected,n_perp,n_noclick\n";
      ParityFlipStats stats = run_parity_flip(
          pc, ParityFlipAttack{opts.target_block}, rs.trials, rs.seed,
          [&](std::size_t t, int committed, int announced, bool detected, std::size_t n_perp,
              std::size_t n_noclick) {
            sink.stream() << t << ',' << committed << ',' << announced << ',' << (detected ? 1 : 0)
                          << ',' << n_perp << ',' << n_noclick << '\n';
          });
      record.results.push_back({"detection_rate", stats.predicted_min_detection,
                                stats.detection_rate, stats.trials,
                                rate_std_error(stats.detection_rate, stats.trials)});
    }
    record.write_summary(sink.stream());
    if (&sink.stream() != &out) record.write_summary(out);
    return kExitOk;
  } catch (const config_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainFailure;
  }
}

// ---------------------------------------------------------------------------
// relbc tables

struct TableOptions {
  std::string family;  // eq22 | eq25 | eq28 | eq34
  std::vector<std::size_t> n_list;
  std::vector<std::size_t> k_list;
  std::vector<double> p_list;
};

namespace detail {

/// Brute-force parity-string count: strings of length N*k with weight
/// divisible by k, halved. Feasible up to N*k = 24 or so.
inline std::uint64_t brute_force_parity_strings(std::size_t n_blocks, std::size_t k) {
  const std::size_t n = n_blocks * k;
  std::uint64_t count = 0;
  for (std::uint64_t s = 0; s < (1ULL << n); ++s)
    if (static_cast<std::size_t>(__builtin_popcountll(s)) % k == 0) ++count;
  return count / 2;
}

}  // namespace detail

inline int cmd_tables(const TableOptions& opts, const std::string& out_path, std::ostream& out,
                      std::ostream& err) {
  try {
    TableOptions o = opts;
    detail::CsvSink sink(out_path, out);
    std::ostream& os = sink.stream();
    os << "# relbc v" << kVersion << "\n";
    if (o.family == "eq22") {
      if (o.n_list.empty()) o.n_list = {2, 4, 6, 8};
      if (o.k_list.empty()) o.k_list = {1, 2, 3, 4};
      os << "N,k,exact,trig_form,approx,brute_force\n";
      for (std::size_t n : o.n_list)
        for (std::size_t k : o.k_list) {
          if (n * k > 62) continue;
          ParityStringCount c = count_parity_strings(n, k);
          os << n << ',' << k << ',' << (c.exact ? std::to_string(*c.exact) : std::string()) << ','
             << fmt_num(c.trig_form) << ',' << fmt_num(c.approx) << ',';
          if (n * k <= 20) os << detail::brute_force_parity_strings(n, k);
          os << '\n';
        }
    } else if (o.family == "eq25") {
      if (o.k_list.empty()) o.k_list = {2, 4, 8, 16, 20};
      if (o.p_list.empty()) o.p_list = {0.0, 0.05, 0.1, 0.25};
      os << "k,p,exact,asymptotic\n";
      for (std::size_t k : o.k_list)
        for (double p : o.p_list) {
          BlockError b = block_error(p, k);
          os << k << ',' << fmt_num(p) << ',' << fmt_num(b.exact) << ',' << fmt_num(b.asymptotic)
             << '\n';
        }
    } else if (o.family == "eq28") {
      if (o.n_list.empty()) o.n_list = {2, 4, 8, 16};
      if (o.p_list.empty()) o.p_list = {0.0, 0.01, 0.1, 0.25, 0.5};
      os << "N,p_block,closed_form,direct_sum\n";
      for (std::size_t n : o.n_list)
        for (double p : o.p_list) {
          ParityError pe = parity_error(p, n);
          os << n << ',' << fmt_num(p) << ',' << fmt_num(pe.closed_form) << ','
             << fmt_num(pe.direct_sum) << '\n';
        }
    } else if (o.family == "eq34") {
      if (o.k_list.empty()) o.k_list = {1, 5, 10, 16};
      if (o.p_list.empty()) o.p_list = {0.0, 0.25, 0.5, 0.75, 1.0};
      os << "k,p_perp,cheat_probability\n";
      for (std::size_t k : o.k_list)
        for (double p : o.p_list)
          os << k << ',' << fmt_num(p) << ',' << fmt_num(cheat_probability(p, k)) << '\n';
    } else {
      err << "error: unknown table family '" << o.family << "' (want eq22|eq25|eq28|eq34)\n";
      return kExitUsage;
    }
    return kExitOk;
  } catch (const config_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainFailure;
  }
}

}  // namespace relbc
