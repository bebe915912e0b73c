#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "critfield/config.hpp"

namespace critfield {

/// One CSV file: numeric columns, written with 17 significant digits.
struct Table {
  std::string name;  ///< file stem
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  /// Optional per-row seeds, written as an exact integer first column "seed".
  std::vector<std::uint64_t> seeds;
};

/// Everything a command produces.
struct Report {
  std::string command;
  std::vector<Table> tables;
  /// Headline numbers, in the order they are printed.
  std::vector<std::pair<std::string, double>> scalars;
  std::vector<std::string> notes;
  /// False when a run-level check failed; `failure` says which.
  bool ok = true;
  std::string failure;

  void scalar(const std::string& key, double v) { scalars.emplace_back(key, v); }
  double get(const std::string& key) const;
  const Table* table(const std::string& name) const;
};

/// CSV text: "# critfield <command> config_hash=<h>", header, rows.
std::string render_csv(const Table& t, const std::string& command, const std::string& config_hash);

/// Writes every table as <dir>/<name>.csv and a manifest.json holding the
/// config echo, its hash, the scalars, the notes and the git blob hash of each
/// file. Creates the directory if needed. Returns the written paths.
std::vector<std::string> write_report(const Report& report, const ExperimentConfig& cfg, const std::string& dir);

/// Re-hashes the files listed in <dir>/manifest.json and checks the config
/// hash line of each CSV. Returns the problems found (empty when clean).
std::vector<std::string> verify_outputs(const std::string& dir);

/// One-screen plain-text summary.
std::string summarize(const Report& report);

}  // namespace critfield
