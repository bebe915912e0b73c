#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace critfield {

/// Study configuration. The file format is plain text:
///
///   # comment
///   [field]
///   amplitude = gaussian(1)
///   m = 1
///   [study]
///   R = 8, 16, 32
///
/// Every key belongs to a section; unknown sections or keys are rejected and
/// all offending keys are reported at once.
struct ExperimentConfig {
  // [field]
  std::string amplitude = "gaussian(1)";
  int m = 1;
  double eps_trunc = 1e-12;
  long modes = -1;  ///< keep only the first n half-lattice modes; -1 keeps all

  // [study]
  std::vector<double> R = {20};
  std::vector<double> N = {4, 8, 16, 24};
  int trials = 200;
  int streams = 20;
  std::uint64_t seed = 1;
  std::string test_function = "indicator(full)";

  // [finder]
  int grid_n = 0;
  double newton_tol = 1e-10;
  double dedup_tol = 1e-6;
  int max_newton_iter = 50;

  // [kac_rice]
  long n_mc = 200000;
  long n_mc_pair = 100000;
  int quad_nodes = 64;
  std::vector<double> z = {0.5, 1, 2, 4, 10};

  // [blowup]
  std::vector<double> r = {1e-1, 1e-2, 1e-3};
  int cf_trials = 200;
  int cf_grid = 21;

  // [ample]
  int z_points = 16;
  int jet_order = 2;

  // [output]
  std::string out_dir = "out";

  /// Canonical (section.key, value) listing of every setting, defaults
  /// included, in a fixed order. Numbers use 17 significant digits.
  std::vector<std::pair<std::string, std::string>> echo() const;
  /// First 16 hex digits of the SHA-1 of the canonical echo.
  std::string hash() const;

  /// Assigns one setting by its "section.key" name (values as in the file).
  void set(const std::string& key, const std::string& value);
  /// Range checks; throws ErrorCode::config listing every problem.
  void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// SHA-1 as lowercase hex.
std::string sha1_hex(const std::string& data);
/// Git blob hash: SHA-1 of "blob <size>\0" + content.
std::string git_blob_hash(const std::string& content);

}  // namespace critfield
