#include "critfield/output.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "critfield/types.hpp"

namespace critfield {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read '" + p.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + p.string() + "'");
  out << content;
  if (!out) throw Error(ErrorCode::io, "write failed for '" + p.string() + "'");
}

std::string cell(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string header_line(const std::string& command, const std::string& hash) {
  return "# critfield " + command + " config_hash=" + hash;
}

}  // namespace

double Report::get(const std::string& key) const {
  for (const auto& [k, v] : scalars)
    if (k == key) return v;
  return std::numeric_limits<double>::quiet_NaN();
}

const Table* Report::table(const std::string& name) const {
  for (const auto& t : tables)
    if (t.name == name) return &t;
  return nullptr;
}

std::string render_csv(const Table& t, const std::string& command, const std::string& config_hash) {
  const bool with_seed = !t.seeds.empty();
  if (with_seed && t.seeds.size() != t.rows.size())
    throw Error(ErrorCode::invalid_argument, "table '" + t.name + "': seed count does not match rows");
  std::string s = header_line(command, config_hash) + "\n";
  if (with_seed) s += "seed";
  for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i || with_seed ? "," : "") + t.columns[i];
  s += "\n";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (with_seed) s += std::to_string(t.seeds[r]);
    for (std::size_t i = 0; i < row.size(); ++i) s += (i || with_seed ? "," : "") + cell(row[i]);
    s += "\n";
  }
  return s;
}

std::vector<std::string> write_report(const Report& report, const ExperimentConfig& cfg, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create output directory '" + dir + "': " + ec.message());
  const std::string hash = cfg.hash();
  std::vector<std::string> written;

  ordered_json files = ordered_json::array();
  for (const auto& t : report.tables) {
    const std::string text = render_csv(t, report.command, hash);
    const fs::path p = fs::path(dir) / (t.name + ".csv");
    write_file(p, text);
    written.push_back(p.string());
    files.push_back({{"name", t.name + ".csv"}, {"rows", t.rows.size()}, {"git_blob_sha1", git_blob_hash(text)}});
  }

  ordered_json config = ordered_json::object();
  for (const auto& [k, v] : cfg.echo())
    if (k != "output.dir") config[k] = v;
  ordered_json scalars = ordered_json::object();
  for (const auto& [k, v] : report.scalars) {
    if (std::isfinite(v))
      scalars[k] = v;
    else
      scalars[k] = cell(v);
  }
  ordered_json manifest = {
      {"tool", "critfield"},
      {"command", report.command},
      {"config_hash", hash},
      {"seed", cfg.seed},
      {"config", config},
      {"ok", report.ok},
      {"failure", report.failure},
      {"scalars", scalars},
      {"notes", report.notes},
      {"files", files},
  };
  const fs::path mp = fs::path(dir) / "manifest.json";
  write_file(mp, manifest.dump(2) + "\n");
  written.push_back(mp.string());
  return written;
}

std::vector<std::string> verify_outputs(const std::string& dir) {
  std::vector<std::string> problems;
  ordered_json manifest;
  try {
    manifest = ordered_json::parse(read_file(fs::path(dir) / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    return {"manifest.json is not valid JSON: " + std::string(e.what())};
  } catch (const Error& e) {
    return {e.what()};
  }
  const std::string hash = manifest.value("config_hash", "");
  const std::string command = manifest.value("command", "");
  if (hash.empty()) problems.push_back("manifest.json has no config_hash");
  for (const auto& f : manifest.value("files", ordered_json::array())) {
    const std::string name = f.value("name", "");
    std::string text;
    try {
      text = read_file(fs::path(dir) / name);
    } catch (const Error& e) {
      problems.push_back(e.what());
      continue;
    }
    if (git_blob_hash(text) != f.value("git_blob_sha1", ""))
      problems.push_back(name + ": content hash mismatch");
    const std::string first = text.substr(0, text.find('\n'));
    if (first != header_line(command, hash)) problems.push_back(name + ": config hash line does not match manifest");
  }
  return problems;
}

std::string summarize(const Report& report) {
  std::ostringstream os;
  os << "critfield " << report.command << (report.ok ? "" : "  [FAILED]") << "\n";
  std::size_t width = 0;
  for (const auto& [k, v] : report.scalars) width = std::max(width, k.size());
  for (const auto& [k, v] : report.scalars) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    os << "  " << k << std::string(width - k.size(), ' ') << "  " << buf << "\n";
  }
  for (const auto& n : report.notes) os << "  note: " << n << "\n";
  if (!report.ok) os << "  failure: " << report.failure << "\n";
  return os.str();
}

}  // namespace critfield
