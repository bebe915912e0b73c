#include "critfield/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include <openssl/evp.h>

#include "critfield/types.hpp"

namespace critfield {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorCode::config, key + ": expected a number, got '" + v + "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != static_cast<double>(static_cast<long>(d)))
    throw Error(ErrorCode::config, key + ": expected an integer, got '" + v + "'");
  return static_cast<long>(d);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const unsigned long long u = std::stoull(v, &used, 0);
    if (used != v.size() || v.front() == '-') throw std::invalid_argument("bad");
    return u;
  } catch (const std::exception&) {
    throw Error(ErrorCode::config, key + ": expected a nonnegative integer, got '" + v + "'");
  }
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) throw Error(ErrorCode::config, key + ": empty list");
  return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> ExperimentConfig::echo() const {
  return {
      {"field.amplitude", amplitude},
      {"field.m", std::to_string(m)},
      {"field.eps_trunc", fmt(eps_trunc)},
      {"field.modes", modes < 0 ? std::string("all") : std::to_string(modes)},
      {"study.R", fmt_list(R)},
      {"study.N", fmt_list(N)},
      {"study.trials", std::to_string(trials)},
      {"study.streams", std::to_string(streams)},
      {"study.seed", std::to_string(seed)},
      {"study.test_function", test_function},
      {"finder.grid_n", std::to_string(grid_n)},
      {"finder.newton_tol", fmt(newton_tol)},
      {"finder.dedup_tol", fmt(dedup_tol)},
      {"finder.max_newton_iter", std::to_string(max_newton_iter)},
      {"kac_rice.n_mc", std::to_string(n_mc)},
      {"kac_rice.n_mc_pair", std::to_string(n_mc_pair)},
      {"kac_rice.quad_nodes", std::to_string(quad_nodes)},
      {"kac_rice.z", fmt_list(z)},
      {"blowup.r", fmt_list(r)},
      {"blowup.cf_trials", std::to_string(cf_trials)},
      {"blowup.cf_grid", std::to_string(cf_grid)},
      {"ample.z_points", std::to_string(z_points)},
      {"ample.jet_order", std::to_string(jet_order)},
      {"output.dir", out_dir},
  };
}

std::string ExperimentConfig::hash() const {
  std::string canon;
  for (const auto& [k, v] : echo()) {
    if (k == "output.dir") continue;  // where results go does not change them
    canon += k + "=" + v + "\n";
  }
  return sha1_hex(canon).substr(0, 16);
}

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = unquote(trim(raw));
  static const std::map<std::string, std::function<void(ExperimentConfig&, const std::string&, const std::string&)>>
      setters = {
          {"field.amplitude", [](auto& c, auto&, auto& v) { c.amplitude = v; }},
          {"field.m", [](auto& c, auto& k, auto& v) { c.m = static_cast<int>(to_long(k, v)); }},
          {"field.eps_trunc", [](auto& c, auto& k, auto& v) { c.eps_trunc = to_double(k, v); }},
          {"field.modes", [](auto& c, auto& k, auto& v) { c.modes = v == "all" ? -1 : to_long(k, v); }},
          {"study.R", [](auto& c, auto& k, auto& v) { c.R = to_list(k, v); }},
          {"study.N", [](auto& c, auto& k, auto& v) { c.N = to_list(k, v); }},
          {"study.trials", [](auto& c, auto& k, auto& v) { c.trials = static_cast<int>(to_long(k, v)); }},
          {"study.streams", [](auto& c, auto& k, auto& v) { c.streams = static_cast<int>(to_long(k, v)); }},
          {"study.seed", [](auto& c, auto& k, auto& v) { c.seed = to_u64(k, v); }},
          {"study.test_function", [](auto& c, auto&, auto& v) { c.test_function = v; }},
          {"finder.grid_n", [](auto& c, auto& k, auto& v) { c.grid_n = static_cast<int>(to_long(k, v)); }},
          {"finder.newton_tol", [](auto& c, auto& k, auto& v) { c.newton_tol = to_double(k, v); }},
          {"finder.dedup_tol", [](auto& c, auto& k, auto& v) { c.dedup_tol = to_double(k, v); }},
          {"finder.max_newton_iter",
           [](auto& c, auto& k, auto& v) { c.max_newton_iter = static_cast<int>(to_long(k, v)); }},
          {"kac_rice.n_mc", [](auto& c, auto& k, auto& v) { c.n_mc = to_long(k, v); }},
          {"kac_rice.n_mc_pair", [](auto& c, auto& k, auto& v) { c.n_mc_pair = to_long(k, v); }},
          {"kac_rice.quad_nodes", [](auto& c, auto& k, auto& v) { c.quad_nodes = static_cast<int>(to_long(k, v)); }},
          {"kac_rice.z", [](auto& c, auto& k, auto& v) { c.z = to_list(k, v); }},
          {"blowup.r", [](auto& c, auto& k, auto& v) { c.r = to_list(k, v); }},
          {"blowup.cf_trials", [](auto& c, auto& k, auto& v) { c.cf_trials = static_cast<int>(to_long(k, v)); }},
          {"blowup.cf_grid", [](auto& c, auto& k, auto& v) { c.cf_grid = static_cast<int>(to_long(k, v)); }},
          {"ample.z_points", [](auto& c, auto& k, auto& v) { c.z_points = static_cast<int>(to_long(k, v)); }},
          {"ample.jet_order", [](auto& c, auto& k, auto& v) { c.jet_order = static_cast<int>(to_long(k, v)); }},
          {"output.dir", [](auto& c, auto&, auto& v) { c.out_dir = v; }},
      };
  auto it = setters.find(key);
  if (it == setters.end()) throw Error(ErrorCode::config, "unknown key '" + key + "'");
  it->second(*this, key, v);
}

void ExperimentConfig::validate() const {
  std::vector<std::string> problems;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) problems.push_back(msg);
  };
  need(m >= 1 && m <= 3, "field.m must be 1, 2 or 3");
  need(eps_trunc > 0.0 && eps_trunc < 1.0, "field.eps_trunc must lie in (0,1)");
  need(modes >= -1, "field.modes must be 'all' or >= 0");
  for (double v : R) need(v > 0.0, "study.R entries must be positive");
  for (double v : N) need(v >= 1.0 && v == static_cast<double>(static_cast<long>(v)), "study.N entries must be positive integers");
  need(trials >= 2, "study.trials must be >= 2");
  need(streams >= 1, "study.streams must be >= 1");
  need(grid_n >= 0, "finder.grid_n must be >= 0");
  need(newton_tol > 0.0, "finder.newton_tol must be positive");
  need(dedup_tol > 0.0, "finder.dedup_tol must be positive");
  need(max_newton_iter >= 1, "finder.max_newton_iter must be >= 1");
  need(n_mc >= 2 && n_mc_pair >= 2, "kac_rice Monte Carlo sizes must be >= 2");
  need(quad_nodes >= 8, "kac_rice.quad_nodes must be >= 8");
  for (double v : z) need(v != 0.0, "kac_rice.z entries must be nonzero");
  for (double v : r) need(v > 0.0, "blowup.r entries must be positive");
  need(cf_trials >= 2, "blowup.cf_trials must be >= 2");
  need(cf_grid >= 2, "blowup.cf_grid must be >= 2");
  need(z_points >= 1, "ample.z_points must be >= 1");
  need(jet_order == 1 || jet_order == 2, "ample.jet_order must be 1 or 2");
  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw Error(ErrorCode::config, msg);
  }
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::vector<std::string> problems;
  std::string section;
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') {
        problems.push_back(where + "malformed section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      problems.push_back(where + "expected key = value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string full = section.empty() ? key : section + "." + key;
    try {
      cfg.set(full, line.substr(eq + 1));
    } catch (const Error& e) {
      problems.push_back(where + e.what());
    }
  }
  if (!problems.empty()) {
    std::string msg = "configuration errors:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw Error(ErrorCode::config, msg);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string sha1_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha1(), nullptr) != 1)
    throw Error(ErrorCode::io, "SHA-1 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string git_blob_hash(const std::string& content) {
  std::string data = "blob " + std::to_string(content.size());
  data.push_back('\0');
  data += content;
  return sha1_hex(data);
}

}  // namespace critfield
