#include "jumphk/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

namespace jumphk {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw ConfigError("config: " + where + ": " + what);
}

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!obj.is_object()) bad(where, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) bad(where, "unknown key '" + it.key() + "'");
}

double num(const json& obj, const std::string& where, const std::string& key, double dflt,
           bool required = false) {
  if (!obj.contains(key)) {
    if (required) bad(where, "missing key '" + key + "'");
    return dflt;
  }
  const json& v = obj.at(key);
  if (!v.is_number()) bad(where + "." + key, "expected a number");
  return v.get<double>();
}

std::string str(const json& obj, const std::string& where, const std::string& key,
                const std::string& dflt, bool required = false) {
  if (!obj.contains(key)) {
    if (required) bad(where, "missing key '" + key + "'");
    return dflt;
  }
  const json& v = obj.at(key);
  if (!v.is_string()) bad(where + "." + key, "expected a string");
  return v.get<std::string>();
}

CoeffSpec parse_coeff(const json& j, int dim) {
  require_keys(j, "model.coeff", {"family", "params", "lambda"});
  CoeffSpec c;
  const std::string fam = str(j, "model.coeff", "family", "", true);
  try {
    c.family = coeff_family_from_string(fam);
  } catch (const std::exception& e) {
    bad("model.coeff.family", e.what());
  }
  c.lambda = num(j, "model.coeff", "lambda", 1.0);
  if (j.contains("params")) {
    if (!j.at("params").is_array()) bad("model.coeff.params", "expected an array of numbers");
    for (const auto& v : j.at("params")) {
      if (!v.is_number()) bad("model.coeff.params", "expected an array of numbers");
      c.params.push_back(v.get<double>());
    }
  } else {
    // identity diffusion by default
    c.params = (dim == 1) ? std::vector<double>{1.0} : std::vector<double>{1.0, 0.0, 1.0};
  }
  return c;
}

KernelSpec parse_kernel(const json& j) {
  require_keys(j, "model.kernel",
               {"family", "alpha", "beta_idx", "trunc_radius", "c_lo", "c_hi", "asym_perturb"});
  KernelSpec k;
  const std::string fam = str(j, "model.kernel", "family", "", true);
  try {
    k.family = kernel_family_from_string(fam);
  } catch (const std::exception& e) {
    bad("model.kernel.family", e.what());
  }
  k.alpha = num(j, "model.kernel", "alpha", k.alpha);
  k.beta_idx = num(j, "model.kernel", "beta_idx",
                   std::max(k.alpha, std::min(2.0 * k.alpha, 1.9)));
  k.trunc_radius = num(j, "model.kernel", "trunc_radius", k.trunc_radius);
  k.c_lo = num(j, "model.kernel", "c_lo", k.c_lo);
  k.c_hi = num(j, "model.kernel", "c_hi", k.c_hi);
  k.asym_perturb = num(j, "model.kernel", "asym_perturb", 0.0);
  return k;
}

ModelSpec parse_model(const json& j) {
  require_keys(j, "model", {"dim", "coeff", "kernel"});
  ModelSpec m;
  const double dim = num(j, "model", "dim", 1.0, true);
  if (dim != 1.0 && dim != 2.0) bad("model.dim", "must be 1 or 2");
  m.dim = static_cast<int>(dim);
  if (!j.contains("coeff")) bad("model", "missing key 'coeff'");
  m.coeff = parse_coeff(j.at("coeff"), m.dim);
  if (j.contains("kernel")) m.kernel = parse_kernel(j.at("kernel"));
  try {
    m.validate();
  } catch (const std::exception& e) {
    bad("model", e.what());
  }
  return m;
}

GridSpec parse_grid(const json& j) {
  require_keys(j, "grid", {"extent", "h", "boundary", "node_cap"});
  GridSpec g;
  g.extent = num(j, "grid", "extent", g.extent);
  g.h = num(j, "grid", "h", g.h);
  if (!(g.extent > 0) || !(g.h > 0)) bad("grid", "extent and h must be positive");
  if (g.h > g.extent) bad("grid.h", "coarser than the box");
  const std::string b = str(j, "grid", "boundary", "periodic");
  try {
    g.boundary = boundary_mode_from_string(b);
  } catch (const std::exception& e) {
    bad("grid.boundary", e.what());
  }
  const double cap = num(j, "grid", "node_cap", static_cast<double>(g.node_cap));
  if (cap < 1 || cap != std::floor(cap)) bad("grid.node_cap", "must be a positive integer");
  g.node_cap = static_cast<int>(cap);
  return g;
}

McParams parse_mc(const json& j) {
  require_keys(j, "mc", {"n_paths", "dt", "horizon", "lambda", "delta"});
  McParams mc;
  const double np = num(j, "mc", "n_paths", static_cast<double>(mc.n_paths));
  if (np < 1 || np != std::floor(np)) bad("mc.n_paths", "must be a positive integer");
  mc.n_paths = static_cast<int>(np);
  mc.dt = num(j, "mc", "dt", mc.dt);
  if (!(mc.dt > 0)) bad("mc.dt", "must be positive");
  mc.horizon = num(j, "mc", "horizon", mc.horizon);
  if (!(mc.horizon > 0)) bad("mc.horizon", "must be positive");
  mc.lam = num(j, "mc", "lambda", mc.lam);
  if (!(mc.lam > 0) || mc.lam > 1.0) bad("mc.lambda", "must lie in (0, 1]");
  if (j.contains("delta")) {
    // delta is derived, not free; accept an explicit value only when consistent
    const double d = num(j, "mc", "delta", 0.0);
    const double want = mc.lam / 64.0;
    if (!(std::abs(d - want) <= 1e-12 * want))
      bad("mc.delta", "must equal lambda/64 (the sampler derives it)");
  }
  return mc;
}

}  // namespace

bool claim_is_statistical(const std::string& id) {
  return id == "thm_2_5" || id == "prop_3_2" || id == "prop_4_1a" || id == "prop_4_1b" ||
         id == "prop_5_1";
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  require_keys(j, "top level",
               {"version", "model", "grid", "mc", "claims", "seed", "workers", "output_dir"});
  const double ver = num(j, "top level", "version", 0.0, true);
  if (ver != 1.0) bad("version", "expected schema version 1");
  if (!j.contains("model")) bad("top level", "missing key 'model'");

  ExperimentConfig cfg;
  cfg.model = parse_model(j.at("model"));
  if (j.contains("grid")) cfg.grid = parse_grid(j.at("grid"));
  if (j.contains("mc")) cfg.mc = parse_mc(j.at("mc"));

  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_integer() && !s.is_number_unsigned()) bad("seed", "expected an integer");
    cfg.mc.seed = s.get<std::uint64_t>();
  }
  if (j.contains("workers")) {
    const json& w = j.at("workers");
    if (w.is_string()) {
      if (w.get<std::string>() != "auto") bad("workers", "expected a count or \"auto\"");
      cfg.mc.workers = 0;
    } else if (w.is_number_integer() || w.is_number_unsigned()) {
      const auto v = w.get<std::int64_t>();
      if (v < 0) bad("workers", "must be >= 0 (0 means auto)");
      cfg.mc.workers = static_cast<int>(v);
    } else {
      bad("workers", "expected a count or \"auto\"");
    }
  }
  cfg.output_dir = str(j, "top level", "output_dir", cfg.output_dir);

  if (j.contains("claims")) {
    if (!j.at("claims").is_array()) bad("claims", "expected an array of claim ids");
    for (const auto& v : j.at("claims")) {
      if (!v.is_string()) bad("claims", "expected an array of claim ids");
      cfg.claims.push_back(v.get<std::string>());
    }
  } else {
    cfg.claims = claim_ids();
  }
  const auto& known = claim_ids();
  for (const auto& id : cfg.claims) {
    if (std::find(known.begin(), known.end(), id) == known.end())
      bad("claims", "unknown claim id '" + id + "'");
    if (claim_is_statistical(id) && cfg.mc.n_paths < 1000)
      bad("mc.n_paths", "claim " + id + " needs at least 1000 paths");
  }
  return cfg;
}

std::uint64_t config_digest(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  j.erase("workers");
  j.erase("output_dir");
  const std::string canon = j.dump();  // nlohmann objects iterate key-sorted
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string digest_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

}  // namespace jumphk
