#include "jumphk/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <thread>

#include <nlohmann/json.hpp>

namespace jumphk {

namespace {

using ojson = nlohmann::ordered_json;

int resolved_workers(int w) {
  if (w > 0) return w;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

ojson table_json(const DiagTable& t) {
  ojson out;
  out["columns"] = t.columns;
  out["rows"] = t.rows;
  return out;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + p.string() + " for writing");
  os << text;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ValidationOutcome run_validators(const ExperimentConfig& cfg, std::uint64_t digest) {
  const ModelSpec& m = cfg.model;
  const std::uint64_t seed = cfg.mc.seed;

  const EllipticityReport ell = validate_ellipticity(m, 4000, seed);
  const SymmetryReport sym = check_symmetry(m, 2000, seed + 1);
  const MomentReport mom = moment_bounds(m, cfg.mc.lam, 64, seed + 2);
  const SplitReport spl = split_kernel(m, cfg.mc.lam);

  const bool has_jumps = m.kernel.family != KernelFamily::zero;
  ComparabilityReport comp;
  if (has_jumps) comp = comparability_sweep(m, vec0(), {0.25, 0.5, 1.0}, 4000, seed + 3);

  ValidationOutcome out;
  out.structural_pass = ell.pass && sym.pass && mom.converged;
  out.comparability_pass = !has_jumps || comp.pass;

  ojson j;
  j["config_digest"] = digest_hex(digest);
  j["seed"] = seed;
  j["ellipticity"] = {{"pass", ell.pass},
                      {"lambda_declared", ell.lambda_declared},
                      {"lambda_observed", ell.lambda_observed},
                      {"worst_eig_min", ell.worst_eig_min},
                      {"worst_eig_max", ell.worst_eig_max},
                      {"worst_point", std::vector<double>(ell.worst_point.begin(),
                                                          ell.worst_point.begin() + m.dim)},
                      {"n_samples", ell.n_samples}};
  j["symmetry"] = {{"pass", sym.pass},
                   {"max_rel_asym", sym.max_rel_asym},
                   {"worst_x", std::vector<double>(sym.worst_x.begin(),
                                                   sym.worst_x.begin() + m.dim)},
                   {"worst_y", std::vector<double>(sym.worst_y.begin(),
                                                   sym.worst_y.begin() + m.dim)},
                   {"n_pairs", sym.n_pairs}};
  j["moments"] = {{"converged", mom.converged},
                  {"k1", mom.k1},
                  {"k2", mom.k2},
                  {"K_lambda", mom.K_lambda},
                  {"lambda", mom.lambda},
                  {"quadrature_error", mom.quadrature_error}};
  j["split"] = {{"lambda", spl.lam},
                {"tail_rate_sup", spl.N_sup},
                {"has_big_jumps", spl.has_big},
                {"tail_constant", spl.tail_constant}};
  if (has_jumps) {
    j["comparability"] = {{"pass", comp.pass},
                          {"all_finite", comp.all_finite},
                          {"radii", comp.radii},
                          {"k_r", comp.k_r},
                          {"kappa_fit", comp.kappa_fit},
                          {"beta_fit", comp.beta_fit},
                          {"fit_residual", comp.fit_residual}};
  } else {
    j["comparability"] = {{"pass", true}, {"vacuous", true}};
  }
  j["pass"] = out.structural_pass && out.comparability_pass;
  out.report_json = j.dump(2) + "\n";
  return out;
}

ClaimCheck run_claim(const ExperimentConfig& cfg, const std::string& id) {
  ExperimentConfig c = cfg;
  c.mc.workers = resolved_workers(c.mc.workers);
  if (id == "thm_2_4") return check_upper_bound(c.model, c.grid);
  if (id == "thm_2_5") return check_lower_bound(c.model, c.mc);
  if (id == "thm_2_6") return fit_hoelder(c.model, c.grid, c.mc.seed);
  if (id == "thm_2_7") return check_harnack(c.model, c.grid, c.mc.seed);
  if (id == "prop_3_2") return check_tightness(c.model, c.mc);
  if (id == "prop_3_4") return check_weighted_poincare(c.model, c.grid, c.mc.seed);
  if (id == "prop_4_1a") return check_exit_scaling(c.model, c.mc);
  if (id == "prop_4_1b") return check_hitting(c.model, c.mc);
  if (id == "prop_5_1") return check_levy_system(c.model, c.mc);
  if (id == "prop_6_1") return check_harmonic_comparison(c.model, c.grid, c.mc.seed);
  if (id == "nash") return check_nash(c.model, c.grid, c.mc.seed);
  throw ConfigError("unknown claim id '" + id + "'");
}

std::string claim_report_json(const ClaimCheck& c, std::uint64_t digest, std::uint64_t seed) {
  ojson j;
  j["claim_id"] = c.claim_id;
  j["config_digest"] = digest_hex(digest);
  j["seed"] = seed;
  j["fitted_constants"] = ojson::object();
  for (const auto& kv : c.fitted) j["fitted_constants"][kv.first] = kv.second;
  j["tolerance"] = ojson::object();
  for (const auto& kv : c.tolerances) j["tolerance"][kv.first] = kv.second;
  j["pass"] = c.pass;
  j["diagnostics"] = table_json(c.diagnostics);
  j["notes"] = c.notes;
  return j.dump(2) + "\n";
}

std::string claim_report_csv(const ClaimCheck& c) {
  std::string out;
  for (std::size_t i = 0; i < c.diagnostics.columns.size(); ++i) {
    if (i) out += ",";
    out += c.diagnostics.columns[i];
  }
  out += "\n";
  for (const auto& row : c.diagnostics.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      out += fmt17(row[i]);
    }
    out += "\n";
  }
  return out;
}

int cmd_validate(const std::string& config_text, std::ostream& log) {
  ExperimentConfig cfg;
  std::uint64_t digest = 0;
  try {
    cfg = parse_config(config_text);
    digest = config_digest(config_text);
  } catch (const ConfigError& e) {
    log << e.what() << "\n";
    return kExitConfig;
  }
  ValidationOutcome vo;
  try {
    vo = run_validators(cfg, digest);
  } catch (const std::exception& e) {
    log << "validator error: " << e.what() << "\n";
    return kExitValidator;
  }
  std::filesystem::create_directories(cfg.output_dir);
  write_file(std::filesystem::path(cfg.output_dir) / "validation.json", vo.report_json);
  log << vo.report_json;
  return (vo.structural_pass && vo.comparability_pass) ? kExitOk : kExitValidator;
}

int cmd_run(const std::string& config_text, const std::vector<std::string>& claims_override,
            bool skip_validate, std::ostream& log) {
  ExperimentConfig cfg;
  std::uint64_t digest = 0;
  try {
    cfg = parse_config(config_text);
    digest = config_digest(config_text);
    if (!claims_override.empty()) {
      const auto& known = claim_ids();
      for (const auto& id : claims_override) {
        if (std::find(known.begin(), known.end(), id) == known.end())
          throw ConfigError("config: claims: unknown claim id '" + id + "'");
        if (claim_is_statistical(id) && cfg.mc.n_paths < 1000)
          throw ConfigError("config: mc.n_paths: claim " + id + " needs at least 1000 paths");
      }
      cfg.claims = claims_override;
    }
  } catch (const ConfigError& e) {
    log << e.what() << "\n";
    return kExitConfig;
  }

  std::filesystem::create_directories(cfg.output_dir);
  if (!skip_validate) {
    ValidationOutcome vo;
    try {
      vo = run_validators(cfg, digest);
    } catch (const std::exception& e) {
      log << "validator error: " << e.what() << "\n";
      return kExitValidator;
    }
    write_file(std::filesystem::path(cfg.output_dir) / "validation.json", vo.report_json);
    if (!vo.structural_pass) {
      log << "assumption validators failed; see validation.json\n";
      return kExitValidator;
    }
    if (!vo.comparability_pass)
      log << "note: kernel comparability fails; counterexample claims may rely on this\n";
  }

  bool any_fail = false, any_error = false;
  for (const auto& id : cfg.claims) {
    ClaimCheck c;
    bool errored = false;
    std::string err;
    try {
      c = run_claim(cfg, id);
    } catch (const std::exception& e) {
      errored = true;
      err = e.what();
      c = ClaimCheck{};
      c.claim_id = id;
      c.pass = false;
      c.notes.push_back(std::string("estimator error: ") + err);
    }
    write_file(std::filesystem::path(cfg.output_dir) / (id + ".json"),
               claim_report_json(c, digest, cfg.mc.seed));
    write_file(std::filesystem::path(cfg.output_dir) / (id + ".csv"), claim_report_csv(c));
    any_fail = any_fail || !c.pass;
    any_error = any_error || errored;

    char line[256];
    std::string consts;
    int shown = 0;
    for (const auto& kv : c.fitted) {
      if (shown++ == 3) break;
      consts += kv.first + "=" + fmt17(kv.second) + " ";
    }
    std::snprintf(line, sizeof(line), "%-10s  %s  %s", id.c_str(),
                  errored ? "ERROR" : (c.pass ? "pass " : "FAIL "), consts.c_str());
    log << line << "\n";
    if (errored) log << "  " << err << "\n";
  }
  if (any_error || any_fail) return kExitClaim;
  return kExitOk;
}

int cmd_export_operator(const std::string& config_text, const std::string& out_path,
                        std::ostream& log) {
  ExperimentConfig cfg;
  try {
    cfg = parse_config(config_text);
  } catch (const ConfigError& e) {
    log << e.what() << "\n";
    return kExitConfig;
  }
  std::string text;
  try {
    const DiscreteGenerator gen = DiscreteGenerator::assemble(cfg.model, cfg.grid);
    text = gen.export_text();
  } catch (const std::exception& e) {
    log << "export error: " << e.what() << "\n";
    return kExitClaim;
  }
  if (out_path.empty()) {
    log << text;
  } else {
    std::filesystem::path p(out_path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    write_file(p, text);
    log << "wrote " << out_path << "\n";
  }
  return kExitOk;
}

int cmd_list_claims(std::ostream& os) {
  for (const auto& id : claim_ids()) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-10s  %s", id.c_str(), claim_description(id).c_str());
    os << line << "\n";
  }
  return kExitOk;
}

}  // namespace jumphk
