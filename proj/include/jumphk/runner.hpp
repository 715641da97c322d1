#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "jumphk/config.hpp"

namespace jumphk {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;     // schema violation
inline constexpr int kExitValidator = 3;  // assumption validator failure
inline constexpr int kExitClaim = 4;      // claim failure or estimator error

struct ValidationOutcome {
  bool structural_pass = false;     // ellipticity, symmetry, moment bounds
  bool comparability_pass = false;  // kernel ratio finiteness (vacuous without jumps)
  std::string report_json;
};

// Assumption sweep. Comparability failure does not gate `run`: a model built
// to break that assumption is exactly what the counterexample claims consume.
ValidationOutcome run_validators(const ExperimentConfig& cfg, std::uint64_t digest);

ClaimCheck run_claim(const ExperimentConfig& cfg, const std::string& id);

std::string claim_report_json(const ClaimCheck& c, std::uint64_t digest, std::uint64_t seed);
std::string claim_report_csv(const ClaimCheck& c);

// subcommand bodies shared by the CLI and the bindings; they write report
// files under the config's output_dir and log human-readable lines
int cmd_validate(const std::string& config_text, std::ostream& log);
int cmd_run(const std::string& config_text, const std::vector<std::string>& claims_override,
            bool skip_validate, std::ostream& log);
int cmd_export_operator(const std::string& config_text, const std::string& out_path,
                        std::ostream& log);
int cmd_list_claims(std::ostream& os);

}  // namespace jumphk
