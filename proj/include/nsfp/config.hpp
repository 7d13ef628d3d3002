#pragma once

#include <map>
#include <string>
#include <vector>

#include "nsfp/solvers.hpp"

namespace nsfp {

/// Full run configuration, parsed from flat key=value text with dotted
/// namespaces (e.g. constitutive.gamma=1.7). Unknown keys are rejected.
struct RunConfig {
    Problem problem;
    SolverControls controls;
    std::string output_dir = "out";
    double a_bog = 0.0;          ///< 0: use the window midpoint
    bool include_e_delta = true; ///< report the modified energy (documented guess)

    void validate() const; ///< throws ConfigError
    /// canonical sorted key=value serialization
    std::string canonical() const;
    /// FNV-1a hash of the canonical form, hex
    std::string hash() const;
};

/// Parse key=value lines ('#' comments, blank lines allowed).
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);
/// Apply "key=value" overrides on top of an existing config.
void apply_override(RunConfig& cfg, const std::string& key_value);

} // namespace nsfp
