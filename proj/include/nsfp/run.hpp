#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "nsfp/auditors.hpp"
#include "nsfp/config.hpp"

namespace nsfp {

/// Exit codes of the drivers.
enum ExitCode {
    EXIT_OK = 0,
    EXIT_CONFIG = 1,
    EXIT_ADMISSIBILITY = 2,
    EXIT_NO_CONVERGENCE = 3,
    EXIT_AUDIT_VIOLATION = 4,
    EXIT_SWEEP_ALL_FAILED = 5,
};

/// admissibility check -> solve -> audits; artifacts under cfg.output_dir:
/// config.cfg, chain_report.jsonl, balance_report.jsonl, metrics.csv,
/// checkpoint.nsfp, manifest.json. Returns the exit code.
int run_single(const RunConfig& cfg, std::ostream& log);

/// Cartesian sweep over (key, values) lists; one run_### directory per run,
/// aggregated sweep_metrics.csv and sweep_manifest.json at the root.
/// Exit 0 when at least one run succeeds, EXIT_SWEEP_ALL_FAILED otherwise.
int run_sweep(const RunConfig& base,
              const std::vector<std::pair<std::string, std::vector<std::string>>>& sweep,
              const std::string& out_root, std::ostream& log, int cap = 256);

/// Re-audit a stored run directory (config.cfg + checkpoint.nsfp) into out_dir.
int run_audit(const std::string& run_dir, const std::string& out_dir, std::ostream& log);

/// Load the state checkpoint of a run directory.
ApproxState load_checkpoint(const std::string& run_dir, const Problem& problem);

/// Resolve the output directory against the NSFP_OUT_ROOT environment root.
std::string resolve_output_dir(const std::string& dir);

/// Emit the admissibility chain report as JSON-lines / human table.
void write_chain_report(std::ostream& os, const ChainReport& rep);
void print_chain_table(std::ostream& os, const ChainReport& rep);

} // namespace nsfp
