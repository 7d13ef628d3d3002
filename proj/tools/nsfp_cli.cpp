#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nsfp/run.hpp"

namespace {

std::vector<std::string> split_values(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral space-time solver for a regularized time-periodic "
                 "compressible Navier-Stokes-Fourier scheme"};
    app.require_subcommand(1);

    // admissibility
    auto* adm = app.add_subcommand("admissibility",
                                   "exponent window and estimate-chain check");
    double gamma = 5.0 / 3.0;
    std::string case_name = "radiation";
    double a_opt = 0.0;
    std::string adm_out;
    adm->add_option("--gamma", gamma, "adiabatic exponent")->required();
    adm->add_option("--case", case_name, "radiation | no_radiation");
    adm->add_option("--a", a_opt, "Bogovskii exponent (default: window midpoint)");
    adm->add_option("--out", adm_out, "directory for chain_report.jsonl");

    // solve
    auto* solve = app.add_subcommand("solve", "single solve + audits from a config");
    std::string cfg_path, solve_out;
    std::vector<std::string> overrides;
    solve->add_option("--config", cfg_path, "key=value config file")->required();
    solve->add_option("--set", overrides, "override key=value (repeatable)");
    solve->add_option("--out", solve_out, "override outputs.dir");

    // audit
    auto* audit = app.add_subcommand("audit", "re-audit a stored run checkpoint");
    std::string run_dir, audit_out;
    audit->add_option("--run", run_dir, "run directory (config.cfg + checkpoint.nsfp)")
        ->required();
    audit->add_option("--out", audit_out, "output directory (default: run dir)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "cartesian parameter sweep");
    std::string sweep_cfg, sweep_out = "sweep";
    std::vector<std::string> sweep_specs;
    int sweep_cap = 256;
    sweep->add_option("--config", sweep_cfg, "base config file")->required();
    sweep->add_option("--sweep", sweep_specs, "key=v1,v2,... (repeatable)")->required();
    sweep->add_option("--out", sweep_out, "sweep output root");
    sweep->add_option("--cap", sweep_cap, "max number of runs");

    CLI11_PARSE(app, argc, argv);

    try {
        if (adm->parsed()) {
            nsfp::RadiationCase rc;
            if (case_name == "radiation") rc = nsfp::RadiationCase::RADIATION;
            else if (case_name == "no_radiation") rc = nsfp::RadiationCase::NO_RADIATION;
            else {
                std::cerr << "unknown case: " << case_name << "\n";
                return nsfp::EXIT_CONFIG;
            }
            const nsfp::ChainReport rep =
                a_opt > 0.0 ? nsfp::estimate_chain_report(gamma, a_opt, rc)
                            : nsfp::estimate_chain_report(gamma, rc);
            nsfp::print_chain_table(std::cout, rep);
            if (!adm_out.empty()) {
                const std::string dir = nsfp::resolve_output_dir(adm_out);
                std::filesystem::create_directories(dir);
                std::ofstream os(std::filesystem::path(dir) / "chain_report.jsonl");
                nsfp::write_chain_report(os, rep);
            }
            return rep.admissible ? nsfp::EXIT_OK : nsfp::EXIT_ADMISSIBILITY;
        }
        if (solve->parsed()) {
            nsfp::RunConfig cfg = nsfp::parse_config_file(cfg_path);
            for (const auto& kv : overrides) nsfp::apply_override(cfg, kv);
            if (!solve_out.empty()) cfg.output_dir = solve_out;
            return nsfp::run_single(cfg, std::cout);
        }
        if (audit->parsed()) return nsfp::run_audit(run_dir, audit_out, std::cout);
        if (sweep->parsed()) {
            nsfp::RunConfig cfg = nsfp::parse_config_file(sweep_cfg);
            std::vector<std::pair<std::string, std::vector<std::string>>> spec;
            for (const auto& s : sweep_specs) {
                const auto eq = s.find('=');
                if (eq == std::string::npos) {
                    std::cerr << "bad sweep spec: " << s << "\n";
                    return nsfp::EXIT_CONFIG;
                }
                spec.emplace_back(s.substr(0, eq), split_values(s.substr(eq + 1)));
            }
            return nsfp::run_sweep(cfg, spec, sweep_out, std::cout, sweep_cap);
        }
    } catch (const nsfp::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return nsfp::EXIT_CONFIG;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return nsfp::EXIT_CONFIG;
    }
    return nsfp::EXIT_CONFIG;
}
