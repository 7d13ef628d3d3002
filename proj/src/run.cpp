#include "nsfp/run.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>

#include <json.hpp>

namespace nsfp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string csv_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json window_json(const ExponentWindow& w) {
    json j;
    j["gamma"] = w.gamma;
    j["case"] = to_string(w.rad_case);
    j["a_low"] = w.a_low;
    j["a_high"] = w.a_high;
    j["empty"] = w.empty;
    j["admissible"] = w.admissible;
    j["binding_term"] = to_string(w.binding);
    j["a_chosen"] = w.a_chosen;
    j["out_of_scope"] = w.out_of_scope;
    return j;
}

json balance_json_energy(const EnergyAudit& e) {
    json j;
    j["audit"] = "energy";
    j["tau_z_term"] = e.tau_z_term;
    j["boundary_term"] = e.boundary_term;
    j["pressure_work_delta"] = e.pressure_work_delta;
    j["forcing_work"] = e.forcing_work;
    j["eps_delta_grad"] = e.eps_delta_grad;
    j["ce_pairing"] = e.ce_pairing;
    j["residual_abs"] = e.residual_abs;
    j["residual_rel"] = e.residual_rel;
    j["closed_residual_abs"] = e.closed_residual_abs;
    j["closed_residual_rel"] = e.closed_residual_rel;
    j["viscous_work"] = e.viscous_work;
    j["pressure_work_total"] = e.pressure_work_total;
    j["uuu_residual_rel"] = e.uuu_residual_rel;
    return j;
}

json balance_json_entropy(const EntropyAudit& e) {
    json j;
    j["audit"] = "entropy";
    j["sign_min"] = e.sign_min;
    j["sign_scale"] = e.sign_scale;
    j["identity_lhs"] = e.identity_lhs;
    j["identity_rhs"] = e.identity_rhs;
    j["identity_residual_rel"] = e.identity_residual_rel;
    j["dissipation_lhs"] = e.dissipation_lhs;
    j["boundary_rhs"] = e.boundary_rhs;
    j["direction_ok"] = e.direction_ok;
    j["direction_margin"] = e.direction_margin;
    return j;
}

struct RunMetrics {
    std::vector<std::pair<std::string, double>> rows;
    void add(const std::string& k, double v) { rows.emplace_back(k, v); }
};

void write_metrics_csv(const std::string& path, const std::string& run_id,
                       const RunMetrics& m) {
    std::ofstream os(path);
    os << "run_id,metric,value\n";
    for (const auto& [k, v] : m.rows) os << run_id << "," << k << "," << csv_num(v) << "\n";
}

} // namespace

std::string resolve_output_dir(const std::string& dir) {
    const char* root = std::getenv("NSFP_OUT_ROOT");
    if (root && *root && fs::path(dir).is_relative())
        return (fs::path(root) / dir).string();
    return dir;
}

void write_chain_report(std::ostream& os, const ChainReport& rep) {
    {
        json j = window_json(rep.window);
        j["type"] = "window";
        os << j.dump() << "\n";
    }
    for (const auto& e : rep.entries) {
        json j;
        j["type"] = "entry";
        j["id"] = e.id;
        j["lhs"] = e.lhs;
        j["rhs"] = e.rhs;
        j["strict_ok"] = e.strict_ok;
        j["energy_exponent"] = e.energy_exponent;
        os << j.dump() << "\n";
    }
    json j;
    j["type"] = "summary";
    j["gamma"] = rep.gamma;
    j["a"] = rep.a;
    j["case"] = to_string(rep.rad_case);
    j["p_i"] = rep.p_i;
    j["alpha"] = rep.alpha;
    j["p_i_valid"] = rep.p_i_valid;
    j["beta"] = rep.beta;
    j["admissible"] = rep.admissible;
    os << j.dump() << "\n";
}

void print_chain_table(std::ostream& os, const ChainReport& rep) {
    os << "gamma = " << rep.gamma << "  case = " << to_string(rep.rad_case)
       << "  a = " << rep.a << "\n";
    if (rep.rad_case == RadiationCase::RADIATION)
        os << "window: (1, " << rep.window.a_high << ")"
           << (rep.window.empty ? "  EMPTY" : "") << "  binding = "
           << to_string(rep.window.binding) << "\n";
    else
        os << "fixed a = " << rep.window.a_chosen
           << (rep.window.admissible ? "  admissible" : "  NOT admissible")
           << (rep.window.out_of_scope ? "  (gamma >= 2: outside bounded-d derivation)" : "")
           << "\n";
    os << "p_i = " << rep.p_i << " (valid: " << (rep.p_i_valid ? "yes" : "no")
       << ")  alpha = " << rep.alpha << "  beta = " << rep.beta << "\n";
    os << std::left << std::setw(36) << "inequality" << std::setw(24) << "lhs"
       << std::setw(24) << "rhs" << "ok\n";
    for (const auto& e : rep.entries)
        os << std::left << std::setw(36) << e.id << std::setw(24) << e.lhs
           << std::setw(24) << e.rhs << (e.strict_ok ? "yes" : "NO") << "\n";
    os << "admissible: " << (rep.admissible ? "yes" : "NO") << "\n";
}

namespace {

void write_balance_report(const std::string& path, const BalanceReport& rep,
                          const AprioriReport* apriori, const PressureLedger* pressure,
                          const ApproxState& state) {
    std::ofstream os(path);
    {
        json j;
        j["audit"] = "state";
        j["converged"] = state.converged;
        j["reliable"] = rep.reliable;
        j["regime_ok"] = rep.regime_ok;
        j["lambda"] = state.lambda;
        j["iterations"] = state.trace.size();
        j["min_rho"] = rep.min_rho;
        j["min_theta"] = rep.min_theta;
        j["rho_undershoot"] = rep.rho_undershoot;
        if (!state.failure_reason.empty()) j["failure_reason"] = state.failure_reason;
        os << j.dump() << "\n";
    }
    {
        json j;
        j["audit"] = "mass";
        j["mass_err"] = rep.mass_err;
        os << j.dump() << "\n";
    }
    os << balance_json_energy(rep.energy).dump() << "\n";
    os << balance_json_entropy(rep.entropy).dump() << "\n";
    {
        json j;
        j["audit"] = "galerkin_residuals";
        j["continuity"] = rep.residuals.continuity;
        j["momentum"] = rep.residuals.momentum;
        j["temperature"] = rep.residuals.temperature;
        os << j.dump() << "\n";
    }
    if (apriori) {
        json j;
        j["audit"] = "norms";
        j["a_bog"] = apriori->a_bog;
        for (const auto& [k, v] : apriori->norms) j[k] = v;
        j["theta_L3L9_direct"] = apriori->theta_l3l9_direct;
        j["theta_L3L9_via_32"] = apriori->theta_l3l9_via_32;
        os << j.dump() << "\n";
        for (const auto& c : apriori->chain) {
            json jc;
            jc["audit"] = "chain_ratio";
            jc["id"] = c.id;
            jc["lhs"] = c.lhs;
            jc["rhs"] = c.rhs;
            jc["ratio"] = c.ratio;
            os << jc.dump() << "\n";
        }
    }
    if (pressure) {
        json j;
        j["audit"] = "pressure_test";
        for (const auto& [k, v] : pressure->terms) j["term_" + k] = v;
        j["identity_residual_raw"] = pressure->identity_residual_raw;
        j["identity_residual_inspan"] = pressure->identity_residual_inspan;
        j["divergence_residual"] = pressure->divergence_residual;
        j["p_norm"] = pressure->p_norm;
        j["scale"] = pressure->scale;
        j["positive_lhs"] = pressure->positive_lhs;
        j["rho_a_gamma_integral"] = pressure->rho_a_gamma_integral;
        j["abs_rhs_sum"] = pressure->abs_rhs_sum;
        j["dt_route_mismatch"] = pressure->dt_route_mismatch;
        j["bog_bound_constant"] = pressure->bog_bound_constant;
        j["within_bound"] = pressure->within_bound;
        os << j.dump() << "\n";
    }
}

void write_checkpoint(const std::string& path, const ApproxState& st) {
    std::ofstream os(path, std::ios::binary);
    write_field(os, st.rho);
    write_field(os, st.u);
    write_field(os, st.ln_theta);
    write_field(os, st.z);
}

void write_manifest(const std::string& path, const RunConfig& cfg, int exit_code,
                    double wall_s, const ApproxState* st) {
    json j;
    j["config_hash"] = cfg.hash();
    j["format_version"] = 1;
    j["exit_code"] = exit_code;
    j["wall_time_s"] = wall_s;
    if (st) {
        j["converged"] = st->converged;
        j["iterations"] = st->trace.size();
        j["lambda"] = st->lambda;
        if (!st->failure_reason.empty()) j["failure_reason"] = st->failure_reason;
    }
    std::ofstream os(path);
    os << j.dump(2) << "\n";
}

} // namespace

ApproxState load_checkpoint(const std::string& run_dir, const Problem& problem) {
    std::ifstream is(fs::path(run_dir) / "checkpoint.nsfp", std::ios::binary);
    if (!is) throw ConfigError("audit: cannot open checkpoint in " + run_dir);
    BasesPtr bases = build_bases(problem.domain, problem.approx.N_t, problem.approx.N_x);
    ApproxState st;
    st.bases = bases;
    st.rho = read_field(is, bases);
    st.u = read_field(is, bases);
    st.ln_theta = read_field(is, bases);
    st.z = read_field(is, bases);
    st.converged = true; // a checkpoint is only written for accepted states
    st.lambda = problem.approx.lambda;
    return st;
}

int run_single(const RunConfig& cfg, std::ostream& log) {
    const auto t0 = std::chrono::steady_clock::now();
    auto wall = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    try {
        cfg.validate();
    } catch (const std::exception& e) {
        log << "config error: " << e.what() << "\n";
        return EXIT_CONFIG;
    }

    const std::string out = resolve_output_dir(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) {
        log << "config error: cannot create output dir " << out << "\n";
        return EXIT_CONFIG;
    }
    {
        std::ofstream os(fs::path(out) / "config.cfg");
        os << cfg.canonical();
    }

    // admissibility gate
    const RadiationCase rcase =
        cfg.problem.constitutive.d_variant == DVariant::TEMP_DEPENDENT
            ? RadiationCase::RADIATION
            : RadiationCase::NO_RADIATION;
    const double gamma = cfg.problem.constitutive.gamma;
    const ExponentWindow win = a_window(gamma, rcase);
    const double a_bog = cfg.a_bog > 0.0 ? cfg.a_bog : win.a_chosen;
    const ChainReport chain = estimate_chain_report(gamma, a_bog, rcase);
    {
        std::ofstream os(fs::path(out) / "chain_report.jsonl");
        write_chain_report(os, chain);
    }
    if (!chain.admissible) {
        log << "admissibility failed: gamma = " << gamma << ", case "
            << to_string(rcase) << "\n";
        write_manifest((fs::path(out) / "manifest.json").string(), cfg,
                       EXIT_ADMISSIBILITY, wall(), nullptr);
        return EXIT_ADMISSIBILITY;
    }
    if (!cfg.problem.constitutive.regime_ok())
        log << "note: gamma outside the regime paired with d_variant (flagged)\n";

    // solve
    ApproxState st;
    try {
        st = fixed_point(cfg.problem, cfg.controls);
    } catch (const std::exception& e) {
        log << "solver error: " << e.what() << "\n";
        write_manifest((fs::path(out) / "manifest.json").string(), cfg,
                       EXIT_NO_CONVERGENCE, wall(), nullptr);
        return EXIT_NO_CONVERGENCE;
    }
    if (!st.converged) {
        log << "non-convergence: " << st.failure_reason << "\n";
        const BalanceReport rep = balance_audit(st, cfg.problem);
        write_balance_report((fs::path(out) / "balance_report.jsonl").string(), rep,
                             nullptr, nullptr, st);
        write_manifest((fs::path(out) / "manifest.json").string(), cfg,
                       EXIT_NO_CONVERGENCE, wall(), &st);
        return EXIT_NO_CONVERGENCE;
    }

    // audits
    const BalanceReport rep = balance_audit(st, cfg.problem);
    const AprioriReport apriori = apriori_report(st, cfg.problem, a_bog);
    const PressureLedger pressure = pressure_estimate_test(st, a_bog, cfg.problem);
    write_balance_report((fs::path(out) / "balance_report.jsonl").string(), rep,
                         &apriori, &pressure, st);

    RunMetrics metrics;
    metrics.add("mass_err", rep.mass_err);
    metrics.add("energy_identity_rel", rep.energy.residual_rel);
    metrics.add("energy_identity_closed_rel", rep.energy.closed_residual_rel);
    metrics.add("uuu_residual_rel", rep.energy.uuu_residual_rel);
    metrics.add("entropy_sign_min", rep.entropy.sign_min);
    metrics.add("entropy_identity_rel", rep.entropy.identity_residual_rel);
    metrics.add("entropy_direction_margin", rep.entropy.direction_margin);
    metrics.add("res_continuity", rep.residuals.continuity);
    metrics.add("res_momentum", rep.residuals.momentum);
    metrics.add("res_temperature", rep.residuals.temperature);
    metrics.add("min_rho", rep.min_rho);
    metrics.add("min_theta", rep.min_theta);
    metrics.add("pressure_identity_raw", pressure.identity_residual_raw);
    metrics.add("pressure_divergence_residual", pressure.divergence_residual);
    for (const auto& [k, v] : apriori.norms) metrics.add("norm_" + k, v);
    const std::string run_id = cfg.hash().substr(0, 12);
    write_metrics_csv((fs::path(out) / "metrics.csv").string(), run_id, metrics);

    write_checkpoint((fs::path(out) / "checkpoint.nsfp").string(), st);

    // audit invariants gate
    const bool mass_ok = rep.mass_err <= 1e-9 * cfg.problem.domain.M0;
    const bool sign_ok = rep.entropy.sign_min >= -1e-9 * rep.entropy.sign_scale;
    bool norms_finite = true;
    for (const auto& [k, v] : apriori.norms) norms_finite = norms_finite && std::isfinite(v);
    const int code = (mass_ok && sign_ok && norms_finite) ? EXIT_OK : EXIT_AUDIT_VIOLATION;
    if (code != EXIT_OK)
        log << "audit invariant violation (mass_ok=" << mass_ok << " sign_ok=" << sign_ok
            << " norms_finite=" << norms_finite << ")\n";
    write_manifest((fs::path(out) / "manifest.json").string(), cfg, code, wall(), &st);
    return code;
}

int run_audit(const std::string& run_dir, const std::string& out_dir, std::ostream& log) {
    RunConfig cfg;
    try {
        cfg = parse_config_file((fs::path(run_dir) / "config.cfg").string());
        cfg.validate();
    } catch (const std::exception& e) {
        log << "config error: " << e.what() << "\n";
        return EXIT_CONFIG;
    }
    ApproxState st;
    try {
        st = load_checkpoint(run_dir, cfg.problem);
    } catch (const std::exception& e) {
        log << "audit error: " << e.what() << "\n";
        return EXIT_CONFIG;
    }
    const std::string out = resolve_output_dir(out_dir.empty() ? run_dir : out_dir);
    fs::create_directories(out);

    const RadiationCase rcase =
        cfg.problem.constitutive.d_variant == DVariant::TEMP_DEPENDENT
            ? RadiationCase::RADIATION
            : RadiationCase::NO_RADIATION;
    const ExponentWindow win = a_window(cfg.problem.constitutive.gamma, rcase);
    const double a_bog = cfg.a_bog > 0.0 ? cfg.a_bog : win.a_chosen;

    const BalanceReport rep = balance_audit(st, cfg.problem);
    const AprioriReport apriori = apriori_report(st, cfg.problem, a_bog);
    const PressureLedger pressure = pressure_estimate_test(st, a_bog, cfg.problem);
    write_balance_report((fs::path(out) / "balance_report.jsonl").string(), rep,
                         &apriori, &pressure, st);
    log << "re-audit written to " << out << "\n";

    const bool mass_ok = rep.mass_err <= 1e-9 * cfg.problem.domain.M0;
    const bool sign_ok = rep.entropy.sign_min >= -1e-9 * rep.entropy.sign_scale;
    return (mass_ok && sign_ok) ? EXIT_OK : EXIT_AUDIT_VIOLATION;
}

int run_sweep(const RunConfig& base,
              const std::vector<std::pair<std::string, std::vector<std::string>>>& sweep,
              const std::string& out_root, std::ostream& log, int cap) {
    std::size_t total = 1;
    for (const auto& [k, vals] : sweep) {
        if (vals.empty()) {
            log << "sweep error: empty value list for " << k << "\n";
            return EXIT_CONFIG;
        }
        total *= vals.size();
    }
    if (total == 0 || total > static_cast<std::size_t>(cap)) {
        log << "sweep error: cartesian size " << total << " exceeds cap " << cap << "\n";
        return EXIT_CONFIG;
    }

    const std::string root = resolve_output_dir(out_root);
    fs::create_directories(root);

    json manifest;
    manifest["runs"] = json::array();
    std::ofstream agg(fs::path(root) / "sweep_metrics.csv");
    agg << "run_id,metric,value\n";

    int successes = 0;
    for (std::size_t idx = 0; idx < total; ++idx) {
        RunConfig cfg = base;
        std::size_t rest = idx;
        std::string label;
        for (const auto& [key, vals] : sweep) {
            const std::size_t pick = rest % vals.size();
            rest /= vals.size();
            apply_override(cfg, key + "=" + vals[pick]);
            label += (label.empty() ? "" : " ") + key + "=" + vals[pick];
        }
        char dir_name[32];
        std::snprintf(dir_name, sizeof(dir_name), "run_%03zu", idx);
        cfg.output_dir = (fs::path(root) / dir_name).string();
        log << dir_name << ": " << label << "\n";
        int code;
        try {
            code = run_single(cfg, log);
        } catch (const std::exception& e) {
            log << dir_name << " failed: " << e.what() << "\n";
            code = EXIT_CONFIG;
        }
        if (code == EXIT_OK) ++successes;

        json r;
        r["dir"] = dir_name;
        r["overrides"] = label;
        r["exit_code"] = code;
        r["config_hash"] = cfg.hash();
        manifest["runs"].push_back(r);

        const fs::path mpath = fs::path(cfg.output_dir) / "metrics.csv";
        if (fs::exists(mpath)) {
            std::ifstream in(mpath);
            std::string line;
            std::getline(in, line); // header
            while (std::getline(in, line))
                if (!line.empty()) agg << dir_name << line.substr(line.find(',')) << "\n";
        }
    }
    std::ofstream mos(fs::path(root) / "sweep_manifest.json");
    mos << manifest.dump(2) << "\n";
    return successes > 0 ? EXIT_OK : EXIT_SWEEP_ALL_FAILED;
}

} // namespace nsfp
