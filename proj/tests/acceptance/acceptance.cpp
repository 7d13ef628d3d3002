// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit status is nonzero when
// any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nsfp/run.hpp"

using namespace nsfp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int id;
    std::string name;
    bool pass;
    std::string detail;
    double seconds;
};

std::vector<Outcome> g_outcomes;

class Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void record(int id, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
    g_outcomes.push_back({id, name, pass, detail, seconds});
    std::printf("%s criterion %2d: %-28s (%.2fs) %s\n", pass ? "PASS" : "FAIL", id,
                name.c_str(), seconds, detail.c_str());
    std::fflush(stdout);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

// the acceptance solve configuration: gamma = 1.7, defaults, trig forcing
Problem acceptance_problem(double force_amp, int n_t, int n_x) {
    Problem pb;
    pb.constitutive.gamma = 1.7;
    pb.approx = ApproxParams::defaults_for(pb.constitutive);
    pb.approx.N_t = n_t;
    pb.approx.N_x = n_x;
    pb.domain.M0 = pb.domain.volume();
    if (force_amp > 0.0) {
        pb.domain.force.kind = ForcingSpec::Kind::TRIG;
        pb.domain.force.amplitude = force_amp;
    }
    return pb;
}

RunConfig acceptance_config() {
    RunConfig cfg;
    cfg.problem = acceptance_problem(1e-2, 2, 3);
    cfg.controls.tol = 1e-9;
    cfg.controls.lambda_steps = 5;
    return cfg;
}

// ---- criterion 1: admissibility boundary -----------------------------------
void criterion_1() {
    Timer t;
    bool ok = true;
    std::ostringstream d;
    ok &= a_window(23.0 / 15.0, RadiationCase::RADIATION).empty;
    ok &= a_window(23.0 / 15.0 - 1e-6, RadiationCase::RADIATION).empty;
    ok &= !a_window(23.0 / 15.0 + 1e-3, RadiationCase::RADIATION).empty;
    ok &= !a_window(8.0 / 5.0, RadiationCase::NO_RADIATION).admissible;
    ok &= a_window(std::nextafter(8.0 / 5.0, 2.0), RadiationCase::NO_RADIATION).admissible;
    ok &= !a_window(std::nextafter(8.0 / 5.0, 1.0), RadiationCase::NO_RADIATION).admissible;
    const double secs = t.seconds();
    d << "window flips at 23/15 and 8/5";
    ok &= secs < 1.0;
    record(1, "admissibility boundary", ok, d.str(), secs);
}

// ---- criterion 2: quadratic-oracle equivalence ------------------------------
double quadratic(double big_a, double g) {
    return 15.0 * big_a * big_a + big_a * (5.0 - 30.0 * g) + 33.0 * g - 23.0;
}

void criterion_2() {
    Timer t;
    std::mt19937_64 rng(20240817);
    std::uniform_real_distribution<double> u(1.55, 2.0);
    double worst = 0.0;
    bool ok = true;
    for (int i = 0; i < 1000; ++i) {
        const double g = u(rng);
        // independent bisection roots of the convective quadratic
        const double vertex = (30.0 * g - 5.0) / 30.0;
        if (quadratic(vertex, g) >= 0.0) {
            ok = false;
            break;
        }
        auto bisect = [&](double a, double b) {
            for (int k = 0; k < 200; ++k) {
                const double m = 0.5 * (a + b);
                if ((quadratic(a, g) < 0.0) == (quadratic(m, g) < 0.0)) a = m;
                else b = m;
            }
            return 0.5 * (a + b);
        };
        double left = vertex, span = 1.0;
        while (quadratic(left, g) < 0.0) left -= span, span *= 2.0;
        double right = vertex;
        span = 1.0;
        while (quadratic(right, g) < 0.0) right += span, span *= 2.0;
        const double r_lo = bisect(left, vertex), r_hi = bisect(vertex, right);
        const double d_a = discriminant(g);
        worst = std::max(worst, std::abs(g - 1.0 / 6.0 + std::sqrt(d_a) / 30.0 - r_hi));
        worst = std::max(worst, std::abs(g - 1.0 / 6.0 - std::sqrt(d_a) / 30.0 - r_lo));
    }
    const double secs = t.seconds();
    ok = ok && worst <= 1e-10 && secs < 1.0;
    record(2, "quadratic-oracle window", ok, "max root mismatch " + fmt(worst), secs);
}

// ---- criterion 3: Gibbs consistency -----------------------------------------
void criterion_3() {
    Timer t;
    ConstitutiveParams p;
    p.gamma = 1.7;
    p.c_v = 1.0;
    p.a_rad = 1.0;
    std::mt19937_64 rng(7771);
    std::uniform_real_distribution<double> logu(-3.0, 3.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double rho = std::pow(10.0, logu(rng));
        const double theta = std::pow(10.0, logu(rng));
        const double h = 1e-4 * std::min(rho, theta);
        const auto r = gibbs_residual(rho, theta, p, h);
        // tolerance applies relative to the local Gibbs-term magnitudes; the
        // absolute residual is meaningless where e itself reaches 1e15
        const double s_theta = p.c_v + 4.0 * p.a_rad * theta * theta * theta / rho;
        const double s_rho = std::pow(rho, p.gamma - 2.0) +
                             p.a_rad * std::pow(theta, 4) / (rho * rho) +
                             thermo_eval(rho, theta, p).p / (rho * rho);
        worst = std::max(worst, std::abs(r[0]) / std::max(1.0, s_theta));
        worst = std::max(worst, std::abs(r[1]) / std::max(1.0, s_rho));
    }
    const double secs = t.seconds();
    record(3, "Gibbs consistency", worst <= 1e-6 && secs < 1.0,
           "max scaled residual " + fmt(worst), secs);
}

// ---- criterion 4: Kirchhoff roundtrip ----------------------------------------
void criterion_4() {
    Timer t;
    KirchhoffSpec spec; // delta 1e-2, B 6, kappa0 1
    std::mt19937_64 rng(991);
    std::uniform_real_distribution<double> u(-50.0, 20.0);
    double worst = 0.0, worst_lip = 0.0;
    std::vector<std::pair<double, double>> samples;
    for (int i = 0; i < 1000; ++i) {
        const double g = u(rng);
        const double y = phi_eval(g, spec).value;
        worst = std::max(worst, std::abs(phi_inverse(y, spec) - g));
        samples.emplace_back(y, g);
    }
    for (std::size_t i = 1; i < samples.size(); ++i) {
        const auto [y1, g1] = samples[i - 1];
        const auto [y2, g2] = samples[i];
        const double lhs = std::abs(phi_inverse(y1, spec) - phi_inverse(y2, spec));
        worst_lip = std::max(worst_lip, lhs - std::abs(y1 - y2) / spec.delta);
    }
    const double secs = t.seconds();
    record(4, "Kirchhoff roundtrip", worst <= 1e-8 && worst_lip <= 1e-8 && secs < 5.0,
           "max roundtrip err " + fmt(worst), secs);
}

// ---- criterion 5: manufactured solutions -------------------------------------
void criterion_5() {
    Timer t;
    Problem pb = acceptance_problem(0.0, 4, 4);
    const BasesPtr b = build_bases(pb.domain, 4, 4);

    // continuity: rho* = m + 0.1 cos(2 pi t/L) cos(pi x1/l1)
    Nodal rho_target(b->n_nodes());
    for (int it = 0; it < b->n_time_nodes(); ++it)
        for (int isp = 0; isp < b->n_space_nodes(); ++isp)
            rho_target[static_cast<Eigen::Index>(it) * b->n_space_nodes() + isp] =
                1.0 + 0.1 * std::cos(2.0 * M_PI * b->time_nodes()[it] / pb.domain.period_L) *
                          std::cos(M_PI * b->space_node(isp)[0] / pb.domain.box[0]);
    const PeriodicField rho_star = project_scalar(b, rho_target);
    PeriodicField u_adv = PeriodicField::velocity(b);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ur(-0.05, 0.05);
    for (auto& c : u_adv.comp)
        for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = ur(rng);
    const Nodal src = continuity_residual_nodes(rho_star, u_adv, pb);
    const PeriodicField rho = solve_continuity(u_adv, pb, &src);
    const double rho_err = (rho.comp[0] - rho_star.comp[0]).cwiseAbs().maxCoeff() /
                           rho_star.comp[0].norm();

    // temperature: Z* = 0.1 sin(2 pi t/L) cos(pi x1/l1) cos(2 pi x2/l2)
    Nodal z_target(b->n_nodes()), z_src(b->n_nodes());
    const double tau = pb.approx.tau;
    for (int it = 0; it < b->n_time_nodes(); ++it)
        for (int isp = 0; isp < b->n_space_nodes(); ++isp) {
            const double wt = 2.0 * M_PI / pb.domain.period_L;
            const double k1 = M_PI / pb.domain.box[0];
            const double k2 = 2.0 * M_PI / pb.domain.box[1];
            const auto x = b->space_node(isp);
            const double z = 0.1 * std::sin(wt * b->time_nodes()[it]) *
                             std::cos(k1 * x[0]) * std::cos(k2 * x[1]);
            z_target[static_cast<Eigen::Index>(it) * b->n_space_nodes() + isp] = z;
            z_src[static_cast<Eigen::Index>(it) * b->n_space_nodes() + isp] =
                -tau * (-wt * wt * z) + tau * z + (k1 * k1 + k2 * k2) * z;
        }
    PeriodicField rho_const = PeriodicField::scalar(b);
    rho_const.comp[0][0] = std::sqrt(pb.domain.period_L * pb.domain.volume());
    const PeriodicField u0 = PeriodicField::velocity(b);
    const PeriodicField ln_theta0 = PeriodicField::scalar(b);
    const TemperatureSolve te = solve_temperature(rho_const, u0, ln_theta0, pb, 1.0, &z_src);
    const PeriodicField z_proj = project_scalar(b, z_target);
    const double z_err =
        (te.z.comp[0] - z_proj.comp[0]).cwiseAbs().maxCoeff() / z_proj.comp[0].norm();

    const double secs = t.seconds();
    record(5, "manufactured solutions", rho_err <= 1e-8 && z_err <= 1e-8 && secs < 60.0,
           "rho err " + fmt(rho_err) + ", Z err " + fmt(z_err), secs);
}

// ---- criterion 6: trivial fixed point ----------------------------------------
void criterion_6() {
    Timer t;
    const Problem pb = acceptance_problem(0.0, 2, 3);
    SolverControls ctl;
    ctl.tol = 1e-9;
    ctl.lambda_steps = 1;
    const ApproxState st = fixed_point(pb, ctl);
    double max_coeff = 0.0;
    for (int c = 0; c < 3; ++c)
        max_coeff = std::max(max_coeff, st.u.comp[c].cwiseAbs().maxCoeff());
    max_coeff = std::max(max_coeff, st.ln_theta.comp[0].cwiseAbs().maxCoeff());
    const double rho_dev =
        (eval_nodes(st.rho) - pb.domain.mean_density()).abs().maxCoeff();
    const double secs = t.seconds();
    const bool ok = st.converged && st.trace.size() <= 3 && max_coeff <= 1e-9 &&
                    rho_dev <= 1e-9 && secs < 30.0;
    record(6, "trivial fixed point", ok,
           "iters " + std::to_string(st.trace.size()) + ", max coeff " + fmt(max_coeff),
           secs);
}

// ---- criterion 7: converged-state audits --------------------------------------
std::optional<ApproxState> g_state7;
Problem g_problem7 = acceptance_problem(1e-2, 2, 3);

void criterion_7() {
    Timer t;
    SolverControls ctl;
    ctl.tol = 1e-9;
    ctl.lambda_steps = 5;
    const ApproxState st = fixed_point(g_problem7, ctl);
    if (!st.converged) {
        record(7, "converged-state audits", false, "solver did not converge", t.seconds());
        return;
    }
    const BalanceReport rep = balance_audit(st, g_problem7);
    g_state7 = st;
    const double secs = t.seconds();
    const bool ok = rep.mass_err <= 1e-9 * g_problem7.domain.M0 &&
                    rep.entropy.sign_min >= -1e-9 * rep.entropy.sign_scale &&
                    rep.energy.residual_rel <= 1e-6 && rep.entropy.direction_ok &&
                    secs < 600.0;
    record(7, "converged-state audits", ok,
           "mass " + fmt(rep.mass_err) + ", energy rel " + fmt(rep.energy.residual_rel) +
               ", sigma min " + fmt(rep.entropy.sign_min) + ", direction margin " +
               fmt(rep.entropy.direction_margin),
           secs);
}

// ---- criterion 8: Bogovskii consistency ----------------------------------------
void criterion_8() {
    Timer t;
    bool ok = true;
    std::ostringstream d;

    // preimage test: f = div(w) for a known velocity-space field
    const BasesPtr b = build_bases(g_problem7.domain, 2, 3);
    PeriodicField w = PeriodicField::velocity(b);
    std::mt19937_64 rng(88);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& c : w.comp)
        for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = u(rng);
    const BogovskiiResult pre = bogovskii_solve(b, eval_nodes_div(w));
    double pre_err = pre.divergence_residual;
    for (int c = 0; c < 3; ++c)
        pre_err = std::max(pre_err, (pre.phi.eval(c) - eval_nodes(w, c)).abs().maxCoeff());
    ok &= pre_err <= 1e-10;
    d << "preimage err " << fmt(pre_err);

    if (g_state7) {
        const double a =
            a_window(g_problem7.constitutive.gamma, RadiationCase::RADIATION).a_chosen;
        const PressureLedger led = pressure_estimate_test(*g_state7, a, g_problem7);
        ok &= led.within_bound;
        d << ", identity raw " << fmt(led.identity_residual_raw) << " vs bound "
          << fmt(std::max(1e-6 * led.scale, led.divergence_residual * led.p_norm));
    } else {
        ok = false;
        d << ", no criterion-7 state";
    }
    const double secs = t.seconds();
    ok &= secs < 120.0;
    record(8, "Bogovskii consistency", ok, d.str(), secs);
}

// ---- criterion 9: refinement trend ---------------------------------------------
void criterion_9() {
    Timer t;
    std::vector<double> residuals;
    std::ostringstream d;
    bool ok = true;
    for (int n_x : {2, 3, 4}) {
        const Problem pb = acceptance_problem(1e-2, 2, n_x);
        SolverControls ctl;
        ctl.tol = 1e-9;
        ctl.lambda_steps = 5;
        const ApproxState st = fixed_point(pb, ctl);
        if (!st.converged) {
            ok = false;
            d << "N_x=" << n_x << " did not converge; ";
            break;
        }
        const BalanceReport rep = balance_audit(st, pb);
        // the renormalized closed form carries the discretization error; the
        // corrected identity is exact by construction at every resolution
        residuals.push_back(rep.energy.closed_residual_rel);
        d << "N_x=" << n_x << ": " << fmt(rep.energy.closed_residual_rel) << " ";
    }
    if (residuals.size() == 3) {
        ok &= residuals[1] <= 1.2 * residuals[0];
        ok &= residuals[2] <= 1.2 * residuals[1];
        ok &= residuals[2] <= residuals[0];
    }
    const double secs = t.seconds();
    ok &= secs < 1800.0;
    record(9, "refinement trend", ok, d.str(), secs);
}

// ---- criterion 10: determinism ---------------------------------------------------
std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void criterion_10() {
    Timer t;
    RunConfig cfg = acceptance_config();
    const fs::path root = fs::temp_directory_path() / "nsfp_acceptance_det";
    fs::remove_all(root);
    std::ostringstream log;
    cfg.output_dir = (root / "a").string();
    const int c1 = run_single(cfg, log);
    cfg.output_dir = (root / "b").string();
    const int c2 = run_single(cfg, log);
    bool ok = c1 == EXIT_OK && c2 == EXIT_OK;
    std::string which = "all identical";
    for (const char* f :
         {"balance_report.jsonl", "metrics.csv", "checkpoint.nsfp", "chain_report.jsonl"}) {
        if (slurp(root / "a" / f) != slurp(root / "b" / f)) {
            ok = false;
            which = std::string("differs: ") + f;
        }
    }
    record(10, "determinism", ok, which, t.seconds());
}

} // namespace

int main() {
    std::printf("acceptance suite\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();

    int failed = 0;
    for (const auto& o : g_outcomes)
        if (!o.pass) ++failed;
    std::printf("%d/%zu criteria passed\n", static_cast<int>(g_outcomes.size()) - failed,
                g_outcomes.size());
    return failed == 0 ? 0 : 1;
}
