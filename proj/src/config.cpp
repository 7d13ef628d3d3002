#include "nsfp/config.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

namespace nsfp {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for " + key + ": '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer value for " + key + ": '" + v + "'");
    }
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value,
             std::map<std::string, bool>& seen) {
    auto& pb = cfg.problem;
    seen[key] = true;
    if (key == "constitutive.gamma") pb.constitutive.gamma = to_double(key, value);
    else if (key == "constitutive.c_v") pb.constitutive.c_v = to_double(key, value);
    else if (key == "constitutive.a_rad") pb.constitutive.a_rad = to_double(key, value);
    else if (key == "constitutive.mu0") pb.constitutive.mu0 = to_double(key, value);
    else if (key == "constitutive.eta0") pb.constitutive.eta0 = to_double(key, value);
    else if (key == "constitutive.kappa0") pb.constitutive.kappa0 = to_double(key, value);
    else if (key == "constitutive.d0") pb.constitutive.d0 = to_double(key, value);
    else if (key == "constitutive.d_variant") {
        if (value == "TEMP_DEPENDENT") pb.constitutive.d_variant = DVariant::TEMP_DEPENDENT;
        else if (value == "TEMP_INDEPENDENT")
            pb.constitutive.d_variant = DVariant::TEMP_INDEPENDENT;
        else throw ConfigError("config: d_variant must be TEMP_DEPENDENT or TEMP_INDEPENDENT");
    } else if (key == "domain.period_L") pb.domain.period_L = to_double(key, value);
    else if (key == "domain.box_l1") pb.domain.box[0] = to_double(key, value);
    else if (key == "domain.box_l2") pb.domain.box[1] = to_double(key, value);
    else if (key == "domain.box_l3") pb.domain.box[2] = to_double(key, value);
    else if (key == "domain.M0") pb.domain.M0 = to_double(key, value);
    else if (key == "domain.theta0") pb.domain.theta0 = to_double(key, value);
    else if (key == "domain.force.kind") {
        if (value == "zero") pb.domain.force.kind = ForcingSpec::Kind::ZERO;
        else if (value == "trig") pb.domain.force.kind = ForcingSpec::Kind::TRIG;
        else throw ConfigError("config: force.kind must be zero or trig");
    } else if (key == "domain.force.amplitude")
        pb.domain.force.amplitude = to_double(key, value);
    else if (key == "approx.N_t") pb.approx.N_t = to_int(key, value);
    else if (key == "approx.N_x") pb.approx.N_x = to_int(key, value);
    else if (key == "approx.tau") pb.approx.tau = to_double(key, value);
    else if (key == "approx.zeta") pb.approx.zeta = to_double(key, value);
    else if (key == "approx.eps") pb.approx.eps = to_double(key, value);
    else if (key == "approx.delta") pb.approx.delta = to_double(key, value);
    else if (key == "approx.Gamma") pb.approx.Gamma = to_double(key, value);
    else if (key == "approx.B") pb.approx.B_exp = to_double(key, value);
    else if (key == "approx.lambda") pb.approx.lambda = to_double(key, value);
    else if (key == "controls.omega") cfg.controls.omega = to_double(key, value);
    else if (key == "controls.tol") cfg.controls.tol = to_double(key, value);
    else if (key == "controls.max_iter") cfg.controls.max_iter = to_int(key, value);
    else if (key == "controls.lambda_steps") cfg.controls.lambda_steps = to_int(key, value);
    else if (key == "outputs.dir") cfg.output_dir = value;
    else if (key == "audit.a_bog") cfg.a_bog = to_double(key, value);
    else if (key == "audit.include_e_delta")
        cfg.include_e_delta = value == "1" || value == "true";
    else throw ConfigError("config: unknown key '" + key + "'");
}

} // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::map<std::string, bool> seen;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) +
                              " is not key=value");
        set_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), seen);
    }
    // gamma-coupled defaults when the keys were not given
    if (!seen.count("approx.Gamma"))
        cfg.problem.approx.Gamma = std::max(2.0 * cfg.problem.constitutive.gamma, 4.0);
    if (!seen.count("approx.zeta")) cfg.problem.approx.zeta = cfg.problem.approx.delta;
    if (!seen.count("approx.eps"))
        cfg.problem.approx.eps = cfg.problem.approx.delta * cfg.problem.approx.delta;
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

void apply_override(RunConfig& cfg, const std::string& key_value) {
    const auto eq = key_value.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override must be key=value: " + key_value);
    std::map<std::string, bool> seen;
    set_key(cfg, trim(key_value.substr(0, eq)), trim(key_value.substr(eq + 1)), seen);
}

void RunConfig::validate() const {
    try {
        problem.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!(controls.omega > 0.0 && controls.omega <= 1.0))
        throw ConfigError("config: controls.omega must be in (0, 1]");
    if (!(controls.tol > 0.0)) throw ConfigError("config: controls.tol must be > 0");
    if (controls.max_iter < 1) throw ConfigError("config: controls.max_iter must be >= 1");
    if (controls.lambda_steps < 1)
        throw ConfigError("config: controls.lambda_steps must be >= 1");
    if (a_bog < 0.0) throw ConfigError("config: audit.a_bog must be >= 0");
}

std::string RunConfig::canonical() const {
    const auto& pb = problem;
    std::map<std::string, std::string> kv;
    kv["constitutive.gamma"] = fmt(pb.constitutive.gamma);
    kv["constitutive.c_v"] = fmt(pb.constitutive.c_v);
    kv["constitutive.a_rad"] = fmt(pb.constitutive.a_rad);
    kv["constitutive.mu0"] = fmt(pb.constitutive.mu0);
    kv["constitutive.eta0"] = fmt(pb.constitutive.eta0);
    kv["constitutive.kappa0"] = fmt(pb.constitutive.kappa0);
    kv["constitutive.d0"] = fmt(pb.constitutive.d0);
    kv["constitutive.d_variant"] =
        pb.constitutive.d_variant == DVariant::TEMP_DEPENDENT ? "TEMP_DEPENDENT"
                                                              : "TEMP_INDEPENDENT";
    kv["domain.period_L"] = fmt(pb.domain.period_L);
    kv["domain.box_l1"] = fmt(pb.domain.box[0]);
    kv["domain.box_l2"] = fmt(pb.domain.box[1]);
    kv["domain.box_l3"] = fmt(pb.domain.box[2]);
    kv["domain.M0"] = fmt(pb.domain.M0);
    kv["domain.theta0"] = fmt(pb.domain.theta0);
    kv["domain.force.kind"] =
        pb.domain.force.kind == ForcingSpec::Kind::ZERO ? "zero" : "trig";
    kv["domain.force.amplitude"] = fmt(pb.domain.force.amplitude);
    kv["approx.N_t"] = std::to_string(pb.approx.N_t);
    kv["approx.N_x"] = std::to_string(pb.approx.N_x);
    kv["approx.tau"] = fmt(pb.approx.tau);
    kv["approx.zeta"] = fmt(pb.approx.zeta);
    kv["approx.eps"] = fmt(pb.approx.eps);
    kv["approx.delta"] = fmt(pb.approx.delta);
    kv["approx.Gamma"] = fmt(pb.approx.Gamma);
    kv["approx.B"] = fmt(pb.approx.B_exp);
    kv["approx.lambda"] = fmt(pb.approx.lambda);
    kv["controls.omega"] = fmt(controls.omega);
    kv["controls.tol"] = fmt(controls.tol);
    kv["controls.max_iter"] = std::to_string(controls.max_iter);
    kv["controls.lambda_steps"] = std::to_string(controls.lambda_steps);
    kv["audit.a_bog"] = fmt(a_bog);
    kv["audit.include_e_delta"] = include_e_delta ? "1" : "0";
    std::ostringstream os;
    for (const auto& [k, v] : kv) os << k << "=" << v << "\n";
    return os.str();
}

std::string RunConfig::hash() const {
    const std::string s = canonical();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace nsfp
