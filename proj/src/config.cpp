#include "peaklab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace peaklab {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError("config: " + where + " must be an object");
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            throw ConfigError("config: unknown key " + where + "." + item.key());
}

const json& require(const json& obj, const std::string& where, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError("config: missing key " + where + "." + key);
    return *it;
}

double get_num(const json& obj, const std::string& where, const char* key) {
    const json& v = require(obj, where, key);
    if (!v.is_number()) throw ConfigError("config: " + where + "." + key + " must be a number");
    return v.get<double>();
}

double get_num_or(const json& obj, const std::string& where, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    return get_num(obj, where, key);
}

long get_int_or(const json& obj, const std::string& where, const char* key, long fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) throw ConfigError("config: " + where + "." + key + " must be an integer");
    return v.get<long>();
}

std::uint64_t get_uint_or(const json& obj, const std::string& where, const char* key, std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
        throw ConfigError("config: " + where + "." + key + " must be a non-negative integer");
    return v.get<std::uint64_t>();
}

std::string get_str(const json& obj, const std::string& where, const char* key) {
    const json& v = require(obj, where, key);
    if (!v.is_string()) throw ConfigError("config: " + where + "." + key + " must be a string");
    return v.get<std::string>();
}

std::vector<double> get_num_array(const json& obj, const std::string& where, const char* key) {
    const json& v = obj.at(key);
    if (!v.is_array()) throw ConfigError("config: " + where + "." + key + " must be an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const json& e : v) {
        if (!e.is_number()) throw ConfigError("config: " + where + "." + key + " must contain numbers only");
        out.push_back(e.get<double>());
    }
    return out;
}

LevyModel parse_model(const json& j) {
    check_keys(j, "model", {"kind", "kappa", "alpha", "xi_max", "rel_tol", "max_depth"});
    const std::string kind = get_str(j, "model", "kind");
    QuadratureSpec quad;
    quad.xi_max = get_num_or(j, "model", "xi_max", quad.xi_max);
    quad.rel_tol = get_num_or(j, "model", "rel_tol", quad.rel_tol);
    quad.max_depth = static_cast<int>(get_int_or(j, "model", "max_depth", quad.max_depth));
    if (kind == "brownian") {
        if (j.contains("alpha")) throw ConfigError("config: model.alpha is not a brownian parameter");
        LevyModel m = LevyModel::brownian(get_num(j, "model", "kappa"));
        m.quad = quad;
        m.validate();
        return m;
    }
    if (kind == "truncated_stable") {
        if (j.contains("kappa")) throw ConfigError("config: model.kappa is not a truncated_stable parameter");
        return LevyModel::truncated_stable(get_num(j, "model", "alpha"), quad);
    }
    throw ConfigError("config: model.kind must be 'brownian' or 'truncated_stable'");
}

SigmaSpec parse_sigma(const json& j) {
    check_keys(j, "sigma", {"form", "lambda", "cap"});
    SigmaSpec s;
    const std::string form = j.contains("form") ? get_str(j, "sigma", "form") : "linear";
    if (form == "linear") {
        if (j.contains("cap")) throw ConfigError("config: sigma.cap applies to saturating_linear only");
        s.form = SigmaSpec::Form::Linear;
    } else if (form == "saturating_linear") {
        s.form = SigmaSpec::Form::SaturatingLinear;
        s.cap = get_num(j, "sigma", "cap");
    } else {
        throw ConfigError("config: sigma.form must be 'linear' or 'saturating_linear'");
    }
    s.lambda = get_num(j, "sigma", "lambda");
    s.validate();
    return s;
}

Profile parse_profile(const json& j, const std::string& where) {
    const std::string kind = get_str(j, where, "kind");
    if (kind == "zero") {
        check_keys(j, where, {"kind"});
        return Profile::zero();
    }
    if (kind == "flat") {
        check_keys(j, where, {"kind", "level"});
        return Profile::flat(get_num(j, where, "level"));
    }
    if (kind == "bump") {
        check_keys(j, where, {"kind", "center", "half_width", "height"});
        return Profile::bump(get_num_or(j, where, "center", 0.0), get_num(j, where, "half_width"),
                             get_num(j, where, "height"));
    }
    if (kind == "exp_decay") {
        check_keys(j, where, {"kind", "height", "rho"});
        return Profile::exp_decay(get_num(j, where, "height"), get_num(j, where, "rho"));
    }
    throw ConfigError("config: " + where + ".kind must be one of zero/flat/bump/exp_decay");
}

InitialData parse_initial(const json& j) {
    if (!j.is_object()) throw ConfigError("config: initial must be an object");
    InitialData init;
    json main = j;
    if (j.contains("v0")) {
        init.v0 = parse_profile(j.at("v0"), "initial.v0");
        main.erase("v0");
    }
    // The u0 keys live directly in `initial`, next to the optional v0 object.
    init.u0 = parse_profile(main, "initial");
    return init;
}

GridSpec parse_grid(const json& j) {
    check_keys(j, "grid", {"dt", "dx", "T", "L"});
    GridSpec g;
    g.dt = get_num(j, "grid", "dt");
    g.dx = get_num(j, "grid", "dx");
    g.T = get_num(j, "grid", "T");
    g.L = get_num(j, "grid", "L");
    g.validate();
    return g;
}

Scheme parse_scheme(const std::string& s) {
    if (s == "heat_mild_spectral") return Scheme::HeatMildSpectral;
    if (s == "heat_finite_difference") return Scheme::HeatFiniteDifference;
    if (s == "wave_cone_mild") return Scheme::WaveConeMild;
    throw ConfigError("config: run.scheme must be one of heat_mild_spectral/"
                      "heat_finite_difference/wave_cone_mild");
}

std::string scheme_name(Scheme s) {
    switch (s) {
    case Scheme::HeatMildSpectral:
        return "heat_mild_spectral";
    case Scheme::HeatFiniteDifference:
        return "heat_finite_difference";
    case Scheme::WaveConeMild:
        return "wave_cone_mild";
    }
    return "heat_mild_spectral";
}

json profile_to_json(const Profile& p) {
    switch (p.kind) {
    case Profile::Kind::Zero:
        return json{{"kind", "zero"}};
    case Profile::Kind::Flat:
        return json{{"kind", "flat"}, {"level", p.level}};
    case Profile::Kind::Bump:
        return json{{"kind", "bump"}, {"center", p.center}, {"half_width", p.half_width}, {"height", p.height}};
    case Profile::Kind::ExpDecay:
        return json{{"kind", "exp_decay"}, {"height", p.height}, {"rho", p.rho}};
    }
    return json{{"kind", "zero"}};
}

json model_to_json(const LevyModel& m) {
    json j;
    if (m.kind == LevyKind::Brownian) {
        j["kind"] = "brownian";
        j["kappa"] = m.kappa;
    } else {
        j["kind"] = "truncated_stable";
        j["alpha"] = m.alpha;
    }
    j["xi_max"] = m.quad.xi_max;
    j["rel_tol"] = m.quad.rel_tol;
    j["max_depth"] = m.quad.max_depth;
    return j;
}

json sigma_to_json(const SigmaSpec& s) {
    json j;
    j["form"] = s.form == SigmaSpec::Form::Linear ? "linear" : "saturating_linear";
    j["lambda"] = s.lambda;
    if (s.form == SigmaSpec::Form::SaturatingLinear) j["cap"] = s.cap;
    return j;
}

json grid_to_json(const GridSpec& g) {
    return json{{"dt", g.dt}, {"dx", g.dx}, {"T", g.T}, {"L", g.L}};
}

} // namespace

RunPlan parse_config(const nlohmann::json& doc) {
    check_keys(doc, "<top>", {"model", "sigma", "initial", "grid", "run"});
    RunPlan plan;
    plan.model = parse_model(require(doc, "<top>", "model"));
    plan.sigma = parse_sigma(require(doc, "<top>", "sigma"));
    plan.initial = parse_initial(require(doc, "<top>", "initial"));
    plan.grid = parse_grid(require(doc, "<top>", "grid"));

    const json& run = require(doc, "<top>", "run");
    check_keys(run, "run",
               {"equation", "nu", "n_paths", "seed", "scheme", "window", "delta", "alpha_grid", "c_values",
                "beta_values", "dump_paths"});
    const std::string eq = get_str(run, "run", "equation");
    if (eq == "heat")
        plan.equation = Equation::Heat;
    else if (eq == "wave")
        plan.equation = Equation::Wave;
    else
        throw ConfigError("config: run.equation must be 'heat' or 'wave'");

    plan.nu = static_cast<int>(get_int_or(run, "run", "nu", 2));
    if (plan.nu < 2 || plan.nu % 2 != 0) throw ConfigError("config: run.nu must be even and >= 2");
    plan.n_paths = get_int_or(run, "run", "n_paths", 128);
    if (plan.n_paths < 1) throw ConfigError("config: run.n_paths must be >= 1");
    plan.seed = get_uint_or(run, "run", "seed", 1);
    plan.scheme = run.contains("scheme")
                      ? parse_scheme(get_str(run, "run", "scheme"))
                      : (plan.equation == Equation::Wave ? Scheme::WaveConeMild : Scheme::HeatMildSpectral);
    plan.window = get_num_or(run, "run", "window", 0.5);
    if (!(plan.window > 0.0) || plan.window > 1.0) throw ConfigError("config: run.window must lie in (0, 1]");
    plan.delta = get_num_or(run, "run", "delta", 0.02);
    if (!(plan.delta >= 0.0) || !std::isfinite(plan.delta))
        throw ConfigError("config: run.delta must be >= 0");
    if (run.contains("alpha_grid")) {
        plan.alpha_grid = get_num_array(run, "run", "alpha_grid");
        for (double a : plan.alpha_grid)
            if (!(a >= 0.0) || !std::isfinite(a))
                throw ConfigError("config: run.alpha_grid entries must be >= 0");
    }
    plan.c_values = run.contains("c_values") ? get_num_array(run, "run", "c_values") : std::vector<double>{0.0};
    for (double c : plan.c_values)
        if (!std::isfinite(c)) throw ConfigError("config: run.c_values entries must be finite");
    plan.beta_values = run.contains("beta_values") ? get_num_array(run, "run", "beta_values")
                                                   : std::vector<double>{0.25, 0.5, 1.0};
    for (double b : plan.beta_values)
        if (!(b > 0.0) || !std::isfinite(b)) throw ConfigError("config: run.beta_values entries must be > 0");
    if (run.contains("dump_paths")) {
        if (!run.at("dump_paths").is_boolean()) throw ConfigError("config: run.dump_paths must be a boolean");
        plan.dump_paths = run.at("dump_paths").get<bool>();
    }

    // Cross-section consistency.
    if (plan.equation == Equation::Wave && plan.model.kind != LevyKind::Brownian)
        throw ConfigError("config: the wave equation supports only model.kind = 'brownian' "
                          "(kappa doubles as the wave speed)");
    const bool wave_scheme = plan.scheme == Scheme::WaveConeMild;
    if (wave_scheme != (plan.equation == Equation::Wave))
        throw ConfigError("config: run.scheme does not match run.equation");
    if (plan.equation == Equation::Heat && !plan.initial.v0.is_zero())
        throw ConfigError("config: initial.v0 applies to the wave equation only");
    return plan;
}

RunPlan load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    json doc;
    try {
        doc = json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

KernelSpec RunPlan::kernel_spec() const {
    return equation == Equation::Wave ? KernelSpec::wave(model.kappa) : KernelSpec::heat(model);
}

SimConfig RunPlan::sim_config() const {
    SimConfig c;
    c.equation = kernel_spec();
    c.sigma = sigma;
    c.initial = initial;
    c.grid = grid;
    c.n_paths = n_paths;
    c.seed = seed;
    c.scheme = scheme;
    return c;
}

RenewalProblem RunPlan::renewal_problem() const {
    if (sigma.form != SigmaSpec::Form::Linear)
        throw ConfigError("the second-moment oracle requires sigma.form = 'linear'");
    RenewalProblem p;
    p.equation = kernel_spec();
    p.lambda = sigma.lambda;
    p.initial = initial;
    p.grid = grid;
    return p;
}

nlohmann::json plan_to_json(const RunPlan& plan) {
    json j;
    j["model"] = model_to_json(plan.model);
    j["sigma"] = sigma_to_json(plan.sigma);
    j["initial"] = json{{"u0", profile_to_json(plan.initial.u0)}, {"v0", profile_to_json(plan.initial.v0)}};
    j["grid"] = grid_to_json(plan.grid);
    j["run"] = json{{"equation", plan.equation == Equation::Wave ? "wave" : "heat"},
                    {"nu", plan.nu},
                    {"n_paths", plan.n_paths},
                    {"seed", plan.seed},
                    {"scheme", scheme_name(plan.scheme)},
                    {"window", plan.window},
                    {"delta", plan.delta},
                    {"alpha_grid", plan.alpha_grid},
                    {"c_values", plan.c_values},
                    {"beta_values", plan.beta_values},
                    {"dump_paths", plan.dump_paths}};
    return j;
}

std::string canonical_config_string(const RunPlan& plan) { return plan_to_json(plan).dump(); }

std::uint64_t config_digest(const RunPlan& plan) { return fnv1a64(canonical_config_string(plan)); }

nlohmann::json sim_config_to_json(const SimConfig& config) {
    json j;
    j["equation"] = config.equation.equation == Equation::Wave ? "wave" : "heat";
    j["model"] = model_to_json(config.equation.model);
    j["sigma"] = sigma_to_json(config.sigma);
    j["initial"] = json{{"u0", profile_to_json(config.initial.u0)}, {"v0", profile_to_json(config.initial.v0)}};
    j["grid"] = grid_to_json(config.grid);
    j["n_paths"] = config.n_paths;
    j["seed"] = config.seed;
    j["scheme"] = scheme_name(config.scheme);
    return j;
}

std::uint64_t SimConfig::config_hash() const { return fnv1a64(sim_config_to_json(*this).dump()); }

} // namespace peaklab
