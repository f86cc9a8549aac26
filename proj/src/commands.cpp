#include "peaklab/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "peaklab/csvio.hpp"
#include "peaklab/manifest.hpp"
#include "peaklab/rng.hpp"
#include "peaklab/svgplot.hpp"

namespace peaklab {

namespace {

using nlohmann::json;

struct Session {
    RunPlan plan;
    RunManifest manifest;
    std::string dir;
};

Session begin(const CliOptions& opt, const char* command) {
    if (opt.config_path.empty()) throw ConfigError("--config is required");
    Session s;
    s.plan = load_config(opt.config_path);
    if (opt.seed_override) s.plan.seed = *opt.seed_override;
    s.dir = opt.out_dir.empty() ? "." : opt.out_dir;
    s.manifest.command = command;
    s.manifest.tool_version = tool_version();
    s.manifest.seed = s.plan.seed;
    s.manifest.config_hash = hex64(config_digest(s.plan));
    s.manifest.config = plan_to_json(s.plan);
    s.manifest.started_utc = utc_timestamp();
    return s;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

void write_json_file(const std::string& dir, const std::string& name, const json& j) {
    const std::string full = dir + "/" + name;
    std::ofstream out(full, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + full);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + full);
}

int finish_dry_run(const Session& s) {
    std::cout << s.manifest.config.dump(2) << "\n";
    return 0;
}

void finish(Session& s) {
    s.manifest.finished_utc = utc_timestamp();
    s.manifest.write(s.dir);
}

// ln sup_x of the field against time, for the diagnostic plots.
PlotSeries log_sup_series(const MomentField& f, const std::string& label) {
    PlotSeries s;
    s.label = label;
    for (std::size_t k = 0; k < f.times.size(); ++k) {
        double sup = 0.0;
        for (std::size_t i = 0; i < f.xs.size(); ++i) sup = std::max(sup, f.value(k, i));
        if (sup > 0.0) {
            s.xs.push_back(f.times[k]);
            s.ys.push_back(std::log(sup) + f.log_offset);
        }
    }
    return s;
}

std::vector<double> default_speed_grid(const RunPlan& plan) {
    // Feasibility probes bracketing the regime of interest.
    const double l = plan.sigma.lower_slope();
    const double scale = plan.equation == Equation::Wave ? plan.model.kappa : l * l / (4.0 * kPi);
    return {0.5 * scale, scale, 1.5 * scale};
}

} // namespace

int cmd_bounds(const CliOptions& opt) {
    Session s = begin(opt, "bounds");
    if (opt.dry_run) return finish_dry_run(s);
    ensure_dir(s.dir);
    const RunPlan& p = s.plan;
    const bool wave = p.equation == Equation::Wave;
    const bool brownian = p.model.kind == LevyKind::Brownian;

    json j;
    j["nu"] = p.nu;
    j["z_nu"] = burkholder_constant(p.nu);
    j["lip"] = p.sigma.lip();
    j["lower_slope"] = p.sigma.lower_slope();

    json thresholds = json::array();
    for (double c : p.c_values) {
        json row;
        row["c"] = c;
        if (wave) {
            const WaveThreshold w = moment_threshold_wave(p.model.kappa, p.sigma.lip(), p.nu, c);
            row["wave_unscaled"] = w.unscaled;
            row["wave_kappa_scaled"] = w.kappa_scaled;
        } else {
            row["general"] = moment_threshold_general(p.model, p.sigma, p.nu, c);
            if (brownian) row["heat_sharp"] = moment_threshold_heat(p.model.kappa, p.sigma.lip(), c);
        }
        thresholds.push_back(row);
    }
    j["thresholds"] = thresholds;

    json lam;
    if (wave) {
        lam["exact"] = lambda_exact_wave(p.model.kappa);
    } else {
        lam["upper_speed_general"] = lambda_upper_general(p.model, p.sigma, p.nu);
        if (brownian) {
            const HeatLambdaBounds b = lambda_bounds_heat(p.sigma);
            lam["upper"] = b.upper;
            lam["lower"] = b.lower ? json(*b.lower) : json(nullptr);
        }
    }
    j["lambda"] = lam;

    if (!wave) {
        json ups = json::array();
        for (double beta : p.beta_values)
            ups.push_back({{"beta", beta}, {"upsilon", upsilon(p.model, beta)}});
        j["upsilon"] = ups;
    }

    if (wave || brownian) {
        const KernelSpec spec = p.kernel_spec();
        const std::vector<double> speeds = p.alpha_grid.empty() ? default_speed_grid(p) : p.alpha_grid;
        json lc = json::array(), tails = json::array();
        for (double alpha : speeds) {
            for (double beta : p.beta_values) {
                lc.push_back({{"alpha", alpha},
                              {"beta", beta},
                              {"feasible", lower_condition(spec, p.sigma, alpha, beta)}});
                tails.push_back({{"alpha", alpha},
                                 {"beta", beta},
                                 {"value", tail_mass_laplace(spec, alpha, beta)}});
            }
        }
        j["lower_condition"] = lc;
        j["tail_mass_laplace"] = tails;
    }

    write_json_file(s.dir, "bounds.json", j);
    s.manifest.add_output(s.dir, "bounds.json");

    if (opt.plot && !wave) {
        PlotSeries curve;
        curve.label = "upsilon(beta)";
        for (int i = 0; i <= 60; ++i) {
            const double beta = std::pow(10.0, -1.0 + 2.0 * i / 60.0);
            curve.xs.push_back(beta);
            curve.ys.push_back(upsilon(p.model, beta));
        }
        write_svg_plot(s.dir + "/bounds.svg", "resolvent integral", "beta", "upsilon", {curve});
        s.manifest.add_output(s.dir, "bounds.svg");
    }
    finish(s);
    return 0;
}

int cmd_oracle(const CliOptions& opt) {
    Session s = begin(opt, "oracle");
    const RenewalProblem problem = s.plan.renewal_problem();
    problem.validate();
    if (opt.dry_run) return finish_dry_run(s);
    ensure_dir(s.dir);

    const MomentField field = solve_second_moment(problem);
    write_moments_csv(field, s.dir + "/moments.csv");
    s.manifest.add_output(s.dir, "moments.csv");

    json summary;
    summary["nu"] = field.nu;
    summary["log_offset"] = field.log_offset;
    summary["window"] = s.plan.window;
    try {
        summary["growth_rate"] = growth_rate(field, s.plan.window);
    } catch (const NumericalError&) {
        summary["growth_rate"] = nullptr; // degenerate field (e.g. zero data)
    }
    write_json_file(s.dir, "oracle.json", summary);
    s.manifest.add_output(s.dir, "oracle.json");

    if (opt.plot) {
        write_svg_plot(s.dir + "/oracle_sup.svg", "second-moment sup growth", "t", "ln sup_x E u^2",
                       {log_sup_series(field, "oracle")});
        s.manifest.add_output(s.dir, "oracle_sup.svg");
    }
    finish(s);
    return 0;
}

int cmd_simulate(const CliOptions& opt) {
    Session s = begin(opt, "simulate");
    const SimConfig sim = s.plan.sim_config();
    sim.validate();
    if (opt.dry_run) return finish_dry_run(s);
    ensure_dir(s.dir);

    const MomentField field = moment_field_mc(sim, s.plan.nu, opt.workers);
    write_moments_csv(field, s.dir + "/moments.csv");
    s.manifest.add_output(s.dir, "moments.csv");

    json summary;
    summary["nu"] = field.nu;
    summary["n_paths"] = field.n_paths;
    summary["seed"] = s.plan.seed;
    summary["scheme"] = sim_config_to_json(sim)["scheme"];
    write_json_file(s.dir, "simulate.json", summary);
    s.manifest.add_output(s.dir, "simulate.json");

    if (s.plan.dump_paths) {
        // Raw fields, path-major: n_paths blocks of (n_t+1)*n_x native float64.
        std::ofstream bin(s.dir + "/paths.bin", std::ios::binary);
        if (!bin) throw IoError("cannot open for writing: " + s.dir + "/paths.bin");
        for (long p = 0; p < sim.n_paths; ++p) {
            const PathField f = simulate_path(sim, p);
            bin.write(reinterpret_cast<const char*>(f.values.data()),
                      static_cast<std::streamsize>(f.values.size() * sizeof(double)));
        }
        if (!bin) throw IoError("short write: " + s.dir + "/paths.bin");
        bin.close();
        json side;
        side["grid"] = sim_config_to_json(sim)["grid"];
        side["config_hash"] = hex64(sim.config_hash());
        side["n_t"] = sim.grid.n_steps();
        side["n_x"] = sim.grid.n_x();
        side["path_indices"] = json{{"first", 0}, {"count", sim.n_paths}};
        side["layout"] = "path-major blocks, row-major (t, x), native little-endian float64";
        write_json_file(s.dir, "paths.json", side);
        s.manifest.add_output(s.dir, "paths.bin");
        s.manifest.add_output(s.dir, "paths.json");
    }

    if (opt.plot) {
        write_svg_plot(s.dir + "/simulate_sup.svg", "moment sup growth", "t", "ln sup_x E|u|^nu",
                       {log_sup_series(field, "mc")});
        s.manifest.add_output(s.dir, "simulate_sup.svg");
    }
    finish(s);
    return 0;
}

int cmd_estimate(const CliOptions& opt) {
    Session s = begin(opt, "estimate");
    if (opt.dry_run) return finish_dry_run(s);
    if (opt.inputs.empty()) throw ConfigError("estimate: at least one --in moments.csv is required");
    ensure_dir(s.dir);

    json reports = json::array();
    for (std::size_t q = 0; q < opt.inputs.size(); ++q) {
        const MomentField field = read_moments_csv(opt.inputs[q]);

        std::vector<double> alphas = s.plan.alpha_grid;
        if (alphas.empty()) {
            // Default: span every front speed the grid can track.
            const double a_max = std::max(std::abs(field.xs.front()), std::abs(field.xs.back())) /
                                 std::max(field.times.back(), 1e-300);
            for (int i = 0; i <= 40; ++i) alphas.push_back(a_max * i / 40.0);
        }
        const GrowthIndexReport rep = growth_index_estimate(field, alphas, s.plan.window, s.plan.delta);

        std::string csv_name = "growth_index.csv";
        std::string svg_name = "growth_index.svg";
        if (q > 0) {
            csv_name = "growth_index_" + std::to_string(q + 1) + ".csv";
            svg_name = "growth_index_" + std::to_string(q + 1) + ".svg";
        }
        write_growth_csv(rep, s.dir + "/" + csv_name);
        s.manifest.add_output(s.dir, csv_name);

        json r;
        r["input"] = opt.inputs[q];
        r["csv"] = csv_name;
        r["lambda_lower_hat"] = rep.lambda_lower_hat;
        r["lambda_upper_hat"] = std::isfinite(rep.lambda_upper_hat) ? json(rep.lambda_upper_hat) : json(nullptr);
        r["gamma_bar_hat"] = std::isfinite(rep.gamma_bar_hat) ? json(rep.gamma_bar_hat) : json(nullptr);
        r["nu"] = field.nu;
        r["source"] = field.source == FieldSource::MonteCarlo ? "mc" : "oracle";
        json norms = json::array();
        for (double beta : s.plan.beta_values)
            for (double c : s.plan.c_values)
                norms.push_back({{"beta", beta}, {"c", c}, {"value", discounted_sup_norm(field, beta, c)}});
        r["discounted_sup_norms"] = norms;
        reports.push_back(std::move(r));

        if (opt.plot) {
            PlotSeries slopes;
            slopes.label = "slope";
            for (std::size_t a = 0; a < rep.alphas.size(); ++a) {
                if (!std::isfinite(rep.slopes[a])) continue;
                slopes.xs.push_back(rep.alphas[a]);
                slopes.ys.push_back(rep.slopes[a]);
            }
            write_svg_plot(s.dir + "/" + svg_name, "tail growth rate by front speed", "alpha", "slope",
                           {slopes});
            s.manifest.add_output(s.dir, svg_name);
        }
    }

    json summary;
    summary["window"] = s.plan.window;
    summary["delta"] = s.plan.delta;
    summary["reports"] = std::move(reports);
    write_json_file(s.dir, "estimate.json", summary);
    s.manifest.add_output(s.dir, "estimate.json");
    finish(s);
    return 0;
}

int cmd_validate(const CliOptions& opt) {
    Session s = begin(opt, "validate");
    if (opt.dry_run) return finish_dry_run(s);
    ensure_dir(s.dir);
    const RunPlan& p = s.plan;

    json checks = json::array();
    bool all_ok = true;
    auto record = [&](const std::string& name, bool ok, const std::string& detail) {
        checks.push_back({{"name", name}, {"ok", ok}, {"detail", detail}});
        std::cout << (ok ? "[ok]   " : "[fail] ") << name << ": " << detail << "\n";
        all_ok = all_ok && ok;
    };

    // 1. The derived run structures accept the config.
    try {
        p.sim_config().validate();
        if (p.sigma.form == SigmaSpec::Form::Linear) p.renewal_problem().validate();
        record("derived_configs", true, "simulation and oracle setups validate");
    } catch (const std::exception& e) {
        record("derived_configs", false, e.what());
    }

    // 2. Resolvent identity: the Laplace-transformed squared-kernel mass over
    // the whole line must equal the resolvent integral.
    try {
        const KernelSpec spec = p.kernel_spec();
        const double beta = 1.0;
        double lhs = 0.0, rhs = 0.0;
        if (p.equation == Equation::Wave) {
            lhs = 2.0 * tail_mass_laplace(spec, 0.0, beta);
            rhs = 0.5 * p.model.kappa / (beta * beta);
        } else if (p.model.kind == LevyKind::Brownian) {
            lhs = 2.0 * tail_mass_laplace(spec, 0.0, beta);
            rhs = upsilon(p.model, beta);
        } else {
            // Time-domain quadrature of exp(-beta r) ||p_r||^2.
            double acc = 0.0;
            const int n = 4000;
            const double r_hi = 46.0;
            for (int i = 0; i < n; ++i) {
                const double sq = (i + 0.5) / n * std::sqrt(r_hi);
                const double r = sq * sq;
                acc += 2.0 * sq * std::exp(-beta * r) * weighted_l2_norm_sq(spec, r, 0.0).value;
            }
            lhs = acc * std::sqrt(r_hi) / n;
            rhs = upsilon(p.model, beta);
        }
        const double rel = std::abs(lhs - rhs) / rhs;
        record("resolvent_identity", rel < 1e-4,
               "relative mismatch " + format_g17(rel) + " (lhs " + format_g17(lhs) + ", rhs " +
                   format_g17(rhs) + ")");
    } catch (const std::exception& e) {
        record("resolvent_identity", false, e.what());
    }

    // 3. Kernel mass at the step scale.
    try {
        if (p.equation == Equation::Wave) {
            const double got = weighted_l2_norm_sq(p.kernel_spec(), 1.0, 0.0).value;
            const double want = 0.5 * p.model.kappa;
            record("kernel_mass", std::abs(got - want) <= 1e-12 * want,
                   "||Gamma_1||^2 = " + format_g17(got));
        } else {
            const double var_rate = p.model.kind == LevyKind::Brownian ? p.model.kappa : 2.0 / (2.0 - p.model.alpha);
            const double W = 10.0 * std::sqrt(var_rate * p.grid.dt) + 6.0;
            const int h = static_cast<int>(std::ceil(W / p.grid.dx));
            std::vector<double> xs(static_cast<std::size_t>(2 * h + 1));
            for (int i = -h; i <= h; ++i) xs[static_cast<std::size_t>(i + h)] = i * p.grid.dx;
            const DensityResult d = transition_density(p.model, p.grid.dt, xs);
            double mass = 0.0;
            for (double v : d.values) mass += v * p.grid.dx;
            record("kernel_mass", std::abs(mass - 1.0) < 1e-5,
                   "step-density mass " + format_g17(mass) + ", clamped " + format_g17(d.clamped_mass));
        }
    } catch (const std::exception& e) {
        record("kernel_mass", false, e.what());
    }

    // 4. Noise moments under the configured seed.
    {
        const int n = 4096;
        double m1 = 0.0, m2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double z = standard_normal(p.seed, 0, static_cast<std::uint32_t>(i / 64),
                                             static_cast<std::uint32_t>(i % 64));
            m1 += z;
            m2 += z * z;
        }
        m1 /= n;
        m2 /= n;
        const bool ok = std::abs(m1) < 0.08 && std::abs(m2 - 1.0) < 0.12;
        record("noise_moments", ok,
               "mean " + format_g17(m1) + ", second moment " + format_g17(m2) + " over 4096 cells");
    }

    json j;
    j["checks"] = checks;
    j["all_ok"] = all_ok;
    write_json_file(s.dir, "validate.json", j);
    s.manifest.add_output(s.dir, "validate.json");
    finish(s);
    if (!all_ok) throw NumericalError("validate: at least one self-check failed (see validate.json)");
    return 0;
}

int dispatch_command(const std::string& name, const CliOptions& opt) {
    if (name == "bounds") return cmd_bounds(opt);
    if (name == "oracle") return cmd_oracle(opt);
    if (name == "simulate") return cmd_simulate(opt);
    if (name == "estimate") return cmd_estimate(opt);
    if (name == "validate") return cmd_validate(opt);
    throw ConfigError("unknown command: " + name);
}

} // namespace peaklab
