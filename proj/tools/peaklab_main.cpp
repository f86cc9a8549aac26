#include <iostream>

#include <CLI11.hpp>

#include "peaklab/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"peaklab: moment growth laboratory for stochastic heat and wave equations"};
    app.require_subcommand(1);

    peaklab::CliOptions opt;
    std::string chosen;
    std::uint64_t seed_val = 0;

    auto add_common = [&](CLI::App* sub, bool with_inputs) {
        sub->add_option("--config", opt.config_path, "JSON config file")->required();
        sub->add_option("--out", opt.out_dir, "output directory (default: current)");
        CLI::Option* seed_opt = sub->add_option("--seed", seed_val, "override run.seed");
        sub->add_option("--workers", opt.workers, "worker threads (0 = hardware concurrency)");
        sub->add_flag("--plot", opt.plot, "write SVG diagnostics");
        sub->add_flag("--dry-run", opt.dry_run, "validate and print the resolved config, write nothing");
        if (with_inputs) sub->add_option("--in", opt.inputs, "input moments.csv file");
        sub->callback([&, sub, seed_opt]() {
            chosen = sub->get_name();
            if (seed_opt->count() > 0) opt.seed_override = seed_val;
        });
    };

    add_common(app.add_subcommand("bounds", "closed-form thresholds, front speeds and feasibility"), false);
    add_common(app.add_subcommand("oracle", "deterministic second-moment field (renewal solve)"), false);
    add_common(app.add_subcommand("simulate", "Monte Carlo moment field"), false);
    add_common(app.add_subcommand("estimate", "growth indices from a moments.csv"), true);
    add_common(app.add_subcommand("validate", "config and invariant self-checks"), false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        return peaklab::dispatch_command(chosen, opt);
    } catch (const peaklab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const peaklab::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const peaklab::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
