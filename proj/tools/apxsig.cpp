#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "apxsig/apxsig.hpp"

namespace {

enum Exit : int { ok = 0, validation = 1, infeasible = 2, io = 3 };

struct Common {
    std::string config;
    std::optional<unsigned> jobs;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "experiment configuration (JSON)")->required();
    cmd->add_option("--jobs", c.jobs, "worker threads (default: config, then hardware concurrency)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", c.seed, "synthetic-input seed override");
    cmd->add_option("--out", c.out, "output directory override");
}

apxsig::ExperimentConfig resolve(const Common& c, unsigned& jobs) {
    auto cfg = apxsig::load_config(c.config);
    if (c.seed) cfg.input.synth.seed = *c.seed;
    if (c.out) cfg.output_dir = *c.out;
    jobs = c.jobs ? *c.jobs : cfg.jobs ? cfg.jobs : std::max(1u, std::thread::hardware_concurrency());
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Approximate-arithmetic QRS pipeline simulator and design-space explorer"};
    app.require_subcommand(1);

    Common sweep_opts, explore_opts, run_opts;
    std::string design_path;
    auto* sweep = app.add_subcommand("sweep", "per-stage resilience tables");
    auto* explore = app.add_subcommand("explore", "design-space exploration");
    auto* run = app.add_subcommand("run", "run one design and emit stage signals and metrics");
    add_common(sweep, sweep_opts);
    add_common(explore, explore_opts);
    add_common(run, run_opts);
    run->add_option("--design", design_path, "design file (stage array or explore's design.json)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return validation;
    }

    try {
        unsigned jobs = 1;
        const auto start = std::chrono::steady_clock::now();
        if (*sweep) {
            const auto cfg = resolve(sweep_opts, jobs);
            const auto res = apxsig::cmd_sweep(cfg, jobs);
            std::cout << "sweep: 5 tables written to " << cfg.output_dir << " (config " << res.config_hash << ")\n";
        } else if (*explore) {
            const auto cfg = resolve(explore_opts, jobs);
            const auto res = apxsig::cmd_explore(cfg, jobs);
            for (const auto& s : res.scopes)
                std::cout << s.scope << ": " << s.log.size() << " evaluations, committed reduction "
                          << apxsig::format_number(s.committed.energy.reduction) << "x, pareto points "
                          << s.pareto.size() << '\n';
            std::cout << "design: " << res.design.key() << '\n'
                      << "best reduction at 100% peak accuracy: "
                      << apxsig::format_number(res.best_reduction_full_accuracy) << "x\n";
            std::cerr << "explore: " << res.evaluations << " evaluations in " << res.wall_s << " s\n";
        } else if (*run) {
            const auto cfg = resolve(run_opts, jobs);
            const auto res = apxsig::cmd_run(cfg, apxsig::load_design(design_path));
            std::cout << "peak accuracy " << apxsig::format_number(res.scores.peak_acc) << "%, PSNR "
                      << apxsig::format_number(res.scores.psnr) << " dB, reduction "
                      << apxsig::format_number(res.scores.energy.reduction) << "x\n";
        }
        std::cerr << "elapsed " << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()
                  << " s\n";
        return ok;
    } catch (const apxsig::InfeasibleConstraintError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return infeasible;
    } catch (const apxsig::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return io;
    } catch (const apxsig::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return io;
    } catch (const apxsig::UnsupportedFormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return io;
    } catch (const apxsig::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return validation;
    }
}
