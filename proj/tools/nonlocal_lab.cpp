// Experiment runner: one subcommand per experiment kind, plus `baseline` to
// freeze regression summaries. Exit codes: 0 all hard assertions passed,
// 2 soft verdict failure (ratio drift beyond 10% of baseline), 1 error.

#include <CLI11.hpp>
#include <iostream>

#include "nonlocal/experiments.hpp"

namespace {

struct CommonArgs {
    std::string config;
    std::string out = "out";
    std::string baseline;
    long seed = -1;
    int threads = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config, "experiment configuration (JSON)")->required();
    cmd->add_option("--out", args.out, "output directory");
    cmd->add_option("--baseline", args.baseline, "baseline file for regression comparison");
    cmd->add_option("--seed", args.seed, "override the config seed");
    cmd->add_option("--threads", args.threads, "worker threads (sweep parallelism)");
}

int execute(const CommonArgs& args, const std::string& expected_kind, bool freeze) {
    nonlocal::ExperimentConfig cfg = nonlocal::ExperimentConfig::load_file(args.config);
    if (!expected_kind.empty() && cfg.kind() != expected_kind) {
        std::cerr << "config kind '" << cfg.kind() << "' does not match subcommand '"
                  << expected_kind << "'\n";
        return 1;
    }
    if (args.seed >= 0) cfg.raw["seed"] = args.seed;
    if (args.threads > 1) cfg.raw["threads"] = args.threads;

    if (freeze) {
        if (args.baseline.empty()) {
            std::cerr << "baseline: --baseline PATH is required\n";
            return 1;
        }
        nonlocal::freeze_baseline(cfg, args.out, args.baseline);
        std::cout << "baseline frozen at " << args.baseline << "\n";
        return 0;
    }

    std::optional<std::string> base;
    if (!args.baseline.empty()) base = args.baseline;
    nonlocal::RunOutcome out = nonlocal::run_and_persist(cfg, args.out, base);
    std::cout << out.report.experiment << ": hard=" << (out.report.hard_pass ? "pass" : "FAIL")
              << " soft=" << (out.report.soft_pass ? "pass" : "FAIL") << " cases="
              << out.report.cases.size() << " wall_ms=" << out.report.wall_ms << "\n";
    std::cout << "report: " << args.out << "/report.json\n";
    return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nonlocal-lab: discretization and estimate verification for non-local operators"};
    app.require_subcommand(1);

    const std::vector<std::string> kinds = {"assemble",   "resolvent-sweep", "caccioppoli",
                                            "wrh",        "cz",              "good-lambda",
                                            "maxreg",     "square-function"};
    std::map<std::string, CommonArgs> argmap;
    for (const std::string& k : kinds) {
        CLI::App* cmd = app.add_subcommand(k, "run the " + k + " experiment");
        add_common(cmd, argmap[k]);
    }
    CommonArgs run_args, base_args;
    {
        CLI::App* cmd = app.add_subcommand("run", "run the experiment named in the config");
        add_common(cmd, run_args);
    }
    {
        CLI::App* cmd = app.add_subcommand("baseline", "run and freeze the regression baseline");
        add_common(cmd, base_args);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        for (const std::string& k : kinds)
            if (app.got_subcommand(k)) return execute(argmap[k], k, false);
        if (app.got_subcommand("run")) return execute(run_args, "", false);
        if (app.got_subcommand("baseline")) return execute(base_args, "", true);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
