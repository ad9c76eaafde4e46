// priceopt command-line interface.
//
//   priceopt simulate --preset desk --seed 1 --out run/
//   priceopt fit      --out run/
//   priceopt optimize --out run/
//   priceopt scenario --out run/
//   priceopt diagnose --out run/

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "priceopt/commands.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string preset = "paper";
    std::string out_dir;
    std::string variant;
    std::int64_t seed = -1;
    bool no_conjoint = false;
    bool allow_nonconverged = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON configuration file");
    cmd->add_option("--preset", flags.preset, "configuration preset")
        ->check(CLI::IsMember({"paper", "desk"}));
    cmd->add_option("--out", flags.out_dir, "run directory for inputs and outputs");
    cmd->add_option("--variant", flags.variant, "model variant")
        ->check(CLI::IsMember(
            {"full", "no_demographics", "multiplicative_kappa", "no_history"}));
    cmd->add_option("--seed", flags.seed, "master seed (overrides the config)");
    cmd->add_flag("--no-conjoint", flags.no_conjoint,
                  "fit from purchase history alone");
    cmd->add_flag("--allow-nonconverged", flags.allow_nonconverged,
                  "do not fail when R-hat >= 1.05");
}

priceopt::RunConfig resolve_config(const CommonFlags& flags) {
    const priceopt::Preset preset =
        flags.preset == "desk" ? priceopt::Preset::desk : priceopt::Preset::paper;
    priceopt::RunConfig config = flags.config_path.empty()
                                     ? priceopt::default_config(preset)
                                     : priceopt::load_config(flags.config_path, preset);
    if (flags.seed >= 0) config.seed = static_cast<std::uint64_t>(flags.seed);
    if (!flags.out_dir.empty()) config.output_dir = flags.out_dir;
    if (!flags.variant.empty()) config.variant = priceopt::variant_from_string(flags.variant);
    if (flags.no_conjoint) config.no_conjoint = true;
    if (flags.allow_nonconverged) config.allow_nonconverged = true;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal data-fusion price optimization for subscription services"};
    app.require_subcommand(1);

    CommonFlags flags;
    CLI::App* simulate =
        app.add_subcommand("simulate", "generate purchase history, conjoint and ground truth");
    CLI::App* fit = app.add_subcommand("fit", "estimate the choice model by MCMC");
    CLI::App* optimize =
        app.add_subcommand("optimize", "posterior-predictive price optimization");
    CLI::App* scenario =
        app.add_subcommand("scenario", "fit and optimize the misspecified variants");
    CLI::App* diagnose = app.add_subcommand("diagnose", "report convergence diagnostics");
    for (CLI::App* cmd : {simulate, fit, optimize, scenario, diagnose})
        add_common_flags(cmd, flags);

    CLI11_PARSE(app, argc, argv);

    try {
        const priceopt::RunConfig config = resolve_config(flags);
        if (simulate->parsed()) return priceopt::cmd_simulate(config);
        if (fit->parsed()) return priceopt::cmd_fit(config);
        if (optimize->parsed()) return priceopt::cmd_optimize(config);
        if (scenario->parsed()) return priceopt::cmd_scenario(config);
        if (diagnose->parsed()) return priceopt::cmd_diagnose(config);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
