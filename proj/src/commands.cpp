#include "priceopt/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>

#include "priceopt/decision.hpp"
#include "priceopt/diagnostics.hpp"
#include "priceopt/inference.hpp"
#include "priceopt/io.hpp"

namespace fs = std::filesystem;

namespace priceopt {

namespace {

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void write_json_file(const std::string& path, const nlohmann::json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << doc.dump(2) << '\n';
}

std::optional<nlohmann::json> read_json_if_present(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
    return doc;
}

nlohmann::json summary_to_json(const std::vector<ParameterSummary>& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const ParameterSummary& s : rows) {
        nlohmann::json row;
        row["parameter"] = s.name;
        row["pinned"] = s.pinned;
        if (s.true_value)
            row["true"] = *s.true_value;
        else
            row["true"] = nullptr;
        row["mean"] = s.mean;
        row["sd"] = s.sd;
        row["q2.5"] = s.q025;
        row["q97.5"] = s.q975;
        row["rhat"] = s.rhat;
        row["ess_bulk"] = s.ess_bulk;
        row["ess_tail"] = s.ess_tail;
        out.push_back(std::move(row));
    }
    return out;
}

void print_summary_table(const std::vector<ParameterSummary>& rows) {
    std::printf("%-16s %9s %9s %8s %9s %9s %7s %9s %9s\n", "parameter", "true", "mean",
                "sd", "2.5%", "97.5%", "rhat", "ess_bulk", "ess_tail");
    for (const ParameterSummary& s : rows) {
        if (s.pinned) {
            std::printf("%-16s %9.4f %9s %8s %9s %9s %7s %9s %9s\n", s.name.c_str(),
                        s.true_value.value_or(0.0), "", "", "", "", "", "", "");
            continue;
        }
        char truth[16] = "";
        if (s.true_value) std::snprintf(truth, sizeof(truth), "%9.4f", *s.true_value);
        std::printf("%-16s %9s %9.4f %8.4f %9.4f %9.4f %7.4f %9.0f %9.0f\n",
                    s.name.c_str(), truth, s.mean, s.sd, s.q025, s.q975, s.rhat,
                    s.ess_bulk, s.ess_tail);
    }
}

Population population_for(const RunConfig& config, double tau) {
    PopulationSpec spec = config.population;
    spec.seed = config.seed;
    return Population(spec, tau);
}

// True values for the summary, recovered from the simulate manifest when the
// output directory holds one.
std::optional<std::map<std::string, double>> truths_from_manifest(
    const RunConfig& config, ModelVariant variant) {
    const auto manifest = read_json_if_present(join(config.output_dir, "manifest.json"));
    if (!manifest || !manifest->contains("config")) return std::nullopt;
    try {
        const RunConfig sim_config = config_from_json(manifest->at("config"));
        return true_value_map(sim_config.true_params, variant);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

}  // namespace

int cmd_simulate(const RunConfig& config) {
    config.validate();
    fs::create_directories(config.output_dir);

    const Population pop = population_for(config, config.true_params.tau);
    const MarketState state =
        simulate_purchase_history(pop, config.market, config.true_params, config.seed);
    const ConjointStudy study =
        simulate_conjoint(pop, state, config.conjoint, config.true_params, config.seed);
    const auto truth = compute_ground_truth(
        pop, state, config.decision.price_grid(), config.true_params, config.decision.n0,
        config.decision.variable_cost, config.decision.ground_truth_replications,
        config.seed);

    write_purchase_history_csv(join(config.output_dir, "purchase_history.csv"), pop, state);
    write_conjoint_csv(join(config.output_dir, "conjoint.csv"), pop, study);
    write_ground_truth_csv(join(config.output_dir, "ground_truth.csv"), truth);
    write_population_json(join(config.output_dir, "population.json"), pop.spec());

    nlohmann::json manifest;
    manifest["command"] = "simulate";
    manifest["seed"] = config.seed;
    manifest["config"] = config_to_json(config);
    write_json_file(join(config.output_dir, "manifest.json"), manifest);

    std::printf("simulate: %zu history rows over %d periods, %zu conjoint rows, "
                "%zu ground-truth prices, %zu subscribers at t=%d\n",
                state.history.size(), state.period, study.rows.size(), truth.size(),
                state.subscribers.size(), state.period + 1);
    return 0;
}

int cmd_fit(const RunConfig& config, const std::string& suffix) {
    const HistoryFile history =
        read_purchase_history_csv(join(config.output_dir, "purchase_history.csv"));
    ObservationSet conjoint;
    if (!config.no_conjoint)
        conjoint = read_conjoint_csv(join(config.output_dir, "conjoint.csv"));

    SamplerConfig sampler = config.sampler;
    sampler.seed = config.seed;
    // The decision stage needs the current subscribers' posterior deviations.
    const FitResult fit =
        fit_model(history.observations, conjoint, config.variant, config.priors, sampler,
                  /*store_individual=*/false, &history.final_subscriber_ids);
    if (fit.identifiability_warning)
        std::fprintf(stderr, "warning: %s\n", fit.warning.c_str());

    const auto truths = truths_from_manifest(config, config.variant);
    const auto table =
        summary_table(fit.draws, config.variant, truths ? &*truths : nullptr);
    const DiagnosticsReport report = diagnose(fit.draws, truths ? &*truths : nullptr);

    write_draws_csv(join(config.output_dir, "draws" + suffix + ".csv"), fit.draws);
    write_json_file(join(config.output_dir, "summary" + suffix + ".json"),
                    nlohmann::json{{"command", "fit"},
                                   {"variant", to_string(config.variant)},
                                   {"seed", config.seed},
                                   {"parameters", summary_to_json(table)}});

    nlohmann::json diag;
    diag["command"] = "fit";
    diag["variant"] = to_string(config.variant);
    diag["seed"] = config.seed;
    diag["max_rhat"] = report.max_rhat;
    diag["converged"] = report.max_rhat < 1.05;
    diag["total_divergences"] = report.total_divergences;
    diag["retained_per_chain"] = report.retained_per_chain;
    diag["total_retained"] = report.total_retained;
    diag["identifiability_warning"] = fit.identifiability_warning;
    diag["parameters"] = summary_to_json(summarize(
        fit.draws, truths ? &*truths : nullptr));
    nlohmann::json chains = nlohmann::json::array();
    for (int c = 0; c < fit.draws.n_chains; ++c)
        chains.push_back({{"chain", c + 1},
                          {"divergences", fit.draws.divergences[c]},
                          {"mean_accept", fit.draws.mean_accept[c]},
                          {"step_size", fit.draws.step_size[c]},
                          {"leapfrogs", fit.draws.leapfrogs[c]}});
    diag["chains"] = chains;
    diag["config"] = config_to_json(config);
    write_json_file(join(config.output_dir, "diagnostics" + suffix + ".json"), diag);

    print_summary_table(table);
    std::printf("fit%s: %d chains x %d retained, max rhat %.4f, %d divergences\n",
                suffix.c_str(), fit.draws.n_chains, fit.draws.retained, report.max_rhat,
                report.total_divergences);

    if (report.max_rhat >= 1.05 && !config.allow_nonconverged) {
        std::fprintf(stderr,
                     "error: max rhat %.4f >= 1.05; rerun with more iterations or "
                     "--allow-nonconverged\n",
                     report.max_rhat);
        return 3;
    }
    return 0;
}

int cmd_optimize(const RunConfig& config, const std::string& suffix) {
    const std::string draws_path = join(config.output_dir, "draws" + suffix + ".csv");
    if (!fs::exists(draws_path))
        throw std::runtime_error("missing draws file " + draws_path + "; run fit first");
    const PosteriorDraws draws = read_draws_csv(draws_path);

    const HistoryFile history =
        read_purchase_history_csv(join(config.output_dir, "purchase_history.csv"));
    if (history.final_subscribers.empty())
        throw std::runtime_error("no subscribers in the final period; cannot optimize");

    PopulationSpec spec =
        read_population_json(join(config.output_dir, "population.json"));
    spec.seed = config.seed;
    const Population pop(spec, 0.0);  // decision-time u is drawn per posterior draw

    DecisionInput input;
    input.d1 = history.final_subscribers;
    input.n1 = static_cast<int>(input.d1.size());
    input.n0 = config.decision.n0;
    const auto d0_ids =
        sample_from_population(pop, input.n0, history.final_subscriber_ids, config.seed,
                               kStreamDecisionPool);
    input.d0.reserve(input.n0);
    for (const std::int64_t id : d0_ids)
        input.d0.push_back({pop.customer(id).demographics, 0});
    input.variable_cost = config.decision.variable_cost;
    input.price_grid = config.decision.price_grid();
    input.seed = config.seed;
    input.variant = variant_from_columns(draws);
    input.use_estimated_u = config.decision.subscriber_u == "estimated";

    const ProfitCurve curve = profit_curve(draws, input);

    std::vector<GroundTruthRow> truth;
    const std::string truth_path = join(config.output_dir, "ground_truth.csv");
    if (fs::exists(truth_path)) truth = read_ground_truth_csv(truth_path);

    write_profit_curve_csv(join(config.output_dir, "profit_curve" + suffix + ".csv"),
                           curve, truth.empty() ? nullptr : &truth);

    const int modal = curve.modal_index();
    const ProfitPoint& pt = curve.points[modal];
    nlohmann::json out;
    out["command"] = "optimize";
    out["seed"] = config.seed;
    out["n0"] = input.n0;
    out["n1"] = input.n1;
    out["modal_price"] = pt.price;
    out["probability"] = pt.p_optimal;
    out["mean_profit"] = pt.mean_profit;
    out["lo95"] = pt.lo95;
    out["hi95"] = pt.hi95;
    write_json_file(join(config.output_dir, "optimal_price" + suffix + ".json"), out);

    std::printf("optimize%s: modal price %.2f (p=%.3f), mean profit %.1f, 95%% CI "
                "(%.1f, %.1f), n1=%d\n",
                suffix.c_str(), pt.price, pt.p_optimal, pt.mean_profit, pt.lo95, pt.hi95,
                input.n1);
    return 0;
}

int cmd_scenario(const RunConfig& config) {
    int worst = 0;
    for (const ModelVariant variant :
         {ModelVariant::no_demographics, ModelVariant::multiplicative_kappa,
          ModelVariant::no_history}) {
        RunConfig variant_config = config;
        variant_config.variant = variant;
        const std::string suffix = "_" + to_string(variant);
        worst = std::max(worst, cmd_fit(variant_config, suffix));
        worst = std::max(worst, cmd_optimize(variant_config, suffix));
    }
    return worst;
}

int cmd_diagnose(const RunConfig& config) {
    const PosteriorDraws draws =
        read_draws_csv(join(config.output_dir, "draws.csv"));
    const ModelVariant variant = variant_from_columns(draws);
    const auto truths = truths_from_manifest(config, variant);
    const DiagnosticsReport report = diagnose(draws, truths ? &*truths : nullptr);
    print_summary_table(summary_table(draws, variant, truths ? &*truths : nullptr));
    std::printf("diagnose: %d chains x %d retained, max rhat %.4f\n", draws.n_chains,
                draws.retained, report.max_rhat);
    return 0;
}

}  // namespace priceopt
