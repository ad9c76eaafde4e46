#include "priceopt/config.hpp"

#include <fstream>
#include <stdexcept>

namespace priceopt {

namespace {

void get_if(const nlohmann::json& doc, const char* key, double& out) {
    if (doc.contains(key)) out = doc.at(key).get<double>();
}
void get_if(const nlohmann::json& doc, const char* key, int& out) {
    if (doc.contains(key)) out = doc.at(key).get<int>();
}
void get_if(const nlohmann::json& doc, const char* key, std::int64_t& out) {
    if (doc.contains(key)) out = doc.at(key).get<std::int64_t>();
}
void get_if(const nlohmann::json& doc, const char* key, std::uint64_t& out) {
    if (doc.contains(key)) out = doc.at(key).get<std::uint64_t>();
}
void get_if(const nlohmann::json& doc, const char* key, bool& out) {
    if (doc.contains(key)) out = doc.at(key).get<bool>();
}
void get_if(const nlohmann::json& doc, const char* key, std::string& out) {
    if (doc.contains(key)) out = doc.at(key).get<std::string>();
}

std::vector<double> grid_from_json(const nlohmann::json& doc,
                                   const std::vector<double>& fallback) {
    if (doc.is_array()) return doc.get<std::vector<double>>();
    double lo = 0.0, hi = 0.0, step = 0.0;
    get_if(doc, "lo", lo);
    get_if(doc, "hi", hi);
    get_if(doc, "step", step);
    if (step <= 0.0 || hi < lo) return fallback;
    return make_price_grid(lo, hi, step);
}

}  // namespace

void RunConfig::validate() const {
    population.validate();
    true_params.validate();
    market.validate();
    conjoint.validate();
    sampler.validate();
    if (decision.n0 < 1) throw std::invalid_argument("RunConfig: decision.n0 must be >= 1");
    if (decision.ground_truth_replications < 1)
        throw std::invalid_argument("RunConfig: ground-truth replications must be >= 1");
    if (decision.price_grid().empty())
        throw std::invalid_argument("RunConfig: empty decision price grid");
    if (decision.subscriber_u != "estimated" && decision.subscriber_u != "fresh")
        throw std::invalid_argument("RunConfig: subscriber_u must be estimated or fresh");
}

RunConfig default_config(Preset preset) {
    RunConfig config;
    config.population = default_population_spec();
    config.true_params = default_true_parameters();
    config.conjoint.kappa = config.true_params.kappa;
    if (preset == Preset::desk) {
        config.market.n0 = 100;
        config.conjoint.participants_per_group = 50;
        config.sampler.chains = 4;
        config.sampler.iterations = 3000;
        config.sampler.warmup = 1000;
        config.sampler.thinning = 10;
        config.decision.n0 = 100;
    }
    return config;
}

RunConfig config_from_json(const nlohmann::json& doc, Preset preset) {
    RunConfig config = default_config(preset);
    get_if(doc, "seed", config.seed);
    if (doc.contains("variant"))
        config.variant = variant_from_string(doc.at("variant").get<std::string>());
    get_if(doc, "output_dir", config.output_dir);

    if (doc.contains("population")) {
        const auto& pop = doc.at("population");
        get_if(pop, "size", config.population.size);
        if (pop.contains("table")) {
            const auto& table = pop.at("table");
            for (int c = 0; c < kDemographicCells; ++c) {
                const Demographics d = demographics_from_cell(c);
                const std::string key = std::string(kAgeLabels[d.age]) + "|" +
                                        kGenderLabels[d.gender] + "|" +
                                        kLocationLabels[d.location];
                if (!table.contains(key))
                    throw std::runtime_error("population.table missing cell '" + key + "'");
                config.population.table[c] = table.at(key).get<double>();
            }
        }
    }

    if (doc.contains("true_params")) {
        const auto& tp = doc.at("true_params");
        ParameterVector& p = config.true_params;
        get_if(tp, "beta0", p.beta0);
        if (tp.contains("beta1")) {
            const auto v = tp.at("beta1").get<std::vector<double>>();
            if (v.size() != kAgeGroups)
                throw std::runtime_error("true_params.beta1 must have 4 entries");
            for (int a = 0; a < kAgeGroups; ++a) p.beta1[a] = v[a];
        }
        if (tp.contains("beta2")) {
            const auto v = tp.at("beta2").get<std::vector<double>>();
            if (v.size() != kGenders)
                throw std::runtime_error("true_params.beta2 must have 2 entries");
            for (int g = 0; g < kGenders; ++g) p.beta2[g] = v[g];
        }
        if (tp.contains("beta3")) {
            const auto v = tp.at("beta3").get<std::vector<double>>();
            if (v.size() != kLocations)
                throw std::runtime_error("true_params.beta3 must have 2 entries");
            for (int l = 0; l < kLocations; ++l) p.beta3[l] = v[l];
        }
        get_if(tp, "alpha1", p.alpha1);
        get_if(tp, "alpha2", p.alpha2);
        get_if(tp, "alpha3", p.alpha3);
        get_if(tp, "kappa", p.kappa);
        get_if(tp, "tau", p.tau);
        config.conjoint.kappa = p.kappa;
    }

    if (doc.contains("market")) {
        const auto& m = doc.at("market");
        get_if(m, "launch_price", config.market.launch_price);
        get_if(m, "horizon", config.market.horizon);
        get_if(m, "n0", config.market.n0);
        if (m.contains("price_changes")) {
            config.market.price_changes.clear();
            for (const auto& [period, increment] : m.at("price_changes").items())
                config.market.price_changes[std::stoi(period)] = increment.get<double>();
        }
    }

    if (doc.contains("conjoint")) {
        const auto& cj = doc.at("conjoint");
        get_if(cj, "participants_per_group", config.conjoint.participants_per_group);
        get_if(cj, "tasks_per_participant", config.conjoint.tasks_per_participant);
        if (cj.contains("price_grid"))
            config.conjoint.price_grid =
                grid_from_json(cj.at("price_grid"), config.conjoint.price_grid);
    }

    if (doc.contains("priors")) {
        const auto& pr = doc.at("priors");
        get_if(pr, "coef_sd", config.priors.coef_sd);
        get_if(pr, "tau_shape", config.priors.tau_shape);
        get_if(pr, "tau_scale", config.priors.tau_scale);
    }

    if (doc.contains("sampler")) {
        const auto& s = doc.at("sampler");
        get_if(s, "chains", config.sampler.chains);
        get_if(s, "iterations", config.sampler.iterations);
        get_if(s, "warmup", config.sampler.warmup);
        get_if(s, "thinning", config.sampler.thinning);
        get_if(s, "target_accept", config.sampler.target_accept);
        get_if(s, "max_tree_depth", config.sampler.max_tree_depth);
        get_if(s, "adapt_mass_matrix", config.sampler.adapt_mass_matrix);
    }

    if (doc.contains("decision")) {
        const auto& d = doc.at("decision");
        get_if(d, "n0", config.decision.n0);
        get_if(d, "variable_cost", config.decision.variable_cost);
        get_if(d, "replications", config.decision.ground_truth_replications);
        get_if(d, "subscriber_u", config.decision.subscriber_u);
        if (d.contains("price_grid")) {
            const auto& pg = d.at("price_grid");
            get_if(pg, "lo", config.decision.grid_lo);
            get_if(pg, "hi", config.decision.grid_hi);
            get_if(pg, "step", config.decision.grid_step);
        }
    }

    get_if(doc, "no_conjoint", config.no_conjoint);
    get_if(doc, "allow_nonconverged", config.allow_nonconverged);
    return config;
}

RunConfig load_config(const std::string& path, Preset preset) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path + ": invalid JSON: " + std::string(e.what()));
    }
    return config_from_json(doc, preset);
}

nlohmann::json config_to_json(const RunConfig& config) {
    nlohmann::json doc;
    doc["seed"] = config.seed;
    doc["variant"] = to_string(config.variant);
    doc["output_dir"] = config.output_dir;

    nlohmann::json table;
    for (int c = 0; c < kDemographicCells; ++c) {
        const Demographics d = demographics_from_cell(c);
        table[std::string(kAgeLabels[d.age]) + "|" + kGenderLabels[d.gender] + "|" +
              kLocationLabels[d.location]] = config.population.table[c];
    }
    doc["population"] = {{"size", config.population.size}, {"table", table}};

    const ParameterVector& p = config.true_params;
    doc["true_params"] = {
        {"beta0", p.beta0},
        {"beta1", std::vector<double>(p.beta1.begin(), p.beta1.end())},
        {"beta2", std::vector<double>(p.beta2.begin(), p.beta2.end())},
        {"beta3", std::vector<double>(p.beta3.begin(), p.beta3.end())},
        {"alpha1", p.alpha1},
        {"alpha2", p.alpha2},
        {"alpha3", p.alpha3},
        {"kappa", p.kappa},
        {"tau", p.tau}};

    nlohmann::json changes;
    for (const auto& [period, increment] : config.market.price_changes)
        changes[std::to_string(period)] = increment;
    doc["market"] = {{"launch_price", config.market.launch_price},
                     {"price_changes", changes},
                     {"horizon", config.market.horizon},
                     {"n0", config.market.n0}};

    doc["conjoint"] = {
        {"kappa", config.conjoint.kappa},
        {"participants_per_group", config.conjoint.participants_per_group},
        {"tasks_per_participant", config.conjoint.tasks_per_participant},
        {"price_grid", config.conjoint.price_grid}};

    doc["priors"] = {{"coef_sd", config.priors.coef_sd},
                     {"tau_shape", config.priors.tau_shape},
                     {"tau_scale", config.priors.tau_scale}};

    doc["sampler"] = {{"chains", config.sampler.chains},
                      {"iterations", config.sampler.iterations},
                      {"warmup", config.sampler.warmup},
                      {"thinning", config.sampler.thinning},
                      {"target_accept", config.sampler.target_accept},
                      {"max_tree_depth", config.sampler.max_tree_depth},
                      {"adapt_mass_matrix", config.sampler.adapt_mass_matrix}};

    doc["decision"] = {{"n0", config.decision.n0},
                       {"variable_cost", config.decision.variable_cost},
                       {"price_grid",
                        {{"lo", config.decision.grid_lo},
                         {"hi", config.decision.grid_hi},
                         {"step", config.decision.grid_step}}},
                       {"replications", config.decision.ground_truth_replications},
                       {"subscriber_u", config.decision.subscriber_u}};

    doc["no_conjoint"] = config.no_conjoint;
    doc["allow_nonconverged"] = config.allow_nonconverged;
    return doc;
}

}  // namespace priceopt
