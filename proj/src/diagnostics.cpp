#include "priceopt/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "priceopt/stats.hpp"

namespace priceopt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t min_length(const ChainDraws& chains) {
    std::size_t n = std::numeric_limits<std::size_t>::max();
    for (const auto& c : chains) n = std::min(n, c.size());
    return chains.empty() ? 0 : n;
}

bool is_constant(const ChainDraws& chains) {
    double first = chains.front().front();
    for (const auto& c : chains)
        for (double v : c)
            if (v != first) return false;
    return true;
}

std::vector<double> pool(const ChainDraws& chains) {
    std::vector<double> all;
    for (const auto& c : chains) all.insert(all.end(), c.begin(), c.end());
    return all;
}

// Median fold: |x - median| emphasizes tail behavior under the same R-hat
// machinery.
ChainDraws fold(const ChainDraws& chains) {
    const double med = quantile_type7(pool(chains), 0.5);
    ChainDraws out = chains;
    for (auto& c : out)
        for (double& v : c) v = std::abs(v - med);
    return out;
}

// Biased (1/n) autocovariance of one chain at a given lag.
double autocov(const std::vector<double>& x, std::size_t lag, double mean) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < x.size(); ++i)
        s += (x[i] - mean) * (x[i + lag] - mean);
    return s / static_cast<double>(x.size());
}

}  // namespace

ChainDraws split_chains(const ChainDraws& chains) {
    ChainDraws halves;
    for (const auto& c : chains) {
        const std::size_t half = c.size() / 2;
        // Drop the middle draw of an odd-length chain.
        halves.emplace_back(c.begin(), c.begin() + half);
        halves.emplace_back(c.end() - half, c.end());
    }
    return halves;
}

ChainDraws rank_normalize(const ChainDraws& chains) {
    struct Entry {
        double value;
        std::size_t chain, pos;
    };
    std::vector<Entry> entries;
    for (std::size_t c = 0; c < chains.size(); ++c)
        for (std::size_t i = 0; i < chains[c].size(); ++i)
            entries.push_back({chains[c][i], c, i});
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.value < b.value; });

    const double total = static_cast<double>(entries.size());
    ChainDraws out(chains.size());
    for (std::size_t c = 0; c < chains.size(); ++c) out[c].resize(chains[c].size());

    // Average ranks over ties, then the fractional rank transform
    // (r - 3/8) / (S + 1/4) through the normal quantile.
    std::size_t i = 0;
    while (i < entries.size()) {
        std::size_t j = i;
        while (j < entries.size() && entries[j].value == entries[i].value) ++j;
        const double rank = 0.5 * static_cast<double>(i + 1 + j);  // average of i+1..j
        const double z = normal_quantile((rank - 0.375) / (total + 0.25));
        for (std::size_t k = i; k < j; ++k) out[entries[k].chain][entries[k].pos] = z;
        i = j;
    }
    return out;
}

double rhat_basic(const ChainDraws& chains) {
    const std::size_t m = chains.size();
    const std::size_t n = min_length(chains);
    if (m < 2 || n < 2) return kNaN;
    if (is_constant(chains)) return kNaN;

    std::vector<double> means(m), vars(m);
    for (std::size_t c = 0; c < m; ++c) {
        means[c] = mean_of(std::span<const double>(chains[c].data(), n));
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            s += (chains[c][i] - means[c]) * (chains[c][i] - means[c]);
        vars[c] = s / static_cast<double>(n - 1);
    }
    const double w = mean_of(vars);
    const double b_over_n = sample_variance(means);
    if (!(w > 0.0)) return kNaN;
    const double var_plus =
        (static_cast<double>(n - 1) / static_cast<double>(n)) * w + b_over_n;
    return std::sqrt(var_plus / w);
}

double ess_basic(const ChainDraws& chains) {
    const std::size_t m = chains.size();
    const std::size_t n = min_length(chains);
    if (m < 1 || n < 4) return kNaN;
    if (is_constant(chains)) return kNaN;

    std::vector<double> means(m), acov0(m);
    for (std::size_t c = 0; c < m; ++c) {
        means[c] = mean_of(std::span<const double>(chains[c].data(), n));
        acov0[c] = autocov(chains[c], 0, means[c]);
    }
    const double nd = static_cast<double>(n);
    double mean_var = 0.0;
    for (double a : acov0) mean_var += a * nd / (nd - 1.0);
    mean_var /= static_cast<double>(m);
    double var_plus = mean_var * (nd - 1.0) / nd;
    if (m > 1) var_plus += sample_variance(means);
    if (!(var_plus > 0.0)) return kNaN;

    auto mean_acov = [&](std::size_t lag) {
        double s = 0.0;
        for (std::size_t c = 0; c < m; ++c) s += autocov(chains[c], lag, means[c]);
        return s / static_cast<double>(m);
    };

    // Geyer's initial positive sequence over lag pairs, then the monotone
    // correction.
    std::vector<double> rho;
    rho.push_back(1.0);
    rho.push_back(1.0 - (mean_var - mean_acov(1)) / var_plus);
    std::size_t s = 1;
    double rho_even = 1.0, rho_odd = rho[1];
    while (s < n - 4 && rho_even + rho_odd > 0.0) {
        rho_even = 1.0 - (mean_var - mean_acov(s + 1)) / var_plus;
        rho_odd = 1.0 - (mean_var - mean_acov(s + 2)) / var_plus;
        if (rho_even + rho_odd >= 0.0) {
            rho.push_back(rho_even);
            rho.push_back(rho_odd);
        }
        s += 2;
    }
    for (std::size_t k = 3; k + 1 < rho.size(); k += 2) {
        if (rho[k] + rho[k + 1] > rho[k - 2] + rho[k - 1]) {
            rho[k] = 0.5 * (rho[k - 2] + rho[k - 1]);
            rho[k + 1] = rho[k];
        }
    }

    const double total = static_cast<double>(m) * nd;
    double tau = -1.0;
    for (double r : rho) tau += 2.0 * r;
    tau = std::max(tau, 1.0 / std::log10(total));  // floor against superefficient noise
    return total / tau;
}

double split_rhat(const ChainDraws& chains) {
    if (chains.size() < 2 || min_length(chains) < 4) return kNaN;
    if (is_constant(chains)) return kNaN;
    const ChainDraws halves = split_chains(chains);
    const double bulk = rhat_basic(rank_normalize(halves));
    const double tail = rhat_basic(rank_normalize(fold(halves)));
    if (std::isnan(bulk) || std::isnan(tail)) return std::isnan(bulk) ? tail : bulk;
    return std::max(bulk, tail);
}

double ess_bulk(const ChainDraws& chains) {
    if (chains.size() < 2 || min_length(chains) < 4) return kNaN;
    if (is_constant(chains)) return kNaN;
    return ess_basic(rank_normalize(split_chains(chains)));
}

double ess_tail(const ChainDraws& chains) {
    if (chains.size() < 2 || min_length(chains) < 4) return kNaN;
    if (is_constant(chains)) return kNaN;
    const ChainDraws halves = split_chains(chains);
    const auto pooled = pool(halves);
    double ess_min = std::numeric_limits<double>::infinity();
    for (double p : {0.05, 0.95}) {
        const double q = quantile_type7(pooled, p);
        ChainDraws indicator(halves.size());
        for (std::size_t c = 0; c < halves.size(); ++c) {
            indicator[c].resize(halves[c].size());
            for (std::size_t i = 0; i < halves[c].size(); ++i)
                indicator[c][i] = halves[c][i] <= q ? 1.0 : 0.0;
        }
        ess_min = std::min(ess_min, ess_basic(indicator));
    }
    return ess_min;
}

double mcse_mean(const ChainDraws& chains) {
    const double ess = ess_bulk(chains);
    if (std::isnan(ess)) return kNaN;
    return std::sqrt(sample_variance(pool(chains)) / ess);
}

std::vector<ParameterSummary> summarize(const PosteriorDraws& draws,
                                        const std::map<std::string, double>* true_values,
                                        bool include_individual) {
    std::vector<ParameterSummary> out;
    const double cap = kEssReportCap * draws.total_retained();
    for (int p = 0; p < draws.n_params(); ++p) {
        const std::string& name = draws.names[p];
        if (!include_individual &&
            (name.starts_with("u[") || name.starts_with("z[")))
            continue;
        ParameterSummary s;
        s.name = name;
        const auto pooled = draws.column_pooled(p);
        const auto chains = draws.column_chains(p);
        s.mean = mean_of(pooled);
        s.sd = pooled.size() > 1 ? std::sqrt(sample_variance(pooled)) : 0.0;
        s.q025 = quantile_type7(pooled, 0.025);
        s.q975 = quantile_type7(pooled, 0.975);
        s.rhat = split_rhat(chains);
        s.ess_bulk = std::min(ess_bulk(chains), cap);
        s.ess_tail = std::min(ess_tail(chains), cap);
        if (true_values) {
            const auto it = true_values->find(name);
            if (it != true_values->end()) s.true_value = it->second;
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<ParameterSummary> summary_table(const PosteriorDraws& draws,
                                            ModelVariant variant,
                                            const std::map<std::string, double>* true_values) {
    const auto stats = summarize(draws, true_values, false);
    auto find = [&](const std::string& name) -> const ParameterSummary* {
        for (const auto& s : stats)
            if (s.name == name) return &s;
        return nullptr;
    };

    std::vector<std::string> order;
    std::vector<bool> pinned_flag;
    auto row = [&](const std::string& name, bool pinned = false) {
        order.push_back(name);
        pinned_flag.push_back(pinned);
    };
    row("beta0");
    if (variant_has_demographics(variant)) {
        for (int a = 0; a < kAgeGroups; ++a)
            row(std::string("beta1[") + kAgeLabels[a] + "]", a == 0);
        for (int g = 0; g < kGenders; ++g)
            row(std::string("beta2[") + kGenderLabels[g] + "]", g == 0);
        for (int l = 0; l < kLocations; ++l)
            row(std::string("beta3[") + kLocationLabels[l] + "]", l == 0);
    }
    row("tau");
    row("alpha1");
    if (variant_has_history(variant)) {
        row("alpha2");
        row("alpha3");
    }
    row("kappa");

    std::vector<ParameterSummary> table;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (pinned_flag[i]) {
            ParameterSummary s;
            s.name = order[i];
            s.pinned = true;
            s.true_value = 0.0;
            s.mean = s.sd = s.q025 = s.q975 = s.rhat = s.ess_bulk = s.ess_tail = kNaN;
            table.push_back(std::move(s));
        } else if (const ParameterSummary* s = find(order[i])) {
            table.push_back(*s);
        }
    }
    return table;
}

DiagnosticsReport diagnose(const PosteriorDraws& draws,
                           const std::map<std::string, double>* true_values) {
    DiagnosticsReport report;
    report.parameters = summarize(draws, true_values, false);
    report.retained_per_chain = draws.retained;
    report.total_retained = draws.total_retained();
    report.max_rhat = 0.0;
    for (const auto& p : report.parameters)
        if (!std::isnan(p.rhat)) report.max_rhat = std::max(report.max_rhat, p.rhat);
    for (int c = 0; c < draws.n_chains; ++c) {
        ChainStats cs;
        cs.chain = c + 1;
        cs.divergences = c < static_cast<int>(draws.divergences.size())
                             ? draws.divergences[c]
                             : 0;
        cs.mean_accept = c < static_cast<int>(draws.mean_accept.size())
                             ? draws.mean_accept[c]
                             : 0.0;
        report.total_divergences += cs.divergences;
        report.chains.push_back(cs);
    }
    return report;
}

std::map<std::string, double> true_value_map(const ParameterVector& params,
                                             ModelVariant variant) {
    std::map<std::string, double> m;
    m["beta0"] = params.beta0;
    if (variant_has_demographics(variant)) {
        for (int a = 0; a < kAgeGroups; ++a)
            m[std::string("beta1[") + kAgeLabels[a] + "]"] = params.beta1[a];
        for (int g = 0; g < kGenders; ++g)
            m[std::string("beta2[") + kGenderLabels[g] + "]"] = params.beta2[g];
        for (int l = 0; l < kLocations; ++l)
            m[std::string("beta3[") + kLocationLabels[l] + "]"] = params.beta3[l];
    }
    m["tau"] = params.tau;
    m["alpha1"] = params.alpha1;
    if (variant_has_history(variant)) {
        m["alpha2"] = params.alpha2;
        m["alpha3"] = params.alpha3;
    }
    m["kappa"] = params.kappa;
    return m;
}

}  // namespace priceopt
