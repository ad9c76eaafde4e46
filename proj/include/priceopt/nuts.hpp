#pragma once

// Dynamic Hamiltonian Monte Carlo: multinomial No-U-Turn sampling with dual
// averaging step-size adaptation and windowed diagonal mass-matrix
// estimation. Chains run independently (OpenMP across chains) with RNG
// streams derived from (seed, chain), so results are bit-identical for any
// thread count.

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "priceopt/rng.hpp"

namespace priceopt {

struct SamplerConfig {
    int chains = 12;
    int iterations = 20000;  // per chain, including warmup
    int warmup = 2000;
    int thinning = 50;       // applied to post-warmup draws
    double target_accept = 0.8;
    int max_tree_depth = 10;
    std::uint64_t seed = 0;

    bool adapt_mass_matrix = true;
    bool adapt_step_size = true;
    double init_step_size = 0.0;      // 0 = automatic search
    double max_energy_error = 1000.0; // divergence threshold

    int retained_per_chain() const { return (iterations - warmup) / thinning; }

    void validate() const {
        if (chains < 1) throw std::invalid_argument("SamplerConfig: chains must be >= 1");
        if (warmup < 0 || warmup >= iterations)
            throw std::invalid_argument("SamplerConfig: need 0 <= warmup < iterations");
        if (thinning < 1) throw std::invalid_argument("SamplerConfig: thinning must be >= 1");
        if (retained_per_chain() < 1)
            throw std::invalid_argument("SamplerConfig: no draws retained");
        if (!(target_accept > 0.0 && target_accept < 1.0))
            throw std::invalid_argument("SamplerConfig: target_accept must be in (0,1)");
        if (max_tree_depth < 0)
            throw std::invalid_argument("SamplerConfig: max_tree_depth must be >= 0");
    }
};

// Retained MCMC samples across chains with per-chain sampling statistics.
struct PosteriorDraws {
    std::vector<std::string> names;
    int n_chains = 0;
    int retained = 0;               // per chain
    std::vector<double> data;       // [chain][draw][param]
    std::vector<int> iteration_of;  // absolute iteration of each retained draw
    std::vector<int> divergences;      // per chain, post-warmup
    std::vector<double> mean_accept;   // per chain, post-warmup
    std::vector<std::int64_t> leapfrogs;  // per chain, post-warmup
    std::vector<double> step_size;     // per chain, after warmup

    int n_params() const { return static_cast<int>(names.size()); }
    int total_retained() const { return n_chains * retained; }
    double value(int chain, int draw, int param) const {
        return data[(static_cast<std::size_t>(chain) * retained + draw) * names.size() +
                    param];
    }
    int column(const std::string& name) const;
    bool has_column(const std::string& name) const;
    // Draws of one parameter, split out per chain.
    std::vector<std::vector<double>> column_chains(int param) const;
    std::vector<double> column_pooled(int param) const;
};

// Log density with gradient; must be safe to call concurrently.
using LogDensityGradient =
    std::function<double(std::span<const double>, std::span<double>)>;

// Produces a chain's initial point; may consume the chain's RNG stream.
using InitGenerator = std::function<std::vector<double>(int chain, RngStream&)>;

InitGenerator uniform_init(int dim, double radius);

// Optional mapping applied to each retained draw (e.g. constraining
// transforms, dropping nuisance coordinates).
struct RetainTransform {
    std::vector<std::string> names;
    std::function<void(std::span<const double>, std::span<double>)> apply;
};

PosteriorDraws nuts_sample(const LogDensityGradient& target, int dim,
                           const SamplerConfig& cfg, const InitGenerator& init,
                           const RetainTransform* transform = nullptr);

// One leapfrog step of size eps under a diagonal inverse mass matrix;
// exposed for the integrator tests.
void leapfrog(const LogDensityGradient& target, std::span<const double> inv_mass,
              double eps, std::vector<double>& q, std::vector<double>& p,
              std::vector<double>& grad, double& logp);

}  // namespace priceopt
