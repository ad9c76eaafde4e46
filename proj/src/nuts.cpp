#include "priceopt/nuts.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "priceopt/stats.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace priceopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_add_exp(double a, double b) {
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    if (hi == -kInf) return -kInf;
    return hi + std::log1p(std::exp(lo - hi));
}

struct PhasePoint {
    std::vector<double> q;
    std::vector<double> p;
    std::vector<double> grad;
    double logp = 0.0;
};

struct Proposal {
    std::vector<double> q;
    std::vector<double> grad;
    double logp = 0.0;
};

// Dual averaging of log(step size) toward the target acceptance rate
// (Hoffman & Gelman constants).
class DualAveraging {
public:
    void restart(double eps) {
        mu_ = std::log(10.0 * eps);
        log_eps_ = std::log(eps);
        log_eps_bar_ = 0.0;
        h_bar_ = 0.0;
        count_ = 0;
    }
    void update(double accept_prob, double target) {
        ++count_;
        const double m = static_cast<double>(count_);
        h_bar_ = (1.0 - 1.0 / (m + kT0)) * h_bar_ +
                 (target - accept_prob) / (m + kT0);
        log_eps_ = mu_ - std::sqrt(m) / kGamma * h_bar_;
        const double w = std::pow(m, -kKappa);
        log_eps_bar_ = w * log_eps_ + (1.0 - w) * log_eps_bar_;
    }
    double eps() const { return std::exp(log_eps_); }
    double eps_bar() const { return std::exp(log_eps_bar_); }

private:
    static constexpr double kGamma = 0.05;
    static constexpr double kT0 = 10.0;
    static constexpr double kKappa = 0.75;
    double mu_ = 0.0, log_eps_ = 0.0, log_eps_bar_ = 0.0, h_bar_ = 0.0;
    long count_ = 0;
};

// Warmup phases: step-size-only buffers around expanding mass-matrix
// windows, Stan-style.
struct AdaptationSchedule {
    std::vector<int> window_ends;  // iterations (1-based) closing a mass window
    int window_begin = 0;
    int window_close = 0;

    AdaptationSchedule(int warmup, bool adapt_mass) {
        if (!adapt_mass || warmup < 20) return;
        int init_buffer = 75, term_buffer = 50, base_window = 25;
        if (init_buffer + term_buffer + base_window > warmup) {
            init_buffer = static_cast<int>(0.15 * warmup);
            term_buffer = static_cast<int>(0.10 * warmup);
            base_window = warmup - init_buffer - term_buffer;
        }
        int start = init_buffer;
        int width = base_window;
        const int last = warmup - term_buffer;
        while (start < last) {
            int end = start + width;
            if (end + 2 * width > last) end = last;  // absorb the remainder
            window_ends.push_back(end);
            start = end;
            width *= 2;
        }
        window_begin = init_buffer;
        window_close = last;
    }

    bool in_window(int iter) const {  // 1-based warmup iteration
        return !window_ends.empty() && iter > window_begin && iter <= window_close;
    }
    bool closes_window(int iter) const {
        return std::find(window_ends.begin(), window_ends.end(), iter) !=
               window_ends.end();
    }
};

struct ChainResult {
    std::vector<double> draws;
    std::vector<int> iteration_of;
    int divergences = 0;
    double mean_accept = 0.0;
    std::int64_t leapfrogs = 0;
    double step_size = 0.0;
};

class ChainRunner {
public:
    ChainRunner(const LogDensityGradient& target, int dim, const SamplerConfig& cfg,
                const InitGenerator& init, const RetainTransform* transform, int chain)
        : target_(target),
          dim_(dim),
          cfg_(cfg),
          transform_(transform),
          rng_(cfg.seed, kStreamChain, static_cast<std::uint64_t>(chain)),
          inv_mass_(dim, 1.0) {
        initialize(init, chain);
    }

    ChainResult run() {
        ChainResult result;
        const int retained = cfg_.retained_per_chain();
        const int out_dim = transform_ ? static_cast<int>(transform_->names.size()) : dim_;
        result.draws.reserve(static_cast<std::size_t>(retained) * out_dim);
        result.iteration_of.reserve(retained);

        AdaptationSchedule schedule(cfg_.warmup, cfg_.adapt_mass_matrix);
        eps_ = cfg_.init_step_size > 0.0 ? cfg_.init_step_size : find_reasonable_eps();
        DualAveraging da;
        da.restart(eps_);

        std::vector<Welford> acc(cfg_.adapt_mass_matrix ? dim_ : 0);
        double accept_sum = 0.0;
        int accept_count = 0;

        for (int iter = 1; iter <= cfg_.iterations; ++iter) {
            const bool warm = iter <= cfg_.warmup;
            const auto stats = transition();

            if (warm) {
                if (cfg_.adapt_step_size) {
                    da.update(stats.accept_prob, cfg_.target_accept);
                    eps_ = da.eps();
                }
                if (schedule.in_window(iter)) {
                    for (int i = 0; i < dim_; ++i) acc[i].add(cur_.q[i]);
                    if (schedule.closes_window(iter)) {
                        update_inv_mass(acc);
                        acc.assign(dim_, Welford());
                        eps_ = find_reasonable_eps();
                        da.restart(eps_);
                    }
                }
                if (iter == cfg_.warmup && cfg_.adapt_step_size) eps_ = da.eps_bar();
            } else {
                result.divergences += stats.divergent ? 1 : 0;
                result.leapfrogs += stats.n_leapfrog;
                accept_sum += stats.accept_prob;
                ++accept_count;
                const int post = iter - cfg_.warmup;
                if (post % cfg_.thinning == 0 &&
                    static_cast<int>(result.iteration_of.size()) < retained) {
                    store_draw(result.draws);
                    result.iteration_of.push_back(iter);
                }
            }
        }
        result.mean_accept = accept_count > 0 ? accept_sum / accept_count : 0.0;
        result.step_size = eps_;
        return result;
    }

private:
    struct TransitionStats {
        double accept_prob = 0.0;
        bool divergent = false;
        int n_leapfrog = 0;
    };

    void initialize(const InitGenerator& init, int chain) {
        for (int attempt = 0; attempt < 100; ++attempt) {
            std::vector<double> q = init(chain, rng_);
            if (static_cast<int>(q.size()) != dim_)
                throw std::invalid_argument("nuts_sample: init point has wrong dimension");
            std::vector<double> grad(dim_, 0.0);
            const double logp = target_(q, grad);
            bool ok = std::isfinite(logp);
            for (double g : grad) ok = ok && std::isfinite(g);
            if (ok) {
                cur_ = {std::move(q), std::vector<double>(dim_, 0.0), std::move(grad), logp};
                return;
            }
        }
        throw std::runtime_error(
            "nuts_sample: target not finite at any of 100 initialization attempts");
    }

    double kinetic(const std::vector<double>& p) const {
        double k = 0.0;
        for (int i = 0; i < dim_; ++i) k += p[i] * p[i] * inv_mass_[i];
        return 0.5 * k;
    }

    void draw_momentum(std::vector<double>& p) {
        for (int i = 0; i < dim_; ++i) p[i] = rng_.normal() / std::sqrt(inv_mass_[i]);
    }

    // Evaluates the target, mapping non-finite positions to -inf rather than
    // propagating them into the gradient.
    double safe_logp(const std::vector<double>& q, std::vector<double>& grad) const {
        for (double v : q)
            if (!std::isfinite(v)) {
                std::fill(grad.begin(), grad.end(), 0.0);
                return -kInf;
            }
        return target_(q, grad);
    }

    void step(PhasePoint& z, double eps_signed) const {
        for (int i = 0; i < dim_; ++i) z.p[i] += 0.5 * eps_signed * z.grad[i];
        for (int i = 0; i < dim_; ++i) z.q[i] += eps_signed * inv_mass_[i] * z.p[i];
        z.logp = safe_logp(z.q, z.grad);
        for (int i = 0; i < dim_; ++i) z.p[i] += 0.5 * eps_signed * z.grad[i];
    }

    // No-U-turn condition across a span, endpoints in trajectory order.
    bool no_uturn(const PhasePoint& minus, const PhasePoint& plus) const {
        double along_minus = 0.0, along_plus = 0.0;
        for (int i = 0; i < dim_; ++i) {
            const double delta = plus.q[i] - minus.q[i];
            along_minus += delta * inv_mass_[i] * minus.p[i];
            along_plus += delta * inv_mass_[i] * plus.p[i];
        }
        return along_minus >= 0.0 && along_plus >= 0.0;
    }

    struct TreeState {
        double log_sum_w = -kInf;
        Proposal proposal;
        bool valid = false;
    };

    // Builds 2^depth leapfrog states extending `edge` in direction `dir`;
    // trajectory-order endpoints of the subtree land in (span_minus,
    // span_plus) for the caller's U-turn checks.
    TreeState build_tree(int depth, int dir, PhasePoint& edge, double h0,
                         PhasePoint& span_minus, PhasePoint& span_plus,
                         TransitionStats& stats) {
        TreeState out;
        if (depth == 0) {
            step(edge, dir * eps_);
            ++stats.n_leapfrog;
            const double h = -edge.logp + kinetic(edge.p);
            const double delta = h0 - h;  // > 0 when energy decreased
            if (!(delta >= -cfg_.max_energy_error)) {
                stats.divergent = true;
                return out;  // invalid
            }
            stats.accept_prob += std::min(1.0, std::exp(delta));
            out.log_sum_w = delta;
            out.proposal = {edge.q, edge.grad, edge.logp};
            out.valid = true;
            span_minus = edge;
            span_plus = edge;
            return out;
        }

        PhasePoint inner_minus, inner_plus;
        TreeState first = build_tree(depth - 1, dir, edge, h0, span_minus, span_plus, stats);
        if (!first.valid) return out;
        TreeState second =
            build_tree(depth - 1, dir, edge, h0, inner_minus, inner_plus, stats);
        if (!second.valid) return out;

        // The two halves meet in integration order; in trajectory order the
        // second half extends the dir side of the span.
        if (dir > 0)
            span_plus = inner_plus;
        else
            span_minus = inner_minus;

        out.log_sum_w = log_add_exp(first.log_sum_w, second.log_sum_w);
        const double p_second = std::exp(second.log_sum_w - out.log_sum_w);
        out.proposal = rng_.uniform() < p_second ? std::move(second.proposal)
                                                 : std::move(first.proposal);
        out.valid = no_uturn(span_minus, span_plus);
        return out;
    }

    TransitionStats transition() {
        TransitionStats stats;
        std::vector<double> p0(dim_);
        draw_momentum(p0);
        const double h0 = -cur_.logp + kinetic(p0);

        PhasePoint zminus{cur_.q, p0, cur_.grad, cur_.logp};
        PhasePoint zplus = zminus;
        Proposal sample{cur_.q, cur_.grad, cur_.logp};
        double log_sum_w = 0.0;  // weight of the initial state

        const int max_doublings = std::max(1, cfg_.max_tree_depth);
        for (int depth = 0; depth < max_doublings; ++depth) {
            const int dir = (rng_.next() & 1u) ? 1 : -1;
            PhasePoint edge = dir > 0 ? zplus : zminus;
            PhasePoint span_minus, span_plus;
            TreeState subtree =
                build_tree(depth, dir, edge, h0, span_minus, span_plus, stats);
            if (!subtree.valid) break;
            if (dir > 0)
                zplus = std::move(edge);
            else
                zminus = std::move(edge);

            // Biased progressive sampling toward the new subtree.
            if (subtree.log_sum_w > log_sum_w ||
                rng_.uniform() < std::exp(subtree.log_sum_w - log_sum_w))
                sample = std::move(subtree.proposal);
            log_sum_w = log_add_exp(log_sum_w, subtree.log_sum_w);

            if (!no_uturn(zminus, zplus)) break;
        }

        cur_.q = std::move(sample.q);
        cur_.grad = std::move(sample.grad);
        cur_.logp = sample.logp;
        stats.accept_prob =
            stats.n_leapfrog > 0 ? stats.accept_prob / stats.n_leapfrog : 0.0;
        return stats;
    }

    double find_reasonable_eps() {
        double eps = 1.0;
        std::vector<double> p0(dim_);
        draw_momentum(p0);
        const double h0 = -cur_.logp + kinetic(p0);
        auto accept_at = [&](double e) {
            PhasePoint z{cur_.q, p0, cur_.grad, cur_.logp};
            step(z, e);
            const double h = -z.logp + kinetic(z.p);
            const double a = std::exp(h0 - h);
            return std::isfinite(a) ? std::min(a, 1.0) : 0.0;
        };
        double a = accept_at(eps);
        const bool grow = a > 0.5;
        for (int i = 0; i < 100; ++i) {
            eps *= grow ? 2.0 : 0.5;
            if (eps > 1e7 || eps < 1e-10) break;
            a = accept_at(eps);
            if (grow ? a <= 0.5 : a >= 0.5) break;
        }
        return eps;
    }

    void update_inv_mass(const std::vector<Welford>& acc) {
        const double n = static_cast<double>(acc[0].count());
        if (n < 2) return;
        const double shrink = n / (n + 5.0);
        for (int i = 0; i < dim_; ++i) {
            const double v = shrink * acc[i].variance() + 1e-3 * (1.0 - shrink);
            inv_mass_[i] = std::max(v, 1e-12);
        }
    }

    void store_draw(std::vector<double>& out) {
        if (transform_) {
            const std::size_t old = out.size();
            out.resize(old + transform_->names.size());
            transform_->apply(cur_.q, std::span<double>(out).subspan(old));
        } else {
            out.insert(out.end(), cur_.q.begin(), cur_.q.end());
        }
    }

    const LogDensityGradient& target_;
    int dim_;
    SamplerConfig cfg_;
    const RetainTransform* transform_;
    RngStream rng_;
    std::vector<double> inv_mass_;
    PhasePoint cur_;  // p unused between iterations
    double eps_ = 1.0;
};

}  // namespace

InitGenerator uniform_init(int dim, double radius) {
    return [dim, radius](int /*chain*/, RngStream& rng) {
        std::vector<double> q(dim);
        for (double& v : q) v = rng.uniform(-radius, radius);
        return q;
    };
}

int PosteriorDraws::column(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    throw std::out_of_range("PosteriorDraws: no column named " + name);
}

bool PosteriorDraws::has_column(const std::string& name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
}

std::vector<std::vector<double>> PosteriorDraws::column_chains(int param) const {
    std::vector<std::vector<double>> out(n_chains);
    for (int c = 0; c < n_chains; ++c) {
        out[c].resize(retained);
        for (int k = 0; k < retained; ++k) out[c][k] = value(c, k, param);
    }
    return out;
}

std::vector<double> PosteriorDraws::column_pooled(int param) const {
    std::vector<double> out;
    out.reserve(total_retained());
    for (int c = 0; c < n_chains; ++c)
        for (int k = 0; k < retained; ++k) out.push_back(value(c, k, param));
    return out;
}

PosteriorDraws nuts_sample(const LogDensityGradient& target, int dim,
                           const SamplerConfig& cfg, const InitGenerator& init,
                           const RetainTransform* transform) {
    cfg.validate();
    if (dim < 1) throw std::invalid_argument("nuts_sample: dim must be >= 1");

    PosteriorDraws draws;
    if (transform) {
        draws.names = transform->names;
    } else {
        draws.names.reserve(dim);
        for (int i = 0; i < dim; ++i) draws.names.push_back("x" + std::to_string(i));
    }
    draws.n_chains = cfg.chains;
    draws.retained = cfg.retained_per_chain();
    draws.data.resize(static_cast<std::size_t>(cfg.chains) * draws.retained *
                      draws.names.size());
    draws.divergences.resize(cfg.chains);
    draws.mean_accept.resize(cfg.chains);
    draws.leapfrogs.resize(cfg.chains);
    draws.step_size.resize(cfg.chains);

    std::vector<std::exception_ptr> errors(cfg.chains);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
    for (int c = 0; c < cfg.chains; ++c) {
        try {
            ChainRunner runner(target, dim, cfg, init, transform, c);
            ChainResult result = runner.run();
            std::copy(result.draws.begin(), result.draws.end(),
                      draws.data.begin() + static_cast<std::size_t>(c) * draws.retained *
                                               draws.names.size());
            if (c == 0) draws.iteration_of = result.iteration_of;
            draws.divergences[c] = result.divergences;
            draws.mean_accept[c] = result.mean_accept;
            draws.leapfrogs[c] = result.leapfrogs;
            draws.step_size[c] = result.step_size;
        } catch (...) {
            errors[c] = std::current_exception();
        }
    }
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);
    return draws;
}

void leapfrog(const LogDensityGradient& target, std::span<const double> inv_mass,
              double eps, std::vector<double>& q, std::vector<double>& p,
              std::vector<double>& grad, double& logp) {
    const int dim = static_cast<int>(q.size());
    for (int i = 0; i < dim; ++i) p[i] += 0.5 * eps * grad[i];
    for (int i = 0; i < dim; ++i) q[i] += eps * inv_mass[i] * p[i];
    logp = target(q, grad);
    for (int i = 0; i < dim; ++i) p[i] += 0.5 * eps * grad[i];
}

}  // namespace priceopt
