#include "priceopt/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace priceopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Beyond these the likelihood has no support worth resolving; bail out and
// let the sampler treat the point as divergent.
constexpr double kMaxLogQ = 700.0;
constexpr double kMaxLogTau = 40.0;
constexpr int kCustomerBlock = 64;

double eval_bailout(std::span<double> grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    return -std::numeric_limits<double>::infinity();
}

// Block-local accumulators for the observation reduction.
struct Partial {
    double ll = 0.0;
    double a1 = 0.0, a2 = 0.0, a3 = 0.0, kap = 0.0;
    double w_total = 0.0;
    double w_age[kAgeGroups] = {0, 0, 0, 0};
    double w_gender[kGenders] = {0, 0};
    double w_loc[kLocations] = {0, 0};
    double wu = 0.0;
    bool out_of_range = false;
};

}  // namespace

ParameterLayout make_layout(ModelVariant variant, const ObservationSet& data) {
    ParameterLayout layout;
    layout.variant = variant;
    layout.has_demographics = variant_has_demographics(variant);
    layout.has_history = variant_has_history(variant);

    int next = 0;
    auto add = [&](int& slot, const std::string& name) {
        slot = next++;
        layout.global_names.push_back(name);
    };
    add(layout.idx_beta0, "beta0");
    if (layout.has_demographics) {
        for (int a = 1; a < kAgeGroups; ++a)
            add(layout.idx_beta1[a], std::string("beta1[") + kAgeLabels[a] + "]");
        for (int g = 1; g < kGenders; ++g)
            add(layout.idx_beta2[g], std::string("beta2[") + kGenderLabels[g] + "]");
        for (int l = 1; l < kLocations; ++l)
            add(layout.idx_beta3[l], std::string("beta3[") + kLocationLabels[l] + "]");
    }
    add(layout.idx_tau, "tau");
    add(layout.idx_alpha1, "alpha1");
    if (layout.has_history) {
        add(layout.idx_alpha2, "alpha2");
        add(layout.idx_alpha3, "alpha3");
    }
    add(layout.idx_kappa, "kappa");
    layout.n_globals = next;

    layout.customer_ids.reserve(data.demographics.size());
    for (const Observation& rec : data.records) layout.customer_ids.push_back(rec.customer_id);
    std::sort(layout.customer_ids.begin(), layout.customer_ids.end());
    layout.customer_ids.erase(
        std::unique(layout.customer_ids.begin(), layout.customer_ids.end()),
        layout.customer_ids.end());
    return layout;
}

ParameterVector decode_parameters(std::span<const double> x, const ParameterLayout& layout) {
    ParameterVector p;
    p.beta0 = x[layout.idx_beta0];
    if (layout.has_demographics) {
        for (int a = 1; a < kAgeGroups; ++a) p.beta1[a] = x[layout.idx_beta1[a]];
        for (int g = 1; g < kGenders; ++g) p.beta2[g] = x[layout.idx_beta2[g]];
        for (int l = 1; l < kLocations; ++l) p.beta3[l] = x[layout.idx_beta3[l]];
    }
    p.tau = std::exp(x[layout.idx_tau]);
    p.alpha1 = x[layout.idx_alpha1];
    if (layout.has_history) {
        p.alpha2 = x[layout.idx_alpha2];
        p.alpha3 = x[layout.idx_alpha3];
    }
    p.kappa = x[layout.idx_kappa];
    return p;
}

std::vector<double> encode_parameters(const ParameterVector& params,
                                      std::span<const double> z,
                                      const ParameterLayout& layout) {
    if (!(params.tau > 0.0)) throw std::invalid_argument("encode_parameters: tau must be > 0");
    std::vector<double> x(layout.dim(), 0.0);
    x[layout.idx_beta0] = params.beta0;
    if (layout.has_demographics) {
        for (int a = 1; a < kAgeGroups; ++a) x[layout.idx_beta1[a]] = params.beta1[a];
        for (int g = 1; g < kGenders; ++g) x[layout.idx_beta2[g]] = params.beta2[g];
        for (int l = 1; l < kLocations; ++l) x[layout.idx_beta3[l]] = params.beta3[l];
    }
    x[layout.idx_tau] = std::log(params.tau);
    x[layout.idx_alpha1] = params.alpha1;
    if (layout.has_history) {
        x[layout.idx_alpha2] = params.alpha2;
        x[layout.idx_alpha3] = params.alpha3;
    }
    x[layout.idx_kappa] = params.kappa;
    for (std::size_t i = 0; i < z.size() && i < layout.customer_ids.size(); ++i)
        x[layout.n_globals + i] = z[i];
    return x;
}

PosteriorModel::PosteriorModel(const ObservationSet& data, ModelVariant variant,
                               PriorConfig priors)
    : layout_(make_layout(variant, data)), priors_(priors) {
    const auto n_cust = layout_.customer_ids.size();
    const auto n_rec = data.records.size();

    age_.resize(n_cust);
    gender_.resize(n_cust);
    location_.resize(n_cust);
    for (std::size_t i = 0; i < n_cust; ++i) {
        const auto it = data.demographics.find(layout_.customer_ids[i]);
        if (it == data.demographics.end())
            throw std::invalid_argument("PosteriorModel: missing demographics for customer " +
                                        std::to_string(layout_.customer_ids[i]));
        age_[i] = static_cast<std::uint8_t>(it->second.age);
        gender_[i] = static_cast<std::uint8_t>(it->second.gender);
        location_[i] = static_cast<std::uint8_t>(it->second.location);
    }

    // Group records by customer, keeping record order within each customer.
    std::vector<std::int32_t> cust_of(n_rec);
    rec_offset_.assign(n_cust + 1, 0);
    for (std::size_t r = 0; r < n_rec; ++r) {
        const auto it = std::lower_bound(layout_.customer_ids.begin(),
                                         layout_.customer_ids.end(),
                                         data.records[r].customer_id);
        cust_of[r] = static_cast<std::int32_t>(it - layout_.customer_ids.begin());
        ++rec_offset_[cust_of[r] + 1];
    }
    std::partial_sum(rec_offset_.begin(), rec_offset_.end(), rec_offset_.begin());

    price_.resize(n_rec);
    log_s1_.resize(n_rec);
    s_zero_.resize(n_rec);
    conjoint_.resize(n_rec);
    outcome_.resize(n_rec);
    std::vector<std::int32_t> cursor(rec_offset_.begin(), rec_offset_.end() - 1);
    for (std::size_t r = 0; r < n_rec; ++r) {
        const Observation& rec = data.records[r];
        if (rec.s_periods < 0)
            throw std::invalid_argument("PosteriorModel: negative s_periods");
        const std::int32_t slot = cursor[cust_of[r]]++;
        price_[slot] = rec.price;
        log_s1_[slot] = std::log(static_cast<double>(rec.s_periods) + 1.0);
        s_zero_[slot] = rec.s_periods == 0 ? 1 : 0;
        conjoint_[slot] = rec.conjoint_flag ? 1 : 0;
        outcome_[slot] = rec.outcome ? 1 : 0;
    }

    for (std::size_t start = 0; start < n_cust; start += kCustomerBlock)
        block_start_.push_back(static_cast<std::int32_t>(start));
    block_start_.push_back(static_cast<std::int32_t>(n_cust));
}

double PosteriorModel::logp_grad(std::span<const double> x, std::span<double> grad) const {
    return eval(x, grad, true);
}

double PosteriorModel::logp_grad_serial(std::span<const double> x,
                                        std::span<double> grad) const {
    return eval(x, grad, false);
}

double PosteriorModel::eval(std::span<const double> x, std::span<double> grad,
                            bool parallel) const {
    const int dim = layout_.dim();
    if (static_cast<int>(x.size()) != dim || static_cast<int>(grad.size()) != dim)
        throw std::invalid_argument("PosteriorModel: vector length does not match layout");
    for (double v : x)
        if (!std::isfinite(v))
            throw std::invalid_argument("PosteriorModel: non-finite input");

    std::fill(grad.begin(), grad.end(), 0.0);

    const ParameterLayout& L = layout_;
    const double log_tau = x[L.idx_tau];
    if (std::abs(log_tau) > kMaxLogTau) return -kInf;
    const double tau = std::exp(log_tau);
    const double alpha1 = x[L.idx_alpha1];
    const double alpha2 = L.has_history ? x[L.idx_alpha2] : 0.0;
    const double alpha3 = L.has_history ? x[L.idx_alpha3] : 0.0;
    const double kappa = x[L.idx_kappa];
    const bool multiplicative = L.variant == ModelVariant::multiplicative_kappa;

    double beta1[kAgeGroups] = {0, 0, 0, 0};
    double beta2[kGenders] = {0, 0};
    double beta3[kLocations] = {0, 0};
    if (L.has_demographics) {
        for (int a = 1; a < kAgeGroups; ++a) beta1[a] = x[L.idx_beta1[a]];
        for (int g = 1; g < kGenders; ++g) beta2[g] = x[L.idx_beta2[g]];
        for (int l = 1; l < kLocations; ++l) beta3[l] = x[L.idx_beta3[l]];
    }
    const double beta0 = x[L.idx_beta0];
    const double* z = x.data() + L.n_globals;
    double* dz = grad.data() + L.n_globals;
    const auto n_cust = L.customer_ids.size();
    const int n_blocks = static_cast<int>(block_start_.size()) - 1;

    std::vector<Partial> partials(n_blocks);

    // Observation reduction over fixed customer blocks. Each block owns its
    // customers' z-gradients; scalar accumulators are combined across blocks
    // in ascending order below, so the sum order never depends on the number
    // of threads.
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (int b = 0; b < n_blocks; ++b) {
        Partial& acc = partials[b];
        for (std::int32_t i = block_start_[b]; i < block_start_[b + 1]; ++i) {
            const double u_i = tau * z[i];
            double lin = beta0 + u_i;
            if (L.has_demographics)
                lin += beta1[age_[i]] + beta2[gender_[i]] + beta3[location_[i]];
            if (lin > kMaxLogQ) {
                acc.out_of_range = true;
                break;
            }
            const double q = std::exp(lin);

            double g_sum = 0.0;
            for (std::int32_t r = rec_offset_[i]; r < rec_offset_[i + 1]; ++r) {
                double gap;
                if (multiplicative) {
                    gap = q - (conjoint_[r] ? kappa : 1.0) * price_[r];
                } else {
                    gap = (q + (conjoint_[r] ? kappa : 0.0)) - price_[r];
                }
                double eta = alpha1 * gap;
                if (L.has_history) {
                    eta += alpha2 * log_s1_[r];
                    if (s_zero_[r]) eta += alpha3;
                }
                const double g = (outcome_[r] ? 1.0 : 0.0) - logistic(eta);
                acc.ll += outcome_[r] ? log_sigmoid(eta) : log_sigmoid(-eta);
                g_sum += g;
                acc.a1 += g * gap;
                if (L.has_history) {
                    acc.a2 += g * log_s1_[r];
                    if (s_zero_[r]) acc.a3 += g;
                }
                if (conjoint_[r]) acc.kap += multiplicative ? g * price_[r] : g;
            }

            const double w = alpha1 * q * g_sum;  // dLL/du_i
            dz[i] = tau * w - z[i];               // includes the z ~ N(0,1) score
            acc.wu += w * u_i;
            acc.w_total += w;
            if (L.has_demographics) {
                acc.w_age[age_[i]] += w;
                acc.w_gender[gender_[i]] += w;
                acc.w_loc[location_[i]] += w;
            }
        }
    }

    Partial total;
    for (const Partial& p : partials) {
        if (p.out_of_range) return eval_bailout(grad);
        total.ll += p.ll;
        total.a1 += p.a1;
        total.a2 += p.a2;
        total.a3 += p.a3;
        total.kap += p.kap;
        total.w_total += p.w_total;
        for (int a = 0; a < kAgeGroups; ++a) total.w_age[a] += p.w_age[a];
        for (int g = 0; g < kGenders; ++g) total.w_gender[g] += p.w_gender[g];
        for (int l = 0; l < kLocations; ++l) total.w_loc[l] += p.w_loc[l];
        total.wu += p.wu;
    }

    const double inv_var = 1.0 / (priors_.coef_sd * priors_.coef_sd);
    const double coef_norm =
        -std::log(priors_.coef_sd) - 0.5 * std::log(2.0 * std::numbers::pi);
    double lp = total.ll;
    auto add_coef = [&](int slot, double value, double dlik) {
        lp += -0.5 * value * value * inv_var + coef_norm;
        grad[slot] = dlik - value * inv_var;
    };

    add_coef(L.idx_beta0, beta0, total.w_total);
    if (L.has_demographics) {
        for (int a = 1; a < kAgeGroups; ++a)
            add_coef(L.idx_beta1[a], beta1[a], total.w_age[a]);
        for (int g = 1; g < kGenders; ++g)
            add_coef(L.idx_beta2[g], beta2[g], total.w_gender[g]);
        for (int l = 1; l < kLocations; ++l)
            add_coef(L.idx_beta3[l], beta3[l], total.w_loc[l]);
    }
    add_coef(L.idx_alpha1, alpha1, total.a1);
    if (L.has_history) {
        add_coef(L.idx_alpha2, alpha2, total.a2);
        add_coef(L.idx_alpha3, alpha3, total.a3);
    }
    add_coef(L.idx_kappa, kappa,
             multiplicative ? -alpha1 * total.kap : alpha1 * total.kap);

    // Gamma(shape, scale) prior on tau plus the log-tau Jacobian, expressed
    // in log_tau: shape * log_tau - tau / scale + const.
    lp += priors_.tau_shape * log_tau - tau / priors_.tau_scale -
          priors_.tau_shape * std::log(priors_.tau_scale) -
          std::lgamma(priors_.tau_shape);
    grad[L.idx_tau] = total.wu + priors_.tau_shape - tau / priors_.tau_scale;

    // z ~ N(0,1) log-densities; the scores are already in dz.
    double zsq = 0.0;
    for (std::size_t i = 0; i < n_cust; ++i) zsq += z[i] * z[i];
    lp += -0.5 * zsq -
          0.5 * static_cast<double>(n_cust) * std::log(2.0 * std::numbers::pi);

    if (!std::isfinite(lp)) return eval_bailout(grad);
    return lp;
}

}  // namespace priceopt
