#include <doctest.h>

#include <cmath>
#include <unordered_map>

#include "priceopt/model.hpp"
#include "priceopt/posterior.hpp"
#include "priceopt/rng.hpp"

using namespace priceopt;

namespace {

ParameterVector table_params() { return default_true_parameters(); }

ParameterVector random_params(RngStream& rng, bool positive_alpha1 = false) {
    ParameterVector p;
    p.beta0 = rng.uniform(0.5, 3.0);
    for (int a = 1; a < kAgeGroups; ++a) p.beta1[a] = rng.uniform(-0.2, 0.2);
    p.beta2[1] = rng.uniform(-0.2, 0.2);
    p.beta3[1] = rng.uniform(-0.2, 0.2);
    p.alpha1 = positive_alpha1 ? rng.uniform(0.05, 0.5) : rng.uniform(-0.5, 0.5);
    p.alpha2 = rng.uniform(-0.5, 0.5);
    p.alpha3 = rng.uniform(-0.5, 0.5);
    p.kappa = rng.uniform(-1.0, 1.5);
    p.tau = rng.uniform(0.05, 0.5);
    return p;
}

}  // namespace

TEST_CASE("reference price matches closed-form evaluations") {
    ParameterVector p = table_params();
    const Demographics baseline{0, 0, 0};

    // exp(2.8) for the baseline customer with u = 0
    CHECK(reference_price(p, baseline, 0.0) ==
          doctest::Approx(16.444646771097050).epsilon(1e-14));

    ParameterVector zero;
    zero.tau = 1.0;
    CHECK(reference_price(zero, baseline, 0.0) == 1.0);

    // 61-75, female, rural, u = 0.1: exp(2.8 - 0.045 + 0.01 - 0.02 + 0.1)
    const Demographics older{3, 1, 1};
    CHECK(reference_price(p, older, 0.1) ==
          doctest::Approx(17.201558668925439).epsilon(1e-14));

    // no_demographics ignores the category coefficients
    CHECK(reference_price(p, older, 0.1, ModelVariant::no_demographics) ==
          doctest::Approx(std::exp(2.9)).epsilon(1e-14));
    CHECK(reference_price(p, older, 0.1) > 0.0);
}

TEST_CASE("linear predictor matches the worked example") {
    const ParameterVector p = table_params();
    const double q = std::exp(2.8);

    // alpha1*(q - 16) + alpha3 at s=0
    CHECK(linear_predictor(p, q, 16.0, 0, false) ==
          doctest::Approx(-0.14437363011603254).epsilon(1e-13));

    ParameterVector zero_alpha = p;
    zero_alpha.alpha1 = zero_alpha.alpha2 = zero_alpha.alpha3 = 0.0;
    CHECK(linear_predictor(zero_alpha, 5.0, 9.0, 3, true) == 0.0);

    // s > 0 activates the log(s+1) term and drops alpha3
    CHECK(linear_predictor(p, q, 16.0, 4, false) ==
          doctest::Approx(0.35 * (q - 16.0) + 0.45 * std::log(5.0)).epsilon(1e-13));

    // no_history keeps only the price-gap term
    CHECK(linear_predictor(p, q, 16.0, 4, false, ModelVariant::no_history) ==
          doctest::Approx(0.35 * (q - 16.0)).epsilon(1e-13));

    // multiplicative variant: alpha1*(q - kappa^c * x)
    CHECK(linear_predictor(p, q, 16.0, 0, true, ModelVariant::multiplicative_kappa) ==
          doctest::Approx(0.35 * (q - 0.75 * 16.0) - 0.3).epsilon(1e-13));
    CHECK(linear_predictor(p, q, 16.0, 0, false, ModelVariant::multiplicative_kappa) ==
          doctest::Approx(0.35 * (q - 16.0) - 0.3).epsilon(1e-13));
}

TEST_CASE("conjoint shift equals a reference-price shift (Eq. 1 form)") {
    RngStream rng(42);
    for (int trial = 0; trial < 10000; ++trial) {
        const ParameterVector p = random_params(rng);
        const double q = rng.uniform(0.5, 40.0);
        const double price = rng.uniform(1.0, 30.0);
        const int s = static_cast<int>(rng.bounded(25));
        const double with_flag = linear_predictor(p, q, price, s, true);
        const double with_shift = linear_predictor(p, q + p.kappa, price, s, false);
        CHECK(with_flag == with_shift);  // bit-exact by construction
    }
}

TEST_CASE("purchase probability: logistic values and stability") {
    CHECK(purchase_probability(0.0) == 0.5);
    CHECK(purchase_probability(-0.14437363011603254) ==
          doctest::Approx(0.46396915555144916).epsilon(1e-14));
    CHECK(purchase_probability(-40.0) ==
          doctest::Approx(4.2483542552915890e-18).epsilon(1e-14));
    CHECK(purchase_probability(-40.0) > 0.0);

    RngStream rng(1);
    for (int i = 0; i < 2000; ++i) {
        const double x = rng.uniform(-700.0, 700.0);
        const double pr = purchase_probability(x);
        CHECK(pr > 0.0);
        CHECK(pr < 1.0);
    }
    CHECK(purchase_probability(700.0) < 1.0);
    CHECK(purchase_probability(-700.0) > 0.0);
}

TEST_CASE("purchase probability is monotone in price and reference price") {
    RngStream rng(2);
    for (int trial = 0; trial < 2000; ++trial) {
        ParameterVector p = random_params(rng, /*positive_alpha1=*/true);
        const double q = rng.uniform(2.0, 30.0);
        const double price = rng.uniform(2.0, 28.0);
        const int s = static_cast<int>(rng.bounded(10));
        const bool conjoint = rng.bernoulli(0.5);
        const double step = rng.uniform(0.01, 1.0);

        const double pi = purchase_probability(linear_predictor(p, q, price, s, conjoint));
        const double pi_pricier =
            purchase_probability(linear_predictor(p, q, price + step, s, conjoint));
        const double pi_richer =
            purchase_probability(linear_predictor(p, q + step, price, s, conjoint));
        CHECK(pi_pricier < pi);
        CHECK(pi_richer > pi);
    }
}

TEST_CASE("log likelihood: empty, symmetric and brute-force checks") {
    const ParameterVector p = table_params();
    ObservationSet empty;
    std::unordered_map<std::int64_t, double> u;
    CHECK(log_likelihood(p, u, empty) == 0.0);

    // predictor 0 gives log(0.5) for either outcome
    ParameterVector zero_alpha = p;
    zero_alpha.alpha1 = zero_alpha.alpha2 = zero_alpha.alpha3 = 0.0;
    ObservationSet one;
    one.records.push_back({7, 1, 16.0, 0, false, false, true});
    one.demographics[7] = {0, 0, 0};
    u[7] = 0.05;
    CHECK(log_likelihood(zero_alpha, u, one) ==
          doctest::Approx(-0.69314718055994531).epsilon(1e-14));
    one.records[0].outcome = false;
    CHECK(log_likelihood(zero_alpha, u, one) ==
          doctest::Approx(-0.69314718055994531).epsilon(1e-14));

    // three records against an independently coded per-record sum
    ObservationSet three;
    three.demographics[1] = {0, 0, 0};
    three.demographics[2] = {2, 1, 0};
    three.records.push_back({1, 1, 16.0, 0, false, false, true});
    three.records.push_back({1, 2, 16.5, 1, false, true, false});
    three.records.push_back({2, 3, 14.0, 0, true, false, true});
    std::unordered_map<std::int64_t, double> u3{{1, 0.08}, {2, -0.13}};

    auto pi_of = [](double eta) { return 1.0 / (1.0 + std::exp(-eta)); };
    const double q1 = std::exp(2.8 + 0.08);
    const double q2 = std::exp(2.8 - 0.030 + 0.010 - 0.13);
    const double eta1 = 0.35 * (q1 - 16.0) - 0.3;
    const double eta2 = 0.35 * (q1 - 16.5) + 0.45 * std::log(2.0);
    const double eta3 = 0.35 * (q2 + 0.75 - 14.0) - 0.3;
    const double expected = std::log(pi_of(eta1)) + std::log(1.0 - pi_of(eta2)) +
                            std::log(pi_of(eta3));
    CHECK(log_likelihood(p, u3, three) == doctest::Approx(expected).epsilon(1e-12));

    // missing u entry names the customer
    u3.erase(2);
    CHECK_THROWS_WITH_AS(log_likelihood(p, u3, three),
                         doctest::Contains("customer 2"), std::out_of_range);
}

TEST_CASE("log prior: gamma tau term, coefficient maxima, u terms") {
    // Gamma(2, 0.2) log-density at 0.4 equals ln(10) - 2
    CHECK(gamma_lpdf(0.4, 2.0, 0.2) ==
          doctest::Approx(0.30258509299404568).epsilon(1e-14));

    ParameterVector p;  // all free coefficients zero
    p.tau = 0.4;
    std::unordered_map<std::int64_t, double> no_u;
    // 10 free coefficients at the N(0, 0.5) mode plus the tau term
    const double coef_max = -std::log(0.5) - 0.5 * std::log(2.0 * std::numbers::pi);
    CHECK(log_prior(p, no_u) ==
          doctest::Approx(10.0 * coef_max + 0.30258509299404568).epsilon(1e-13));

    // one u = 0 with tau = 1 contributes the standard normal maximum
    p.tau = 1.0;
    std::unordered_map<std::int64_t, double> one_u{{3, 0.0}};
    CHECK(log_prior(p, one_u) - log_prior(p, no_u) ==
          doctest::Approx(-0.91893853320467274).epsilon(1e-13));

    p.tau = -0.1;
    CHECK_THROWS_AS(log_prior(p, no_u), std::invalid_argument);
    p.tau = 0.0;
    CHECK_THROWS_AS(log_prior(p, no_u), std::invalid_argument);
}

TEST_CASE("parameter layout: free-parameter counts and baseline pinning") {
    ObservationSet data;
    for (int i = 0; i < 5; ++i) {
        data.records.push_back({i, 1, 16.0, 0, false, false, i % 2 == 0});
        data.demographics[i] = {i % 4, i % 2, 0};
    }

    const auto full = make_layout(ModelVariant::full, data);
    CHECK(full.n_globals == 11);
    CHECK(full.dim() == 11 + 5);
    const auto no_demo = make_layout(ModelVariant::no_demographics, data);
    CHECK(no_demo.n_globals == 6);
    const auto mult = make_layout(ModelVariant::multiplicative_kappa, data);
    CHECK(mult.n_globals == 11);
    const auto no_hist = make_layout(ModelVariant::no_history, data);
    CHECK(no_hist.n_globals == 9);

    // decoding any vector leaves the pinned baselines at exactly zero
    std::vector<double> x(full.dim(), 0.37);
    const ParameterVector decoded = decode_parameters(x, full);
    CHECK(decoded.beta1[0] == 0.0);
    CHECK(decoded.beta2[0] == 0.0);
    CHECK(decoded.beta3[0] == 0.0);
    CHECK(decoded.tau == doctest::Approx(std::exp(0.37)));

    // names follow the reporting order
    REQUIRE(full.global_names.size() == 11);
    CHECK(full.global_names[0] == "beta0");
    CHECK(full.global_names[1] == "beta1[31-45]");
    CHECK(full.global_names[6] == "tau");
    CHECK(full.global_names[7] == "alpha1");
    CHECK(full.global_names[10] == "kappa");
}
