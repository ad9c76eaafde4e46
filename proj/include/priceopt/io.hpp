#pragma once

// Dataset persistence. CSV files use a header row, '.' decimal separator,
// UTF-8 and '\n' line endings; prices carry two fraction digits, all other
// reals full round-trip precision. Readers validate the schema and report
// errors as file:row: column 'name': message.

#include <string>
#include <vector>

#include "priceopt/decision.hpp"
#include "priceopt/nuts.hpp"
#include "priceopt/population.hpp"
#include "priceopt/simulator.hpp"
#include "priceopt/types.hpp"

namespace priceopt {

void write_purchase_history_csv(const std::string& path, const Population& pop,
                                const MarketState& state);
void write_conjoint_csv(const std::string& path, const Population& pop,
                        const ConjointStudy& study);
void write_ground_truth_csv(const std::string& path,
                            const std::vector<GroundTruthRow>& rows);
void write_draws_csv(const std::string& path, const PosteriorDraws& draws);
// profit_true is appended when ground truth on the identical grid is given.
void write_profit_curve_csv(const std::string& path, const ProfitCurve& curve,
                            const std::vector<GroundTruthRow>* truth = nullptr);

struct HistoryFile {
    ObservationSet observations;
    int max_period = 0;
    // Subscribers entering period max_period+1: purchased in the final
    // period, counter already advanced. Ascending by customer id.
    std::vector<std::int64_t> final_subscriber_ids;
    std::vector<DecisionCustomer> final_subscribers;
};

HistoryFile read_purchase_history_csv(const std::string& path);
ObservationSet read_conjoint_csv(const std::string& path);
PosteriorDraws read_draws_csv(const std::string& path);
std::vector<GroundTruthRow> read_ground_truth_csv(const std::string& path);

struct ProfitCurveFile {
    std::vector<ProfitPoint> points;
    std::vector<double> profit_true;  // empty when the column is absent
};
ProfitCurveFile read_profit_curve_csv(const std::string& path);

// PopulationSpec as JSON: {"size": N, "table": {"age|gender|location": p}}.
void write_population_json(const std::string& path, const PopulationSpec& spec);
PopulationSpec read_population_json(const std::string& path);

// Formatting helpers shared by the writers.
std::string format_full(double v);   // round-trip precision
std::string format_price(double v);  // two fraction digits

}  // namespace priceopt
