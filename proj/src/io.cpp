#include "priceopt/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace priceopt {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    return in;
}

[[noreturn]] void schema_error(const std::string& path, std::size_t row,
                               const std::string& column, const std::string& message) {
    throw std::runtime_error(path + ":" + std::to_string(row) + ": column '" + column +
                             "': " + message);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

// Streamed CSV with header validation and per-field typed accessors.
class CsvReader {
public:
    CsvReader(const std::string& path, const std::vector<std::string>& expected_header)
        : path_(path), in_(open_in(path)) {
        std::string line;
        if (!std::getline(in_, line))
            throw std::runtime_error(path + ": empty file");
        strip_cr(line);
        header_ = split_line(line);
        if (!expected_header.empty() && header_ != expected_header) {
            std::string want;
            for (const auto& h : expected_header) want += (want.empty() ? "" : ",") + h;
            throw std::runtime_error(path + ":1: expected header '" + want + "'");
        }
        row_ = 1;
    }

    const std::vector<std::string>& header() const { return header_; }

    bool next_row() {
        std::string line;
        while (std::getline(in_, line)) {
            strip_cr(line);
            ++row_;
            if (line.empty()) continue;
            fields_ = split_line(line);
            if (fields_.size() != header_.size())
                throw std::runtime_error(path_ + ":" + std::to_string(row_) +
                                         ": expected " + std::to_string(header_.size()) +
                                         " fields, got " + std::to_string(fields_.size()));
            return true;
        }
        return false;
    }

    std::size_t row() const { return row_; }
    const std::string& raw(std::size_t i) const { return fields_[i]; }

    std::int64_t int_field(std::size_t i) const {
        try {
            std::size_t used = 0;
            const std::int64_t v = std::stoll(fields_[i], &used);
            if (used != fields_[i].size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            schema_error(path_, row_, header_[i], "expected integer, got '" + fields_[i] + "'");
        }
    }

    double double_field(std::size_t i) const {
        try {
            std::size_t used = 0;
            const double v = std::stod(fields_[i], &used);
            if (used != fields_[i].size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            schema_error(path_, row_, header_[i], "expected real, got '" + fields_[i] + "'");
        }
    }

    int binary_field(std::size_t i) const {
        if (fields_[i] == "0") return 0;
        if (fields_[i] == "1") return 1;
        schema_error(path_, row_, header_[i], "expected 0 or 1, got '" + fields_[i] + "'");
    }

    [[noreturn]] void fail(std::size_t i, const std::string& message) const {
        schema_error(path_, row_, header_[i], message);
    }

private:
    static void strip_cr(std::string& line) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
    }

    std::string path_;
    std::ifstream in_;
    std::vector<std::string> header_;
    std::vector<std::string> fields_;
    std::size_t row_ = 0;
};

Demographics demographics_fields(const CsvReader& csv, std::size_t age_i,
                                 std::size_t gender_i, std::size_t location_i) {
    Demographics d;
    try {
        d.age = age_index(csv.raw(age_i));
    } catch (const std::exception&) {
        csv.fail(age_i, "unknown age group '" + csv.raw(age_i) + "'");
    }
    try {
        d.gender = gender_index(csv.raw(gender_i));
    } catch (const std::exception&) {
        csv.fail(gender_i, "unknown gender '" + csv.raw(gender_i) + "'");
    }
    try {
        d.location = location_index(csv.raw(location_i));
    } catch (const std::exception&) {
        csv.fail(location_i, "unknown location '" + csv.raw(location_i) + "'");
    }
    return d;
}

}  // namespace

std::string format_full(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_price(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

void write_purchase_history_csv(const std::string& path, const Population& pop,
                                const MarketState& state) {
    auto out = open_out(path);
    out << "customer_id,t,age_group,gender,location,price,s_periods,purchased\n";
    for (const Observation& rec : state.history) {
        const Demographics d = pop.customer(rec.customer_id).demographics;
        out << rec.customer_id << ',' << rec.time << ',' << kAgeLabels[d.age] << ','
            << kGenderLabels[d.gender] << ',' << kLocationLabels[d.location] << ','
            << format_price(rec.price) << ',' << rec.s_periods << ','
            << (rec.outcome ? 1 : 0) << '\n';
    }
}

void write_conjoint_csv(const std::string& path, const Population& pop,
                        const ConjointStudy& study) {
    auto out = open_out(path);
    out << "customer_id,group,task_index,age_group,gender,location,price,s_periods,choice\n";
    for (const ConjointRow& row : study.rows) {
        const Demographics d = pop.customer(row.customer_id).demographics;
        out << row.customer_id << ',' << kConjointGroupLabels[row.group] << ','
            << row.task_index << ',' << kAgeLabels[d.age] << ','
            << kGenderLabels[d.gender] << ',' << kLocationLabels[d.location] << ','
            << format_price(row.price) << ',' << row.s_periods << ','
            << (row.choice ? 1 : 0) << '\n';
    }
}

void write_ground_truth_csv(const std::string& path,
                            const std::vector<GroundTruthRow>& rows) {
    auto out = open_out(path);
    out << "price,mu0_true,mu1_true,profit_true\n";
    for (const GroundTruthRow& r : rows)
        out << format_price(r.price) << ',' << format_full(r.mu0) << ','
            << format_full(r.mu1) << ',' << format_full(r.profit) << '\n';
}

void write_draws_csv(const std::string& path, const PosteriorDraws& draws) {
    auto out = open_out(path);
    out << "chain,iteration";
    for (const std::string& name : draws.names) out << ',' << name;
    out << '\n';
    for (int c = 0; c < draws.n_chains; ++c)
        for (int k = 0; k < draws.retained; ++k) {
            out << (c + 1) << ','
                << (k < static_cast<int>(draws.iteration_of.size())
                        ? draws.iteration_of[k]
                        : k + 1);
            for (int p = 0; p < draws.n_params(); ++p)
                out << ',' << format_full(draws.value(c, k, p));
            out << '\n';
        }
}

void write_profit_curve_csv(const std::string& path, const ProfitCurve& curve,
                            const std::vector<GroundTruthRow>* truth) {
    bool with_truth = truth != nullptr && truth->size() == curve.points.size();
    if (with_truth)
        for (std::size_t j = 0; j < curve.points.size(); ++j)
            if (std::abs((*truth)[j].price - curve.points[j].price) > 1e-9)
                with_truth = false;

    auto out = open_out(path);
    out << "price,mean_profit,lo95,hi95,p_optimal" << (with_truth ? ",profit_true" : "")
        << '\n';
    for (std::size_t j = 0; j < curve.points.size(); ++j) {
        const ProfitPoint& pt = curve.points[j];
        out << format_price(pt.price) << ',' << format_full(pt.mean_profit) << ','
            << format_full(pt.lo95) << ',' << format_full(pt.hi95) << ','
            << format_full(pt.p_optimal);
        if (with_truth) out << ',' << format_full((*truth)[j].profit);
        out << '\n';
    }
}

HistoryFile read_purchase_history_csv(const std::string& path) {
    CsvReader csv(path, {"customer_id", "t", "age_group", "gender", "location", "price",
                         "s_periods", "purchased"});
    HistoryFile file;
    struct LastRow {
        int s_periods;
        bool purchased;
        Demographics demographics;
    };
    std::map<std::int64_t, LastRow> last_period_rows;

    while (csv.next_row()) {
        Observation rec;
        rec.customer_id = csv.int_field(0);
        if (rec.customer_id < 0) csv.fail(0, "customer_id must be >= 0");
        const std::int64_t t = csv.int_field(1);
        if (t < 1) csv.fail(1, "period must be >= 1");
        rec.time = static_cast<int>(t);
        const Demographics d = demographics_fields(csv, 2, 3, 4);
        rec.price = csv.double_field(5);
        if (!(rec.price > 0.0)) csv.fail(5, "price must be > 0");
        const std::int64_t s = csv.int_field(6);
        if (s < 0) csv.fail(6, "s_periods must be >= 0");
        rec.s_periods = static_cast<int>(s);
        rec.outcome = csv.binary_field(7) != 0;
        rec.conjoint_flag = false;
        rec.domain_flag = rec.s_periods > 0;

        file.observations.records.push_back(rec);
        file.observations.demographics.emplace(rec.customer_id, d);

        if (rec.time > file.max_period) {
            file.max_period = rec.time;
            last_period_rows.clear();
        }
        if (rec.time == file.max_period)
            last_period_rows[rec.customer_id] = {rec.s_periods, rec.outcome, d};
    }

    for (const auto& [id, row] : last_period_rows) {
        if (!row.purchased) continue;
        file.final_subscriber_ids.push_back(id);
        DecisionCustomer c;
        c.demographics = row.demographics;
        c.s_periods = row.s_periods + 1;
        c.id = id;
        file.final_subscribers.push_back(c);
    }
    return file;
}

ObservationSet read_conjoint_csv(const std::string& path) {
    CsvReader csv(path, {"customer_id", "group", "task_index", "age_group", "gender",
                         "location", "price", "s_periods", "choice"});
    ObservationSet set;
    while (csv.next_row()) {
        Observation rec;
        rec.customer_id = csv.int_field(0);
        if (rec.customer_id < 0) csv.fail(0, "customer_id must be >= 0");
        const std::string& group = csv.raw(1);
        if (group != "C0" && group != "C1" && group != "C2")
            csv.fail(1, "expected C0, C1 or C2, got '" + group + "'");
        const std::int64_t task = csv.int_field(2);
        if (task < 1) csv.fail(2, "task_index must be >= 1");
        rec.time = static_cast<int>(task);
        const Demographics d = demographics_fields(csv, 3, 4, 5);
        rec.price = csv.double_field(6);
        if (!(rec.price > 0.0)) csv.fail(6, "price must be > 0");
        const std::int64_t s = csv.int_field(7);
        if (s < 0) csv.fail(7, "s_periods must be >= 0");
        rec.s_periods = static_cast<int>(s);
        rec.outcome = csv.binary_field(8) != 0;
        rec.conjoint_flag = true;
        rec.domain_flag = rec.s_periods > 0;
        set.records.push_back(rec);
        set.demographics.emplace(rec.customer_id, d);
    }
    return set;
}

PosteriorDraws read_draws_csv(const std::string& path) {
    CsvReader csv(path, {});
    const auto& header = csv.header();
    if (header.size() < 3 || header[0] != "chain" || header[1] != "iteration")
        throw std::runtime_error(path + ":1: expected header 'chain,iteration,<parameters>'");

    PosteriorDraws draws;
    draws.names.assign(header.begin() + 2, header.end());

    std::vector<std::vector<double>> rows;
    std::vector<int> chain_of;
    std::vector<int> iteration;
    while (csv.next_row()) {
        const std::int64_t chain = csv.int_field(0);
        if (chain < 1) csv.fail(0, "chain must be >= 1");
        chain_of.push_back(static_cast<int>(chain));
        iteration.push_back(static_cast<int>(csv.int_field(1)));
        std::vector<double> row(draws.names.size());
        for (std::size_t p = 0; p < row.size(); ++p) row[p] = csv.double_field(p + 2);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error(path + ": no draws");

    const int n_chains = *std::max_element(chain_of.begin(), chain_of.end());
    std::vector<int> counts(n_chains, 0);
    for (int c : chain_of) ++counts[c - 1];
    for (int c = 0; c < n_chains; ++c)
        if (counts[c] != counts[0])
            throw std::runtime_error(path + ": chains have unequal draw counts");

    draws.n_chains = n_chains;
    draws.retained = counts[0];
    draws.data.resize(rows.size() * draws.names.size());
    std::vector<int> cursor(n_chains, 0);
    draws.iteration_of.resize(draws.retained);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const int c = chain_of[r] - 1;
        const int k = cursor[c]++;
        if (c == 0) draws.iteration_of[k] = iteration[r];
        std::copy(rows[r].begin(), rows[r].end(),
                  draws.data.begin() +
                      (static_cast<std::size_t>(c) * draws.retained + k) *
                          draws.names.size());
    }
    return draws;
}

std::vector<GroundTruthRow> read_ground_truth_csv(const std::string& path) {
    CsvReader csv(path, {"price", "mu0_true", "mu1_true", "profit_true"});
    std::vector<GroundTruthRow> rows;
    while (csv.next_row()) {
        GroundTruthRow r;
        r.price = csv.double_field(0);
        r.mu0 = csv.double_field(1);
        r.mu1 = csv.double_field(2);
        r.profit = csv.double_field(3);
        if (!(r.mu0 >= 0.0 && r.mu0 <= 1.0)) csv.fail(1, "mu0 must lie in [0,1]");
        if (!(r.mu1 >= 0.0 && r.mu1 <= 1.0)) csv.fail(2, "mu1 must lie in [0,1]");
        rows.push_back(r);
    }
    return rows;
}

ProfitCurveFile read_profit_curve_csv(const std::string& path) {
    CsvReader csv(path, {});
    const auto& header = csv.header();
    const std::vector<std::string> base = {"price", "mean_profit", "lo95", "hi95",
                                           "p_optimal"};
    bool with_truth;
    if (header == base) {
        with_truth = false;
    } else {
        auto extended = base;
        extended.push_back("profit_true");
        if (header != extended)
            throw std::runtime_error(path + ":1: unexpected profit curve header");
        with_truth = true;
    }
    ProfitCurveFile file;
    while (csv.next_row()) {
        ProfitPoint pt;
        pt.price = csv.double_field(0);
        pt.mean_profit = csv.double_field(1);
        pt.lo95 = csv.double_field(2);
        pt.hi95 = csv.double_field(3);
        pt.p_optimal = csv.double_field(4);
        file.points.push_back(pt);
        if (with_truth) file.profit_true.push_back(csv.double_field(5));
    }
    return file;
}

void write_population_json(const std::string& path, const PopulationSpec& spec) {
    nlohmann::json table;
    for (int c = 0; c < kDemographicCells; ++c) {
        const Demographics d = demographics_from_cell(c);
        const std::string key = std::string(kAgeLabels[d.age]) + "|" +
                                kGenderLabels[d.gender] + "|" +
                                kLocationLabels[d.location];
        table[key] = spec.table[c];
    }
    nlohmann::json doc;
    doc["size"] = spec.size;
    doc["table"] = table;
    auto out = open_out(path);
    out << doc.dump(2) << '\n';
}

PopulationSpec read_population_json(const std::string& path) {
    auto in = open_in(path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path + ": invalid JSON: " + e.what());
    }
    PopulationSpec spec;
    if (!doc.contains("size") || !doc["size"].is_number_integer())
        throw std::runtime_error(path + ": missing integer 'size'");
    spec.size = doc["size"].get<std::int64_t>();
    if (!doc.contains("table") || !doc["table"].is_object() ||
        doc["table"].size() != kDemographicCells)
        throw std::runtime_error(path + ": 'table' must hold " +
                                 std::to_string(kDemographicCells) + " cells");
    for (int c = 0; c < kDemographicCells; ++c) {
        const Demographics d = demographics_from_cell(c);
        const std::string key = std::string(kAgeLabels[d.age]) + "|" +
                                kGenderLabels[d.gender] + "|" +
                                kLocationLabels[d.location];
        if (!doc["table"].contains(key))
            throw std::runtime_error(path + ": table missing cell '" + key + "'");
        spec.table[c] = doc["table"][key].get<double>();
    }
    spec.validate();
    return spec;
}

}  // namespace priceopt
