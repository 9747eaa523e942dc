#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "verimap/corpus.hpp"
#include "verimap/errors.hpp"
#include "verimap/prompts.hpp"

namespace verimap {

// One generator+verifier outcome on one example. deviation = y_hat - y_star.
struct VerificationRecord {
    std::string example_id;
    std::string generator_id;
    std::string verifier_id;
    TaskLabel task = TaskLabel::anatomical_identification;
    std::string dataset_id;
    int y_star = 0;
    int y_hat = 0;
    Verdict verdict;
    int turn = 0;

    int deviation() const { return y_hat - y_star; }
};

struct ConfusionCounts {
    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::int64_t n() const { return tp + fp + tn + fn; }
};

// Discrimination (acc / verifier_error) and agreement-bias (fpr, bias, dskew)
// metrics for one cell. Rates whose denominator is empty are reported as 0
// with the matching undefined flag set, so cells stay tabulable without
// silently feeding 0/0 artifacts into regressions.
struct MetricSet {
    double acc = 0.0;
    double verifier_error = 0.0;
    double fpr = 0.0;
    double fnr = 0.0;
    double bias = 0.0;
    double dskew = 0.0;
    bool fpr_undefined = false;
    bool fnr_undefined = false;
    bool dskew_undefined = false;
};

enum class Quadrant { Desired, LowErrorHighBias, HighErrorLowBias, Mirage };

inline const std::string& quadrant_name(Quadrant q) {
    static const std::string names[] = {"desired", "low_error_high_bias",
                                        "high_error_low_bias", "mirage"};
    return names[static_cast<int>(q)];
}

enum class BiasAxis { fpr, bias, dskew };

inline const std::string& bias_axis_name(BiasAxis a) {
    static const std::string names[] = {"fpr", "bias", "dskew"};
    return names[static_cast<int>(a)];
}

inline BiasAxis parse_bias_axis(const std::string& s) {
    if (s == "fpr") return BiasAxis::fpr;
    if (s == "bias") return BiasAxis::bias;
    if (s == "dskew") return BiasAxis::dskew;
    throw ConfigError("unknown bias axis: " + s);
}

struct QuadrantThresholds {
    double error_hi = 0.4;
    // Empty means "midpoint of the chosen axis": 0.5 for fpr/dskew, 0 for bias.
    std::optional<double> bias_hi;
};

inline double axis_midpoint(BiasAxis axis) { return axis == BiasAxis::bias ? 0.0 : 0.5; }

inline double bias_axis_value(const MetricSet& m, BiasAxis axis) {
    switch (axis) {
        case BiasAxis::fpr: return m.fpr;
        case BiasAxis::bias: return m.bias;
        case BiasAxis::dskew: return m.dskew;
    }
    return m.fpr;
}

// Aggregation key; fields not in the grouping schema stay empty.
struct CellKey {
    std::string task;
    std::string generator_id;
    std::string verifier_id;
    std::string dataset_id;

    auto tie() const { return std::tie(task, generator_id, verifier_id, dataset_id); }
    bool operator<(const CellKey& o) const { return tie() < o.tie(); }
    bool operator==(const CellKey& o) const { return tie() == o.tie(); }
};

struct GroupBy {
    bool task = true;
    bool generator = true;
    bool verifier = true;
    bool dataset = true;
};

struct Cell {
    CellKey key;
    ConfusionCounts counts;
    MetricSet metrics;
    // Generator error rate on this cell's records: 1 - Acc_G.
    double p_g = 0.0;
};

/// dSkew by the O(1) counting form over all ordered deviation pairs
/// (diagonal included): 1 - (2ab+ac+bc)/(a^2+b^2+ac+bc), a=|{d=+1}|,
/// b=|{d=-1}|, c=|{d=0}|. Denominator zero (a=b=0) reports 0 + flag.
inline std::pair<double, bool> dskew_counting(std::int64_t a, std::int64_t b, std::int64_t c) {
    std::int64_t num = 2 * a * b + a * c + b * c;
    std::int64_t den = a * a + b * b + a * c + b * c;
    if (den == 0) return {0.0, true};
    return {1.0 - static_cast<double>(num) / static_cast<double>(den), false};
}

inline MetricSet compute_metrics(const ConfusionCounts& c) {
    MetricSet m;
    std::int64_t n = c.n();
    if (n == 0) throw EmptyInputError("no records in confusion counts");
    m.acc = static_cast<double>(c.tp + c.tn) / static_cast<double>(n);
    m.verifier_error = 1.0 - m.acc;
    if (c.fp + c.tn > 0) {
        m.fpr = static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
    } else {
        m.fpr_undefined = true;
    }
    if (c.fn + c.tp > 0) {
        m.fnr = static_cast<double>(c.fn) / static_cast<double>(c.fn + c.tp);
    } else {
        m.fnr_undefined = true;
    }
    m.bias = static_cast<double>(c.fp - c.fn) / static_cast<double>(n);
    auto [ds, undef] = dskew_counting(c.fp, c.fn, n - c.fp - c.fn);
    m.dskew = ds;
    m.dskew_undefined = undef;
    return m;
}

/// Checked variant taking the deviation multiset alongside the counts.
inline MetricSet compute_metrics(const ConfusionCounts& c, const std::vector<int>& deviations) {
    std::int64_t pos = 0, neg = 0, zero = 0;
    for (int d : deviations) {
        if (d == 1) ++pos;
        else if (d == -1) ++neg;
        else if (d == 0) ++zero;
        else throw InconsistentCountsError("deviation outside {-1,0,+1}");
    }
    if (pos != c.fp || neg != c.fn || zero != c.tp + c.tn)
        throw InconsistentCountsError("deviation multiset does not match confusion counts");
    return compute_metrics(c);
}

inline Quadrant quadrant(const MetricSet& m, const QuadrantThresholds& t,
                         BiasAxis axis = BiasAxis::fpr) {
    double bias_hi = t.bias_hi.value_or(axis_midpoint(axis));
    bool high_error = m.verifier_error >= t.error_hi;
    bool high_bias = bias_axis_value(m, axis) >= bias_hi;
    if (high_error && high_bias) return Quadrant::Mirage;
    if (high_error) return Quadrant::HighErrorLowBias;
    if (high_bias) return Quadrant::LowErrorHighBias;
    return Quadrant::Desired;
}

/// Exact partition of records into cells under the grouping schema, in
/// sorted key order.
inline std::vector<Cell> aggregate(const std::vector<VerificationRecord>& records,
                                   const GroupBy& group_by = {}) {
    if (records.empty()) throw EmptyInputError("no verification records to aggregate");
    std::map<CellKey, std::pair<ConfusionCounts, std::int64_t>> buckets;  // counts, gen hits
    for (const auto& r : records) {
        CellKey key;
        if (group_by.task) key.task = task_slug(r.task);
        if (group_by.generator) key.generator_id = r.generator_id;
        if (group_by.verifier) key.verifier_id = r.verifier_id;
        if (group_by.dataset) key.dataset_id = r.dataset_id;
        auto& [counts, gen_hits] = buckets[key];
        if (r.y_star == 1 && r.y_hat == 1) ++counts.tp;
        else if (r.y_star == 0 && r.y_hat == 1) ++counts.fp;
        else if (r.y_star == 0 && r.y_hat == 0) ++counts.tn;
        else ++counts.fn;
        gen_hits += r.y_star;
    }
    std::vector<Cell> cells;
    cells.reserve(buckets.size());
    for (const auto& [key, bucket] : buckets) {
        Cell cell;
        cell.key = key;
        cell.counts = bucket.first;
        cell.metrics = compute_metrics(bucket.first);
        cell.p_g = 1.0 - static_cast<double>(bucket.second) /
                             static_cast<double>(bucket.first.n());
        cells.push_back(std::move(cell));
    }
    return cells;
}

/// Unweighted arithmetic mean of one metric across cells.
inline double mean_across(const std::vector<Cell>& cells, const std::string& metric) {
    if (cells.empty()) throw EmptyInputError("mean over zero cells");
    double sum = 0.0;
    for (const auto& c : cells) {
        if (metric == "acc") sum += c.metrics.acc;
        else if (metric == "verifier_error") sum += c.metrics.verifier_error;
        else if (metric == "fpr") sum += c.metrics.fpr;
        else if (metric == "fnr") sum += c.metrics.fnr;
        else if (metric == "bias") sum += c.metrics.bias;
        else if (metric == "dskew") sum += c.metrics.dskew;
        else if (metric == "p_g") sum += c.p_g;
        else if (metric == "generator_acc") sum += 1.0 - c.p_g;
        else throw ConfigError("unknown metric name: " + metric);
    }
    return sum / static_cast<double>(cells.size());
}

}  // namespace verimap
