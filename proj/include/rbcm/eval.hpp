#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "rbcm/dictionary.hpp"
#include "rbcm/errors.hpp"
#include "rbcm/linalg.hpp"

namespace rbcm {

struct PredictionRecord {
    std::size_t sample_id = 0;
    std::size_t true_label = 0;
    std::size_t predicted = 0;
    double solve_time = 0.0;  // seconds
};

struct McNemarResult {
    std::size_t n01 = 0;  // A wrong, B right
    std::size_t n10 = 0;  // A right, B wrong
    double p_value = 1.0;
};

// Sparsity concentration index:
//   SCI = (C * max_i ||c_i||_1 / ||c||_1 - 1) / (C - 1)
// 1 when all l1 mass sits in one class, 0 when it is spread uniformly.
inline double sci(const Vector& c, const PartitionedDictionary& D) {
    if (c.size() != D.atom_count()) throw DimensionMismatch("sci: coefficient length mismatch");
    const double total = norm1(c);
    if (total <= 1e-12) throw ZeroCoefficientVector();
    double max_share = 0.0;
    for (std::size_t i = 0; i < D.class_count(); ++i) {
        double s = 0.0;
        for (std::size_t k = D.class_offset(i); k < D.class_offset(i + 1); ++k) s += std::abs(c[k]);
        max_share = std::max(max_share, s / total);
    }
    const double C = static_cast<double>(D.class_count());
    return std::clamp((C * max_share - 1.0) / (C - 1.0), 0.0, 1.0);
}

inline double accuracy(const std::vector<PredictionRecord>& records) {
    if (records.empty()) throw EmptyRecordSet();
    std::size_t correct = 0;
    for (const auto& r : records)
        if (r.predicted == r.true_label) ++correct;
    return static_cast<double>(correct) / static_cast<double>(records.size());
}

namespace detail {

// P[Bin(m, 1/2) <= k], exact term recurrence for small m, log-space otherwise.
inline double binomial_half_cdf(std::size_t k, std::size_t m) {
    if (m == 0) return 1.0;
    if (m <= 50) {
        double term = std::exp2(-static_cast<double>(m));  // C(m,0) 2^-m
        double sum = term;
        for (std::size_t j = 1; j <= k; ++j) {
            term *= static_cast<double>(m - j + 1) / static_cast<double>(j);
            sum += term;
        }
        return sum;
    }
    const double log_half = std::log(0.5);
    double sum = 0.0;
    for (std::size_t j = 0; j <= k; ++j) {
        const double lt = std::lgamma(static_cast<double>(m) + 1.0) -
                          std::lgamma(static_cast<double>(j) + 1.0) -
                          std::lgamma(static_cast<double>(m - j) + 1.0) +
                          static_cast<double>(m) * log_half;
        sum += std::exp(lt);
    }
    return sum;
}

}  // namespace detail

// Exact two-sided McNemar test on the discordant pairs of two matched
// prediction sequences: p = min(1, 2 * P[Bin(n01+n10, 1/2) <= min(n01, n10)]).
inline McNemarResult mcnemar_exact_counts(std::size_t n01, std::size_t n10) {
    McNemarResult out;
    out.n01 = n01;
    out.n10 = n10;
    const std::size_t m = n01 + n10;
    if (m == 0) {
        out.p_value = 1.0;
        return out;
    }
    out.p_value = std::min(1.0, 2.0 * detail::binomial_half_cdf(std::min(n01, n10), m));
    return out;
}

inline McNemarResult mcnemar_exact(const std::vector<PredictionRecord>& a,
                                   const std::vector<PredictionRecord>& b) {
    if (a.size() != b.size())
        throw MismatchedRecords("mcnemar_exact: record sequences differ in length");
    std::size_t n01 = 0, n10 = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].sample_id != b[i].sample_id || a[i].true_label != b[i].true_label)
            throw MismatchedRecords("mcnemar_exact: records at position " + std::to_string(i) +
                                    " do not describe the same sample");
        const bool a_right = a[i].predicted == a[i].true_label;
        const bool b_right = b[i].predicted == b[i].true_label;
        if (!a_right && b_right) ++n01;
        if (a_right && !b_right) ++n10;
    }
    return mcnemar_exact_counts(n01, n10);
}

struct MethodTiming {
    double total_seconds = 0.0;
    bool empty = false;  // set (with a warning) when a method had no records
};

inline std::map<std::string, MethodTiming> timing_summary(
    const std::map<std::string, std::vector<PredictionRecord>>& per_method) {
    std::map<std::string, MethodTiming> out;
    for (const auto& [name, records] : per_method) {
        MethodTiming t;
        if (records.empty()) {
            t.empty = true;
            warn("timing_summary: method '" + name + "' has no records");
        }
        for (const auto& r : records) t.total_seconds += r.solve_time;
        out[name] = t;
    }
    return out;
}

}  // namespace rbcm
