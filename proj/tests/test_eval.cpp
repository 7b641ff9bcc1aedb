#include "catch_amalgamated.hpp"

#include <cmath>
#include <cstdint>

#include "oracles.hpp"
#include "rbcm/dictionary.hpp"
#include "rbcm/eval.hpp"

using namespace rbcm;

namespace {

PartitionedDictionary identity_dictionary(std::size_t n, std::vector<std::size_t> sizes) {
    return PartitionedDictionary(identity(n), std::move(sizes));
}

std::vector<PredictionRecord> records_from(const std::vector<std::size_t>& truth,
                                           const std::vector<std::size_t>& predicted) {
    std::vector<PredictionRecord> out;
    for (std::size_t i = 0; i < truth.size(); ++i) out.push_back({i, truth[i], predicted[i], 0.0});
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// SCI
// ---------------------------------------------------------------------------

TEST_CASE("sci hits the boundary values") {
    const auto D = identity_dictionary(4, {2, 2});
    CHECK(sci({1.0, -0.5, 0.0, 0.0}, D) == 1.0);   // all mass in class 0
    CHECK(sci({0.5, 0.0, 0.25, 0.25}, D) == 0.0);  // uniform class mass
    CHECK(sci({0.8, 0.0, 0.2, 0.0}, D) == Catch::Approx(0.6).margin(1e-15));
}

TEST_CASE("sci rejects a zero coefficient vector") {
    const auto D = identity_dictionary(4, {2, 2});
    CHECK_THROWS_AS(sci(Vector(4, 0.0), D), ZeroCoefficientVector);
}

TEST_CASE("sci stays in [0,1] and is scale invariant on random vectors") {
    const auto D = identity_dictionary(12, {3, 4, 5});
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const Vector c = oracle::random_vector(12, 50000 + seed);
        const double s = sci(c, D);
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
        Vector scaled = c;
        for (double& v : scaled) v *= 3.7;
        CHECK(std::abs(sci(scaled, D) - s) < 1e-12);
    }
}

// ---------------------------------------------------------------------------
// accuracy
// ---------------------------------------------------------------------------

TEST_CASE("accuracy counts correct predictions") {
    CHECK(accuracy(records_from({0, 1, 2}, {0, 1, 2})) == 1.0);
    CHECK(accuracy(records_from({0, 1, 2}, {1, 2, 0})) == 0.0);
    CHECK(accuracy(records_from({0, 1, 1, 0}, {0, 1, 1, 1})) == 0.75);
    CHECK_THROWS_AS(accuracy({}), EmptyRecordSet);
}

TEST_CASE("accuracy of concatenated record sets is the weighted mean") {
    const auto a = records_from({0, 0, 1, 1}, {0, 1, 1, 1});   // 3/4
    const auto b = records_from({2, 2}, {0, 2});               // 1/2
    auto both = a;
    both.insert(both.end(), b.begin(), b.end());
    const double expected =
        (accuracy(a) * static_cast<double>(a.size()) + accuracy(b) * static_cast<double>(b.size())) /
        static_cast<double>(both.size());
    CHECK(accuracy(both) == Catch::Approx(expected).margin(1e-15));
}

// ---------------------------------------------------------------------------
// McNemar
// ---------------------------------------------------------------------------

TEST_CASE("mcnemar_exact counts at known values") {
    CHECK(mcnemar_exact_counts(5, 5).p_value == 1.0);
    CHECK(mcnemar_exact_counts(0, 0).p_value == 1.0);
    const McNemarResult r = mcnemar_exact_counts(10, 2);
    CHECK(std::abs(r.p_value - 158.0 / 4096.0) < 1e-12);
    CHECK(std::abs(r.p_value - oracle::mcnemar_binomial_sum(10, 2)) < 1e-12);
}

TEST_CASE("mcnemar_exact matches the binomial-sum oracle across counts") {
    for (std::size_t n01 = 0; n01 <= 12; ++n01)
        for (std::size_t n10 = 0; n10 <= 12; ++n10)
            CHECK(std::abs(mcnemar_exact_counts(n01, n10).p_value -
                           oracle::mcnemar_binomial_sum(n01, n10)) < 1e-12);
}

TEST_CASE("mcnemar_exact is symmetric, exactly") {
    for (std::size_t n01 = 0; n01 <= 20; n01 += 3)
        for (std::size_t n10 = 0; n10 <= 20; n10 += 4) {
            const McNemarResult ab = mcnemar_exact_counts(n01, n10);
            const McNemarResult ba = mcnemar_exact_counts(n10, n01);
            CHECK(ab.p_value == ba.p_value);
            CHECK(ab.n01 == ba.n10);
        }
}

TEST_CASE("mcnemar_exact large discordant counts stay in [0,1]") {
    const McNemarResult r = mcnemar_exact_counts(400, 300);
    CHECK(r.p_value > 0.0);
    CHECK(r.p_value <= 1.0);
    CHECK(mcnemar_exact_counts(350, 350).p_value == 1.0);
}

TEST_CASE("mcnemar_exact pairs records and validates alignment") {
    const auto truth = std::vector<std::size_t>{0, 0, 1, 1, 2, 2};
    const auto a = records_from(truth, {0, 1, 1, 0, 2, 0});  // wrong at 1, 3, 5
    const auto b = records_from(truth, {0, 0, 1, 0, 0, 2});  // wrong at 3, 4
    const McNemarResult r = mcnemar_exact(a, b);
    CHECK(r.n01 == 2);  // a wrong, b right: samples 1, 5
    CHECK(r.n10 == 1);  // a right, b wrong: sample 4
    CHECK(r.p_value == Catch::Approx(oracle::mcnemar_binomial_sum(2, 1)).margin(1e-15));

    auto misaligned = b;
    misaligned[0].sample_id = 99;
    CHECK_THROWS_AS(mcnemar_exact(a, misaligned), MismatchedRecords);
    CHECK_THROWS_AS(mcnemar_exact(a, records_from({0}, {0})), MismatchedRecords);
}

// ---------------------------------------------------------------------------
// timing
// ---------------------------------------------------------------------------

TEST_CASE("timing_summary sums per-method solve times") {
    std::map<std::string, std::vector<PredictionRecord>> buckets;
    buckets["SRC"] = {{0, 0, 0, 0.5}, {1, 0, 0, 0.5}};
    buckets["CRC"] = {};
    auto previous = warning_handler();
    std::size_t warnings = 0;
    warning_handler() = [&](const std::string&) { ++warnings; };
    const auto totals = timing_summary(buckets);
    warning_handler() = previous;

    CHECK(totals.at("SRC").total_seconds == Catch::Approx(1.0).margin(1e-15));
    CHECK_FALSE(totals.at("SRC").empty);
    CHECK(totals.at("CRC").total_seconds == 0.0);
    CHECK(totals.at("CRC").empty);
    CHECK(warnings == 1);

    // monotonicity: adding a record never decreases the total
    buckets["SRC"].push_back({2, 0, 0, 0.25});
    const auto more = timing_summary(buckets);
    CHECK(more.at("SRC").total_seconds >= totals.at("SRC").total_seconds);
}
