// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "handgeo/eval.hpp"
#include "test_support.hpp"

using namespace handgeo;
using namespace handgeo::eval;
using test_support::expect_error;

namespace {

// Direct restatement of the counting loop, kept independent of the library.
double ident_oracle(const SimilarityTensor& t) {
    int success = 0, error = 0;
    for (int i = 0; i < t.persons; ++i) {
        for (int k = 0; k < t.trials; ++k) {
            bool ok = true;
            for (int j = 0; j < t.persons; ++j)
                if (j != i && t.at(i, i, k) <= t.at(i, j, k)) ok = false;
            if (ok)
                ++success;
            else
                ++error;
        }
    }
    return static_cast<double>(success) / (success + error);
}

SimilarityTensor random_tensor(Rng& rng, int persons, int trials) {
    SimilarityTensor t = make_tensor(persons, trials);
    for (auto& v : t.values) v = rng.uniform(-1.0, 1.0);
    return t;
}

}  // namespace

TEST_CASE("identification_rate on hand-built tensors") {
    SimilarityTensor perfect = make_tensor(22, 5);
    for (int i = 0; i < 22; ++i)
        for (int k = 0; k < 5; ++k) perfect.at(i, i, k) = 1.0;
    CHECK(identification_rate(perfect) == 1.0);

    // A single tie on the diagonal counts as an error: 109/110.
    SimilarityTensor tied = perfect;
    tied.at(3, 7, 2) = 1.0;
    CHECK(identification_rate(tied) == doctest::Approx(109.0 / 110.0));
}

TEST_CASE("identification_rate equals the triple-loop oracle on random tensors") {
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const int persons = 2 + static_cast<int>(rng.uniform_int(8));
        const int trials = 1 + static_cast<int>(rng.uniform_int(5));
        const SimilarityTensor t = random_tensor(rng, persons, trials);
        CHECK(identification_rate(t) == ident_oracle(t));
    }
}

TEST_CASE("identification_rate is invariant under increasing transforms") {
    Rng rng(31);
    SimilarityTensor t = random_tensor(rng, 9, 4);
    const double before = identification_rate(t);
    for (auto& v : t.values) v = std::exp(2.0 * v) + 3.0;
    CHECK(identification_rate(t) == before);
}

TEST_CASE("split_scores partitions the tensor") {
    Rng rng(5);
    const SimilarityTensor t = random_tensor(rng, 22, 5);
    const auto [genuine, impostor] = split_scores(t);
    CHECK(genuine.size() == 110);
    CHECK(impostor.size() == 2310);
    CHECK(genuine.size() + impostor.size() == t.values.size());

    // Every entry appears exactly once across the two lists.
    std::vector<double> all = t.values;
    std::vector<double> merged;
    merged.insert(merged.end(), genuine.begin(), genuine.end());
    merged.insert(merged.end(), impostor.begin(), impostor.end());
    std::sort(all.begin(), all.end());
    std::sort(merged.begin(), merged.end());
    CHECK(all == merged);

    const SimilarityTensor small = random_tensor(rng, 2, 1);
    const auto [g2, i2] = split_scores(small);
    CHECK(g2.size() == 2);
    CHECK(i2.size() == 2);
}

TEST_CASE("det_curve endpoints and monotonicity") {
    const std::vector<double> genuine = {1.0, 1.0, 1.0};
    const std::vector<double> impostor = {0.0, 0.0};
    const DetCurve curve = det_curve(genuine, impostor);
    CHECK(curve.samples.front().threshold == -std::numeric_limits<double>::infinity());
    CHECK(curve.samples.front().far == 1.0);
    CHECK(curve.samples.front().frr == 0.0);
    CHECK(curve.samples.back().far == 0.0);
    CHECK(curve.samples.back().frr == 1.0);

    bool perfect_point = false;
    for (const auto& s : curve.samples)
        if (s.far == 0.0 && s.frr == 0.0) perfect_point = true;
    CHECK(perfect_point);

    expect_error(ErrorCode::EmptyScores, [&] { (void)det_curve({}, impostor); });
}

TEST_CASE("det_curve single overlapping score") {
    const DetCurve curve = det_curve({0.5}, {0.5});
    // accept iff score >= threshold: at 0.5 everyone is accepted.
    for (const auto& s : curve.samples) {
        if (s.threshold == 0.5) {
            CHECK(s.far == 1.0);
            CHECK(s.frr == 0.0);
        }
        if (s.threshold > 0.5) {
            CHECK(s.far == 0.0);
            CHECK(s.frr == 1.0);
        }
    }
}

TEST_CASE("det_curve stays monotone on random scores") {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> genuine(20), impostor(30);
        for (auto& v : genuine) v = rng.normal(0.7, 0.4);
        for (auto& v : impostor) v = rng.normal(-0.2, 0.5);
        const DetCurve curve = det_curve(genuine, impostor);
        for (size_t i = 1; i < curve.samples.size(); ++i) {
            CHECK(curve.samples[i].far <= curve.samples[i - 1].far);
            CHECK(curve.samples[i].frr >= curve.samples[i - 1].frr);
        }
    }
}

TEST_CASE("min_dcf on degenerate score sets") {
    CHECK(min_dcf({1.0, 0.9}, {0.1, 0.0}).value == 0.0);
    // Identical singleton scores: one error class is unavoidable.
    const DcfResult r = min_dcf({0.5}, {0.5});
    CHECK(r.value == doctest::Approx(0.5));
    expect_error(ErrorCode::EmptyScores, [] { (void)min_dcf({}, {0.1}); });
    expect_error(ErrorCode::InvalidParameters, [] { (void)min_dcf({0.1}, {0.2}, 1, 1, 0.0); });
}

TEST_CASE("min_dcf equals exhaustive threshold evaluation") {
    Rng rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> genuine(12), impostor(18);
        for (auto& v : genuine) v = rng.normal(0.4, 0.5);
        for (auto& v : impostor) v = rng.normal(-0.3, 0.6);
        const double p_true = 0.1 + 0.8 * rng.uniform();

        // Brute force: sweep every candidate threshold.
        std::vector<double> candidates = genuine;
        candidates.insert(candidates.end(), impostor.begin(), impostor.end());
        candidates.push_back(-std::numeric_limits<double>::infinity());
        candidates.push_back(std::numeric_limits<double>::infinity());
        std::sort(candidates.begin(), candidates.end());
        double best = 1e300;
        double best_threshold = 0.0;
        for (const double th : candidates) {
            int miss = 0, fa = 0;
            for (const double g : genuine) miss += g < th;
            for (const double im : impostor) fa += im >= th;
            const double dcf = p_true * miss / genuine.size() +
                               (1.0 - p_true) * fa / impostor.size();
            if (dcf < best) {
                best = dcf;
                best_threshold = th;
            }
        }
        const DcfResult got = min_dcf(genuine, impostor, 1.0, 1.0, p_true);
        CHECK(got.value == doctest::Approx(best).epsilon(1e-12));
        CHECK(got.threshold == best_threshold);

        // Optimality against arbitrary thresholds and the +/-inf bound.
        CHECK(got.value <= 0.5 + 1e-12);
        for (int probe = 0; probe < 5; ++probe) {
            const double th = rng.uniform(-2.0, 2.0);
            int miss = 0, fa = 0;
            for (const double g : genuine) miss += g < th;
            for (const double im : impostor) fa += im >= th;
            const double dcf = p_true * miss / genuine.size() +
                               (1.0 - p_true) * fa / impostor.size();
            CHECK(got.value <= dcf + 1e-12);
        }
    }
}

TEST_CASE("run_statistics mean, sigma, extremes") {
    const RunStatistics single = run_statistics({91.82});
    CHECK(single.mean == doctest::Approx(91.82));
    CHECK(single.sigma == 0.0);
    CHECK(single.max == doctest::Approx(91.82));

    const RunStatistics pair = run_statistics({80.0, 90.0});
    CHECK(pair.mean == doctest::Approx(85.0));
    CHECK(pair.sigma == doctest::Approx(7.0710678).epsilon(1e-6));
    CHECK(pair.max == 90.0);
    CHECK(pair.min == 80.0);
}

TEST_CASE("score CSV round trip") {
    Rng rng(3);
    const SimilarityTensor t = random_tensor(rng, 5, 3);
    const auto dir = test_support::temp_dir("eval");
    save_score_csv(t, dir + "/scores.csv");
    const SimilarityTensor back = load_score_csv(dir + "/scores.csv");
    CHECK(back.persons == t.persons);
    CHECK(back.trials == t.trials);
    CHECK(back.values == t.values);
}
