// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one check per criterion, each printing a PASS/FAIL line.
// Run with no arguments for all criteria or with a number for a single one.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "handgeo/classify.hpp"
#include "handgeo/codes.hpp"
#include "handgeo/contour.hpp"
#include "handgeo/eval.hpp"
#include "handgeo/features.hpp"
#include "handgeo/mlp.hpp"
#include "handgeo/pipeline.hpp"
#include "handgeo/synth.hpp"

using namespace handgeo;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool condition, const std::string& what) {
        if (!condition && ok) {
            ok = false;
            detail = what;
        }
    }
};

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// --- criterion 1: BCH minimum distances ------------------------------------

bool criterion_1() {
    const auto start = std::chrono::steady_clock::now();
    Check check;
    struct Row {
        int n, k, t;
    };
    const Row table[] = {{7, 4, 1},   {15, 11, 1}, {15, 7, 2},  {15, 5, 3},
                         {31, 21, 2}, {31, 16, 3}, {31, 11, 5}, {31, 6, 7}};
    for (const auto& row : table) {
        const codes::BchCode code = codes::bch_new(row.n, row.k);
        check.require(code.t == row.t, "t mismatch for (" + std::to_string(row.n) + "," +
                                           std::to_string(row.k) + ")");
        const int d = codes::min_distance(code);
        check.require(d >= 2 * row.t + 1,
                      "d_min=" + std::to_string(d) + " < 2t+1 for (" + std::to_string(row.n) +
                          "," + std::to_string(row.k) + ")");
    }
    // (31,26): sampled weight check over a million random nonzero messages.
    const codes::BchCode wide = codes::bch_new(31, 26);
    Rng rng(123);
    for (int i = 0; i < 1000000; ++i) {
        std::uint64_t msg = 0;
        while (msg == 0) msg = rng.uniform_int(std::uint64_t{1} << 26);
        if (std::popcount(codes::bch_encode(wide, msg)) < 3) {
            check.require(false, "BCH(31,26) codeword of weight < 3");
            break;
        }
    }
    const double secs = elapsed_seconds(start);
    check.require(secs < 60.0, "enumeration took " + std::to_string(secs) + "s");
    std::printf("criterion 1: %s - BCH Table-2 minimum distances (%.1fs)%s\n",
                check.ok ? "PASS" : "FAIL", secs,
                check.ok ? "" : (" [" + check.detail + "]").c_str());
    return check.ok;
}

// --- criterion 2: error correction ------------------------------------------

bool criterion_2() {
    Check check;
    // Exhaustive for (7,4): every codeword, every error pattern of weight <= t.
    {
        const codes::BchCode code = codes::bch_new(7, 4);
        for (std::uint64_t msg = 0; msg < 16 && check.ok; ++msg) {
            const std::uint64_t sent = codes::bch_encode(code, msg);
            check.require(codes::decode_nearest(code, sent) == sent, "clean word mis-decoded");
            for (int bit = 0; bit < 7; ++bit) {
                const std::uint64_t received = sent ^ (std::uint64_t{1} << bit);
                check.require(codes::decode_nearest(code, received) == sent,
                              "single error not corrected for BCH(7,4)");
            }
        }
    }
    struct Row {
        int n, k;
    };
    const Row rows[] = {{15, 11}, {15, 7}, {15, 5}, {31, 26}, {31, 21},
                        {31, 16}, {31, 11}, {31, 6}};
    for (const auto& row : rows) {
        const codes::BchCode code = codes::bch_new(row.n, row.k);
        Rng rng(1000 + row.n * 100 + row.k);
        for (int trial = 0; trial < 1000 && check.ok; ++trial) {
            const std::uint64_t msg = rng.uniform_int(std::uint64_t{1} << row.k);
            const std::uint64_t sent = codes::bch_encode(code, msg);
            const int flips = static_cast<int>(rng.uniform_int(code.t + 1));
            std::set<int> positions;
            while (static_cast<int>(positions.size()) < flips)
                positions.insert(static_cast<int>(rng.uniform_int(code.n)));
            std::uint64_t received = sent;
            for (const int pos : positions) received ^= std::uint64_t{1} << pos;
            check.require(codes::decode_nearest(code, received) == sent,
                          "decode failed for (" + std::to_string(row.n) + "," +
                              std::to_string(row.k) + ")");
        }
    }
    std::printf("criterion 2: %s - encode/flip/decode recovery%s\n", check.ok ? "PASS" : "FAIL",
                check.ok ? "" : (" [" + check.detail + "]").c_str());
    return check.ok;
}

// --- criterion 3: chain-code perimeter ---------------------------------------

bool criterion_3() {
    Check check;
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const int w = 10 + static_cast<int>(rng.uniform_int(70));
        const int h = 10 + static_cast<int>(rng.uniform_int(70));
        auto mask = imaging::make_binary(w + 10, h + 10, false);
        for (int y = 5; y < 5 + h; ++y)
            for (int x = 5; x < 5 + w; ++x) mask.set(x, y, true);
        const double p = contour::perimeter(contour::trace_contour(mask));
        const double want = 2.0 * (w - 1) + 2.0 * (h - 1);
        check.require(p == want, "rectangle " + std::to_string(w) + "x" + std::to_string(h) +
                                     " perimeter " + std::to_string(p));
    }
    {
        const int radius = 23;
        auto mask = imaging::make_binary(80, 80, false);
        for (int y = 0; y < 80; ++y)
            for (int x = 0; x < 80; ++x)
                if (std::abs(x - 40) + std::abs(y - 40) <= radius) mask.set(x, y, true);
        const double p = contour::perimeter(contour::trace_contour(mask));
        const double side = radius + 1;
        const double want = 4.0 * (side - 1) * std::sqrt(2.0);
        check.require(std::abs(p - want) / want <= 0.01,
                      "rotated square perimeter " + std::to_string(p) + " vs " +
                          std::to_string(want));
    }
    std::printf("criterion 3: %s - chain-code perimeter formulas%s\n", check.ok ? "PASS" : "FAIL",
                check.ok ? "" : (" [" + check.detail + "]").c_str());
    return check.ok;
}

// --- criterion 4: evaluation oracles ----------------------------------------

bool criterion_4() {
    Check check;
    Rng rng(2025);
    for (int trial = 0; trial < 100; ++trial) {
        const int persons = 2 + static_cast<int>(rng.uniform_int(10));
        const int trials = 1 + static_cast<int>(rng.uniform_int(6));
        eval::SimilarityTensor tensor = eval::make_tensor(persons, trials);
        for (auto& v : tensor.values) v = rng.uniform(-1.0, 1.0);

        int success = 0;
        for (int i = 0; i < persons; ++i)
            for (int k = 0; k < trials; ++k) {
                bool win = true;
                for (int j = 0; j < persons; ++j)
                    if (j != i && tensor.at(i, i, k) <= tensor.at(i, j, k)) win = false;
                if (win) ++success;
            }
        const double oracle = static_cast<double>(success) / (persons * trials);
        check.require(eval::identification_rate(tensor) == oracle,
                      "identification rate deviates from the counting oracle");
    }
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> genuine(5 + rng.uniform_int(30)),
            impostor(5 + rng.uniform_int(60));
        for (auto& v : genuine) v = rng.normal(0.5, 0.5);
        for (auto& v : impostor) v = rng.normal(-0.5, 0.6);
        const double p_true = 0.5;

        std::vector<double> thresholds = genuine;
        thresholds.insert(thresholds.end(), impostor.begin(), impostor.end());
        thresholds.push_back(-std::numeric_limits<double>::infinity());
        thresholds.push_back(std::numeric_limits<double>::infinity());
        double best = 1e300;
        for (const double th : thresholds) {
            int miss = 0, fa = 0;
            for (const double g : genuine) miss += g < th;
            for (const double im : impostor) fa += im >= th;
            const double dcf = p_true * miss / genuine.size() +
                               (1.0 - p_true) * fa / impostor.size();
            best = std::min(best, dcf);
        }
        check.require(eval::min_dcf(genuine, impostor).value == best,
                      "min DCF deviates from the exhaustive sweep");

        const eval::DetCurve curve = eval::det_curve(genuine, impostor);
        for (size_t i = 1; i < curve.samples.size(); ++i) {
            check.require(curve.samples[i].far <= curve.samples[i - 1].far,
                          "FAR not non-increasing");
            check.require(curve.samples[i].frr >= curve.samples[i - 1].frr,
                          "FRR not non-decreasing");
        }
    }
    std::printf("criterion 4: %s - identification/DCF/DET oracles%s\n",
                check.ok ? "PASS" : "FAIL",
                check.ok ? "" : (" [" + check.detail + "]").c_str());
    return check.ok;
}

// --- criterion 5: Levenberg-Marquardt correctness -----------------------------

bool criterion_5() {
    Check check;
    // Jacobian vs central differences on a 9x5x3 network.
    {
        mlp::TrainConfig cfg;
        cfg.seed = 31337;
        const mlp::MlpModel model = mlp::init_model(9, 5, 3, cfg);
        Rng rng(17);
        Eigen::VectorXd x(9);
        for (int i = 0; i < 9; ++i) x(i) = rng.uniform(-1.0, 1.0);
        const Eigen::MatrixXd jac = mlp::output_jacobian(model, x);
        const Eigen::VectorXd theta = mlp::flatten_parameters(model);
        mlp::MlpModel probe = model;
        const double h = 1e-5;
        for (long p = 0; p < theta.size() && check.ok; ++p) {
            Eigen::VectorXd t = theta;
            t(p) += h;
            mlp::unflatten_parameters(t, probe);
            const Eigen::VectorXd up = mlp::forward(probe, x);
            t(p) = theta(p) - h;
            mlp::unflatten_parameters(t, probe);
            const Eigen::VectorXd down = mlp::forward(probe, x);
            for (int o = 0; o < 3; ++o) {
                const double fd = (up(o) - down(o)) / (2.0 * h);
                const double an = jac(o, p);
                check.require(std::abs(fd - an) <= 1e-4 * std::max(1e-3, std::abs(an)),
                              "Jacobian column " + std::to_string(p) + " off by " +
                                  std::to_string(std::abs(fd - an)));
            }
        }
    }
    // Objective monotonicity over 50 epochs.
    {
        Rng rng(7);
        Eigen::MatrixXd data(40, 9);
        mlp::TargetMatrix targets(40, 3);
        for (long r = 0; r < 40; ++r) {
            for (long c = 0; c < 9; ++c) data(r, c) = rng.uniform(-1.0, 1.0);
            for (long c = 0; c < 3; ++c) targets(r, c) = data(r, c) > 0 ? 1.0 : -1.0;
        }
        mlp::TrainConfig cfg;
        cfg.hidden = 5;
        cfg.epochs = 50;
        cfg.seed = 11;
        const mlp::TrainResult run = mlp::train_lm(data, targets, cfg);
        for (size_t i = 1; i < run.curve.size(); ++i)
            check.require(run.curve[i] <= run.curve[i - 1],
                          "objective increased at epoch " + std::to_string(i));
    }
    // msereg(gamma = 1) equals mse.
    {
        Rng rng(13);
        mlp::TargetMatrix t(12, 4);
        Eigen::MatrixXd a(12, 4);
        for (long r = 0; r < 12; ++r)
            for (long c = 0; c < 4; ++c) {
                t(r, c) = rng.uniform(-1.0, 1.0);
                a(r, c) = rng.uniform(-1.0, 1.0);
            }
        Eigen::VectorXd weights(37);
        for (long i = 0; i < 37; ++i) weights(i) = rng.uniform(-2.0, 2.0);
        check.require(std::abs(mlp::msereg(t, a, weights, 1.0) - mlp::mse(t, a)) <= 1e-12,
                      "msereg(gamma=1) deviates from mse");
    }
    std::printf("criterion 5: %s - LM Jacobian, monotonicity, MSEREG identity%s\n",
                check.ok ? "PASS" : "FAIL",
                check.ok ? "" : (" [" + check.detail + "]").c_str());
    return check.ok;
}

// --- criterion 6: ECOC effective outputs --------------------------------------

bool criterion_6() {
    Check check;
    check.require(codes::ecoc_from_bch(codes::bch_new(31, 6), 22).bits == 30,
                  "BCH(31,6) effective outputs != 30");
    check.require(codes::ecoc_from_bch(codes::bch_new(15, 7), 22).bits == 13,
                  "BCH(15,7) effective outputs != 13");
    check.require(codes::ecoc_from_bch(codes::bch_new(15, 5), 22).bits == 15,
                  "BCH(15,5) effective outputs != 15");
    std::printf("criterion 6: %s - ECOC effective column counts 30/13/15%s\n",
                check.ok ? "PASS" : "FAIL",
                check.ok ? "" : (" [" + check.detail + "]").c_str());
    return check.ok;
}

// --- criteria 7 and 9: the protocol experiment --------------------------------

struct ProtocolRun {
    std::string feature_csv_bytes;
    std::string nn_model_bytes;
    std::string mlp_model_bytes;
    std::string metrics;
    double nn_mad_ident = 0.0;
    double nn_mse_ident = 0.0;
    double mlp_mean_ident = 0.0;
    double mlp_best_dcf = 0.0;
    double mlp_mean_dcf = 0.0;
    size_t genuine_count = 0;
    size_t impostor_count = 0;
    double seconds = 0.0;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

ProtocolRun run_protocol(const std::string& dir) {
    const auto start = std::chrono::steady_clock::now();
    ProtocolRun run;
    std::filesystem::create_directories(dir);
    synth::make_dataset(dir, 22, 10, 42, 1.0);

    const pipeline::ExtractResult extracted =
        pipeline::extract_directory(dir, pipeline::ExtractOptions{});
    const std::string feature_csv = dir + "/features.csv";
    features::save_feature_csv(extracted.rows, feature_csv);
    run.feature_csv_bytes = slurp(feature_csv);

    pipeline::ExperimentConfig nn_mad;
    nn_mad.classifier = pipeline::parse_classifier("nn-mad");
    const pipeline::ExperimentResult r_mad = pipeline::run_experiment(extracted.rows, nn_mad);
    const auto [genuine, impostor] = eval::split_scores(r_mad.tensor);
    run.genuine_count = genuine.size();
    run.impostor_count = impostor.size();
    run.nn_mad_ident = r_mad.identification_rate;
    classify::save_gallery(r_mad.gallery, dir + "/nn_mad.json");
    run.nn_model_bytes = slurp(dir + "/nn_mad.json");

    pipeline::ExperimentConfig nn_mse;
    nn_mse.classifier = pipeline::parse_classifier("nn-mse");
    run.nn_mse_ident = pipeline::run_experiment(extracted.rows, nn_mse).identification_rate;

    pipeline::ExperimentConfig mlp_cfg;
    mlp_cfg.classifier = pipeline::parse_classifier("mlp-opc:30");
    mlp_cfg.epochs = 10;
    mlp_cfg.starts = 20;
    mlp_cfg.seed = 42;
    const pipeline::ExperimentResult r_mlp = pipeline::run_experiment(extracted.rows, mlp_cfg);
    const eval::RunStatistics ident_stats = eval::run_statistics(r_mlp.ident_per_start);
    const eval::RunStatistics dcf_stats = eval::run_statistics(r_mlp.dcf_per_start);
    run.mlp_mean_ident = ident_stats.mean;
    run.mlp_best_dcf = r_mlp.dcf.value;
    run.mlp_mean_dcf = dcf_stats.mean;
    classify::save_gallery(r_mlp.gallery, dir + "/mlp_opc.json");
    run.mlp_model_bytes = slurp(dir + "/mlp_opc.json");

    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "nn_mad_ident=%.17g\nnn_mse_ident=%.17g\nmlp_mean_ident=%.17g\n"
                  "mlp_sigma_ident=%.17g\nmlp_max_ident=%.17g\nmlp_best_dcf=%.17g\n"
                  "mlp_mean_dcf=%.17g\nmlp_min_dcf=%.17g\n",
                  run.nn_mad_ident, run.nn_mse_ident, ident_stats.mean, ident_stats.sigma,
                  ident_stats.max, run.mlp_best_dcf, dcf_stats.mean, dcf_stats.min);
    run.metrics = buf;
    run.seconds = elapsed_seconds(start);
    return run;
}

const ProtocolRun& cached_protocol(int index) {
    static ProtocolRun first;
    static ProtocolRun second;
    static bool have_first = false, have_second = false;
    const std::string base = std::filesystem::temp_directory_path().string();
    if (index == 0) {
        if (!have_first) {
            first = run_protocol(base + "/handgeo_acceptance_run1");
            have_first = true;
        }
        return first;
    }
    if (!have_second) {
        second = run_protocol(base + "/handgeo_acceptance_run2");
        have_second = true;
    }
    return second;
}

bool criterion_7() {
    Check check;
    const ProtocolRun& run = cached_protocol(0);
    check.require(run.genuine_count == 110,
                  "genuine count " + std::to_string(run.genuine_count) + " != 110");
    check.require(run.impostor_count == 2310,
                  "impostor count " + std::to_string(run.impostor_count) + " != 2310");
    check.require(run.genuine_count + run.impostor_count == 2420, "total trials != 2420");
    check.require(run.nn_mad_ident >= 0.90,
                  "NN-MAD identification " + std::to_string(run.nn_mad_ident) + " < 0.90");
    check.require(run.mlp_mean_ident >= run.nn_mse_ident,
                  "MLP mean identification " + std::to_string(run.mlp_mean_ident) +
                      " below NN-MSE " + std::to_string(run.nn_mse_ident));
    check.require(run.mlp_best_dcf <= 0.10,
                  "MLP min DCF " + std::to_string(run.mlp_best_dcf) + " > 0.10");
    check.require(run.seconds < 600.0,
                  "protocol took " + std::to_string(run.seconds) + "s (>= 600)");
    std::printf(
        "criterion 7: %s - protocol experiment (nn_mad=%.4f nn_mse=%.4f mlp_mean=%.4f "
        "mlp_dcf=%.4f, %.0fs)%s\n",
        check.ok ? "PASS" : "FAIL", run.nn_mad_ident, run.nn_mse_ident, run.mlp_mean_ident,
        run.mlp_best_dcf, run.seconds, check.ok ? "" : (" [" + check.detail + "]").c_str());
    return check.ok;
}

// --- criterion 8: defective acquisitions --------------------------------------

bool criterion_8() {
    Check check;
    int rejected = 0;
    const int cases = 50;
    for (int i = 0; i < cases; ++i) {
        const synth::HandParams person = synth::sample_person(9000 + i);
        const synth::DefectKind kind =
            i % 2 == 0 ? synth::DefectKind::MergedFingers : synth::DefectKind::CutFinger;
        const synth::Acquisition acq =
            synth::render(synth::make_defective(person, kind), 77 + i);
        try {
            const auto filtered = imaging::lowpass_filter(acq.image, 2);
            const auto chain = contour::trace_contour(imaging::binarize(filtered, 0.07));
            (void)contour::find_landmarks(chain);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::DefectiveAcquisition) ++rejected;
        }
    }
    check.require(rejected == cases,
                  std::to_string(rejected) + "/" + std::to_string(cases) + " rejected");
    std::printf("criterion 8: %s - defective acquisitions rejected (%d/%d)%s\n",
                check.ok ? "PASS" : "FAIL", rejected, cases,
                check.ok ? "" : (" [" + check.detail + "]").c_str());
    return check.ok;
}

bool criterion_9() {
    Check check;
    const ProtocolRun& a = cached_protocol(0);
    const ProtocolRun& b = cached_protocol(1);
    check.require(!a.feature_csv_bytes.empty(), "first run produced no feature CSV");
    check.require(a.feature_csv_bytes == b.feature_csv_bytes, "feature CSVs differ");
    check.require(a.nn_model_bytes == b.nn_model_bytes, "NN gallery files differ");
    check.require(a.mlp_model_bytes == b.mlp_model_bytes, "MLP gallery files differ");
    check.require(a.metrics == b.metrics, "reported metrics differ");
    std::printf("criterion 9: %s - bit-identical rerun with the same seeds%s\n",
                check.ok ? "PASS" : "FAIL",
                check.ok ? "" : (" [" + check.detail + "]").c_str());
    return check.ok;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<bool()>> criteria = {
        criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
        criterion_6, criterion_7, criterion_8, criterion_9};

    int failures = 0;
    if (argc > 1) {
        const int which = std::atoi(argv[1]);
        if (which < 1 || which > static_cast<int>(criteria.size())) {
            std::fprintf(stderr, "usage: %s [1-%zu]\n", argv[0], criteria.size());
            return 2;
        }
        failures += criteria[static_cast<size_t>(which - 1)]() ? 0 : 1;
    } else {
        for (const auto& criterion : criteria) failures += criterion() ? 0 : 1;
    }
    return failures;
}
