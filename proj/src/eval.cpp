// SPDX-License-Identifier: Apache-2.0
#include "handgeo/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace handgeo::eval {

SimilarityTensor make_tensor(int persons, int trials) {
    if (persons < 1 || trials < 1)
        fail(ErrorCode::InvalidParameters, "tensor needs >= 1 person and trial");
    SimilarityTensor t;
    t.persons = persons;
    t.trials = trials;
    t.values.assign(static_cast<size_t>(persons) * persons * trials, 0.0);
    return t;
}

double identification_rate(const SimilarityTensor& tensor) {
    int successes = 0;
    for (int i = 0; i < tensor.persons; ++i) {
        for (int k = 0; k < tensor.trials; ++k) {
            const double own = tensor.at(i, i, k);
            bool win = true;
            for (int j = 0; j < tensor.persons && win; ++j) {
                if (j != i && !(own > tensor.at(i, j, k))) win = false;
            }
            if (win) ++successes;
        }
    }
    return static_cast<double>(successes) / (static_cast<double>(tensor.persons) * tensor.trials);
}

std::pair<std::vector<double>, std::vector<double>> split_scores(const SimilarityTensor& tensor) {
    std::vector<double> genuine, impostor;
    genuine.reserve(static_cast<size_t>(tensor.persons) * tensor.trials);
    impostor.reserve(static_cast<size_t>(tensor.persons) * (tensor.persons - 1) * tensor.trials);
    for (int i = 0; i < tensor.persons; ++i)
        for (int j = 0; j < tensor.persons; ++j)
            for (int k = 0; k < tensor.trials; ++k)
                (i == j ? genuine : impostor).push_back(tensor.at(i, j, k));
    return {std::move(genuine), std::move(impostor)};
}

DetCurve det_curve(const std::vector<double>& genuine, const std::vector<double>& impostor) {
    if (genuine.empty() || impostor.empty())
        fail(ErrorCode::EmptyScores, "det_curve needs genuine and impostor scores");

    std::vector<double> g = genuine, im = impostor;
    std::sort(g.begin(), g.end());
    std::sort(im.begin(), im.end());

    std::vector<double> thresholds;
    thresholds.reserve(g.size() + im.size() + 2);
    thresholds.push_back(-std::numeric_limits<double>::infinity());
    thresholds.insert(thresholds.end(), g.begin(), g.end());
    thresholds.insert(thresholds.end(), im.begin(), im.end());
    thresholds.push_back(std::numeric_limits<double>::infinity());
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    DetCurve curve;
    curve.samples.reserve(thresholds.size());
    const double ng = static_cast<double>(g.size());
    const double ni = static_cast<double>(im.size());
    for (const double th : thresholds) {
        // accept iff score >= threshold
        const auto g_rej = std::lower_bound(g.begin(), g.end(), th) - g.begin();
        const auto i_acc = im.end() - std::lower_bound(im.begin(), im.end(), th);
        curve.samples.push_back({th, static_cast<double>(i_acc) / ni,
                                 static_cast<double>(g_rej) / ng});
    }
    for (size_t i = 1; i < curve.samples.size(); ++i) {
        if (curve.samples[i].far > curve.samples[i - 1].far + 1e-12 ||
            curve.samples[i].frr + 1e-12 < curve.samples[i - 1].frr)
            fail(ErrorCode::InvalidParameters, "DET curve lost monotonicity");
    }
    return curve;
}

DcfResult min_dcf(const std::vector<double>& genuine, const std::vector<double>& impostor,
                  double c_miss, double c_fa, double p_true) {
    if (!(p_true > 0.0 && p_true < 1.0))
        fail(ErrorCode::InvalidParameters, "p_true must lie in (0,1)");
    const DetCurve curve = det_curve(genuine, impostor);
    DcfResult best{std::numeric_limits<double>::infinity(), 0.0};
    for (const auto& s : curve.samples) {
        const double dcf = c_miss * s.frr * p_true + c_fa * s.far * (1.0 - p_true);
        if (dcf < best.value) {
            best.value = dcf;
            best.threshold = s.threshold;
        }
    }
    return best;
}

RunStatistics run_statistics(const std::vector<double>& values) {
    if (values.empty()) fail(ErrorCode::InvalidParameters, "run_statistics needs >= 1 value");
    RunStatistics stats;
    double sum = 0.0;
    stats.min = values.front();
    stats.max = values.front();
    for (const double v : values) {
        sum += v;
        stats.min = std::min(stats.min, v);
        stats.max = std::max(stats.max, v);
    }
    stats.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double acc = 0.0;
        for (const double v : values) acc += (v - stats.mean) * (v - stats.mean);
        stats.sigma = std::sqrt(acc / static_cast<double>(values.size() - 1));
    }
    return stats;
}

void save_score_csv(const SimilarityTensor& tensor, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) fail(ErrorCode::IoError, path + ": cannot open for writing");
        out << "probe_person,probe_acq,model_person,similarity\n";
        char buf[64];
        for (int i = 0; i < tensor.persons; ++i) {
            for (int k = 0; k < tensor.trials; ++k) {
                for (int j = 0; j < tensor.persons; ++j) {
                    std::snprintf(buf, sizeof(buf), "%.17g", tensor.at(i, j, k));
                    out << i + 1 << "," << k + 1 << "," << j + 1 << "," << buf << "\n";
                }
            }
        }
        if (!out) fail(ErrorCode::IoError, path + ": write failed");
    }
    std::filesystem::rename(tmp, path);
}

SimilarityTensor load_score_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, path + ": cannot open file");
    std::string line;
    if (!std::getline(in, line) || line != "probe_person,probe_acq,model_person,similarity")
        fail(ErrorCode::UnsupportedFormat, path + ": bad score CSV header");

    struct Key {
        int person, acq, model;
        bool operator<(const Key& o) const {
            return std::tie(person, acq, model) < std::tie(o.person, o.acq, o.model);
        }
    };
    std::map<Key, double> cells;
    std::map<int, int> person_ids;
    std::map<int, int> acq_ids;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string f1, f2, f3, f4;
        if (!std::getline(ls, f1, ',') || !std::getline(ls, f2, ',') ||
            !std::getline(ls, f3, ',') || !std::getline(ls, f4, ','))
            fail(ErrorCode::UnsupportedFormat, path + ": short score CSV row");
        try {
            const Key key{std::stoi(f1), std::stoi(f2), std::stoi(f3)};
            cells[key] = std::stod(f4);
            person_ids.emplace(key.person, 0);
            person_ids.emplace(key.model, 0);
            acq_ids.emplace(key.acq, 0);
        } catch (const std::exception&) {
            fail(ErrorCode::UnsupportedFormat, path + ": bad score CSV field");
        }
    }
    int next = 0;
    for (auto& [id, idx] : person_ids) idx = next++;
    next = 0;
    for (auto& [id, idx] : acq_ids) idx = next++;

    SimilarityTensor tensor = make_tensor(static_cast<int>(person_ids.size()),
                                          static_cast<int>(acq_ids.size()));
    size_t filled = 0;
    for (const auto& [key, value] : cells) {
        tensor.at(person_ids.at(key.person), person_ids.at(key.model), acq_ids.at(key.acq)) =
            value;
        ++filled;
    }
    if (filled != tensor.values.size())
        fail(ErrorCode::UnsupportedFormat, path + ": score CSV does not cover the full tensor");
    return tensor;
}

void save_det_csv(const DetCurve& curve, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) fail(ErrorCode::IoError, path + ": cannot open for writing");
        out << "threshold,far,frr\n";
        char buf[160];
        for (const auto& s : curve.samples) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g", s.threshold, s.far, s.frr);
            out << buf << "\n";
        }
        if (!out) fail(ErrorCode::IoError, path + ": write failed");
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace handgeo::eval
