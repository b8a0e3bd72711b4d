// SPDX-License-Identifier: Apache-2.0
#include "handgeo/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "handgeo/contour.hpp"
#include "handgeo/synth.hpp"

namespace handgeo::pipeline {

namespace fs = std::filesystem;

features::FeatureVector extract_image(const imaging::GrayImage& img, const ExtractOptions& opts) {
    const imaging::GrayImage filtered =
        opts.filter_radius > 0 ? imaging::lowpass_filter(img, opts.filter_radius) : img;
    imaging::BinaryImage mask = imaging::binarize(filtered, opts.threshold);
    if (opts.invert) mask = imaging::complement(mask);
    const contour::ChainCode chain = contour::trace_contour(mask);
    const contour::Landmarks lm = contour::find_landmarks(chain);
    return features::measure(chain, lm);
}

ExtractResult extract_directory(const std::string& dir, const ExtractOptions& opts) {
    if (!fs::is_directory(dir)) fail(ErrorCode::IoError, dir + ": not a directory");
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext == ".pgm" || ext == ".bmp") names.push_back(entry.path().filename().string());
    }
    std::sort(names.begin(), names.end());

    ExtractResult result;
    for (const auto& name : names) {
        int person = 0, acq = 0;
        if (std::sscanf(name.c_str(), "p%d_a%d", &person, &acq) != 2) continue;
        const std::string path = dir + "/" + name;
        try {
            const imaging::GrayImage img = imaging::load_image(path);
            features::FeatureRow row;
            row.person = person;
            row.acquisition = acq;
            row.features = extract_image(img, opts);
            result.rows.push_back(std::move(row));
            if (!opts.edges_dir.empty()) {
                fs::create_directories(opts.edges_dir);
                const imaging::GrayImage filtered =
                    opts.filter_radius > 0 ? imaging::lowpass_filter(img, opts.filter_radius)
                                           : img;
                imaging::BinaryImage mask = imaging::binarize(filtered, opts.threshold);
                if (opts.invert) mask = imaging::complement(mask);
                imaging::save_mask_pgm(imaging::detect_edges(mask, opts.log_sigma),
                                       opts.edges_dir + "/" + name);
            }
        } catch (const Error& e) {
            result.rejects.push_back({name, e.what()});
        }
    }
    return result;
}

ClassifierSpec parse_classifier(const std::string& text) {
    ClassifierSpec spec;
    auto bad = [&]() {
        fail(ErrorCode::InvalidArgument, "cannot parse classifier spec '" + text + "'");
    };
    if (text == "nn-mse") {
        spec.type = ClassifierSpec::Type::NnMse;
        spec.metric = codes::DecodeMetric::Mse;
        spec.metric_embedded = true;
        return spec;
    }
    if (text == "nn-mad") {
        spec.type = ClassifierSpec::Type::NnMad;
        spec.metric = codes::DecodeMetric::Mad;
        spec.metric_embedded = true;
        return spec;
    }
    std::vector<std::string> parts;
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, ':')) parts.push_back(part);
    if (parts.empty()) bad();
    if (parts[0] == "mlp-opc" || parts[0] == "mlp-peruser") {
        spec.type = parts[0] == "mlp-opc" ? ClassifierSpec::Type::MlpOpc
                                          : ClassifierSpec::Type::MlpPerUser;
        spec.hidden = 30;
        if (parts.size() > 2) bad();
        if (parts.size() == 2) {
            try {
                spec.hidden = std::stoi(parts[1]);
            } catch (const std::exception&) {
                bad();
            }
        }
        if (spec.hidden < 1) bad();
        return spec;
    }
    if (parts[0] != "mlp-ecoc" || parts.size() < 2) bad();
    spec.hidden = 40;  // ECOC experiments use the wider hidden layer
    if (parts[1].rfind("BCH(", 0) == 0 || parts[1].rfind("bch(", 0) == 0) {
        spec.type = ClassifierSpec::Type::MlpEcocBch;
        if (std::sscanf(parts[1].c_str() + 4, "%d,%d", &spec.bch_n, &spec.bch_k) != 2 ||
            parts[1].back() != ')')
            bad();
        if (parts.size() == 3) {
            if (parts[2] == "mse")
                spec.metric = codes::DecodeMetric::Mse;
            else if (parts[2] == "mad")
                spec.metric = codes::DecodeMetric::Mad;
            else
                bad();
            spec.metric_embedded = true;
        } else if (parts.size() > 3) {
            bad();
        }
        return spec;
    }
    if (parts[1] == "random") {
        spec.type = ClassifierSpec::Type::MlpEcocRandom;
        if (parts.size() != 4) bad();
        try {
            spec.random_bits = std::stoi(parts[2]);
            spec.random_iterations = std::stoi(parts[3]);
        } catch (const std::exception&) {
            bad();
        }
        return spec;
    }
    fail(ErrorCode::InvalidArgument, "cannot parse classifier spec '" + text + "'");
}

namespace {

struct PreparedData {
    std::vector<int> person_ids;  // sorted original ids; index = 0-based label
    // scaled SELECTED9 vectors
    std::vector<std::vector<double>> train_vecs;
    std::vector<int> train_labels;
    features::ScalingParams scaling;
};

features::FeatureVector to_selected(const features::FeatureVector& fv) {
    return fv.schema == features::Schema::Full13 ? features::select(fv) : fv;
}

PreparedData prepare_training(const std::vector<features::FeatureRow>& rows,
                              const ExperimentConfig& cfg) {
    std::set<int> acq_set(cfg.train_acqs.begin(), cfg.train_acqs.end());
    std::set<int> ids;
    for (const auto& row : rows) ids.insert(row.person);
    PreparedData data;
    data.person_ids.assign(ids.begin(), ids.end());
    std::map<int, int> index;
    for (size_t i = 0; i < data.person_ids.size(); ++i)
        index[data.person_ids[i]] = static_cast<int>(i);

    std::vector<features::FeatureVector> selected;
    for (const auto& row : rows) {
        if (!acq_set.contains(row.acquisition)) continue;
        selected.push_back(to_selected(row.features));
        data.train_labels.push_back(index.at(row.person));
    }
    if (selected.empty()) fail(ErrorCode::EmptyTrainingSet, "no rows in the training split");
    data.scaling = features::fit_scaling(selected);
    data.train_vecs.reserve(selected.size());
    for (const auto& fv : selected)
        data.train_vecs.push_back(features::scale(fv, data.scaling, !cfg.no_clamp).values);
    return data;
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& vecs) {
    Eigen::MatrixXd m(static_cast<long>(vecs.size()), static_cast<long>(vecs.front().size()));
    for (size_t r = 0; r < vecs.size(); ++r)
        for (size_t c = 0; c < vecs[r].size(); ++c)
            m(static_cast<long>(r), static_cast<long>(c)) = vecs[r][c];
    return m;
}

mlp::TrainConfig make_train_config(const ExperimentConfig& cfg, int hidden, std::uint64_t seed) {
    mlp::TrainConfig tc;
    tc.hidden = hidden;
    tc.epochs = cfg.epochs;
    tc.objective = cfg.msereg ? mlp::Objective::MseReg : mlp::Objective::Mse;
    tc.gamma = cfg.gamma;
    tc.seed = seed;
    return tc;
}

codes::Codebook make_codebook(const ClassifierSpec& spec, int persons, std::uint64_t seed) {
    switch (spec.type) {
        case ClassifierSpec::Type::MlpOpc:
        case ClassifierSpec::Type::MlpPerUser:
            return codes::one_per_class(persons);
        case ClassifierSpec::Type::MlpEcocBch:
            return codes::ecoc_from_bch(codes::bch_new(spec.bch_n, spec.bch_k), persons);
        case ClassifierSpec::Type::MlpEcocRandom:
            return codes::random_ecoc(persons, spec.random_bits, spec.random_iterations,
                                      seed ^ 0xEC0C)
                .book;
        default:
            fail(ErrorCode::InvalidArgument, "codebook requested for a NN classifier");
    }
}

struct TrainedStart {
    classify::GalleryModel gallery;
    double objective = 0.0;
};

TrainedStart train_one_start(const PreparedData& data, const ExperimentConfig& cfg,
                             const codes::Codebook& book, int start_index) {
    const ClassifierSpec& spec = cfg.classifier;
    const int persons = static_cast<int>(data.person_ids.size());
    const Eigen::MatrixXd inputs = to_matrix(data.train_vecs);

    TrainedStart out;
    out.gallery.persons = persons;
    out.gallery.metric = spec.metric;
    out.gallery.scaling = data.scaling;
    out.gallery.clamp = !cfg.no_clamp;

    if (spec.type == ClassifierSpec::Type::MlpPerUser) {
        out.gallery.kind = classify::GalleryKind::MlpPerUser;
        double total = 0.0;
        for (int u = 0; u < persons; ++u) {
            // Genuine samples target +1, every other user's samples -1.
            mlp::TargetMatrix targets(inputs.rows(), 1);
            for (long s = 0; s < inputs.rows(); ++s)
                targets(s, 0) = data.train_labels[static_cast<size_t>(s)] == u ? 1.0 : -1.0;
            mlp::TrainConfig tc = make_train_config(
                cfg, spec.hidden,
                cfg.seed + static_cast<std::uint64_t>(start_index) * persons + u);
            mlp::TrainResult run = mlp::train_lm(inputs, targets, tc);
            total += run.curve.back();
            out.gallery.user_models.push_back(std::move(run.model));
        }
        out.objective = total;
        return out;
    }

    out.gallery.kind = classify::GalleryKind::MlpMonolithic;
    out.gallery.codebook = book;
    const mlp::TargetMatrix targets = mlp::build_targets(data.train_labels, book);
    mlp::TrainConfig tc = make_train_config(cfg, spec.hidden,
                                            cfg.seed + static_cast<std::uint64_t>(start_index));
    mlp::TrainResult run = mlp::train_lm(inputs, targets, tc);
    out.objective = run.curve.back();
    out.gallery.model = std::move(run.model);
    return out;
}

classify::GalleryModel build_nn_gallery(const PreparedData& data, const ExperimentConfig& cfg) {
    classify::GalleryModel gallery;
    gallery.kind = classify::GalleryKind::Nn;
    gallery.persons = static_cast<int>(data.person_ids.size());
    gallery.metric = cfg.classifier.metric;
    gallery.scaling = data.scaling;
    gallery.clamp = !cfg.no_clamp;
    gallery.templates = data.train_vecs;
    gallery.template_person = data.train_labels;
    return gallery;
}

}  // namespace

classify::GalleryModel train_gallery(const std::vector<features::FeatureRow>& rows,
                                     const ExperimentConfig& cfg) {
    const PreparedData data = prepare_training(rows, cfg);
    if (cfg.classifier.is_nn()) return build_nn_gallery(data, cfg);
    const codes::Codebook book =
        make_codebook(cfg.classifier, static_cast<int>(data.person_ids.size()), cfg.seed);
    TrainedStart best = train_one_start(data, cfg, book, 0);
    for (int s = 1; s < cfg.starts; ++s) {
        TrainedStart candidate = train_one_start(data, cfg, book, s);
        if (candidate.objective < best.objective) best = std::move(candidate);
    }
    return best.gallery;
}

eval::SimilarityTensor build_tensor(const classify::GalleryModel& gallery,
                                    const std::vector<features::FeatureRow>& rows,
                                    const std::vector<int>& test_acqs) {
    std::set<int> acq_set(test_acqs.begin(), test_acqs.end());
    std::set<int> ids;
    for (const auto& row : rows) ids.insert(row.person);
    std::vector<int> person_ids(ids.begin(), ids.end());
    if (static_cast<int>(person_ids.size()) != gallery.persons)
        fail(ErrorCode::DimensionMismatch, "feature store persons do not match the gallery");
    std::map<int, int> index;
    for (size_t i = 0; i < person_ids.size(); ++i) index[person_ids[i]] = static_cast<int>(i);

    // (person, acq)-sorted probes, acq rank = trial index.
    std::map<int, std::vector<const features::FeatureRow*>> per_person;
    for (const auto& row : rows) {
        if (!acq_set.contains(row.acquisition)) continue;
        per_person[row.person].push_back(&row);
    }
    if (per_person.empty()) fail(ErrorCode::EmptyScores, "no rows in the test split");
    size_t trials = 0;
    for (auto& [person, list] : per_person) {
        std::sort(list.begin(), list.end(),
                  [](const auto* a, const auto* b) { return a->acquisition < b->acquisition; });
        if (trials == 0) trials = list.size();
        if (list.size() != trials)
            fail(ErrorCode::DimensionMismatch,
                 "person " + std::to_string(person) + " has an unequal trial count");
    }

    eval::SimilarityTensor tensor =
        eval::make_tensor(gallery.persons, static_cast<int>(trials));
    for (const auto& [person, list] : per_person) {
        const int i = index.at(person);
        for (size_t k = 0; k < list.size(); ++k) {
            const features::FeatureVector fv =
                list[k]->features.schema == features::Schema::Full13
                    ? features::select(list[k]->features)
                    : list[k]->features;
            const std::vector<double> probe =
                features::scale(fv, gallery.scaling, gallery.clamp).values;
            const std::vector<double> similarity = classify::score(gallery, probe);
            for (int j = 0; j < gallery.persons; ++j)
                tensor.at(i, j, static_cast<int>(k)) = similarity[j];
        }
    }
    return tensor;
}

ExperimentResult run_experiment(const std::vector<features::FeatureRow>& rows,
                                const ExperimentConfig& cfg) {
    const PreparedData data = prepare_training(rows, cfg);
    ExperimentResult result;

    auto evaluate = [&](const classify::GalleryModel& gallery) {
        eval::SimilarityTensor tensor = build_tensor(gallery, rows, cfg.test_acqs);
        const double ident = eval::identification_rate(tensor);
        const auto [genuine, impostor] = eval::split_scores(tensor);
        const eval::DcfResult dcf = eval::min_dcf(genuine, impostor, 1.0, 1.0, cfg.p_true);
        return std::tuple{std::move(tensor), ident, dcf};
    };

    if (cfg.classifier.is_nn()) {
        result.gallery = build_nn_gallery(data, cfg);
        auto [tensor, ident, dcf] = evaluate(result.gallery);
        result.tensor = std::move(tensor);
        result.identification_rate = ident;
        result.dcf = dcf;
        result.ident_per_start = {ident};
        result.dcf_per_start = {dcf.value};
        return result;
    }

    const codes::Codebook book =
        make_codebook(cfg.classifier, static_cast<int>(data.person_ids.size()), cfg.seed);
    int best_start = 0;
    double best_objective = 0.0;
    for (int s = 0; s < cfg.starts; ++s) {
        TrainedStart start = train_one_start(data, cfg, book, s);
        auto [tensor, ident, dcf] = evaluate(start.gallery);
        result.ident_per_start.push_back(ident);
        result.dcf_per_start.push_back(dcf.value);
        if (s == 0 || start.objective < best_objective) {
            best_objective = start.objective;
            best_start = s;
            result.gallery = std::move(start.gallery);
            result.tensor = std::move(tensor);
            result.identification_rate = ident;
            result.dcf = dcf;
        }
    }
    (void)best_start;
    return result;
}

std::vector<int> parse_acq_range(const std::string& text) {
    std::vector<int> acqs;
    std::istringstream in(text);
    std::string chunk;
    while (std::getline(in, chunk, ',')) {
        const auto dash = chunk.find('-');
        try {
            if (dash == std::string::npos) {
                acqs.push_back(std::stoi(chunk));
            } else {
                const int lo = std::stoi(chunk.substr(0, dash));
                const int hi = std::stoi(chunk.substr(dash + 1));
                if (hi < lo) fail(ErrorCode::InvalidArgument, "bad range '" + chunk + "'");
                for (int v = lo; v <= hi; ++v) acqs.push_back(v);
            }
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            fail(ErrorCode::InvalidArgument, "bad acquisition list '" + text + "'");
        }
    }
    if (acqs.empty()) fail(ErrorCode::InvalidArgument, "empty acquisition list");
    return acqs;
}

}  // namespace handgeo::pipeline
