// SPDX-License-Identifier: Apache-2.0
#include "handgeo/classify.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

namespace handgeo::classify {

using nlohmann::json;

double nn_distance(const std::vector<double>& x, const std::vector<double>& y,
                   codes::DecodeMetric metric) {
    if (x.size() != y.size())
        fail(ErrorCode::DimensionMismatch, "vectors of dimension " + std::to_string(x.size()) +
                                               " and " + std::to_string(y.size()));
    double acc = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        acc += metric == codes::DecodeMetric::Mse ? d * d : std::abs(d);
    }
    return acc;
}

std::vector<double> score_nn(const GalleryModel& gallery, const std::vector<double>& probe) {
    if (gallery.kind != GalleryKind::Nn)
        fail(ErrorCode::KindMismatch, "score_nn requires a nearest-neighbor gallery");
    if (gallery.templates.empty()) fail(ErrorCode::EmptyGallery, "gallery holds no templates");
    std::vector<double> best(static_cast<size_t>(gallery.persons),
                             std::numeric_limits<double>::infinity());
    for (size_t t = 0; t < gallery.templates.size(); ++t) {
        const int person = gallery.template_person[t];
        const double d = nn_distance(probe, gallery.templates[t], gallery.metric);
        best[person] = std::min(best[person], d);
    }
    std::vector<double> similarity(best.size());
    for (size_t p = 0; p < best.size(); ++p) similarity[p] = -best[p];
    return similarity;
}

std::vector<double> score_mlp(const GalleryModel& gallery, const std::vector<double>& probe) {
    if (gallery.kind == GalleryKind::MlpMonolithic) {
        const std::vector<double> outputs = mlp::forward(gallery.model, probe);
        if (gallery.codebook.kind == codes::CodebookKind::OnePerClass) return outputs;
        return codes::hamming_decode(outputs, gallery.codebook, gallery.metric).scores;
    }
    if (gallery.kind == GalleryKind::MlpPerUser) {
        std::vector<double> similarity(gallery.user_models.size());
        for (size_t u = 0; u < gallery.user_models.size(); ++u)
            similarity[u] = mlp::forward(gallery.user_models[u], probe)[0];
        return similarity;
    }
    fail(ErrorCode::KindMismatch, "score_mlp requires an MLP gallery");
}

std::vector<double> score(const GalleryModel& gallery, const std::vector<double>& probe) {
    return gallery.kind == GalleryKind::Nn ? score_nn(gallery, probe)
                                           : score_mlp(gallery, probe);
}

VerifyResult verify(const GalleryModel& gallery, const std::vector<double>& probe, int claimed,
                    double threshold) {
    if (claimed < 0 || claimed >= gallery.persons)
        fail(ErrorCode::UnknownClaim, "claimed person " + std::to_string(claimed) +
                                          " outside the enrolled " +
                                          std::to_string(gallery.persons));
    const std::vector<double> similarity = score(gallery, probe);
    VerifyResult result;
    result.score = similarity[claimed];
    result.accept = result.score >= threshold;
    return result;
}

namespace {

const char* kind_name(GalleryKind kind) {
    switch (kind) {
        case GalleryKind::Nn: return "nn";
        case GalleryKind::MlpMonolithic: return "mlp_monolithic";
        case GalleryKind::MlpPerUser: return "mlp_per_user";
    }
    return "unknown";
}

GalleryKind kind_from_name(const std::string& name) {
    if (name == "nn") return GalleryKind::Nn;
    if (name == "mlp_monolithic") return GalleryKind::MlpMonolithic;
    if (name == "mlp_per_user") return GalleryKind::MlpPerUser;
    fail(ErrorCode::UnsupportedFormat, "unknown gallery kind '" + name + "'");
}

}  // namespace

void save_gallery(const GalleryModel& gallery, const std::string& path) {
    json doc;
    doc["kind"] = kind_name(gallery.kind);
    doc["persons"] = gallery.persons;
    doc["metric"] = gallery.metric == codes::DecodeMetric::Mse ? "mse" : "mad";
    doc["clamp"] = gallery.clamp;
    doc["scaling"] = {{"min", gallery.scaling.min}, {"max", gallery.scaling.max}};
    switch (gallery.kind) {
        case GalleryKind::Nn:
            doc["templates"] = gallery.templates;
            doc["template_person"] = gallery.template_person;
            break;
        case GalleryKind::MlpMonolithic:
            doc["model"] = json::parse(mlp::model_to_json(gallery.model, "embedded"));
            doc["codebook"] = codes::codebook_to_text(gallery.codebook);
            break;
        case GalleryKind::MlpPerUser: {
            json models = json::array();
            for (const auto& m : gallery.user_models)
                models.push_back(json::parse(mlp::model_to_json(m)));
            doc["models"] = std::move(models);
            break;
        }
    }
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) fail(ErrorCode::IoError, path + ": cannot open for writing");
        out << doc.dump(2) << "\n";
        if (!out) fail(ErrorCode::IoError, path + ": write failed");
    }
    std::filesystem::rename(tmp, path);
}

GalleryModel load_gallery(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, path + ": cannot open file");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        fail(ErrorCode::UnsupportedFormat, path + ": " + e.what());
    }
    GalleryModel gallery;
    try {
        gallery.kind = kind_from_name(doc.at("kind").get<std::string>());
        gallery.persons = doc.at("persons").get<int>();
        gallery.metric = doc.at("metric").get<std::string>() == "mse" ? codes::DecodeMetric::Mse
                                                                      : codes::DecodeMetric::Mad;
        gallery.clamp = doc.value("clamp", true);
        gallery.scaling.min = doc.at("scaling").at("min").get<std::vector<double>>();
        gallery.scaling.max = doc.at("scaling").at("max").get<std::vector<double>>();
        switch (gallery.kind) {
            case GalleryKind::Nn:
                gallery.templates = doc.at("templates").get<std::vector<std::vector<double>>>();
                gallery.template_person = doc.at("template_person").get<std::vector<int>>();
                break;
            case GalleryKind::MlpMonolithic:
                gallery.model = mlp::model_from_json(doc.at("model").dump());
                gallery.codebook = codes::codebook_from_text(doc.at("codebook").get<std::string>());
                break;
            case GalleryKind::MlpPerUser:
                for (const auto& m : doc.at("models"))
                    gallery.user_models.push_back(mlp::model_from_json(m.dump()));
                break;
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::UnsupportedFormat, path + ": " + e.what());
    }
    return gallery;
}

}  // namespace handgeo::classify
