// SPDX-License-Identifier: Apache-2.0
#include "handgeo/mlp.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

namespace handgeo::mlp {

using nlohmann::json;

MlpModel init_model(int inputs, int hidden, int outputs, const TrainConfig& cfg) {
    if (inputs < 1 || hidden < 1 || outputs < 1)
        fail(ErrorCode::InvalidParameters, "layer sizes must be positive");
    Rng rng(cfg.seed);
    MlpModel model;
    model.inputs = inputs;
    model.hidden = hidden;
    model.outputs = outputs;
    const double s1 = cfg.init_half_range / std::sqrt(static_cast<double>(inputs));
    const double s2 = cfg.init_half_range / std::sqrt(static_cast<double>(hidden));
    model.w1.resize(hidden, inputs);
    for (int r = 0; r < hidden; ++r)
        for (int c = 0; c < inputs; ++c) model.w1(r, c) = rng.uniform(-s1, s1);
    model.b1.resize(hidden);
    for (int r = 0; r < hidden; ++r) model.b1(r) = rng.uniform(-s1, s1);
    model.w2.resize(outputs, hidden);
    for (int r = 0; r < outputs; ++r)
        for (int c = 0; c < hidden; ++c) model.w2(r, c) = rng.uniform(-s2, s2);
    model.b2.resize(outputs);
    for (int r = 0; r < outputs; ++r) model.b2(r) = rng.uniform(-s2, s2);
    return model;
}

Eigen::VectorXd forward(const MlpModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.inputs)
        fail(ErrorCode::DimensionMismatch, "input has " + std::to_string(x.size()) +
                                               " components, model expects " +
                                               std::to_string(model.inputs));
    const Eigen::VectorXd a1 = (model.w1 * x + model.b1).array().tanh();
    return (model.w2 * a1 + model.b2).array().tanh();
}

std::vector<double> forward(const MlpModel& model, const std::vector<double>& x) {
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<long>(x.size()));
    const Eigen::VectorXd out = forward(model, v);
    return {out.data(), out.data() + out.size()};
}

double mse(const TargetMatrix& targets, const Eigen::MatrixXd& outputs) {
    if (targets.rows() != outputs.rows() || targets.cols() != outputs.cols())
        fail(ErrorCode::ShapeMismatch, "target and output matrices differ in shape");
    if (targets.size() == 0) return 0.0;
    return (targets - outputs).squaredNorm() / static_cast<double>(targets.size());
}

double msereg(const TargetMatrix& targets, const Eigen::MatrixXd& outputs,
              const Eigen::VectorXd& parameters, double gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0))
        fail(ErrorCode::InvalidGamma, "gamma must lie in [0,1], got " + std::to_string(gamma));
    const double weight_term =
        parameters.size() == 0 ? 0.0
                               : parameters.squaredNorm() / static_cast<double>(parameters.size());
    return gamma * mse(targets, outputs) + (1.0 - gamma) * weight_term;
}

Eigen::VectorXd flatten_parameters(const MlpModel& model) {
    Eigen::VectorXd theta(model.parameter_count());
    long pos = 0;
    for (int r = 0; r < model.hidden; ++r)
        for (int c = 0; c < model.inputs; ++c) theta(pos++) = model.w1(r, c);
    for (int r = 0; r < model.hidden; ++r) theta(pos++) = model.b1(r);
    for (int r = 0; r < model.outputs; ++r)
        for (int c = 0; c < model.hidden; ++c) theta(pos++) = model.w2(r, c);
    for (int r = 0; r < model.outputs; ++r) theta(pos++) = model.b2(r);
    return theta;
}

void unflatten_parameters(const Eigen::VectorXd& theta, MlpModel& model) {
    if (theta.size() != model.parameter_count())
        fail(ErrorCode::DimensionMismatch, "parameter vector has wrong length");
    long pos = 0;
    for (int r = 0; r < model.hidden; ++r)
        for (int c = 0; c < model.inputs; ++c) model.w1(r, c) = theta(pos++);
    for (int r = 0; r < model.hidden; ++r) model.b1(r) = theta(pos++);
    for (int r = 0; r < model.outputs; ++r)
        for (int c = 0; c < model.hidden; ++c) model.w2(r, c) = theta(pos++);
    for (int r = 0; r < model.outputs; ++r) model.b2(r) = theta(pos++);
}

namespace {

struct ForwardCache {
    Eigen::MatrixXd hidden;   // S x H, tanh activations
    Eigen::MatrixXd outputs;  // S x O
};

ForwardCache forward_batch(const MlpModel& model, const Eigen::MatrixXd& data) {
    ForwardCache cache;
    cache.hidden = ((data * model.w1.transpose()).rowwise() + model.b1.transpose()).array().tanh();
    cache.outputs =
        ((cache.hidden * model.w2.transpose()).rowwise() + model.b2.transpose()).array().tanh();
    return cache;
}

// Rows are (sample, output) pairs, sample-major; columns follow
// flatten_parameters order. Entries are d output / d parameter.
void fill_jacobian(const MlpModel& model, const Eigen::MatrixXd& data, const ForwardCache& cache,
                   Eigen::MatrixXd& jac) {
    const int S = static_cast<int>(data.rows());
    const int I = model.inputs, H = model.hidden, O = model.outputs;
    const int off_b1 = H * I;
    const int off_w2 = off_b1 + H;
    const int off_b2 = off_w2 + O * H;
    jac.setZero(static_cast<long>(S) * O, model.parameter_count());
    for (int s = 0; s < S; ++s) {
        for (int o = 0; o < O; ++o) {
            const long row = static_cast<long>(s) * O + o;
            const double d2 = 1.0 - cache.outputs(s, o) * cache.outputs(s, o);
            for (int j = 0; j < H; ++j) {
                const double a1 = cache.hidden(s, j);
                jac(row, off_w2 + o * H + j) = d2 * a1;
                const double back = d2 * model.w2(o, j) * (1.0 - a1 * a1);
                jac(row, off_b1 + j) = back;
                for (int i = 0; i < I; ++i) jac(row, j * I + i) = back * data(s, i);
            }
            jac(row, off_b2 + o) = d2;
        }
    }
}

double objective_value(const TrainConfig& cfg, const TargetMatrix& targets,
                       const Eigen::MatrixXd& outputs, const Eigen::VectorXd& theta) {
    return cfg.objective == Objective::Mse ? mse(targets, outputs)
                                           : msereg(targets, outputs, theta, cfg.gamma);
}

}  // namespace

Eigen::MatrixXd output_jacobian(const MlpModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.inputs) fail(ErrorCode::DimensionMismatch, "input size mismatch");
    Eigen::MatrixXd data = x.transpose();
    const ForwardCache cache = forward_batch(model, data);
    Eigen::MatrixXd jac;
    fill_jacobian(model, data, cache, jac);
    return jac;
}

TrainResult train_lm(const Eigen::MatrixXd& data, const TargetMatrix& targets,
                     const TrainConfig& cfg) {
    if (data.rows() < 1) fail(ErrorCode::InvalidParameters, "training needs >= 1 sample");
    if (data.rows() != targets.rows())
        fail(ErrorCode::ShapeMismatch, "data and target row counts differ");
    if (cfg.epochs < 0) fail(ErrorCode::InvalidParameters, "epochs must be >= 0");
    if (cfg.objective == Objective::MseReg && !(cfg.gamma >= 0.0 && cfg.gamma <= 1.0))
        fail(ErrorCode::InvalidGamma, "gamma must lie in [0,1]");
    if (!(cfg.mu0 > 0.0) || !(cfg.beta > 1.0))
        fail(ErrorCode::InvalidParameters, "need mu0 > 0 and beta > 1");

    const long S = data.rows();
    const int O = static_cast<int>(targets.cols());
    TrainResult result;
    result.model = init_model(static_cast<int>(data.cols()), cfg.hidden, O, cfg);
    MlpModel& model = result.model;
    const int n_params = model.parameter_count();

    const double gamma = cfg.objective == Objective::MseReg ? cfg.gamma : 1.0;
    const double reg = cfg.objective == Objective::MseReg ? 1.0 - cfg.gamma : 0.0;
    const double err_scale = 2.0 * gamma / static_cast<double>(S * O);
    const double reg_scale = 2.0 * reg / static_cast<double>(n_params);

    Eigen::VectorXd theta = flatten_parameters(model);
    ForwardCache cache = forward_batch(model, data);
    double value = objective_value(cfg, targets, cache.outputs, theta);
    if (!std::isfinite(value)) fail(ErrorCode::NonFiniteLoss, "initial objective is not finite");
    result.curve.push_back(value);

    double mu = cfg.mu0;
    Eigen::MatrixXd jac;
    MlpModel trial = model;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        fill_jacobian(model, data, cache, jac);
        // Residuals e = t - a, flattened sample-major to match the Jacobian.
        Eigen::VectorXd residual(S * O);
        for (long s = 0; s < S; ++s)
            for (int o = 0; o < O; ++o)
                residual(s * O + o) = targets(s, o) - cache.outputs(s, o);

        Eigen::MatrixXd hessian = Eigen::MatrixXd::Zero(n_params, n_params);
        hessian.selfadjointView<Eigen::Lower>().rankUpdate(jac.transpose(), err_scale);
        hessian.diagonal().array() += reg_scale;
        const Eigen::VectorXd gradient = reg_scale * theta - err_scale * (jac.transpose() * residual);

        bool accepted = false;
        int attempts = 0;
        int singular = 0;
        for (int retry = 0; retry < 5 && mu <= cfg.mu_max; ++retry) {
            ++attempts;
            Eigen::MatrixXd damped = hessian;
            damped.diagonal().array() += mu;
            const Eigen::LDLT<Eigen::MatrixXd, Eigen::Lower> solver(damped);
            if (solver.info() != Eigen::Success) {
                ++singular;
                mu *= cfg.beta;
                continue;
            }
            const Eigen::VectorXd step = solver.solve(-gradient);
            if (!step.allFinite()) {
                ++singular;
                mu *= cfg.beta;
                continue;
            }
            const Eigen::VectorXd candidate = theta + step;
            unflatten_parameters(candidate, trial);
            const ForwardCache trial_cache = forward_batch(trial, data);
            const double trial_value = objective_value(cfg, targets, trial_cache.outputs, candidate);
            if (std::isfinite(trial_value) && trial_value < value) {
                theta = candidate;
                std::swap(model.w1, trial.w1);
                std::swap(model.b1, trial.b1);
                std::swap(model.w2, trial.w2);
                std::swap(model.b2, trial.b2);
                cache = trial_cache;
                value = trial_value;
                mu /= cfg.beta;
                accepted = true;
                break;
            }
            mu *= cfg.beta;
        }
        if (!accepted && attempts > 0 && singular == attempts && mu > cfg.mu_max)
            fail(ErrorCode::SingularNormalEquations,
                 "normal equations stayed singular up to the damping limit");
        // A rejected epoch keeps the previous parameters; the curve stays flat.
        result.curve.push_back(value);
    }
    return result;
}

MultiStartResult multi_start(const Eigen::MatrixXd& data, const TargetMatrix& targets,
                             const TrainConfig& cfg, int starts) {
    if (starts < 1) fail(ErrorCode::InvalidParameters, "starts must be >= 1");
    MultiStartResult out;
    out.runs.reserve(static_cast<size_t>(starts));
    std::string first_error;
    for (int i = 0; i < starts; ++i) {
        TrainConfig local = cfg;
        local.seed = cfg.seed + static_cast<std::uint64_t>(i);
        try {
            out.runs.push_back(train_lm(data, targets, local));
        } catch (const Error& e) {
            if (first_error.empty()) first_error = e.what();
        }
    }
    if (out.runs.empty())
        fail(ErrorCode::SingularNormalEquations, "every start failed; first error: " + first_error);
    out.best_index = 0;
    for (size_t i = 1; i < out.runs.size(); ++i)
        if (out.runs[i].curve.back() < out.runs[out.best_index].curve.back())
            out.best_index = static_cast<int>(i);
    return out;
}

Eigen::VectorXd committee(const std::vector<MlpModel>& models, const Eigen::VectorXd& x) {
    if (models.empty()) fail(ErrorCode::InvalidParameters, "committee needs >= 1 model");
    const MlpModel& first = models.front();
    for (const auto& m : models) {
        if (m.inputs != first.inputs || m.hidden != first.hidden || m.outputs != first.outputs)
            fail(ErrorCode::MixedSignatures, "committee members have different layer sizes");
    }
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(first.outputs);
    for (const auto& m : models) acc += forward(m, x);
    return acc / static_cast<double>(models.size());
}

TargetMatrix build_targets(const std::vector<int>& labels, const codes::Codebook& book) {
    TargetMatrix targets(static_cast<long>(labels.size()), book.bits);
    for (size_t s = 0; s < labels.size(); ++s) {
        const int label = labels[s];
        if (label < 0 || label >= book.classes)
            fail(ErrorCode::UnknownLabel,
                 "label " + std::to_string(label) + " outside the codebook's " +
                     std::to_string(book.classes) + " classes");
        for (int b = 0; b < book.bits; ++b)
            targets(static_cast<long>(s), b) = book.rows[label][b] ? 1.0 : -1.0;
    }
    return targets;
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (long r = 0; r < m.rows(); ++r)
        for (long c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
    return out;
}

void matrix_from_json(const json& arr, Eigen::MatrixXd& m) {
    if (static_cast<long>(arr.size()) != m.size())
        fail(ErrorCode::UnsupportedFormat, "model JSON: weight array length mismatch");
    long idx = 0;
    for (long r = 0; r < m.rows(); ++r)
        for (long c = 0; c < m.cols(); ++c) m(r, c) = arr[idx++].get<double>();
}

}  // namespace

std::string model_to_json(const MlpModel& model, const std::string& codebook_ref) {
    json doc;
    doc["sizes"] = {model.inputs, model.hidden, model.outputs};
    doc["hidden_w"] = matrix_to_json(model.w1);
    doc["hidden_b"] = matrix_to_json(model.b1);
    doc["out_w"] = matrix_to_json(model.w2);
    doc["out_b"] = matrix_to_json(model.b2);
    doc["activation"] = "tanh";
    doc["codebook-ref"] = codebook_ref;
    return doc.dump();
}

MlpModel model_from_json(const std::string& json_text, std::string* codebook_ref) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(ErrorCode::UnsupportedFormat, std::string("model JSON: ") + e.what());
    }
    MlpModel model;
    try {
        const auto sizes = doc.at("sizes");
        model.inputs = sizes.at(0).get<int>();
        model.hidden = sizes.at(1).get<int>();
        model.outputs = sizes.at(2).get<int>();
        if (doc.at("activation").get<std::string>() != "tanh")
            fail(ErrorCode::UnsupportedFormat, "model JSON: unsupported activation");
        model.w1.resize(model.hidden, model.inputs);
        model.b1.resize(model.hidden);
        model.w2.resize(model.outputs, model.hidden);
        model.b2.resize(model.outputs);
        matrix_from_json(doc.at("hidden_w"), model.w1);
        Eigen::MatrixXd b1(model.hidden, 1), b2(model.outputs, 1);
        matrix_from_json(doc.at("hidden_b"), b1);
        matrix_from_json(doc.at("out_b"), b2);
        model.b1 = b1.col(0);
        model.b2 = b2.col(0);
        matrix_from_json(doc.at("out_w"), model.w2);
        if (codebook_ref) *codebook_ref = doc.value("codebook-ref", "");
    } catch (const json::exception& e) {
        fail(ErrorCode::UnsupportedFormat, std::string("model JSON: ") + e.what());
    }
    return model;
}

void save_model(const MlpModel& model, const std::string& path, const std::string& codebook_ref) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) fail(ErrorCode::IoError, path + ": cannot open for writing");
        out << model_to_json(model, codebook_ref) << "\n";
        if (!out) fail(ErrorCode::IoError, path + ": write failed");
    }
    std::filesystem::rename(tmp, path);
}

MlpModel load_model(const std::string& path, std::string* codebook_ref) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, path + ": cannot open file");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return model_from_json(text, codebook_ref);
}

}  // namespace handgeo::mlp
