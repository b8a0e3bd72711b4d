// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "handgeo/codes.hpp"
#include "handgeo/core.hpp"

namespace handgeo::mlp {

/// Three-layer perceptron, tanh on both the hidden and output layers.
struct MlpModel {
    int inputs = 0;
    int hidden = 0;
    int outputs = 0;
    Eigen::MatrixXd w1;  // hidden x inputs
    Eigen::VectorXd b1;  // hidden
    Eigen::MatrixXd w2;  // outputs x hidden
    Eigen::VectorXd b2;  // outputs

    int parameter_count() const {
        return hidden * inputs + hidden + outputs * hidden + outputs;
    }
};

enum class Objective { Mse, MseReg };

struct TrainConfig {
    int hidden = 30;
    int epochs = 10;  // 50 is the usual choice with regularization
    Objective objective = Objective::Mse;
    double gamma = 0.9;  // MSEREG performance ratio
    double mu0 = 1e-3;
    double beta = 10.0;
    double mu_max = 1e10;
    double init_half_range = 0.5;  // weights start uniform in +/- this / sqrt(fan_in)
    std::uint64_t seed = 0;
};

/// +/-1 training targets; row r is the codeword of sample r's class.
using TargetMatrix = Eigen::MatrixXd;

MlpModel init_model(int inputs, int hidden, int outputs, const TrainConfig& cfg);

/// tanh(W2 tanh(W1 x + b1) + b2).
Eigen::VectorXd forward(const MlpModel& model, const Eigen::VectorXd& x);
std::vector<double> forward(const MlpModel& model, const std::vector<double>& x);

/// Mean over all samples and output components of the squared error.
double mse(const TargetMatrix& targets, const Eigen::MatrixXd& outputs);

/// gamma * MSE + (1 - gamma) * mean squared parameter magnitude.
double msereg(const TargetMatrix& targets, const Eigen::MatrixXd& outputs,
              const Eigen::VectorXd& parameters, double gamma);

Eigen::VectorXd flatten_parameters(const MlpModel& model);
void unflatten_parameters(const Eigen::VectorXd& theta, MlpModel& model);

/// Jacobian of the output vector with respect to every parameter for one
/// input; rows are outputs, columns follow flatten_parameters() order.
Eigen::MatrixXd output_jacobian(const MlpModel& model, const Eigen::VectorXd& x);

struct TrainResult {
    MlpModel model;
    std::vector<double> curve;  // objective value before training, then per epoch
};

/// Levenberg-Marquardt training: one accepted damped Gauss-Newton step per
/// epoch, damping grown on rejected steps (up to 5 retries, epoch abandoned
/// once the damping exceeds mu_max). The configured objective never
/// increases across accepted steps.
TrainResult train_lm(const Eigen::MatrixXd& data, const TargetMatrix& targets,
                     const TrainConfig& cfg);

struct MultiStartResult {
    std::vector<TrainResult> runs;  // one per start, seeded cfg.seed + index
    int best_index = 0;             // lowest final training objective
    const MlpModel& best() const { return runs[best_index].model; }
};

MultiStartResult multi_start(const Eigen::MatrixXd& data, const TargetMatrix& targets,
                             const TrainConfig& cfg, int starts);

/// Component-wise mean of the member outputs.
Eigen::VectorXd committee(const std::vector<MlpModel>& models, const Eigen::VectorXd& x);

/// Maps class labels through a codebook to +/-1 target rows.
TargetMatrix build_targets(const std::vector<int>& labels, const codes::Codebook& book);

/// JSON model document; codebook_ref is carried verbatim.
std::string model_to_json(const MlpModel& model, const std::string& codebook_ref = "");
MlpModel model_from_json(const std::string& json_text, std::string* codebook_ref = nullptr);
void save_model(const MlpModel& model, const std::string& path,
                const std::string& codebook_ref = "");
MlpModel load_model(const std::string& path, std::string* codebook_ref = nullptr);

}  // namespace handgeo::mlp
