// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace handgeo {

/// Machine-readable error identifiers. The CLI prints the name verbatim so
/// scripts can match on it.
enum class ErrorCode {
    IoError,
    UnsupportedFormat,
    ImageTooSmall,
    InvalidThreshold,
    EmptyForeground,
    ComponentTooSmall,
    DefectiveAcquisition,
    WrongSchema,
    SchemaMismatch,
    EmptyTrainingSet,
    InvalidParameters,
    WrongLength,
    TooLargeToEnumerate,
    TooManyClasses,
    InfeasibleDimensions,
    LengthMismatch,
    DimensionMismatch,
    ShapeMismatch,
    InvalidGamma,
    SingularNormalEquations,
    NonFiniteLoss,
    MixedSignatures,
    EmptyGallery,
    KindMismatch,
    UnknownClaim,
    UnknownLabel,
    EmptyScores,
    InvalidParams,
    GenerationExhausted,
    InvalidArgument,
};

const char* error_name(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

/// Deterministic random source. Wraps mt19937_64 but derives uniform and
/// normal variates with explicit arithmetic, so streams are reproducible
/// bit-for-bit regardless of the standard library's distribution internals.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform in [0, 1).
    double uniform();

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n);

    bool bernoulli(double p = 0.5) { return uniform() < p; }

    /// Standard normal via Box-Muller (cached pair).
    double normal();

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

  private:
    std::uint64_t state_[4];
    double cached_normal_ = 0.0;
    bool have_cached_normal_ = false;
};

}  // namespace handgeo
