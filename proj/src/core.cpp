// SPDX-License-Identifier: Apache-2.0
#include "handgeo/core.hpp"

#include <cmath>

namespace handgeo {

const char* error_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorCode::ImageTooSmall: return "ImageTooSmall";
        case ErrorCode::InvalidThreshold: return "InvalidThreshold";
        case ErrorCode::EmptyForeground: return "EmptyForeground";
        case ErrorCode::ComponentTooSmall: return "ComponentTooSmall";
        case ErrorCode::DefectiveAcquisition: return "DefectiveAcquisition";
        case ErrorCode::WrongSchema: return "WrongSchema";
        case ErrorCode::SchemaMismatch: return "SchemaMismatch";
        case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
        case ErrorCode::InvalidParameters: return "InvalidParameters";
        case ErrorCode::WrongLength: return "WrongLength";
        case ErrorCode::TooLargeToEnumerate: return "TooLargeToEnumerate";
        case ErrorCode::TooManyClasses: return "TooManyClasses";
        case ErrorCode::InfeasibleDimensions: return "InfeasibleDimensions";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::InvalidGamma: return "InvalidGamma";
        case ErrorCode::SingularNormalEquations: return "SingularNormalEquations";
        case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorCode::MixedSignatures: return "MixedSignatures";
        case ErrorCode::EmptyGallery: return "EmptyGallery";
        case ErrorCode::KindMismatch: return "KindMismatch";
        case ErrorCode::UnknownClaim: return "UnknownClaim";
        case ErrorCode::UnknownLabel: return "UnknownLabel";
        case ErrorCode::EmptyScores: return "EmptyScores";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::GenerationExhausted: return "GenerationExhausted";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "UnknownError";
}

// xoshiro256** (Blackman/Vigna, public domain reference implementation),
// seeded through splitmix64. Chosen over std::mt19937_64 + distributions so
// the variate stream is pinned by this file alone.
namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
}

std::uint64_t Rng::next_u64() {
    std::uint64_t* s = state_;
    const std::uint64_t result = rotl(s[1] * 5, 7) * 9;
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
    // Rejection sampling to avoid modulo bias.
    if (n == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return v % n;
}

double Rng::normal() {
    if (have_cached_normal_) {
        have_cached_normal_ = false;
        return cached_normal_;
    }
    double u1, u2;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_normal_ = r * std::sin(a);
    have_cached_normal_ = true;
    return r * std::cos(a);
}

}  // namespace handgeo
