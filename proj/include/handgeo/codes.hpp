// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "handgeo/core.hpp"

namespace handgeo::codes {

/// Narrow-sense primitive BCH code over GF(2). Codeword length n = 2^m - 1
/// with m in {3,4,5}; systematic encoding (message occupies the high k
/// coefficients, parity the low n-k).
struct BchCode {
    int n = 0;
    int k = 0;
    int t = 0;
    int m = 0;
    std::vector<std::uint8_t> generator;     // g_0..g_{n-k}, coefficients over GF(2)
    std::vector<std::uint64_t> matrix_rows;  // row i = encode(unit message i)
};

/// Builds the BCH code for a valid (n, k) pair with n in {7, 15, 31}.
BchCode bch_new(int n, int k);

/// Systematic encoding of a k-bit message (bit i = coefficient of x^i).
std::uint64_t bch_encode(const BchCode& code, std::uint64_t message);

bool is_codeword(const BchCode& code, std::uint64_t word);

/// Exact minimum distance by enumerating all nonzero codewords (k <= 21).
int min_distance(const BchCode& code);

/// Nearest codeword to `word`: exhaustive for k <= 21, otherwise a radius-t
/// ball search (sufficient when at most t bits are in error).
std::uint64_t decode_nearest(const BchCode& code, std::uint64_t word);

enum class CodebookKind { OnePerClass, BchEcoc, RandomEcoc };

/// Class-to-codeword table: one row per class, no constant columns.
struct Codebook {
    int classes = 0;
    int bits = 0;
    CodebookKind kind = CodebookKind::OnePerClass;
    std::vector<std::vector<std::uint8_t>> rows;  // classes x bits, entries 0/1

    int row(int cls, int bit) const { return rows[cls][bit]; }
};

/// Identity codebook: class i owns output i.
Codebook one_per_class(int classes);

/// Assigns class i the BCH codeword of message i, then drops columns that are
/// constant over the class set (they carry no information).
Codebook ecoc_from_bch(const BchCode& code, int classes);

/// Minimum pairwise Hamming distance between rows (H_c).
int row_min_distance(const Codebook& book);

/// Minimum pairwise column separation (H_L); a column and its complement are
/// treated as equivalent, so each pair contributes min(d, classes - d).
int col_min_distance(const Codebook& book);

struct RandomEcocResult {
    Codebook book;
    int h_row = 0;  // H_c of the selected matrix
    int h_col = 0;  // H_L of the selected matrix
};

/// Random ECOC search: over `iterations` random valid matrices, keeps the one
/// maximizing (H_c, then H_L). Deterministic for a fixed seed.
RandomEcocResult random_ecoc(int classes, int bits, int iterations, std::uint64_t seed);

enum class DecodeMetric { Mse, Mad };

struct DecodeResult {
    int winner = 0;
    std::vector<double> scores;  // 1 - normalized distance, per class
};

/// Soft Hamming decoding: distance of the real output vector to each class
/// codeword mapped to +/-1 targets, normalized by the maximum attainable
/// distance; score = 1 - distance; ties go to the lowest class index.
DecodeResult hamming_decode(const std::vector<double>& outputs, const Codebook& book,
                            DecodeMetric metric);

std::string codebook_to_text(const Codebook& book);
Codebook codebook_from_text(const std::string& text);

const char* kind_name(CodebookKind kind);

}  // namespace handgeo::codes
