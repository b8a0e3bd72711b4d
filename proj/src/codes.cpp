// SPDX-License-Identifier: Apache-2.0
#include "handgeo/codes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <sstream>

namespace handgeo::codes {

namespace {

// Primitive polynomials for GF(2^m), index by m.
constexpr std::uint32_t kPrimitivePoly[6] = {0, 0, 0, 0b1011, 0b10011, 0b100101};

struct Field {
    int m;
    int n;                       // 2^m - 1
    std::vector<int> exp_table;  // exp[i] = alpha^i, i in [0, 2n)
    std::vector<int> log_table;  // log[alpha^i] = i

    explicit Field(int m_) : m(m_), n((1 << m_) - 1), exp_table(2 * n), log_table(n + 1) {
        int v = 1;
        for (int i = 0; i < n; ++i) {
            exp_table[i] = v;
            exp_table[i + n] = v;
            log_table[v] = i;
            v <<= 1;
            if (v > n) v ^= static_cast<int>(kPrimitivePoly[m]);
        }
    }

    int mul(int a, int b) const {
        if (a == 0 || b == 0) return 0;
        return exp_table[log_table[a] + log_table[b]];
    }

    int alpha_pow(int e) const { return exp_table[((e % n) + n) % n]; }
};

// Product of (x - alpha^e) over the cyclotomic coset of `rep`; coefficients
// land in GF(2).
std::vector<std::uint8_t> minimal_polynomial(const Field& gf, int rep) {
    std::vector<int> coset;
    int e = rep;
    do {
        coset.push_back(e);
        e = (e * 2) % gf.n;
    } while (e != rep);

    std::vector<int> poly{1};  // polynomial over GF(2^m), ascending powers
    for (const int exponent : coset) {
        const int root = gf.alpha_pow(exponent);
        std::vector<int> next(poly.size() + 1, 0);
        for (size_t i = 0; i < poly.size(); ++i) {
            next[i + 1] ^= poly[i];
            next[i] ^= gf.mul(poly[i], root);
        }
        poly = std::move(next);
    }

    std::vector<std::uint8_t> bits(poly.size());
    for (size_t i = 0; i < poly.size(); ++i) {
        if (poly[i] != 0 && poly[i] != 1)
            fail(ErrorCode::InvalidParameters, "minimal polynomial not binary");
        bits[i] = static_cast<std::uint8_t>(poly[i]);
    }
    return bits;
}

std::uint64_t poly_to_bits(const std::vector<std::uint8_t>& poly) {
    std::uint64_t bits = 0;
    for (size_t i = 0; i < poly.size(); ++i)
        if (poly[i]) bits |= std::uint64_t{1} << i;
    return bits;
}

int poly_degree(std::uint64_t bits) { return 63 - std::countl_zero(bits); }

std::uint64_t poly_mod(std::uint64_t value, std::uint64_t divisor) {
    const int ddeg = poly_degree(divisor);
    while (value != 0) {
        const int vdeg = poly_degree(value);
        if (vdeg < ddeg) break;
        value ^= divisor << (vdeg - ddeg);
    }
    return value;
}

std::uint64_t poly_mul_gf2(std::uint64_t a, std::uint64_t b) {
    std::uint64_t out = 0;
    while (b != 0) {
        if (b & 1) out ^= a;
        a <<= 1;
        b >>= 1;
    }
    return out;
}

constexpr int kEnumerationMaxK = 21;

}  // namespace

BchCode bch_new(int n, int k) {
    int m = 0;
    if (n == 7)
        m = 3;
    else if (n == 15)
        m = 4;
    else if (n == 31)
        m = 5;
    else
        fail(ErrorCode::InvalidParameters,
             "codeword length must be 7, 15 or 31, got " + std::to_string(n));
    if (k <= 0 || k >= n)
        fail(ErrorCode::InvalidParameters, "message length " + std::to_string(k) +
                                               " invalid for n=" + std::to_string(n));

    const Field gf(m);

    // Grow the designed distance until the generator degree matches n - k.
    std::uint64_t generator = 1;
    std::set<int> covered;  // coset representatives already multiplied in
    std::set<int> roots;    // exponents of all roots of g(x)
    for (int target = 1; target < n; target += 2) {
        int rep = target;
        {
            // canonical representative: smallest element of the coset
            int e = target;
            do {
                rep = std::min(rep, e);
                e = (e * 2) % n;
            } while (e != target);
        }
        if (!covered.contains(rep)) {
            covered.insert(rep);
            const auto minpoly = minimal_polynomial(gf, rep);
            generator = poly_mul_gf2(generator, poly_to_bits(minpoly));
            int e = rep;
            do {
                roots.insert(e);
                e = (e * 2) % n;
            } while (e != rep);
        }
        const int degree = poly_degree(generator);
        if (degree == n - k) {
            BchCode code;
            code.n = n;
            code.k = k;
            code.m = m;
            // t = largest run alpha^1..alpha^{2t} of consecutive roots.
            int t = 0;
            while (roots.contains(2 * t + 1) && roots.contains(2 * t + 2)) ++t;
            code.t = t;
            code.generator.assign(static_cast<size_t>(degree) + 1, 0);
            for (int i = 0; i <= degree; ++i)
                code.generator[i] = static_cast<std::uint8_t>((generator >> i) & 1);
            code.matrix_rows.resize(static_cast<size_t>(k));
            for (int i = 0; i < k; ++i) {
                const std::uint64_t shifted = std::uint64_t{1} << (n - k + i);
                code.matrix_rows[i] = shifted ^ poly_mod(shifted, generator);
            }
            return code;
        }
        if (degree > n - k) break;
    }
    fail(ErrorCode::InvalidParameters,
         "(" + std::to_string(n) + ", " + std::to_string(k) + ") is not a valid BCH pair");
}

std::uint64_t bch_encode(const BchCode& code, std::uint64_t message) {
    if (message >> code.k)
        fail(ErrorCode::WrongLength, "message does not fit in " + std::to_string(code.k) + " bits");
    std::uint64_t word = 0;
    for (int i = 0; i < code.k; ++i)
        if ((message >> i) & 1) word ^= code.matrix_rows[i];
    return word;
}

bool is_codeword(const BchCode& code, std::uint64_t word) {
    if (word >> code.n) return false;
    return poly_mod(word, poly_to_bits(code.generator)) == 0;
}

namespace {

// Walks all nonzero messages in Gray-code order, XORing one generator row per
// step, and reports the codeword minimizing `cost`.
template <typename Cost>
std::pair<std::uint64_t, int> gray_scan(const BchCode& code, Cost cost) {
    std::uint64_t codeword = 0;
    std::uint64_t best_word = 0;
    int best_cost = cost(std::uint64_t{0});
    const std::uint64_t total = std::uint64_t{1} << code.k;
    for (std::uint64_t i = 1; i < total; ++i) {
        codeword ^= code.matrix_rows[std::countr_zero(i)];
        const int c = cost(codeword);
        if (c < best_cost) {
            best_cost = c;
            best_word = codeword;
        }
    }
    return {best_word, best_cost};
}

}  // namespace

int min_distance(const BchCode& code) {
    if (code.k > kEnumerationMaxK)
        fail(ErrorCode::TooLargeToEnumerate,
             "k=" + std::to_string(code.k) + " exceeds the enumeration bound of " +
                 std::to_string(kEnumerationMaxK));
    // Linear code: minimum distance equals minimum nonzero weight. Zero gets
    // an infinite cost so the scan reports the lightest nonzero codeword.
    const auto [word, weight] = gray_scan(code, [](std::uint64_t w) {
        return w == 0 ? 1 << 30 : std::popcount(w);
    });
    (void)word;
    return weight;
}

std::uint64_t decode_nearest(const BchCode& code, std::uint64_t word) {
    if (word >> code.n)
        fail(ErrorCode::WrongLength, "received word exceeds " + std::to_string(code.n) + " bits");
    if (code.k <= kEnumerationMaxK) {
        const auto [best, dist] = gray_scan(
            code, [word](std::uint64_t cw) { return std::popcount(cw ^ word); });
        (void)dist;
        return best;
    }
    // Large message space: search the radius-t ball around the received word.
    if (is_codeword(code, word)) return word;
    if (code.t >= 1) {
        for (int i = 0; i < code.n; ++i) {
            const std::uint64_t flipped = word ^ (std::uint64_t{1} << i);
            if (is_codeword(code, flipped)) return flipped;
        }
    }
    if (code.t >= 2) {
        for (int i = 0; i < code.n; ++i) {
            for (int j = i + 1; j < code.n; ++j) {
                const std::uint64_t flipped =
                    word ^ (std::uint64_t{1} << i) ^ (std::uint64_t{1} << j);
                if (is_codeword(code, flipped)) return flipped;
            }
        }
    }
    fail(ErrorCode::TooLargeToEnumerate,
         "no codeword within the searchable radius; too many bit errors");
}

namespace {

void validate_codebook(const Codebook& book) {
    if (book.classes < 2) fail(ErrorCode::InvalidParameters, "codebook needs >= 2 classes");
    if (book.bits < 1) fail(ErrorCode::InvalidParameters, "codebook needs >= 1 bit");
    std::set<std::vector<std::uint8_t>> seen;
    for (const auto& row : book.rows) {
        if (static_cast<int>(row.size()) != book.bits)
            fail(ErrorCode::InvalidParameters, "codebook row length mismatch");
        if (!seen.insert(row).second)
            fail(ErrorCode::InvalidParameters, "codebook rows are not distinct");
    }
    for (int b = 0; b < book.bits; ++b) {
        bool any0 = false, any1 = false;
        for (int c = 0; c < book.classes; ++c) (book.rows[c][b] ? any1 : any0) = true;
        if (!any0 || !any1)
            fail(ErrorCode::InvalidParameters,
                 "codebook column " + std::to_string(b) + " is constant");
    }
}

}  // namespace

Codebook one_per_class(int classes) {
    if (classes < 2) fail(ErrorCode::InvalidParameters, "one_per_class needs >= 2 classes");
    Codebook book;
    book.classes = classes;
    book.bits = classes;
    book.kind = CodebookKind::OnePerClass;
    book.rows.assign(classes, std::vector<std::uint8_t>(classes, 0));
    for (int i = 0; i < classes; ++i) book.rows[i][i] = 1;
    validate_codebook(book);
    return book;
}

Codebook ecoc_from_bch(const BchCode& code, int classes) {
    if (classes < 2) fail(ErrorCode::InvalidParameters, "ECOC needs >= 2 classes");
    if (code.k < 63 && static_cast<std::uint64_t>(classes) > (std::uint64_t{1} << code.k))
        fail(ErrorCode::TooManyClasses, std::to_string(classes) + " classes exceed 2^k = " +
                                            std::to_string(std::uint64_t{1} << code.k));

    std::vector<std::uint64_t> words(classes);
    for (int i = 0; i < classes; ++i) words[i] = bch_encode(code, static_cast<std::uint64_t>(i));

    // Keep only columns that vary across the class set.
    std::vector<int> keep;
    for (int b = 0; b < code.n; ++b) {
        bool any0 = false, any1 = false;
        for (int c = 0; c < classes; ++c) (((words[c] >> b) & 1) ? any1 : any0) = true;
        if (any0 && any1) keep.push_back(b);
    }

    Codebook book;
    book.classes = classes;
    book.bits = static_cast<int>(keep.size());
    book.kind = CodebookKind::BchEcoc;
    book.rows.assign(classes, std::vector<std::uint8_t>(keep.size(), 0));
    for (int c = 0; c < classes; ++c)
        for (size_t j = 0; j < keep.size(); ++j)
            book.rows[c][j] = static_cast<std::uint8_t>((words[c] >> keep[j]) & 1);
    validate_codebook(book);
    return book;
}

int row_min_distance(const Codebook& book) {
    int best = book.bits;
    for (int a = 0; a < book.classes; ++a) {
        for (int b = a + 1; b < book.classes; ++b) {
            int d = 0;
            for (int j = 0; j < book.bits; ++j) d += book.rows[a][j] != book.rows[b][j];
            best = std::min(best, d);
        }
    }
    return best;
}

int col_min_distance(const Codebook& book) {
    if (book.bits < 2) return book.classes;
    int best = book.classes;
    for (int a = 0; a < book.bits; ++a) {
        for (int b = a + 1; b < book.bits; ++b) {
            int d = 0;
            for (int c = 0; c < book.classes; ++c) d += book.rows[c][a] != book.rows[c][b];
            best = std::min(best, std::min(d, book.classes - d));
        }
    }
    return best;
}

RandomEcocResult random_ecoc(int classes, int bits, int iterations, std::uint64_t seed) {
    if (classes < 2) fail(ErrorCode::InvalidParameters, "random ECOC needs >= 2 classes");
    if (iterations < 1) fail(ErrorCode::InvalidParameters, "iterations must be >= 1");
    int need_bits = 0;
    while ((1 << need_bits) < classes) ++need_bits;
    if (bits < need_bits)
        fail(ErrorCode::InfeasibleDimensions,
             std::to_string(bits) + " bits cannot give " + std::to_string(classes) +
                 " distinct rows");

    Rng rng(seed);
    auto draw_candidate = [&]() {
        std::vector<std::vector<std::uint8_t>> rows(classes, std::vector<std::uint8_t>(bits));
        for (auto& row : rows)
            for (auto& bit : row) bit = rng.bernoulli() ? 1 : 0;
        return rows;
    };
    auto valid = [&](const std::vector<std::vector<std::uint8_t>>& rows) {
        std::set<std::vector<std::uint8_t>> seen;
        for (const auto& row : rows)
            if (!seen.insert(row).second) return false;
        for (int b = 0; b < bits; ++b) {
            bool any0 = false, any1 = false;
            for (int c = 0; c < classes; ++c) (rows[c][b] ? any1 : any0) = true;
            if (!any0 || !any1) return false;
        }
        return true;
    };

    RandomEcocResult result;
    result.h_row = -1;
    result.h_col = -1;
    constexpr int kMaxResamples = 10000;
    for (int iter = 0; iter < iterations; ++iter) {
        std::vector<std::vector<std::uint8_t>> rows;
        int attempts = 0;
        do {
            if (++attempts > kMaxResamples)
                fail(ErrorCode::InfeasibleDimensions,
                     "could not sample a valid matrix for " + std::to_string(classes) + "x" +
                         std::to_string(bits));
            rows = draw_candidate();
        } while (!valid(rows));

        Codebook candidate;
        candidate.classes = classes;
        candidate.bits = bits;
        candidate.kind = CodebookKind::RandomEcoc;
        candidate.rows = std::move(rows);
        const int hr = row_min_distance(candidate);
        const int hc = col_min_distance(candidate);
        if (hr > result.h_row || (hr == result.h_row && hc > result.h_col)) {
            result.h_row = hr;
            result.h_col = hc;
            result.book = std::move(candidate);
        }
    }
    validate_codebook(result.book);
    return result;
}

DecodeResult hamming_decode(const std::vector<double>& outputs, const Codebook& book,
                            DecodeMetric metric) {
    if (static_cast<int>(outputs.size()) != book.bits)
        fail(ErrorCode::LengthMismatch, "output vector has " + std::to_string(outputs.size()) +
                                            " components, codebook has " +
                                            std::to_string(book.bits));
    DecodeResult result;
    result.scores.resize(book.classes);
    // Maximum attainable distance: every component maximally wrong, |o - c| = 2.
    const double norm = metric == DecodeMetric::Mse ? 4.0 * book.bits : 2.0 * book.bits;
    for (int c = 0; c < book.classes; ++c) {
        double acc = 0.0;
        for (int b = 0; b < book.bits; ++b) {
            const double target = book.rows[c][b] ? 1.0 : -1.0;
            const double diff = outputs[b] - target;
            acc += metric == DecodeMetric::Mse ? diff * diff : std::abs(diff);
        }
        result.scores[c] = 1.0 - acc / norm;
    }
    result.winner = 0;
    for (int c = 1; c < book.classes; ++c)
        if (result.scores[c] > result.scores[result.winner]) result.winner = c;
    return result;
}

const char* kind_name(CodebookKind kind) {
    switch (kind) {
        case CodebookKind::OnePerClass: return "one_per_class";
        case CodebookKind::BchEcoc: return "bch_ecoc";
        case CodebookKind::RandomEcoc: return "random_ecoc";
    }
    return "unknown";
}

std::string codebook_to_text(const Codebook& book) {
    std::ostringstream out;
    out << book.classes << " " << book.bits << " " << kind_name(book.kind) << "\n";
    for (const auto& row : book.rows) {
        for (const auto bit : row) out << (bit ? '1' : '0');
        out << "\n";
    }
    return out.str();
}

Codebook codebook_from_text(const std::string& text) {
    std::istringstream in(text);
    Codebook book;
    std::string kind;
    if (!(in >> book.classes >> book.bits >> kind))
        fail(ErrorCode::InvalidArgument, "codebook text: bad header");
    if (kind == "one_per_class")
        book.kind = CodebookKind::OnePerClass;
    else if (kind == "bch_ecoc")
        book.kind = CodebookKind::BchEcoc;
    else if (kind == "random_ecoc")
        book.kind = CodebookKind::RandomEcoc;
    else
        fail(ErrorCode::InvalidArgument, "codebook text: unknown kind '" + kind + "'");
    book.rows.assign(book.classes, {});
    for (auto& row : book.rows) {
        std::string line;
        if (!(in >> line) || static_cast<int>(line.size()) != book.bits)
            fail(ErrorCode::InvalidArgument, "codebook text: bad row");
        row.reserve(line.size());
        for (const char c : line) {
            if (c != '0' && c != '1')
                fail(ErrorCode::InvalidArgument, "codebook text: rows must be 0/1");
            row.push_back(static_cast<std::uint8_t>(c - '0'));
        }
    }
    validate_codebook(book);
    return book;
}

}  // namespace handgeo::codes
