#include "grouper/sobol.hpp"

#include "grouper/errors.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace grouper {

namespace {

constexpr int kBits = 32;

// Primitive polynomial degree s, coefficient word a, and initial
// direction integers m_1..m_s for dimensions 2..8 (Joe & Kuo table;
// dimension 1 is the van der Corput sequence in base 2).
struct PolyRow {
    int s;
    std::uint32_t a;
    std::array<std::uint32_t, 5> m;
};

constexpr std::array<PolyRow, 7> kRows = {{
    {1, 0, {1, 0, 0, 0, 0}},   // dim 2
    {2, 1, {1, 3, 0, 0, 0}},   // dim 3
    {3, 1, {1, 3, 1, 0, 0}},   // dim 4
    {3, 2, {1, 1, 1, 0, 0}},   // dim 5
    {4, 1, {1, 1, 3, 3, 0}},   // dim 6
    {4, 4, {1, 3, 5, 13, 0}},  // dim 7
    {5, 2, {1, 1, 5, 5, 17}},  // dim 8
}};

// Direction numbers V[k], k = 1..kBits, for one dimension, already
// shifted into the top bits of a 32-bit fraction.
std::array<std::uint32_t, kBits + 1> direction_numbers(int dim_index) {
    std::array<std::uint32_t, kBits + 1> v{};
    if (dim_index == 0) {
        for (int k = 1; k <= kBits; ++k)
            v[k] = 1u << (kBits - k);
        return v;
    }
    const PolyRow& row = kRows[static_cast<std::size_t>(dim_index - 1)];
    const int s = row.s;
    std::array<std::uint32_t, kBits + 1> m{};
    for (int k = 1; k <= s; ++k) m[k] = row.m[static_cast<std::size_t>(k - 1)];
    for (int k = s + 1; k <= kBits; ++k) {
        std::uint32_t mk = m[k - s] ^ (m[k - s] << s);
        for (int i = 1; i < s; ++i)
            mk ^= (((row.a >> (s - 1 - i)) & 1u) * m[k - i]) << i;
        m[k] = mk;
    }
    for (int k = 1; k <= kBits; ++k)
        v[k] = m[k] << (kBits - k);
    return v;
}

} // namespace

std::vector<std::vector<double>> sobol_points(int dim, std::int64_t n,
                                              std::int64_t skip) {
    if (dim < 1 || dim > kSobolMaxDim)
        throw RangeError("sobol_points: unsupported dimension " +
                         std::to_string(dim) + " (supported: 1.." +
                         std::to_string(kSobolMaxDim) + ")");
    if (n < 1) throw RangeError("sobol_points: n must be >= 1");
    if (skip < 0) throw RangeError("sobol_points: skip must be >= 0");

    std::vector<std::array<std::uint32_t, kBits + 1>> v;
    v.reserve(static_cast<std::size_t>(dim));
    for (int d = 0; d < dim; ++d) v.push_back(direction_numbers(d));

    std::vector<std::vector<double>> out(
        static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(dim)));

    // Gray-code recursion x_i = x_{i-1} ^ V[c], where c is the position
    // of the lowest zero bit of i-1. Cheap enough to walk from index 0.
    std::vector<std::uint32_t> x(static_cast<std::size_t>(dim), 0u);
    constexpr double scale = 1.0 / 4294967296.0; // 2^-32
    for (std::int64_t i = 0; i <= skip + n - 1; ++i) {
        if (i > 0) {
            std::int64_t c = 1;
            std::int64_t bits = i - 1;
            while (bits & 1) {
                bits >>= 1;
                ++c;
            }
            for (int d = 0; d < dim; ++d)
                x[static_cast<std::size_t>(d)] ^= v[static_cast<std::size_t>(d)][c];
        }
        if (i >= skip) {
            auto& row = out[static_cast<std::size_t>(i - skip)];
            for (int d = 0; d < dim; ++d)
                row[static_cast<std::size_t>(d)] =
                    static_cast<double>(x[static_cast<std::size_t>(d)]) * scale;
        }
    }
    return out;
}

} // namespace grouper
