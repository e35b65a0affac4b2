#pragma once

// Shared builders for the worked four-party run over F_7 and for randomized
// protocol configurations.

#include <array>

#include "qss/protocol.hpp"

namespace qss::testfix {

inline const PrimeModulus F7{7};

inline FieldMatrix example_matrix() {
    return FieldMatrix::from_rows(F7, {{0, 0, 1, 1}, {0, 1, 0, 6}, {2, 1, 1, 0}, {3, 1, 2, 1}});
}

/// Structure actually enforced by the example matrix: any three of four.
inline AccessStructure example_structure() {
    return AccessStructure{{1, 2, 3, 4},
                           {{1, 2, 3, 4}, {1, 2, 3}, {1, 3, 4}, {1, 2, 4}, {2, 3, 4}}};
}

inline GhzLabel label7(std::int64_t u1, std::int64_t u2, std::int64_t u3) {
    return {FieldElement(u1, F7), FieldElement(u2, F7), FieldElement(u3, F7)};
}

/// Dealer configuration of the worked run: secrets (2,4,6), pinned label
/// (6,1,3), pinned masking vectors, and the first member's masking value 5.
inline DealerConfig example_config() {
    ForcedValues forced;
    forced.initial = label7(6, 1, 3);
    forced.rho1 = FieldVector(F7, {2, 1, 0, 5});
    forced.rho2 = FieldVector(F7, {4, 3, 5, 1});
    forced.q1 = FieldElement(5, F7);
    return DealerConfig{F7,
                        {FieldElement(2, F7), FieldElement(4, F7), FieldElement(6, F7)},
                        Msp{example_matrix(), {1, 2, 3, 4}},
                        example_structure(),
                        20,
                        0.11,
                        0,
                        forced};
}

/// Label chain of the honest worked run, in transcript order.
inline std::array<GhzLabel, 7> example_label_chain() {
    return {label7(6, 1, 3), label7(4, 6, 1), label7(6, 5, 0), label7(5, 6, 1),
            label7(5, 6, 1), label7(6, 5, 0), label7(2, 4, 6)};
}

/// Random 4x4 scheme enforcing the same any-three-of-four structure, built
/// from a scaled Vandermonde block (1, x_i, x_i^2, 0) and a column mix
/// block-diag(1, T) with T invertible; both transforms preserve which row
/// sets reach the target, so validity is by construction (and re-checked by
/// callers).
inline Msp random_threshold_msp(Rng& rng) {
    const std::uint32_t d = F7.value();
    // Distinct nonzero evaluation points.
    std::array<std::uint32_t, 6> pool{1, 2, 3, 4, 5, 6};
    for (std::size_t i = 0; i < 4; ++i) {
        const std::size_t j = i + uniform_below(rng, pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    // T = L*U with unit lower and nonzero-diagonal upper factors.
    std::array<std::array<std::uint64_t, 3>, 3> lower{}, upper{}, mix{};
    for (std::size_t r = 0; r < 3; ++r) {
        lower[r][r] = 1;
        for (std::size_t c = 0; c < r; ++c) lower[r][c] = uniform_below(rng, d);
        upper[r][r] = 1 + uniform_below(rng, d - 1);
        for (std::size_t c = r + 1; c < 3; ++c) upper[r][c] = uniform_below(rng, d);
    }
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c) {
            std::uint64_t acc = 0;
            for (std::size_t k = 0; k < 3; ++k) acc += lower[r][k] * upper[k][c];
            mix[r][c] = acc % d;
        }

    FieldMatrix m(F7, 4, 4);
    for (std::size_t r = 0; r < 4; ++r) {
        const std::uint64_t x = pool[r];
        const std::uint64_t scale = 1 + uniform_below(rng, d - 1);
        const std::array<std::uint64_t, 3> vandermonde{x % d, x * x % d, 0};
        m.set(r, 0, FieldElement(static_cast<std::int64_t>(scale), F7));
        for (std::size_t c = 0; c < 3; ++c) {
            std::uint64_t acc = 0;
            for (std::size_t k = 0; k < 3; ++k) acc += vandermonde[k] * mix[k][c];
            m.set(r, c + 1, FieldElement(static_cast<std::int64_t>(scale * (acc % d)), F7));
        }
    }
    return Msp{m, {1, 2, 3, 4}};
}

}  // namespace qss::testfix
