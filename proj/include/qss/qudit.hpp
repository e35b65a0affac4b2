#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qss/field.hpp"
#include "qss/random.hpp"

namespace qss {

struct QuditError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Amplitude = std::complex<double>;

/// Primitive d-th root of unity raised to the k-th power, k reduced mod d
/// first so the angle stays small and the phase stays accurate.
inline Amplitude root_of_unity_pow(PrimeModulus d, std::int64_t k) {
    const std::int64_t m = d.value();
    const std::int64_t r = ((k % m) + m) % m;
    return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(r) /
                               static_cast<double>(m));
}

/// Preparation/measurement basis for single qudits: Z is computational, X is
/// the Fourier-conjugate basis.
enum class Basis { Z, X };

// ============================================================================
// Labels and operators
// ============================================================================

/// Classical name (phase, shift2, shift3) of one maximally entangled basis
/// state: amplitude w^(j*phase)/sqrt(d) on |j, j+shift2, j+shift3>.
struct GhzLabel {
    FieldElement phase;
    FieldElement shift2;
    FieldElement shift3;

    GhzLabel(FieldElement u1, FieldElement u2, FieldElement u3)
        : phase(u1), shift2(u2), shift3(u3) {
        if (u1.modulus() != u2.modulus() || u1.modulus() != u3.modulus())
            throw ModulusMismatch("label coordinates live in different fields");
    }

    PrimeModulus modulus() const noexcept { return phase.modulus(); }

    friend bool operator==(const GhzLabel& a, const GhzLabel& b) noexcept {
        return a.phase == b.phase && a.shift2 == b.shift2 && a.shift3 == b.shift3;
    }
    friend bool operator!=(const GhzLabel& a, const GhzLabel& b) noexcept { return !(a == b); }
};

/// Generalized single-qudit Pauli: sum_j w^(j*phase) |j><j+shift|.
struct PauliOp {
    FieldElement phase;
    FieldElement shift;

    PauliOp(FieldElement alpha, FieldElement beta) : phase(alpha), shift(beta) {
        if (alpha.modulus() != beta.modulus())
            throw ModulusMismatch("operator exponents live in different fields");
    }

    PrimeModulus modulus() const noexcept { return phase.modulus(); }
};

// ============================================================================
// States
// ============================================================================

/// Dense amplitude vector of the three-qudit register, index j1*d^2+j2*d+j3.
class DenseState {
public:
    explicit DenseState(PrimeModulus d)
        : d_(d), amps_(static_cast<std::size_t>(d.value()) * d.value() * d.value(), 0.0) {}

    PrimeModulus modulus() const noexcept { return d_; }
    std::size_t dim() const noexcept { return amps_.size(); }

    std::size_t index(std::uint32_t j1, std::uint32_t j2, std::uint32_t j3) const {
        const std::uint32_t d = d_.value();
        return (static_cast<std::size_t>(j1) * d + j2) * d + j3;
    }

    Amplitude at(std::size_t i) const { return amps_.at(i); }
    Amplitude& at(std::size_t i) { return amps_.at(i); }
    const std::vector<Amplitude>& amplitudes() const noexcept { return amps_; }

    double norm() const {
        double acc = 0.0;
        for (const Amplitude& a : amps_) acc += std::norm(a);
        return std::sqrt(acc);
    }
    bool is_normalized(double tol = 1e-10) const { return std::abs(norm() - 1.0) <= tol; }

private:
    PrimeModulus d_;
    std::vector<Amplitude> amps_;
};

/// Single-qudit amplitude vector (decoys travel as these).
struct SingleQuditState {
    PrimeModulus d;
    std::vector<Amplitude> amps;

    explicit SingleQuditState(PrimeModulus dim) : d(dim), amps(dim.value(), 0.0) {}

    double norm() const {
        double acc = 0.0;
        for (const Amplitude& a : amps) acc += std::norm(a);
        return std::sqrt(acc);
    }
};

/// Dense d x d complex matrix, row major.
struct ComplexMatrix {
    std::size_t dim;
    std::vector<Amplitude> entries;

    explicit ComplexMatrix(std::size_t n) : dim(n), entries(n * n, 0.0) {}
    Amplitude at(std::size_t r, std::size_t c) const { return entries[r * dim + c]; }
    Amplitude& at(std::size_t r, std::size_t c) { return entries[r * dim + c]; }
};

// ============================================================================
// Construction
// ============================================================================

inline DenseState ghz_state(const GhzLabel& label) {
    const PrimeModulus m = label.modulus();
    const std::uint32_t d = m.value();
    DenseState state(m);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (std::uint32_t j = 0; j < d; ++j) {
        const std::uint32_t j2 = (j + label.shift2.value()) % d;
        const std::uint32_t j3 = (j + label.shift3.value()) % d;
        state.at(state.index(j, j2, j3)) =
            scale * root_of_unity_pow(m, static_cast<std::int64_t>(j) * label.phase.value());
    }
    return state;
}

inline ComplexMatrix pauli_matrix(const PauliOp& op) {
    const std::uint32_t d = op.modulus().value();
    ComplexMatrix u(d);
    for (std::uint32_t j = 0; j < d; ++j) {
        const std::uint32_t col = (j + op.shift.value()) % d;
        u.at(j, col) = root_of_unity_pow(op.modulus(),
                                         static_cast<std::int64_t>(j) * op.phase.value());
    }
    return u;
}

inline SingleQuditState single_prepare(PrimeModulus d, Basis basis, FieldElement index) {
    if (index.modulus() != d) throw ModulusMismatch("preparation index from wrong field");
    SingleQuditState state(d);
    if (basis == Basis::Z) {
        state.amps[index.value()] = 1.0;
    } else {
        const double scale = 1.0 / std::sqrt(static_cast<double>(d.value()));
        for (std::uint32_t k = 0; k < d.value(); ++k)
            state.amps[k] =
                scale * root_of_unity_pow(d, static_cast<std::int64_t>(k) * index.value());
    }
    return state;
}

// ============================================================================
// Evolution
// ============================================================================

/// Applies a single-qudit operator to one tensor factor (particle in {1,2,3})
/// by a full matrix product on each slice; no label-algebra shortcuts, so this
/// path can serve as an independent oracle.
inline DenseState apply_on_particle(const DenseState& state, int particle, const PauliOp& op) {
    if (op.modulus() != state.modulus()) throw ModulusMismatch("operator from wrong field");
    if (particle < 1 || particle > 3) throw QuditError("particle index must be 1, 2, or 3");
    const std::uint32_t d = state.modulus().value();
    const ComplexMatrix u = pauli_matrix(op);

    const std::size_t stride = particle == 1 ? static_cast<std::size_t>(d) * d
                               : particle == 2 ? d
                                               : 1;
    DenseState out(state.modulus());
    // Walk every slice that varies only in the chosen particle's coordinate.
    for (std::uint32_t a = 0; a < d; ++a) {
        for (std::uint32_t b = 0; b < d; ++b) {
            std::size_t base;
            switch (particle) {
                case 1: base = out.index(0, a, b); break;
                case 2: base = out.index(a, 0, b); break;
                default: base = out.index(a, b, 0); break;
            }
            for (std::uint32_t r = 0; r < d; ++r) {
                Amplitude acc = 0.0;
                for (std::uint32_t c = 0; c < d; ++c)
                    acc += u.at(r, c) * state.at(base + c * stride);
                out.at(base + r * stride) = acc;
            }
        }
    }
    return out;
}

/// Closed-form effect of a generalized Pauli on a labeled basis state, up to a
/// global phase: particle 1 adds (phase, shift, shift); particles 2 and 3 add
/// the phase and subtract the shift from their own offset.
inline GhzLabel label_apply(const GhzLabel& label, int particle, const PauliOp& op) {
    if (op.modulus() != label.modulus()) throw ModulusMismatch("operator from wrong field");
    switch (particle) {
        case 1:
            return {label.phase + op.phase, label.shift2 + op.shift, label.shift3 + op.shift};
        case 2:
            return {label.phase + op.phase, label.shift2 - op.shift, label.shift3};
        case 3:
            return {label.phase + op.phase, label.shift2, label.shift3 - op.shift};
        default:
            throw QuditError("particle index must be 1, 2, or 3");
    }
}

// ============================================================================
// Comparison and identification
// ============================================================================

inline Amplitude inner_product(const DenseState& a, const DenseState& b) {
    if (a.modulus() != b.modulus()) throw ModulusMismatch("states of different dimension");
    Amplitude acc = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) acc += std::conj(a.at(i)) * b.at(i);
    return acc;
}

/// Largest componentwise deviation after aligning b's global phase to a's,
/// using a's first non-negligible amplitude as the anchor.
inline double deviation_up_to_phase(const DenseState& a, const DenseState& b) {
    if (a.modulus() != b.modulus()) throw ModulusMismatch("states of different dimension");
    std::size_t anchor = a.dim();
    for (std::size_t i = 0; i < a.dim(); ++i) {
        if (std::abs(a.at(i)) > 1e-12) {
            anchor = i;
            break;
        }
    }
    if (anchor == a.dim()) throw QuditError("cannot phase-align the zero state");
    if (std::abs(b.at(anchor)) < 1e-12) return 1.0;  // supports already disagree
    const Amplitude factor = a.at(anchor) / b.at(anchor);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i)
        worst = std::max(worst, std::abs(a.at(i) - factor * b.at(i)));
    return worst;
}

/// Recovers the basis label of a state that is (numerically) one of the d^3
/// labeled entangled states; nullopt if no label fits within tol.
inline std::optional<GhzLabel> identify_ghz(const DenseState& state, double tol = 1e-9) {
    const PrimeModulus m = state.modulus();
    const std::uint32_t d = m.value();
    // The j1=0 slice of a labeled state has exactly one nonzero amplitude, at
    // (0, shift2, shift3); pick the largest candidate.
    std::uint32_t u2 = 0, u3 = 0;
    double best = 0.0;
    for (std::uint32_t j2 = 0; j2 < d; ++j2) {
        for (std::uint32_t j3 = 0; j3 < d; ++j3) {
            const double mag = std::abs(state.at(state.index(0, j2, j3)));
            if (mag > best) {
                best = mag;
                u2 = j2;
                u3 = j3;
            }
        }
    }
    if (best < 1e-12) return std::nullopt;
    const Amplitude ratio = state.at(state.index(1, (1 + u2) % d, (1 + u3) % d)) /
                            state.at(state.index(0, u2, u3));
    double angle = std::arg(ratio) / (2.0 * std::numbers::pi) * static_cast<double>(d);
    std::int64_t u1 = static_cast<std::int64_t>(std::llround(angle)) % d;
    if (u1 < 0) u1 += d;
    const GhzLabel candidate{FieldElement(u1, m), FieldElement(u2, m), FieldElement(u3, m)};
    if (deviation_up_to_phase(ghz_state(candidate), state) > tol) return std::nullopt;
    return candidate;
}

// ============================================================================
// Measurement
// ============================================================================

struct JointMeasurement {
    GhzLabel label;
    double probability;
};

/// Projective measurement in the labeled entangled basis; Born-sampled via
/// the injected rng.  Labels are scanned in lexicographic (phase, shift2,
/// shift3) order, so outcomes replay under a fixed seed.
inline JointMeasurement ghz_joint_measure(const DenseState& state, Rng& rng) {
    const PrimeModulus m = state.modulus();
    const std::uint32_t d = m.value();
    std::vector<double> probs;
    probs.reserve(state.dim());
    for (std::uint32_t u1 = 0; u1 < d; ++u1)
        for (std::uint32_t u2 = 0; u2 < d; ++u2)
            for (std::uint32_t u3 = 0; u3 < d; ++u3) {
                const GhzLabel label{FieldElement(u1, m), FieldElement(u2, m),
                                     FieldElement(u3, m)};
                probs.push_back(std::norm(inner_product(ghz_state(label), state)));
            }
    const std::size_t pick = sample_index(rng, probs);
    const std::uint32_t u1 = static_cast<std::uint32_t>(pick / (d * d));
    const std::uint32_t u2 = static_cast<std::uint32_t>(pick / d % d);
    const std::uint32_t u3 = static_cast<std::uint32_t>(pick % d);
    return {GhzLabel{FieldElement(u1, m), FieldElement(u2, m), FieldElement(u3, m)},
            probs[pick]};
}

struct SingleMeasurement {
    FieldElement outcome;
    SingleQuditState post;
};

/// Projective single-qudit measurement in Z or X; returns the outcome index
/// and the collapsed basis state.
inline SingleMeasurement single_measure(const SingleQuditState& state, Basis basis, Rng& rng) {
    const PrimeModulus m = state.d;
    const std::uint32_t d = m.value();
    std::vector<double> probs(d);
    if (basis == Basis::Z) {
        for (std::uint32_t k = 0; k < d; ++k) probs[k] = std::norm(state.amps[k]);
    } else {
        const double scale = 1.0 / std::sqrt(static_cast<double>(d));
        for (std::uint32_t j = 0; j < d; ++j) {
            Amplitude overlap = 0.0;  // <J_j|psi>
            for (std::uint32_t k = 0; k < d; ++k)
                overlap += scale *
                           root_of_unity_pow(m, -static_cast<std::int64_t>(k) * j) *
                           state.amps[k];
            probs[j] = std::norm(overlap);
        }
    }
    const std::uint32_t outcome = static_cast<std::uint32_t>(sample_index(rng, probs));
    const FieldElement index(static_cast<std::int64_t>(outcome), m);
    return {index, single_prepare(m, basis, index)};
}

struct ParticleMeasurement {
    FieldElement outcome;
    DenseState post;
};

/// Measures one particle of the tripartite register in Z or X, collapsing the
/// joint state (the measured slot is left in the observed basis state).
inline ParticleMeasurement measure_particle(const DenseState& state, int particle, Basis basis,
                                            Rng& rng) {
    if (particle < 1 || particle > 3) throw QuditError("particle index must be 1, 2, or 3");
    const PrimeModulus m = state.modulus();
    const std::uint32_t d = m.value();
    const std::size_t stride = particle == 1 ? static_cast<std::size_t>(d) * d
                               : particle == 2 ? d
                                               : 1;

    // Basis change per outcome m: <m|k> is delta (Z) or w^(-km)/sqrt(d) (X).
    auto bra = [&](std::uint32_t out, std::uint32_t k) -> Amplitude {
        if (basis == Basis::Z) return out == k ? Amplitude{1.0, 0.0} : Amplitude{0.0, 0.0};
        return root_of_unity_pow(m, -static_cast<std::int64_t>(k) * out) /
               std::sqrt(static_cast<double>(d));
    };

    std::vector<double> probs(d, 0.0);
    std::vector<std::vector<Amplitude>> reduced(d, std::vector<Amplitude>(d * d, 0.0));
    for (std::uint32_t a = 0; a < d; ++a) {
        for (std::uint32_t b = 0; b < d; ++b) {
            std::size_t base;
            switch (particle) {
                case 1: base = state.index(0, a, b); break;
                case 2: base = state.index(a, 0, b); break;
                default: base = state.index(a, b, 0); break;
            }
            for (std::uint32_t out = 0; out < d; ++out) {
                Amplitude acc = 0.0;
                for (std::uint32_t k = 0; k < d; ++k) acc += bra(out, k) * state.at(base + k * stride);
                reduced[out][a * d + b] = acc;
                probs[out] += std::norm(acc);
            }
        }
    }

    const std::uint32_t outcome = static_cast<std::uint32_t>(sample_index(rng, probs));
    const double scale = 1.0 / std::sqrt(probs[outcome]);
    const SingleQuditState slot =
        single_prepare(m, basis, FieldElement(static_cast<std::int64_t>(outcome), m));

    DenseState post(m);
    for (std::uint32_t a = 0; a < d; ++a) {
        for (std::uint32_t b = 0; b < d; ++b) {
            std::size_t base;
            switch (particle) {
                case 1: base = post.index(0, a, b); break;
                case 2: base = post.index(a, 0, b); break;
                default: base = post.index(a, b, 0); break;
            }
            const Amplitude rest = scale * reduced[outcome][a * d + b];
            for (std::uint32_t k = 0; k < d; ++k)
                post.at(base + k * stride) = slot.amps[k] * rest;
        }
    }
    return {FieldElement(static_cast<std::int64_t>(outcome), m), post};
}

// ============================================================================
// Label-rule sweep: symbolic update vs. dense evolution
// ============================================================================

struct SweepResult {
    std::size_t cases = 0;
    double max_deviation = 0.0;
};

/// Compares label_apply against apply_on_particle over labeled basis states.
/// Exhaustive mode covers all d^3 labels x d^2 operators x 3 particles;
/// sample mode draws `samples` random cases.
inline SweepResult label_rule_sweep(PrimeModulus d, bool exhaustive, std::size_t samples,
                                    Rng& rng) {
    SweepResult result;
    auto run_case = [&](const GhzLabel& label, int particle, const PauliOp& op) {
        const DenseState dense = apply_on_particle(ghz_state(label), particle, op);
        const DenseState predicted = ghz_state(label_apply(label, particle, op));
        result.max_deviation =
            std::max(result.max_deviation, deviation_up_to_phase(predicted, dense));
        ++result.cases;
    };

    const std::uint32_t n = d.value();
    if (exhaustive) {
        for (std::uint32_t u1 = 0; u1 < n; ++u1)
            for (std::uint32_t u2 = 0; u2 < n; ++u2)
                for (std::uint32_t u3 = 0; u3 < n; ++u3) {
                    const GhzLabel label{FieldElement(u1, d), FieldElement(u2, d),
                                         FieldElement(u3, d)};
                    for (std::uint32_t alpha = 0; alpha < n; ++alpha)
                        for (std::uint32_t beta = 0; beta < n; ++beta) {
                            const PauliOp op{FieldElement(alpha, d), FieldElement(beta, d)};
                            for (int particle = 1; particle <= 3; ++particle)
                                run_case(label, particle, op);
                        }
                }
    } else {
        for (std::size_t i = 0; i < samples; ++i) {
            auto draw = [&] {
                return FieldElement(static_cast<std::int64_t>(uniform_below(rng, n)), d);
            };
            const GhzLabel label{draw(), draw(), draw()};
            const PauliOp op{draw(), draw()};
            run_case(label, 1 + static_cast<int>(uniform_below(rng, 3)), op);
        }
    }
    return result;
}

}  // namespace qss
