#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qss/field.hpp"
#include "qss/random.hpp"

namespace qss {

using ParticipantId = std::uint32_t;
/// Ordered, duplicate-free list of participant ids; order matters for share
/// layout and for the protocol's hop sequence.
using ParticipantSet = std::vector<ParticipantId>;

struct MspError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The queried set cannot reconstruct (not declared authorized, or the rows it
/// owns do not reach the target vector).
struct NotAuthorized : MspError {
    using MspError::MspError;
};

/// A privacy enumeration would exceed the configured work bound.
struct EnumerationBoundExceeded : MspError {
    using MspError::MspError;
};

namespace detail {
inline bool subset_of(const ParticipantSet& inner, const ParticipantSet& outer) {
    for (ParticipantId p : inner)
        if (std::find(outer.begin(), outer.end(), p) == outer.end()) return false;
    return true;
}
}  // namespace detail

// ============================================================================
// AccessStructure — declared authorized family, monotone on query
// ============================================================================

class AccessStructure {
public:
    AccessStructure(ParticipantSet participants, std::vector<ParticipantSet> authorized_sets)
        : participants_(std::move(participants)), authorized_(std::move(authorized_sets)) {
        if (participants_.empty()) throw MspError("access structure needs participants");
        ParticipantSet sorted = participants_;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw MspError("duplicate participant id");
        for (const auto& set : authorized_) {
            if (set.empty()) throw MspError("authorized sets must be nonempty");
            if (!detail::subset_of(set, participants_))
                throw MspError("authorized set names an unknown participant");
        }
    }

    const ParticipantSet& participants() const noexcept { return participants_; }
    const std::vector<ParticipantSet>& authorized_sets() const noexcept { return authorized_; }

    /// Monotone closure: any superset of a declared authorized set qualifies.
    bool is_authorized(const ParticipantSet& set) const {
        for (const auto& a : authorized_)
            if (detail::subset_of(a, set)) return true;
        return false;
    }

    /// All inclusion-maximal unauthorized subsets, each sorted ascending.
    /// Enumerates the full power set, so participant counts stay desk-scale.
    std::vector<ParticipantSet> maximal_unauthorized_sets() const {
        const std::size_t n = participants_.size();
        if (n > 20) throw MspError("too many participants for subset enumeration");
        std::vector<ParticipantSet> out;
        for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
            ParticipantSet set;
            for (std::size_t i = 0; i < n; ++i)
                if (mask & (1u << i)) set.push_back(participants_[i]);
            if (is_authorized(set)) continue;
            bool maximal = true;
            for (std::size_t i = 0; i < n && maximal; ++i) {
                if (mask & (1u << i)) continue;
                ParticipantSet bigger = set;
                bigger.push_back(participants_[i]);
                if (!is_authorized(bigger)) maximal = false;
            }
            if (maximal) {
                std::sort(set.begin(), set.end());
                out.push_back(std::move(set));
            }
        }
        return out;
    }

private:
    ParticipantSet participants_;
    std::vector<ParticipantSet> authorized_;
};

// ============================================================================
// Msp — share matrix with a row-to-participant surjection; target is e1
// ============================================================================

struct Msp {
    FieldMatrix matrix;                    // k x l share matrix
    std::vector<ParticipantId> row_owner;  // size k; owner of each row

    Msp(FieldMatrix m, std::vector<ParticipantId> owners)
        : matrix(std::move(m)), row_owner(std::move(owners)) {
        if (row_owner.size() != matrix.rows())
            throw MspError("row_owner must label every matrix row");
    }

    PrimeModulus modulus() const noexcept { return matrix.modulus(); }

    /// Fixed reconstruction target (1, 0, ..., 0).
    FieldVector target() const {
        FieldVector xi = FieldVector::zeros(matrix.modulus(), matrix.cols());
        xi.set(0, FieldElement::one(matrix.modulus()));
        return xi;
    }

    /// Row indices owned by the members of `set`: members in their given
    /// order, each member's rows in matrix order.
    std::vector<std::size_t> rows_of(const ParticipantSet& set) const {
        std::vector<std::size_t> idx;
        for (ParticipantId p : set)
            for (std::size_t r = 0; r < row_owner.size(); ++r)
                if (row_owner[r] == p) idx.push_back(r);
        return idx;
    }

    /// Every participant must own at least one row and every owner must be a
    /// declared participant.
    void check_owners(const AccessStructure& gamma) const {
        for (ParticipantId owner : row_owner) {
            const auto& ps = gamma.participants();
            if (std::find(ps.begin(), ps.end(), owner) == ps.end())
                throw MspError("row owned by undeclared participant " + std::to_string(owner));
        }
        for (ParticipantId p : gamma.participants())
            if (rows_of({p}).empty())
                throw MspError("participant " + std::to_string(p) + " owns no row");
    }
};

// ============================================================================
// Masking vectors and shares
// ============================================================================

/// Column vector whose first coordinate is the secret; the tail is the
/// dealer's random padding.
struct MaskingVector {
    FieldVector coords;

    explicit MaskingVector(FieldVector v) : coords(std::move(v)) {
        if (coords.size() == 0) throw MspError("masking vector needs at least the secret slot");
    }

    FieldElement secret() const { return coords.at(0); }
};

/// One participant's classical material for a run: recombination coefficient
/// plus the two share components (one per secret).
struct ShareBundle {
    ParticipantId id;
    FieldElement lambda_component;
    FieldElement s_component;
    FieldElement t_component;
};

/// Certificate that an unauthorized set learns nothing: first coordinate 1 and
/// annihilated by every row the set owns.
struct SweepingVector {
    FieldVector h;
};

inline MaskingVector random_masking_vector(FieldElement secret, std::size_t length, Rng& rng) {
    if (length == 0) throw MspError("masking vector needs at least the secret slot");
    const PrimeModulus m = secret.modulus();
    FieldVector v = FieldVector::zeros(m, length);
    v.set(0, secret);
    for (std::size_t i = 1; i < length; ++i)
        v.set(i, FieldElement(static_cast<std::int64_t>(uniform_below(rng, m.value())), m));
    return MaskingVector{v};
}

/// Shares for the members of A: M_A * rho, rows laid out per Msp::rows_of.
inline FieldVector build_shares(const Msp& msp, const AccessStructure& gamma,
                                const ParticipantSet& a, const MaskingVector& rho) {
    if (!gamma.is_authorized(a)) throw NotAuthorized("set is not authorized");
    const auto rows = msp.rows_of(a);
    if (rows.empty()) throw NotAuthorized("set owns no rows");
    return mat_vec_mul(msp.matrix.selected_rows(rows), rho.coords);
}

/// Coefficients lambda with M_A^T * lambda = target, in A's share layout.
inline FieldVector recombination_vector(const Msp& msp, const AccessStructure& gamma,
                                        const ParticipantSet& a) {
    if (!gamma.is_authorized(a)) throw NotAuthorized("set is not authorized");
    const auto rows = msp.rows_of(a);
    if (rows.empty()) throw NotAuthorized("set owns no rows");
    const auto sol = solve_linear(msp.matrix.selected_rows(rows).transposed(), msp.target());
    if (!sol) throw NotAuthorized("declared authorized set cannot reach the target");
    return *sol;
}

/// Linear reconstruction: sum of lambda_j * share_j.
inline FieldElement reconstruct(const FieldVector& shares, const FieldVector& lambda) {
    return dot(lambda, shares);
}

inline std::optional<SweepingVector> find_sweeping_vector(const Msp& msp,
                                                          const ParticipantSet& b) {
    const auto rows = msp.rows_of(b);
    const PrimeModulus m = msp.modulus();
    const std::size_t l = msp.matrix.cols();
    FieldVector h = FieldVector::zeros(m, l);
    h.set(0, FieldElement::one(m));
    if (rows.empty()) return SweepingVector{h};  // vacuously annihilated
    const FieldMatrix mb = msp.matrix.selected_rows(rows);
    if (l == 1) {
        for (std::size_t r = 0; r < mb.rows(); ++r)
            if (!mb.at(r, 0).is_zero()) return std::nullopt;
        return SweepingVector{h};
    }
    // Solve M_B[:,1:] * h' = -M_B[:,0], then h = (1, h').
    FieldMatrix tail(m, mb.rows(), l - 1);
    FieldVector rhs = FieldVector::zeros(m, mb.rows());
    for (std::size_t r = 0; r < mb.rows(); ++r) {
        rhs.set(r, -mb.at(r, 0));
        for (std::size_t c = 1; c < l; ++c) tail.set(r, c - 1, mb.at(r, c));
    }
    const auto sol = solve_linear(tail, rhs);
    if (!sol) return std::nullopt;
    for (std::size_t c = 1; c < l; ++c) h.set(c, sol->at(c - 1));
    return SweepingVector{h};
}

// ============================================================================
// Validation and privacy audit
// ============================================================================

struct SetCheck {
    ParticipantSet members;
    bool target_in_span = false;
    bool sweeping_found = false;
};

struct ValidationReport {
    std::vector<SetCheck> authorized;            // each must have target_in_span
    std::vector<SetCheck> maximal_unauthorized;  // each must lack span and have a sweeper
    bool valid = false;
};

/// Checks the span condition for every declared authorized set and the
/// exclusion + sweeping-vector condition for every maximal unauthorized set.
inline ValidationReport validate_msp(const Msp& msp, const AccessStructure& gamma) {
    msp.check_owners(gamma);
    ValidationReport report;
    report.valid = true;
    for (const auto& a : gamma.authorized_sets()) {
        SetCheck check;
        check.members = a;
        check.target_in_span =
            row_span_contains(msp.matrix.selected_rows(msp.rows_of(a)), msp.target());
        if (!check.target_in_span) report.valid = false;
        report.authorized.push_back(std::move(check));
    }
    for (const auto& b : gamma.maximal_unauthorized_sets()) {
        SetCheck check;
        check.members = b;
        const auto rows = msp.rows_of(b);
        check.target_in_span =
            !rows.empty() && row_span_contains(msp.matrix.selected_rows(rows), msp.target());
        check.sweeping_found = find_sweeping_vector(msp, b).has_value();
        if (check.target_in_span || !check.sweeping_found) report.valid = false;
        report.maximal_unauthorized.push_back(std::move(check));
    }
    return report;
}

/// Exhaustive perfect-privacy check for an unauthorized set B: over all
/// masking completions, the multiset of B's share tuples must not depend on
/// the secret.  Work is d^(l-1) per secret value; guarded by `bound`.
inline bool privacy_audit(const Msp& msp, const AccessStructure& gamma, const ParticipantSet& b,
                          std::uint64_t bound = 5'000'000) {
    if (gamma.is_authorized(b))
        throw MspError("privacy audit expects an unauthorized set");
    const auto rows = msp.rows_of(b);
    if (rows.empty()) return true;  // no shares at all
    const PrimeModulus m = msp.modulus();
    const std::uint64_t d = m.value();
    const std::size_t l = msp.matrix.cols();

    std::uint64_t completions = 1;
    for (std::size_t i = 1; i < l; ++i) {
        if (completions > bound / d + 1) throw EnumerationBoundExceeded("privacy audit too large");
        completions *= d;
    }
    if (completions > bound) throw EnumerationBoundExceeded("privacy audit too large");

    const FieldMatrix mb = msp.matrix.selected_rows(rows);
    using Tuple = std::vector<std::uint32_t>;
    std::optional<std::map<Tuple, std::uint64_t>> reference;
    for (std::uint64_t s = 0; s < d; ++s) {
        std::map<Tuple, std::uint64_t> multiset;
        for (std::uint64_t code = 0; code < completions; ++code) {
            FieldVector rho = FieldVector::zeros(m, l);
            rho.set(0, FieldElement(static_cast<std::int64_t>(s), m));
            std::uint64_t rest = code;
            for (std::size_t i = 1; i < l; ++i) {
                rho.set(i, FieldElement(static_cast<std::int64_t>(rest % d), m));
                rest /= d;
            }
            ++multiset[mat_vec_mul(mb, rho).values()];
        }
        if (!reference)
            reference = std::move(multiset);
        else if (multiset != *reference)
            return false;
    }
    return true;
}

}  // namespace qss
