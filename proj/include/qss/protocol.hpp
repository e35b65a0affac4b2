#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qss/decoy.hpp"
#include "qss/field.hpp"
#include "qss/hash.hpp"
#include "qss/msp.hpp"
#include "qss/qudit.hpp"
#include "qss/random.hpp"

namespace qss {

struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ============================================================================
// Configuration
// ============================================================================

/// Pins selected dealer randomness so published worked runs replay exactly;
/// absent fields are drawn from the run's rng as usual.
struct ForcedValues {
    std::optional<GhzLabel> initial;
    std::optional<FieldVector> rho1;
    std::optional<FieldVector> rho2;
    std::optional<FieldElement> q1;
};

struct DealerConfig {
    PrimeModulus modulus;
    std::array<FieldElement, 3> secrets;  // (s1, s2, s3)
    Msp msp;
    AccessStructure gamma;
    std::size_t decoy_count = 20;
    double threshold = 0.11;
    std::uint64_t seed = 0;
    std::optional<ForcedValues> forced;

    void validate() const {
        for (const FieldElement& s : secrets)
            if (s.modulus() != modulus) throw ProtocolError("secret from wrong field");
        if (msp.modulus() != modulus) throw ProtocolError("share matrix from wrong field");
        msp.check_owners(gamma);
        if (decoy_count == 0) throw ProtocolError("decoy_count must be positive");
        if (threshold < 0.0 || threshold >= 1.0) throw ProtocolError("threshold outside [0,1)");
    }
};

/// Dishonest-participant model: one bundle component is shifted by delta
/// before the owner uses it.
struct TamperSpec {
    enum class Component { S, T, Lambda };
    ParticipantId participant;
    Component component;
    std::uint32_t delta;
};
using TamperList = std::vector<TamperSpec>;

// ============================================================================
// Dealer preparation
// ============================================================================

struct HashCommitments {
    FieldElement h1, h2, h3;
};

struct PreparedRun {
    GhzLabel initial;
    MaskingVector rho1, rho2;
    FieldVector shares_s, shares_t, lambda;  // one entry per member, in A's order
    HashCommitments commitments;
};

inline HashCommitments commit_secrets(const std::array<FieldElement, 3>& secrets) {
    return {hash_fe(secrets[0], "s1"), hash_fe(secrets[1], "s2"), hash_fe(secrets[2], "s3")};
}

/// Samples the run's entangled label and masking vectors (respecting forced
/// overrides), derives shares and recombination coefficients for A, and
/// commits to the secrets.  The protocol pipeline assumes one matrix row per
/// member of A.
inline PreparedRun prepare(const DealerConfig& cfg, const ParticipantSet& a, Rng& rng) {
    cfg.validate();
    if (!cfg.gamma.is_authorized(a)) throw NotAuthorized("chosen set is not authorized");
    for (ParticipantId p : a)
        if (cfg.msp.rows_of({p}).size() != 1)
            throw ProtocolError("protocol expects exactly one share row per member");

    const PrimeModulus m = cfg.modulus;
    const auto forced = cfg.forced.value_or(ForcedValues{});
    auto draw = [&] {
        return FieldElement(static_cast<std::int64_t>(uniform_below(rng, m.value())), m);
    };

    const GhzLabel initial = forced.initial ? *forced.initial : GhzLabel{draw(), draw(), draw()};
    if (initial.modulus() != m) throw ProtocolError("forced label from wrong field");

    const std::size_t l = cfg.msp.matrix.cols();
    auto masking = [&](const std::optional<FieldVector>& forced_rho, FieldElement secret) {
        if (!forced_rho) return random_masking_vector(secret, l, rng);
        if (forced_rho->modulus() != m || forced_rho->size() != l)
            throw ProtocolError("forced masking vector has the wrong shape");
        if (forced_rho->at(0) != secret)
            throw ProtocolError("forced masking vector contradicts the secret");
        return MaskingVector{*forced_rho};
    };
    const MaskingVector rho1 = masking(forced.rho1, cfg.secrets[0]);
    const MaskingVector rho2 = masking(forced.rho2, cfg.secrets[1]);

    return PreparedRun{initial,
                       rho1,
                       rho2,
                       build_shares(cfg.msp, cfg.gamma, a, rho1),
                       build_shares(cfg.msp, cfg.gamma, a, rho2),
                       recombination_vector(cfg.msp, cfg.gamma, a),
                       commit_secrets(cfg.secrets)};
}

// ============================================================================
// Per-step operators (symbolic form; the dense path applies the same ops)
// ============================================================================

/// What one member knows when acting: its bundle, plus the secret masking
/// value q1 for the first member only.
struct ParticipantState {
    ParticipantId id;
    ShareBundle bundle;
    std::optional<FieldElement> q1;  // engaged => this member acts first and measures
};

/// First member hides the travelling particle with (q1, q1).
inline PauliOp masking_op(FieldElement q1) { return {q1, q1}; }

/// Later members roll their weighted shares into the phase/offsets.
inline PauliOp share_op(const ShareBundle& b) {
    return {b.lambda_component * b.s_component, b.lambda_component * b.t_component};
}

/// Dealer's fix-up before releasing particles 2 and 3: cancel the initial
/// phase and offset on particle 2, then retarget particle 3's offset so the
/// final measurement exposes the third secret.
inline std::pair<PauliOp, PauliOp> correction_ops(const GhzLabel& initial, FieldElement s2,
                                                  FieldElement s3) {
    const PauliOp q2{-initial.phase, initial.shift2};
    const PauliOp q3{FieldElement::zero(initial.modulus()), initial.shift3 + s2 - s3};
    return {q2, q3};
}

/// First member's closing move: add its weighted share and strip q1.
inline PauliOp final_op(const ShareBundle& first, FieldElement q1) {
    return {first.lambda_component * first.s_component - q1,
            first.lambda_component * first.t_component - q1};
}

inline GhzLabel participant_step(const GhzLabel& label, const ParticipantState& p) {
    return label_apply(label, 1, p.q1 ? masking_op(*p.q1) : share_op(p.bundle));
}

inline GhzLabel dealer_correction(const GhzLabel& label, const GhzLabel& initial,
                                  FieldElement s2, FieldElement s3) {
    const auto [q2, q3] = correction_ops(initial, s2, s3);
    return label_apply(label_apply(label, 2, q2), 3, q3);
}

inline GhzLabel final_step(const GhzLabel& label, const ParticipantState& first) {
    if (!first.q1) throw ProtocolError("final step belongs to the first member");
    return label_apply(label, 1, final_op(first.bundle, *first.q1));
}

// ============================================================================
// Verification
// ============================================================================

struct RecoveryResult {
    std::optional<std::array<FieldElement, 3>> recovered;
    std::array<bool, 3> verified{false, false, false};
    std::optional<std::string> aborted_at;  // hop name if a decoy check failed
};

inline RecoveryResult verify(const GhzLabel& measured, const HashCommitments& commitments) {
    RecoveryResult out;
    out.recovered = {measured.phase, measured.shift2, measured.shift3};
    out.verified = {hash_fe(measured.phase, "s1") == commitments.h1,
                    hash_fe(measured.shift2, "s2") == commitments.h2,
                    hash_fe(measured.shift3, "s3") == commitments.h3};
    return out;
}

// ============================================================================
// Transcript
// ============================================================================

/// Joint-state snapshot after a step; the label is absent when an adversary
/// has collapsed the register out of the labeled basis.
struct LabelEvent {
    std::string actor;
    std::optional<GhzLabel> label;
};

struct DecoyCheckEvent {
    std::string actor;  // sender
    std::string hop;
    CheckOutcome outcome;
};

struct MeasurementEvent {
    std::string actor;
    GhzLabel label;
    double probability;
};

struct VerificationEvent {
    std::string actor;
    std::array<std::uint32_t, 3> recovered;
    std::array<bool, 3> verified;
};

using TranscriptEvent =
    std::variant<LabelEvent, DecoyCheckEvent, MeasurementEvent, VerificationEvent>;

struct Transcript {
    std::vector<TranscriptEvent> events;
};

// ============================================================================
// Full run
// ============================================================================

struct RunOutput {
    Transcript transcript;
    RecoveryResult result;
    PreparedRun prepared;
};

namespace detail {

/// Travelling register: symbolic while possible, dense once an adversary (or
/// the dense-oracle mode) needs amplitudes.  Both views, when present, are
/// evolved by the same operators.
struct JointRegister {
    std::optional<GhzLabel> label;
    std::optional<DenseState> dense;

    void materialize() {
        if (!dense) dense = ghz_state(*label);
    }
    void apply(int particle, const PauliOp& op) {
        if (label) label = label_apply(*label, particle, op);
        if (dense) dense = apply_on_particle(*dense, particle, op);
    }
    void collapse(int particle, Basis basis, Rng& rng) {
        materialize();
        dense = measure_particle(*dense, particle, basis, rng).post;
        label.reset();
    }
    std::optional<GhzLabel> snapshot_label() const {
        if (label) return label;
        return identify_ghz(*dense);
    }
};

inline std::string participant_name(ParticipantId id) { return "P" + std::to_string(id); }

}  // namespace detail

/// Executes one full dealing/recovery run and returns the transcript plus the
/// recovery outcome.  Every quantum hop is decoy-checked; a failed check
/// aborts immediately, and nothing secret-dependent is emitted afterwards.
/// With use_dense_oracle the register is simulated densely from the start
/// (honest runs must produce the identical transcript either way).
inline RunOutput run_protocol(const DealerConfig& cfg, const ParticipantSet& a,
                              const EveModel& eve, const TamperList& tampers,
                              std::uint64_t seed, bool use_dense_oracle = false) {
    Rng rng(seed);
    PreparedRun prep = prepare(cfg, a, rng);
    const PrimeModulus m = cfg.modulus;

    // Classical bundles, with any dishonest shifts applied to the copy the
    // owner will actually use.
    std::vector<ParticipantState> members;
    for (std::size_t i = 0; i < a.size(); ++i) {
        members.push_back(ParticipantState{
            a[i],
            ShareBundle{a[i], prep.lambda.at(i), prep.shares_s.at(i), prep.shares_t.at(i)},
            std::nullopt});
    }
    for (const TamperSpec& tamper : tampers) {
        bool found = false;
        for (ParticipantState& p : members) {
            if (p.id != tamper.participant) continue;
            found = true;
            const FieldElement delta(static_cast<std::int64_t>(tamper.delta), m);
            switch (tamper.component) {
                case TamperSpec::Component::S:
                    p.bundle.s_component = p.bundle.s_component + delta;
                    break;
                case TamperSpec::Component::T:
                    p.bundle.t_component = p.bundle.t_component + delta;
                    break;
                case TamperSpec::Component::Lambda:
                    p.bundle.lambda_component = p.bundle.lambda_component + delta;
                    break;
            }
        }
        if (!found) throw ProtocolError("tamper names a participant outside the chosen set");
    }

    const auto forced = cfg.forced.value_or(ForcedValues{});
    members.front().q1 =
        forced.q1 ? *forced.q1
                  : FieldElement(static_cast<std::int64_t>(uniform_below(rng, m.value())), m);

    detail::JointRegister reg;
    reg.label = prep.initial;
    if (use_dense_oracle) reg.materialize();

    RunOutput out{Transcript{}, RecoveryResult{}, prep};
    auto& events = out.transcript.events;
    const std::string dealer = "alice";
    const std::string recoverer = detail::participant_name(members.front().id);

    events.push_back(LabelEvent{dealer, reg.snapshot_label()});

    // One decoy-wrapped transmission; payload handle i carries particles[i].
    auto hop = [&](const std::string& sender, const std::string& receiver,
                   const std::vector<int>& particles) -> bool {
        const std::string name = sender + "->" + receiver + ":" +
                                 (particles == std::vector<int>{1} ? "Q1" : "Q2Q3");
        const InsertResult ins = insert_decoys(m, particles.size(), cfg.decoy_count, rng);
        const ChannelSequence received =
            transmit(ins.sequence, eve, rng, [&](std::uint32_t handle, Basis basis) {
                reg.collapse(particles[handle], basis, rng);
            });
        const CheckOutcome outcome = check(received, ins.records, cfg.threshold, rng);
        events.push_back(DecoyCheckEvent{sender, name, outcome});
        if (!outcome.passed) out.result.aborted_at = name;
        return outcome.passed;
    };

    // Q1 to the first member, then along the chain with each member's step.
    if (!hop(dealer, recoverer, {1})) return out;
    for (std::size_t i = 0; i < members.size(); ++i) {
        const ParticipantState& p = members[i];
        reg.apply(1, p.q1 ? masking_op(*p.q1) : share_op(p.bundle));
        events.push_back(LabelEvent{detail::participant_name(p.id), reg.snapshot_label()});
        if (i + 1 < members.size()) {
            if (!hop(detail::participant_name(p.id),
                     detail::participant_name(members[i + 1].id), {1}))
                return out;
        }
    }

    // Dealer corrects the particles still in hand, then releases them.
    const auto [q2_op, q3_op] = correction_ops(prep.initial, cfg.secrets[1], cfg.secrets[2]);
    reg.apply(2, q2_op);
    reg.apply(3, q3_op);
    events.push_back(LabelEvent{dealer, reg.snapshot_label()});
    if (!hop(dealer, recoverer, {2, 3})) return out;

    // Q1 travels back from the last member (unless it never left).
    if (members.size() > 1) {
        if (!hop(detail::participant_name(members.back().id), recoverer, {1})) return out;
    }

    reg.apply(1, final_op(members.front().bundle, *members.front().q1));
    events.push_back(LabelEvent{recoverer, reg.snapshot_label()});

    reg.materialize();
    const JointMeasurement measured = ghz_joint_measure(*reg.dense, rng);
    events.push_back(MeasurementEvent{recoverer, measured.label, measured.probability});

    out.result = verify(measured.label, prep.commitments);
    events.push_back(VerificationEvent{
        recoverer,
        {measured.label.phase.value(), measured.label.shift2.value(),
         measured.label.shift3.value()},
        out.result.verified});
    return out;
}

// ============================================================================
// Collusion arithmetic
// ============================================================================

/// What a coalition of every member except the first can assemble from its
/// own bundles: the recombination sums minus the first member's terms.
struct PartialSums {
    FieldElement share1_sum, share2_sum;
};

inline PartialSums colluders_partial_sums(const PreparedRun& prep) {
    const PrimeModulus m = prep.initial.modulus();
    PartialSums out{FieldElement::zero(m), FieldElement::zero(m)};
    for (std::size_t i = 1; i < prep.lambda.size(); ++i) {
        out.share1_sum = out.share1_sum + prep.lambda.at(i) * prep.shares_s.at(i);
        out.share2_sum = out.share2_sum + prep.lambda.at(i) * prep.shares_t.at(i);
    }
    return out;
}

}  // namespace qss
