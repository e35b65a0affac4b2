#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "qss/qudit.hpp"
#include "qss/random.hpp"

namespace qss {

struct DecoyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Sender-side record of one decoy: where it sits in the sequence, and how it
/// was prepared.  Never transmitted; used only for the check.
struct DecoyRecord {
    std::size_t position;
    Basis basis;
    FieldElement prepared_index;
};

/// Opaque reference to a protocol particle travelling in this hop; the channel
/// layer never inspects the joint state behind it.
struct PayloadSlot {
    std::uint32_t handle;
};

using ChannelSlot = std::variant<PayloadSlot, SingleQuditState>;

struct ChannelSequence {
    PrimeModulus d;
    std::vector<ChannelSlot> slots;
    std::size_t payload_count = 0;
};

enum class EveKind { None, InterceptResend, EntangleMeasure };

struct EveModel {
    EveKind kind = EveKind::None;
    /// EntangleMeasure only: probability that Eve couples an ancilla to a
    /// given slot (a partial attack; 1.0 couples every slot).
    double couple_probability = 0.5;

    static EveModel none() { return {EveKind::None, 0.0}; }
    static EveModel intercept_resend() { return {EveKind::InterceptResend, 0.0}; }
    static EveModel entangle_measure(double p = 0.5) { return {EveKind::EntangleMeasure, p}; }
};

struct CheckOutcome {
    std::size_t tested = 0;
    std::size_t errors = 0;
    double error_rate = 0.0;
    bool passed = false;
};

struct InsertResult {
    ChannelSequence sequence;
    std::vector<DecoyRecord> records;
};

/// Called when an intercept-resend eavesdropper measures a payload slot; the
/// owner of the joint state performs the measurement in Eve's basis.
using PayloadTap = std::function<void(std::uint32_t handle, Basis basis)>;

inline Basis uniform_basis(Rng& rng) {
    return uniform_below(rng, 2) == 0 ? Basis::Z : Basis::X;
}

/// Builds the transmission sequence for one hop: payload slots (handles
/// 0..payload_count-1, in order) interleaved with decoys drawn uniformly in
/// basis, index, and position.
inline InsertResult insert_decoys(PrimeModulus d, std::size_t payload_count,
                                  std::size_t decoy_count, Rng& rng) {
    if (decoy_count == 0) throw DecoyError("at least one decoy per hop");
    const std::size_t total = payload_count + decoy_count;

    // Uniform subset of positions for the decoys via partial Fisher-Yates.
    std::vector<std::size_t> positions(total);
    for (std::size_t i = 0; i < total; ++i) positions[i] = i;
    for (std::size_t i = 0; i < decoy_count; ++i) {
        const std::size_t j = i + uniform_below(rng, total - i);
        std::swap(positions[i], positions[j]);
    }
    std::vector<bool> is_decoy(total, false);
    for (std::size_t i = 0; i < decoy_count; ++i) is_decoy[positions[i]] = true;

    InsertResult out{ChannelSequence{d, {}, payload_count}, {}};
    out.sequence.slots.reserve(total);
    std::uint32_t next_payload = 0;
    for (std::size_t pos = 0; pos < total; ++pos) {
        if (is_decoy[pos]) {
            const Basis basis = uniform_basis(rng);
            const FieldElement index(static_cast<std::int64_t>(uniform_below(rng, d.value())),
                                     d);
            out.sequence.slots.emplace_back(single_prepare(d, basis, index));
            out.records.push_back(DecoyRecord{pos, basis, index});
        } else {
            out.sequence.slots.emplace_back(PayloadSlot{next_payload++});
        }
    }
    return out;
}

/// Passes a sequence through the channel under the given adversary.
///  - None: unchanged.
///  - InterceptResend: every slot is measured in a fresh uniformly random
///    basis and resent as the observed basis state; payload slots defer the
///    measurement to `tap` (the joint-state owner).
///  - EntangleMeasure: each decoy slot is coupled, with couple_probability,
///    to a fresh ancilla via |i>|e> -> |i>|e+i mod d>.  The ancilla records
///    the computational index perfectly, which is statistically equivalent to
///    an unobserved Z-basis collapse of the slot; payload handles pass
///    through untouched.
inline ChannelSequence transmit(ChannelSequence seq, const EveModel& eve, Rng& rng,
                                const PayloadTap& tap = {}) {
    switch (eve.kind) {
        case EveKind::None:
            return seq;
        case EveKind::InterceptResend:
            for (ChannelSlot& slot : seq.slots) {
                const Basis basis = uniform_basis(rng);
                if (auto* payload = std::get_if<PayloadSlot>(&slot)) {
                    if (!tap)
                        throw DecoyError("payload interception requires a joint-state tap");
                    tap(payload->handle, basis);
                } else {
                    auto& decoy = std::get<SingleQuditState>(slot);
                    decoy = single_measure(decoy, basis, rng).post;
                }
            }
            return seq;
        case EveKind::EntangleMeasure:
            for (ChannelSlot& slot : seq.slots) {
                auto* decoy = std::get_if<SingleQuditState>(&slot);
                if (!decoy) continue;
                if (uniform_unit(rng) >= eve.couple_probability) continue;
                *decoy = single_measure(*decoy, Basis::Z, rng).post;
            }
            return seq;
    }
    throw DecoyError("unknown adversary kind");
}

/// Receiver-side verification: measures every recorded decoy in its
/// preparation basis and compares with the prepared index.  Passes iff the
/// observed error rate does not exceed the threshold.
inline CheckOutcome check(const ChannelSequence& received,
                          const std::vector<DecoyRecord>& records, double threshold, Rng& rng) {
    CheckOutcome out;
    for (const DecoyRecord& record : records) {
        if (record.position >= received.slots.size())
            throw DecoyError("decoy record points past the sequence");
        const auto* decoy = std::get_if<SingleQuditState>(&received.slots[record.position]);
        if (!decoy) throw DecoyError("decoy record points at a payload slot");
        const SingleMeasurement m = single_measure(*decoy, record.basis, rng);
        ++out.tested;
        if (m.outcome != record.prepared_index) ++out.errors;
    }
    out.error_rate = out.tested == 0 ? 0.0
                                     : static_cast<double>(out.errors) /
                                           static_cast<double>(out.tested);
    out.passed = out.error_rate <= threshold;
    return out;
}

/// Same check at the canonical abort threshold of 11%.
inline CheckOutcome check(const ChannelSequence& received,
                          const std::vector<DecoyRecord>& records, Rng& rng) {
    return check(received, records, 0.11, rng);
}

}  // namespace qss
