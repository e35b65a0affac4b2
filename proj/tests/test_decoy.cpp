#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "qss/decoy.hpp"

using namespace qss;

namespace {
const PrimeModulus F7{7};
}

TEST_CASE("decoy insertion layout") {
    Rng rng(11);
    const InsertResult r = insert_decoys(F7, 1, 4, rng);
    CHECK(r.sequence.slots.size() == 5);
    CHECK(r.sequence.payload_count == 1);
    REQUIRE(r.records.size() == 4);
    std::set<std::size_t> positions;
    for (const auto& record : r.records) {
        CHECK(record.position < 5);
        positions.insert(record.position);
        CHECK(record.prepared_index.value() < 7);
    }
    CHECK(positions.size() == 4);  // distinct slots
    std::size_t payload_slots = 0;
    for (const auto& slot : r.sequence.slots)
        if (std::holds_alternative<PayloadSlot>(slot)) ++payload_slots;
    CHECK(payload_slots == 1);

    CHECK_THROWS_AS(insert_decoys(F7, 1, 0, rng), DecoyError);
}

TEST_CASE("decoy insertion is deterministic under a fixed seed") {
    Rng a(314), b(314);
    const InsertResult ra = insert_decoys(F7, 2, 6, a);
    const InsertResult rb = insert_decoys(F7, 2, 6, b);
    REQUIRE(ra.records.size() == rb.records.size());
    for (std::size_t i = 0; i < ra.records.size(); ++i) {
        CHECK(ra.records[i].position == rb.records[i].position);
        CHECK(ra.records[i].basis == rb.records[i].basis);
        CHECK(ra.records[i].prepared_index == rb.records[i].prepared_index);
    }
}

TEST_CASE("decoy bases and interleave positions are uniform") {
    Rng rng(271828);
    int z_count = 0, total = 0;
    std::vector<int> payload_at(5, 0);
    for (int run = 0; run < 2500; ++run) {
        const InsertResult r = insert_decoys(F7, 1, 4, rng);
        for (const auto& record : r.records) {
            ++total;
            if (record.basis == Basis::Z) ++z_count;
        }
        for (std::size_t pos = 0; pos < 5; ++pos)
            if (std::holds_alternative<PayloadSlot>(r.sequence.slots[pos])) ++payload_at[pos];
    }
    CHECK(z_count / static_cast<double>(total) == Catch::Approx(0.5).margin(0.02));
    for (int count : payload_at)
        CHECK(count / 2500.0 == Catch::Approx(0.2).margin(0.03));
}

TEST_CASE("a quiet channel shows a zero error rate") {
    Rng rng(1);
    const InsertResult r = insert_decoys(F7, 0, 100, rng);
    const ChannelSequence received = transmit(r.sequence, EveModel::none(), rng);
    const CheckOutcome outcome = check(received, r.records, 0.11, rng);
    CHECK(outcome.tested == 100);
    CHECK(outcome.errors == 0);
    CHECK(outcome.error_rate == 0.0);
    CHECK(outcome.passed);

    // The threshold-free overload applies the canonical 11% bound.
    Rng rng2(1);
    const InsertResult r2 = insert_decoys(F7, 0, 100, rng2);
    const ChannelSequence received2 = transmit(r2.sequence, EveModel::none(), rng2);
    CHECK(check(received2, r2.records, rng2).passed);
}

TEST_CASE("intercept-resend disturbs 3/7 of decoys at d=7") {
    Rng rng(0xaced);
    std::size_t tested = 0, errors = 0;
    while (tested < 10000) {
        const InsertResult r = insert_decoys(F7, 0, 500, rng);
        const ChannelSequence received = transmit(r.sequence, EveModel::intercept_resend(), rng);
        const CheckOutcome outcome = check(received, r.records, 0.11, rng);
        CHECK_FALSE(outcome.passed);
        tested += outcome.tested;
        errors += outcome.errors;
    }
    // Eve guesses the preparation basis half the time; a wrong guess leaves a
    // uniform outcome, so the per-decoy error rate is (1/2)(1 - 1/d) = 3/7.
    CHECK(errors / static_cast<double>(tested) == Catch::Approx(3.0 / 7.0).margin(0.02));
}

TEST_CASE("entangling ancillas disturb only Fourier-basis decoys") {
    Rng rng(0xfeed);
    std::size_t tested = 0, errors = 0, x_tested = 0, x_errors = 0;
    for (int run = 0; run < 20; ++run) {
        const InsertResult r = insert_decoys(F7, 0, 500, rng);
        const ChannelSequence received =
            transmit(r.sequence, EveModel::entangle_measure(), rng);

        // Re-run the check decoy by decoy so errors can be split by basis.
        for (const auto& record : r.records) {
            const auto& decoy = std::get<SingleQuditState>(received.slots[record.position]);
            const SingleMeasurement m = single_measure(decoy, record.basis, rng);
            const bool error = m.outcome != record.prepared_index;
            ++tested;
            errors += error;
            if (record.basis == Basis::X) {
                ++x_tested;
                x_errors += error;
            } else {
                CHECK_FALSE(error);  // computational decoys commute with the coupling
            }
        }
    }
    // Coupled Fourier decoys decohere to a uniform outcome; with the default
    // half-strength attack that is (1/2)(1 - 1/d) on X decoys, half of that
    // overall.
    CHECK(x_errors / static_cast<double>(x_tested) ==
          Catch::Approx(0.5 * 6.0 / 7.0).margin(0.03));
    CHECK(errors / static_cast<double>(tested) == Catch::Approx(3.0 / 14.0).margin(0.02));
}

TEST_CASE("full-strength entangling attack doubles the damage") {
    Rng rng(0xcafe);
    std::size_t tested = 0, errors = 0;
    for (int run = 0; run < 20; ++run) {
        const InsertResult r = insert_decoys(F7, 0, 500, rng);
        const ChannelSequence received =
            transmit(r.sequence, EveModel::entangle_measure(1.0), rng);
        const CheckOutcome outcome = check(received, r.records, 0.11, rng);
        tested += outcome.tested;
        errors += outcome.errors;
    }
    CHECK(errors / static_cast<double>(tested) == Catch::Approx(3.0 / 7.0).margin(0.02));
}

TEST_CASE("detection probability grows with the decoy count") {
    Rng rng(90210);
    const double per_decoy_pass = 0.5 + 1.0 / 14.0;  // 1/2 + 1/(2d)
    double previous = 0.0;
    for (std::size_t k : {5u, 10u, 20u}) {
        int detected = 0;
        const int runs = 3000;
        for (int run = 0; run < runs; ++run) {
            const InsertResult r = insert_decoys(F7, 0, k, rng);
            const ChannelSequence received =
                transmit(r.sequence, EveModel::intercept_resend(), rng);
            if (!check(received, r.records, /*threshold=*/0.0, rng).passed) ++detected;
        }
        const double rate = detected / static_cast<double>(runs);
        CHECK(rate >= 1.0 - std::pow(per_decoy_pass, static_cast<double>(k)) - 0.02);
        CHECK(rate + 0.01 >= previous);
        previous = rate;
    }
}

TEST_CASE("payload interception is delegated to the joint-state owner") {
    Rng rng(8);
    const InsertResult r = insert_decoys(F7, 3, 5, rng);

    SECTION("a tap is mandatory") {
        Rng t(9);
        CHECK_THROWS_AS(transmit(r.sequence, EveModel::intercept_resend(), t), DecoyError);
    }

    SECTION("every payload handle is visited once") {
        Rng t(9);
        std::vector<std::uint32_t> seen;
        transmit(r.sequence, EveModel::intercept_resend(), t,
                 [&](std::uint32_t handle, Basis) { seen.push_back(handle); });
        CHECK(seen == std::vector<std::uint32_t>{0, 1, 2});
    }

    SECTION("entangling adversary leaves payload handles alone") {
        Rng t(9);
        const ChannelSequence received = transmit(r.sequence, EveModel::entangle_measure(), t);
        std::size_t payloads = 0;
        for (const auto& slot : received.slots)
            if (std::holds_alternative<PayloadSlot>(slot)) ++payloads;
        CHECK(payloads == 3);
    }
}

TEST_CASE("corrupted records are rejected") {
    Rng rng(13);
    InsertResult r = insert_decoys(F7, 1, 3, rng);

    std::vector<DecoyRecord> past = r.records;
    past[0].position = 99;
    CHECK_THROWS_AS(check(r.sequence, past, 0.11, rng), DecoyError);

    std::vector<DecoyRecord> onto_payload = r.records;
    for (std::size_t pos = 0; pos < r.sequence.slots.size(); ++pos)
        if (std::holds_alternative<PayloadSlot>(r.sequence.slots[pos]))
            onto_payload[0].position = pos;
    CHECK_THROWS_AS(check(r.sequence, onto_payload, 0.11, rng), DecoyError);
}
