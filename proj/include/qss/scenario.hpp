#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "qss/protocol.hpp"

namespace qss {

/// A scenario file could not be read, parsed, or mapped onto a valid run
/// configuration.
struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One fully described run: dealer configuration, the set that will recover,
/// the channel adversary, and any dishonest-participant shifts.
struct Scenario {
    DealerConfig config;
    ParticipantSet chosen_set;
    EveModel eve;
    TamperList tamper;
};

// ============================================================================
// Scenario parsing
// ============================================================================

namespace detail {

inline std::uint64_t json_uint(const nlohmann::ordered_json& j, const std::string& what) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer()) {
        const std::int64_t v = j.get<std::int64_t>();
        if (v >= 0) return static_cast<std::uint64_t>(v);
    }
    throw ScenarioError(what + " must be a non-negative integer");
}

inline FieldElement json_field_value(const nlohmann::ordered_json& j, PrimeModulus d,
                                     const std::string& what) {
    const std::uint64_t v = json_uint(j, what);
    if (v >= d.value())
        throw ScenarioError(what + " = " + std::to_string(v) + " must lie in [0, " +
                            std::to_string(d.value()) + ")");
    return FieldElement(static_cast<std::int64_t>(v), d);
}

inline ParticipantId json_participant(const nlohmann::ordered_json& j, const std::string& what) {
    const std::uint64_t v = json_uint(j, what);
    if (v == 0 || v > 0xffffffffull)
        throw ScenarioError(what + " must be a positive participant id");
    return static_cast<ParticipantId>(v);
}

inline ParticipantSet json_participant_set(const nlohmann::ordered_json& j,
                                           const std::string& what) {
    if (!j.is_array() || j.empty())
        throw ScenarioError(what + " must be a non-empty array of participant ids");
    ParticipantSet out;
    for (const auto& entry : j) out.push_back(json_participant(entry, what + " entry"));
    return out;
}

inline FieldVector json_field_vector(const nlohmann::ordered_json& j, PrimeModulus d,
                                     const std::string& what) {
    if (!j.is_array() || j.empty())
        throw ScenarioError(what + " must be a non-empty array of field values");
    std::vector<std::int64_t> vals;
    for (const auto& entry : j)
        vals.push_back(json_field_value(entry, d, what + " entry").value());
    return {d, vals};
}

inline const nlohmann::ordered_json& require_field(const nlohmann::ordered_json& j,
                                                   const std::string& key) {
    if (!j.contains(key)) throw ScenarioError("scenario is missing required field '" + key + "'");
    return j.at(key);
}

}  // namespace detail

/// Maps an adversary name from a scenario or flag onto a channel model.
inline EveModel parse_eve(const std::string& name, double couple_probability = 0.5) {
    if (name == "none") return EveModel::none();
    if (name == "intercept_resend") return EveModel::intercept_resend();
    if (name == "entangle") {
        if (couple_probability < 0.0 || couple_probability > 1.0)
            throw ScenarioError("couple_probability must lie in [0, 1]");
        return EveModel::entangle_measure(couple_probability);
    }
    throw ScenarioError("unknown adversary '" + name +
                        "' (expected none, intercept_resend, or entangle)");
}

/// Parses one dishonest-participant directive of the form P<id>.<s|t|lambda>=<delta>,
/// e.g. "P2.s=+1".  The delta is reduced into the field and must not be a no-op.
inline TamperSpec parse_tamper_spec(const std::string& text, PrimeModulus d) {
    static const std::regex grammar(R"(P(\d{1,9})\.(s|t|lambda)=([+-]?\d{1,9}))");
    std::smatch m;
    if (!std::regex_match(text, m, grammar))
        throw ScenarioError("tamper spec '" + text +
                            "' does not match P<id>.<s|t|lambda>=<delta>");
    const auto id = static_cast<ParticipantId>(std::stoul(m[1].str()));
    if (id == 0) throw ScenarioError("tamper spec '" + text + "' names participant 0");
    TamperSpec::Component component = TamperSpec::Component::Lambda;
    if (m[2].str() == "s") component = TamperSpec::Component::S;
    if (m[2].str() == "t") component = TamperSpec::Component::T;
    const FieldElement delta(std::stoll(m[3].str()), d);
    if (delta.is_zero())
        throw ScenarioError("tamper spec '" + text + "' is a no-op modulo " +
                            std::to_string(d.value()));
    return TamperSpec{id, component, delta.value()};
}

/// Builds a Scenario from one parsed JSON document.  Field values are
/// validated against d before entering the field types; unknown keys are
/// rejected so typos fail loudly.
inline Scenario load_scenario(const nlohmann::ordered_json& j) {
    if (!j.is_object()) throw ScenarioError("scenario must be a JSON object");
    static const std::set<std::string> known{
        "name",      "description", "d",          "secrets", "matrix",
        "row_owner", "authorized_sets", "chosen_set", "decoy_count", "threshold",
        "eve",       "couple_probability", "tamper", "seed", "forced"};
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) throw ScenarioError("unknown scenario field '" + key + "'");

    try {
        for (const char* doc : {"name", "description"})
            if (j.contains(doc) && !j.at(doc).is_string())
                throw ScenarioError(std::string("scenario field '") + doc +
                                    "' must be a string");

        const PrimeModulus d(
            static_cast<std::uint32_t>(detail::json_uint(detail::require_field(j, "d"), "d")));

        const auto& secrets_json = detail::require_field(j, "secrets");
        if (!secrets_json.is_array() || secrets_json.size() != 3)
            throw ScenarioError("secrets must be an array of exactly three field values");
        const std::array<FieldElement, 3> secrets{
            detail::json_field_value(secrets_json[0], d, "secrets[0]"),
            detail::json_field_value(secrets_json[1], d, "secrets[1]"),
            detail::json_field_value(secrets_json[2], d, "secrets[2]")};

        const auto& matrix_json = detail::require_field(j, "matrix");
        if (!matrix_json.is_array() || matrix_json.empty())
            throw ScenarioError("matrix must be a non-empty array of rows");
        std::vector<std::vector<std::int64_t>> rows;
        for (std::size_t r = 0; r < matrix_json.size(); ++r) {
            const auto& row = matrix_json[r];
            if (!row.is_array() || row.empty())
                throw ScenarioError("matrix rows must be non-empty arrays");
            std::vector<std::int64_t> vals;
            for (std::size_t c = 0; c < row.size(); ++c)
                vals.push_back(detail::json_field_value(
                                   row[c], d,
                                   "matrix[" + std::to_string(r) + "][" + std::to_string(c) + "]")
                                   .value());
            rows.push_back(std::move(vals));
        }
        const FieldMatrix matrix = FieldMatrix::from_rows(d, rows);

        const auto& owner_json = detail::require_field(j, "row_owner");
        if (!owner_json.is_array() || owner_json.size() != matrix.rows())
            throw ScenarioError("row_owner must list exactly one owner per matrix row");
        std::vector<ParticipantId> row_owner;
        for (const auto& entry : owner_json)
            row_owner.push_back(detail::json_participant(entry, "row_owner entry"));

        ParticipantSet participants = row_owner;
        std::sort(participants.begin(), participants.end());
        participants.erase(std::unique(participants.begin(), participants.end()),
                           participants.end());

        const auto& gamma_json = detail::require_field(j, "authorized_sets");
        if (!gamma_json.is_array() || gamma_json.empty())
            throw ScenarioError("authorized_sets must be a non-empty array of sets");
        std::vector<ParticipantSet> authorized;
        for (const auto& entry : gamma_json)
            authorized.push_back(detail::json_participant_set(entry, "authorized set"));

        std::size_t decoy_count = 20;
        if (j.contains("decoy_count")) {
            decoy_count = detail::json_uint(j.at("decoy_count"), "decoy_count");
            if (decoy_count == 0) throw ScenarioError("decoy_count must be positive");
        }

        double threshold = 0.11;
        if (j.contains("threshold")) {
            if (!j.at("threshold").is_number())
                throw ScenarioError("threshold must be a number");
            threshold = j.at("threshold").get<double>();
            if (threshold < 0.0 || threshold >= 1.0)
                throw ScenarioError("threshold must lie in [0, 1)");
        }

        double couple_probability = 0.5;
        if (j.contains("couple_probability")) {
            if (!j.at("couple_probability").is_number())
                throw ScenarioError("couple_probability must be a number");
            couple_probability = j.at("couple_probability").get<double>();
        }
        std::string eve_name = "none";
        if (j.contains("eve")) {
            if (!j.at("eve").is_string()) throw ScenarioError("eve must be a string");
            eve_name = j.at("eve").get<std::string>();
        }
        const EveModel eve = parse_eve(eve_name, couple_probability);

        TamperList tamper;
        if (j.contains("tamper")) {
            if (!j.at("tamper").is_array())
                throw ScenarioError("tamper must be an array of directive strings");
            for (const auto& entry : j.at("tamper")) {
                if (!entry.is_string())
                    throw ScenarioError("tamper entries must be directive strings");
                tamper.push_back(parse_tamper_spec(entry.get<std::string>(), d));
            }
        }

        std::uint64_t seed = 0;
        if (j.contains("seed")) seed = detail::json_uint(j.at("seed"), "seed");

        std::optional<ForcedValues> forced;
        if (j.contains("forced")) {
            const auto& f = j.at("forced");
            if (!f.is_object()) throw ScenarioError("forced must be an object");
            static const std::set<std::string> known_forced{"initial", "rho1", "rho2", "q1"};
            for (const auto& [key, value] : f.items())
                if (!known_forced.count(key))
                    throw ScenarioError("unknown forced field '" + key + "'");
            ForcedValues out;
            if (f.contains("initial")) {
                const FieldVector v = detail::json_field_vector(f.at("initial"), d, "forced.initial");
                if (v.size() != 3)
                    throw ScenarioError("forced.initial must hold exactly three field values");
                out.initial = GhzLabel{v.at(0), v.at(1), v.at(2)};
            }
            if (f.contains("rho1")) out.rho1 = detail::json_field_vector(f.at("rho1"), d, "forced.rho1");
            if (f.contains("rho2")) out.rho2 = detail::json_field_vector(f.at("rho2"), d, "forced.rho2");
            if (f.contains("q1")) out.q1 = detail::json_field_value(f.at("q1"), d, "forced.q1");
            forced = std::move(out);
        }

        Scenario scenario{DealerConfig{d, secrets, Msp{matrix, row_owner},
                                       AccessStructure{participants, authorized}, decoy_count,
                                       threshold, seed, forced},
                          detail::json_participant_set(detail::require_field(j, "chosen_set"),
                                                       "chosen_set"),
                          eve, tamper};
        scenario.config.validate();
        return scenario;
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError(std::string("malformed scenario value: ") + e.what());
    }
}

inline Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot read scenario file '" + path + "'");
    nlohmann::ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError("scenario file '" + path + "' is not valid JSON: " + e.what());
    }
    return load_scenario(j);
}

// ============================================================================
// Trace serialization
// ============================================================================

namespace detail {

inline nlohmann::ordered_json label_json(const std::optional<GhzLabel>& label) {
    if (!label) return nullptr;
    return nlohmann::ordered_json::array(
        {label->phase.value(), label->shift2.value(), label->shift3.value()});
}

}  // namespace detail

/// One transcript event as a trace record with a monotone sequence number.
inline nlohmann::ordered_json trace_record(std::size_t seq, const TranscriptEvent& event) {
    using json = nlohmann::ordered_json;
    json record;
    record["seq"] = seq;
    if (const auto* e = std::get_if<LabelEvent>(&event)) {
        record["kind"] = "label";
        record["actor"] = e->actor;
        record["payload"] = json{{"label", detail::label_json(e->label)}};
    } else if (const auto* e = std::get_if<DecoyCheckEvent>(&event)) {
        record["kind"] = "decoy_check";
        record["actor"] = e->actor;
        record["payload"] = json{{"hop", e->hop},
                                 {"tested", e->outcome.tested},
                                 {"errors", e->outcome.errors},
                                 {"error_rate", e->outcome.error_rate},
                                 {"passed", e->outcome.passed}};
    } else if (const auto* e = std::get_if<MeasurementEvent>(&event)) {
        record["kind"] = "measurement";
        record["actor"] = e->actor;
        record["payload"] =
            json{{"label", detail::label_json(e->label)}, {"probability", e->probability}};
    } else if (const auto* e = std::get_if<VerificationEvent>(&event)) {
        record["kind"] = "verification";
        record["actor"] = e->actor;
        record["payload"] = json{{"recovered", e->recovered}, {"verified", e->verified}};
    }
    return record;
}

/// Line-delimited trace: one JSON object per event, in transcript order.
/// Output is a pure function of the transcript, so equal runs serialize
/// byte-identically.
inline void write_trace(std::ostream& os, const Transcript& transcript) {
    for (std::size_t i = 0; i < transcript.events.size(); ++i)
        os << trace_record(i, transcript.events[i]).dump() << '\n';
}

inline std::string format_label(const GhzLabel& label) {
    return "(" + std::to_string(label.phase.value()) + "," +
           std::to_string(label.shift2.value()) + "," + std::to_string(label.shift3.value()) +
           ")";
}

}  // namespace qss
