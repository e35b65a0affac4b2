#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "fixture.hpp"
#include "qss/scenario.hpp"

using namespace qss;
using namespace qss::testfix;
using nlohmann::ordered_json;

namespace {

ordered_json minimal_scenario_json() {
    return ordered_json{{"d", 7},
                        {"secrets", {2, 4, 6}},
                        {"matrix", {{0, 0, 1, 1}, {0, 1, 0, 6}, {2, 1, 1, 0}, {3, 1, 2, 1}}},
                        {"row_owner", {1, 2, 3, 4}},
                        {"authorized_sets",
                         {{1, 2, 3, 4}, {1, 2, 3}, {1, 3, 4}, {1, 2, 4}, {2, 3, 4}}},
                        {"chosen_set", {1, 2, 3, 4}}};
}

std::vector<std::string> trace_lines(const Transcript& t) {
    std::ostringstream os;
    write_trace(os, t);
    std::vector<std::string> lines;
    std::istringstream in(os.str());
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
}

}  // namespace

TEST_CASE("the checked-in worked-example scenario reproduces the fixture") {
    const Scenario scenario = load_scenario_file(QSS_SCENARIO_DIR "/worked-example.json");
    const DealerConfig expected = example_config();

    CHECK(scenario.config.modulus == F7);
    CHECK(scenario.config.secrets == expected.secrets);
    CHECK(scenario.config.msp.matrix == example_matrix());
    CHECK(scenario.config.msp.row_owner == std::vector<ParticipantId>{1, 2, 3, 4});
    CHECK(scenario.config.gamma.participants() == example_structure().participants());
    CHECK(scenario.config.gamma.authorized_sets() == example_structure().authorized_sets());
    CHECK(scenario.chosen_set == ParticipantSet{1, 2, 3, 4});
    CHECK(scenario.config.decoy_count == 20);
    CHECK(scenario.config.threshold == 0.11);
    CHECK(scenario.config.seed == 7);
    CHECK(scenario.eve.kind == EveKind::None);
    CHECK(scenario.tamper.empty());
    REQUIRE(scenario.config.forced.has_value());
    CHECK(scenario.config.forced->initial == label7(6, 1, 3));
    CHECK(scenario.config.forced->rho1 == FieldVector(F7, {2, 1, 0, 5}));
    CHECK(scenario.config.forced->rho2 == FieldVector(F7, {4, 3, 5, 1}));
    CHECK(scenario.config.forced->q1 == FieldElement(5, F7));

    // The loaded scenario must replay the published run exactly.
    const RunOutput run = run_protocol(scenario.config, scenario.chosen_set, scenario.eve,
                                       scenario.tamper, scenario.config.seed);
    REQUIRE(run.result.recovered.has_value());
    CHECK((*run.result.recovered)[0] == FieldElement(2, F7));
    CHECK((*run.result.recovered)[1] == FieldElement(4, F7));
    CHECK((*run.result.recovered)[2] == FieldElement(6, F7));
    CHECK(run.result.verified == std::array<bool, 3>{true, true, true});
}

TEST_CASE("the adversary and tamper scenarios load with their directives") {
    const Scenario intercept = load_scenario_file(QSS_SCENARIO_DIR "/intercept-adversary.json");
    CHECK(intercept.eve.kind == EveKind::InterceptResend);
    CHECK_FALSE(intercept.config.forced.has_value());

    const Scenario tampered = load_scenario_file(QSS_SCENARIO_DIR "/tampered-share.json");
    REQUIRE(tampered.tamper.size() == 1);
    CHECK(tampered.tamper[0].participant == 2);
    CHECK(tampered.tamper[0].component == TamperSpec::Component::S);
    CHECK(tampered.tamper[0].delta == 1);
    const RunOutput run = run_protocol(tampered.config, tampered.chosen_set, tampered.eve,
                                       tampered.tamper, tampered.config.seed);
    CHECK(run.result.verified == std::array<bool, 3>{false, true, true});
}

TEST_CASE("omitted scenario fields take their documented defaults") {
    const Scenario scenario = load_scenario(minimal_scenario_json());
    CHECK(scenario.config.decoy_count == 20);
    CHECK(scenario.config.threshold == 0.11);
    CHECK(scenario.config.seed == 0);
    CHECK(scenario.eve.kind == EveKind::None);
    CHECK(scenario.tamper.empty());
    CHECK_FALSE(scenario.config.forced.has_value());
    // Participants are derived from the row owners.
    CHECK(scenario.config.gamma.participants() == ParticipantSet{1, 2, 3, 4});
}

TEST_CASE("scenario parsing rejects malformed documents") {
    CHECK_THROWS_AS(load_scenario_file(QSS_SCENARIO_DIR "/does-not-exist.json"), ScenarioError);
    CHECK_THROWS_AS(load_scenario(ordered_json::array({1, 2})), ScenarioError);

    auto broken = [](auto&& mutate) {
        ordered_json j = minimal_scenario_json();
        mutate(j);
        return j;
    };

    // Non-prime dimension is refused at the modulus boundary.
    CHECK_THROWS_AS(load_scenario(broken([](ordered_json& j) { j["d"] = 6; })), FieldError);
    CHECK_THROWS_AS(load_scenario(broken([](ordered_json& j) { j.erase("secrets"); })),
                    ScenarioError);
    CHECK_THROWS_AS(load_scenario(broken([](ordered_json& j) { j["secrets"] = {2, 4}; })),
                    ScenarioError);
    CHECK_THROWS_AS(load_scenario(broken([](ordered_json& j) { j["secrets"] = {2, 4, 7}; })),
                    ScenarioError);  // out of range for d = 7
    CHECK_THROWS_AS(load_scenario(broken([](ordered_json& j) { j["secrets"] = {2, 4, -1}; })),
                    ScenarioError);
    CHECK_THROWS_AS(
        load_scenario(broken([](ordered_json& j) { j["matrix"] = {{0, 0, 1, 1}, {0, 1}}; })),
        FieldError);  // ragged rows
    CHECK_THROWS_AS(load_scenario(broken([](ordered_json& j) { j["row_owner"] = {1, 2, 3}; })),
                    ScenarioError);
    CHECK_THROWS_AS(load_scenario(broken([](ordered_json& j) { j["row_owner"] = {0, 2, 3, 4}; })),
                    ScenarioError);
    CHECK_THROWS_AS(load_scenario(broken([](ordered_json& j) { j["typo_field"] = 1; })),
                    ScenarioError);
    CHECK_THROWS_AS(load_scenario(broken([](ordered_json& j) { j["eve"] = "mallory"; })),
                    ScenarioError);
    CHECK_THROWS_AS(load_scenario(broken([](ordered_json& j) {
                        j["eve"] = "entangle";
                        j["couple_probability"] = 1.5;
                    })),
                    ScenarioError);
    CHECK_THROWS_AS(load_scenario(broken([](ordered_json& j) { j["threshold"] = 1.0; })),
                    ScenarioError);
    CHECK_THROWS_AS(load_scenario(broken([](ordered_json& j) { j["decoy_count"] = 0; })),
                    ScenarioError);
    CHECK_THROWS_AS(load_scenario(broken([](ordered_json& j) { j["tamper"] = {"P2.s=+0"}; })),
                    ScenarioError);
    CHECK_THROWS_AS(
        load_scenario(broken([](ordered_json& j) { j["forced"] = {{"q5", 1}}; })),
        ScenarioError);
    CHECK_THROWS_AS(
        load_scenario(broken([](ordered_json& j) { j["forced"] = {{"initial", {6, 1}}}; })),
        ScenarioError);
}

TEST_CASE("tamper directives parse and reduce into the field") {
    const TamperSpec a = parse_tamper_spec("P2.s=+1", F7);
    CHECK(a.participant == 2);
    CHECK(a.component == TamperSpec::Component::S);
    CHECK(a.delta == 1);

    const TamperSpec b = parse_tamper_spec("P4.lambda=+3", F7);
    CHECK(b.participant == 4);
    CHECK(b.component == TamperSpec::Component::Lambda);
    CHECK(b.delta == 3);

    CHECK(parse_tamper_spec("P1.t=-2", F7).delta == 5);
    CHECK(parse_tamper_spec("P3.s=9", F7).delta == 2);

    for (const char* bad : {"", "P2.s", "P2.s=", "Q2.s=+1", "P2.u=+1", "P0.s=+1", "P2.s=+7",
                            "P2.s=x", "2.s=+1", "P2.s=+1 "})
        CHECK_THROWS_AS(parse_tamper_spec(bad, F7), ScenarioError);
}

TEST_CASE("adversary names map onto channel models") {
    CHECK(parse_eve("none").kind == EveKind::None);
    CHECK(parse_eve("intercept_resend").kind == EveKind::InterceptResend);
    const EveModel partial = parse_eve("entangle", 0.25);
    CHECK(partial.kind == EveKind::EntangleMeasure);
    CHECK(partial.couple_probability == 0.25);
    CHECK_THROWS_AS(parse_eve("mallory"), ScenarioError);
    CHECK_THROWS_AS(parse_eve("entangle", -0.1), ScenarioError);
}

TEST_CASE("trace records serialize the worked run exactly") {
    const RunOutput run = run_protocol(example_config(), {1, 2, 3, 4}, EveModel::none(), {}, 7);
    const auto lines = trace_lines(run.transcript);
    REQUIRE(lines.size() == 15);  // 7 labels + 6 checks + measurement + verification

    CHECK(lines[0] ==
          R"({"seq":0,"kind":"label","actor":"alice","payload":{"label":[6,1,3]}})");
    CHECK(lines[1] ==
          R"({"seq":1,"kind":"decoy_check","actor":"alice","payload":{"hop":"alice->P1:Q1",)"
          R"("tested":20,"errors":0,"error_rate":0.0,"passed":true}})");
    CHECK(lines[14] ==
          R"({"seq":14,"kind":"verification","actor":"P1","payload":{"recovered":[2,4,6],)"
          R"("verified":[true,true,true]}})");

    // Sequence numbers are strictly increasing and match the line order.
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const ordered_json parsed = ordered_json::parse(lines[i]);
        CHECK(parsed.at("seq") == i);
        CHECK(parsed.count("kind") == 1);
        CHECK(parsed.count("actor") == 1);
        CHECK(parsed.count("payload") == 1);
    }

    const ordered_json measurement = ordered_json::parse(lines[13]);
    CHECK(measurement.at("kind") == "measurement");
    CHECK(measurement.at("payload").at("label") == ordered_json::array({2, 4, 6}));
    CHECK(measurement.at("payload").at("probability").get<double>() ==
          Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("identical runs serialize byte-identically") {
    const Scenario scenario = load_scenario_file(QSS_SCENARIO_DIR "/worked-example.json");
    auto serialize = [&] {
        const RunOutput run = run_protocol(scenario.config, scenario.chosen_set, scenario.eve,
                                           scenario.tamper, 123);
        std::ostringstream os;
        write_trace(os, run.transcript);
        return os.str();
    };
    const std::string first = serialize();
    const std::string second = serialize();
    CHECK(first == second);
    CHECK_FALSE(first.empty());
}

TEST_CASE("an aborted run's trace ends at the failed check") {
    const RunOutput run = run_protocol(example_config(), {1, 2, 3, 4},
                                       EveModel::intercept_resend(), {}, 21);
    REQUIRE(run.result.aborted_at.has_value());
    const auto lines = trace_lines(run.transcript);
    REQUIRE(lines.size() == 2);
    const ordered_json last = ordered_json::parse(lines.back());
    CHECK(last.at("kind") == "decoy_check");
    CHECK(last.at("payload").at("passed") == false);
    CHECK(last.at("payload").at("hop") == "alice->P1:Q1");
}

TEST_CASE("labels format compactly for human-readable output") {
    CHECK(format_label(label7(6, 1, 3)) == "(6,1,3)");
    CHECK(format_label(label7(0, 0, 0)) == "(0,0,0)");
}
