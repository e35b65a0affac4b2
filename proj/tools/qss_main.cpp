// qss — command-line front end for the verifiable multi-secret quantum
// secret sharing simulator.
//
// Subcommands:
//   run-example    replay the built-in worked four-party run over F_7
//   run            execute a scenario file and emit its line-delimited trace
//   verify-labels  sweep the symbolic label update rule against dense evolution
//   audit-msp      validate a scenario's scheme and audit its privacy
//
// Exit codes: 0 ok, 1 worked-example mismatch, 2 verification failure,
// 3 decoy-check abort, 64 usage/configuration error, 65 resource bound.

#include <array>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qss/scenario.hpp"

namespace {

using namespace qss;

constexpr int kExitOk = 0;
constexpr int kExitExampleMismatch = 1;
constexpr int kExitVerificationFailed = 2;
constexpr int kExitDecoyAbort = 3;
constexpr int kExitUsage = 64;
constexpr int kExitResourceBound = 65;

// ============================================================================
// Logging (QSS_LOG = quiet | info | debug; default info; always stderr)
// ============================================================================

int log_level() {
    static const int level = [] {
        const char* env = std::getenv("QSS_LOG");
        if (env == nullptr) return 1;
        const std::string v = env;
        if (v == "quiet") return 0;
        if (v == "info") return 1;
        if (v == "debug") return 2;
        std::cerr << "warning: unknown QSS_LOG level '" << v << "', using info\n";
        return 1;
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << msg << '\n';
}

void log_debug(const std::string& msg) {
    if (log_level() >= 2) std::cerr << msg << '\n';
}

void log_run_details(const RunOutput& run) {
    if (log_level() < 2) return;
    for (const auto& event : run.transcript.events)
        if (const auto* check = std::get_if<DecoyCheckEvent>(&event)) {
            std::ostringstream os;
            os << "decoy check " << check->hop << ": " << check->outcome.errors << "/"
               << check->outcome.tested << " errors, "
               << (check->outcome.passed ? "passed" : "failed");
            log_debug(os.str());
        }
}

std::string format_set(const ParticipantSet& set) {
    std::string out = "{";
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(set[i]);
    }
    return out + "}";
}

// ============================================================================
// run-example — built-in worked run with pinned dealer randomness
// ============================================================================

DealerConfig worked_config(std::uint32_t dim) {
    const PrimeModulus d(dim);
    ForcedValues forced;
    forced.initial = GhzLabel{FieldElement(6, d), FieldElement(1, d), FieldElement(3, d)};
    forced.rho1 = FieldVector(d, {2, 1, 0, 5});
    forced.rho2 = FieldVector(d, {4, 3, 5, 1});
    forced.q1 = FieldElement(5, d);
    return DealerConfig{
        d,
        {FieldElement(2, d), FieldElement(4, d), FieldElement(6, d)},
        Msp{FieldMatrix::from_rows(d, {{0, 0, 1, 1}, {0, 1, 0, 6}, {2, 1, 1, 0}, {3, 1, 2, 1}}),
            {1, 2, 3, 4}},
        AccessStructure{{1, 2, 3, 4}, {{1, 2, 3, 4}, {1, 2, 3}, {1, 3, 4}, {1, 2, 4}, {2, 3, 4}}},
        20,
        0.11,
        7,
        forced};
}

int cmd_run_example(std::uint32_t dim, const std::vector<std::string>& tamper_texts) {
    const DealerConfig cfg = worked_config(dim);
    TamperList tampers;
    for (const auto& text : tamper_texts)
        tampers.push_back(parse_tamper_spec(text, cfg.modulus));

    const RunOutput run = run_protocol(cfg, {1, 2, 3, 4}, EveModel::none(), tampers, cfg.seed);
    log_run_details(run);

    std::vector<GhzLabel> chain;
    for (const auto& event : run.transcript.events)
        if (const auto* e = std::get_if<LabelEvent>(&event)) {
            std::cout << "label " << e->actor << " "
                      << (e->label ? format_label(*e->label) : "(collapsed)") << "\n";
            if (e->label) chain.push_back(*e->label);
        }

    if (run.result.aborted_at) {
        std::cout << "aborted at " << *run.result.aborted_at << "\n";
        return kExitDecoyAbort;
    }
    const auto& recovered = *run.result.recovered;
    std::cout << "recovered (" << recovered[0].value() << "," << recovered[1].value() << ","
              << recovered[2].value() << ")\n";
    std::cout << "verified s1=" << (run.result.verified[0] ? "yes" : "no")
              << " s2=" << (run.result.verified[1] ? "yes" : "no")
              << " s3=" << (run.result.verified[2] ? "yes" : "no") << "\n";

    if (!(run.result.verified[0] && run.result.verified[1] && run.result.verified[2]))
        return kExitVerificationFailed;

    // Golden expectation for the untampered default run.
    const std::array<std::array<std::uint32_t, 3>, 7> golden{
        {{6, 1, 3}, {4, 6, 1}, {6, 5, 0}, {5, 6, 1}, {5, 6, 1}, {6, 5, 0}, {2, 4, 6}}};
    bool matches = chain.size() == golden.size();
    for (std::size_t i = 0; matches && i < golden.size(); ++i)
        matches = chain[i].phase.value() == golden[i][0] &&
                  chain[i].shift2.value() == golden[i][1] &&
                  chain[i].shift3.value() == golden[i][2];
    matches = matches && recovered[0].value() == 2 && recovered[1].value() == 4 &&
              recovered[2].value() == 6;
    if (!matches) {
        std::cerr << "error: transcript deviates from the worked example\n";
        return kExitExampleMismatch;
    }
    return kExitOk;
}

// ============================================================================
// run — scenario execution with trace emission
// ============================================================================

int cmd_run(const std::string& scenario_path, std::optional<std::uint64_t> seed_override,
            const std::string& out_path, const std::vector<std::string>& tamper_texts,
            const std::string& eve_override) {
    Scenario scenario = load_scenario_file(scenario_path);
    if (!eve_override.empty()) {
        EveModel next = parse_eve(eve_override);
        if (next.kind == EveKind::EntangleMeasure &&
            scenario.eve.kind == EveKind::EntangleMeasure)
            next.couple_probability = scenario.eve.couple_probability;
        scenario.eve = next;
    }
    for (const auto& text : tamper_texts)
        scenario.tamper.push_back(parse_tamper_spec(text, scenario.config.modulus));
    const std::uint64_t seed = seed_override.value_or(scenario.config.seed);

    log_info("scenario " + scenario_path + ": d=" +
             std::to_string(scenario.config.modulus.value()) + ", chosen set " +
             format_set(scenario.chosen_set) + ", seed " + std::to_string(seed));

    const RunOutput run = run_protocol(scenario.config, scenario.chosen_set, scenario.eve,
                                       scenario.tamper, seed);
    log_run_details(run);

    if (out_path.empty()) {
        write_trace(std::cout, run.transcript);
    } else {
        std::ofstream os(out_path);
        if (!os) {
            std::cerr << "error: cannot write trace to '" << out_path << "'\n";
            return kExitUsage;
        }
        write_trace(os, run.transcript);
    }

    if (run.result.aborted_at) {
        log_info("aborted at " + *run.result.aborted_at);
        return kExitDecoyAbort;
    }
    const bool all_verified =
        run.result.verified[0] && run.result.verified[1] && run.result.verified[2];
    log_info(all_verified ? "recovered and verified all three secrets"
                          : "recovery finished but verification failed");
    return all_verified ? kExitOk : kExitVerificationFailed;
}

// ============================================================================
// verify-labels — symbolic update rule vs dense statevector evolution
// ============================================================================

std::vector<std::uint32_t> parse_dim_list(const std::string& text) {
    std::vector<std::uint32_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(static_cast<std::uint32_t>(std::stoul(item)));
    if (out.empty()) throw ScenarioError("dimension list is empty");
    return out;
}

int cmd_verify_labels(const std::string& dim_list, const std::string& mode, std::size_t trials,
                      double tol, std::uint64_t seed) {
    const bool exhaustive = mode == "exhaustive";
    Rng rng(seed);
    double worst = 0.0;
    for (std::uint32_t dim : parse_dim_list(dim_list)) {
        const PrimeModulus d(dim);
        const SweepResult result = label_rule_sweep(d, exhaustive, trials, rng);
        std::cout << "d=" << dim << " mode=" << mode << " cases=" << result.cases
                  << " max_deviation=" << std::scientific << std::setprecision(3)
                  << result.max_deviation << std::defaultfloat << "\n";
        worst = std::max(worst, result.max_deviation);
    }
    std::cout << "overall max_deviation=" << std::scientific << std::setprecision(3) << worst
              << std::defaultfloat << " tolerance=" << tol << "\n";
    return worst < tol ? kExitOk : kExitVerificationFailed;
}

// ============================================================================
// audit-msp — scheme validation and privacy audit
// ============================================================================

int cmd_audit_msp(const std::string& scenario_path) {
    const Scenario scenario = load_scenario_file(scenario_path);
    const Msp& msp = scenario.config.msp;
    const AccessStructure& gamma = scenario.config.gamma;

    const ValidationReport report = validate_msp(msp, gamma);
    bool valid = report.valid;
    for (const auto& check : report.authorized)
        std::cout << "authorized " << format_set(check.members)
                  << ": target in span: " << (check.target_in_span ? "yes" : "NO") << "\n";
    for (const auto& check : report.maximal_unauthorized) {
        const bool privacy = privacy_audit(msp, gamma, check.members);
        if (!privacy) valid = false;
        std::cout << "maximal unauthorized " << format_set(check.members)
                  << ": excluded: " << (check.target_in_span ? "NO" : "yes")
                  << ", sweeping vector: " << (check.sweeping_found ? "yes" : "NO")
                  << ", share distribution secret-independent: " << (privacy ? "yes" : "NO")
                  << "\n";
    }
    std::cout << (valid ? "scheme valid" : "scheme INVALID") << "\n";
    return valid ? kExitOk : kExitVerificationFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic simulator for verifiable multi-secret quantum secret sharing"};
    app.require_subcommand(1);

    auto* example =
        app.add_subcommand("run-example", "replay the built-in worked four-party run");
    std::uint32_t example_d = 7;
    std::vector<std::string> example_tampers;
    example->add_option("--d", example_d, "field dimension override (default 7)");
    example->add_option("--tamper", example_tampers,
                        "dishonest directive P<id>.<s|t|lambda>=<delta>; repeatable");

    auto* run = app.add_subcommand("run", "execute a scenario file and emit its trace");
    std::string run_scenario;
    std::uint64_t run_seed = 0;
    std::string run_out;
    std::vector<std::string> run_tampers;
    std::string run_eve;
    run->add_option("--scenario", run_scenario, "path to a scenario JSON file")->required();
    auto* run_seed_opt = run->add_option("--seed", run_seed, "override the scenario seed");
    run->add_option("--out", run_out, "write the trace here instead of standard output");
    run->add_option("--tamper", run_tampers, "additional dishonest directive; repeatable");
    run->add_option("--eve", run_eve, "override the scenario adversary")
        ->check(CLI::IsMember({"none", "intercept_resend", "entangle"}));

    auto* verify = app.add_subcommand(
        "verify-labels", "sweep the symbolic label update rule against dense evolution");
    std::string verify_dims = "3,5";
    std::string verify_mode = "exhaustive";
    std::size_t verify_trials = 1000;
    double verify_tol = 1e-9;
    std::uint64_t verify_seed = 0;
    verify->add_option("--d", verify_dims, "comma-separated prime dimensions (default 3,5)");
    verify->add_option("--mode", verify_mode, "exhaustive or sample (default exhaustive)")
        ->check(CLI::IsMember({"exhaustive", "sample"}));
    verify->add_option("--trials", verify_trials,
                       "random cases per dimension in sample mode (default 1000)");
    verify->add_option("--tol", verify_tol, "maximum allowed deviation (default 1e-9)");
    verify->add_option("--seed", verify_seed, "sampling seed (default 0)");

    auto* audit = app.add_subcommand("audit-msp",
                                     "validate a scenario's scheme and audit its privacy");
    std::string audit_scenario;
    audit->add_option("--scenario", audit_scenario, "path to a scenario JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (example->parsed()) return cmd_run_example(example_d, example_tampers);
        if (run->parsed())
            return cmd_run(run_scenario,
                           run_seed_opt->count() ? std::optional<std::uint64_t>(run_seed)
                                                 : std::nullopt,
                           run_out, run_tampers, run_eve);
        if (verify->parsed())
            return cmd_verify_labels(verify_dims, verify_mode, verify_trials, verify_tol,
                                     verify_seed);
        if (audit->parsed()) return cmd_audit_msp(audit_scenario);
    } catch (const EnumerationBoundExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitResourceBound;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
