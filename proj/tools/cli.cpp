#include "cli.hpp"

#include "qcsp/generate.hpp"
#include "qcsp/model.hpp"
#include "qcsp/oracle.hpp"
#include "qcsp/pipeline.hpp"
#include "qcsp/strategy.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <optional>

namespace qcsp::cli {

namespace {

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Instance read_instance(const std::string& path) {
    try {
        return load_instance(path);
    } catch (const ParseError& e) {
        throw InputError(path + ":" + std::to_string(e.line()) + ": " + e.what());
    } catch (const std::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write " + path);
    f << text;
}

std::string scenario_text(const Instance& inst, const Scenario& sc) {
    std::string s;
    for (auto [v, a] : sc) s += (s.empty() ? "" : " ") + inst.name(v) + "=" + inst.value_name(v, a);
    return s;
}

int cmd_check(const std::string& file, bool json, bool strict, bool timings, std::ostream& out) {
    Instance inst = read_instance(file);
    ClassificationReport r = classify(inst, ClassifyOptions{strict});
    if (json)
        out << to_json(inst, r, timings).dump(2) << "\n";
    else
        out << format_report(inst, r, timings);
    return 0;
}

int cmd_solve(const std::string& file, const std::string& strategy_out, bool json, bool strict_exit, std::ostream& out) {
    Instance inst = read_instance(file);
    SolveResult r = solve(inst);
    if (!strategy_out.empty() && r.strategy) write_file(strategy_out, to_json(inst, *r.strategy).dump(2) + "\n");
    if (json) {
        out << to_json(inst, r).dump(2) << "\n";
    } else {
        out << verdict_name(r.verdict) << "\n";
        out << "class: " << class_name(r.report.tag) << "\n";
        if (r.strategy) out << "strategy: " << r.strategy->leaf_count() << " scenarios, " << r.strategy->size() - 1 << " nodes\n";
        if (!r.note.empty()) out << "note: " << r.note << "\n";
    }
    if (!strict_exit) return 0;
    switch (r.verdict) {
        case Verdict::Sat: return 0;
        case Verdict::Unsat: return 1;
        case Verdict::Unknown: return 2;
    }
    return 2;
}

int cmd_verify(const std::string& file, const std::string& strategy_file, std::ostream& out) {
    Instance inst = read_instance(file);
    std::ifstream f(strategy_file);
    if (!f) throw InputError("cannot open " + strategy_file);
    StrategyTree tree;
    try {
        tree = strategy_from_json(inst, nlohmann::json::parse(f));
    } catch (const std::exception& e) {
        out << "INVALID\nmalformed strategy: " << e.what() << "\n";
        return 1;
    }
    StrategyCheck c = verify_strategy(inst, tree, inst.prefix());
    if (c.valid()) {
        out << "VALID\n";
        return 0;
    }
    out << "INVALID\n" << c.message << "\n";
    if (c.scenario) out << "scenario: " << scenario_text(inst, *c.scenario) << "\n";
    return 1;
}

int cmd_oracle(const std::string& file, std::uint64_t max_nodes, long max_ms, std::ostream& out) {
    Instance inst = read_instance(file);
    OracleBudget budget;
    budget.max_nodes = max_nodes;
    budget.time_cap = std::chrono::milliseconds(max_ms);
    out << verdict_name(brute_force_satisfiable(inst, budget)) << "\n";
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Binary QCSP classification, solving and verification", "qcsp"};
    app.require_subcommand(1);

    std::string file;
    bool json = false;
    bool strict = false;
    bool timings = false;
    auto* check = app.add_subcommand("check", "Classify an instance and print the report");
    check->add_option("file", file, "Instance file")->required();
    check->add_flag("--json", json, "JSON report");
    check->add_flag("--strict", strict, "Also check angle conditions on universal dif members");
    check->add_flag("--timings", timings, "Include timings (output is no longer reproducible)");

    std::string strategy_out;
    bool strict_exit = false;
    auto* solve_cmd = app.add_subcommand("solve", "Decide satisfiability and build a strategy");
    solve_cmd->add_option("file", file, "Instance file")->required();
    solve_cmd->add_option("--strategy", strategy_out, "Write the strategy as JSON");
    solve_cmd->add_flag("--json", json, "JSON output");
    solve_cmd->add_flag("--strict-exit", strict_exit, "Exit 0/1/2 for SAT/UNSAT/UNKNOWN");

    std::string strategy_in;
    auto* verify = app.add_subcommand("verify", "Check a strategy against an instance");
    verify->add_option("file", file, "Instance file")->required();
    verify->add_option("--strategy", strategy_in, "Strategy JSON")->required();

    std::uint64_t max_nodes = OracleBudget{}.max_nodes;
    long max_ms = 0;
    auto* oracle = app.add_subcommand("oracle", "Brute-force satisfiability");
    oracle->add_option("file", file, "Instance file")->required();
    oracle->add_option("--max-nodes", max_nodes, "Node budget")->capture_default_str();
    oracle->add_option("--max-ms", max_ms, "Wall-clock budget in ms, 0 for none")->capture_default_str();

    GenParams gp;
    std::string ensure;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen", "Generate a random instance");
    gen->add_option("--vars", gp.n, "Number of variables")->required();
    gen->add_option("--dom", gp.d, "Domain size")->required();
    gen->add_option("--pattern", gp.pattern, "Quantifier letters in prefix order, e.g. EAE")->required();
    gen->add_option("--density", gp.density, "Constraint probability per pair")->capture_default_str();
    gen->add_option("--tuple-density", gp.tuple_density, "Tuple probability")->capture_default_str();
    gen->add_option("--structured", gp.structured, "Fraction of structured relations")->capture_default_str();
    bool no_forall_pairs = false;
    gen->add_flag("--no-forall-pairs", no_forall_pairs, "Never constrain two universals");
    gen->add_option("--seed", gp.seed, "Random seed")->capture_default_str();
    gen->add_option("--ensure", ensure, "Resample until the class holds under the prefix")->check(CLI::IsMember({"qbtp", "qmme"}));
    gen->add_option("--max-attempts", gp.max_attempts, "Resampling budget per variable")->capture_default_str();
    gen->add_option("-o,--output", gen_out, "Output file (default stdout)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*check) return cmd_check(file, json, strict, timings, out);
        if (*solve_cmd) return cmd_solve(file, strategy_out, json, strict_exit, out);
        if (*verify) return cmd_verify(file, strategy_in, out);
        if (*oracle) return cmd_oracle(file, max_nodes, max_ms, out);
        if (*gen) {
            gp.forall_pairs = !no_forall_pairs;
            if (!ensure.empty()) gp.ensure = ensure == "qbtp" ? EnsureClass::Qbtp : EnsureClass::Qmme;
            std::string text = serialize_instance(generate_instance(gp));
            if (gen_out.empty())
                out << text;
            else
                write_file(gen_out, text);
            return 0;
        }
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const GenerationError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace qcsp::cli
