#include "qcsp/pipeline.hpp"

#include <chrono>
#include <iomanip>
#include <sstream>

namespace qcsp {

std::string class_name(ClassTag t) {
    switch (t) {
        case ClassTag::QacEmpty: return "qac-empty";
        case ClassTag::QbtpDirect: return "qbtp-direct";
        case ClassTag::BlockQbtp: return "block-qbtp";
        case ClassTag::QbtpAdjoint: return "qbtp-adjoint";
        case ClassTag::QmmeDirect: return "qmme-direct";
        case ClassTag::QmmeAdjoint: return "qmme-adjoint";
        case ClassTag::Outside: return "outside";
    }
    return "?";
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Sat: return "SAT";
        case Verdict::Unsat: return "UNSAT";
        case Verdict::Unknown: return "UNKNOWN";
    }
    return "?";
}

bool ClassificationReport::has_defect() const {
    for (const auto& s : searches)
        if (s.status == AdjointResult::Status::Defect) return true;
    return false;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t) { return std::chrono::duration<double, std::milli>(Clock::now() - t).count(); }

}  // namespace

ClassificationReport classify(const Instance& inst, const ClassifyOptions& opts) {
    ClassificationReport r;
    auto t0 = Clock::now();
    r.qac = enforce_qac(inst);
    r.timings.qac_ms = ms_since(t0);
    if (r.qac.empty()) {
        r.tag = ClassTag::QacEmpty;
        return r;
    }
    const Instance& reduced = *r.qac.reduced;
    const Ordering& pi = reduced.prefix();

    auto run = [&](AdjointTarget target) {
        auto t = Clock::now();
        r.searches.push_back(find_adjoint(reduced, target, opts.strict));
        r.timings.adjoint_ms += ms_since(t);
        if (!r.searches.back().found()) return false;
        r.accepted = r.searches.size() - 1;
        return true;
    };

    t0 = Clock::now();
    TripleWitness qbtp = qbtp_holds(reduced, pi);
    r.timings.patterns_ms += ms_since(t0);
    if (qbtp.holds) {
        r.tag = ClassTag::QbtpDirect;
        return r;
    }
    r.qbtp_witness = qbtp;
    if (run(AdjointTarget::BlockQbtp)) {
        r.tag = ClassTag::BlockQbtp;
        return r;
    }
    if (run(AdjointTarget::QbtpAdjoint)) {
        r.tag = ClassTag::QbtpAdjoint;
        return r;
    }
    t0 = Clock::now();
    TripleWitness qmme = qmme_holds(reduced, pi);
    r.timings.patterns_ms += ms_since(t0);
    if (qmme.holds) {
        r.tag = ClassTag::QmmeDirect;
        return r;
    }
    r.qmme_witness = qmme;
    r.tag = run(AdjointTarget::QmmeAdjoint) ? ClassTag::QmmeAdjoint : ClassTag::Outside;
    return r;
}

SolveResult solve(const Instance& inst, const SolveOptions& opts) {
    SolveResult out;
    out.report = classify(inst, ClassifyOptions{opts.strict});
    const ClassificationReport& rep = out.report;
    switch (rep.tag) {
        case ClassTag::QacEmpty: out.verdict = Verdict::Unsat; return out;
        case ClassTag::Outside: out.verdict = Verdict::Unknown; return out;
        default: out.verdict = Verdict::Sat; break;
    }

    const Instance& reduced = *rep.qac.reduced;
    const Ordering& pi = reduced.prefix();
    try {
        StrategyTree tree;
        switch (rep.tag) {
            case ClassTag::QbtpDirect: tree = build_solution(reduced, pi, ValueRule::Smallest, opts.node_limit); break;
            case ClassTag::QmmeDirect: tree = build_solution(reduced, pi, ValueRule::MinOfMax, opts.node_limit); break;
            case ClassTag::BlockQbtp: {
                const Ordering& delta = rep.adjoint()->delta;
                tree = reorder_blocks(build_solution(reduced, delta, ValueRule::Smallest, opts.node_limit), reduced, delta, pi);
                break;
            }
            default: {
                const Ordering& delta = rep.adjoint()->delta;
                const ValueRule rule = rep.tag == ClassTag::QmmeAdjoint ? ValueRule::MinOfMax : ValueRule::Smallest;
                StrategyTree s = build_compatible_solution(reduced, pi, delta, rule, opts.node_limit);
                ShiftResult shifted = shift_levels(s, reduced, pi, delta);
                tree = reorder_blocks(shifted.tree, reduced, shifted.omega, pi);
                break;
            }
        }
        tree = translate_strategy(tree, reduced, inst);
        StrategyCheck check = verify_strategy(inst, tree, inst.prefix());
        if (!check.valid())
            throw ConstructionDefect("constructed strategy for class " + class_name(rep.tag) + " failed verification: " + check.message);
        out.strategy = std::move(tree);
    } catch (const StrategySizeError& e) {
        out.note = std::string("strategy omitted: ") + e.what();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

nlohmann::json qac_json(const Instance& inst, const QacResult& q) {
    nlohmann::json j;
    j["outcome"] = q.empty() ? "EMPTY" : q.changed() ? "pruned-to" : "consistent";
    j["removals"] = q.trace.removals.size();
    j["trace"] = to_json(inst, q.trace);
    if (q.reduced && q.changed()) {
        nlohmann::json domains = nlohmann::json::object();
        for (VarId v = 0; v < static_cast<VarId>(q.reduced->num_vars()); ++v) {
            nlohmann::json vals = nlohmann::json::array();
            for (std::size_t a = 0; a < q.reduced->domain_size(v); ++a) vals.push_back(q.reduced->value_name(v, static_cast<ValueId>(a)));
            domains[q.reduced->name(v)] = vals;
        }
        j["domains"] = domains;
    }
    return j;
}

std::string value_text(const Instance& inst, VarId v, const std::optional<ValueId>& a) {
    return a ? inst.value_name(v, *a) : std::string("-");
}

std::string triple_text(const Instance& inst, const TripleWitness& w) {
    std::ostringstream os;
    os << "(" << inst.name(w.i) << ", " << inst.name(w.j) << ", " << inst.name(w.k) << ")";
    if (!w.holds) {
        os << " alpha=" << value_text(inst, w.i, w.alpha) << " beta=" << value_text(inst, w.j, w.beta);
        if (w.empty_support) {
            os << " empty support";
        } else {
            os << " gamma=" << value_text(inst, w.k, w.gamma);
            if (w.theta) os << " theta=" << value_text(inst, w.k, w.theta);
        }
    }
    return os.str();
}

std::string delta_text(const Instance& inst, const Ordering& delta) {
    std::ostringstream os;
    for (int r = 0; r < static_cast<int>(delta.size()); ++r) os << (r ? " " : "") << inst.name(delta.at(r)) << "=" << r + 1;
    return os.str();
}

}  // namespace

nlohmann::json to_json(const Instance& inst, const ClassificationReport& r, bool timings) {
    nlohmann::json j;
    j["qac"] = qac_json(inst, r.qac);
    j["class"] = class_name(r.tag);
    if (r.qac.reduced) {
        const Instance& reduced = *r.qac.reduced;
        if (r.qbtp_witness) j["qbtp_under_prefix"] = to_json(reduced, reduced.prefix(), *r.qbtp_witness);
        if (r.qmme_witness) j["qmme_under_prefix"] = to_json(reduced, reduced.prefix(), *r.qmme_witness);
        nlohmann::json searches = nlohmann::json::array();
        for (const auto& s : r.searches) searches.push_back(to_json(reduced, s));
        j["searches"] = searches;
        if (const AdjointResult* a = r.adjoint()) j["delta"] = ordering_json(reduced, a->delta);
    }
    if (r.has_defect()) j["defect"] = true;
    if (timings) j["timings_ms"] = {{"qac", r.timings.qac_ms}, {"patterns", r.timings.patterns_ms}, {"adjoint", r.timings.adjoint_ms}};
    return j;
}

std::string format_report(const Instance& inst, const ClassificationReport& r, bool timings) {
    std::ostringstream os;
    const auto& q = r.qac;
    if (q.empty()) {
        os << "qac: EMPTY";
        if (q.trace.empty_at) os << " at " << inst.name(*q.trace.empty_at);
        os << " after " << q.trace.removals.size() << " removals\n";
    } else if (!q.changed()) {
        os << "qac: consistent (0 removals)\n";
    } else {
        os << "qac: pruned-to (" << q.trace.removals.size() << " removals)\n";
    }
    for (const auto& rm : q.trace.removals)
        os << "  removed " << inst.name(rm.var) << "=" << rm.value << " by (" << inst.name(rm.because_first) << ", "
           << inst.name(rm.because_second) << ")\n";

    if (q.reduced) {
        const Instance& reduced = *q.reduced;
        if (r.qbtp_witness)
            os << "qbtp under prefix: fails at " << triple_text(reduced, *r.qbtp_witness) << "\n";
        else
            os << "qbtp under prefix: holds\n";
        if (r.qmme_witness) os << "qmme under prefix: fails at " << triple_text(reduced, *r.qmme_witness) << "\n";
        else if (r.tag == ClassTag::QmmeDirect) os << "qmme under prefix: holds\n";
        for (const auto& s : r.searches) {
            os << "search " << target_name(s.target) << (s.target == AdjointTarget::QmmeAdjoint ? " [extension: qmme-search]" : "")
               << ": " << (s.found() ? "found" : s.status == AdjointResult::Status::Defect ? "DEFECT" : "none") << "\n";
            if (s.status == AdjointResult::Status::Defect) os << "  defect: " << s.defect << "\n";
            if (s.status == AdjointResult::Status::None) continue;
            const auto& v = s.verification;
            os << "  delta: " << delta_text(reduced, s.delta) << "\n";
            os << "  compatible: " << (v.compatible ? "yes" : "no") << "\n";
            os << "  " << pattern_name(v.pattern.pattern) << " under delta: " << (v.pattern.holds ? "holds" : "fails at " + triple_text(reduced, v.pattern))
               << "\n";
            for (const auto& w : v.angle_checks)
                os << "  " << pattern_name(w.pattern) << " " << triple_text(reduced, w) << ": " << (w.holds ? "holds" : "fails") << "\n";
            for (const auto& w : v.universal_dif_checks)
                os << "  strict " << pattern_name(w.pattern) << " " << triple_text(reduced, w) << ": " << (w.holds ? "holds" : "fails") << "\n";
            for (const auto& warn : s.warnings) os << "  warning: " << warn << "\n";
        }
    }
    os << "class: " << class_name(r.tag) << "\n";
    if (timings) {
        os << std::fixed << std::setprecision(3) << "timings: qac " << r.timings.qac_ms << " ms, patterns " << r.timings.patterns_ms
           << " ms, adjoint " << r.timings.adjoint_ms << " ms\n";
    }
    return os.str();
}

nlohmann::json to_json(const Instance& inst, const SolveResult& r) {
    nlohmann::json j;
    j["verdict"] = verdict_name(r.verdict);
    j["class"] = class_name(r.report.tag);
    if (r.strategy) j["strategy"] = to_json(inst, *r.strategy);
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

}  // namespace qcsp
