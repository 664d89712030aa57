#ifndef QCSP_PIPELINE_HPP
#define QCSP_PIPELINE_HPP

#include "qcsp/consistency.hpp"
#include "qcsp/model.hpp"
#include "qcsp/ordering.hpp"
#include "qcsp/patterns.hpp"
#include "qcsp/strategy.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qcsp {

enum class ClassTag { QacEmpty, QbtpDirect, BlockQbtp, QbtpAdjoint, QmmeDirect, QmmeAdjoint, Outside };

std::string class_name(ClassTag t);

struct ClassifyOptions {
    /// Also check angle conditions on pairs with a universal dif member.
    bool strict = false;
};

struct ClassificationReport {
    QacResult qac;
    ClassTag tag = ClassTag::Outside;
    /// First broken triple under the prefix, on the reduced instance.
    std::optional<TripleWitness> qbtp_witness;
    std::optional<TripleWitness> qmme_witness;
    /// Every adjoint search that ran, in pathway order.
    std::vector<AdjointResult> searches;
    /// Index into `searches` of the accepted one.
    std::optional<std::size_t> accepted;

    struct Timings {
        double qac_ms = 0;
        double patterns_ms = 0;
        double adjoint_ms = 0;
    } timings;

    const AdjointResult* adjoint() const { return accepted ? &searches[*accepted] : nullptr; }
    bool has_defect() const;
};

ClassificationReport classify(const Instance& inst, const ClassifyOptions& opts = {});

enum class Verdict { Sat, Unsat, Unknown };

std::string verdict_name(Verdict v);

struct SolveOptions {
    bool strict = false;
    std::size_t node_limit = kDefaultNodeLimit;
};

struct SolveResult {
    Verdict verdict = Verdict::Unknown;
    ClassificationReport report;
    /// Expressed on the input instance, levels in prefix order. Absent for
    /// UNSAT, UNKNOWN, and SAT past the size guard.
    std::optional<StrategyTree> strategy;
    std::string note;
};

/// Every returned strategy has passed verify_strategy on the input instance
/// under its prefix; a failure there throws ConstructionDefect.
SolveResult solve(const Instance& inst, const SolveOptions& opts = {});

nlohmann::json to_json(const Instance& inst, const ClassificationReport& r, bool timings = false);
std::string format_report(const Instance& inst, const ClassificationReport& r, bool timings = false);

nlohmann::json to_json(const Instance& inst, const SolveResult& r);

}  // namespace qcsp

#endif  // QCSP_PIPELINE_HPP
