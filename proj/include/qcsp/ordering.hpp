#ifndef QCSP_ORDERING_HPP
#define QCSP_ORDERING_HPP

#include "qcsp/model.hpp"
#include "qcsp/patterns.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qcsp {

enum class AdjointTarget { QbtpAdjoint, BlockQbtp, QmmeAdjoint };

std::string target_name(AdjointTarget t);

/// Existentials keep exactly their preceding universals; universals keep their order.
bool is_block_compatible(const Instance& inst, const Ordering& pi, const Ordering& delta);
/// Existentials keep at least their preceding universals; universals keep their order.
bool is_semi_compatible(const Instance& inst, const Ordering& pi, const Ordering& delta);
/// Variables after `k` under `pi` but not after it under `delta`, sorted by `delta` rank.
std::vector<VarId> dif_set(const Instance& inst, const Ordering& pi, const Ordering& delta, VarId k);

/// Search problem over candidate positions 1..n, one search variable per QCSP
/// variable. Every constraint is max-closed.
struct OrderingProblem {
    enum class Source { SemiCompat, Block, QbtpTriple, QbapTriple, QmmeTriple, ExtendedQmmeTriple };

    /// pos(before) < pos(after)
    struct Precedence {
        VarId before;
        VarId after;
        Source source;
    };
    /// pos(below) < max(pos(a), pos(b))
    struct MaxPrecedence {
        VarId below;
        VarId a;
        VarId b;
        Source source;
    };

    int num_vars = 0;
    std::vector<Precedence> binary;
    std::vector<MaxPrecedence> ternary;

    bool satisfied_by(const std::vector<int>& positions) const;
};

std::string source_name(OrderingProblem::Source s);

OrderingProblem build_ordering_problem(const Instance& inst, AdjointTarget target);

/// Generalized arc consistency followed by taking each maximum; nullopt on a
/// domain wipe-out. Positions are 1-based.
std::optional<std::vector<int>> solve_max_closed(const OrderingProblem& prob);

/// Variables sorted by position, ties broken by prefix rank.
Ordering derive_ordering(const std::vector<int>& positions, const Ordering& pi);

struct AdjointVerification {
    bool compatible = false;
    TripleWitness pattern;
    /// Angle (or extended min-of-max) checks on existential dif pairs.
    std::vector<TripleWitness> angle_checks;
    /// Strict mode: the same checks on pairs with a universal dif member.
    std::vector<TripleWitness> universal_dif_checks;

    bool passed() const;
};

struct AdjointResult {
    enum class Status { Found, None, Defect };
    Status status = Status::None;
    AdjointTarget target = AdjointTarget::QbtpAdjoint;
    Ordering delta;
    AdjointVerification verification;
    OrderingProblem problem;
    std::vector<std::string> warnings;
    /// Set for Status::Defect.
    std::string defect;

    bool found() const { return status == Status::Found; }
};

/// Independent check of every condition the target class places on `delta`.
AdjointVerification verify_adjoint(const Instance& inst, const Ordering& delta, AdjointTarget target, bool strict = false);

/// Builds and solves the ordering problem, then verifies the derived
/// ordering. Expects a quantified arc consistent instance.
AdjointResult find_adjoint(const Instance& inst, AdjointTarget target, bool strict = false);

nlohmann::json to_json(const Instance& inst, const OrderingProblem& prob);
nlohmann::json to_json(const Instance& inst, const AdjointResult& res);
nlohmann::json ordering_json(const Instance& inst, const Ordering& ord);

}  // namespace qcsp

#endif  // QCSP_ORDERING_HPP
