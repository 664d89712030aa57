#ifndef QCSP_ORACLE_HPP
#define QCSP_ORACLE_HPP

// Brute-force reference procedures. Nothing here calls into the pattern or
// ordering code; only the instance model and the strategy tree type are shared.

#include "qcsp/model.hpp"
#include "qcsp/ordering.hpp"
#include "qcsp/strategy.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qcsp {

struct OracleBudget {
    std::uint64_t max_nodes = 50'000'000;
    std::uint64_t max_permutations = 10'000'000;
    /// Zero disables the wall-clock cap.
    std::chrono::milliseconds time_cap{0};
};

enum class OracleVerdict { Sat, Unsat, Exhausted };

std::string verdict_name(OracleVerdict v);

/// Game-tree evaluation in prefix order.
OracleVerdict brute_force_satisfiable(const Instance& inst, const OracleBudget& budget = {});

struct OracleSolution {
    OracleVerdict verdict = OracleVerdict::Exhausted;
    /// Set iff verdict is Sat. Levels follow the prefix; smallest winning values.
    std::optional<StrategyTree> tree;
};

OracleSolution brute_force_solution(const Instance& inst, const OracleBudget& budget = {},
                                    std::size_t node_limit = kDefaultNodeLimit);

/// Literal check of every condition a target class places on a candidate
/// ordering. Triple verdicts are tabulated once per instance.
class AdjointConditions {
public:
    AdjointConditions(const Instance& inst, AdjointTarget target);

    bool compatible(const Ordering& delta) const;
    bool pattern_holds(const Ordering& delta) const;
    bool angles_hold(const Ordering& delta) const;
    bool holds(const Ordering& delta) const { return compatible(delta) && pattern_holds(delta) && angles_hold(delta); }

private:
    std::size_t at(VarId i, VarId j, VarId k) const;

    const Instance* inst_;
    AdjointTarget target_;
    std::size_t n_;
    // Indexed [i][j][k]: the two-earlier-variable pattern with k last.
    std::vector<char> triangle_;
    std::vector<char> angle_;
};

struct AdjointSearch {
    enum class Status { Found, None, Exhausted };
    Status status = Status::None;
    std::optional<Ordering> delta;
    std::uint64_t permutations = 0;

    bool found() const { return status == Status::Found; }
};

/// All orderings in lexicographic prefix-rank order; the first one passing
/// every condition of `target`.
AdjointSearch exhaustive_adjoint_search(const Instance& inst, AdjointTarget target, const OracleBudget& budget = {});

}  // namespace qcsp

#endif  // QCSP_ORACLE_HPP
