#ifndef QCSP_CONSISTENCY_HPP
#define QCSP_CONSISTENCY_HPP

#include "qcsp/model.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qcsp {

struct Removal {
    VarId var;
    std::string value;
    VarId because_first;
    VarId because_second;
};

/// Removals in the order they happened. `empty` marks a wipe-out: the last
/// removal either emptied an existential domain or hit a universal value.
struct PruneTrace {
    std::vector<Removal> removals;
    bool empty = false;
    std::optional<VarId> empty_at;
};

struct QacResult {
    PruneTrace trace;
    /// Set unless the instance was found empty.
    std::optional<Instance> reduced;

    bool empty() const { return trace.empty; }
    bool changed() const { return !trace.removals.empty(); }
};

/// Quantified arc consistency over all constrained pairs, ordered by the
/// prefix. Only existential domains shrink; a universal value that would
/// have to go makes the whole instance empty.
QacResult enforce_qac(const Instance& inst);

struct ConsistencyWitness {
    enum class Kind { Pair, Tuple };
    Kind kind = Kind::Pair;
    /// Pair: the scope in prefix order. Tuple: the k variables in prefix order.
    std::vector<VarId> vars;
    /// Tuple: values of the first k-1 variables. Pair: empty.
    std::vector<ValueId> assignment;
    /// Pair: the variable holding the unsupported value. Tuple: the last variable.
    VarId target = -1;
    /// Pair: the unsupported value. Tuple: the refused extension for a
    /// universal last variable, nullopt when no extension exists at all.
    std::optional<ValueId> value;
    /// Value of the other pair variable that refuses `value` (universal cases).
    std::optional<ValueId> blocker;
};

/// First pair violating quantified arc consistency, scanning pairs by prefix rank.
std::optional<ConsistencyWitness> find_qac_violation(const Instance& inst);
inline bool is_qac(const Instance& inst) { return !find_qac_violation(inst).has_value(); }

struct DirectionalResult {
    enum class Verdict { Holds, Violated, CapExceeded };
    Verdict verdict = Verdict::Holds;
    std::optional<ConsistencyWitness> witness;
    std::uint64_t work = 0;

    bool holds() const { return verdict == Verdict::Holds; }
};

/// Directional quantified k-consistency along the instance prefix. `work_cap`
/// bounds the number of partial assignments visited.
DirectionalResult check_directional_k_consistency(const Instance& inst, int k,
                                                  std::uint64_t work_cap = 50'000'000);

nlohmann::json to_json(const Instance& inst, const PruneTrace& trace);
nlohmann::json to_json(const Instance& inst, const ConsistencyWitness& w);

}  // namespace qcsp

#endif  // QCSP_CONSISTENCY_HPP
