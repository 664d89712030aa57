#ifndef QCSP_PATTERNS_HPP
#define QCSP_PATTERNS_HPP

#include "qcsp/model.hpp"

#include "json.hpp"

#include <optional>
#include <string>

namespace qcsp {

enum class Pattern { Qbtp, Qbap, Qmme, ExtendedQmme };

std::string pattern_name(Pattern p);

/// Outcome of a pattern check on one triple (or the first failing triple of a
/// whole instance). When `holds` is false the values replay the violation:
/// for the triangle/angle patterns gamma is in R_ik(alpha) but not R_jk(beta)
/// and theta is in R_jk(beta) but not R_ik(alpha); for the min-of-max patterns
/// gamma is the min-of-max candidate (absent when a support set is empty) and
/// theta is unused.
struct TripleWitness {
    Pattern pattern = Pattern::Qbtp;
    bool holds = true;
    VarId i = -1;
    VarId j = -1;
    VarId k = -1;
    std::optional<ValueId> alpha;
    std::optional<ValueId> beta;
    std::optional<ValueId> gamma;
    std::optional<ValueId> theta;
    /// Min-of-max patterns only: a support set was empty so no candidate exists.
    bool empty_support = false;
};

/// Broken-triangle property under `ord`; the first violation in lexicographic
/// rank order of triples and domain order of values.
TripleWitness qbtp_holds(const Instance& inst, const Ordering& ord);

/// Broken-triangle check of one triple with `k` last; symmetric in i and j.
TripleWitness qbtp_triple(const Instance& inst, VarId i, VarId j, VarId k);

/// Support-set containment for every related pair (alpha, beta) of the
/// triple; returns the first incomparable pair.
std::optional<std::pair<ValueId, ValueId>> containment_counterexample(const Instance& inst, const Ordering& ord, VarId i,
                                                                      VarId j, VarId k);
inline bool containment_ordered(const Instance& inst, const Ordering& ord, VarId i, VarId j, VarId k) {
    return !containment_counterexample(inst, ord, i, j, k).has_value();
}

/// Broken-angle property: every pair from D(i) x D(j), related or not.
/// Requires ord(i) <= ord(j) < ord(k); i == j is allowed.
TripleWitness qbap_holds_triple(const Instance& inst, const Ordering& ord, VarId i, VarId j, VarId k);
/// Same check without rank preconditions.
TripleWitness qbap_triple(const Instance& inst, VarId i, VarId j, VarId k);

/// Min-of-max extendability under `ord` (domain order is the declared order).
TripleWitness qmme_holds(const Instance& inst, const Ordering& ord);
TripleWitness qmme_triple(const Instance& inst, VarId i, VarId j, VarId k);

/// Min-of-max extendability over every pair of D(i) x D(j).
/// Requires ord(i) <= ord(j) < ord(k).
TripleWitness extended_qmme_triple(const Instance& inst, const Ordering& ord, VarId i, VarId j, VarId k);
TripleWitness extended_qmme_unchecked(const Instance& inst, VarId i, VarId j, VarId k);

/// max(R_ik(alpha)) in domain order, nullopt for an empty support set.
std::optional<ValueId> max_support(const Instance& inst, VarId i, VarId k, ValueId alpha);

nlohmann::json to_json(const Instance& inst, const Ordering& ord, const TripleWitness& w);

}  // namespace qcsp

#endif  // QCSP_PATTERNS_HPP
