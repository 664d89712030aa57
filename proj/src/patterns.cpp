#include "qcsp/patterns.hpp"

#include <stdexcept>

namespace qcsp {

std::string pattern_name(Pattern p) {
    switch (p) {
        case Pattern::Qbtp: return "qbtp";
        case Pattern::Qbap: return "qbap";
        case Pattern::Qmme: return "qmme";
        case Pattern::ExtendedQmme: return "extended-qmme";
    }
    return "?";
}

namespace {

TripleWitness passing(Pattern p, VarId i, VarId j, VarId k) {
    TripleWitness w;
    w.pattern = p;
    w.i = i;
    w.j = j;
    w.k = k;
    return w;
}

// First pair of incomparable support sets; fills gamma/theta from the two differences.
bool incomparable(const ValueSet& a, const ValueSet& b, TripleWitness& w) {
    ValueSet only_a = a - b;
    if (only_a.none()) return false;
    ValueSet only_b = b - a;
    if (only_b.none()) return false;
    w.holds = false;
    w.gamma = static_cast<ValueId>(only_a.find_first());
    w.theta = static_cast<ValueId>(only_b.find_first());
    return true;
}

// Min-of-max candidate check for one value pair; false records the failure in w.
bool min_of_max_extends(const Instance& inst, VarId i, VarId j, VarId k, ValueId a, ValueId b, TripleWitness& w) {
    auto max_a = max_support(inst, i, k, a);
    auto max_b = max_support(inst, j, k, b);
    if (!max_a || !max_b) {
        w.holds = false;
        w.empty_support = true;
        return false;
    }
    ValueId gamma = std::min(*max_a, *max_b);
    if (inst.supports(i, k, a).test(static_cast<std::size_t>(gamma)) &&
        inst.supports(j, k, b).test(static_cast<std::size_t>(gamma)))
        return true;
    w.holds = false;
    w.gamma = gamma;
    return false;
}

void require_angle_ranks(const Ordering& ord, VarId i, VarId j, VarId k) {
    if (!(ord.rank(i) <= ord.rank(j) && ord.rank(j) < ord.rank(k)))
        throw std::invalid_argument("triple must satisfy ord(i) <= ord(j) < ord(k)");
}

template <typename TripleCheck>
TripleWitness scan_triples(const Instance& inst, const Ordering& ord, Pattern p, TripleCheck check) {
    const int n = static_cast<int>(inst.num_vars());
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            for (int c = b + 1; c < n; ++c) {
                TripleWitness w = check(inst, ord, ord.at(a), ord.at(b), ord.at(c));
                if (!w.holds) return w;
            }
    return passing(p, -1, -1, -1);
}

}  // namespace

std::optional<ValueId> max_support(const Instance& inst, VarId i, VarId k, ValueId alpha) {
    const ValueSet& s = inst.supports(i, k, alpha);
    for (std::size_t g = s.size(); g-- > 0;)
        if (s.test(g)) return static_cast<ValueId>(g);
    return std::nullopt;
}

TripleWitness qbtp_triple(const Instance& inst, VarId i, VarId j, VarId k) {
    TripleWitness w = passing(Pattern::Qbtp, i, j, k);
    // A complete relation into k makes one support set the full domain.
    if (!inst.constrained(i, k) || !inst.constrained(j, k)) return w;
    for (std::size_t a = 0; a < inst.domain_size(i); ++a) {
        const ValueSet& sa = inst.supports(i, k, static_cast<ValueId>(a));
        const ValueSet& related = inst.supports(i, j, static_cast<ValueId>(a));
        for (auto b = related.find_first(); b != ValueSet::npos; b = related.find_next(b)) {
            if (incomparable(sa, inst.supports(j, k, static_cast<ValueId>(b)), w)) {
                w.alpha = static_cast<ValueId>(a);
                w.beta = static_cast<ValueId>(b);
                return w;
            }
        }
    }
    return w;
}

TripleWitness qbtp_holds(const Instance& inst, const Ordering& ord) {
    return scan_triples(inst, ord, Pattern::Qbtp,
                        [](const Instance& in, const Ordering&, VarId i, VarId j, VarId k) { return qbtp_triple(in, i, j, k); });
}

std::optional<std::pair<ValueId, ValueId>> containment_counterexample(const Instance& inst, const Ordering& ord, VarId i,
                                                                      VarId j, VarId k) {
    if (!(ord.rank(i) < ord.rank(j) && ord.rank(j) < ord.rank(k)))
        throw std::invalid_argument("triple must satisfy ord(i) < ord(j) < ord(k)");
    for (std::size_t a = 0; a < inst.domain_size(i); ++a)
        for (std::size_t b = 0; b < inst.domain_size(j); ++b) {
            if (!inst.allowed(i, static_cast<ValueId>(a), j, static_cast<ValueId>(b))) continue;
            const ValueSet& sa = inst.supports(i, k, static_cast<ValueId>(a));
            const ValueSet& sb = inst.supports(j, k, static_cast<ValueId>(b));
            if (!sa.is_subset_of(sb) && !sb.is_subset_of(sa))
                return std::make_pair(static_cast<ValueId>(a), static_cast<ValueId>(b));
        }
    return std::nullopt;
}

TripleWitness qbap_triple(const Instance& inst, VarId i, VarId j, VarId k) {
    TripleWitness w = passing(Pattern::Qbap, i, j, k);
    for (std::size_t a = 0; a < inst.domain_size(i); ++a)
        for (std::size_t b = 0; b < inst.domain_size(j); ++b) {
            if (incomparable(inst.supports(i, k, static_cast<ValueId>(a)), inst.supports(j, k, static_cast<ValueId>(b)), w)) {
                w.alpha = static_cast<ValueId>(a);
                w.beta = static_cast<ValueId>(b);
                return w;
            }
        }
    return w;
}

TripleWitness qbap_holds_triple(const Instance& inst, const Ordering& ord, VarId i, VarId j, VarId k) {
    require_angle_ranks(ord, i, j, k);
    return qbap_triple(inst, i, j, k);
}

TripleWitness qmme_triple(const Instance& inst, VarId i, VarId j, VarId k) {
    TripleWitness w = passing(Pattern::Qmme, i, j, k);
    for (std::size_t a = 0; a < inst.domain_size(i); ++a) {
        const ValueSet& related = inst.supports(i, j, static_cast<ValueId>(a));
        for (auto b = related.find_first(); b != ValueSet::npos; b = related.find_next(b)) {
            if (!min_of_max_extends(inst, i, j, k, static_cast<ValueId>(a), static_cast<ValueId>(b), w)) {
                w.alpha = static_cast<ValueId>(a);
                w.beta = static_cast<ValueId>(b);
                return w;
            }
        }
    }
    return w;
}

TripleWitness qmme_holds(const Instance& inst, const Ordering& ord) {
    return scan_triples(inst, ord, Pattern::Qmme, [](const Instance& in, const Ordering&, VarId i, VarId j, VarId k) {
        // Both relations into k complete: the top value is always shared.
        if (!in.constrained(i, k) && !in.constrained(j, k)) return passing(Pattern::Qmme, i, j, k);
        return qmme_triple(in, i, j, k);
    });
}

TripleWitness extended_qmme_unchecked(const Instance& inst, VarId i, VarId j, VarId k) {
    TripleWitness w = passing(Pattern::ExtendedQmme, i, j, k);
    for (std::size_t a = 0; a < inst.domain_size(i); ++a)
        for (std::size_t b = 0; b < inst.domain_size(j); ++b)
            if (!min_of_max_extends(inst, i, j, k, static_cast<ValueId>(a), static_cast<ValueId>(b), w)) {
                w.alpha = static_cast<ValueId>(a);
                w.beta = static_cast<ValueId>(b);
                return w;
            }
    return w;
}

TripleWitness extended_qmme_triple(const Instance& inst, const Ordering& ord, VarId i, VarId j, VarId k) {
    require_angle_ranks(ord, i, j, k);
    return extended_qmme_unchecked(inst, i, j, k);
}

nlohmann::json to_json(const Instance& inst, const Ordering& ord, const TripleWitness& w) {
    nlohmann::json j;
    j["pattern"] = pattern_name(w.pattern);
    j["holds"] = w.holds;
    j["vars"] = nlohmann::json::array();
    j["ranks"] = nlohmann::json::array();
    for (VarId v : {w.i, w.j, w.k}) {
        if (v < 0) continue;
        j["vars"].push_back(inst.name(v));
        j["ranks"].push_back(ord.rank(v) + 1);
    }
    auto value = [&](VarId v, const std::optional<ValueId>& a) {
        return (v >= 0 && a) ? nlohmann::json(inst.value_name(v, *a)) : nlohmann::json(nullptr);
    };
    j["values"] = {{"alpha", value(w.i, w.alpha)},
                   {"beta", value(w.j, w.beta)},
                   {"gamma", value(w.k, w.gamma)},
                   {"theta", value(w.k, w.theta)}};
    if (w.empty_support) j["empty_support"] = true;
    return j;
}

}  // namespace qcsp
