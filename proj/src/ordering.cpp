#include "qcsp/ordering.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace qcsp {

std::string target_name(AdjointTarget t) {
    switch (t) {
        case AdjointTarget::QbtpAdjoint: return "qbtp-adjoint";
        case AdjointTarget::BlockQbtp: return "block-qbtp";
        case AdjointTarget::QmmeAdjoint: return "qmme-adjoint";
    }
    return "?";
}

std::string source_name(OrderingProblem::Source s) {
    using S = OrderingProblem::Source;
    switch (s) {
        case S::SemiCompat: return "semi-compat";
        case S::Block: return "block";
        case S::QbtpTriple: return "qbtp-triple";
        case S::QbapTriple: return "qbap-triple";
        case S::QmmeTriple: return "qmme-triple";
        case S::ExtendedQmmeTriple: return "extended-qmme-triple";
    }
    return "?";
}

namespace {

std::vector<VarId> sorted_ids(std::vector<VarId> v) {
    std::sort(v.begin(), v.end());
    return v;
}

bool universal_order_kept(const Instance& inst, const Ordering& pi, const Ordering& delta) {
    VarId prev = -1;
    for (VarId v : pi.sequence()) {
        if (!inst.is_universal(v)) continue;
        if (prev >= 0 && delta.rank(prev) > delta.rank(v)) return false;
        prev = v;
    }
    return true;
}

void require_same_size(const Instance& inst, const Ordering& pi, const Ordering& delta) {
    if (pi.size() != inst.num_vars() || delta.size() != inst.num_vars())
        throw std::invalid_argument("orderings must range over the instance variables");
}

}  // namespace

bool is_block_compatible(const Instance& inst, const Ordering& pi, const Ordering& delta) {
    require_same_size(inst, pi, delta);
    for (std::size_t v = 0; v < inst.num_vars(); ++v) {
        const auto x = static_cast<VarId>(v);
        if (!inst.is_existential(x)) continue;
        if (sorted_ids(variable_sets(inst, pi, x).pre_universal) != sorted_ids(variable_sets(inst, delta, x).pre_universal))
            return false;
    }
    return universal_order_kept(inst, pi, delta);
}

bool is_semi_compatible(const Instance& inst, const Ordering& pi, const Ordering& delta) {
    require_same_size(inst, pi, delta);
    for (std::size_t v = 0; v < inst.num_vars(); ++v) {
        const auto x = static_cast<VarId>(v);
        if (!inst.is_existential(x)) continue;
        auto in_pi = sorted_ids(variable_sets(inst, pi, x).pre_universal);
        auto in_delta = sorted_ids(variable_sets(inst, delta, x).pre_universal);
        if (!std::includes(in_delta.begin(), in_delta.end(), in_pi.begin(), in_pi.end())) return false;
    }
    return universal_order_kept(inst, pi, delta);
}

std::vector<VarId> dif_set(const Instance& inst, const Ordering& pi, const Ordering& delta, VarId k) {
    require_same_size(inst, pi, delta);
    std::vector<VarId> out;
    for (VarId v : delta.sequence())
        if (pi.rank(v) > pi.rank(k) && delta.rank(v) < delta.rank(k)) out.push_back(v);
    return out;
}

bool OrderingProblem::satisfied_by(const std::vector<int>& positions) const {
    auto pos = [&](VarId v) { return positions[static_cast<std::size_t>(v)]; };
    for (const auto& c : binary)
        if (!(pos(c.before) < pos(c.after))) return false;
    for (const auto& c : ternary)
        if (!(pos(c.below) < std::max(pos(c.a), pos(c.b)))) return false;
    return true;
}

OrderingProblem build_ordering_problem(const Instance& inst, AdjointTarget target) {
    using Source = OrderingProblem::Source;
    const Ordering& pi = inst.prefix();
    const int n = static_cast<int>(inst.num_vars());

    // Keyed sets keep the problem independent of discovery order.
    std::map<std::pair<VarId, VarId>, Source> binary;
    std::map<std::tuple<VarId, VarId, VarId>, Source> ternary;
    auto add_binary = [&](VarId before, VarId after, Source s) { binary.emplace(std::make_pair(before, after), s); };
    auto add_ternary = [&](VarId below, VarId a, VarId b, Source s) {
        if (a == b)
            add_binary(below, a, s);
        else
            ternary.emplace(std::make_tuple(below, std::min(a, b), std::max(a, b)), s);
    };

    // Semi-compatibility (and block membership for the block target).
    for (int r = 0; r < n; ++r)
        for (int s = r + 1; s < n; ++s) {
            VarId early = pi.at(r);
            VarId late = pi.at(s);
            if (inst.is_universal(early))
                add_binary(early, late, Source::SemiCompat);
            else if (target == AdjointTarget::BlockQbtp && inst.is_universal(late))
                add_binary(early, late, Source::Block);
        }

    // Pattern triples: the verdict depends only on which variable is last.
    const bool mme = target == AdjointTarget::QmmeAdjoint;
    for (VarId i = 0; i < n; ++i)
        for (VarId j = i + 1; j < n; ++j)
            for (VarId k = 0; k < n; ++k) {
                if (k == i || k == j) continue;
                TripleWitness w = mme ? qmme_triple(inst, i, j, k) : qbtp_triple(inst, i, j, k);
                if (!w.holds) add_ternary(k, i, j, mme ? Source::QmmeTriple : Source::QbtpTriple);
            }

    // Angle triples over existential successors outside the block.
    if (target != AdjointTarget::BlockQbtp) {
        for (VarId k = 0; k < n; ++k) {
            if (!inst.is_existential(k)) continue;
            const auto succ = variable_sets(inst, pi, k).suc_existential;
            for (std::size_t a = 0; a < succ.size(); ++a)
                for (std::size_t b = a; b < succ.size(); ++b) {
                    TripleWitness w = mme ? extended_qmme_unchecked(inst, succ[a], succ[b], k) : qbap_triple(inst, succ[a], succ[b], k);
                    if (!w.holds) add_ternary(k, succ[a], succ[b], mme ? Source::ExtendedQmmeTriple : Source::QbapTriple);
                }
        }
    }

    OrderingProblem prob;
    prob.num_vars = n;
    for (const auto& [key, src] : binary) prob.binary.push_back({key.first, key.second, src});
    for (const auto& [key, src] : ternary) prob.ternary.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), src});
    return prob;
}

std::optional<std::vector<int>> solve_max_closed(const OrderingProblem& prob) {
    const int n = prob.num_vars;
    // dom[v] bit p stands for position p + 1.
    std::vector<ValueSet> dom(static_cast<std::size_t>(n), ValueSet(static_cast<std::size_t>(n)));
    for (auto& d : dom) d.set();

    auto lo = [&](VarId v) { return static_cast<int>(dom[static_cast<std::size_t>(v)].find_first()); };
    auto hi = [&](VarId v) {
        const ValueSet& d = dom[static_cast<std::size_t>(v)];
        for (std::size_t p = d.size(); p-- > 0;)
            if (d.test(p)) return static_cast<int>(p);
        return -1;
    };
    // Keeps only positions p of v with keep(p); reports whether anything changed.
    auto prune = [&](VarId v, auto keep) {
        ValueSet& d = dom[static_cast<std::size_t>(v)];
        bool changed = false;
        for (auto p = d.find_first(); p != ValueSet::npos; p = d.find_next(p))
            if (!keep(static_cast<int>(p))) {
                d.reset(p);
                changed = true;
            }
        return changed;
    };
    auto wiped = [&] { return std::any_of(dom.begin(), dom.end(), [](const ValueSet& d) { return d.none(); }); };

    if (n == 0) return std::vector<int>{};
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& c : prob.binary) {
            const int top = hi(c.after);
            changed |= prune(c.before, [&](int p) { return p < top; });
            if (wiped()) return std::nullopt;
            const int bottom = lo(c.before);
            changed |= prune(c.after, [&](int p) { return p > bottom; });
            if (wiped()) return std::nullopt;
        }
        for (const auto& c : prob.ternary) {
            const int top = std::max(hi(c.a), hi(c.b));
            changed |= prune(c.below, [&](int p) { return p < top; });
            if (wiped()) return std::nullopt;
            const int floor = lo(c.below);
            const int top_b = hi(c.b);
            changed |= prune(c.a, [&](int p) { return floor < std::max(p, top_b); });
            if (wiped()) return std::nullopt;
            const int top_a = hi(c.a);
            changed |= prune(c.b, [&](int p) { return floor < std::max(top_a, p); });
            if (wiped()) return std::nullopt;
        }
    }
    std::vector<int> positions(static_cast<std::size_t>(n));
    for (VarId v = 0; v < n; ++v) positions[static_cast<std::size_t>(v)] = hi(v) + 1;
    return positions;
}

Ordering derive_ordering(const std::vector<int>& positions, const Ordering& pi) {
    if (positions.size() != pi.size()) throw std::invalid_argument("assignment size does not match the ordering");
    std::vector<VarId> seq = pi.sequence();
    std::stable_sort(seq.begin(), seq.end(), [&](VarId a, VarId b) {
        return positions[static_cast<std::size_t>(a)] < positions[static_cast<std::size_t>(b)];
    });
    return Ordering::from_sequence(std::move(seq));
}

bool AdjointVerification::passed() const {
    return compatible && pattern.holds &&
           std::all_of(angle_checks.begin(), angle_checks.end(), [](const TripleWitness& w) { return w.holds; });
}

AdjointVerification verify_adjoint(const Instance& inst, const Ordering& delta, AdjointTarget target, bool strict) {
    const Ordering& pi = inst.prefix();
    const bool mme = target == AdjointTarget::QmmeAdjoint;
    AdjointVerification v;
    v.compatible = target == AdjointTarget::BlockQbtp ? is_block_compatible(inst, pi, delta) : is_semi_compatible(inst, pi, delta);
    v.pattern = mme ? qmme_holds(inst, delta) : qbtp_holds(inst, delta);

    auto angle = [&](VarId i, VarId j, VarId k) {
        return mme ? extended_qmme_triple(inst, delta, i, j, k) : qbap_holds_triple(inst, delta, i, j, k);
    };
    for (VarId k : pi.sequence()) {
        if (!inst.is_existential(k)) continue;
        const auto block = variable_sets(inst, pi, k).block;
        std::vector<VarId> checked;
        std::vector<VarId> universal;
        for (VarId x : dif_set(inst, pi, delta, k)) {
            if (inst.is_universal(x))
                universal.push_back(x);
            else if (std::find(block.begin(), block.end(), x) == block.end())
                checked.push_back(x);
        }
        for (std::size_t a = 0; a < checked.size(); ++a)
            for (std::size_t b = a; b < checked.size(); ++b) v.angle_checks.push_back(angle(checked[a], checked[b], k));
        if (!strict) continue;
        std::vector<VarId> all = checked;
        all.insert(all.end(), universal.begin(), universal.end());
        std::sort(all.begin(), all.end(), [&](VarId x, VarId y) { return delta.rank(x) < delta.rank(y); });
        for (std::size_t a = 0; a < all.size(); ++a)
            for (std::size_t b = a; b < all.size(); ++b) {
                const bool has_universal = inst.is_universal(all[a]) || inst.is_universal(all[b]);
                if (has_universal) v.universal_dif_checks.push_back(angle(all[a], all[b], k));
            }
    }
    return v;
}

AdjointResult find_adjoint(const Instance& inst, AdjointTarget target, bool strict) {
    AdjointResult res;
    res.target = target;
    res.problem = build_ordering_problem(inst, target);
    auto positions = solve_max_closed(res.problem);
    if (!positions) return res;

    res.delta = derive_ordering(*positions, inst.prefix());
    res.verification = verify_adjoint(inst, res.delta, target, strict);
    if (!res.problem.satisfied_by(*positions) || !res.verification.passed()) {
        res.status = AdjointResult::Status::Defect;
        res.defect = "derived ordering failed independent verification";
        return res;
    }
    for (const auto& w : res.verification.universal_dif_checks)
        if (!w.holds)
            res.warnings.push_back(pattern_name(w.pattern) + " fails on (" + inst.name(w.i) + ", " + inst.name(w.j) + ", " +
                                   inst.name(w.k) + ") with a universal dif member");
    res.status = AdjointResult::Status::Found;
    return res;
}

nlohmann::json ordering_json(const Instance& inst, const Ordering& ord) {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t v = 0; v < inst.num_vars(); ++v) j[inst.name(static_cast<VarId>(v))] = ord.rank(static_cast<VarId>(v)) + 1;
    return j;
}

nlohmann::json to_json(const Instance& inst, const OrderingProblem& prob) {
    nlohmann::json j;
    j["vars"] = nlohmann::json::array();
    for (int v = 0; v < prob.num_vars; ++v) j["vars"].push_back(inst.name(v));
    j["binary"] = nlohmann::json::array();
    j["ternary"] = nlohmann::json::array();
    nlohmann::json prov_b = nlohmann::json::array();
    nlohmann::json prov_t = nlohmann::json::array();
    for (const auto& c : prob.binary) {
        j["binary"].push_back({inst.name(c.before), inst.name(c.after)});
        prov_b.push_back(source_name(c.source));
    }
    for (const auto& c : prob.ternary) {
        j["ternary"].push_back({inst.name(c.below), inst.name(c.a), inst.name(c.b)});
        prov_t.push_back(source_name(c.source));
    }
    j["provenance"] = {{"binary", prov_b}, {"ternary", prov_t}};
    return j;
}

nlohmann::json to_json(const Instance& inst, const AdjointResult& res) {
    nlohmann::json j;
    j["found"] = res.found();
    j["class"] = target_name(res.target);
    if (res.target == AdjointTarget::QmmeAdjoint) j["extension"] = "qmme-search";
    if (res.status == AdjointResult::Status::Defect) j["defect"] = res.defect;
    if (res.status == AdjointResult::Status::None) return j;
    j["delta"] = ordering_json(inst, res.delta);
    const auto& v = res.verification;
    nlohmann::json angles = nlohmann::json::array();
    for (const auto& w : v.angle_checks) angles.push_back(to_json(inst, res.delta, w));
    j["verified"] = {{"compatible", v.compatible}, {"pattern", to_json(inst, res.delta, v.pattern)}, {"angles", angles}};
    if (!v.universal_dif_checks.empty()) {
        nlohmann::json uni = nlohmann::json::array();
        for (const auto& w : v.universal_dif_checks) uni.push_back(to_json(inst, res.delta, w));
        j["verified"]["universal_dif"] = uni;
    }
    if (!res.warnings.empty()) j["warnings"] = res.warnings;
    return j;
}

}  // namespace qcsp
