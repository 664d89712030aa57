#include "qcsp/oracle.hpp"

#include <algorithm>
#include <numeric>

namespace qcsp {

std::string verdict_name(OracleVerdict v) {
    switch (v) {
        case OracleVerdict::Sat: return "SAT";
        case OracleVerdict::Unsat: return "UNSAT";
        case OracleVerdict::Exhausted: return "EXHAUSTED";
    }
    return "?";
}

namespace {

struct Exhausted {};

class Meter {
public:
    explicit Meter(const OracleBudget& b) : budget_(b), start_(std::chrono::steady_clock::now()) {}

    void node() {
        if (++nodes_ > budget_.max_nodes) throw Exhausted{};
        if (budget_.time_cap.count() > 0 && (nodes_ & 0xfff) == 0 && std::chrono::steady_clock::now() - start_ > budget_.time_cap)
            throw Exhausted{};
    }

private:
    const OracleBudget& budget_;
    std::chrono::steady_clock::time_point start_;
    std::uint64_t nodes_ = 0;
};

class GameTree {
public:
    GameTree(const Instance& inst, Meter& meter) : inst_(inst), meter_(meter), order_(inst.prefix().sequence()), value_(inst.num_vars(), -1) {}

    bool wins(std::size_t level) {
        if (level == order_.size()) return true;
        const VarId v = order_[level];
        const bool universal = inst_.is_universal(v);
        for (std::size_t a = 0; a < inst_.domain_size(v); ++a) {
            meter_.node();
            bool ok = consistent(level, static_cast<ValueId>(a));
            if (ok) {
                value_[static_cast<std::size_t>(v)] = static_cast<ValueId>(a);
                ok = wins(level + 1);
                value_[static_cast<std::size_t>(v)] = -1;
            }
            if (universal && !ok) return false;
            if (!universal && ok) return true;
        }
        return universal;
    }

    // Same search, recording the winning subtree into `nodes`.
    struct Node {
        ValueId value;
        std::vector<std::size_t> children;
    };

    bool build(std::size_t level, std::size_t at, std::vector<Node>& nodes) {
        if (level == order_.size()) return true;
        const VarId v = order_[level];
        const bool universal = inst_.is_universal(v);
        for (std::size_t a = 0; a < inst_.domain_size(v); ++a) {
            meter_.node();
            if (!consistent(level, static_cast<ValueId>(a))) {
                if (universal) return false;
                continue;
            }
            const std::size_t mark = nodes.size();
            nodes.push_back({static_cast<ValueId>(a), {}});
            nodes[at].children.push_back(mark);
            value_[static_cast<std::size_t>(v)] = static_cast<ValueId>(a);
            bool ok = build(level + 1, mark, nodes);
            value_[static_cast<std::size_t>(v)] = -1;
            if (!ok) {
                nodes.resize(mark);
                nodes[at].children.pop_back();
                if (universal) return false;
                continue;
            }
            if (!universal) return true;
        }
        return universal;
    }

private:
    bool consistent(std::size_t level, ValueId a) const {
        const VarId v = order_[level];
        for (std::size_t l = 0; l < level; ++l) {
            const VarId u = order_[l];
            if (!inst_.allowed(u, value_[static_cast<std::size_t>(u)], v, a)) return false;
        }
        return true;
    }

    const Instance& inst_;
    Meter& meter_;
    std::vector<VarId> order_;
    std::vector<ValueId> value_;
};

}  // namespace

OracleVerdict brute_force_satisfiable(const Instance& inst, const OracleBudget& budget) {
    Meter meter(budget);
    GameTree game(inst, meter);
    try {
        return game.wins(0) ? OracleVerdict::Sat : OracleVerdict::Unsat;
    } catch (const Exhausted&) {
        return OracleVerdict::Exhausted;
    }
}

OracleSolution brute_force_solution(const Instance& inst, const OracleBudget& budget, std::size_t node_limit) {
    Meter meter(budget);
    GameTree game(inst, meter);
    std::vector<GameTree::Node> nodes{{-1, {}}};
    OracleSolution out;
    try {
        if (!game.build(0, 0, nodes)) {
            out.verdict = OracleVerdict::Unsat;
            return out;
        }
    } catch (const Exhausted&) {
        out.verdict = OracleVerdict::Exhausted;
        return out;
    }
    if (nodes.size() > node_limit) throw StrategySizeError(nodes.size(), node_limit);
    StrategyTree tree(inst.prefix().sequence());
    std::vector<std::pair<std::size_t, int>> stack{{0, StrategyTree::root()}};
    while (!stack.empty()) {
        auto [src, dst] = stack.back();
        stack.pop_back();
        for (std::size_t c : nodes[src].children) stack.emplace_back(c, tree.add_child(dst, nodes[c].value));
    }
    out.verdict = OracleVerdict::Sat;
    out.tree = std::move(tree);
    return out;
}

// ---------------------------------------------------------------------------
// Adjoint conditions

namespace {

bool related(const Instance& inst, VarId i, ValueId a, VarId j, ValueId b) { return i == j ? a == b : inst.allowed(i, a, j, b); }

// (alpha, beta) in R_ij, (alpha, gamma) in R_ik, (beta, theta) in R_jk imply
// (alpha, theta) in R_ik or (beta, gamma) in R_jk.
bool broken_triangle_free(const Instance& inst, VarId i, VarId j, VarId k, bool all_pairs) {
    const auto di = static_cast<ValueId>(inst.domain_size(i));
    const auto dj = static_cast<ValueId>(inst.domain_size(j));
    const auto dk = static_cast<ValueId>(inst.domain_size(k));
    for (ValueId a = 0; a < di; ++a)
        for (ValueId b = 0; b < dj; ++b) {
            if (!all_pairs && !related(inst, i, a, j, b)) continue;
            for (ValueId g = 0; g < dk; ++g) {
                if (!inst.allowed(i, a, k, g)) continue;
                for (ValueId t = 0; t < dk; ++t) {
                    if (!inst.allowed(j, b, k, t)) continue;
                    if (!inst.allowed(i, a, k, t) && !inst.allowed(j, b, k, g)) return false;
                }
            }
        }
    return true;
}

std::optional<ValueId> largest_support(const Instance& inst, VarId i, ValueId a, VarId k) {
    for (auto g = static_cast<ValueId>(inst.domain_size(k)); g-- > 0;)
        if (inst.allowed(i, a, k, g)) return g;
    return std::nullopt;
}

// gamma = min(max R_ik(alpha), max R_jk(beta)) is supported by both alpha and beta.
bool min_of_max(const Instance& inst, VarId i, VarId j, VarId k, bool all_pairs) {
    const auto di = static_cast<ValueId>(inst.domain_size(i));
    const auto dj = static_cast<ValueId>(inst.domain_size(j));
    for (ValueId a = 0; a < di; ++a)
        for (ValueId b = 0; b < dj; ++b) {
            if (!all_pairs && !related(inst, i, a, j, b)) continue;
            auto ma = largest_support(inst, i, a, k);
            auto mb = largest_support(inst, j, b, k);
            if (!ma || !mb) return false;
            ValueId g = std::min(*ma, *mb);
            if (!inst.allowed(i, a, k, g) || !inst.allowed(j, b, k, g)) return false;
        }
    return true;
}

std::vector<VarId> universals_before(const Instance& inst, const Ordering& ord, VarId x) {
    std::vector<VarId> out;
    for (int r = 0; r < ord.rank(x); ++r)
        if (inst.is_universal(ord.at(r))) out.push_back(ord.at(r));
    // A universal never shares an existential's block, so no block filtering.
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

AdjointConditions::AdjointConditions(const Instance& inst, AdjointTarget target)
    : inst_(&inst), target_(target), n_(inst.num_vars()), triangle_(n_ * n_ * n_, 1), angle_(n_ * n_ * n_, 1) {
    const bool qmme = target == AdjointTarget::QmmeAdjoint;
    for (VarId k = 0; k < static_cast<VarId>(n_); ++k)
        for (VarId i = 0; i < static_cast<VarId>(n_); ++i)
            for (VarId j = i; j < static_cast<VarId>(n_); ++j) {
                if (i == k || j == k) continue;
                char tri = 1;
                if (i != j) tri = qmme ? min_of_max(inst, i, j, k, false) : broken_triangle_free(inst, i, j, k, false);
                char ang = qmme ? min_of_max(inst, i, j, k, true) : broken_triangle_free(inst, i, j, k, true);
                triangle_[at(i, j, k)] = triangle_[at(j, i, k)] = tri;
                angle_[at(i, j, k)] = angle_[at(j, i, k)] = ang;
            }
}

std::size_t AdjointConditions::at(VarId i, VarId j, VarId k) const {
    return (static_cast<std::size_t>(i) * n_ + static_cast<std::size_t>(j)) * n_ + static_cast<std::size_t>(k);
}

bool AdjointConditions::compatible(const Ordering& delta) const {
    const Instance& inst = *inst_;
    const Ordering& pi = inst.prefix();
    for (VarId a = 0; a < static_cast<VarId>(n_); ++a)
        for (VarId b = 0; b < static_cast<VarId>(n_); ++b)
            if (inst.is_universal(a) && inst.is_universal(b) && pi.rank(a) < pi.rank(b) && !(delta.rank(a) < delta.rank(b)))
                return false;
    for (VarId x = 0; x < static_cast<VarId>(n_); ++x) {
        if (!inst.is_existential(x)) continue;
        auto under_pi = universals_before(inst, pi, x);
        auto under_delta = universals_before(inst, delta, x);
        if (target_ == AdjointTarget::BlockQbtp) {
            if (under_pi != under_delta) return false;
        } else if (!std::includes(under_delta.begin(), under_delta.end(), under_pi.begin(), under_pi.end())) {
            return false;
        }
    }
    return true;
}

bool AdjointConditions::pattern_holds(const Ordering& delta) const {
    for (int rk = 2; rk < static_cast<int>(n_); ++rk)
        for (int ri = 0; ri < rk; ++ri)
            for (int rj = ri + 1; rj < rk; ++rj)
                if (!triangle_[at(delta.at(ri), delta.at(rj), delta.at(rk))]) return false;
    return true;
}

bool AdjointConditions::angles_hold(const Ordering& delta) const {
    if (target_ == AdjointTarget::BlockQbtp) return true;
    const Instance& inst = *inst_;
    const Ordering& pi = inst.prefix();
    for (VarId k = 0; k < static_cast<VarId>(n_); ++k) {
        if (!inst.is_existential(k)) continue;
        // Existential members of dif(pi, delta, k) outside k's block under pi.
        std::vector<VarId> dif;
        bool crossed = false;
        for (int r = pi.rank(k) + 1; r < static_cast<int>(n_); ++r) {
            const VarId v = pi.at(r);
            crossed |= inst.is_universal(v);
            if (crossed && inst.is_existential(v) && delta.rank(v) < delta.rank(k)) dif.push_back(v);
        }
        for (std::size_t a = 0; a < dif.size(); ++a)
            for (std::size_t b = a; b < dif.size(); ++b)
                if (!angle_[at(dif[a], dif[b], k)]) return false;
    }
    return true;
}

AdjointSearch exhaustive_adjoint_search(const Instance& inst, AdjointTarget target, const OracleBudget& budget) {
    AdjointConditions conditions(inst, target);
    const auto start = std::chrono::steady_clock::now();
    std::vector<int> ranks(inst.num_vars());
    std::iota(ranks.begin(), ranks.end(), 0);
    AdjointSearch out;
    do {
        if (++out.permutations > budget.max_permutations ||
            (budget.time_cap.count() > 0 && std::chrono::steady_clock::now() - start > budget.time_cap)) {
            out.status = AdjointSearch::Status::Exhausted;
            return out;
        }
        std::vector<VarId> seq;
        for (int r : ranks) seq.push_back(inst.prefix().at(r));
        Ordering delta = Ordering::from_sequence(seq);
        if (conditions.holds(delta)) {
            out.status = AdjointSearch::Status::Found;
            out.delta = std::move(delta);
            return out;
        }
    } while (std::next_permutation(ranks.begin(), ranks.end()));
    out.status = AdjointSearch::Status::None;
    return out;
}

}  // namespace qcsp
