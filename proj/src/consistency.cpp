#include "qcsp/consistency.hpp"

#include <algorithm>
#include <deque>
#include <functional>

namespace qcsp {

namespace {

/// Constrained pairs as (earlier, later) under the prefix, sorted by rank.
std::vector<std::pair<VarId, VarId>> ordered_scopes(const Instance& inst) {
    const Ordering& pi = inst.prefix();
    std::vector<std::pair<VarId, VarId>> scopes;
    for (const auto& rel : inst.relations()) {
        VarId a = rel.first();
        VarId b = rel.second();
        if (pi.rank(b) < pi.rank(a)) std::swap(a, b);
        scopes.emplace_back(a, b);
    }
    std::sort(scopes.begin(), scopes.end(), [&](const auto& x, const auto& y) {
        return std::make_pair(pi.rank(x.first), pi.rank(x.second)) < std::make_pair(pi.rank(y.first), pi.rank(y.second));
    });
    return scopes;
}

template <typename F>
void for_each_value(const ValueSet& s, F&& f) {
    for (auto b = s.find_first(); b != ValueSet::npos; b = s.find_next(b)) f(static_cast<ValueId>(b));
}

class QacPropagator {
public:
    explicit QacPropagator(const Instance& inst) : inst_(inst), scopes_(ordered_scopes(inst)) {
        for (std::size_t v = 0; v < inst.num_vars(); ++v) live_.push_back(inst.full_domain(static_cast<VarId>(v)));
        for (std::size_t s = 0; s < scopes_.size(); ++s) {
            slot_[scopes_[s]] = s;
            slot_[{scopes_[s].second, scopes_[s].first}] = s;
        }
    }

    QacResult run() {
        std::deque<std::size_t> queue;
        std::vector<bool> queued(scopes_.size(), true);
        for (std::size_t s = 0; s < scopes_.size(); ++s) queue.push_back(s);

        while (!queue.empty() && !trace_.empty) {
            std::size_t s = queue.front();
            queue.pop_front();
            queued[s] = false;
            touched_.clear();
            revise(scopes_[s].first, scopes_[s].second);
            for (VarId v : touched_) {
                for (VarId u : inst_.neighbours(v)) {
                    std::size_t t = slot_.at({v, u});
                    if (!queued[t]) {
                        queued[t] = true;
                        queue.push_back(t);
                    }
                }
            }
        }

        QacResult result;
        result.trace = std::move(trace_);
        if (!result.trace.empty) result.reduced = inst_.restrict_domains(live_);
        return result;
    }

private:
    bool supported(VarId i, ValueId a, VarId j) const { return inst_.supports(i, j, a).intersects(live_[static_cast<std::size_t>(j)]); }
    bool fully_supported(VarId i, ValueId a, VarId j) const {
        return live_[static_cast<std::size_t>(j)].is_subset_of(inst_.supports(i, j, a));
    }

    void remove(VarId v, ValueId a, VarId x, VarId y) {
        if (trace_.empty) return;
        trace_.removals.push_back({v, inst_.value_name(v, a), x, y});
        if (inst_.is_universal(v)) {
            wipe_out(v);
            return;
        }
        live_[static_cast<std::size_t>(v)].reset(static_cast<std::size_t>(a));
        if (std::find(touched_.begin(), touched_.end(), v) == touched_.end()) touched_.push_back(v);
        if (live_[static_cast<std::size_t>(v)].none()) wipe_out(v);
    }

    void wipe_out(VarId v) {
        trace_.empty = true;
        trace_.empty_at = v;
    }

    // Removes every value of `v` for which `keep` fails.
    void filter(VarId v, VarId x, VarId y, const std::function<bool(ValueId)>& keep) {
        ValueSet snapshot = live_[static_cast<std::size_t>(v)];
        for_each_value(snapshot, [&](ValueId a) {
            if (!trace_.empty && !keep(a)) remove(v, a, x, y);
        });
    }

    void revise(VarId x, VarId y) {
        const bool uni_x = inst_.is_universal(x);
        const bool uni_y = inst_.is_universal(y);
        if (!uni_y) {
            // y existential: every value of y needs a supporter in x; every
            // value of x needs a supporter in y.
            filter(y, x, y, [&](ValueId b) { return supported(y, b, x); });
            filter(x, x, y, [&](ValueId a) { return supported(x, a, y); });
            if (uni_x) return;
            filter(y, x, y, [&](ValueId b) { return supported(y, b, x); });
            return;
        }
        // y universal: every value of x must accept all of y, and every value
        // of y still needs a supporter in x.
        filter(x, x, y, [&](ValueId a) { return fully_supported(x, a, y); });
        filter(y, x, y, [&](ValueId b) { return supported(y, b, x); });
    }

    const Instance& inst_;
    std::vector<std::pair<VarId, VarId>> scopes_;
    std::map<std::pair<VarId, VarId>, std::size_t> slot_;
    std::vector<ValueSet> live_;
    std::vector<VarId> touched_;
    PruneTrace trace_;
};

}  // namespace

QacResult enforce_qac(const Instance& inst) { return QacPropagator(inst).run(); }

std::optional<ConsistencyWitness> find_qac_violation(const Instance& inst) {
    for (auto [x, y] : ordered_scopes(inst)) {
        auto witness = [&](VarId target, ValueId value, std::optional<ValueId> blocker) {
            ConsistencyWitness w;
            w.kind = ConsistencyWitness::Kind::Pair;
            w.vars = {x, y};
            w.target = target;
            w.value = value;
            w.blocker = blocker;
            return w;
        };
        const bool uni_y = inst.is_universal(y);
        for (std::size_t a = 0; a < inst.domain_size(x); ++a) {
            const ValueSet& row = inst.supports(x, y, static_cast<ValueId>(a));
            if (uni_y) {
                if (!row.all()) {
                    ValueSet missing = ~row;
                    return witness(x, static_cast<ValueId>(a), static_cast<ValueId>(missing.find_first()));
                }
            } else if (row.none()) {
                return witness(x, static_cast<ValueId>(a), std::nullopt);
            }
        }
        for (std::size_t b = 0; b < inst.domain_size(y); ++b)
            if (inst.supports(y, x, static_cast<ValueId>(b)).none()) return witness(y, static_cast<ValueId>(b), std::nullopt);
    }
    return std::nullopt;
}

DirectionalResult check_directional_k_consistency(const Instance& inst, int k, std::uint64_t work_cap) {
    const int n = static_cast<int>(inst.num_vars());
    if (k < 2 || k > n) throw std::invalid_argument("k must satisfy 2 <= k <= n");
    const Ordering& pi = inst.prefix();

    DirectionalResult result;
    std::vector<int> ranks(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) ranks[static_cast<std::size_t>(i)] = i;

    std::vector<VarId> tuple(static_cast<std::size_t>(k));
    std::vector<ValueId> assignment(static_cast<std::size_t>(k - 1));

    // Depth-first over consistent assignments to the first k-1 variables;
    // returns false to stop (violation or cap).
    std::function<bool(int)> extend = [&](int depth) -> bool {
        if (++result.work > work_cap) {
            result.verdict = DirectionalResult::Verdict::CapExceeded;
            return false;
        }
        const VarId last = tuple.back();
        if (depth == k - 1) {
            ValueSet ext = inst.full_domain(last);
            for (int i = 0; i < k - 1; ++i)
                ext &= inst.supports(tuple[static_cast<std::size_t>(i)], last, assignment[static_cast<std::size_t>(i)]);
            const bool ok = inst.is_universal(last) ? ext.all() : ext.any();
            if (ok) return true;
            ConsistencyWitness w;
            w.kind = ConsistencyWitness::Kind::Tuple;
            w.vars = tuple;
            w.assignment = assignment;
            w.target = last;
            if (inst.is_universal(last)) w.value = static_cast<ValueId>((~ext).find_first());
            result.verdict = DirectionalResult::Verdict::Violated;
            result.witness = std::move(w);
            return false;
        }
        const VarId v = tuple[static_cast<std::size_t>(depth)];
        for (std::size_t a = 0; a < inst.domain_size(v); ++a) {
            bool consistent = true;
            for (int i = 0; i < depth && consistent; ++i)
                consistent = inst.allowed(tuple[static_cast<std::size_t>(i)], assignment[static_cast<std::size_t>(i)], v,
                                          static_cast<ValueId>(a));
            if (!consistent) continue;
            assignment[static_cast<std::size_t>(depth)] = static_cast<ValueId>(a);
            if (!extend(depth + 1)) return false;
        }
        return true;
    };

    while (true) {
        for (int i = 0; i < k; ++i) tuple[static_cast<std::size_t>(i)] = pi.at(ranks[static_cast<std::size_t>(i)]);
        if (!extend(0)) return result;
        // Next k-combination of ranks in lexicographic order.
        int i = k - 1;
        while (i >= 0 && ranks[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++ranks[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) ranks[static_cast<std::size_t>(j)] = ranks[static_cast<std::size_t>(j - 1)] + 1;
    }
    return result;
}

nlohmann::json to_json(const Instance& inst, const PruneTrace& trace) {
    if (trace.empty) return {{"empty", true}, {"at", inst.name(*trace.empty_at)}};
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : trace.removals)
        arr.push_back({{"var", inst.name(r.var)},
                       {"value", r.value},
                       {"because", {inst.name(r.because_first), inst.name(r.because_second)}}});
    return arr;
}

nlohmann::json to_json(const Instance& inst, const ConsistencyWitness& w) {
    nlohmann::json j;
    j["kind"] = w.kind == ConsistencyWitness::Kind::Pair ? "pair" : "tuple";
    j["vars"] = nlohmann::json::array();
    for (VarId v : w.vars) j["vars"].push_back(inst.name(v));
    j["assignment"] = nlohmann::json::array();
    for (std::size_t i = 0; i < w.assignment.size(); ++i)
        j["assignment"].push_back(inst.value_name(w.vars[i], w.assignment[i]));
    j["target"] = inst.name(w.target);
    j["value"] = w.value ? nlohmann::json(inst.value_name(w.target, *w.value)) : nlohmann::json(nullptr);
    if (w.blocker) {
        VarId other = w.vars[0] == w.target ? w.vars[1] : w.vars[0];
        j["blocker"] = inst.value_name(other, *w.blocker);
    }
    return j;
}

}  // namespace qcsp
