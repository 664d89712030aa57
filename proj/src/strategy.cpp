#include "qcsp/strategy.hpp"

#include "qcsp/ordering.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace qcsp {

StrategyTree::StrategyTree(std::vector<VarId> levels) : levels_(std::move(levels)), nodes_(1) {}

int StrategyTree::add_child(int parent, ValueId value) {
    nodes_.push_back(Node{value, {}});
    const int id = static_cast<int>(nodes_.size() - 1);
    nodes_[static_cast<std::size_t>(parent)].children.push_back(id);
    return id;
}

std::vector<int> StrategyTree::nodes_at_level(std::size_t level) const {
    std::vector<int> current{root()};
    for (std::size_t l = 0; l < level; ++l) {
        std::vector<int> next;
        for (int id : current)
            for (int c : node(id).children) next.push_back(c);
        current = std::move(next);
    }
    return current;
}

std::vector<Scenario> StrategyTree::scenarios() const {
    std::vector<Scenario> out;
    Scenario path;
    std::function<void(int, std::size_t)> walk = [&](int id, std::size_t depth) {
        if (node(id).children.empty()) {
            out.push_back(path);
            return;
        }
        for (int c : node(id).children) {
            path.emplace_back(depth < levels_.size() ? levels_[depth] : -1, node(c).value);
            walk(c, depth + 1);
            path.pop_back();
        }
    };
    walk(root(), 0);
    return out;
}

std::size_t StrategyTree::leaf_count() const {
    std::size_t leaves = 0;
    for (const auto& n : nodes_)
        if (n.children.empty()) ++leaves;
    return leaves;
}

StrategySizeError::StrategySizeError(std::size_t needed, std::size_t limit)
    : std::runtime_error("strategy needs " + std::to_string(needed) + " nodes, limit is " + std::to_string(limit)),
      needed_(needed) {}

std::size_t strategy_node_count(const Instance& inst, const Ordering& ord) {
    std::size_t total = 1;
    std::size_t width = 1;
    for (VarId v : ord.sequence()) {
        if (inst.is_universal(v)) {
            if (width > kDefaultNodeLimit * 1024 / inst.domain_size(v)) return static_cast<std::size_t>(-1);
            width *= inst.domain_size(v);
        }
        total += width;
    }
    return total;
}

namespace {

void check_size(const Instance& inst, const Ordering& ord, std::size_t limit) {
    std::size_t needed = strategy_node_count(inst, ord);
    if (needed > limit) throw StrategySizeError(needed, limit);
}

std::optional<ValueId> max_of(const ValueSet& s) {
    for (std::size_t g = s.size(); g-- > 0;)
        if (s.test(g)) return static_cast<ValueId>(g);
    return std::nullopt;
}

/// Chooses the value for existential `v` given the assignments on a path.
/// `path` holds (variable, value) pairs of earlier levels.
std::optional<ValueId> choose_value(const Instance& inst, VarId v, const Scenario& path, ValueRule rule) {
    ValueSet candidates = inst.full_domain(v);
    for (auto [u, a] : path) candidates &= inst.supports(u, v, a);
    if (candidates.none()) return std::nullopt;
    if (rule == ValueRule::Smallest) return static_cast<ValueId>(candidates.find_first());
    ValueId gamma = static_cast<ValueId>(inst.domain_size(v) - 1);
    for (auto [u, a] : path) {
        auto m = max_of(inst.supports(u, v, a));
        if (!m) return std::nullopt;
        gamma = std::min(gamma, *m);
    }
    if (!candidates.test(static_cast<std::size_t>(gamma))) return std::nullopt;
    return gamma;
}

Scenario path_to(const std::vector<int>& parent, const StrategyTree& t, int id, const std::vector<int>& depth) {
    Scenario path;
    while (id != StrategyTree::root()) {
        path.emplace_back(t.levels()[static_cast<std::size_t>(depth[static_cast<std::size_t>(id)] - 1)], t.node(id).value);
        id = parent[static_cast<std::size_t>(id)];
    }
    std::reverse(path.begin(), path.end());
    return path;
}

void require_levels(const StrategyTree& s, const Ordering& ord) {
    if (s.levels() != ord.sequence()) throw std::invalid_argument("strategy levels do not follow the given ordering");
}

}  // namespace

// ---------------------------------------------------------------------------
// Verification

StrategyCheck verify_strategy(const Instance& inst, const StrategyTree& s, const Ordering& ord) {
    StrategyCheck out;
    auto malformed = [&](std::string msg) {
        out.status = StrategyCheck::Status::Malformed;
        out.message = std::move(msg);
        return out;
    };
    if (ord.size() != inst.num_vars()) return malformed("ordering does not cover the instance");
    if (s.levels() != ord.sequence()) return malformed("strategy levels do not follow the ordering");
    const std::size_t n = inst.num_vars();

    // Structure.
    std::vector<std::pair<int, std::size_t>> stack{{StrategyTree::root(), 0}};
    while (!stack.empty()) {
        auto [id, depth] = stack.back();
        stack.pop_back();
        const auto& node = s.node(id);
        if (depth == n) {
            if (!node.children.empty()) return malformed("node below the last level");
            continue;
        }
        const VarId next = s.levels()[depth];
        if (inst.is_universal(next)) {
            std::vector<bool> seen(inst.domain_size(next), false);
            if (node.children.size() != inst.domain_size(next))
                return malformed("universal level " + std::to_string(depth + 1) + " (" + inst.name(next) + ") must branch on every value");
            for (int c : node.children) {
                ValueId a = s.node(c).value;
                if (a < 0 || static_cast<std::size_t>(a) >= seen.size() || seen[static_cast<std::size_t>(a)])
                    return malformed("universal level " + std::to_string(depth + 1) + " (" + inst.name(next) + ") must use each value once");
                seen[static_cast<std::size_t>(a)] = true;
            }
        } else {
            if (node.children.size() != 1)
                return malformed("existential level " + std::to_string(depth + 1) + " (" + inst.name(next) + ") must have one child per node");
            ValueId a = s.node(node.children[0]).value;
            if (a < 0 || static_cast<std::size_t>(a) >= inst.domain_size(next))
                return malformed("value outside the domain of " + inst.name(next));
        }
        for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) stack.emplace_back(*it, depth + 1);
    }

    // Consistency, leftmost scenario first.
    Scenario path;
    std::function<bool(int)> walk = [&](int id) -> bool {
        for (int c : s.node(id).children) {
            const VarId v = s.levels()[path.size()];
            const ValueId a = s.node(c).value;
            for (auto [u, b] : path) {
                if (inst.allowed(u, b, v, a)) continue;
                Scenario scenario = path;
                scenario.emplace_back(v, a);
                for (int leaf = c; !s.node(leaf).children.empty();) {
                    leaf = s.node(leaf).children.front();
                    scenario.emplace_back(s.levels()[scenario.size()], s.node(leaf).value);
                }
                out.status = StrategyCheck::Status::Inconsistent;
                out.scenario = std::move(scenario);
                out.violated = std::make_pair(u, v);
                out.message = "constraint (" + inst.name(u) + ", " + inst.name(v) + ") violated";
                return false;
            }
            path.emplace_back(v, a);
            bool ok = walk(c);
            path.pop_back();
            if (!ok) return false;
        }
        return true;
    };
    walk(StrategyTree::root());
    return out;
}

// ---------------------------------------------------------------------------
// Construction

StrategyTree build_solution(const Instance& inst, const Ordering& ord, ValueRule rule, std::size_t node_limit) {
    check_size(inst, ord, node_limit);
    StrategyTree tree(ord.sequence());
    Scenario path;
    std::function<void(int)> grow = [&](int id) {
        if (path.size() == inst.num_vars()) return;
        const VarId v = ord.at(static_cast<int>(path.size()));
        if (inst.is_universal(v)) {
            for (std::size_t a = 0; a < inst.domain_size(v); ++a) {
                int c = tree.add_child(id, static_cast<ValueId>(a));
                path.emplace_back(v, static_cast<ValueId>(a));
                grow(c);
                path.pop_back();
            }
            return;
        }
        auto a = choose_value(inst, v, path, rule);
        if (!a) throw ConstructionDefect("no consistent value for " + inst.name(v) + " at level " + std::to_string(path.size() + 1));
        int c = tree.add_child(id, *a);
        path.emplace_back(v, *a);
        grow(c);
        path.pop_back();
    };
    grow(StrategyTree::root());
    return tree;
}

StrategyTree build_compatible_solution(const Instance& inst, const Ordering& pi, const Ordering& delta, ValueRule rule,
                                       std::size_t node_limit) {
    check_size(inst, delta, node_limit);
    StrategyTree tree(delta.sequence());
    std::vector<int> parent{-1};
    std::vector<int> depth{0};
    auto add = [&](int p, ValueId a) {
        int c = tree.add_child(p, a);
        parent.push_back(p);
        depth.push_back(depth[static_cast<std::size_t>(p)] + 1);
        return c;
    };

    std::vector<int> frontier{StrategyTree::root()};
    for (std::size_t level = 0; level < inst.num_vars(); ++level) {
        const VarId v = delta.at(static_cast<int>(level));
        std::vector<int> next;
        if (inst.is_universal(v)) {
            for (int leaf : frontier)
                for (std::size_t a = 0; a < inst.domain_size(v); ++a) next.push_back(add(leaf, static_cast<ValueId>(a)));
            frontier = std::move(next);
            continue;
        }
        const auto anchor_pi = closest_universal(inst, pi, v);
        const auto anchor_delta = closest_universal(inst, delta, v);
        if (anchor_pi == anchor_delta) {
            for (int leaf : frontier) {
                auto a = choose_value(inst, v, path_to(parent, tree, leaf, depth), rule);
                if (!a) throw ConstructionDefect("no consistent value for " + inst.name(v));
                next.push_back(add(leaf, *a));
            }
            frontier = std::move(next);
            continue;
        }

        // Group the current leaves by their ancestor at the level of the
        // closest universal under pi (the root for x_0).
        const int anchor_depth = anchor_pi ? delta.rank(*anchor_pi) + 1 : 0;
        std::map<int, std::vector<int>> groups;
        std::vector<int> group_order;
        for (int leaf : frontier) {
            int w = leaf;
            while (depth[static_cast<std::size_t>(w)] > anchor_depth) w = parent[static_cast<std::size_t>(w)];
            if (!groups.count(w)) group_order.push_back(w);
            groups[w].push_back(leaf);
        }
        for (int w : group_order) {
            std::set<std::pair<VarId, ValueId>> seen;
            for (int leaf : groups[w])
                for (const auto& asg : path_to(parent, tree, leaf, depth)) seen.insert(asg);
            std::vector<const ValueSet*> sets;
            for (auto [u, a] : seen) sets.push_back(&inst.supports(u, v, a));

            ValueId chosen = -1;
            if (rule == ValueRule::Smallest) {
                const ValueSet* minimal = &inst.full_domain(v);
                for (const ValueSet* s : sets)
                    if (s->count() < minimal->count()) minimal = s;
                for (const ValueSet* s : sets)
                    if (!minimal->is_subset_of(*s))
                        throw ConstructionDefect("support sets for " + inst.name(v) + " are not totally ordered by inclusion");
                if (minimal->none()) throw ConstructionDefect("empty minimal support set for " + inst.name(v));
                chosen = static_cast<ValueId>(minimal->find_first());
            } else {
                chosen = static_cast<ValueId>(inst.domain_size(v) - 1);
                for (const ValueSet* s : sets) {
                    auto m = max_of(*s);
                    if (!m) throw ConstructionDefect("empty support set for " + inst.name(v));
                    chosen = std::min(chosen, *m);
                }
                for (const ValueSet* s : sets)
                    if (!s->test(static_cast<std::size_t>(chosen)))
                        throw ConstructionDefect("min-of-max value for " + inst.name(v) + " is not shared by all supports");
            }
            for (int leaf : groups[w]) next.push_back(add(leaf, chosen));
        }
        frontier = std::move(next);
    }
    return tree;
}

bool is_compatible(const StrategyTree& s, const Instance& inst, const Ordering& ord, std::optional<VarId> xi, VarId xj) {
    require_levels(s, ord);
    if (xi && !inst.is_universal(*xi)) throw std::invalid_argument("compatibility anchor must be universal");
    if (!inst.is_existential(xj)) throw std::invalid_argument("compatibility target must be existential");
    const std::size_t anchor_level = xi ? static_cast<std::size_t>(ord.rank(*xi)) + 1 : 0;
    const std::size_t target_level = static_cast<std::size_t>(ord.rank(xj)) + 1;
    if (!(anchor_level < target_level) || target_level > s.depth())
        throw std::invalid_argument("compatibility requires ord(xi) < ord(xj) <= depth");

    for (int w : s.nodes_at_level(anchor_level)) {
        std::vector<int> current{w};
        for (std::size_t l = anchor_level; l < target_level; ++l) {
            std::vector<int> next;
            for (int id : current)
                for (int c : s.node(id).children) next.push_back(c);
            current = std::move(next);
        }
        for (int id : current)
            if (s.node(id).value != s.node(current.front()).value) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Transformations

class TreeSurgery {
public:
    explicit TreeSurgery(const StrategyTree& t) : tree_(t) {}

    std::vector<VarId>& levels() { return tree_.levels_; }
    std::vector<StrategyTree::Node>& nodes() { return tree_.nodes_; }

    std::vector<int> at_level(std::size_t level) const { return tree_.nodes_at_level(level); }

    /// Nodes `levels_below` levels under w.
    std::vector<int> descendants(int w, std::size_t levels_below) const {
        std::vector<int> current{w};
        for (std::size_t l = 0; l < levels_below; ++l) {
            std::vector<int> next;
            for (int id : current)
                for (int c : tree_.nodes_[static_cast<std::size_t>(id)].children) next.push_back(c);
            current = std::move(next);
        }
        return current;
    }

    int new_node(ValueId value) {
        tree_.nodes_.push_back({value, {}});
        return static_cast<int>(tree_.nodes_.size() - 1);
    }

    /// Copy holding only nodes reachable from the root, in depth-first order.
    StrategyTree compact() const {
        StrategyTree out(tree_.levels_);
        std::function<void(int, int)> copy = [&](int src, int dst) {
            for (int c : tree_.nodes_[static_cast<std::size_t>(src)].children)
                copy(c, out.add_child(dst, tree_.nodes_[static_cast<std::size_t>(c)].value));
        };
        copy(StrategyTree::root(), StrategyTree::root());
        return out;
    }

private:
    StrategyTree tree_;
};

ShiftResult shift_levels(const StrategyTree& s, const Instance& inst, const Ordering& pi, const Ordering& delta) {
    require_levels(s, delta);
    TreeSurgery t(s);
    std::vector<VarId>& levels = t.levels();

    for (VarId x : delta.sequence()) {
        if (!inst.is_existential(x)) continue;
        const auto anchor = closest_universal(inst, pi, x);
        const auto pos_x = static_cast<std::size_t>(std::find(levels.begin(), levels.end(), x) - levels.begin());
        const std::size_t anchor_level =
            anchor ? static_cast<std::size_t>(std::find(levels.begin(), levels.end(), *anchor) - levels.begin()) + 1 : 0;
        if (anchor && anchor_level > pos_x)
            throw std::invalid_argument("closest universal of " + inst.name(x) + " under pi is not above it in the strategy");
        bool crosses_universal = false;
        for (std::size_t l = anchor_level; l < pos_x; ++l) crosses_universal |= inst.is_universal(levels[l]);
        if (!crosses_universal) continue;

        const std::size_t x_level = pos_x + 1;
        for (int w : t.at_level(anchor_level)) {
            // Parents of the x-level nodes under w; each has exactly one child
            // because x is existential.
            std::vector<int> parents = t.descendants(w, x_level - 1 - anchor_level);
            std::optional<ValueId> label;
            for (int p : parents) {
                const auto& kids = t.nodes()[static_cast<std::size_t>(p)].children;
                if (kids.size() != 1) throw std::invalid_argument("malformed existential level for " + inst.name(x));
                ValueId a = t.nodes()[static_cast<std::size_t>(kids[0])].value;
                if (label && *label != a)
                    throw std::invalid_argument("strategy is not compatible for " + inst.name(x) + ": differing labels below one anchor node");
                label = a;
            }
            for (int p : parents) {
                auto& pn = t.nodes()[static_cast<std::size_t>(p)];
                int xnode = pn.children[0];
                pn.children = t.nodes()[static_cast<std::size_t>(xnode)].children;
            }
            int fresh = t.new_node(*label);
            t.nodes()[static_cast<std::size_t>(fresh)].children = std::move(t.nodes()[static_cast<std::size_t>(w)].children);
            t.nodes()[static_cast<std::size_t>(w)].children = {fresh};
        }
        levels.erase(levels.begin() + static_cast<std::ptrdiff_t>(pos_x));
        levels.insert(levels.begin() + static_cast<std::ptrdiff_t>(anchor_level), x);
    }

    ShiftResult out{t.compact(), Ordering::from_sequence(levels)};
    if (!is_block_compatible(inst, pi, out.omega))
        throw ConstructionDefect("shifted ordering is not block-compatible with the prefix");
    return out;
}

StrategyTree reorder_blocks(const StrategyTree& s, const Instance& inst, const Ordering& omega, const Ordering& pi) {
    require_levels(s, omega);
    if (!is_block_compatible(inst, pi, omega)) throw std::invalid_argument("prefix is not block-compatible with the strategy ordering");

    auto blocks = [&](const Ordering& ord) {
        std::vector<std::vector<VarId>> out;
        for (VarId v : ord.sequence()) {
            if (out.empty() || inst.quantifier(out.back().front()) != inst.quantifier(v)) out.emplace_back();
            out.back().push_back(v);
        }
        return out;
    };
    const auto from = blocks(omega);
    const auto to = blocks(pi);
    if (from.size() != to.size()) throw std::invalid_argument("orderings have different block structure");

    TreeSurgery t(s);
    std::size_t start = 0;
    for (std::size_t b = 0; b < from.size(); ++b) {
        auto sorted_from = from[b];
        auto sorted_to = to[b];
        std::sort(sorted_from.begin(), sorted_from.end());
        std::sort(sorted_to.begin(), sorted_to.end());
        if (sorted_from != sorted_to) throw std::invalid_argument("block " + std::to_string(b + 1) + " differs between orderings");
        if (inst.is_universal(from[b].front())) {
            if (from[b] != to[b]) throw std::invalid_argument("universal block order differs between orderings");
        } else if (from[b] != to[b]) {
            // Existential block: every node above it starts a single chain.
            for (int w : t.at_level(start)) {
                std::vector<int> chain;
                int cur = w;
                for (std::size_t l = 0; l < from[b].size(); ++l) {
                    cur = t.nodes()[static_cast<std::size_t>(cur)].children.at(0);
                    chain.push_back(cur);
                }
                std::map<VarId, ValueId> value_of;
                for (std::size_t l = 0; l < chain.size(); ++l)
                    value_of[from[b][l]] = t.nodes()[static_cast<std::size_t>(chain[l])].value;
                for (std::size_t l = 0; l < chain.size(); ++l)
                    t.nodes()[static_cast<std::size_t>(chain[l])].value = value_of[to[b][l]];
            }
        }
        start += from[b].size();
    }
    t.levels() = pi.sequence();
    return t.compact();
}

StrategyTree translate_strategy(const StrategyTree& s, const Instance& from, const Instance& to) {
    StrategyTree out(s.levels());
    std::function<void(int, int, std::size_t)> copy = [&](int src, int dst, std::size_t depth) {
        for (int c : s.node(src).children) {
            const VarId v = s.levels()[depth];
            auto a = to.find_value(v, from.value_name(v, s.node(c).value));
            if (!a) throw std::invalid_argument("value " + from.value_name(v, s.node(c).value) + " missing from target instance");
            copy(c, out.add_child(dst, *a), depth + 1);
        }
    };
    copy(StrategyTree::root(), StrategyTree::root(), 0);
    return out;
}

std::vector<Scenario> scenario_multiset(const StrategyTree& s) {
    auto all = s.scenarios();
    for (auto& sc : all) std::sort(sc.begin(), sc.end());
    std::sort(all.begin(), all.end());
    return all;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const Instance& inst, const StrategyTree& s) {
    std::function<nlohmann::json(int, std::size_t)> emit = [&](int id, std::size_t depth) {
        nlohmann::json kids = nlohmann::json::array();
        for (int c : s.node(id).children) {
            const VarId v = s.levels()[depth];
            nlohmann::json child;
            child["var"] = inst.name(v);
            child["value"] = inst.value_name(v, s.node(c).value);
            child["children"] = emit(c, depth + 1);
            kids.push_back(std::move(child));
        }
        return kids;
    };
    nlohmann::json j;
    j["ordering"] = nlohmann::json::array();
    for (VarId v : s.levels()) j["ordering"].push_back(inst.name(v));
    j["root"] = {{"children", emit(StrategyTree::root(), 0)}};
    return j;
}

StrategyTree strategy_from_json(const Instance& inst, const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("ordering") || !j.contains("root"))
        throw std::invalid_argument("strategy JSON needs 'ordering' and 'root'");
    std::vector<VarId> levels;
    for (const auto& name : j.at("ordering")) levels.push_back(inst.var_id(name.get<std::string>()));
    StrategyTree tree(levels);
    std::function<void(const nlohmann::json&, int, std::size_t)> read = [&](const nlohmann::json& node, int id, std::size_t depth) {
        if (!node.contains("children")) return;
        for (const auto& child : node.at("children")) {
            if (depth >= levels.size()) throw std::invalid_argument("strategy deeper than its ordering");
            const VarId v = levels[depth];
            if (child.at("var").get<std::string>() != inst.name(v))
                throw std::invalid_argument("node variable '" + child.at("var").get<std::string>() + "' does not match level " +
                                            std::to_string(depth + 1));
            const auto value = child.at("value").get<std::string>();
            auto a = inst.find_value(v, value);
            if (!a) throw std::invalid_argument("value '" + value + "' not in domain of " + inst.name(v));
            read(child, tree.add_child(id, *a), depth + 1);
        }
    };
    read(j.at("root"), StrategyTree::root(), 0);
    return tree;
}

nlohmann::json to_json(const Instance& inst, const Scenario& sc) {
    nlohmann::json arr = nlohmann::json::array();
    for (auto [v, a] : sc) arr.push_back({{"var", inst.name(v)}, {"value", inst.value_name(v, a)}});
    return arr;
}

}  // namespace qcsp
