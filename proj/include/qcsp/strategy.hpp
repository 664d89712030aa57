#ifndef QCSP_STRATEGY_HPP
#define QCSP_STRATEGY_HPP

#include "qcsp/model.hpp"

#include "json.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qcsp {

/// Sequence of assignments along one root-to-leaf path, in level order.
using Scenario = std::vector<std::pair<VarId, ValueId>>;

/// Explicit strategy tree. Level l (1-based) holds variable levels()[l-1];
/// node 0 is the value-less root standing for x_0.
class StrategyTree {
public:
    struct Node {
        ValueId value = -1;
        std::vector<int> children;
    };

    StrategyTree() : StrategyTree(std::vector<VarId>{}) {}
    explicit StrategyTree(std::vector<VarId> levels);

    const std::vector<VarId>& levels() const { return levels_; }
    std::size_t depth() const { return levels_.size(); }
    static constexpr int root() { return 0; }
    const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
    std::size_t size() const { return nodes_.size(); }

    int add_child(int parent, ValueId value);

    /// Node ids at a level (0 = root) in left-to-right order.
    std::vector<int> nodes_at_level(std::size_t level) const;
    std::vector<Scenario> scenarios() const;
    std::size_t leaf_count() const;

private:
    friend class TreeSurgery;
    std::vector<VarId> levels_;
    std::vector<Node> nodes_;
};

/// Thrown when a construction would exceed the node budget.
class StrategySizeError : public std::runtime_error {
public:
    StrategySizeError(std::size_t needed, std::size_t limit);
    std::size_t needed() const { return needed_; }

private:
    std::size_t needed_;
};

/// A construction step found no admissible value. This means a class
/// precondition did not actually hold, i.e. a defect in the caller.
class ConstructionDefect : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline constexpr std::size_t kDefaultNodeLimit = 1'000'000;

/// Number of nodes (root included) of any strategy under `ord`.
std::size_t strategy_node_count(const Instance& inst, const Ordering& ord);

struct StrategyCheck {
    enum class Status { Valid, Inconsistent, Malformed };
    Status status = Status::Valid;
    std::optional<Scenario> scenario;
    std::optional<std::pair<VarId, VarId>> violated;
    std::string message;

    bool valid() const { return status == Status::Valid; }
};

/// Structure (branching, depth, domains) first, then every scenario against
/// every constraint; reports the leftmost failing scenario.
StrategyCheck verify_strategy(const Instance& inst, const StrategyTree& s, const Ordering& ord);

enum class ValueRule {
    /// Smallest admissible value in domain order.
    Smallest,
    /// min over the path of max(R(alpha)), the min-of-max witness.
    MinOfMax,
};

/// Level-by-level construction for a directionally globally consistent
/// instance; universal levels fan out, existential levels pick by `rule`.
StrategyTree build_solution(const Instance& inst, const Ordering& ord, ValueRule rule = ValueRule::Smallest,
                            std::size_t node_limit = kDefaultNodeLimit);

/// For every node at the level of `xi` (the root when xi is nullopt), the
/// nodes at the level of `xj` below it share one label.
bool is_compatible(const StrategyTree& s, const Instance& inst, const Ordering& ord, std::optional<VarId> xi, VarId xj);

/// Strategy under `delta` that is compatible with the closest preceding
/// universal under `pi` for every existential, built by choosing one value
/// per subtree of that universal.
StrategyTree build_compatible_solution(const Instance& inst, const Ordering& pi, const Ordering& delta,
                                       ValueRule rule = ValueRule::Smallest, std::size_t node_limit = kDefaultNodeLimit);

struct ShiftResult {
    StrategyTree tree;
    Ordering omega;
};

/// Moves each existential level up to just below its closest preceding
/// universal under `pi`, merging the collapsed nodes. Scenario assignment
/// sets are preserved and `pi` is block-compatible with the result.
ShiftResult shift_levels(const StrategyTree& s, const Instance& inst, const Ordering& pi, const Ordering& delta);

/// Permutes levels inside each block so the level order becomes `pi`.
StrategyTree reorder_blocks(const StrategyTree& s, const Instance& inst, const Ordering& omega, const Ordering& pi);

/// Re-expresses value ids of `s` (built on `from`) in the domains of `to`, by value name.
StrategyTree translate_strategy(const StrategyTree& s, const Instance& from, const Instance& to);

/// Scenario assignment sets, each sorted by variable, the whole list sorted.
std::vector<Scenario> scenario_multiset(const StrategyTree& s);

nlohmann::json to_json(const Instance& inst, const StrategyTree& s);
/// Inverse of to_json. Throws std::invalid_argument on unknown names or a
/// node whose variable does not match its level.
StrategyTree strategy_from_json(const Instance& inst, const nlohmann::json& j);

nlohmann::json to_json(const Instance& inst, const Scenario& sc);

}  // namespace qcsp

#endif  // QCSP_STRATEGY_HPP
