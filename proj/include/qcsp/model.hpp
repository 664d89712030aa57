#ifndef QCSP_MODEL_HPP
#define QCSP_MODEL_HPP

#include <boost/dynamic_bitset.hpp>

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qcsp {

using VarId = int;
using ValueId = int;

/// Set of values of one domain, indexed by ValueId (domain order).
using ValueSet = boost::dynamic_bitset<>;

enum class Quantifier { Exists, Forall };

char quantifier_letter(Quantifier q);

struct Variable {
    std::string name;
    Quantifier quantifier = Quantifier::Exists;
};

/// Raised by the text parser; carries the 1-based line of the offending input.
class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& what);
    int line() const { return line_; }

private:
    int line_;
};

/// A bijection between variables and ranks. Ranks are 0-based here; reports
/// print them 1-based.
class Ordering {
public:
    Ordering() = default;

    static Ordering identity(std::size_t n);
    /// `sequence[r]` is the variable placed at rank r. Throws if not a permutation.
    static Ordering from_sequence(std::vector<VarId> sequence);
    /// `ranks[v]` is the rank of v. Throws if not a permutation.
    static Ordering from_ranks(std::vector<int> ranks);

    int rank(VarId v) const { return rank_[static_cast<std::size_t>(v)]; }
    VarId at(int r) const { return sequence_[static_cast<std::size_t>(r)]; }
    std::size_t size() const { return sequence_.size(); }
    const std::vector<VarId>& sequence() const { return sequence_; }
    bool before(VarId a, VarId b) const { return rank(a) < rank(b); }

    bool operator==(const Ordering&) const = default;

private:
    std::vector<int> rank_;
    std::vector<VarId> sequence_;
};

/// Binary relation between two variables. Rows are indexed by values of
/// `first`, columns by values of `second`; the column view is kept so the
/// reversed scope reads the transpose without recomputation.
class Relation {
public:
    Relation(VarId first, VarId second, std::size_t rows, std::size_t cols);

    VarId first() const { return first_; }
    VarId second() const { return second_; }
    std::size_t rows() const { return rows_.size(); }
    std::size_t cols() const { return cols_.size(); }

    void allow(ValueId a, ValueId b);
    bool allowed(ValueId a, ValueId b) const;
    const ValueSet& row(ValueId a) const { return rows_[static_cast<std::size_t>(a)]; }
    const ValueSet& col(ValueId b) const { return cols_[static_cast<std::size_t>(b)]; }
    std::size_t tuple_count() const;
    bool complete() const;

    bool operator==(const Relation&) const = default;

private:
    VarId first_;
    VarId second_;
    std::vector<ValueSet> rows_;
    std::vector<ValueSet> cols_;
};

/// Binary QCSP instance <V, Q, prefix, D, C>. Immutable once built; absent
/// constraints stand for complete relations.
class Instance {
public:
    class Builder;

    std::size_t num_vars() const { return vars_.size(); }
    std::size_t max_domain_size() const;
    std::size_t num_constraints() const { return relations_.size(); }

    const Variable& var(VarId v) const { return vars_[static_cast<std::size_t>(v)]; }
    const std::vector<Variable>& vars() const { return vars_; }
    const std::string& name(VarId v) const { return var(v).name; }
    Quantifier quantifier(VarId v) const { return var(v).quantifier; }
    bool is_universal(VarId v) const { return quantifier(v) == Quantifier::Forall; }
    bool is_existential(VarId v) const { return quantifier(v) == Quantifier::Exists; }
    std::optional<VarId> find_var(const std::string& name) const;
    VarId var_id(const std::string& name) const;

    const Ordering& prefix() const { return prefix_; }
    /// Same variables, domains and constraints under another prefix.
    Instance with_prefix(Ordering prefix) const;

    std::size_t domain_size(VarId v) const { return domains_[static_cast<std::size_t>(v)].size(); }
    const std::vector<std::string>& domain(VarId v) const { return domains_[static_cast<std::size_t>(v)]; }
    const std::string& value_name(VarId v, ValueId a) const { return domain(v)[static_cast<std::size_t>(a)]; }
    std::optional<ValueId> find_value(VarId v, const std::string& value) const;
    const ValueSet& full_domain(VarId v) const { return full_[static_cast<std::size_t>(v)]; }

    /// The stored relation for the unordered pair, if any (scope in canonical order).
    const Relation* relation(VarId a, VarId b) const;
    bool constrained(VarId a, VarId b) const { return relation(a, b) != nullptr; }
    /// All stored relations, sorted by canonical scope.
    const std::vector<Relation>& relations() const { return relations_; }
    /// Variables sharing a constraint with v.
    const std::vector<VarId>& neighbours(VarId v) const { return neighbours_[static_cast<std::size_t>(v)]; }

    /// R_ij(a): values of `j` supporting value `a` of `i`; full D(j) when unconstrained.
    const ValueSet& supports(VarId i, VarId j, ValueId a) const;
    bool allowed(VarId i, ValueId a, VarId j, ValueId b) const;

    /// Keep only the values flagged in `keep[v]`. Relations are restricted;
    /// names and relative order survive.
    Instance restrict_domains(const std::vector<ValueSet>& keep) const;

    bool operator==(const Instance& other) const;

private:
    Instance() = default;
    void index();

    std::vector<Variable> vars_;
    Ordering prefix_;
    std::vector<std::vector<std::string>> domains_;
    std::vector<ValueSet> full_;
    std::vector<Relation> relations_;
    std::vector<int> pair_index_;  // n*n table into relations_, -1 when unconstrained
    std::vector<std::vector<VarId>> neighbours_;
};

/// Incremental construction with the model invariants enforced on each call.
/// Variables are declared in prefix order.
class Instance::Builder {
public:
    VarId add_variable(std::string name, Quantifier q, std::vector<std::string> values);
    /// Tuples are (value of a, value of b). Throws on a repeated pair or a self loop.
    void add_constraint(VarId a, VarId b, const std::vector<std::pair<ValueId, ValueId>>& tuples);
    bool has_constraint(VarId a, VarId b) const;
    std::size_t num_vars() const { return vars_.size(); }
    Instance build() &&;

private:
    std::vector<Variable> vars_;
    std::vector<std::vector<std::string>> domains_;
    std::map<std::pair<VarId, VarId>, Relation> relations_;
};

struct VariableSets {
    std::vector<VarId> block;
    std::vector<VarId> pre_universal;
    std::vector<VarId> pre_existential;
    std::vector<VarId> suc_universal;
    std::vector<VarId> suc_existential;
    std::vector<VarId> suc;
    /// nullopt stands for the root sentinel x_0.
    std::optional<VarId> closest_universal;
};

/// Block/pre/suc sets of `v` under `ord`. Every list is sorted by rank in `ord`.
VariableSets variable_sets(const Instance& inst, const Ordering& ord, VarId v);

/// Closest universal variable before `v` under `ord` (outside v's block), or
/// nullopt for the root sentinel.
std::optional<VarId> closest_universal(const Instance& inst, const Ordering& ord, VarId v);

/// Checked support query; throws std::out_of_range for an out-of-domain value.
ValueSet supports(const Instance& inst, VarId i, VarId j, ValueId a);

Instance parse_instance(std::istream& in);
Instance parse_instance_string(const std::string& text);
Instance load_instance(const std::string& path);
/// Text format with variables in prefix order and tuples in row-major domain order.
std::string serialize_instance(const Instance& inst);

}  // namespace qcsp

#endif  // QCSP_MODEL_HPP
