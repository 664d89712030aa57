#include "qcsp/model.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

namespace qcsp {

char quantifier_letter(Quantifier q) { return q == Quantifier::Forall ? 'A' : 'E'; }

ParseError::ParseError(int line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

// ---------------------------------------------------------------------------
// Ordering

Ordering Ordering::identity(std::size_t n) {
    std::vector<VarId> seq(n);
    std::iota(seq.begin(), seq.end(), 0);
    return from_sequence(std::move(seq));
}

Ordering Ordering::from_sequence(std::vector<VarId> sequence) {
    Ordering o;
    o.rank_.assign(sequence.size(), -1);
    for (std::size_t r = 0; r < sequence.size(); ++r) {
        VarId v = sequence[r];
        if (v < 0 || static_cast<std::size_t>(v) >= sequence.size() || o.rank_[static_cast<std::size_t>(v)] != -1)
            throw std::invalid_argument("ordering is not a permutation");
        o.rank_[static_cast<std::size_t>(v)] = static_cast<int>(r);
    }
    o.sequence_ = std::move(sequence);
    return o;
}

Ordering Ordering::from_ranks(std::vector<int> ranks) {
    std::vector<VarId> seq(ranks.size(), -1);
    for (std::size_t v = 0; v < ranks.size(); ++v) {
        int r = ranks[v];
        if (r < 0 || static_cast<std::size_t>(r) >= ranks.size() || seq[static_cast<std::size_t>(r)] != -1)
            throw std::invalid_argument("ordering is not a permutation");
        seq[static_cast<std::size_t>(r)] = static_cast<VarId>(v);
    }
    return from_sequence(std::move(seq));
}

// ---------------------------------------------------------------------------
// Relation

Relation::Relation(VarId first, VarId second, std::size_t rows, std::size_t cols)
    : first_(first), second_(second), rows_(rows, ValueSet(cols)), cols_(cols, ValueSet(rows)) {}

void Relation::allow(ValueId a, ValueId b) {
    rows_.at(static_cast<std::size_t>(a)).set(static_cast<std::size_t>(b));
    cols_.at(static_cast<std::size_t>(b)).set(static_cast<std::size_t>(a));
}

bool Relation::allowed(ValueId a, ValueId b) const {
    return rows_[static_cast<std::size_t>(a)].test(static_cast<std::size_t>(b));
}

std::size_t Relation::tuple_count() const {
    std::size_t c = 0;
    for (const auto& r : rows_) c += r.count();
    return c;
}

bool Relation::complete() const {
    return std::all_of(rows_.begin(), rows_.end(), [](const ValueSet& r) { return r.all(); });
}

// ---------------------------------------------------------------------------
// Instance

std::size_t Instance::max_domain_size() const {
    std::size_t d = 0;
    for (const auto& dom : domains_) d = std::max(d, dom.size());
    return d;
}

std::optional<VarId> Instance::find_var(const std::string& name) const {
    for (std::size_t v = 0; v < vars_.size(); ++v)
        if (vars_[v].name == name) return static_cast<VarId>(v);
    return std::nullopt;
}

VarId Instance::var_id(const std::string& name) const {
    auto v = find_var(name);
    if (!v) throw std::invalid_argument("unknown variable '" + name + "'");
    return *v;
}

std::optional<ValueId> Instance::find_value(VarId v, const std::string& value) const {
    const auto& dom = domain(v);
    auto it = std::find(dom.begin(), dom.end(), value);
    if (it == dom.end()) return std::nullopt;
    return static_cast<ValueId>(it - dom.begin());
}

Instance Instance::with_prefix(Ordering prefix) const {
    if (prefix.size() != num_vars()) throw std::invalid_argument("prefix size does not match variable count");
    Instance copy = *this;
    copy.prefix_ = std::move(prefix);
    return copy;
}

const Relation* Instance::relation(VarId a, VarId b) const {
    int idx = pair_index_[static_cast<std::size_t>(a) * vars_.size() + static_cast<std::size_t>(b)];
    return idx < 0 ? nullptr : &relations_[static_cast<std::size_t>(idx)];
}

const ValueSet& Instance::supports(VarId i, VarId j, ValueId a) const {
    const Relation* r = relation(i, j);
    if (r == nullptr) return full_domain(j);
    return r->first() == i ? r->row(a) : r->col(a);
}

bool Instance::allowed(VarId i, ValueId a, VarId j, ValueId b) const {
    const Relation* r = relation(i, j);
    if (r == nullptr) return true;
    return r->first() == i ? r->allowed(a, b) : r->allowed(b, a);
}

void Instance::index() {
    const std::size_t n = vars_.size();
    full_.clear();
    for (const auto& dom : domains_) {
        ValueSet all(dom.size());
        all.set();
        full_.push_back(std::move(all));
    }
    pair_index_.assign(n * n, -1);
    neighbours_.assign(n, {});
    for (std::size_t k = 0; k < relations_.size(); ++k) {
        auto a = static_cast<std::size_t>(relations_[k].first());
        auto b = static_cast<std::size_t>(relations_[k].second());
        pair_index_[a * n + b] = pair_index_[b * n + a] = static_cast<int>(k);
        neighbours_[a].push_back(static_cast<VarId>(b));
        neighbours_[b].push_back(static_cast<VarId>(a));
    }
    for (auto& nb : neighbours_) std::sort(nb.begin(), nb.end());
}

Instance Instance::restrict_domains(const std::vector<ValueSet>& keep) const {
    if (keep.size() != num_vars()) throw std::invalid_argument("restrict_domains: one mask per variable expected");
    Instance out;
    out.vars_ = vars_;
    out.prefix_ = prefix_;
    std::vector<std::vector<ValueId>> remap(num_vars());
    for (std::size_t v = 0; v < num_vars(); ++v) {
        std::vector<std::string> dom;
        remap[v].assign(domains_[v].size(), -1);
        for (std::size_t a = 0; a < domains_[v].size(); ++a) {
            if (!keep[v].test(a)) continue;
            remap[v][a] = static_cast<ValueId>(dom.size());
            dom.push_back(domains_[v][a]);
        }
        out.domains_.push_back(std::move(dom));
    }
    for (const auto& rel : relations_) {
        auto a = static_cast<std::size_t>(rel.first());
        auto b = static_cast<std::size_t>(rel.second());
        Relation r(rel.first(), rel.second(), out.domains_[a].size(), out.domains_[b].size());
        for (std::size_t x = 0; x < rel.rows(); ++x) {
            if (remap[a][x] < 0) continue;
            for (std::size_t y = rel.row(static_cast<ValueId>(x)).find_first(); y != ValueSet::npos;
                 y = rel.row(static_cast<ValueId>(x)).find_next(y))
                if (remap[b][y] >= 0) r.allow(remap[a][x], remap[b][y]);
        }
        out.relations_.push_back(std::move(r));
    }
    out.index();
    return out;
}

bool Instance::operator==(const Instance& other) const {
    if (vars_.size() != other.vars_.size()) return false;
    for (std::size_t v = 0; v < vars_.size(); ++v)
        if (vars_[v].name != other.vars_[v].name || vars_[v].quantifier != other.vars_[v].quantifier) return false;
    return prefix_ == other.prefix_ && domains_ == other.domains_ && relations_ == other.relations_;
}

// ---------------------------------------------------------------------------
// Builder

VarId Instance::Builder::add_variable(std::string name, Quantifier q, std::vector<std::string> values) {
    for (const auto& v : vars_)
        if (v.name == name) throw std::invalid_argument("duplicate variable '" + name + "'");
    if (values.empty()) throw std::invalid_argument("variable '" + name + "' has an empty domain");
    for (std::size_t i = 0; i < values.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (values[i] == values[j])
                throw std::invalid_argument("duplicate value '" + values[i] + "' in domain of '" + name + "'");
    vars_.push_back({std::move(name), q});
    domains_.push_back(std::move(values));
    return static_cast<VarId>(vars_.size() - 1);
}

bool Instance::Builder::has_constraint(VarId a, VarId b) const {
    return relations_.count({std::min(a, b), std::max(a, b)}) != 0;
}

void Instance::Builder::add_constraint(VarId a, VarId b, const std::vector<std::pair<ValueId, ValueId>>& tuples) {
    const auto n = static_cast<VarId>(vars_.size());
    if (a < 0 || b < 0 || a >= n || b >= n) throw std::invalid_argument("constraint references an undeclared variable");
    if (a == b) throw std::invalid_argument("constraint scope must name two distinct variables");
    if (has_constraint(a, b))
        throw std::invalid_argument("duplicate constraint on pair (" + vars_[static_cast<std::size_t>(a)].name + ", " +
                                    vars_[static_cast<std::size_t>(b)].name + ")");
    const bool swap = a > b;
    VarId lo = swap ? b : a;
    VarId hi = swap ? a : b;
    Relation rel(lo, hi, domains_[static_cast<std::size_t>(lo)].size(), domains_[static_cast<std::size_t>(hi)].size());
    for (auto [x, y] : tuples) {
        if (swap) std::swap(x, y);
        if (x < 0 || y < 0 || static_cast<std::size_t>(x) >= rel.rows() || static_cast<std::size_t>(y) >= rel.cols())
            throw std::invalid_argument("constraint tuple references an out-of-domain value");
        rel.allow(x, y);
    }
    relations_.emplace(std::make_pair(lo, hi), std::move(rel));
}

Instance Instance::Builder::build() && {
    Instance inst;
    inst.vars_ = std::move(vars_);
    inst.domains_ = std::move(domains_);
    inst.prefix_ = Ordering::identity(inst.vars_.size());
    for (auto& [key, rel] : relations_) inst.relations_.push_back(std::move(rel));
    inst.index();
    return inst;
}

// ---------------------------------------------------------------------------
// Variable sets

VariableSets variable_sets(const Instance& inst, const Ordering& ord, VarId v) {
    if (v < 0 || static_cast<std::size_t>(v) >= inst.num_vars()) throw std::invalid_argument("unknown variable");
    const int n = static_cast<int>(inst.num_vars());
    const Quantifier q = inst.quantifier(v);
    const int r = ord.rank(v);
    int lo = r;
    int hi = r;
    while (lo > 0 && inst.quantifier(ord.at(lo - 1)) == q) --lo;
    while (hi + 1 < n && inst.quantifier(ord.at(hi + 1)) == q) ++hi;

    VariableSets s;
    for (int k = 0; k < n; ++k) {
        VarId u = ord.at(k);
        if (k > r) s.suc.push_back(u);
        if (k >= lo && k <= hi) {
            s.block.push_back(u);
            continue;
        }
        const bool uni = inst.is_universal(u);
        if (k < lo)
            (uni ? s.pre_universal : s.pre_existential).push_back(u);
        else
            (uni ? s.suc_universal : s.suc_existential).push_back(u);
    }
    if (!s.pre_universal.empty()) s.closest_universal = s.pre_universal.back();
    return s;
}

std::optional<VarId> closest_universal(const Instance& inst, const Ordering& ord, VarId v) {
    return variable_sets(inst, ord, v).closest_universal;
}

ValueSet supports(const Instance& inst, VarId i, VarId j, ValueId a) {
    if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= inst.num_vars() || static_cast<std::size_t>(j) >= inst.num_vars())
        throw std::invalid_argument("unknown variable");
    if (a < 0 || static_cast<std::size_t>(a) >= inst.domain_size(i)) throw std::out_of_range("value outside D(" + inst.name(i) + ")");
    return inst.supports(i, j, a);
}

// ---------------------------------------------------------------------------
// Text format

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line.substr(0, line.find('#')));
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(',', start);
        parts.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return parts;
}

}  // namespace

Instance parse_instance(std::istream& in) {
    Instance::Builder builder;
    std::string line;
    int lineno = 0;
    long declared = -1;
    std::map<std::string, VarId> ids;
    std::vector<std::map<std::string, ValueId>> values;

    while (std::getline(in, line)) {
        ++lineno;
        auto tok = tokenize(line);
        if (tok.empty()) continue;

        if (declared < 0) {
            if (tok.size() != 2 || tok[0] != "qcsp") throw ParseError(lineno, "expected header 'qcsp <n>'");
            try {
                std::size_t used = 0;
                declared = std::stol(tok[1], &used);
                if (used != tok[1].size() || declared < 0) throw std::invalid_argument("n");
            } catch (const std::exception&) {
                throw ParseError(lineno, "invalid variable count '" + tok[1] + "'");
            }
            continue;
        }

        try {
            if (tok[0] == "var") {
                if (static_cast<long>(builder.num_vars()) >= declared)
                    throw ParseError(lineno, "more var lines than declared in header");
                if (tok.size() < 4) throw ParseError(lineno, "expected 'var <name> <E|A> <values...>'");
                Quantifier q;
                if (tok[2] == "E")
                    q = Quantifier::Exists;
                else if (tok[2] == "A")
                    q = Quantifier::Forall;
                else
                    throw ParseError(lineno, "quantifier must be E or A, got '" + tok[2] + "'");
                std::vector<std::string> dom(tok.begin() + 3, tok.end());
                VarId id = builder.add_variable(tok[1], q, dom);
                ids.emplace(tok[1], id);
                std::map<std::string, ValueId> index;
                for (std::size_t k = 0; k < dom.size(); ++k) index.emplace(dom[k], static_cast<ValueId>(k));
                values.push_back(std::move(index));
            } else if (tok[0] == "con") {
                if (static_cast<long>(builder.num_vars()) != declared)
                    throw ParseError(lineno, "con line before all declared variables");
                auto colon = std::find(tok.begin(), tok.end(), ":");
                if (colon == tok.end()) throw ParseError(lineno, "expected ':' after constraint scope");
                const auto arity = colon - tok.begin() - 1;
                if (arity != 2) throw ParseError(lineno, "constraint arity must be 2, got " + std::to_string(arity));
                auto a = ids.find(tok[1]);
                auto b = ids.find(tok[2]);
                if (a == ids.end()) throw ParseError(lineno, "unknown variable '" + tok[1] + "'");
                if (b == ids.end()) throw ParseError(lineno, "unknown variable '" + tok[2] + "'");
                if (builder.has_constraint(a->second, b->second))
                    throw ParseError(lineno, "duplicate constraint on pair (" + tok[1] + ", " + tok[2] + ")");
                std::vector<std::pair<ValueId, ValueId>> tuples;
                for (auto it = colon + 1; it != tok.end(); ++it) {
                    auto parts = split_commas(*it);
                    if (parts.size() != 2)
                        throw ParseError(lineno, "tuple '" + *it + "' must have exactly 2 components");
                    auto va = values[static_cast<std::size_t>(a->second)].find(parts[0]);
                    auto vb = values[static_cast<std::size_t>(b->second)].find(parts[1]);
                    if (va == values[static_cast<std::size_t>(a->second)].end())
                        throw ParseError(lineno, "value '" + parts[0] + "' not in domain of '" + tok[1] + "'");
                    if (vb == values[static_cast<std::size_t>(b->second)].end())
                        throw ParseError(lineno, "value '" + parts[1] + "' not in domain of '" + tok[2] + "'");
                    tuples.emplace_back(va->second, vb->second);
                }
                builder.add_constraint(a->second, b->second, tuples);
            } else {
                throw ParseError(lineno, "unknown directive '" + tok[0] + "'");
            }
        } catch (const ParseError&) {
            throw;
        } catch (const std::invalid_argument& e) {
            throw ParseError(lineno, e.what());
        }
    }
    if (declared < 0) throw ParseError(lineno, "missing 'qcsp <n>' header");
    if (static_cast<long>(builder.num_vars()) != declared)
        throw ParseError(lineno, "header declares " + std::to_string(declared) + " variables, found " +
                                     std::to_string(builder.num_vars()));
    return std::move(builder).build();
}

Instance parse_instance_string(const std::string& text) {
    std::istringstream in(text);
    return parse_instance(in);
}

Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return parse_instance(in);
}

std::string serialize_instance(const Instance& inst) {
    std::ostringstream out;
    const Ordering& pi = inst.prefix();
    out << "qcsp " << inst.num_vars() << '\n';
    for (VarId v : pi.sequence()) {
        out << "var " << inst.name(v) << ' ' << quantifier_letter(inst.quantifier(v));
        for (const auto& value : inst.domain(v)) out << ' ' << value;
        out << '\n';
    }
    // Constraints listed by the prefix rank of their scope; each scope leads
    // with its prefix-earlier variable.
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
    for (auto [a, b] : scopes) {
        out << "con " << inst.name(a) << ' ' << inst.name(b) << " :";
        for (std::size_t x = 0; x < inst.domain_size(a); ++x)
            for (std::size_t y = 0; y < inst.domain_size(b); ++y)
                if (inst.allowed(a, static_cast<ValueId>(x), b, static_cast<ValueId>(y)))
                    out << ' ' << inst.value_name(a, static_cast<ValueId>(x)) << ',' << inst.value_name(b, static_cast<ValueId>(y));
        out << '\n';
    }
    return out.str();
}

}  // namespace qcsp
