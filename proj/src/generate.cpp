#include "qcsp/generate.hpp"

#include "qcsp/patterns.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <tuple>

namespace qcsp {

namespace {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    std::uint64_t below(std::uint64_t bound) { return engine_() % bound; }
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    bool chance(double p) { return unit() < p; }

private:
    std::mt19937_64 engine_;
};

using Tuples = std::vector<std::pair<ValueId, ValueId>>;

Tuples random_relation(Rng& rng, int rows, int cols, const GenParams& p) {
    Tuples t;
    if (!rng.chance(p.structured)) {
        for (int a = 0; a < rows; ++a)
            for (int b = 0; b < cols; ++b)
                if (rng.chance(p.tuple_density)) t.emplace_back(a, b);
        return t;
    }
    switch (rng.below(3)) {
        case 0: {
            // Support sets are up-sets of one random permutation, hence nested.
            std::vector<int> perm(static_cast<std::size_t>(cols));
            std::iota(perm.begin(), perm.end(), 0);
            for (int i = cols - 1; i > 0; --i) std::swap(perm[static_cast<std::size_t>(i)], perm[rng.below(static_cast<std::uint64_t>(i) + 1)]);
            for (int a = 0; a < rows; ++a) {
                auto from = rng.below(static_cast<std::uint64_t>(cols));
                for (auto r = from; r < static_cast<std::uint64_t>(cols); ++r) t.emplace_back(a, perm[r]);
            }
            break;
        }
        case 1:
            for (int a = 0; a < rows; ++a) {
                auto upto = rng.below(static_cast<std::uint64_t>(cols));
                for (std::uint64_t b = 0; b <= upto; ++b) t.emplace_back(a, static_cast<ValueId>(b));
            }
            break;
        default:
            for (int a = 0; a < rows; ++a) {
                for (int b = 0; b + 1 < cols; ++b)
                    if (rng.chance(p.tuple_density)) t.emplace_back(a, b);
                t.emplace_back(a, cols - 1);
            }
            break;
    }
    return t;
}

struct Draft {
    std::vector<std::tuple<VarId, VarId, Tuples>> constraints;
};

Instance assemble(const GenParams& p, int upto, const Draft& draft) {
    Instance::Builder b;
    for (int v = 0; v < upto; ++v) {
        std::vector<std::string> values;
        for (int a = 0; a < p.d; ++a) values.push_back(std::to_string(a));
        b.add_variable("x" + std::to_string(v + 1), p.pattern[static_cast<std::size_t>(v)] == 'A' ? Quantifier::Forall : Quantifier::Exists,
                       std::move(values));
    }
    for (const auto& [i, k, tuples] : draft.constraints) b.add_constraint(i, k, tuples);
    return std::move(b).build();
}

bool last_variable_ok(const Instance& inst, EnsureClass target, VarId k) {
    for (VarId i = 0; i < k; ++i)
        for (VarId j = i + 1; j < k; ++j) {
            TripleWitness w = target == EnsureClass::Qbtp ? qbtp_triple(inst, i, j, k) : qmme_triple(inst, i, j, k);
            if (!w.holds) return false;
        }
    return true;
}

}  // namespace

Instance generate_instance(const GenParams& p) {
    if (p.n < 1 || p.d < 1) throw std::invalid_argument("generator needs n >= 1 and d >= 1");
    if (static_cast<int>(p.pattern.size()) != p.n)
        throw std::invalid_argument("pattern length " + std::to_string(p.pattern.size()) + " does not match n = " + std::to_string(p.n));
    if (p.pattern.find_first_not_of("EA") != std::string::npos)
        throw std::invalid_argument("pattern may only contain E and A, got '" + p.pattern + "'");
    for (double x : {p.density, p.tuple_density, p.structured})
        if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("densities must lie in [0, 1]");

    Rng rng(p.seed);
    Draft draft;
    long total_attempts = 0;
    for (VarId k = 0; k < p.n; ++k) {
        const std::size_t kept = draft.constraints.size();
        for (int attempt = 1;; ++attempt) {
            ++total_attempts;
            draft.constraints.resize(kept);
            for (VarId i = 0; i < k; ++i)
                if (rng.chance(p.density) && (p.forall_pairs || p.pattern[static_cast<std::size_t>(i)] != 'A' ||
                                              p.pattern[static_cast<std::size_t>(k)] != 'A')) draft.constraints.emplace_back(i, k, random_relation(rng, p.d, p.d, p));
            if (!p.ensure || k < 2) break;
            if (last_variable_ok(assemble(p, k + 1, draft), *p.ensure, k)) break;
            if (attempt >= p.max_attempts)
                throw GenerationError("attempt cap exceeded at variable x" + std::to_string(k + 1) + " after " +
                                          std::to_string(total_attempts) + " attempts",
                                      total_attempts);
        }
    }
    return assemble(p, p.n, draft);
}

std::string random_pattern(int n, std::uint64_t seed) {
    Rng rng(seed);
    std::string s;
    for (int i = 0; i < n; ++i) s.push_back(rng.chance(0.5) ? 'A' : 'E');
    return s;
}

}  // namespace qcsp
