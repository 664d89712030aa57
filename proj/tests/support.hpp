#ifndef QCSP_TESTS_SUPPORT_HPP
#define QCSP_TESTS_SUPPORT_HPP

// Test-side reference checks, written straight from the definitions with
// plain loops over values. They deliberately avoid the library's support-set
// shortcuts so that agreement means something.

#include "qcsp/generate.hpp"
#include "qcsp/model.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace qcsp::testing {

inline std::string fixture(const std::string& name) { return std::string(QCSP_FIXTURES) + "/" + name; }

inline bool ok(const Instance& p, VarId i, int a, VarId j, int b) { return p.allowed(i, a, j, b); }

inline int dom(const Instance& p, VarId v) { return static_cast<int>(p.domain_size(v)); }

/// Broken-triangle check on one triple, k last, quadruple loop.
inline bool triangle_ok(const Instance& p, VarId i, VarId j, VarId k) {
    for (int a = 0; a < dom(p, i); ++a)
        for (int b = 0; b < dom(p, j); ++b) {
            if (!ok(p, i, a, j, b)) continue;
            for (int g = 0; g < dom(p, k); ++g)
                for (int t = 0; t < dom(p, k); ++t)
                    if (ok(p, i, a, k, g) && ok(p, j, b, k, t) && !ok(p, i, a, k, t) && !ok(p, j, b, k, g)) return false;
        }
    return true;
}

inline bool literal_qbtp(const Instance& p, const Ordering& ord) {
    const int n = static_cast<int>(p.num_vars());
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            for (int c = b + 1; c < n; ++c)
                if (!triangle_ok(p, ord.at(a), ord.at(b), ord.at(c))) return false;
    return true;
}

/// Pairwise support conditions per quantifier combination, constrained pairs only.
inline bool literal_qac(const Instance& p) {
    const Ordering& ord = p.prefix();
    for (VarId x = 0; x < static_cast<VarId>(p.num_vars()); ++x)
        for (VarId y = 0; y < static_cast<VarId>(p.num_vars()); ++y) {
            if (ord.rank(x) >= ord.rank(y) || !p.constrained(x, y)) continue;
            // Left side: some partner, or every partner when y is universal.
            for (int a = 0; a < dom(p, x); ++a) {
                int partners = 0;
                for (int b = 0; b < dom(p, y); ++b) partners += ok(p, x, a, y, b);
                if (p.is_universal(y) ? partners != dom(p, y) : partners == 0) return false;
            }
            // Right side: some partner, or every partner when both are universal.
            for (int b = 0; b < dom(p, y); ++b) {
                int partners = 0;
                for (int a = 0; a < dom(p, x); ++a) partners += ok(p, x, a, y, b);
                bool all = p.is_universal(x) && p.is_universal(y);
                if (all ? partners != dom(p, x) : partners == 0) return false;
            }
        }
    return true;
}

/// Every consistent assignment to k-1 variables extends to any later k-th
/// one: all values if universal, some value if existential.
inline bool literal_directional(const Instance& p, int k) {
    const int n = static_cast<int>(p.num_vars());
    const Ordering& ord = p.prefix();
    std::vector<bool> mask(static_cast<std::size_t>(n), false);
    std::fill(mask.end() - k, mask.end(), true);
    do {
        std::vector<VarId> vars;
        for (int r = 0; r < n; ++r)
            if (mask[static_cast<std::size_t>(r)]) vars.push_back(ord.at(r));
        const VarId last = vars.back();
        vars.pop_back();
        // Odometer over the first k-1 variables.
        std::vector<int> val(vars.size(), 0);
        while (true) {
            bool consistent = true;
            for (std::size_t s = 0; s < vars.size() && consistent; ++s)
                for (std::size_t t = s + 1; t < vars.size() && consistent; ++t) consistent = ok(p, vars[s], val[s], vars[t], val[t]);
            if (consistent) {
                int good = 0;
                for (int c = 0; c < dom(p, last); ++c) {
                    bool fits = true;
                    for (std::size_t s = 0; s < vars.size() && fits; ++s) fits = ok(p, vars[s], val[s], last, c);
                    good += fits;
                }
                if (p.is_universal(last) ? good != dom(p, last) : good == 0) return false;
            }
            std::size_t s = 0;
            while (s < vars.size() && ++val[s] == dom(p, vars[s])) val[s++] = 0;
            if (s == vars.size()) break;
        }
    } while (std::next_permutation(mask.begin(), mask.end()));
    return true;
}

/// pre-universal sets grow (for existentials) and universals keep their order.
inline bool literal_semi_compatible(const Instance& p, const Ordering& pi, const Ordering& delta) {
    const int n = static_cast<int>(p.num_vars());
    for (VarId a = 0; a < n; ++a)
        for (VarId b = 0; b < n; ++b) {
            if (!p.is_universal(a) || pi.rank(a) >= pi.rank(b)) continue;
            if (delta.rank(a) >= delta.rank(b)) return false;
        }
    return true;
}

inline Ordering random_semi_compatible(const Instance& p, std::mt19937_64& rng) {
    const int n = static_cast<int>(p.num_vars());
    std::vector<VarId> seq(static_cast<std::size_t>(n));
    std::iota(seq.begin(), seq.end(), 0);
    while (true) {
        std::shuffle(seq.begin(), seq.end(), rng);
        Ordering d = Ordering::from_sequence(seq);
        if (literal_semi_compatible(p, p.prefix(), d)) return d;
    }
}

/// Corpus member `index` of a mixed-pattern family. Sizes cycle so every
/// (n, d) combination in range appears.
inline GenParams corpus_params(std::uint64_t index, int n_min, int n_max, int d_min, int d_max) {
    GenParams g;
    g.n = n_min + static_cast<int>(index % static_cast<std::uint64_t>(n_max - n_min + 1));
    g.d = d_min + static_cast<int>((index / 7) % static_cast<std::uint64_t>(d_max - d_min + 1));
    g.pattern = random_pattern(g.n, index * 7919 + 13);
    g.density = 0.25 + 0.08 * static_cast<double>(index % 6);
    g.tuple_density = 0.65 + 0.1 * static_cast<double>(index % 4);
    g.structured = 0.5;
    g.forall_pairs = false;
    g.seed = index;
    return g;
}

}  // namespace qcsp::testing

#endif  // QCSP_TESTS_SUPPORT_HPP
