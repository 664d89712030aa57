#include "doctest.h"
#include "support.hpp"

#include "qcsp/consistency.hpp"
#include "qcsp/oracle.hpp"
#include "qcsp/ordering.hpp"
#include "qcsp/patterns.hpp"

#include <random>

using namespace qcsp;
using namespace qcsp::testing;

namespace {

using Source = OrderingProblem::Source;

// Every assignment in {1..n}^n, smallest first.
std::optional<std::vector<int>> enumerate_solution(const OrderingProblem& prob) {
    const int n = prob.num_vars;
    std::vector<int> pos(static_cast<std::size_t>(n), 1);
    while (true) {
        if (prob.satisfied_by(pos)) return pos;
        int s = 0;
        while (s < n && ++pos[static_cast<std::size_t>(s)] > n) pos[static_cast<std::size_t>(s++)] = 1;
        if (s == n) return std::nullopt;
    }
}

bool is_permutation_of_all(const Ordering& o, std::size_t n) {
    std::vector<bool> seen(n, false);
    for (VarId v : o.sequence()) {
        if (v < 0 || static_cast<std::size_t>(v) >= n || seen[static_cast<std::size_t>(v)]) return false;
        seen[static_cast<std::size_t>(v)] = true;
    }
    return o.size() == n;
}

}  // namespace

TEST_CASE("compatibility on the five-variable prefix") {
    Instance p = parse_instance_string("qcsp 5\nvar x1 A 0 1\nvar x2 E 0 1\nvar x3 A 0 1\nvar x4 E 0 1\nvar x5 E 0 1\n");
    const Ordering& pi = p.prefix();
    CHECK(is_block_compatible(p, pi, pi));
    Ordering swapped = Ordering::from_sequence({0, 1, 2, 4, 3});
    CHECK(is_block_compatible(p, pi, swapped));
    CHECK(is_semi_compatible(p, pi, swapped));
    Ordering early = Ordering::from_sequence({1, 0, 2, 3, 4});  // x2 ahead of x1
    CHECK_FALSE(is_semi_compatible(p, pi, early));
    CHECK_FALSE(is_block_compatible(p, pi, early));
    Ordering late = Ordering::from_sequence({0, 2, 1, 3, 4});  // x2 after x3
    CHECK(is_semi_compatible(p, pi, late));
    CHECK_FALSE(is_block_compatible(p, pi, late));
    Ordering universals_swapped = Ordering::from_sequence({2, 0, 1, 3, 4});
    CHECK_FALSE(is_semi_compatible(p, pi, universals_swapped));
}

TEST_CASE("worked example reordering is semi- but not block-compatible") {
    Instance p = load_instance(fixture("example2.qcsp"));
    Ordering delta = Ordering::from_sequence({1, 2, 0});
    CHECK(is_semi_compatible(p, p.prefix(), delta));
    CHECK_FALSE(is_block_compatible(p, p.prefix(), delta));
    CHECK(dif_set(p, p.prefix(), delta, 0) == std::vector<VarId>{1, 2});
    for (VarId v = 0; v < 3; ++v) CHECK(dif_set(p, p.prefix(), p.prefix(), v).empty());
    CHECK(dif_set(p, p.prefix(), delta, 2).empty());
}

TEST_CASE("semi-compatibility matches the literal definition on random orderings") {
    std::mt19937_64 rng(11);
    for (std::uint64_t s = 1; s <= 200; ++s) {
        Instance p = generate_instance(corpus_params(s, 2, 7, 2, 2));
        std::vector<VarId> seq = p.prefix().sequence();
        for (int t = 0; t < 5; ++t) {
            std::shuffle(seq.begin(), seq.end(), rng);
            Ordering d = Ordering::from_sequence(seq);
            CHECK(is_semi_compatible(p, p.prefix(), d) == literal_semi_compatible(p, p.prefix(), d));
            if (is_block_compatible(p, p.prefix(), d)) CHECK(is_semi_compatible(p, p.prefix(), d));
        }
    }
}

TEST_CASE("worked example ordering problem and its max-closed solution") {
    Instance p = load_instance(fixture("example2.qcsp"));
    OrderingProblem prob = build_ordering_problem(p, AdjointTarget::QbtpAdjoint);
    REQUIRE(prob.binary.size() == 1);
    CHECK(prob.binary[0].before == 1);
    CHECK(prob.binary[0].after == 2);
    CHECK(prob.binary[0].source == Source::SemiCompat);
    REQUIRE(prob.ternary.size() == 1);
    CHECK(prob.ternary[0].below == 2);
    CHECK(std::min(prob.ternary[0].a, prob.ternary[0].b) == 0);
    CHECK(std::max(prob.ternary[0].a, prob.ternary[0].b) == 1);
    CHECK(prob.ternary[0].source == Source::QbtpTriple);

    auto pos = solve_max_closed(prob);
    REQUIRE(pos);
    CHECK(*pos == std::vector<int>{3, 1, 2});
    CHECK(prob.satisfied_by(*pos));
    CHECK(derive_ordering(*pos, p.prefix()) == Ordering::from_sequence({1, 2, 0}));

    AdjointResult r = find_adjoint(p, AdjointTarget::QbtpAdjoint);
    REQUIRE(r.found());
    CHECK(r.delta == Ordering::from_sequence({1, 2, 0}));
    CHECK(r.verification.passed());
    CHECK(r.verification.compatible);

    CHECK_FALSE(find_adjoint(p, AdjointTarget::BlockQbtp).found());
}

TEST_CASE("max-closed solver edge cases") {
    OrderingProblem empty;
    empty.num_vars = 4;
    CHECK(solve_max_closed(empty) == std::vector<int>{4, 4, 4, 4});

    OrderingProblem cycle;
    cycle.num_vars = 2;
    cycle.binary = {{0, 1, Source::SemiCompat}, {1, 0, Source::SemiCompat}};
    CHECK_FALSE(solve_max_closed(cycle).has_value());
}

TEST_CASE("derive_ordering tie-breaks by prefix rank") {
    Ordering pi = Ordering::from_sequence({2, 0, 1});
    CHECK(derive_ordering({1, 1, 1}, pi) == pi);
    CHECK(derive_ordering({2, 3, 1}, pi) == Ordering::from_sequence({2, 0, 1}));
    CHECK(derive_ordering({2, 1, 2}, pi) == Ordering::from_sequence({1, 2, 0}));
}

TEST_CASE("max-closed solver agrees with enumeration on random problems") {
    std::mt19937_64 rng(99);
    int feasible = 0;
    for (int t = 0; t < 300; ++t) {
        OrderingProblem prob;
        prob.num_vars = 2 + static_cast<int>(rng() % 4);
        const auto n = static_cast<std::uint64_t>(prob.num_vars);
        int nb = static_cast<int>(rng() % 4), nt = static_cast<int>(rng() % 6);
        for (int c = 0; c < nb; ++c) {
            VarId a = static_cast<VarId>(rng() % n), b = static_cast<VarId>(rng() % n);
            if (a != b) prob.binary.push_back({a, b, Source::SemiCompat});
        }
        for (int c = 0; c < nt; ++c) {
            VarId w = static_cast<VarId>(rng() % n), a = static_cast<VarId>(rng() % n), b = static_cast<VarId>(rng() % n);
            prob.ternary.push_back({w, a, b, Source::QbtpTriple});
        }
        auto got = solve_max_closed(prob);
        auto ref = enumerate_solution(prob);
        CHECK(got.has_value() == ref.has_value());
        if (got) {
            ++feasible;
            CHECK(prob.satisfied_by(*got));
            Ordering d = derive_ordering(*got, Ordering::identity(n));
            CHECK(is_permutation_of_all(d, n));
            // The derived permutation as positions still satisfies the problem.
            std::vector<int> ranks(n);
            for (std::size_t v = 0; v < n; ++v) ranks[v] = d.rank(static_cast<VarId>(v)) + 1;
            CHECK(prob.satisfied_by(ranks));
        }
    }
    CHECK(feasible > 50);
}

TEST_CASE("all-universal prefix with a broken triangle has no adjoint") {
    Instance p = load_instance(fixture("broken_universal.qcsp"));
    CHECK_FALSE(qbtp_holds(p, p.prefix()).holds);
    OrderingProblem prob = build_ordering_problem(p, AdjointTarget::QbtpAdjoint);
    CHECK_FALSE(solve_max_closed(prob).has_value());
    AdjointResult r = find_adjoint(p, AdjointTarget::QbtpAdjoint);
    CHECK(r.status == AdjointResult::Status::None);
    CHECK(exhaustive_adjoint_search(p, AdjointTarget::QbtpAdjoint).status == AdjointSearch::Status::None);
}

TEST_CASE("an instance holding the triangle property under the prefix keeps it") {
    GenParams g;
    g.n = 5;
    g.d = 3;
    g.pattern = "AEAEE";
    g.ensure = EnsureClass::Qbtp;
    g.forall_pairs = false;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        g.seed = seed;
        Instance p = generate_instance(g);
        OrderingProblem prob = build_ordering_problem(p, AdjointTarget::BlockQbtp);
        std::vector<int> ranks(p.num_vars());
        for (std::size_t v = 0; v < ranks.size(); ++v) ranks[v] = p.prefix().rank(static_cast<VarId>(v)) + 1;
        CHECK(prob.satisfied_by(ranks));
        QacResult q = enforce_qac(p);
        if (!q.reduced) continue;
        AdjointResult r = find_adjoint(*q.reduced, AdjointTarget::BlockQbtp);
        REQUIRE(r.found());
        CHECK(is_block_compatible(p, p.prefix(), r.delta));
    }
}

TEST_CASE("found adjoints verify and agree with the exhaustive search") {
    int found = 0;
    for (std::uint64_t s = 1; s <= 250; ++s) {
        Instance raw = generate_instance(corpus_params(s, 3, 6, 2, 3));
        QacResult q = enforce_qac(raw);
        if (!q.reduced) continue;
        const Instance& p = *q.reduced;
        for (AdjointTarget t : {AdjointTarget::QbtpAdjoint, AdjointTarget::BlockQbtp, AdjointTarget::QmmeAdjoint}) {
            AdjointResult r = find_adjoint(p, t);
            REQUIRE(r.status != AdjointResult::Status::Defect);
            AdjointSearch ex = exhaustive_adjoint_search(p, t);
            CHECK(r.found() == ex.found());
            if (!r.found()) continue;
            ++found;
            CHECK(AdjointConditions(p, t).holds(r.delta));
            CHECK(verify_adjoint(p, r.delta, t).passed());
            CHECK(is_semi_compatible(p, p.prefix(), r.delta));
            if (t == AdjointTarget::BlockQbtp) CHECK(is_block_compatible(p, p.prefix(), r.delta));
            if (t != AdjointTarget::QmmeAdjoint) CHECK(literal_qbtp(p, r.delta));
            CHECK(r.problem.satisfied_by([&] {
                std::vector<int> ranks(p.num_vars());
                for (std::size_t v = 0; v < ranks.size(); ++v) ranks[v] = r.delta.rank(static_cast<VarId>(v)) + 1;
                return ranks;
            }()));
        }
    }
    CHECK(found > 100);
}

TEST_CASE("verification rejects an ordering that swaps universals") {
    Instance p = parse_instance_string("qcsp 3\nvar u A 0 1\nvar v A 0 1\nvar x E 0 1\n");
    Ordering bad = Ordering::from_sequence({1, 0, 2});
    AdjointVerification v = verify_adjoint(p, bad, AdjointTarget::QbtpAdjoint);
    CHECK_FALSE(v.compatible);
    CHECK_FALSE(v.passed());
    CHECK(verify_adjoint(p, p.prefix(), AdjointTarget::QbtpAdjoint).passed());
}

TEST_CASE("ordering problem JSON names each constraint source") {
    Instance p = load_instance(fixture("example2.qcsp"));
    nlohmann::json j = to_json(p, build_ordering_problem(p, AdjointTarget::QbtpAdjoint));
    std::string s = j.dump();
    CHECK(s.find("semi-compat") != std::string::npos);
    CHECK(s.find("qbtp-triple") != std::string::npos);
}
