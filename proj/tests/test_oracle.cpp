#include "doctest.h"
#include "support.hpp"

#include "qcsp/oracle.hpp"
#include "qcsp/ordering.hpp"

using namespace qcsp;
using namespace qcsp::testing;

namespace {

// Quantifier order matters: the same equality relation under both prefixes.
const char* kForallExists = "qcsp 2\nvar u A 0 1\nvar x E 0 1\ncon u x : 0,0 1,1\n";
const char* kExistsForall = "qcsp 2\nvar x E 0 1\nvar u A 0 1\ncon x u : 0,0 1,1\n";

}  // namespace

TEST_CASE("quantifier order decides the equality game") {
    CHECK(brute_force_satisfiable(parse_instance_string(kForallExists)) == OracleVerdict::Sat);
    CHECK(brute_force_satisfiable(parse_instance_string(kExistsForall)) == OracleVerdict::Unsat);
}

TEST_CASE("worked example is satisfiable with a two-scenario witness") {
    Instance p = load_instance(fixture("example2.qcsp"));
    CHECK(brute_force_satisfiable(p) == OracleVerdict::Sat);
    OracleSolution s = brute_force_solution(p);
    CHECK(s.verdict == OracleVerdict::Sat);
    REQUIRE(s.tree);
    CHECK(s.tree->leaf_count() == 2);
    CHECK(verify_strategy(p, *s.tree, p.prefix()).valid());
    // Smallest winning values: x1=a1, then c1 under b1 and c2 under b2.
    CHECK(s.tree->scenarios() == std::vector<Scenario>{{{0, 0}, {1, 0}, {2, 0}}, {{0, 0}, {1, 1}, {2, 1}}});
}

TEST_CASE("fixtures with known verdicts") {
    CHECK(brute_force_satisfiable(load_instance(fixture("forall_exists_unsat.qcsp"))) == OracleVerdict::Unsat);
    CHECK(brute_force_satisfiable(load_instance(fixture("forall_pair_empty.qcsp"))) == OracleVerdict::Unsat);
    CHECK(brute_force_satisfiable(load_instance(fixture("unconstrained.qcsp"))) == OracleVerdict::Sat);
    CHECK(brute_force_satisfiable(load_instance(fixture("pruned.qcsp"))) == OracleVerdict::Sat);
    OracleSolution none = brute_force_solution(load_instance(fixture("forall_exists_unsat.qcsp")));
    CHECK(none.verdict == OracleVerdict::Unsat);
    CHECK_FALSE(none.tree.has_value());
}

TEST_CASE("budgets stop the search") {
    GenParams g;
    g.n = 10;
    g.d = 4;
    g.pattern = "AAAAAAAAAE";
    g.density = 0.0;
    Instance p = generate_instance(g);
    OracleBudget tiny;
    tiny.max_nodes = 100;
    CHECK(brute_force_satisfiable(p, tiny) == OracleVerdict::Exhausted);
    CHECK(brute_force_solution(p, tiny).verdict == OracleVerdict::Exhausted);
    OracleBudget perms;
    perms.max_permutations = 3;
    // No ordering qualifies, so the full search needs all six candidates.
    Instance q = load_instance(fixture("broken_universal.qcsp"));
    CHECK(exhaustive_adjoint_search(q, AdjointTarget::QbtpAdjoint).permutations == 6);
    CHECK(exhaustive_adjoint_search(q, AdjointTarget::QbtpAdjoint, perms).status == AdjointSearch::Status::Exhausted);
}

TEST_CASE("solution trees verify whenever the verdict is satisfiable") {
    int sat = 0;
    for (std::uint64_t s = 1; s <= 300; ++s) {
        Instance p = generate_instance(corpus_params(s, 1, 6, 1, 3));
        OracleVerdict v = brute_force_satisfiable(p);
        OracleSolution sol = brute_force_solution(p);
        CHECK(sol.verdict == v);
        CHECK(sol.tree.has_value() == (v == OracleVerdict::Sat));
        if (sol.tree) {
            ++sat;
            CHECK(verify_strategy(p, *sol.tree, p.prefix()).valid());
        }
    }
    CHECK(sat > 50);
}

TEST_CASE("adjoint conditions on the worked example") {
    Instance p = load_instance(fixture("example2.qcsp"));
    Ordering delta = Ordering::from_sequence({1, 2, 0});
    AdjointConditions qbtp(p, AdjointTarget::QbtpAdjoint);
    CHECK(qbtp.compatible(delta));
    CHECK(qbtp.pattern_holds(delta));
    CHECK(qbtp.angles_hold(delta));
    CHECK_FALSE(qbtp.pattern_holds(p.prefix()));
    CHECK_FALSE(qbtp.compatible(Ordering::from_sequence({2, 1, 0})));

    AdjointConditions block(p, AdjointTarget::BlockQbtp);
    CHECK_FALSE(block.compatible(delta));

    AdjointSearch s = exhaustive_adjoint_search(p, AdjointTarget::QbtpAdjoint);
    REQUIRE(s.found());
    CHECK(*s.delta == delta);
    CHECK(exhaustive_adjoint_search(p, AdjointTarget::BlockQbtp).status == AdjointSearch::Status::None);
}

TEST_CASE("identity is the first candidate tried") {
    GenParams g;
    g.n = 5;
    g.d = 2;
    g.pattern = "EAEAE";
    g.ensure = EnsureClass::Qbtp;
    Instance p = generate_instance(g);
    AdjointSearch s = exhaustive_adjoint_search(p, AdjointTarget::BlockQbtp);
    REQUIRE(s.found());
    CHECK(*s.delta == p.prefix());
    CHECK(s.permutations == 1);
}

TEST_CASE("verdict names") {
    CHECK(verdict_name(OracleVerdict::Sat) == "SAT");
    CHECK(verdict_name(OracleVerdict::Unsat) == "UNSAT");
    CHECK(verdict_name(OracleVerdict::Exhausted) == "EXHAUSTED");
}
