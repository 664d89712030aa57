#include "doctest.h"
#include "support.hpp"

#include "qcsp/consistency.hpp"
#include "qcsp/generate.hpp"
#include "qcsp/oracle.hpp"

using namespace qcsp;
using namespace qcsp::testing;

namespace {

const char* kExistsForall = R"(qcsp 2
var x1 E a b
var x2 A 0 1
con x1 x2 : a,0 a,1 b,0
)";

}  // namespace

TEST_CASE("exists-forall pair removes the value missing a universal partner") {
    Instance p = parse_instance_string(kExistsForall);
    auto w = find_qac_violation(p);
    REQUIRE(w.has_value());
    CHECK(w->kind == ConsistencyWitness::Kind::Pair);
    CHECK(w->target == 0);
    CHECK(w->value == 1);
    CHECK(w->blocker == 1);  // the universal value that b lacks
    QacResult r = enforce_qac(p);
    CHECK_FALSE(r.empty());
    REQUIRE(r.trace.removals.size() == 1);
    CHECK(r.trace.removals[0].var == 0);
    CHECK(r.trace.removals[0].value == "b");
    CHECK(r.trace.removals[0].because_first == 0);
    CHECK(r.trace.removals[0].because_second == 1);
    REQUIRE(r.reduced);
    CHECK(r.reduced->domain_size(0) == 1);
    CHECK(r.reduced->value_name(0, 0) == "a");
    CHECK(is_qac(*r.reduced));
}

TEST_CASE("worked example is already arc consistent") {
    Instance p = load_instance(fixture("example2.qcsp"));
    CHECK(is_qac(p));
    QacResult r = enforce_qac(p);
    CHECK_FALSE(r.changed());
    REQUIRE(r.reduced);
    CHECK(*r.reduced == p);
}

TEST_CASE("a universal pair with a missing tuple is empty") {
    QacResult r = enforce_qac(load_instance(fixture("forall_pair_empty.qcsp")));
    CHECK(r.empty());
    CHECK_FALSE(r.reduced.has_value());
    CHECK(r.trace.empty_at.has_value());
}

TEST_CASE("removals propagate along an existential chain") {
    Instance p = load_instance(fixture("pruned.qcsp"));
    QacResult r = enforce_qac(p);
    REQUIRE_FALSE(r.empty());
    REQUIRE(r.trace.removals.size() == 2);
    CHECK(r.trace.removals[0].value == "2");
    CHECK(p.name(r.trace.removals[0].var) == "x");
    CHECK(r.trace.removals[1].value == "1");
    CHECK(p.name(r.trace.removals[1].var) == "z");
    CHECK(literal_qac(*r.reduced));
}

TEST_CASE("forall-exists with an unsupported universal value is empty") {
    Instance p = load_instance(fixture("forall_exists_unsat.qcsp"));
    QacResult r = enforce_qac(p);
    CHECK(r.empty());
    CHECK(brute_force_satisfiable(p) == OracleVerdict::Unsat);
}

TEST_CASE("is_qac agrees with the literal pairwise conditions") {
    int reduced_ok = 0;
    for (std::uint64_t s = 1; s <= 400; ++s) {
        Instance p = generate_instance(corpus_params(s, 2, 7, 2, 4));
        CHECK(is_qac(p) == literal_qac(p));
        QacResult r = enforce_qac(p);
        if (r.reduced) {
            CHECK(literal_qac(*r.reduced));
            ++reduced_ok;
        }
    }
    CHECK(reduced_ok > 0);
}

TEST_CASE("arc consistency never changes satisfiability") {
    for (std::uint64_t s = 1; s <= 300; ++s) {
        Instance p = generate_instance(corpus_params(s, 2, 6, 2, 3));
        QacResult r = enforce_qac(p);
        OracleVerdict before = brute_force_satisfiable(p);
        if (r.empty())
            CHECK(before == OracleVerdict::Unsat);
        else
            CHECK(brute_force_satisfiable(*r.reduced) == before);
    }
}

TEST_CASE("arc consistency is idempotent and only shrinks existentials") {
    for (std::uint64_t s = 1; s <= 200; ++s) {
        Instance p = generate_instance(corpus_params(s, 2, 7, 2, 4));
        QacResult r = enforce_qac(p);
        if (!r.reduced) continue;
        for (VarId v = 0; v < static_cast<VarId>(p.num_vars()); ++v)
            if (p.is_universal(v)) CHECK(r.reduced->domain_size(v) == p.domain_size(v));
        QacResult again = enforce_qac(*r.reduced);
        CHECK_FALSE(again.changed());
    }
}

TEST_CASE("directional 2-consistency on the small example") {
    Instance p = parse_instance_string(kExistsForall);
    DirectionalResult d = check_directional_k_consistency(p, 2);
    CHECK_FALSE(d.holds());
    REQUIRE(d.witness);
    CHECK(d.witness->kind == ConsistencyWitness::Kind::Tuple);
    CHECK(d.witness->assignment == std::vector<ValueId>{1});
    CHECK(d.witness->target == 1);
    CHECK(d.witness->value == 1);
    CHECK(check_directional_k_consistency(*enforce_qac(p).reduced, 2).holds());
}

TEST_CASE("directional k-consistency matches the literal definition") {
    for (std::uint64_t s = 1; s <= 250; ++s) {
        Instance p = generate_instance(corpus_params(s, 2, 6, 2, 3));
        for (int k = 2; k <= std::min<int>(4, static_cast<int>(p.num_vars())); ++k)
            CHECK(check_directional_k_consistency(p, k).holds() == literal_directional(p, k));
    }
}

TEST_CASE("work cap reports an exceeded search") {
    GenParams g;
    g.n = 8;
    g.d = 4;
    g.pattern = "EEEEEEEE";
    g.density = 0.0;
    DirectionalResult d = check_directional_k_consistency(generate_instance(g), 8, 10);
    CHECK(d.verdict == DirectionalResult::Verdict::CapExceeded);
}

TEST_CASE("prune trace serializes with names") {
    Instance p = parse_instance_string(kExistsForall);
    QacResult r = enforce_qac(p);
    nlohmann::json j = to_json(p, r.trace);
    CHECK(j.dump().find("\"b\"") != std::string::npos);
    CHECK(j.dump().find("x2") != std::string::npos);
}
