#include "doctest.h"
#include "support.hpp"

#include "qcsp/oracle.hpp"
#include "qcsp/pipeline.hpp"

#include <map>

using namespace qcsp;
using namespace qcsp::testing;

TEST_CASE("worked example classifies through the semi-compatible search") {
    Instance p = load_instance(fixture("example2.qcsp"));
    ClassificationReport r = classify(p);
    CHECK(r.tag == ClassTag::QbtpAdjoint);
    CHECK_FALSE(r.qac.changed());
    REQUIRE(r.qbtp_witness);
    CHECK(r.qbtp_witness->alpha == 1);
    CHECK(r.qbtp_witness->beta == 0);
    REQUIRE(r.searches.size() == 2);
    CHECK(r.searches[0].target == AdjointTarget::BlockQbtp);
    CHECK_FALSE(r.searches[0].found());
    REQUIRE(r.adjoint());
    CHECK(r.adjoint()->delta.rank(0) == 2);
    CHECK(r.adjoint()->delta.rank(1) == 0);
    CHECK(r.adjoint()->delta.rank(2) == 1);
    CHECK_FALSE(r.has_defect());

    CHECK(format_report(p, r) ==
          "qac: consistent (0 removals)\n"
          "qbtp under prefix: fails at (x1, x2, x3) alpha=a2 beta=b1 gamma=c2 theta=c1\n"
          "search block-qbtp: none\n"
          "search qbtp-adjoint: found\n"
          "  delta: x2=1 x3=2 x1=3\n"
          "  compatible: yes\n"
          "  qbtp under delta: holds\n"
          "  qbap (x3, x3, x1): holds\n"
          "class: qbtp-adjoint\n");
}

TEST_CASE("worked example solves with x1 = a1 at the root") {
    Instance p = load_instance(fixture("example2.qcsp"));
    SolveResult s = solve(p);
    CHECK(s.verdict == Verdict::Sat);
    REQUIRE(s.strategy);
    CHECK(s.strategy->levels() == p.prefix().sequence());
    CHECK(s.strategy->leaf_count() == 2);
    auto top = s.strategy->nodes_at_level(1);
    REQUIRE(top.size() == 1);
    CHECK(p.value_name(0, s.strategy->node(top[0]).value) == "a1");
    CHECK(verify_strategy(p, *s.strategy, p.prefix()).valid());
}

TEST_CASE("empty fixtures are unsatisfiable") {
    for (const char* name : {"forall_pair_empty.qcsp", "forall_exists_unsat.qcsp"}) {
        Instance p = load_instance(fixture(name));
        ClassificationReport r = classify(p);
        CHECK(r.tag == ClassTag::QacEmpty);
        SolveResult s = solve(p);
        CHECK(s.verdict == Verdict::Unsat);
        CHECK_FALSE(s.strategy);
        CHECK(format_report(p, r).find("qac: EMPTY") == 0);
    }
}

TEST_CASE("pruned fixture reports removals and solves on the original names") {
    Instance p = load_instance(fixture("pruned.qcsp"));
    ClassificationReport r = classify(p);
    std::string text = format_report(p, r);
    CHECK(text.find("qac: pruned-to (2 removals)") == 0);
    CHECK(text.find("removed x=2") != std::string::npos);
    nlohmann::json j = to_json(p, r);
    CHECK(j["qac"]["outcome"] == "pruned-to");
    CHECK(j["qac"]["domains"]["x"] == nlohmann::json::array({"0", "1"}));
    SolveResult s = solve(p);
    CHECK(s.verdict == Verdict::Sat);
    REQUIRE(s.strategy);
    CHECK(verify_strategy(p, *s.strategy, p.prefix()).valid());
}

TEST_CASE("size guard keeps the verdict and drops the strategy") {
    Instance p = parse_instance_string("qcsp 3\nvar a A 0 1 2\nvar b A 0 1 2\nvar c E 0\n");
    SolveOptions opts;
    opts.node_limit = 5;
    SolveResult s = solve(p, opts);
    CHECK(s.verdict == Verdict::Sat);
    CHECK_FALSE(s.strategy);
    CHECK_FALSE(s.note.empty());
    CHECK(to_json(p, s).contains("note"));
}

TEST_CASE("verdicts agree with the oracle and strategies verify") {
    std::map<ClassTag, int> seen;
    int outside_sat = 0;
    for (std::uint64_t i = 1; i <= 500; ++i) {
        GenParams g = corpus_params(i, 2, 6, 2, 3);
        if (i % 3 == 0) g.ensure = EnsureClass::Qmme;
        Instance p = generate_instance(g);
        SolveResult s = solve(p);
        ++seen[s.report.tag];
        OracleVerdict o = brute_force_satisfiable(p);
        REQUIRE(o != OracleVerdict::Exhausted);
        switch (s.verdict) {
            case Verdict::Sat:
                CHECK(o == OracleVerdict::Sat);
                REQUIRE(s.strategy);
                CHECK(verify_strategy(p, *s.strategy, p.prefix()).valid());
                break;
            case Verdict::Unsat: CHECK(o == OracleVerdict::Unsat); break;
            case Verdict::Unknown:
                CHECK(s.report.tag == ClassTag::Outside);
                outside_sat += o == OracleVerdict::Sat;
                break;
        }
        CHECK_FALSE(s.report.has_defect());
    }
    // The corpus reaches every class.
    for (ClassTag t : {ClassTag::QacEmpty, ClassTag::QbtpDirect, ClassTag::BlockQbtp, ClassTag::QbtpAdjoint, ClassTag::QmmeDirect,
                       ClassTag::QmmeAdjoint, ClassTag::Outside}) {
        CAPTURE(class_name(t));
        CHECK(seen[t] > 0);
    }
    MESSAGE("satisfiable instances left outside: " << outside_sat);
}

TEST_CASE("triangle-property instances are found directly and pass the later searches too") {
    for (std::uint64_t i = 1; i <= 60; ++i) {
        GenParams g = corpus_params(i, 3, 7, 2, 3);
        g.ensure = EnsureClass::Qbtp;
        Instance p = generate_instance(g);
        ClassificationReport r = classify(p);
        if (r.tag == ClassTag::QacEmpty) continue;
        CHECK(r.tag == ClassTag::QbtpDirect);
        for (AdjointTarget t : {AdjointTarget::BlockQbtp, AdjointTarget::QbtpAdjoint})
            CHECK(find_adjoint(*r.qac.reduced, t).found());
    }
}

TEST_CASE("reports are deterministic and timings are opt-in") {
    for (std::uint64_t i = 1; i <= 40; ++i) {
        Instance p = generate_instance(corpus_params(i, 3, 6, 2, 3));
        std::string a = to_json(p, classify(p)).dump();
        std::string b = to_json(p, classify(p)).dump();
        CHECK(a == b);
        CHECK(a.find("timings") == std::string::npos);
        CHECK(format_report(p, classify(p)) == format_report(p, classify(p)));
    }
    Instance p = load_instance(fixture("example2.qcsp"));
    CHECK(to_json(p, classify(p), true).contains("timings_ms"));
}

TEST_CASE("min-of-max search is labeled as an extension") {
    for (std::uint64_t i = 1; i <= 500; ++i) {
        GenParams g = corpus_params(i, 2, 6, 2, 3);
        if (i % 3 == 0) g.ensure = EnsureClass::Qmme;
        Instance p = generate_instance(g);
        ClassificationReport r = classify(p);
        if (r.tag != ClassTag::QmmeAdjoint) continue;
        CHECK(format_report(p, r).find("[extension: qmme-search]") != std::string::npos);
        return;
    }
    FAIL("no qmme-adjoint instance in the corpus");
}

TEST_CASE("class and verdict names") {
    CHECK(class_name(ClassTag::QacEmpty) == "qac-empty");
    CHECK(class_name(ClassTag::QbtpDirect) == "qbtp-direct");
    CHECK(class_name(ClassTag::Outside) == "outside");
    CHECK(verdict_name(Verdict::Unknown) == "UNKNOWN");
}
