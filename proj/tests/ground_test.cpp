#include "doctest.h"
#include "mixplan/ground/ground.hpp"
#include "mixplan/lang/parse.hpp"
#include "mixplan/solve/solver.hpp"
#include "oracle.hpp"

using namespace mixplan;
using namespace mixplan::lang;

TEST_CASE("rule over a two-instance sort grounds twice") {
    auto p = parse_program("");
    p.symbols.sorts.add_sort("s");
    p.symbols.sorts.add_instance("a", "s");
    p.symbols.sorts.add_instance("b", "s");
    auto pid = p.symbols.add_pred("p", PredKind::Internal, {p.symbols.sorts.require_sort("s")});
    auto qid = p.symbols.add_pred("q", PredKind::Internal, {p.symbols.sorts.require_sort("s")});
    Rule r;
    r.vars = {{"X", p.symbols.sorts.require_sort("s")}};
    r.head = {Literal{{pid, {Term::var(0)}}, false}};
    r.pos = {Literal{{qid, {Term::var(0)}}, false}};
    p.add_rule(r);
    auto gp = ground::ground(p);
    CHECK(gp.rules.size() == 2);
    CHECK(gp.atoms.size() == 4);
}

TEST_CASE("rule over an empty sort vanishes silently") {
    auto p = parse_program("");
    p.symbols.sorts.add_sort("s");
    auto pid = p.symbols.add_pred("p", PredKind::Internal, {p.symbols.sorts.require_sort("s")});
    Rule r;
    r.vars = {{"X", p.symbols.sorts.require_sort("s")}};
    r.head = {Literal{{pid, {Term::var(0)}}, false}};
    p.add_rule(r);
    auto gp = ground::ground(p);
    CHECK(gp.rules.empty());
}

TEST_CASE("stats on trivial programs") {
    auto empty = ground::ground(parse_program(""));
    auto s0 = ground::stats(empty);
    CHECK(s0.atom_count == 0);
    CHECK(s0.rule_count == 0);
    CHECK(s0.cr_rule_count == 0);

    auto gp = ground::ground(parse_program("a :- not b. b :- not a."));
    auto s1 = ground::stats(gp);
    CHECK(s1.atom_count == 2);
    CHECK(s1.rule_count == 2);
    CHECK(s1.cr_rule_count == 0);
}

TEST_CASE("machine grounding equals manual enumeration for the solver") {
    // p(X) :- not q(X) over {a, b}, plus q(a): manual grounding written out.
    std::string schema =
        "p(X) :- r(X), not q(X). r(a). r(b). q(a) :- not m. m :- not q(a).";
    std::string manual =
        "p(a) :- r(a), not q(a). p(b) :- r(b), not q(b). r(a). r(b). "
        "q(a) :- not m. m :- not q(a).";
    auto g1 = ground::ground(parse_program(schema));
    auto g2 = ground::ground(parse_program(manual));
    auto r1 = solve::answer_sets(g1);
    auto r2 = solve::answer_sets(g2);
    REQUIRE(r1.models.size() == r2.models.size());
    std::vector<std::vector<std::string>> n1, n2;
    for (const auto& m : r1.models) {
        std::vector<std::string> v;
        for (auto l : m.lits) v.push_back(g1.lit_name(l));
        std::sort(v.begin(), v.end());
        n1.push_back(v);
    }
    for (const auto& m : r2.models) {
        std::vector<std::string> v;
        for (auto l : m.lits) v.push_back(g2.lit_name(l));
        std::sort(v.begin(), v.end());
        n2.push_back(v);
    }
    std::sort(n1.begin(), n1.end());
    std::sort(n2.begin(), n2.end());
    CHECK(n1 == n2);
}

TEST_CASE("flat dump round-trips") {
    auto gp = ground::ground(parse_program("a :- not b. b :- not a. q +- a."));
    auto text = ground::dump_flat(gp);
    auto gp2 = ground::load_flat(text);
    REQUIRE(gp2.rules.size() == gp.rules.size());
    CHECK(ground::dump_flat(gp2) == text);
    auto r1 = solve::answer_sets(gp);
    auto r2 = solve::answer_sets(gp2);
    CHECK(r1.models.size() == r2.models.size());
}

TEST_CASE("grounding limit raises a resource error") {
    auto p = parse_program("");
    p.symbols.sorts.add_sort("s");
    for (int i = 0; i < 40; ++i) p.symbols.sorts.add_instance("c" + std::to_string(i), "s");
    SortId s = p.symbols.sorts.require_sort("s");
    auto pid = p.symbols.add_pred("p", PredKind::Internal, {s, s, s});
    Rule r;
    r.vars = {{"X", s}, {"Y", s}, {"Z", s}};
    r.head = {Literal{{pid, {Term::var(0), Term::var(1), Term::var(2)}}, false}};
    p.add_rule(r);
    ground::GroundOptions opt;
    opt.max_rules = 1000;
    CHECK_THROWS_AS(ground::ground(p, opt), ResourceError);
}
