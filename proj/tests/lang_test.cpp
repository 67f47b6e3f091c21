#include <random>

#include "doctest.h"
#include "mixplan/lang/parse.hpp"
#include "mixplan/lang/print.hpp"

using namespace mixplan;
using namespace mixplan::lang;

TEST_CASE("sort declarations and transitive membership") {
    auto sd = parse_domain(
        "#sort location. #sort room. #subsort room location. #instance kitchen : room.");
    const auto& s = sd.symbols.sorts;
    auto kitchen = s.const_id("kitchen");
    REQUIRE(kitchen);
    CHECK(s.is_member(*kitchen, s.require_sort("room")));
    CHECK(s.is_member(*kitchen, s.require_sort("location")));
    CHECK(s.is_subsort(s.require_sort("room"), s.require_sort("location")));
    CHECK_FALSE(s.is_subsort(s.require_sort("location"), s.require_sort("room")));
}

TEST_CASE("sort cycles are rejected") {
    CHECK_THROWS_AS(parse_domain("#sort a. #sort b. #subsort a b. #subsort b a. #instance x : a."),
                    ValidationError);
}

TEST_CASE("undeclared symbols and arity mismatches") {
    CHECK_THROWS_AS(parse_domain("#instance kitchen : room."), ValidationError);
    CHECK_THROWS_AS(parse_domain("#sort r. #fluent basic f(r). #instance a : r. f(a, a) if f(a)."),
                    ParseError);
    CHECK_THROWS_AS(parse_domain("#sort r. f(X) if g(X)."), ParseError);
}

TEST_CASE("defined fluent rejected in causal-law head") {
    CHECK_THROWS_WITH_AS(
        parse_domain("#sort r. #instance a : r. #fluent defined f(r). #action agent go(r). "
                     "go(X) causes f(X)."),
        doctest::Contains("defined fluent"), ParseError);
}

TEST_CASE("program parsing: default negation, CR, disjunction, safety") {
    auto p = parse_program("a :- not b. b :- not a.");
    REQUIRE(p.rules.size() == 2);
    CHECK(p.rules[0].negs.size() == 1);
    CHECK(p.rules[1].negs.size() == 1);
    CHECK(p.rules[0].id == 0);
    CHECK(p.rules[1].id == 1);

    auto cr = parse_program("q +- .");
    REQUIRE(cr.rules.size() == 1);
    CHECK(cr.rules[0].cr);
    CHECK(cr.rules[0].pos.empty());
    CHECK(cr.rules[0].negs.empty());

    CHECK_THROWS_WITH_AS(parse_program("p(X) :- not q(X)."), doctest::Contains("unsafe"),
                         ParseError);
    CHECK_THROWS_AS(parse_program("a | b."), ParseError);  // not a complementary pair
    CHECK_NOTHROW(parse_program("a | -a."));
}

TEST_CASE("scenario records parse and normalize") {
    auto sd = parse_domain(
        "#sort door. #instance d2 : door. #fluent basic is_open(door). "
        "#action exogenous locked(door). #action agent open(door).");
    auto sc = parse_scenario(
        "obs(is_open(d2), false, 3). obs(-is_open(d2), true, 4). script locked(d2) at 2. "
        "goal is_open(d2). hpd(open(d2), 1). truth -is_open(d2).",
        sd);
    REQUIRE(sc.history.obs.size() == 2);
    CHECK(sc.history.obs[0].truth == false);
    CHECK(sc.history.obs[1].truth == false);  // obs(-f, true) == obs(f, false)
    CHECK(sc.history.obs[0].step == 3);
    REQUIRE(sc.script.size() == 1);
    CHECK(sc.script[0].step == 2);
    CHECK_FALSE(sc.script[0].announce);
    CHECK(sc.goal.size() == 1);
    CHECK(sc.history.hpd.size() == 1);
    CHECK(sc.history.next_step == 4);

    CHECK_THROWS_AS(parse_scenario("obs(is_open(d9), false, 3).", sd), Error);
    CHECK_THROWS_AS(parse_scenario("script open(d2) at 1.", sd), ParseError);
}

TEST_CASE("empty scenario parses to an empty history") {
    auto sd = parse_domain("#sort r.");
    auto sc = parse_scenario("", sd);
    CHECK(sc.history.obs.empty());
    CHECK(sc.history.hpd.empty());
    CHECK(sc.goal.empty());
}

TEST_CASE("equal-priority conflicting defaults are an error") {
    CHECK_THROWS_AS(
        parse_domain("#sort d. #instance d1 : d. #fluent basic ab(d). "
                     "default n1 : ab(d1). default n2 : -ab(d1)."),
        ValidationError);
    CHECK_NOTHROW(
        parse_domain("#sort d. #instance d1 : d. #fluent basic ab(d). "
                     "default n1 : ab(d1). default n2 : -ab(d1) priority 1."));
}

TEST_CASE("round-trip: domain print then re-parse is structurally identical") {
    std::string text =
        "#sort location. #sort room. #sort area. #subsort room location. #subsort area location. "
        "#sort thing. #sort robot. #subsort robot thing. "
        "#instance kitchen : room. #instance a1 : area. #instance a2 : area. "
        "#instance rob : robot. "
        "#static connected(location, location). "
        "#fluent basic at(thing, location). #fluent defined can_go(robot, location). "
        "#action agent move(robot, location). "
        "connected(a1, a2). "
        "move(R, L) causes at(R, L). "
        "can_go(R, L2) if at(R, L1), connected(L1, L2). "
        "-at(T, L2) if at(T, L1), L1 != L2. "
        "impossible move(R, L) if at(R, L). "
        "default d1 : at(rob, a1) priority 1. ";
    auto sd = parse_domain(text);
    auto printed = print_domain(sd);
    auto sd2 = parse_domain(printed);
    CHECK(sd == sd2);
    CHECK(print_domain(sd2) == printed);
}

TEST_CASE("round-trip: program print then re-parse is structurally identical") {
    auto p = parse_program(
        "a :- not b. b :- not a. -c | c :- a. :- b, not c. q(X) :- r(X), not s(X). q2 +- a. "
        "p(X, Y) :- e(X, Y), X != Y.");
    auto printed = print_program(p);
    auto p2 = parse_program(printed);
    REQUIRE(p.rules.size() == p2.rules.size());
    for (std::size_t i = 0; i < p.rules.size(); ++i)
        CHECK(p.rules[i].structurally_equal(p2.rules[i]));
    CHECK(p.symbols == p2.symbols);
}

TEST_CASE("sort closure equals brute-force closure on random hierarchies") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 3 + static_cast<int>(rng() % 18);  // up to 20 sorts
        SortHierarchy h;
        std::vector<std::vector<int>> edges(n);
        for (int i = 0; i < n; ++i) h.add_sort("s" + std::to_string(i));
        // Edges only from lower to higher index keep the graph acyclic.
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (rng() % 4 == 0) {
                    h.add_subsort("s" + std::to_string(i), "s" + std::to_string(j));
                    edges[i].push_back(j);
                }
        // Brute force: repeated relaxation of reachability.
        std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
        for (int i = 0; i < n; ++i) reach[i][i] = 1;
        bool changed = true;
        while (changed) {
            changed = false;
            for (int i = 0; i < n; ++i)
                for (int j : edges[i])
                    for (int k = 0; k < n; ++k)
                        if (reach[j][k] && !reach[i][k]) {
                            reach[i][k] = 1;
                            changed = true;
                        }
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                CHECK(h.is_subsort(i, j) == static_cast<bool>(reach[i][j]));
    }
}
