#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mixplan/lang/parse.hpp"
#include "mixplan/reason/transition.hpp"

using namespace mixplan;
using namespace mixplan::lang;
using reason::GroundDomain;
using reason::State;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

const SystemDescription& restaurant() {
    static SystemDescription sd =
        parse_domain(slurp(std::string(MIXPLAN_SOURCE_DIR) + "/domains/restaurant.dom"));
    return sd;
}

Atom mk(const SystemDescription& sd, const std::string& pred,
        const std::vector<std::string>& args) {
    Atom a;
    a.pred = sd.symbols.require_pred(pred);
    for (const auto& s : args) a.args.push_back(Term::constant(*sd.symbols.sorts.const_id(s)));
    return a;
}

State initial(const SystemDescription& sd, const GroundDomain& gd) {
    reason::AtomSet pos;
    pos.insert(mk(sd, "has_location", {"rob", "a1"}));
    pos.insert(mk(sd, "in_hand", {"rob", "ds1"}));
    pos.insert(mk(sd, "has_location", {"p1", "a2"}));
    pos.insert(mk(sd, "has_location", {"t1", "a1"}));
    pos.insert(mk(sd, "has_location", {"t2", "a3"}));
    pos.insert(mk(sd, "has_location", {"ds2", "a4"}));
    auto st = gd.close(pos);
    REQUIRE(st.has_value());
    return *st;
}

}  // namespace

TEST_CASE("closure derives room membership and carried-object location") {
    const auto& sd = restaurant();
    GroundDomain gd(sd);
    State s = initial(sd, gd);
    CHECK(gd.holds(s, {mk(sd, "has_location", {"rob", "dining"}), false}));
    CHECK(gd.holds(s, {mk(sd, "has_location", {"ds1", "a1"}), false}));
    CHECK(gd.holds(s, {mk(sd, "has_location", {"rob", "kitchen"}), true}));
    // Defined fluent from connectivity.
    CHECK(gd.holds(s, {mk(sd, "can_move", {"rob", "a2"}), false}));
    CHECK(gd.holds(s, {mk(sd, "can_move", {"rob", "a3"}), true}));
}

TEST_CASE("executability conditions gate actions") {
    const auto& sd = restaurant();
    GroundDomain gd(sd);
    State s = initial(sd, gd);
    CHECK(gd.executable(s, mk(sd, "move", {"rob", "a2"})));
    CHECK_FALSE(gd.executable(s, mk(sd, "move", {"rob", "a1"})));     // already there
    CHECK_FALSE(gd.executable(s, mk(sd, "move", {"rob", "a3"})));     // not connected
    CHECK_FALSE(gd.executable(s, mk(sd, "open", {"rob", "d2"})));     // not at the door
    CHECK_FALSE(gd.executable(s, mk(sd, "pickup", {"rob", "ds2"})));  // different spot
    CHECK(gd.executable(s, mk(sd, "putdown", {"rob", "ds1"})));
}

TEST_CASE("move updates location and dependents") {
    const auto& sd = restaurant();
    GroundDomain gd(sd);
    State s = initial(sd, gd);
    auto s2 = gd.apply(s, mk(sd, "move", {"rob", "a2"}));
    REQUIRE(s2.has_value());
    CHECK(gd.holds(*s2, {mk(sd, "has_location", {"rob", "a2"}), false}));
    CHECK(gd.holds(*s2, {mk(sd, "has_location", {"rob", "a1"}), true}));
    // The carried dish moved along.
    CHECK(gd.holds(*s2, {mk(sd, "has_location", {"ds1", "a2"}), false}));
    CHECK(gd.holds(*s2, {mk(sd, "has_location", {"ds1", "a1"}), true}));
    // Objects elsewhere kept their places by inertia.
    CHECK(gd.holds(*s2, {mk(sd, "has_location", {"t1", "a1"}), false}));
}

TEST_CASE("putdown drops the dish where the robot stands") {
    const auto& sd = restaurant();
    GroundDomain gd(sd);
    State s = initial(sd, gd);
    auto s2 = gd.apply(s, mk(sd, "putdown", {"rob", "ds1"}));
    REQUIRE(s2.has_value());
    CHECK(gd.holds(*s2, {mk(sd, "in_hand", {"rob", "ds1"}), true}));
    CHECK(gd.holds(*s2, {mk(sd, "has_location", {"ds1", "a1"}), false}));
    // And it stays there afterwards.
    auto s3 = gd.apply(*s2, mk(sd, "move", {"rob", "a2"}));
    REQUIRE(s3.has_value());
    CHECK(gd.holds(*s3, {mk(sd, "has_location", {"ds1", "a1"}), false}));
}

TEST_CASE("locked doors block the open effect but not the attempt") {
    const auto& sd = restaurant();
    GroundDomain gd(sd);
    State s = initial(sd, gd);
    auto at_door =
        gd.apply(*gd.apply(s, mk(sd, "move", {"rob", "a2"})), mk(sd, "move", {"rob", "d2"}));
    REQUIRE(at_door.has_value());
    // Exogenous lock: ab plus the door forced shut.
    auto locked = gd.apply_effects(*at_door, gd.effects(*at_door, mk(sd, "locked", {"d2"})));
    REQUIRE(locked.has_value());
    CHECK(gd.holds(*locked, {mk(sd, "ab", {"d2"}), false}));
    CHECK(gd.executable(*locked, mk(sd, "open", {"rob", "d2"})));
    auto opened = gd.apply(*locked, mk(sd, "open", {"rob", "d2"}));
    REQUIRE(opened.has_value());
    CHECK(gd.holds(*opened, {mk(sd, "is_open", {"d2"}), true}));  // no effect
    // Unlock then open succeeds.
    auto unlocked = gd.apply_effects(*opened, gd.effects(*opened, mk(sd, "unlocked", {"d2"})));
    REQUIRE(unlocked.has_value());
    auto open2 = gd.apply(*unlocked, mk(sd, "open", {"rob", "d2"}));
    REQUIRE(open2.has_value());
    CHECK(gd.holds(*open2, {mk(sd, "is_open", {"d2"}), false}));
    // Leaving a closed door is impossible; after opening it is allowed.
    CHECK_FALSE(gd.executable(*unlocked, mk(sd, "move", {"rob", "a3"})));
    CHECK(gd.executable(*open2, mk(sd, "move", {"rob", "a3"})));
}

TEST_CASE("world states always satisfy the constraints after a step") {
    const auto& sd = restaurant();
    GroundDomain gd(sd);
    State s = initial(sd, gd);
    std::vector<Atom> script = {mk(sd, "move", {"rob", "a2"}), mk(sd, "move", {"rob", "d2"}),
                                mk(sd, "open", {"rob", "d2"}), mk(sd, "move", {"rob", "a3"}),
                                mk(sd, "putdown", {"rob", "ds1"})};
    for (const Atom& a : script) {
        auto next = gd.apply(s, a);
        REQUIRE(next.has_value());
        s = *next;
        CHECK(gd.consistent(s));
    }
    CHECK(gd.holds(s, {mk(sd, "has_location", {"ds1", "a3"}), false}));
    CHECK(gd.holds(s, {mk(sd, "in_hand", {"rob", "ds1"}), true}));
}

TEST_CASE("contradictory closure is rejected") {
    const auto& sd = restaurant();
    GroundDomain gd(sd);
    reason::AtomSet pos;
    pos.insert(mk(sd, "has_location", {"rob", "a1"}));
    pos.insert(mk(sd, "has_location", {"rob", "a2"}));
    CHECK_FALSE(gd.close(pos).has_value());
}
