#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "mixplan/belief/belief.hpp"
#include "mixplan/lang/parse.hpp"

using namespace mixplan;
using namespace mixplan::lang;
using belief::BeliefState;
using belief::PriorSource;
using belief::SensorSpec;

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

const reason::GroundDomain& restaurant_gd() {
    static reason::GroundDomain gd(restaurant());
    return gd;
}

Atom mk(const SystemDescription& sd, const std::string& pred,
        const std::vector<std::string>& args) {
    Atom a;
    a.pred = sd.symbols.require_pred(pred);
    for (const auto& s : args) a.args.push_back(Term::constant(*sd.symbols.sorts.const_id(s)));
    return a;
}

BeliefState binary(double p) {
    BeliefState b;
    Atom a;
    a.pred = 0;
    b.hypotheses = {Literal{a, false}, Literal{a, true}};
    b.p = {p, 1 - p};
    return b;
}

// Canned-answer world for execute_action tests.
struct ScriptWorld : belief::WorldHandle {
    std::vector<std::optional<bool>> readings;
    std::size_t at = 0;
    bool ok = true;
    bool attempt(const Atom&) override { return ok; }
    std::optional<bool> observe(const Atom&) override {
        if (at < readings.size()) return readings[at++];
        return readings.empty() ? std::nullopt : readings.back();
    }
};

}  // namespace

TEST_CASE("posterior matches the closed form") {
    auto b = binary(0.5);
    auto b2 = belief::bayes_update(b, 0, true, {0.8, 0.1});
    CHECK(b2.p[0] == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
    CHECK(b2.is_normalized(1e-12));
}

TEST_CASE("uninformative observations leave the belief unchanged") {
    auto b = binary(0.37);
    auto b2 = belief::bayes_update(b, 0, true, {0.4, 0.4});
    CHECK(b2.p[0] == doctest::Approx(0.37).epsilon(1e-12));
    auto b3 = belief::bayes_update(b, 0, false, {0.4, 0.4});
    CHECK(b3.p[0] == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("certainty is absorbing") {
    auto b = binary(1.0);
    auto b2 = belief::bayes_update(b, 0, true, {0.8, 0.123});
    CHECK(b2.p[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("degenerate likelihood raises an error") {
    auto b = binary(0.5);
    CHECK_THROWS_AS(belief::bayes_update(b, 0, true, {0.0, 0.0}), Error);
}

TEST_CASE("likelihood-ratio monotonicity and convergence") {
    auto b = binary(0.2);
    double prev = b.p[0];
    for (int i = 0; i < 200; ++i) {
        b = belief::bayes_update(b, 0, true, {0.8, 0.1});
        CHECK(b.p[0] >= prev - 1e-15);  // a positive reading never hurts
        prev = b.p[0];
    }
    CHECK(b.p[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("posteriors are order-independent") {
    std::mt19937_64 rng(11);
    std::vector<std::pair<int, bool>> obs;
    for (int i = 0; i < 20; ++i)
        obs.emplace_back(static_cast<int>(rng() % 4), (rng() & 1) != 0);
    BeliefState init;
    Atom a;
    a.pred = 0;
    init.hypotheses.assign(4, Literal{a, false});
    init.p = {0.1, 0.2, 0.3, 0.4};
    SensorSpec s{0.75, 0.2};
    auto run = [&](const std::vector<std::pair<int, bool>>& seq) {
        BeliefState b = init;
        for (auto [i, r] : seq) b = belief::bayes_update(b, i, r, s);
        return b;
    };
    auto b1 = run(obs);
    for (int t = 0; t < 10; ++t) {
        std::shuffle(obs.begin(), obs.end(), rng);
        auto b2 = run(obs);
        for (int i = 0; i < 4; ++i) CHECK(b2.p[i] == doctest::Approx(b1.p[i]).epsilon(1e-9));
    }
}

TEST_CASE("normalization holds through a fuzzed update storm") {
    std::mt19937_64 rng(7);
    BeliefState b;
    Atom a;
    a.pred = 0;
    b.hypotheses.assign(5, Literal{a, false});
    b.p.assign(5, 0.2);
    for (int i = 0; i < 100000; ++i) {
        int target = static_cast<int>(rng() % 5);
        bool reading = (rng() & 1) != 0;
        double tp = 0.55 + 0.4 * (static_cast<double>(rng() % 1000) / 1000.0);
        double fp = 0.05 + 0.3 * (static_cast<double>(rng() % 1000) / 1000.0);
        b = belief::bayes_update(b, target, reading, {tp, fp});
        if ((i & 1023) == 0) REQUIRE(b.is_normalized(1e-9));
    }
    CHECK(b.is_normalized(1e-9));
}

TEST_CASE("uniform and default-informed priors") {
    const auto& sd = restaurant();
    std::vector<Literal> hyps;
    for (const char* spot : {"a1", "a2", "a3", "a4"})
        hyps.push_back({mk(sd, "has_location", {"ds1", spot}), false});
    auto uni = belief::init_belief(hyps, PriorSource::Uniform);
    for (double p : uni.p) CHECK(p == doctest::Approx(0.25));

    std::vector<InitialDefault> defaults;
    defaults.push_back({"dish_default", {mk(sd, "has_location", {"ds1", "a2"}), false}, {}, 0});
    auto informed = belief::init_belief(hyps, PriorSource::HistoryDefault, &defaults);
    CHECK(informed.p[1] == doctest::Approx(0.8));
    CHECK(informed.p[0] == doctest::Approx(0.2 / 3.0));
    CHECK(informed.p[2] == doctest::Approx(0.2 / 3.0));
    CHECK(informed.p[3] == doctest::Approx(0.2 / 3.0));

    std::vector<double> zeros(4, 0.0);
    CHECK_THROWS_AS(belief::init_belief(hyps, PriorSource::Explicit, nullptr, &zeros), Error);
    CHECK_THROWS_AS(belief::init_belief({}, PriorSource::Uniform), Error);
}

TEST_CASE("relevant subset for a move covers the slip support") {
    const auto& sd = restaurant();
    const auto& gd = restaurant_gd();
    reason::AtomSet pos;
    pos.insert(mk(sd, "has_location", {"rob", "a1"}));
    pos.insert(mk(sd, "in_hand", {"rob", "ds1"}));
    auto st = gd.close(pos);
    REQUIRE(st);
    auto subset = belief::relevant_subset(mk(sd, "move", {"rob", "a2"}), gd, *st);
    std::set<std::string> names;
    for (const auto& l : subset) names.insert(atom_to_string(sd.symbols, l.atom));
    CHECK(names == std::set<std::string>{"has_location(rob, a1)", "has_location(rob, a2)",
                                         "has_location(rob, d1)"});
}

TEST_CASE("relevant subset for manipulation is the binary effect") {
    const auto& sd = restaurant();
    const auto& gd = restaurant_gd();
    reason::AtomSet pos;
    pos.insert(mk(sd, "has_location", {"rob", "a1"}));
    pos.insert(mk(sd, "in_hand", {"rob", "ds1"}));
    auto st = gd.close(pos);
    REQUIRE(st);
    auto subset = belief::relevant_subset(mk(sd, "putdown", {"rob", "ds1"}), gd, *st);
    REQUIRE(subset.size() == 2);
    CHECK(subset[0].atom == subset[1].atom);
    CHECK(subset[0].neg != subset[1].neg);
    CHECK(atom_to_string(sd.symbols, subset[0].atom) == "in_hand(rob, ds1)");
}

TEST_CASE("undeclared actions are rejected") {
    const auto& sd = restaurant();
    const auto& gd = restaurant_gd();
    reason::AtomSet pos;
    pos.insert(mk(sd, "has_location", {"rob", "a1"}));
    auto st = gd.close(pos);
    Atom bogus = mk(sd, "has_location", {"rob", "a1"});  // a fluent, not an action
    CHECK_THROWS_AS(belief::relevant_subset(bogus, gd, *st), Error);
}

TEST_CASE("noise config parsing") {
    auto cfg = belief::parse_noise_config(
        "% comment\nsensor * tp=0.8 fp=0.1\nsensor is_open tp=0.9 fp=0.05\n"
        "motion * success=0.95 slip=none\nmotion move success=0.9 slip=adjacent\n");
    CHECK(cfg.sensors.fallback.tp == doctest::Approx(0.8));
    CHECK(cfg.sensors.by_pred.at("is_open").fp == doctest::Approx(0.05));
    CHECK(cfg.motions.by_action.at("move").slip == belief::MotionSpec::Slip::Adjacent);
    CHECK_THROWS_AS(belief::parse_noise_config("sensor * tp=1.5 fp=0.0\n"), ParseError);
    CHECK_THROWS_AS(belief::parse_noise_config("gibberish line\n"), ParseError);
    auto expl = belief::parse_noise_config("motion move success=0.9 slip=a1:0.06,d1:0.04\n");
    CHECK(expl.motions.by_action.at("move").slip_targets.size() == 2);
    CHECK_THROWS_AS(belief::parse_noise_config("motion move success=0.9 slip=a1:0.3\n"),
                    ParseError);
}

TEST_CASE("perfect sensors complete a successful action in one cycle") {
    const auto& sd = restaurant();
    const auto& gd = restaurant_gd();
    reason::AtomSet pos;
    pos.insert(mk(sd, "has_location", {"rob", "a1"}));
    pos.insert(mk(sd, "in_hand", {"rob", "ds1"}));
    auto st = gd.close(pos);
    ScriptWorld world;
    world.readings = {false};  // in_hand(rob, ds1) observed false => putdown done
    belief::NoiseConfig noise;
    noise.sensors.fallback = {1.0, 0.0};
    auto res =
        belief::execute_action(mk(sd, "putdown", {"rob", "ds1"}), *st, gd, world, noise, {}, 3);
    CHECK(res.status == belief::ExecStatus::Completed);
    CHECK(res.obs_cycles == 1);
    REQUIRE(res.committed_hpd.has_value());
    CHECK(res.committed_hpd->step == 3);
    REQUIRE(res.committed_obs.size() == 1);
    CHECK(res.committed_obs[0].truth == false);  // -in_hand confirmed
    CHECK(res.committed_obs[0].step == 4);
}

TEST_CASE("world handle failure propagates as a zero-cycle timeout") {
    const auto& sd = restaurant();
    const auto& gd = restaurant_gd();
    reason::AtomSet pos;
    pos.insert(mk(sd, "has_location", {"rob", "a1"}));
    pos.insert(mk(sd, "in_hand", {"rob", "ds1"}));
    auto st = gd.close(pos);
    ScriptWorld world;
    world.ok = false;
    belief::NoiseConfig noise;
    auto res =
        belief::execute_action(mk(sd, "putdown", {"rob", "ds1"}), *st, gd, world, noise, {}, 0);
    CHECK(res.status == belief::ExecStatus::TimedOut);
    CHECK(res.cycles == 0);
    CHECK_FALSE(res.committed_hpd.has_value());
}

TEST_CASE("commit soundness at the default threshold (seeded smoke run)") {
    // Binary episodes: a hidden truth, noisy readings, updates until the
    // threshold; committed conclusions must be right at least theta often.
    std::mt19937_64 rng(42);
    const double theta = 0.85;
    SensorSpec s{0.8, 0.1};
    int commits = 0, correct = 0;
    for (int ep = 0; ep < 2000; ++ep) {
        bool truth = (rng() & 1) != 0;
        auto b = binary(0.5);
        for (int c = 0; c < 50; ++c) {
            bool reading =
                std::uniform_real_distribution<double>(0, 1)(rng) < (truth ? s.tp : s.fp);
            b = belief::bayes_update(b, 0, reading, s);
            if (b.max_p() >= theta) break;
        }
        if (b.max_p() >= theta) {
            ++commits;
            bool believe_true = b.argmax() == 0;
            if (believe_true == truth) ++correct;
        }
    }
    REQUIRE(commits > 1500);
    CHECK(static_cast<double>(correct) / commits >= theta);
}
