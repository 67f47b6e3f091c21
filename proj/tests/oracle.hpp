#pragma once

// Test-only oracles, kept independent of the implementation paths they check:
//  - answer sets by enumeration of all consistent literal subsets, with the
//    minimality test done by exhaustive subset search (no fixpoint sharing);
//  - CR minimality by exhaustive search over CR-rule subsets;
//  - a seeded random ground-program generator.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "mixplan/ground/ground.hpp"

namespace oracle {

using mixplan::ground::GLit;
using mixplan::ground::GroundProgram;
using mixplan::ground::GroundRule;

inline bool contains(const std::vector<GLit>& sorted, GLit l) {
    return std::binary_search(sorted.begin(), sorted.end(), l);
}

// Classical satisfaction of every applicable rule, default negation read
// against the candidate itself.
inline bool satisfies_all(const GroundProgram& gp, const std::vector<GLit>& s,
                          const std::vector<char>& active) {
    for (std::size_t ri = 0; ri < gp.rules.size(); ++ri) {
        const GroundRule& r = gp.rules[ri];
        if (r.cr && !active[ri]) continue;
        bool body = true;
        for (GLit p : r.pos)
            if (!contains(s, p)) body = false;
        for (GLit n : r.negs)
            if (contains(s, n)) body = false;
        if (!body) continue;
        bool sat = false;
        for (GLit h : r.head)
            if (contains(s, h)) sat = true;
        if (!sat) return false;
    }
    return true;
}

// Does m model the reduct of gp w.r.t. s? (m must be a subset of s.)
inline bool models_reduct(const GroundProgram& gp, const std::vector<GLit>& s,
                          const std::vector<GLit>& m, const std::vector<char>& active) {
    for (std::size_t ri = 0; ri < gp.rules.size(); ++ri) {
        const GroundRule& r = gp.rules[ri];
        if (r.cr && !active[ri]) continue;
        bool deleted = false;
        for (GLit n : r.negs)
            if (contains(s, n)) deleted = true;
        if (deleted) continue;
        bool body = true;
        for (GLit p : r.pos)
            if (!contains(m, p)) body = false;
        if (!body) continue;
        bool sat = false;
        for (GLit h : r.head)
            if (contains(m, h)) sat = true;
        if (!sat) return false;
    }
    return true;
}

inline bool is_stable_bruteforce(const GroundProgram& gp, const std::vector<GLit>& s,
                                 const std::vector<char>& active) {
    if (!satisfies_all(gp, s, active)) return false;
    // Exhaustive minimality: no proper subset of s models the reduct.
    std::size_t k = s.size();
    for (std::uint64_t mask = 0; mask + 1 < (1ull << k); ++mask) {
        std::vector<GLit> m;
        for (std::size_t i = 0; i < k; ++i)
            if (mask & (1ull << i)) m.push_back(s[i]);
        if (models_reduct(gp, s, m, active)) return false;
    }
    return true;
}

// All answer sets of the non-CR part (or of the program with `active` CR
// rules treated as regular), by full enumeration of consistent candidates.
inline std::vector<std::vector<GLit>> answer_sets_bruteforce(
    const GroundProgram& gp, const std::vector<char>* active_in = nullptr) {
    std::vector<char> active(gp.rules.size(), 0);
    if (active_in) active = *active_in;
    std::size_t n = gp.atoms.size();
    std::vector<std::vector<GLit>> out;
    // Each atom contributes one of: absent, positive, strongly negated.
    std::vector<int> state(n, 0);
    while (true) {
        std::vector<GLit> s;
        for (std::size_t a = 0; a < n; ++a) {
            if (state[a] == 1) s.push_back(static_cast<GLit>(a * 2));
            if (state[a] == 2) s.push_back(static_cast<GLit>(a * 2 + 1));
        }
        if (is_stable_bruteforce(gp, s, active)) out.push_back(s);
        std::size_t i = 0;
        for (; i < n; ++i) {
            if (++state[i] < 3) break;
            state[i] = 0;
        }
        if (i == n) break;
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct CrSolutionBrute {
    std::vector<int> applied;  // CR rule ids
    std::vector<std::vector<GLit>> models;
};

// Lexicographic cost of a CR subset: per-bucket counts, strongest (lowest
// bucket value) first.
inline std::vector<std::pair<int, int>> cost_of(const GroundProgram& gp,
                                                const std::vector<int>& subset,
                                                const std::vector<int>& buckets) {
    std::vector<std::pair<int, int>> cost;
    for (int b : buckets) cost.emplace_back(b, 0);
    for (int ri : subset)
        for (auto& [b, c] : cost)
            if (b == gp.rules[ri].cr_bucket) ++c;
    return cost;
}

// Exhaustive CR search: every subset of CR rules, keep the consistent ones at
// the lexicographically minimal cost vector.
inline std::vector<CrSolutionBrute> solve_with_cr_bruteforce(const GroundProgram& gp) {
    std::vector<int> cr_ids;
    std::vector<int> buckets;
    for (std::size_t ri = 0; ri < gp.rules.size(); ++ri)
        if (gp.rules[ri].cr) {
            cr_ids.push_back(static_cast<int>(ri));
            buckets.push_back(gp.rules[ri].cr_bucket);
        }
    std::sort(buckets.begin(), buckets.end());
    buckets.erase(std::unique(buckets.begin(), buckets.end()), buckets.end());

    std::vector<CrSolutionBrute> best;
    std::vector<std::pair<int, int>> best_cost;
    bool have = false;
    for (std::uint64_t mask = 0; mask < (1ull << cr_ids.size()); ++mask) {
        std::vector<int> subset;
        std::vector<char> active(gp.rules.size(), 0);
        for (std::size_t i = 0; i < cr_ids.size(); ++i)
            if (mask & (1ull << i)) {
                subset.push_back(cr_ids[i]);
                active[cr_ids[i]] = 1;
            }
        auto models = answer_sets_bruteforce(gp, &active);
        if (models.empty()) continue;
        auto cost = cost_of(gp, subset, buckets);
        if (!have || cost < best_cost) {
            best_cost = cost;
            best.clear();
            have = true;
        }
        if (cost == best_cost) best.push_back({subset, std::move(models)});
    }
    return best;
}

// ---------------------------------------------------------------------------
// Seeded random ground programs: mixed default negation, constraints,
// complementary-pair disjunction, optionally CR rules.
// ---------------------------------------------------------------------------
inline GroundProgram random_program(std::uint64_t seed, int max_atoms, int max_rules, int max_cr) {
    std::mt19937_64 rng(seed);
    auto below = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
    GroundProgram gp;
    int natoms = 2 + below(max_atoms - 1);
    for (int a = 0; a < natoms; ++a) gp.atoms.intern_named("x" + std::to_string(a));
    auto rand_lit = [&]() { return static_cast<GLit>(below(natoms * 2)); };
    int nrules = 1 + below(max_rules);
    int ncr = max_cr > 0 ? below(max_cr + 1) : 0;
    for (int i = 0; i < nrules + ncr; ++i) {
        GroundRule r;
        r.cr = i >= nrules;
        if (r.cr) r.cr_bucket = below(2);
        int kind = r.cr ? 1 : below(100);
        if (!r.cr && kind < 15) {
            // constraint: empty head
        } else if (!r.cr && kind < 30) {
            GLit l = rand_lit();
            r.head = {l, mixplan::ground::glit_complement(l)};
        } else {
            r.head = {rand_lit()};
        }
        int npos = below(3), nneg = below(3);
        for (int j = 0; j < npos; ++j) r.pos.push_back(rand_lit());
        for (int j = 0; j < nneg; ++j) r.negs.push_back(rand_lit());
        r.id = static_cast<int>(gp.rules.size());
        gp.rules.push_back(std::move(r));
    }
    return gp;
}

}  // namespace oracle

// ---------------------------------------------------------------------------
// Exhaustive planning oracle over the deterministic transition semantics:
// breadth-first search on states, independent of the solver pipeline.
// ---------------------------------------------------------------------------
#include <deque>
#include <map>
#include <string>

#include "mixplan/reason/transition.hpp"

namespace oracle {

inline std::string state_key(const mixplan::reason::GroundDomain& gd,
                             const mixplan::reason::State& s) {
    std::vector<std::string> parts;
    for (const auto& a : s.basics)
        parts.push_back(mixplan::lang::atom_to_string(gd.sd().symbols, a));
    std::sort(parts.begin(), parts.end());
    std::string key;
    for (auto& p : parts) {
        key += p;
        key += ';';
    }
    return key;
}

// Length of the shortest plan reaching the goal, or nullopt if none exists
// within max_depth actions.
inline std::optional<int> bfs_plan_length(const mixplan::reason::GroundDomain& gd,
                                          const mixplan::reason::State& init,
                                          const std::vector<mixplan::lang::Literal>& goal,
                                          int max_depth) {
    auto goal_ok = [&](const mixplan::reason::State& s) {
        for (const auto& g : goal)
            if (!gd.holds(s, g)) return false;
        return true;
    };
    std::deque<std::pair<mixplan::reason::State, int>> q;
    std::map<std::string, int> seen;
    q.push_back({init, 0});
    seen[state_key(gd, init)] = 0;
    while (!q.empty()) {
        auto [s, d] = q.front();
        q.pop_front();
        if (goal_ok(s)) return d;
        if (d == max_depth) continue;
        for (const auto& a : gd.agent_actions()) {
            auto next = gd.apply(s, a);
            if (!next) continue;
            auto key = state_key(gd, *next);
            if (seen.count(key)) continue;
            seen[key] = d + 1;
            q.push_back({std::move(*next), d + 1});
        }
    }
    return std::nullopt;
}

}  // namespace oracle
