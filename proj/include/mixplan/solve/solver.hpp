#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <vector>

#include "mixplan/ground/ground.hpp"

namespace mixplan::solve {

using ground::GLit;
using ground::GroundProgram;
using ground::GroundRule;
using ground::glit_atom;
using ground::glit_complement;
using ground::glit_neg;

enum class Status { Consistent, Inconsistent, ResourceLimit };

struct AnswerSet {
    std::vector<GLit> lits;        // ground literals, ascending
    std::vector<int> applied_cr;   // ids of CR rules converted to regular rules
    std::vector<std::pair<int, int>> bucket_counts;  // (bucket, applied count)
};

struct SolveStats {
    std::uint64_t decisions = 0;
    std::uint64_t conflicts = 0;
    std::uint64_t candidates = 0;  // total assignments submitted to the stability check
    double wall_ms = 0.0;
};

struct SolveOptions {
    std::uint64_t max_decisions = 10'000'000;
    double max_seconds = 60.0;
    int max_models = 0;  // 0 = enumerate all
    // Literals to branch on first (made true before false), in order. Used by
    // the planner to obtain the lexicographically least plan deterministically.
    std::vector<GLit> decision_hints;
    int max_total_cr = -1;  // cap on applied CR rules; -1 = no cap
};

struct SolveResult {
    Status status = Status::Inconsistent;
    std::vector<AnswerSet> models;
    SolveStats stats;
};

// ---------------------------------------------------------------------------
// Gelfond-Lifschitz check. A consistent candidate S is an answer set iff it
// satisfies every rule and no proper subset of S models the reduct. With
// disjunction limited to complementary pairs, at most one head literal of any
// rule survives in a consistent S, so the subset-minimality test reduces to a
// least-fixpoint computation within S.
// ---------------------------------------------------------------------------
namespace detail {

class StabilityChecker {
  public:
    explicit StabilityChecker(const GroundProgram& gp) : gp_(gp) {}

    // `truth` maps every literal var to its truth value in the candidate.
    // `cr_active` may be empty (all CR rules ignored) or one flag per rule.
    bool stable(const std::vector<char>& truth, const std::vector<char>& cr_active) {
        std::size_t nlits = gp_.atoms.size() * 2;
        derived_.assign(nlits, 0);
        rule_of_.assign(nlits, {});
        remaining_.assign(gp_.rules.size(), 0);
        target_.assign(gp_.rules.size(), -1);
        queue_.clear();

        auto lit_true = [&](GLit l) { return truth[l] != 0; };
        for (std::size_t ri = 0; ri < gp_.rules.size(); ++ri) {
            const GroundRule& r = gp_.rules[ri];
            if (r.cr && (cr_active.empty() || !cr_active[ri])) continue;
            bool cut = false;
            for (GLit n : r.negs)
                if (lit_true(n)) {
                    cut = true;  // deleted by the reduct
                    break;
                }
            if (cut) continue;
            for (GLit p : r.pos)
                if (!lit_true(p)) {
                    cut = true;  // can never fire inside S
                    break;
                }
            if (cut) continue;
            // Body holds in S. The candidate must satisfy the rule.
            GLit target = -1;
            for (GLit h : r.head)
                if (lit_true(h)) target = h;
            if (target < 0) return false;  // violated rule (constraint or head outside S)
            target_[ri] = target;
            // Register each distinct positive literal once; duplicates in a
            // body must not inflate the fire counter.
            int uniq = 0;
            for (std::size_t i = 0; i < r.pos.size(); ++i) {
                bool dup = false;
                for (std::size_t j = 0; j < i; ++j)
                    if (r.pos[j] == r.pos[i]) dup = true;
                if (dup) continue;
                ++uniq;
                rule_of_[r.pos[i]].push_back(static_cast<int>(ri));
            }
            remaining_[ri] = uniq;
            if (uniq == 0) derive(target);
        }
        for (std::size_t qi = 0; qi < queue_.size(); ++qi) {
            GLit l = queue_[qi];
            for (int ri : rule_of_[l])
                if (--remaining_[ri] == 0) derive(target_[ri]);
        }
        for (std::size_t l = 0; l < nlits; ++l)
            if (truth[l] && !derived_[l]) return false;
        return true;
    }

  private:
    void derive(GLit l) {
        if (derived_[l]) return;
        derived_[l] = 1;
        queue_.push_back(l);
    }

    const GroundProgram& gp_;
    std::vector<char> derived_;
    std::vector<std::vector<int>> rule_of_;
    std::vector<int> remaining_;
    std::vector<GLit> target_;
    std::vector<GLit> queue_;
};

// ---------------------------------------------------------------------------
// DPLL over the completion of the (shifted) program, with chronological
// backtracking, model enumeration, and a stability check per candidate.
// ---------------------------------------------------------------------------
class Dpll {
  public:
    // Solver variable encoding: [0, nlits) literal vars; then one body var per
    // rule with a head; then one activation var per CR rule.
    Dpll(const GroundProgram& gp) : gp_(gp), checker_(gp) {
        nlits_ = gp.atoms.size() * 2;
        std::size_t nrules = gp.rules.size();
        body_var_.assign(nrules, -1);
        act_var_.assign(nrules, -1);
        std::size_t next = nlits_;
        for (std::size_t ri = 0; ri < nrules; ++ri)
            if (!gp.rules[ri].head.empty()) body_var_[ri] = static_cast<int>(next++);
        for (std::size_t ri = 0; ri < nrules; ++ri)
            if (gp.rules[ri].cr) act_var_[ri] = static_cast<int>(next++);
        nvars_ = next;
        build_clauses();
    }

    // One watcher pass; false on top-level contradiction.
    bool init() {
        assign_.assign(nvars_, -1);
        trail_.clear();
        decisions_.clear();
        prop_head_ = 0;
        for (std::size_t ci = 0; ci < clauses_.size(); ++ci)
            if (clauses_[ci].size() == 1 && !enqueue(clauses_[ci][0])) return false;
        return propagate();
    }

    // Fixes the activation state of every CR rule before search.
    bool assume_activation(const std::vector<char>& active) {
        for (std::size_t ri = 0; ri < gp_.rules.size(); ++ri) {
            if (act_var_[ri] < 0) continue;
            int slit = act_var_[ri] * 2 + ((!active.empty() && active[ri]) ? 0 : 1);
            if (!enqueue(slit)) return false;
        }
        return propagate();
    }

    // Enumerates stable models; on_model returns false to stop early.
    Status run(const SolveOptions& opt, SolveStats& stats, const std::vector<char>& cr_active,
               const std::function<bool(const std::vector<GLit>&)>& on_model) {
        auto t0 = std::chrono::steady_clock::now();
        bool any = false;
        bool exhausted = false;
        std::size_t scan_pos = 0, hint_pos = 0;
        while (true) {
            if (stats.decisions > opt.max_decisions) return Status::ResourceLimit;
            if ((stats.decisions & 0xfff) == 0) {
                double secs =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                if (secs > opt.max_seconds) return Status::ResourceLimit;
            }
            int branch = -1, polarity = 0;
            while (hint_pos < opt.decision_hints.size()) {
                GLit l = opt.decision_hints[hint_pos];
                if (assign_[l] == -1) {
                    branch = static_cast<int>(l);
                    polarity = 1;
                    break;
                }
                ++hint_pos;
            }
            if (branch < 0) {
                while (scan_pos < nlits_ && assign_[scan_pos] != -1) ++scan_pos;
                if (scan_pos < nlits_) {
                    branch = static_cast<int>(scan_pos);
                    polarity = 0;  // absent by default
                }
            }
            if (branch < 0) {
                // All literal vars assigned; body/activation vars follow by
                // propagation, so the assignment is total.
                ++stats.candidates;
                std::vector<char> truth(nlits_, 0);
                for (std::size_t l = 0; l < nlits_; ++l) truth[l] = assign_[l] == 1;
                if (checker_.stable(truth, cr_active)) {
                    any = true;
                    std::vector<GLit> model;
                    for (std::size_t l = 0; l < nlits_; ++l)
                        if (assign_[l] == 1) model.push_back(static_cast<GLit>(l));
                    if (!on_model(model)) return Status::Consistent;
                }
                if (!flip(stats, scan_pos, hint_pos)) {
                    exhausted = true;
                    break;
                }
                continue;
            }
            ++stats.decisions;
            decide(branch, polarity, scan_pos, hint_pos);
            while (!propagate()) {
                ++stats.conflicts;
                if (!flip(stats, scan_pos, hint_pos)) {
                    exhausted = true;
                    break;
                }
            }
            if (exhausted) break;
        }
        return any ? Status::Consistent : Status::Inconsistent;
    }

    // Appends a clause over literal vars (used for projection blocking).
    // Must be called with an empty trail beyond level 0.
    void add_clause_top(std::vector<int> slits) {
        canonicalize(slits);
        if (slits.empty()) {
            forced_empty_ = true;
            return;
        }
        attach(std::move(slits));
    }

    bool forced_empty() const { return forced_empty_; }

    void backtrack_all() {
        while (!decisions_.empty()) undo_to(decisions_.back().trail_pos), decisions_.pop_back();
        prop_head_ = trail_.size();
    }

  private:
    struct Decision {
        std::size_t trail_pos;
        int var;
        int first_value;
        bool flipped;
        std::size_t scan_pos;
        std::size_t hint_pos;
    };

    static int svar(int slit) { return slit / 2; }
    static bool sneg(int slit) { return slit & 1; }

    void canonicalize(std::vector<int>& c) {
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
    }

    void build_clauses() {
        // Complement exclusion: an atom and its strong negation never coexist.
        for (std::size_t a = 0; a < gp_.atoms.size(); ++a)
            attach({static_cast<int>(a * 4 /*lit 2a pos*/) + 1, static_cast<int>((a * 2 + 1) * 2) + 1});
        std::vector<std::vector<int>> defs(nlits_);
        for (std::size_t ri = 0; ri < gp_.rules.size(); ++ri) {
            const GroundRule& r = gp_.rules[ri];
            if (r.head.empty()) {
                // Constraint: body must not hold.
                std::vector<int> c;
                for (GLit p : r.pos) c.push_back(static_cast<int>(p) * 2 + 1);
                for (GLit n : r.negs) c.push_back(static_cast<int>(n) * 2);
                if (r.cr) throw Error("CR rule with empty head");
                attach_checked(std::move(c));
                continue;
            }
            int b = body_var_[ri];
            // b -> body conjuncts (and the activation guard for CR rules)
            for (GLit p : r.pos) attach({b * 2 + 1, static_cast<int>(p) * 2});
            for (GLit n : r.negs) attach({b * 2 + 1, static_cast<int>(n) * 2 + 1});
            std::vector<int> back{b * 2};
            for (GLit p : r.pos) back.push_back(static_cast<int>(p) * 2 + 1);
            for (GLit n : r.negs) back.push_back(static_cast<int>(n) * 2);
            if (r.cr) {
                int a = act_var_[ri];
                attach({b * 2 + 1, a * 2});
                back.push_back(a * 2 + 1);
            }
            attach_checked(std::move(back));
            // b -> some head literal
            std::vector<int> hc{b * 2 + 1};
            for (GLit h : r.head) hc.push_back(static_cast<int>(h) * 2);
            attach_checked(std::move(hc));
            for (GLit h : r.head) defs[h].push_back(b * 2);
        }
        // Support: a believed literal needs at least one potentially firing body.
        for (std::size_t l = 0; l < nlits_; ++l) {
            std::vector<int> c{static_cast<int>(l) * 2 + 1};
            c.insert(c.end(), defs[l].begin(), defs[l].end());
            attach_checked(std::move(c));
        }
    }

    void attach_checked(std::vector<int> c) {
        canonicalize(c);
        for (std::size_t i = 0; i + 1 < c.size(); ++i)
            if (svar(c[i]) == svar(c[i + 1])) return;  // tautology
        attach(std::move(c));
    }

    void attach(std::vector<int> c) {
        std::size_t ci = clauses_.size();
        clauses_.push_back(std::move(c));
        const auto& cl = clauses_[ci];
        if (watch_.size() < nvars_ * 2) watch_.resize(nvars_ * 2);
        // A clause lives in the lists of its two watched slits and is visited
        // when one of them becomes false.
        if (cl.size() >= 1) watch_[cl[0]].push_back(ci);
        if (cl.size() >= 2) watch_[cl[1]].push_back(ci);
    }

    bool slit_true(int slit) const {
        int v = assign_[svar(slit)];
        return v != -1 && (v == 1) != sneg(slit);
    }
    bool slit_false(int slit) const {
        int v = assign_[svar(slit)];
        return v != -1 && (v == 1) == sneg(slit);
    }

    bool enqueue(int slit) {
        if (slit_true(slit)) return true;
        if (slit_false(slit)) return false;
        assign_[svar(slit)] = sneg(slit) ? 0 : 1;
        trail_.push_back(svar(slit));
        return true;
    }

    bool propagate() {
        while (prop_head_ < trail_.size()) {
            int var = trail_[prop_head_++];
            int false_slit = var * 2 + (assign_[var] == 1 ? 1 : 0);
            auto& wl = watch_[false_slit];
            std::size_t keep = 0;
            bool conflict = false;
            for (std::size_t wi = 0; wi < wl.size(); ++wi) {
                std::size_t ci = wl[wi];
                auto& cl = clauses_[ci];
                if (conflict) {
                    wl[keep++] = ci;
                    continue;
                }
                // Ensure the false slit sits at cl[1].
                if (cl.size() > 1 && cl[0] == false_slit) std::swap(cl[0], cl[1]);
                if (cl.size() > 1 && slit_true(cl[0])) {
                    wl[keep++] = ci;
                    continue;
                }
                bool moved = false;
                for (std::size_t k = 2; k < cl.size(); ++k) {
                    if (!slit_false(cl[k])) {
                        std::swap(cl[1], cl[k]);
                        watch_[cl[1]].push_back(ci);
                        moved = true;
                        break;
                    }
                }
                if (moved) continue;
                wl[keep++] = ci;
                if (!enqueue(cl[0])) conflict = true;
            }
            wl.resize(keep);
            if (conflict) return false;
        }
        return true;
    }

    void decide(int var, int value, std::size_t scan_pos, std::size_t hint_pos) {
        decisions_.push_back({trail_.size(), var, value, false, scan_pos, hint_pos});
        assign_[var] = value;
        trail_.push_back(var);
    }

    void undo_to(std::size_t pos) {
        while (trail_.size() > pos) {
            assign_[trail_.back()] = -1;
            trail_.pop_back();
        }
        prop_head_ = pos;
    }

    // Flips the deepest unflipped decision; false when the tree is exhausted.
    bool flip(SolveStats& stats, std::size_t& scan_pos, std::size_t& hint_pos) {
        while (!decisions_.empty()) {
            Decision d = decisions_.back();
            decisions_.pop_back();
            undo_to(d.trail_pos);
            scan_pos = d.scan_pos;
            hint_pos = d.hint_pos;
            if (!d.flipped) {
                d.flipped = true;
                decisions_.push_back(d);
                assign_[d.var] = d.first_value ? 0 : 1;
                trail_.push_back(d.var);
                if (propagate()) return true;
                ++stats.conflicts;
                decisions_.pop_back();
                undo_to(d.trail_pos);
            }
        }
        return false;
    }

    const GroundProgram& gp_;
    StabilityChecker checker_;
    std::size_t nlits_ = 0;
    std::size_t nvars_ = 0;
    std::vector<int> body_var_;
    std::vector<int> act_var_;
    std::vector<std::vector<int>> clauses_;
    std::vector<std::vector<std::size_t>> watch_;
    std::vector<signed char> assign_;
    std::vector<int> trail_;
    std::size_t prop_head_ = 0;
    std::vector<Decision> decisions_;
    bool forced_empty_ = false;
};

inline std::vector<std::pair<int, int>> bucket_counts_of(const GroundProgram& gp,
                                                         const std::vector<int>& applied) {
    std::vector<std::pair<int, int>> counts;
    for (int ri : applied) {
        int b = gp.rules[ri].cr_bucket;
        auto it = std::find_if(counts.begin(), counts.end(),
                               [&](const auto& p) { return p.first == b; });
        if (it == counts.end())
            counts.emplace_back(b, 1);
        else
            ++it->second;
    }
    std::sort(counts.begin(), counts.end());
    return counts;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Public operations.
// ---------------------------------------------------------------------------

// Answer sets of the non-CR part of the program (CR rules are ignored).
inline SolveResult answer_sets(const GroundProgram& gp, const SolveOptions& opt = {}) {
    SolveResult res;
    auto t0 = std::chrono::steady_clock::now();
    detail::Dpll dpll(gp);
    std::vector<char> active;  // none
    if (!dpll.init() || !dpll.assume_activation(active)) {
        res.status = Status::Inconsistent;
    } else {
        res.status = dpll.run(opt, res.stats, active, [&](const std::vector<GLit>& m) {
            AnswerSet as;
            as.lits = m;
            res.models.push_back(std::move(as));
            return opt.max_models == 0 || static_cast<int>(res.models.size()) < opt.max_models;
        });
    }
    if (res.status == Status::Consistent && res.models.empty()) res.status = Status::Inconsistent;
    res.stats.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

// Gelfond-Lifschitz test for an explicit candidate. CR rules outside
// `active_cr` are ignored. The candidate must be consistent.
inline bool is_answer_set(const GroundProgram& gp, const std::vector<GLit>& candidate,
                          const std::vector<int>* active_cr = nullptr) {
    std::size_t nlits = gp.atoms.size() * 2;
    std::vector<char> truth(nlits, 0);
    for (GLit l : candidate) {
        if (l < 0 || l >= static_cast<GLit>(nlits)) return false;
        truth[l] = 1;
    }
    for (GLit l : candidate)
        if (truth[glit_complement(l)] && truth[l]) return false;  // inconsistent candidate
    std::vector<char> act;
    if (active_cr) {
        act.assign(gp.rules.size(), 0);
        for (int ri : *active_cr) act[ri] = 1;
    }
    // Every non-CR (or activated) rule must be classically satisfied.
    for (std::size_t ri = 0; ri < gp.rules.size(); ++ri) {
        const GroundRule& r = gp.rules[ri];
        if (r.cr && (act.empty() || !act[ri])) continue;
        bool body = true;
        for (GLit p : r.pos)
            if (!truth[p]) body = false;
        for (GLit n : r.negs)
            if (truth[n]) body = false;
        if (!body) continue;
        bool sat = false;
        for (GLit h : r.head)
            if (truth[h]) sat = true;
        if (!sat) return false;
    }
    detail::StabilityChecker checker(gp);
    return checker.stable(truth, act);
}

namespace detail {

// Shared implementation of CR-minimal solving. Calls `emit` for every answer
// set of the program extended with a lexicographically minimal CR subset.
template <typename Emit>
inline Status solve_cr_impl(const GroundProgram& gp, const SolveOptions& opt, SolveStats& stats,
                            Emit&& emit) {
    auto t0 = std::chrono::steady_clock::now();
    // Bucket the CR rules; lower bucket value = stronger priority.
    std::vector<int> buckets;
    std::vector<std::vector<int>> bucket_rules;
    for (std::size_t ri = 0; ri < gp.rules.size(); ++ri) {
        if (!gp.rules[ri].cr) continue;
        int b = gp.rules[ri].cr_bucket;
        auto it = std::lower_bound(buckets.begin(), buckets.end(), b);
        std::size_t idx = it - buckets.begin();
        if (it == buckets.end() || *it != b) {
            buckets.insert(it, b);
            bucket_rules.insert(bucket_rules.begin() + idx, std::vector<int>{});
        }
        bucket_rules[idx].push_back(static_cast<int>(ri));
    }

    Dpll dpll(gp);
    std::vector<char> active(gp.rules.size(), 0);
    bool found_any = false;
    bool limit_hit = false;

    std::function<bool(std::size_t)> try_vector;  // returns true to stop (found or limit)
    std::vector<int> vec(buckets.size(), 0);

    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    auto solve_subset = [&](const std::vector<int>& subset) {
        std::fill(active.begin(), active.end(), 0);
        for (int ri : subset) active[ri] = 1;
        dpll.backtrack_all();
        if (!dpll.init() || !dpll.assume_activation(active)) return;
        SolveOptions inner = opt;
        inner.max_seconds = std::max(0.0, opt.max_seconds - elapsed());
        Status st = dpll.run(inner, stats, active, [&](const std::vector<GLit>& m) {
            AnswerSet as;
            as.lits = m;
            as.applied_cr = subset;
            as.bucket_counts = bucket_counts_of(gp, subset);
            found_any = true;
            return emit(std::move(as));
        });
        if (st == Status::ResourceLimit) limit_hit = true;
    };

    // Enumerate per-bucket count vectors in lexicographic order, strongest
    // bucket first; within a vector, try every subset with those counts.
    std::vector<int> chosen;
    std::function<void(std::size_t)> subsets = [&](std::size_t bi) {
        if (limit_hit) return;
        if (bi == buckets.size()) {
            solve_subset(chosen);
            return;
        }
        const auto& rules = bucket_rules[bi];
        int want = vec[bi];
        std::vector<int> comb(want);
        std::function<void(int, int)> choose = [&](int start, int left) {
            if (limit_hit) return;
            if (left == 0) {
                std::size_t base = chosen.size();
                chosen.insert(chosen.end(), comb.begin(), comb.end());
                subsets(bi + 1);
                chosen.resize(base);
                return;
            }
            for (int i = start; i <= static_cast<int>(rules.size()) - left; ++i) {
                comb[want - left] = rules[i];
                choose(i + 1, left - 1);
            }
        };
        choose(0, want);
    };

    std::function<bool(std::size_t, int)> vectors = [&](std::size_t bi, int total) -> bool {
        if (limit_hit) return true;
        if (bi == buckets.size()) {
            subsets(0);
            return found_any || limit_hit;
        }
        int cap = static_cast<int>(bucket_rules[bi].size());
        if (opt.max_total_cr >= 0) cap = std::min(cap, opt.max_total_cr - total);
        for (int k = 0; k <= cap; ++k) {
            vec[bi] = k;
            if (vectors(bi + 1, total + k)) return true;
        }
        return false;
    };
    vectors(0, 0);

    if (limit_hit && !found_any) return Status::ResourceLimit;
    return found_any ? Status::Consistent : Status::Inconsistent;
}

}  // namespace detail

// Answer sets of the CR-extended program: a lexicographically minimal
// multiset of CR rules (per-priority-bucket counts compared strongest bucket
// first, then total cardinality) is converted to regular rules.
inline SolveResult solve_with_cr(const GroundProgram& gp, const SolveOptions& opt = {}) {
    SolveResult res;
    auto t0 = std::chrono::steady_clock::now();
    res.status = detail::solve_cr_impl(gp, opt, res.stats, [&](AnswerSet as) {
        res.models.push_back(std::move(as));
        return opt.max_models == 0 || static_cast<int>(res.models.size()) < opt.max_models;
    });
    res.stats.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

// Distinct projections (onto `proj` literals) of the CR-minimal answer sets.
// Returns each projection once, in first-found order, together with the CR
// subset of the first witnessing answer set.
struct Projection {
    std::vector<GLit> lits;
    std::vector<int> applied_cr;
};

struct ProjectionResult {
    Status status = Status::Inconsistent;
    std::vector<Projection> projections;
    SolveStats stats;
};

inline ProjectionResult project_with_cr(const GroundProgram& gp, const std::vector<GLit>& proj,
                                        const SolveOptions& opt = {}) {
    ProjectionResult res;
    std::set<std::vector<GLit>> seen;
    res.status = detail::solve_cr_impl(gp, opt, res.stats, [&](AnswerSet as) {
        std::vector<GLit> p;
        for (GLit l : proj)
            if (std::binary_search(as.lits.begin(), as.lits.end(), l)) p.push_back(l);
        if (seen.insert(p).second) res.projections.push_back({std::move(p), as.applied_cr});
        return opt.max_models == 0 || static_cast<int>(seen.size()) < opt.max_models;
    });
    return res;
}

}  // namespace mixplan::solve
