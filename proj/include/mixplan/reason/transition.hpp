#pragma once

#include <functional>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mixplan/lang/ast.hpp"

namespace mixplan::reason {

using namespace mixplan::lang;

// ---------------------------------------------------------------------------
// Deterministic transition semantics over two-valued states. This evaluator
// is independent of the translation/solver path: it interprets the causal
// laws, state constraints and executability conditions directly, and is used
// to replay plans, validate world states, and drive the simulator.
// ---------------------------------------------------------------------------

using AtomSet = std::unordered_set<Atom, AtomHash>;

struct State {
    AtomSet basics;   // true basic fluent instances; everything else is false
    AtomSet derived;  // defined fluent instances, recomputed per state
};

class GroundDomain {
  public:
    struct Law {
        Atom action;
        Literal effect;
        std::vector<Literal> body;  // fluent literals only; statics resolved away
    };
    struct Constraint {
        Literal head;
        std::vector<Literal> body;
        bool defined_head = false;
    };
    struct Exec {
        std::vector<Atom> actions;
        std::vector<Literal> body;
    };

    explicit GroundDomain(const SystemDescription& sd) : sd_(&sd) {
        for (const Atom& a : sd.statics) statics_.insert(a);
        for (const auto& law : sd.causal_laws)
            enumerate(law.vars, law.body, law.neqs, [&](const auto& bind, auto body) {
                Law g;
                g.action = substitute(law.action, bind);
                g.effect = substitute(law.effect, bind);
                g.body = std::move(body);
                laws_.push_back(std::move(g));
            });
        for (const auto& c : sd.constraints)
            enumerate(c.vars, c.body, c.neqs, [&](const auto& bind, auto body) {
                Constraint g;
                g.head = substitute(c.head, bind);
                g.defined_head = sd.symbols.pred(g.head.atom.pred).kind == PredKind::FluentDefined;
                g.body = std::move(body);
                constraints_.push_back(std::move(g));
            });
        for (const auto& e : sd.execs)
            enumerate(e.vars, e.body, e.neqs, [&](const auto& bind, auto body) {
                Exec g;
                for (const Atom& a : e.actions) g.actions.push_back(substitute(a, bind));
                g.body = std::move(body);
                execs_.push_back(std::move(g));
            });
        // All ground agent actions, in deterministic declaration x instance order.
        for (PredId p = 0; p < static_cast<PredId>(sd.symbols.pred_count()); ++p) {
            if (sd.symbols.pred(p).kind != PredKind::ActionAgent) continue;
            std::vector<std::vector<ConstId>> doms;
            for (SortId s : sd.symbols.pred(p).params) doms.push_back(sd.symbols.sorts.members(s));
            std::vector<std::size_t> idx(doms.size(), 0);
            bool empty = false;
            for (const auto& d : doms) empty |= d.empty();
            if (empty) continue;
            while (true) {
                Atom a;
                a.pred = p;
                for (std::size_t k = 0; k < idx.size(); ++k)
                    a.args.push_back(Term::constant(doms[k][idx[k]]));
                agent_actions_.push_back(a);
                std::size_t k = 0;
                for (; k < idx.size(); ++k) {
                    if (++idx[k] < doms[k].size()) break;
                    idx[k] = 0;
                }
                if (k == idx.size()) break;
            }
        }
    }

    const SystemDescription& sd() const { return *sd_; }
    const std::vector<Atom>& agent_actions() const { return agent_actions_; }

    bool static_true(const Atom& a) const { return statics_.count(a) > 0; }

    bool holds(const State& s, const Literal& l) const {
        PredKind k = sd_->symbols.pred(l.atom.pred).kind;
        bool v;
        if (k == PredKind::Static)
            v = static_true(l.atom);
        else if (k == PredKind::FluentDefined)
            v = s.derived.count(l.atom) > 0;
        else
            v = s.basics.count(l.atom) > 0;
        return l.neg ? !v : v;
    }

    bool body_holds(const State& s, const std::vector<Literal>& body) const {
        for (const Literal& l : body)
            if (!holds(s, l)) return false;
        return true;
    }

    // Recomputes defined fluents under the closed world assumption.
    void refresh_derived(State& s) const {
        s.derived.clear();
        bool changed = true;
        while (changed) {
            changed = false;
            for (const Constraint& c : constraints_) {
                if (!c.defined_head || c.head.neg) continue;
                if (s.derived.count(c.head.atom)) continue;
                if (body_holds(s, c.body)) {
                    s.derived.insert(c.head.atom);
                    changed = true;
                }
            }
        }
    }

    // True iff every state constraint holds (after refresh_derived).
    bool consistent(const State& s) const {
        for (const Constraint& c : constraints_) {
            if (c.defined_head) continue;  // definitional, cannot be violated
            if (body_holds(s, c.body) && !holds(s, c.head)) return false;
        }
        return true;
    }

    // Closes a partial set of basic literals under the state constraints.
    // Returns nullopt when the constraints force a contradiction.
    std::optional<State> close(const AtomSet& positive) const {
        State s;
        s.basics = positive;
        AtomSet forced_false;
        bool changed = true;
        while (changed) {
            changed = false;
            refresh_derived(s);
            for (const Constraint& c : constraints_) {
                if (c.defined_head) continue;
                if (!body_holds(s, c.body)) continue;
                if (!c.head.neg) {
                    if (forced_false.count(c.head.atom)) return std::nullopt;
                    if (!s.basics.count(c.head.atom)) {
                        s.basics.insert(c.head.atom);
                        changed = true;
                    }
                } else {
                    if (s.basics.count(c.head.atom)) return std::nullopt;
                    forced_false.insert(c.head.atom);
                }
            }
        }
        refresh_derived(s);
        return consistent(s) ? std::optional<State>(std::move(s)) : std::nullopt;
    }

    // Executability test in a given state (single actions; conditions naming
    // several actions restrict concurrency, which never arises here).
    bool executable(const State& s, const Atom& action) const {
        for (const Exec& e : execs_) {
            if (e.actions.size() != 1) continue;
            if (!(e.actions[0] == action)) continue;
            if (body_holds(s, e.body)) return false;
        }
        return true;
    }

    // Direct effects of an action in a state.
    std::vector<Literal> effects(const State& s, const Atom& action) const {
        std::vector<Literal> out;
        for (const Law& law : laws_) {
            if (!(law.action == action)) continue;
            if (body_holds(s, law.body)) out.push_back(law.effect);
        }
        return out;
    }

    // One deterministic transition. Returns nullopt when the action is
    // inexecutable or the successor violates a state constraint.
    std::optional<State> apply(const State& pre, const Atom& action) const {
        if (!executable(pre, action)) return std::nullopt;
        return apply_effects(pre, effects(pre, action));
    }

    // Successor computation from explicit effect literals (used by the
    // simulator for slipped actions and exogenous events).
    //
    // Direct effects and constraint consequences override inertia. A
    // consequence must never rest on an inertial reading that the new state
    // displaces, so inertial support is tracked per derivation; when a
    // conflict shows a reading to be stale, the closure restarts with that
    // reading suppressed for body evaluation. Suppression never erases
    // surviving inertia from the result: the final state keeps every
    // pre-state atom whose complement was not caused.
    std::optional<State> apply_effects(const State& pre, const std::vector<Literal>& effs) const {
        struct Entry {
            bool value;
            bool from_effect;
            std::vector<Atom> inertial_support;
        };
        AtomSet suppressed;

        for (std::size_t round = 0; round <= pre.basics.size() + 2; ++round) {
            std::unordered_map<Atom, Entry, AtomHash> caused;
            for (const Literal& e : effs) {
                auto it = caused.find(e.atom);
                if (it != caused.end() && it->second.value == e.neg) return std::nullopt;
                caused[e.atom] = {!e.neg, true, {}};
            }
            State view;
            auto rebuild = [&] {
                view.basics.clear();
                for (const Atom& a : pre.basics) {
                    auto it = caused.find(a);
                    if (it != caused.end()) {
                        if (it->second.value) view.basics.insert(a);
                    } else if (!suppressed.count(a)) {
                        view.basics.insert(a);
                    }
                }
                for (const auto& [a, en] : caused)
                    if (en.value) view.basics.insert(a);
                refresh_derived(view);
            };
            // Inertial readings a body rests on, transitively through caused
            // consequences (a stale conclusion can hide behind another).
            auto inertial_in = [&](const Constraint& c) {
                std::vector<Atom> sup;
                auto add = [&](const Atom& a) {
                    for (const Atom& x : sup)
                        if (x == a) return;
                    sup.push_back(a);
                };
                for (const Literal& b : c.body) {
                    if (b.neg) continue;
                    if (sd_->symbols.pred(b.atom.pred).kind != PredKind::FluentBasic) continue;
                    auto it = caused.find(b.atom);
                    if (it == caused.end()) {
                        if (pre.basics.count(b.atom)) add(b.atom);
                    } else {
                        for (const Atom& a : it->second.inertial_support) add(a);
                    }
                }
                return sup;
            };
            rebuild();
            // Monotone closure; first writer wins, disagreements settle below.
            bool changed = true;
            while (changed) {
                changed = false;
                for (const Constraint& c : constraints_) {
                    if (c.defined_head) continue;
                    if (caused.count(c.head.atom)) continue;
                    if (!body_holds(view, c.body)) continue;
                    caused[c.head.atom] = {!c.head.neg, false, inertial_in(c)};
                    rebuild();
                    changed = true;
                }
            }
            // Verification: any constraint still firing against an opposing
            // caused value exposes a stale inertial reading (or a genuine
            // contradiction).
            bool restart = false;
            for (const Constraint& c : constraints_) {
                if (c.defined_head || restart) continue;
                if (!body_holds(view, c.body)) continue;
                auto it = caused.find(c.head.atom);
                if (it == caused.end() || it->second.value == !c.head.neg) continue;
                auto pick = [&](const std::vector<Atom>& sup) {
                    std::vector<Atom> out;
                    for (const Atom& a : sup) {
                        auto ce = caused.find(a);
                        if (ce != caused.end() && !ce->second.value) out.push_back(a);
                    }
                    return out;
                };
                std::vector<Atom> cur = inertial_in(c);
                std::vector<Atom> displaced = pick(it->second.inertial_support);
                if (displaced.empty()) displaced = pick(cur);
                if (displaced.empty()) displaced = it->second.inertial_support;
                if (displaced.empty()) displaced = cur;
                if (displaced.empty()) return std::nullopt;  // both sides caused
                for (const Atom& a : displaced) suppressed.insert(a);
                restart = true;
            }
            if (restart) continue;
            // Final state: caused values plus surviving inertia.
            State out;
            for (const Atom& a : pre.basics) {
                auto it = caused.find(a);
                if (it == caused.end() || it->second.value) out.basics.insert(a);
            }
            for (const auto& [a, en] : caused)
                if (en.value) out.basics.insert(a);
            refresh_derived(out);
            if (!consistent(out)) return std::nullopt;
            return out;
        }
        return std::nullopt;  // did not stabilize
    }

  private:
    Atom substitute(const Atom& a, const std::vector<ConstId>& bind) const {
        Atom g;
        g.pred = a.pred;
        for (const Term& t : a.args)
            g.args.push_back(t.is_var() ? Term::constant(bind[t.id]) : t);
        return g;
    }
    Literal substitute(const Literal& l, const std::vector<ConstId>& bind) const {
        return {substitute(l.atom, bind), l.neg};
    }

    template <typename Fn>
    void enumerate(const std::vector<VarDecl>& vars, const std::vector<Literal>& body,
                   const std::vector<NeqPair>& neqs, Fn&& emit) const {
        std::vector<ConstId> bind(vars.size(), -1);
        std::vector<std::vector<ConstId>> doms;
        for (const auto& v : vars) doms.push_back(sd_->symbols.sorts.members(v.sort));
        std::function<void(std::size_t)> rec = [&](std::size_t i) {
            if (i == vars.size()) {
                for (const auto& [a, b] : neqs) {
                    ConstId va = a.is_var() ? bind[a.id] : a.id;
                    ConstId vb = b.is_var() ? bind[b.id] : b.id;
                    if (va == vb) return;
                }
                std::vector<Literal> fluents;
                for (const Literal& l : body) {
                    Literal g = substitute(l, bind);
                    if (sd_->symbols.pred(g.atom.pred).kind == PredKind::Static) {
                        if (static_true(g.atom) == g.neg) return;  // false static: drop
                    } else {
                        fluents.push_back(std::move(g));
                    }
                }
                emit(bind, std::move(fluents));
                return;
            }
            for (ConstId c : doms[i]) {
                bind[i] = c;
                rec(i + 1);
            }
        };
        rec(0);
    }

    const SystemDescription* sd_;
    AtomSet statics_;
    std::vector<Law> laws_;
    std::vector<Constraint> constraints_;
    std::vector<Exec> execs_;
    std::vector<Atom> agent_actions_;
};

}  // namespace mixplan::reason
