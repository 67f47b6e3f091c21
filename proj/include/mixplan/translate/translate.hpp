#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mixplan/lang/ast.hpp"

namespace mixplan::translate {

using namespace mixplan::lang;

enum class DiagnosisMode { Off, AllExplanations, MinimalCr };

struct TranslationConfig {
    int horizon = 0;  // n: states 0..n, transitions 0..n-1
    DiagnosisMode diagnosis = DiagnosisMode::Off;
    bool scene_explanation = false;
    // Plan-generation choices (added by add_goal) cover steps >= this; earlier
    // steps belong to the committed history.
    int first_free_step = 0;
};

// CR rules hypothesizing exogenous occurrences live in a bucket weaker than
// any user default priority: a fault hypothesis is preferred over abandoning
// domain knowledge.
constexpr int kDiagnosisBucket = 1 << 20;

namespace names {
inline std::string holds(const std::string& fluent) { return "holds__" + fluent; }
inline std::string occurs(const std::string& action) { return "occurs__" + action; }
inline std::string expl(const std::string& action) { return "expl__" + action; }
inline std::string default_ab(const std::string& id) { return "abd__" + id; }
inline std::string attr_ab(const std::string& id) { return "abr__" + id; }
inline std::string step(int i) { return "s" + std::to_string(i); }
inline const char* step_sort = "__step";
inline const char* goal_met = "goal_met";
}  // namespace names

// ---------------------------------------------------------------------------
// Reverse vocabulary: maps machinery atoms in a translated program back to
// domain-level actions/fluents. Reconstructed from names, so it works on any
// translated Program or GroundProgram sharing the symbol conventions.
// ---------------------------------------------------------------------------
struct Vocab {
    const Symbols* sym = nullptr;

    explicit Vocab(const Symbols& s) : sym(&s) {}

    std::optional<int> step_of(ConstId c) const {
        const std::string& n = sym->sorts.const_name(c);
        if (n.size() < 2 || n[0] != 's') return std::nullopt;
        for (std::size_t i = 1; i < n.size(); ++i)
            if (!isdigit(static_cast<unsigned char>(n[i]))) return std::nullopt;
        if (sym->sorts.sort_name(sym->sorts.const_sort(c)) != names::step_sort) return std::nullopt;
        return std::stoi(n.substr(1));
    }

    // Splits holds__f(args..., step) / occurs__a(...) / expl__a(...).
    struct Timed {
        std::string kind;  // "holds", "occurs", "expl"
        std::string base;  // original predicate name
        Atom inner;        // base atom without the step argument
        int step = -1;
    };

    std::optional<Timed> split(const Atom& a, const Symbols& base_syms) const {
        const std::string& n = sym->pred(a.pred).name;
        for (const char* k : {"holds", "occurs", "expl"}) {
            std::string prefix = std::string(k) + "__";
            if (n.rfind(prefix, 0) != 0) continue;
            Timed t;
            t.kind = k;
            t.base = n.substr(prefix.size());
            auto bp = base_syms.pred_id(t.base);
            if (!bp || a.args.empty()) return std::nullopt;
            auto st = step_of(a.args.back().id);
            if (!st) return std::nullopt;
            t.step = *st;
            t.inner.pred = *bp;
            t.inner.args.assign(a.args.begin(), a.args.end() - 1);
            return t;
        }
        return std::nullopt;
    }
};

namespace detail {

// Drops variables a rule no longer references and renumbers the rest.
inline void compact_vars(Rule& r) {
    std::vector<int> map(r.vars.size(), -1);
    std::vector<VarDecl> kept;
    auto touch = [&](Term& t) {
        if (!t.is_var()) return;
        if (map[t.id] < 0) {
            map[t.id] = static_cast<int>(kept.size());
            kept.push_back(r.vars[t.id]);
        }
        t.id = map[t.id];
    };
    auto walk = [&](std::vector<Literal>& ls) {
        for (auto& l : ls)
            for (auto& t : l.atom.args) touch(t);
    };
    walk(r.head);
    walk(r.pos);
    walk(r.negs);
    for (auto& [a, b] : r.neqs) {
        touch(a);
        touch(b);
    }
    r.vars = std::move(kept);
}

class Translator {
  public:
    Translator(const SystemDescription& sd, const History& h, const TranslationConfig& cfg)
        : sd_(sd), hist_(h), cfg_(cfg) {
        prog_.symbols = sd.symbols;
        prog_.statics = sd.statics;
        prog_.horizon = cfg.horizon;
        sym_ = &prog_.symbols;
        step_sort_ = sym_->sorts.add_sort(names::step_sort);
        for (int i = 0; i <= cfg.horizon; ++i)
            steps_.push_back(sym_->sorts.add_instance(names::step(i), names::step_sort));
        declare_timed_predicates();
    }

    Program run() {
        check_history();
        emit_causal_laws();
        emit_state_constraints();
        emit_executability();
        emit_inertia();
        emit_cwa_defined();
        emit_cwa_actions();
        emit_awareness();
        emit_reality_checks();
        emit_hpd_facts();
        emit_defaults();
        emit_diagnosis();
        return std::move(prog_);
    }

    // Exposed pieces reused by add_goal/add_scene_axioms.
    static PredId timed_pred(Symbols& sym, const std::string& prefix_name, PredId base,
                             SortId step_sort) {
        const PredDecl& d = sym.pred(base);
        std::vector<SortId> params = d.params;
        params.push_back(step_sort);
        return sym.add_pred(prefix_name, PredKind::Internal, std::move(params));
    }

  private:
    void declare_timed_predicates() {
        for (PredId p = 0; p < static_cast<PredId>(sym_->pred_count()); ++p) {
            PredKind k = sym_->pred(p).kind;
            if (k == PredKind::FluentBasic || k == PredKind::FluentDefined)
                holds_[p] = timed_pred(*sym_, names::holds(sym_->pred(p).name), p, step_sort_);
            else if (k == PredKind::ActionAgent || k == PredKind::ActionExogenous)
                occurs_[p] = timed_pred(*sym_, names::occurs(sym_->pred(p).name), p, step_sort_);
        }
    }

    void check_history() {
        for (const auto& o : hist_.obs)
            if (o.step > cfg_.horizon)
                throw ValidationError("observation step " + std::to_string(o.step) +
                                      " exceeds horizon " + std::to_string(cfg_.horizon));
        for (const auto& a : hist_.hpd)
            if (a.step >= cfg_.horizon)
                throw ValidationError("action step " + std::to_string(a.step) +
                                      " exceeds horizon " + std::to_string(cfg_.horizon));
    }

    Term step_term(int i) const { return Term::constant(steps_[i]); }

    Literal timed(const Literal& l, int step) const {
        Literal out;
        out.neg = l.neg;
        PredKind k = sym_->pred(l.atom.pred).kind;
        if (k == PredKind::Static) return l;  // statics are untimed
        out.atom.pred = holds_.at(l.atom.pred);
        out.atom.args = l.atom.args;
        out.atom.args.push_back(step_term(step));
        return out;
    }

    Atom occurs(const Atom& action, int step) const {
        Atom out;
        out.pred = occurs_.at(action.pred);
        out.args = action.args;
        out.args.push_back(step_term(step));
        return out;
    }

    void add(Rule r) {
        detail::compact_vars(r);
        prog_.add_rule(std::move(r));
    }

    void emit_causal_laws() {
        for (std::size_t li = 0; li < sd_.causal_laws.size(); ++li) {
            const CausalLaw& law = sd_.causal_laws[li];
            for (int i = 0; i < cfg_.horizon; ++i) {
                Rule r;
                r.vars = law.vars;
                r.head = {timed(law.effect, i + 1)};
                r.pos.push_back(Literal{occurs(law.action, i), false});
                for (const Literal& b : law.body) r.pos.push_back(timed(b, i));
                r.neqs = law.neqs;
                r.prov = {RuleSchema::CausalLaw, static_cast<int>(li), i};
                add(std::move(r));
            }
        }
    }

    void emit_state_constraints() {
        for (std::size_t ci = 0; ci < sd_.constraints.size(); ++ci) {
            const StateConstraint& c = sd_.constraints[ci];
            for (int i = 0; i <= cfg_.horizon; ++i) {
                Rule r;
                r.vars = c.vars;
                r.head = {timed(c.head, i)};
                for (const Literal& b : c.body) r.pos.push_back(timed(b, i));
                r.neqs = c.neqs;
                r.prov = {RuleSchema::StateConstraint, static_cast<int>(ci), i};
                add(std::move(r));
            }
        }
    }

    void emit_executability() {
        for (std::size_t ei = 0; ei < sd_.execs.size(); ++ei) {
            const Executability& ex = sd_.execs[ei];
            for (int i = 0; i < cfg_.horizon; ++i) {
                Rule r;
                r.vars = ex.vars;
                for (const Atom& a : ex.actions) r.pos.push_back(Literal{occurs(a, i), false});
                for (const Literal& b : ex.body) r.pos.push_back(timed(b, i));
                r.neqs = ex.neqs;
                r.prov = {RuleSchema::Executability, static_cast<int>(ei), i};
                add(std::move(r));
            }
        }
    }

    // Fresh variable scope covering one predicate's parameters.
    static Rule scoped_rule(const Symbols& sym, PredId base) {
        Rule r;
        const auto& params = sym.pred(base).params;
        for (std::size_t i = 0; i < params.size(); ++i)
            r.vars.push_back({"X" + std::to_string(i), params[i]});
        return r;
    }

    Atom pred_atom(PredId timed_pred_id, std::size_t nparams, int step) const {
        Atom a;
        a.pred = timed_pred_id;
        for (std::size_t i = 0; i < nparams; ++i) a.args.push_back(Term::var(static_cast<VarId>(i)));
        a.args.push_back(step_term(step));
        return a;
    }

    void emit_inertia() {
        for (const auto& [base, hp] : holds_) {
            if (sym_->pred(base).kind != PredKind::FluentBasic) continue;
            std::size_t np = sym_->pred(base).params.size();
            for (int i = 0; i < cfg_.horizon; ++i) {
                for (bool neg : {false, true}) {
                    Rule r = scoped_rule(*sym_, base);
                    r.head = {Literal{pred_atom(hp, np, i + 1), neg}};
                    r.pos = {Literal{pred_atom(hp, np, i), neg}};
                    r.negs = {Literal{pred_atom(hp, np, i + 1), !neg}};
                    r.prov = {neg ? RuleSchema::InertiaNeg : RuleSchema::InertiaPos, base, i};
                    add(std::move(r));
                }
            }
        }
    }

    void emit_cwa_defined() {
        for (const auto& [base, hp] : holds_) {
            if (sym_->pred(base).kind != PredKind::FluentDefined) continue;
            std::size_t np = sym_->pred(base).params.size();
            for (int i = 0; i <= cfg_.horizon; ++i) {
                Rule r = scoped_rule(*sym_, base);
                r.head = {Literal{pred_atom(hp, np, i), true}};
                r.negs = {Literal{pred_atom(hp, np, i), false}};
                r.prov = {RuleSchema::CwaDefined, base, i};
                add(std::move(r));
            }
        }
    }

    void emit_cwa_actions() {
        for (const auto& [base, op] : occurs_) {
            bool exo = sym_->pred(base).kind == PredKind::ActionExogenous;
            // The diagnosis guess covers exogenous actions at every step, so
            // the closed world assumption is withheld for them.
            if (exo && cfg_.diagnosis != DiagnosisMode::Off) continue;
            std::size_t np = sym_->pred(base).params.size();
            for (int i = 0; i < cfg_.horizon; ++i) {
                Rule r = scoped_rule(*sym_, base);
                r.head = {Literal{pred_atom(op, np, i), true}};
                r.negs = {Literal{pred_atom(op, np, i), false}};
                r.prov = {RuleSchema::CwaAction, base, i};
                add(std::move(r));
            }
        }
    }

    void emit_awareness() {
        for (const auto& [base, hp] : holds_) {
            if (sym_->pred(base).kind != PredKind::FluentBasic) continue;
            std::size_t np = sym_->pred(base).params.size();
            Rule r = scoped_rule(*sym_, base);
            r.head = {Literal{pred_atom(hp, np, 0), false}, Literal{pred_atom(hp, np, 0), true}};
            r.prov = {RuleSchema::Awareness, base, 0};
            add(std::move(r));
        }
    }

    void emit_reality_checks() {
        for (std::size_t oi = 0; oi < hist_.obs.size(); ++oi) {
            const ObsRecord& o = hist_.obs[oi];
            Rule r;
            // obs(f, true, i) forbids -holds(f, i); obs(f, false, i) forbids
            // holds(f, i). Specialized per record: obs atoms never appear.
            Literal guard = timed(Literal{o.fluent, false}, o.step);
            guard.neg = o.truth;
            r.pos = {guard};
            r.prov = {RuleSchema::RealityCheck, static_cast<int>(oi), o.step};
            add(std::move(r));
        }
    }

    void emit_hpd_facts() {
        for (std::size_t hi = 0; hi < hist_.hpd.size(); ++hi) {
            const HpdRecord& h = hist_.hpd[hi];
            Rule r;
            r.head = {Literal{occurs(h.action, h.step), false}};
            r.prov = {RuleSchema::HpdFact, static_cast<int>(hi), h.step};
            add(std::move(r));
        }
    }

    // Every default becomes: the default rule guarded by an abnormality atom,
    // a contrapositive making the conclusion false once the default is
    // withdrawn, and a CR rule (in the default's priority bucket) that may
    // withdraw it. Withdrawal is thus always accounted for by CR minimality.
    void emit_defaults() {
        for (std::size_t di = 0; di < hist_.defaults.size(); ++di) {
            const InitialDefault& d = hist_.defaults[di];
            bool withdrawn = false;
            for (const auto& id : hist_.withdrawn_defaults)
                if (id == d.id) withdrawn = true;
            if (withdrawn) continue;
            if (sym_->pred(d.head.atom.pred).kind != PredKind::FluentBasic)
                throw ValidationError("default '" + d.id + "' head must be a basic fluent");
            PredId ab = sym_->add_pred(names::default_ab(d.id), PredKind::Internal, {});
            Atom ab_atom;
            ab_atom.pred = ab;

            Rule rule;
            rule.head = {timed(d.head, 0)};
            for (const Literal& b : d.body) rule.pos.push_back(timed(b, 0));
            rule.negs = {Literal{ab_atom, false}};
            rule.prov = {RuleSchema::DefaultRule, static_cast<int>(di), 0};
            add(std::move(rule));

            Rule contra;
            contra.head = {timed(d.head.complement(), 0)};
            contra.pos.push_back(Literal{ab_atom, false});
            for (const Literal& b : d.body) contra.pos.push_back(timed(b, 0));
            contra.prov = {RuleSchema::DefaultContra, static_cast<int>(di), 0};
            add(std::move(contra));

            Rule cr;
            cr.cr = true;
            cr.cr_bucket = d.priority;
            cr.head = {Literal{ab_atom, false}};
            for (const Literal& b : d.body) cr.pos.push_back(timed(b, 0));
            cr.prov = {RuleSchema::DefaultCr, static_cast<int>(di), 0};
            add(std::move(cr));
        }
    }

    void emit_diagnosis() {
        if (cfg_.diagnosis == DiagnosisMode::Off) return;
        for (const auto& [base, op] : occurs_) {
            if (sym_->pred(base).kind != PredKind::ActionExogenous) continue;
            std::size_t np = sym_->pred(base).params.size();
            for (int i = 0; i < cfg_.horizon; ++i) {
                if (cfg_.diagnosis == DiagnosisMode::AllExplanations) {
                    Rule r = scoped_rule(*sym_, base);
                    r.head = {Literal{pred_atom(op, np, i), false},
                              Literal{pred_atom(op, np, i), true}};
                    r.prov = {RuleSchema::DiagGuess, base, i};
                    add(std::move(r));
                } else {
                    Rule r = scoped_rule(*sym_, base);
                    r.cr = true;
                    r.cr_bucket = kDiagnosisBucket;
                    r.head = {Literal{pred_atom(op, np, i), false}};
                    r.prov = {RuleSchema::DiagCr, base, i};
                    add(std::move(r));
                }
            }
        }
        emit_expl_rules();
    }

    // expl(a, i) :- occurs(a, i) for every ground exogenous action with no
    // matching hpd record ("not hpd" is evaluated here: hpd facts are fixed).
    void emit_expl_rules() {
        for (const auto& [base, op] : occurs_) {
            if (sym_->pred(base).kind != PredKind::ActionExogenous) continue;
            PredId ep = timed_pred(*sym_, names::expl(sym_->pred(base).name), base, step_sort_);
            const auto& params = sym_->pred(base).params;
            std::vector<std::vector<ConstId>> doms;
            for (SortId s : params) doms.push_back(sym_->sorts.members(s));
            std::vector<std::size_t> idx(params.size(), 0);
            while (true) {
                Atom action;
                action.pred = base;
                for (std::size_t k = 0; k < idx.size(); ++k)
                    action.args.push_back(Term::constant(doms[k][idx[k]]));
                bool any_empty = false;
                for (const auto& d : doms) any_empty |= d.empty();
                if (!any_empty) {
                    for (int i = 0; i < cfg_.horizon; ++i) {
                        bool recorded = false;
                        for (const auto& h : hist_.hpd)
                            if (h.action == action && h.step == i) recorded = true;
                        if (recorded) continue;
                        Rule r;
                        Atom ea = action;
                        ea.pred = ep;
                        ea.args.push_back(step_term(i));
                        r.head = {Literal{ea, false}};
                        r.pos = {Literal{occurs(action, i), false}};
                        r.prov = {RuleSchema::DiagExpl, base, i};
                        add(std::move(r));
                    }
                }
                std::size_t k = 0;
                for (; k < idx.size(); ++k) {
                    if (++idx[k] < doms[k].size()) break;
                    idx[k] = 0;
                }
                if (k == idx.size()) break;
            }
        }
    }

    const SystemDescription& sd_;
    const History& hist_;
    const TranslationConfig& cfg_;
    Program prog_;
    Symbols* sym_ = nullptr;
    SortId step_sort_ = kNoSort;
    std::vector<ConstId> steps_;
    std::map<PredId, PredId> holds_;   // base fluent -> holds__ pred
    std::map<PredId, PredId> occurs_;  // base action -> occurs__ pred
};

}  // namespace detail

// Compiles D_H plus a history into the CR-Prolog program over steps 0..n.
inline Program translate(const SystemDescription& sd, const History& h,
                         const TranslationConfig& cfg) {
    detail::Translator t(sd, h, cfg);
    return t.run();
}

namespace detail {

inline Literal timed_ground(Symbols& sym, const Literal& l, int step) {
    PredId hp = sym.require_pred(names::holds(sym.pred(l.atom.pred).name));
    Literal out;
    out.neg = l.neg;
    out.atom.pred = hp;
    out.atom.args = l.atom.args;
    out.atom.args.push_back(Term::constant(*sym.sorts.const_id(names::step(step))));
    return out;
}

}  // namespace detail

// Adds the goal constraint and the plan-generation choice for agent actions
// at steps the history leaves open. One agent action per step: plans are
// strictly sequential.
inline Program add_goal(Program p, const std::vector<Literal>& goal, const TranslationConfig& cfg) {
    if (goal.empty()) throw ValidationError("empty goal");
    Symbols& sym = p.symbols;
    int n = cfg.horizon;

    // The plan choice supersedes the action CWA on the steps it covers.
    std::vector<Rule> kept;
    for (Rule& r : p.rules) {
        bool drop = r.prov.schema == RuleSchema::CwaAction && r.prov.step >= cfg.first_free_step &&
                    sym.pred(r.prov.source).kind == PredKind::ActionAgent;
        if (!drop) kept.push_back(std::move(r));
    }
    p.rules = std::move(kept);
    int id = 0;
    for (Rule& r : p.rules) r.id = id++;

    PredId goal_met = sym.add_pred(names::goal_met, PredKind::Internal, {});
    Rule def;
    def.head = {Literal{Atom{goal_met, {}}, false}};
    for (const Literal& g : goal) {
        if (!g.atom.ground()) throw ValidationError("goal literal must be ground");
        PredKind k = sym.pred(g.atom.pred).kind;
        if (k != PredKind::FluentBasic && k != PredKind::FluentDefined)
            throw ValidationError("goal must consist of fluent literals");
        def.pos.push_back(detail::timed_ground(sym, g, n));
    }
    def.prov = {RuleSchema::GoalDef, 0, n};
    p.add_rule(std::move(def));

    Rule must;
    must.negs = {Literal{Atom{goal_met, {}}, false}};
    must.prov = {RuleSchema::GoalConstraint, 0, n};
    p.add_rule(std::move(must));

    // occurs(A, I) | -occurs(A, I) for agent actions on free steps.
    std::vector<std::pair<PredId, PredId>> agent_preds;  // (base, occurs pred)
    for (PredId base = 0; base < static_cast<PredId>(sym.pred_count()); ++base) {
        if (sym.pred(base).kind != PredKind::ActionAgent) continue;
        auto op = sym.pred_id(names::occurs(sym.pred(base).name));
        if (op) agent_preds.emplace_back(base, *op);
    }
    auto step_const = [&](int i) { return Term::constant(*sym.sorts.const_id(names::step(i))); };
    auto occ_atom = [&](PredId base, PredId op, int i, int var_offset) {
        Atom a;
        a.pred = op;
        std::size_t np = sym.pred(base).params.size();
        for (std::size_t k = 0; k < np; ++k)
            a.args.push_back(Term::var(static_cast<VarId>(var_offset + k)));
        a.args.push_back(step_const(i));
        return a;
    };
    for (const auto& [base, op] : agent_preds) {
        for (int i = cfg.first_free_step; i < n; ++i) {
            Rule r;
            const auto& params = sym.pred(base).params;
            for (std::size_t k = 0; k < params.size(); ++k)
                r.vars.push_back({"X" + std::to_string(k), params[k]});
            Atom a = occ_atom(base, op, i, 0);
            r.head = {Literal{a, false}, Literal{a, true}};
            r.prov = {RuleSchema::PlanChoice, base, i};
            p.add_rule(std::move(r));
        }
    }
    // At most one agent action per step.
    for (std::size_t x = 0; x < agent_preds.size(); ++x) {
        for (std::size_t y = x; y < agent_preds.size(); ++y) {
            auto [bx, ox] = agent_preds[x];
            auto [by, oy] = agent_preds[y];
            std::size_t nx = sym.pred(bx).params.size();
            std::size_t ny = sym.pred(by).params.size();
            for (int i = cfg.first_free_step; i < n; ++i) {
                if (x != y) {
                    Rule r;
                    for (std::size_t k = 0; k < nx; ++k)
                        r.vars.push_back({"X" + std::to_string(k), sym.pred(bx).params[k]});
                    for (std::size_t k = 0; k < ny; ++k)
                        r.vars.push_back({"Y" + std::to_string(k), sym.pred(by).params[k]});
                    r.pos = {Literal{occ_atom(bx, ox, i, 0), false},
                             Literal{occ_atom(by, oy, i, static_cast<int>(nx)), false}};
                    r.prov = {RuleSchema::PlanMutex, static_cast<int>(x * 100 + y), i};
                    p.add_rule(std::move(r));
                } else {
                    // Same predicate, different argument tuples.
                    for (std::size_t j = 0; j < nx; ++j) {
                        Rule r;
                        for (std::size_t k = 0; k < nx; ++k)
                            r.vars.push_back({"X" + std::to_string(k), sym.pred(bx).params[k]});
                        for (std::size_t k = 0; k < nx; ++k)
                            r.vars.push_back({"Y" + std::to_string(k), sym.pred(bx).params[k]});
                        r.pos = {Literal{occ_atom(bx, ox, i, 0), false},
                                 Literal{occ_atom(bx, ox, i, static_cast<int>(nx)), false}};
                        r.neqs = {{Term::var(static_cast<VarId>(j)),
                                   Term::var(static_cast<VarId>(nx + j))}};
                        r.prov = {RuleSchema::PlanMutex, static_cast<int>(x * 100 + x), i};
                        p.add_rule(std::move(r));
                    }
                }
            }
        }
    }
    return p;
}

// ---------------------------------------------------------------------------
// Scene explanation: a separate, atemporal program. Class attribute rules are
// individually defeasible; a CR rule assigns class labels; a reality check
// makes unlabeled objects inconsistent.
// ---------------------------------------------------------------------------
inline Program scene_base(const SystemDescription& sd) {
    Program p;
    p.symbols = sd.symbols;
    p.statics = sd.statics;
    return p;
}

inline Program add_scene_axioms(Program p, const SystemDescription& sd,
                                const std::vector<Literal>& observed,
                                const std::vector<ConstId>& unlabeled) {
    Symbols& sym = p.symbols;
    for (const Literal& l : observed) {
        if (!l.atom.ground()) throw ValidationError("scene facts must be ground");
        Rule r;
        r.head = {l};
        r.prov = {RuleSchema::SceneFact, 0, -1};
        p.add_rule(std::move(r));
    }
    if (unlabeled.empty()) return p;

    SortId cls = sym.sorts.sort_id("class");
    if (cls == kNoSort) throw ValidationError("scene explanation requires a 'class' sort");
    // Object sort: taken from the first attribute rule's head, else from the
    // declared member predicate.
    SortId obj = kNoSort;
    if (auto mp = sym.pred_id("member"); mp && !sym.pred(*mp).params.empty())
        obj = sym.pred(*mp).params[0];
    if (obj == kNoSort && !sd.attr_rules.empty())
        obj = sym.pred(sd.attr_rules[0].head.atom.pred).params[0];
    if (obj == kNoSort) throw ValidationError("cannot determine the scene object sort");
    PredId member = sym.add_pred("member", PredKind::Internal, {obj, cls});
    PredId is_a = sym.add_pred("is_a", PredKind::Internal, {obj, cls});
    PredId class_known = sym.add_pred("class_known", PredKind::Internal, {obj});

    // Functional attributes: one value per object.
    for (PredId a = 0; a < static_cast<PredId>(sym.pred_count()); ++a) {
        if (sym.pred(a).kind != PredKind::Attribute) continue;
        const auto& params = sym.pred(a).params;
        if (params.size() != 2) continue;
        Rule r;
        r.vars = {{"O", params[0]}, {"V1", params[1]}, {"V2", params[1]}};
        r.head = {Literal{Atom{a, {Term::var(0), Term::var(2)}}, true}};
        r.pos = {Literal{Atom{a, {Term::var(0), Term::var(1)}}, false}};
        r.neqs = {{Term::var(1), Term::var(2)}};
        r.prov = {RuleSchema::SceneFunctional, a, -1};
        p.add_rule(std::move(r));
    }

    // member(O, C) :- is_a(O, C).   class_known(O) :- is_a(O, C).
    {
        Rule r;
        r.vars = {{"O", obj}, {"C", cls}};
        r.head = {Literal{Atom{member, {Term::var(0), Term::var(1)}}, false}};
        r.pos = {Literal{Atom{is_a, {Term::var(0), Term::var(1)}}, false}};
        r.prov = {RuleSchema::SceneMember, 0, -1};
        p.add_rule(std::move(r));
    }
    {
        Rule r;
        r.vars = {{"O", obj}, {"C", cls}};
        r.head = {Literal{Atom{class_known, {Term::var(0)}}, false}};
        r.pos = {Literal{Atom{is_a, {Term::var(0), Term::var(1)}}, false}};
        r.prov = {RuleSchema::SceneClassKnown, 0, -1};
        p.add_rule(std::move(r));
    }

    // Defeasible attribute rules with per-rule relaxation.
    for (std::size_t ri = 0; ri < sd.attr_rules.size(); ++ri) {
        const AttributeRule& ar = sd.attr_rules[ri];
        PredId ab = sym.add_pred(names::attr_ab(ar.id), PredKind::Internal, {obj});
        // Object variable: the first argument of the head.
        if (ar.head.atom.args.empty() || !ar.head.atom.args[0].is_var())
            throw ValidationError("attribute rule '" + ar.id + "' head must start with the object");
        Term ovar = ar.head.atom.args[0];

        Rule r;
        r.vars = ar.vars;
        r.head = {ar.head};
        r.pos = ar.body;
        r.neqs = ar.neqs;
        r.negs = {Literal{Atom{ab, {ovar}}, false}};
        r.prov = {RuleSchema::SceneAttr, static_cast<int>(ri), -1};
        p.add_rule(std::move(r));

        Rule cr;
        cr.cr = true;
        cr.cr_bucket = 0;
        cr.vars = ar.vars;
        cr.head = {Literal{Atom{ab, {ovar}}, false}};
        for (const Literal& b : ar.body)
            if (b.atom.pred == member) cr.pos.push_back(b);
        cr.prov = {RuleSchema::SceneAttrCr, static_cast<int>(ri), -1};
        p.add_rule(std::move(cr));
    }

    for (ConstId o : unlabeled) {
        Rule check;
        check.negs = {Literal{Atom{class_known, {Term::constant(o)}}, false}};
        check.prov = {RuleSchema::SceneRealityCheck, o, -1};
        p.add_rule(std::move(check));

        Rule label;
        label.cr = true;
        label.cr_bucket = 0;
        label.vars = {{"C", cls}};
        label.head = {Literal{Atom{is_a, {Term::constant(o), Term::var(0)}}, false}};
        label.prov = {RuleSchema::SceneLabelCr, o, -1};
        p.add_rule(std::move(label));
    }
    return p;
}

}  // namespace mixplan::translate
