#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mixplan/util/error.hpp"

namespace mixplan::lang {

using SortId = std::int32_t;
using ConstId = std::int32_t;
using PredId = std::int32_t;
using VarId = std::int32_t;

constexpr SortId kNoSort = -1;

// ---------------------------------------------------------------------------
// Sort hierarchy: sorts form a DAG under the subsort relation; constants are
// declared as instances of exactly one sort and are members of every ancestor.
// ---------------------------------------------------------------------------
class SortHierarchy {
  public:
    SortId add_sort(const std::string& name) {
        auto it = sort_ids_.find(name);
        if (it != sort_ids_.end()) return it->second;
        SortId id = static_cast<SortId>(sort_names_.size());
        sort_names_.push_back(name);
        sort_ids_.emplace(name, id);
        parents_.emplace_back();
        dirty_ = true;
        return id;
    }

    void add_subsort(const std::string& child, const std::string& parent) {
        SortId c = require_sort(child);
        SortId p = require_sort(parent);
        auto& ps = parents_[c];
        if (std::find(ps.begin(), ps.end(), p) == ps.end()) ps.push_back(p);
        dirty_ = true;
    }

    ConstId add_instance(const std::string& name, const std::string& sort) {
        SortId s = require_sort(sort);
        auto it = const_ids_.find(name);
        if (it != const_ids_.end()) {
            if (const_sort_[it->second] != s)
                throw ValidationError("constant '" + name + "' declared with two sorts");
            return it->second;
        }
        ConstId id = static_cast<ConstId>(const_names_.size());
        const_names_.push_back(name);
        const_ids_.emplace(name, id);
        const_sort_.push_back(s);
        dirty_ = true;
        return id;
    }

    bool has_sort(const std::string& name) const { return sort_ids_.count(name) > 0; }

    SortId sort_id(const std::string& name) const {
        auto it = sort_ids_.find(name);
        return it == sort_ids_.end() ? kNoSort : it->second;
    }

    SortId require_sort(const std::string& name) const {
        auto it = sort_ids_.find(name);
        if (it == sort_ids_.end()) throw ValidationError("undeclared sort '" + name + "'");
        return it->second;
    }

    std::optional<ConstId> const_id(const std::string& name) const {
        auto it = const_ids_.find(name);
        if (it == const_ids_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& sort_name(SortId s) const { return sort_names_[s]; }
    const std::string& const_name(ConstId c) const { return const_names_[c]; }
    SortId const_sort(ConstId c) const { return const_sort_[c]; }
    std::size_t sort_count() const { return sort_names_.size(); }
    std::size_t const_count() const { return const_names_.size(); }

    // Reflexive-transitive subsort test: is `a` a subsort of `b`?
    bool is_subsort(SortId a, SortId b) const {
        refresh();
        return ancestors_[a][b] != 0;
    }

    // Membership widens along the hierarchy: an instance of `room` is a
    // member of `location` when room <= location.
    bool is_member(ConstId c, SortId s) const { return is_subsort(const_sort_[c], s); }

    const std::vector<ConstId>& members(SortId s) const {
        refresh();
        return members_[s];
    }

    // Throws if the subsort graph has a cycle; called after parsing.
    void check_acyclic() const {
        std::vector<int> state(sort_names_.size(), 0);  // 0=unseen 1=open 2=done
        for (SortId s = 0; s < static_cast<SortId>(sort_names_.size()); ++s) dfs_cycle(s, state);
    }

    bool operator==(const SortHierarchy& o) const {
        return sort_names_ == o.sort_names_ && parents_ == o.parents_ &&
               const_names_ == o.const_names_ && const_sort_ == o.const_sort_;
    }

  private:
    void dfs_cycle(SortId s, std::vector<int>& state) const {
        if (state[s] == 2) return;
        if (state[s] == 1) throw ValidationError("sort cycle through '" + sort_names_[s] + "'");
        state[s] = 1;
        for (SortId p : parents_[s]) dfs_cycle(p, state);
        state[s] = 2;
    }

    void refresh() const {
        if (!dirty_) return;
        check_acyclic();
        std::size_t n = sort_names_.size();
        ancestors_.assign(n, std::vector<char>(n, 0));
        for (SortId s = 0; s < static_cast<SortId>(n); ++s) close_from(s, s);
        members_.assign(n, {});
        for (ConstId c = 0; c < static_cast<ConstId>(const_names_.size()); ++c)
            for (SortId s = 0; s < static_cast<SortId>(n); ++s)
                if (ancestors_[const_sort_[c]][s]) members_[s].push_back(c);
        dirty_ = false;
    }

    void close_from(SortId origin, SortId cur) const {
        if (ancestors_[origin][cur]) return;
        ancestors_[origin][cur] = 1;
        for (SortId p : parents_[cur]) close_from(origin, p);
    }

    std::vector<std::string> sort_names_;
    std::unordered_map<std::string, SortId> sort_ids_;
    std::vector<std::vector<SortId>> parents_;
    std::vector<std::string> const_names_;
    std::unordered_map<std::string, ConstId> const_ids_;
    std::vector<SortId> const_sort_;

    mutable bool dirty_ = true;
    mutable std::vector<std::vector<char>> ancestors_;  // [sort][ancestor]
    mutable std::vector<std::vector<ConstId>> members_;
};

// ---------------------------------------------------------------------------
// Predicates. One table covers statics, fluents, actions, scene attributes
// and machinery predicates introduced by the translator.
// ---------------------------------------------------------------------------
enum class PredKind {
    Static,
    FluentBasic,
    FluentDefined,
    ActionAgent,
    ActionExogenous,
    Attribute,  // scene-description attribute, functional in its last argument
    Internal,   // introduced by translation (holds__*, occurs__*, ...)
};

struct PredDecl {
    std::string name;
    PredKind kind = PredKind::Static;
    std::vector<SortId> params;

    bool operator==(const PredDecl& o) const {
        return name == o.name && kind == o.kind && params == o.params;
    }
};

class Symbols {
  public:
    SortHierarchy sorts;

    PredId add_pred(const std::string& name, PredKind kind, std::vector<SortId> params) {
        auto it = pred_ids_.find(name);
        if (it != pred_ids_.end()) {
            const PredDecl& d = preds_[it->second];
            if (d.kind != kind || d.params != params)
                throw ValidationError("predicate '" + name + "' redeclared with a different signature");
            return it->second;
        }
        PredId id = static_cast<PredId>(preds_.size());
        preds_.push_back({name, kind, std::move(params)});
        pred_ids_.emplace(name, id);
        return id;
    }

    std::optional<PredId> pred_id(const std::string& name) const {
        auto it = pred_ids_.find(name);
        if (it == pred_ids_.end()) return std::nullopt;
        return it->second;
    }

    PredId require_pred(const std::string& name) const {
        auto id = pred_id(name);
        if (!id) throw ValidationError("undeclared predicate '" + name + "'");
        return *id;
    }

    const PredDecl& pred(PredId id) const { return preds_[id]; }
    std::size_t pred_count() const { return preds_.size(); }

    bool operator==(const Symbols& o) const { return sorts == o.sorts && preds_ == o.preds_; }

  private:
    std::vector<PredDecl> preds_;
    std::unordered_map<std::string, PredId> pred_ids_;
};

// ---------------------------------------------------------------------------
// Terms, atoms, literals.
// ---------------------------------------------------------------------------
struct Term {
    enum class Kind : std::uint8_t { Const, Var } kind = Kind::Const;
    std::int32_t id = 0;  // ConstId or VarId (index into the owning scope)

    static Term constant(ConstId c) { return {Kind::Const, c}; }
    static Term var(VarId v) { return {Kind::Var, v}; }
    bool is_var() const { return kind == Kind::Var; }
    bool operator==(const Term& o) const { return kind == o.kind && id == o.id; }
};

struct Atom {
    PredId pred = -1;
    std::vector<Term> args;
    bool operator==(const Atom& o) const { return pred == o.pred && args == o.args; }
    bool ground() const {
        for (const Term& t : args)
            if (t.is_var()) return false;
        return true;
    }
};

// A classical literal: an atom or its strong negation.
struct Literal {
    Atom atom;
    bool neg = false;
    bool operator==(const Literal& o) const { return neg == o.neg && atom == o.atom; }
    Literal complement() const { return {atom, !neg}; }
};

struct VarDecl {
    std::string name;
    SortId sort = kNoSort;
    bool operator==(const VarDecl& o) const { return name == o.name && sort == o.sort; }
};

using NeqPair = std::pair<Term, Term>;

// ---------------------------------------------------------------------------
// AL statements (all carry their own variable scope).
// ---------------------------------------------------------------------------
struct CausalLaw {
    std::vector<VarDecl> vars;
    Atom action;
    Literal effect;  // basic fluent literal
    std::vector<Literal> body;
    std::vector<NeqPair> neqs;
    bool operator==(const CausalLaw& o) const {
        return vars == o.vars && action == o.action && effect == o.effect && body == o.body &&
               neqs == o.neqs;
    }
};

struct StateConstraint {
    std::vector<VarDecl> vars;
    Literal head;
    std::vector<Literal> body;
    std::vector<NeqPair> neqs;
    bool operator==(const StateConstraint& o) const {
        return vars == o.vars && head == o.head && body == o.body && neqs == o.neqs;
    }
};

struct Executability {
    std::vector<VarDecl> vars;
    std::vector<Atom> actions;
    std::vector<Literal> body;
    std::vector<NeqPair> neqs;
    bool operator==(const Executability& o) const {
        return vars == o.vars && actions == o.actions && body == o.body && neqs == o.neqs;
    }
};

// Defeasible scene-attribute rule, e.g. "tables have wheels unless in the
// kitchen". Bodies reference member(O, class) and attribute literals.
struct AttributeRule {
    std::string id;
    std::vector<VarDecl> vars;
    Literal head;
    std::vector<Literal> body;
    std::vector<NeqPair> neqs;
    bool operator==(const AttributeRule& o) const {
        return id == o.id && vars == o.vars && head == o.head && body == o.body && neqs == o.neqs;
    }
};

// Prioritized initial-state default (lower priority value = stronger).
struct InitialDefault {
    std::string id;
    Literal head;  // ground basic fluent literal
    std::vector<Literal> body;
    int priority = 0;
    bool operator==(const InitialDefault& o) const {
        return id == o.id && head == o.head && body == o.body && priority == o.priority;
    }
};

// ---------------------------------------------------------------------------
// System description D_H.
// ---------------------------------------------------------------------------
struct SystemDescription {
    Symbols symbols;
    std::vector<Atom> statics;  // ground closed-world facts (connected, belongs, ...)
    std::vector<CausalLaw> causal_laws;
    std::vector<StateConstraint> constraints;
    std::vector<Executability> execs;
    std::vector<AttributeRule> attr_rules;
    std::vector<InitialDefault> defaults;  // domain-level initial-state defaults

    bool operator==(const SystemDescription& o) const {
        return symbols == o.symbols && statics == o.statics && causal_laws == o.causal_laws &&
               constraints == o.constraints && execs == o.execs && attr_rules == o.attr_rules &&
               defaults == o.defaults;
    }
};

// ---------------------------------------------------------------------------
// History records.
// ---------------------------------------------------------------------------
struct ObsRecord {
    Atom fluent;  // ground
    bool truth = true;
    int step = 0;
    bool operator==(const ObsRecord& o) const {
        return fluent == o.fluent && truth == o.truth && step == o.step;
    }
};

struct HpdRecord {
    Atom action;  // ground
    int step = 0;
    bool operator==(const HpdRecord& o) const { return action == o.action && step == o.step; }
};

struct History {
    std::vector<ObsRecord> obs;
    std::vector<HpdRecord> hpd;
    std::vector<InitialDefault> defaults;
    // Defaults the agent has accepted as refuted; they are no longer
    // translated. Grows monotonically, like every other part of the history.
    std::vector<std::string> withdrawn_defaults;
    // First step at which the agent may still act. Maintained by the agent
    // loop; hpd records of exogenous actions may sit at earlier steps.
    int next_step = 0;

    void bump(int step) { next_step = std::max(next_step, step); }
    int max_record_step() const {
        int m = 0;
        for (const auto& r : obs) m = std::max(m, r.step);
        for (const auto& r : hpd) m = std::max(m, r.step + 1);
        return m;
    }
};

// ---------------------------------------------------------------------------
// Logic-program rules. Heads hold 0..2 literals: 0 encodes a constraint, 2 a
// disjunction restricted to a complementary literal pair. CR rules have
// exactly one head literal and may fire only to restore consistency.
// ---------------------------------------------------------------------------
enum class RuleSchema {
    UserRule,
    CausalLaw,
    StateConstraint,
    Executability,
    InertiaPos,
    InertiaNeg,
    CwaDefined,
    CwaAction,
    Awareness,
    RealityCheck,
    HpdFact,
    DefaultRule,
    DefaultContra,
    DefaultCr,
    DiagGuess,
    DiagExpl,
    DiagCr,
    GoalDef,
    GoalConstraint,
    PlanChoice,
    PlanMutex,
    SceneFact,
    SceneFunctional,
    SceneAttr,
    SceneAttrCr,
    SceneMember,
    SceneClassKnown,
    SceneRealityCheck,
    SceneLabelCr,
};

struct Provenance {
    RuleSchema schema = RuleSchema::UserRule;
    int source = -1;  // index of the originating statement, obs record, ...
    int step = -1;    // time step the instance talks about, if any
    bool operator==(const Provenance& o) const {
        return schema == o.schema && source == o.source && step == o.step;
    }
};

struct Rule {
    std::vector<VarDecl> vars;
    std::vector<Literal> head;  // 0, 1 or 2 literals
    std::vector<Literal> pos;
    std::vector<Literal> negs;  // default-negated body literals
    std::vector<NeqPair> neqs;
    bool cr = false;
    int cr_bucket = 0;  // priority bucket; lower = stronger (minimized first)
    int id = -1;
    Provenance prov;

    bool structurally_equal(const Rule& o) const {
        return vars == o.vars && head == o.head && pos == o.pos && negs == o.negs &&
               neqs == o.neqs && cr == o.cr && cr_bucket == o.cr_bucket;
    }
};

struct Program {
    Symbols symbols;
    std::vector<Rule> rules;
    // Ground closed-world facts consulted during grounding; never appear as
    // solver atoms (satisfied occurrences are stripped, false ones prune).
    std::vector<Atom> statics;
    int horizon = 0;

    int add_rule(Rule r) {
        r.id = static_cast<int>(rules.size());
        rules.push_back(std::move(r));
        return rules.back().id;
    }
};

// ---------------------------------------------------------------------------
// Scenario: a task instance over a domain.
// ---------------------------------------------------------------------------
struct ScriptEvent {
    Atom action;  // ground exogenous action
    int step = 0;
    // Announced events are also committed to the agent's history (someone
    // told the robot); unannounced events change the world silently.
    bool announce = false;
};

struct Scenario {
    History history;
    std::vector<Literal> goal;  // ground fluent literals
    std::vector<ScriptEvent> script;
    std::vector<Literal> truth;        // ground-truth world initialization
    std::vector<Literal> scene_facts;  // observed object attributes (atemporal)
    std::vector<ConstId> unlabeled;    // objects lacking a class label
    std::string noise_ref;             // path of the noise-model config, may be empty
};

// ---------------------------------------------------------------------------
// Small helpers shared across modules.
// ---------------------------------------------------------------------------
inline Atom ground_atom(PredId pred, std::vector<ConstId> args) {
    Atom a;
    a.pred = pred;
    a.args.reserve(args.size());
    for (ConstId c : args) a.args.push_back(Term::constant(c));
    return a;
}

inline std::string term_to_string(const Symbols& sym, const Term& t,
                                  const std::vector<VarDecl>* scope = nullptr) {
    if (t.is_var()) {
        if (scope && t.id < static_cast<VarId>(scope->size())) return (*scope)[t.id].name;
        return "V" + std::to_string(t.id);
    }
    return sym.sorts.const_name(t.id);
}

inline std::string atom_to_string(const Symbols& sym, const Atom& a,
                                  const std::vector<VarDecl>* scope = nullptr) {
    std::string s = sym.pred(a.pred).name;
    if (!a.args.empty()) {
        s += "(";
        for (std::size_t i = 0; i < a.args.size(); ++i) {
            if (i) s += ", ";
            s += term_to_string(sym, a.args[i], scope);
        }
        s += ")";
    }
    return s;
}

inline std::string literal_to_string(const Symbols& sym, const Literal& l,
                                     const std::vector<VarDecl>* scope = nullptr) {
    return (l.neg ? "-" : "") + atom_to_string(sym, l.atom, scope);
}

struct AtomHash {
    std::size_t operator()(const Atom& a) const {
        std::size_t h = std::hash<std::int32_t>()(a.pred);
        for (const Term& t : a.args)
            h = h * 1000003u + std::hash<std::int32_t>()(t.id * 2 + (t.is_var() ? 1 : 0));
        return h;
    }
};

}  // namespace mixplan::lang
