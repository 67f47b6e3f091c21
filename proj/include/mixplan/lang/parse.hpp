#pragma once

#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mixplan/lang/ast.hpp"
#include "mixplan/lang/lexer.hpp"

namespace mixplan::lang {

namespace detail {

class Cursor {
  public:
    explicit Cursor(std::vector<Token> toks) : toks_(std::move(toks)) {}
    const Token& peek(int ahead = 0) const {
        std::size_t j = pos_ + ahead;
        return j < toks_.size() ? toks_[j] : toks_.back();
    }
    Token eat() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool at(Tok k) const { return peek().kind == k; }
    bool at_word(const char* w) const { return at(Tok::Ident) && peek().text == w; }
    bool accept(Tok k) {
        if (!at(k)) return false;
        eat();
        return true;
    }
    bool accept_word(const char* w) {
        if (!at_word(w)) return false;
        eat();
        return true;
    }
    Token expect(Tok k, const char* what) {
        if (!at(k)) fail(std::string("expected ") + what);
        return eat();
    }
    void expect_word(const char* w) {
        if (!at_word(w)) fail(std::string("expected '") + w + "'");
        eat();
    }
    [[noreturn]] void fail(const std::string& msg) const {
        const Token& t = peek();
        throw ParseError(msg + " (found '" + (t.kind == Tok::End ? "<eof>" : t.text) + "')", t.line,
                         t.col);
    }
    int parse_int(const char* what) {
        Token t = expect(Tok::Int, what);
        return std::stoi(t.text);
    }

  private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

// Variable scope for one statement/rule. Resolves variable sorts from
// predicate signatures and explicit `X:sort` annotations; conflicting
// constraints keep the most specific sort and reject incomparable ones.
class Scope {
  public:
    explicit Scope(const Symbols& sym) : sym_(sym) {}

    VarId touch(const std::string& name, SortId expected, bool annotated, Cursor& cur) {
        auto it = ids_.find(name);
        VarId v;
        if (it == ids_.end()) {
            v = static_cast<VarId>(decls_.size());
            ids_.emplace(name, v);
            decls_.push_back({name, kNoSort});
            annotated_.push_back(false);
        } else {
            v = it->second;
        }
        if (expected != kNoSort) constrain(v, expected, annotated, cur);
        return v;
    }

    void constrain(VarId v, SortId s, bool annotated, Cursor& cur) {
        SortId cur_sort = decls_[v].sort;
        if (annotated) annotated_[v] = true;
        if (cur_sort == kNoSort) {
            decls_[v].sort = s;
            return;
        }
        if (cur_sort == s) return;
        if (sym_.sorts.is_subsort(cur_sort, s)) return;  // existing is narrower
        if (sym_.sorts.is_subsort(s, cur_sort)) {
            decls_[v].sort = s;  // narrow it
            return;
        }
        cur.fail("variable '" + decls_[v].name + "' used with incomparable sorts '" +
                 sym_.sorts.sort_name(cur_sort) + "' and '" + sym_.sorts.sort_name(s) + "'");
    }

    bool is_annotated(VarId v) const { return annotated_[v]; }
    const std::vector<VarDecl>& decls() const { return decls_; }
    std::vector<VarDecl> take() { return std::move(decls_); }

  private:
    const Symbols& sym_;
    std::unordered_map<std::string, VarId> ids_;
    std::vector<VarDecl> decls_;
    std::vector<bool> annotated_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Shared atom/literal parsing against a symbol table.
// ---------------------------------------------------------------------------
namespace detail {

struct AtomParser {
    Symbols& sym;
    Cursor& cur;
    Scope* scope = nullptr;       // nullptr => ground context
    bool infer_preds = false;     // auto-declare predicates (standalone programs)
    bool infer_consts = false;    // auto-declare constants into `universe_sort`
    SortId universe_sort = kNoSort;

    Term parse_term(SortId expected) {
        if (cur.at(Tok::Var)) {
            if (!scope) cur.fail("variable not allowed here (record must be ground)");
            std::string name = cur.eat().text;
            SortId ann = kNoSort;
            if (cur.at(Tok::Colon) && cur.peek(1).kind == Tok::Ident &&
                sym.sorts.has_sort(cur.peek(1).text)) {
                cur.eat();
                ann = sym.sorts.require_sort(cur.eat().text);
            }
            VarId v = scope->touch(name, expected, false, cur);
            if (ann != kNoSort) scope->constrain(v, ann, true, cur);
            return Term::var(v);
        }
        if (!cur.at(Tok::Ident) && !cur.at(Tok::Int)) cur.fail("expected term");
        Token t = cur.eat();
        auto c = sym.sorts.const_id(t.text);
        if (!c) {
            if (!infer_consts) throw ParseError("unknown constant '" + t.text + "'", t.line, t.col);
            c = sym.sorts.add_instance(t.text, sym.sorts.sort_name(universe_sort));
        }
        if (expected != kNoSort && !sym.sorts.is_member(*c, expected))
            throw ParseError("constant '" + t.text + "' is not a member of sort '" +
                                 sym.sorts.sort_name(expected) + "'",
                             t.line, t.col);
        return Term::constant(*c);
    }

    Atom parse_atom(std::optional<PredKind> required = std::nullopt) {
        Token name = cur.expect(Tok::Ident, "predicate name");
        std::vector<Term> raw_args;
        PredId pid;
        auto found = sym.pred_id(name.text);
        if (!found && infer_preds) {
            // Infer arity from the argument list, all parameters universal.
            std::vector<Term> args;
            if (cur.accept(Tok::LParen)) {
                do args.push_back(parse_term(universe_sort));
                while (cur.accept(Tok::Comma));
                cur.expect(Tok::RParen, "')'");
            }
            pid = sym.add_pred(name.text, PredKind::Internal,
                               std::vector<SortId>(args.size(), universe_sort));
            Atom a;
            a.pred = pid;
            a.args = std::move(args);
            return a;
        }
        if (!found) throw ParseError("undeclared predicate '" + name.text + "'", name.line, name.col);
        pid = *found;
        const PredDecl& d = sym.pred(pid);
        if (required && d.kind != *required)
            throw ParseError("predicate '" + name.text + "' has unexpected kind here", name.line,
                             name.col);
        Atom a;
        a.pred = pid;
        if (!d.params.empty()) {
            cur.expect(Tok::LParen, "'('");
            for (std::size_t i = 0; i < d.params.size(); ++i) {
                if (i) cur.expect(Tok::Comma, "','");
                a.args.push_back(parse_term(d.params[i]));
            }
            cur.expect(Tok::RParen, "')'");
        } else if (cur.at(Tok::LParen)) {
            cur.fail("arity mismatch for '" + name.text + "' (declared with no parameters)");
        }
        if (a.args.size() != d.params.size())
            throw ParseError("arity mismatch for '" + name.text + "'", name.line, name.col);
        return a;
    }

    Literal parse_literal(std::optional<PredKind> required = std::nullopt) {
        Literal l;
        l.neg = cur.accept(Tok::Minus);
        l.atom = parse_atom(required);
        return l;
    }

    // body := (literal | not literal | term != term) , ...
    void parse_body(std::vector<Literal>& pos, std::vector<Literal>* negs,
                    std::vector<NeqPair>& neqs) {
        do {
            if (cur.at(Tok::Var) &&
                (cur.peek(1).kind == Tok::Neq ||
                 (cur.peek(1).kind == Tok::Colon && cur.peek(3).kind == Tok::Neq))) {
                Term a = parse_term(kNoSort);
                cur.expect(Tok::Neq, "'!='");
                Term b = parse_term(kNoSort);
                neqs.emplace_back(a, b);
            } else if (negs && cur.at_word("not")) {
                cur.eat();
                negs->push_back(parse_literal());
            } else {
                pos.push_back(parse_literal());
            }
        } while (cur.accept(Tok::Comma));
    }
};

}  // namespace detail

inline void validate(const SystemDescription& sd);

// ---------------------------------------------------------------------------
// Domain files.
// ---------------------------------------------------------------------------
inline SystemDescription parse_domain(const std::string& text) {
    using namespace detail;
    SystemDescription sd;
    Cursor cur(lex(text));
    Symbols& sym = sd.symbols;

    auto parse_signature = [&](PredKind kind) {
        Token name = cur.expect(Tok::Ident, "predicate name");
        std::vector<SortId> params;
        if (cur.accept(Tok::LParen)) {
            do {
                Token s = cur.expect(Tok::Ident, "sort name");
                params.push_back(sym.sorts.require_sort(s.text));
            } while (cur.accept(Tok::Comma));
            cur.expect(Tok::RParen, "')'");
        }
        sym.add_pred(name.text, kind, std::move(params));
    };

    while (!cur.at(Tok::End)) {
        if (cur.at(Tok::Hash)) {
            std::string dir = cur.eat().text;
            if (dir == "#sort") {
                sym.sorts.add_sort(cur.expect(Tok::Ident, "sort name").text);
            } else if (dir == "#subsort") {
                std::string c = cur.expect(Tok::Ident, "sort name").text;
                std::string p = cur.expect(Tok::Ident, "sort name").text;
                sym.sorts.add_subsort(c, p);
            } else if (dir == "#instance") {
                Token n = cur.peek().kind == Tok::Int ? cur.eat() : cur.expect(Tok::Ident, "constant");
                cur.expect(Tok::Colon, "':'");
                std::string s = cur.expect(Tok::Ident, "sort name").text;
                sym.sorts.add_instance(n.text, s);
            } else if (dir == "#fluent") {
                bool basic = cur.accept_word("basic");
                if (!basic) cur.expect_word("defined");
                parse_signature(basic ? PredKind::FluentBasic : PredKind::FluentDefined);
            } else if (dir == "#action") {
                bool agent = cur.accept_word("agent");
                if (!agent) cur.expect_word("exogenous");
                parse_signature(agent ? PredKind::ActionAgent : PredKind::ActionExogenous);
            } else if (dir == "#static") {
                parse_signature(PredKind::Static);
            } else if (dir == "#attribute") {
                parse_signature(PredKind::Attribute);
            } else {
                cur.fail("unknown directive '" + dir + "'");
            }
            cur.expect(Tok::Dot, "'.'");
            continue;
        }

        if (cur.at_word("impossible")) {
            cur.eat();
            Executability ex;
            Scope scope(sym);
            AtomParser ap{sym, cur, &scope};
            do ex.actions.push_back(ap.parse_atom());
            while (cur.accept(Tok::Comma));
            if (cur.accept_word("if")) ap.parse_body(ex.body, nullptr, ex.neqs);
            cur.expect(Tok::Dot, "'.'");
            for (const Atom& a : ex.actions) {
                PredKind k = sym.pred(a.pred).kind;
                if (k != PredKind::ActionAgent && k != PredKind::ActionExogenous)
                    cur.fail("'impossible' requires action atoms");
            }
            ex.vars = scope.take();
            sd.execs.push_back(std::move(ex));
            continue;
        }

        if (cur.at_word("default")) {
            cur.eat();
            InitialDefault d;
            d.id = cur.expect(Tok::Ident, "default id").text;
            cur.expect(Tok::Colon, "':'");
            AtomParser ap{sym, cur, nullptr};
            d.head = ap.parse_literal();
            if (cur.accept_word("if")) {
                std::vector<NeqPair> neqs;
                ap.parse_body(d.body, nullptr, neqs);
                if (!neqs.empty()) cur.fail("defaults must be ground ('!=' not allowed)");
            }
            if (cur.accept_word("priority")) d.priority = cur.parse_int("priority value");
            cur.expect(Tok::Dot, "'.'");
            PredKind k = sym.pred(d.head.atom.pred).kind;
            if (k != PredKind::FluentBasic)
                cur.fail("default head must be a basic fluent literal");
            sd.defaults.push_back(std::move(d));
            continue;
        }

        if (cur.at_word("attribute")) {
            cur.eat();
            AttributeRule r;
            r.id = cur.expect(Tok::Ident, "attribute rule id").text;
            cur.expect(Tok::Colon, "':'");
            Scope scope(sym);
            AtomParser ap{sym, cur, &scope};
            r.head = ap.parse_literal(PredKind::Attribute);
            cur.expect_word("if");
            // `member` is machinery; declare it lazily from first use. The head
            // fixes the object variable's sort, so parse order resolves it.
            if (!sym.pred_id("member")) {
                SortId cls = sym.sorts.sort_id("class");
                if (cls == kNoSort) cur.fail("attribute rules require a 'class' sort");
                SortId obj = sym.pred(r.head.atom.pred).params.empty()
                                 ? kNoSort
                                 : sym.pred(r.head.atom.pred).params[0];
                sym.add_pred("member", PredKind::Internal, {obj, cls});
            }
            ap.parse_body(r.body, nullptr, r.neqs);
            cur.expect(Tok::Dot, "'.'");
            r.vars = scope.take();
            sd.attr_rules.push_back(std::move(r));
            continue;
        }

        // Remaining forms start with a literal or an action atom:
        //   action causes literal [if body] .
        //   literal if body .
        //   ground static atom .
        Scope scope(sym);
        AtomParser ap{sym, cur, &scope};
        Literal first = ap.parse_literal();
        if (cur.at_word("causes")) {
            cur.eat();
            if (first.neg) cur.fail("action atom cannot be negated");
            PredKind k = sym.pred(first.atom.pred).kind;
            if (k != PredKind::ActionAgent && k != PredKind::ActionExogenous)
                cur.fail("'causes' requires an action atom");
            CausalLaw law;
            law.action = first.atom;
            law.effect = ap.parse_literal();
            if (sym.pred(law.effect.atom.pred).kind != PredKind::FluentBasic)
                cur.fail("defined fluent in causal-law head");
            if (cur.accept_word("if")) ap.parse_body(law.body, nullptr, law.neqs);
            cur.expect(Tok::Dot, "'.'");
            law.vars = scope.take();
            sd.causal_laws.push_back(std::move(law));
            continue;
        }
        if (cur.at_word("if")) {
            cur.eat();
            StateConstraint c;
            c.head = first;
            PredKind k = sym.pred(c.head.atom.pred).kind;
            if (k != PredKind::FluentBasic && k != PredKind::FluentDefined)
                cur.fail("state-constraint head must be a fluent literal");
            ap.parse_body(c.body, nullptr, c.neqs);
            cur.expect(Tok::Dot, "'.'");
            c.vars = scope.take();
            sd.constraints.push_back(std::move(c));
            continue;
        }
        cur.expect(Tok::Dot, "'.'");
        if (first.neg || !first.atom.ground() ||
            sym.pred(first.atom.pred).kind != PredKind::Static)
            cur.fail("expected a ground static fact, a law, or a directive");
        sd.statics.push_back(first.atom);
    }

    sym.sorts.check_acyclic();
    validate(sd);
    return sd;
}

inline void validate(const SystemDescription& sd) {
    const Symbols& sym = sd.symbols;
    auto domain_body = [&](const std::vector<Literal>& body, const char* what) {
        for (const Literal& l : body) {
            PredKind k = sym.pred(l.atom.pred).kind;
            if (k != PredKind::FluentBasic && k != PredKind::FluentDefined &&
                k != PredKind::Static)
                throw ValidationError(std::string(what) + " body must use fluent or static literals");
        }
    };
    for (const CausalLaw& law : sd.causal_laws) {
        if (sym.pred(law.effect.atom.pred).kind != PredKind::FluentBasic)
            throw ValidationError("defined fluent in causal-law head");
        domain_body(law.body, "causal-law");
    }
    for (const StateConstraint& c : sd.constraints) domain_body(c.body, "state-constraint");
    for (const Executability& e : sd.execs) domain_body(e.body, "executability-condition");
    for (const StateConstraint& c : sd.constraints) {
        PredKind k = sym.pred(c.head.atom.pred).kind;
        if (k == PredKind::Static) throw ValidationError("static in state-constraint head");
    }
    for (const InitialDefault& d : sd.defaults) {
        if (!d.head.atom.ground()) throw ValidationError("default '" + d.id + "' is not ground");
        for (const Literal& b : d.body)
            if (!b.atom.ground()) throw ValidationError("default '" + d.id + "' is not ground");
    }
    // Equal-priority defaults with complementary heads cannot be resolved.
    for (std::size_t i = 0; i < sd.defaults.size(); ++i)
        for (std::size_t j = i + 1; j < sd.defaults.size(); ++j) {
            const auto& a = sd.defaults[i];
            const auto& b = sd.defaults[j];
            if (a.priority == b.priority && a.head.atom == b.head.atom && a.head.neg != b.head.neg)
                throw ValidationError("conflicting equal-priority defaults '" + a.id + "' and '" +
                                      b.id + "'");
        }
}

// ---------------------------------------------------------------------------
// Standalone logic programs (debug entry point to the solver).
// ---------------------------------------------------------------------------
inline Program parse_program(const std::string& text) {
    using namespace detail;
    Program p;
    Symbols& sym = p.symbols;
    SortId universe = sym.sorts.add_sort("const");
    Cursor cur(lex(text));

    while (!cur.at(Tok::End)) {
        Rule r;
        Scope scope(sym);
        AtomParser ap{sym, cur, &scope, /*infer_preds=*/true, /*infer_consts=*/true, universe};
        if (!cur.at(Tok::Arrow)) {
            r.head.push_back(ap.parse_literal());
            if (cur.accept(Tok::Pipe)) r.head.push_back(ap.parse_literal());
        }
        if (cur.accept(Tok::CrArrow)) {
            r.cr = true;
            if (r.head.size() != 1) cur.fail("CR rule requires exactly one head literal");
            if (!cur.at(Tok::Dot) && !cur.at_word("priority")) ap.parse_body(r.pos, &r.negs, r.neqs);
            if (cur.accept_word("priority")) r.cr_bucket = cur.parse_int("priority value");
        } else if (cur.accept(Tok::Arrow)) {
            if (!cur.at(Tok::Dot)) ap.parse_body(r.pos, &r.negs, r.neqs);
        }
        cur.expect(Tok::Dot, "'.'");
        if (r.head.size() == 2) {
            const Literal& a = r.head[0];
            const Literal& b = r.head[1];
            if (!(a.atom == b.atom && a.neg != b.neg))
                cur.fail("disjunctive head must be a complementary literal pair");
        }
        r.vars = scope.take();
        // Safety: head and negated-body variables must occur in the positive
        // body or carry an explicit sort annotation that bounds them.
        std::vector<bool> safe(r.vars.size(), false);
        auto mark = [&](const Literal& l) {
            for (const Term& t : l.atom.args)
                if (t.is_var()) safe[t.id] = true;
        };
        for (const Literal& l : r.pos) mark(l);
        auto check = [&](const Literal& l) {
            for (const Term& t : l.atom.args)
                if (t.is_var() && !safe[t.id] && !scope.is_annotated(t.id))
                    cur.fail("unsafe variable '" + r.vars[t.id].name + "'");
        };
        for (const Literal& l : r.head) check(l);
        for (const Literal& l : r.negs) check(l);
        for (const NeqPair& q : r.neqs)
            for (const Term* t : {&q.first, &q.second})
                if (t->is_var() && !safe[t->id] && !scope.is_annotated(t->id))
                    cur.fail("unsafe variable '" + r.vars[t->id].name + "' in '!='");
        p.add_rule(std::move(r));
    }
    return p;
}

// ---------------------------------------------------------------------------
// Scenario files.
// ---------------------------------------------------------------------------
inline Scenario parse_scenario(const std::string& text, const SystemDescription& sd) {
    using namespace detail;
    Scenario sc;
    Symbols sym = sd.symbols;  // local copy; scenarios may not extend the signature
    Cursor cur(lex(text));
    AtomParser ap{sym, cur, nullptr};

    auto parse_step = [&](const char* what) {
        if (cur.at(Tok::Minus)) cur.fail("negative step");
        return cur.parse_int(what);
    };

    while (!cur.at(Tok::End)) {
        if (cur.accept_word("obs")) {
            cur.expect(Tok::LParen, "'('");
            Literal l = ap.parse_literal();
            cur.expect(Tok::Comma, "','");
            bool truth;
            if (cur.accept_word("true"))
                truth = true;
            else if (cur.accept_word("false"))
                truth = false;
            else
                cur.fail("expected 'true' or 'false'");
            cur.expect(Tok::Comma, "','");
            int step = parse_step("step");
            cur.expect(Tok::RParen, "')'");
            cur.expect(Tok::Dot, "'.'");
            if (!l.atom.ground()) cur.fail("obs record must be ground");
            sc.history.obs.push_back({l.atom, truth != l.neg, step});
            continue;
        }
        if (cur.accept_word("hpd")) {
            cur.expect(Tok::LParen, "'('");
            Atom a = ap.parse_atom();
            cur.expect(Tok::Comma, "','");
            int step = parse_step("step");
            cur.expect(Tok::RParen, "')'");
            cur.expect(Tok::Dot, "'.'");
            if (!a.ground()) cur.fail("hpd record must be ground");
            PredKind k = sym.pred(a.pred).kind;
            if (k != PredKind::ActionAgent && k != PredKind::ActionExogenous)
                cur.fail("hpd requires an action atom");
            sc.history.hpd.push_back({a, step});
            continue;
        }
        if (cur.accept_word("goal")) {
            Literal l = ap.parse_literal();
            cur.expect(Tok::Dot, "'.'");
            if (!l.atom.ground()) cur.fail("goal literal must be ground");
            sc.goal.push_back(l);
            continue;
        }
        if (cur.accept_word("script")) {
            ScriptEvent ev;
            ev.action = ap.parse_atom();
            cur.expect_word("at");
            ev.step = parse_step("step");
            ev.announce = cur.accept_word("announce");
            cur.expect(Tok::Dot, "'.'");
            if (!ev.action.ground()) cur.fail("script action must be ground");
            if (sym.pred(ev.action.pred).kind != PredKind::ActionExogenous)
                cur.fail("script events must be exogenous actions");
            sc.script.push_back(std::move(ev));
            continue;
        }
        if (cur.accept_word("truth")) {
            Literal l = ap.parse_literal();
            cur.expect(Tok::Dot, "'.'");
            if (!l.atom.ground()) cur.fail("truth literal must be ground");
            sc.truth.push_back(l);
            continue;
        }
        if (cur.accept_word("scene")) {
            Literal l = ap.parse_literal(PredKind::Attribute);
            cur.expect(Tok::Dot, "'.'");
            if (!l.atom.ground()) cur.fail("scene fact must be ground");
            sc.scene_facts.push_back(l);
            continue;
        }
        if (cur.accept_word("unlabeled")) {
            Token n = cur.expect(Tok::Ident, "object name");
            cur.expect(Tok::Dot, "'.'");
            auto c = sym.sorts.const_id(n.text);
            if (!c) cur.fail("unknown object '" + n.text + "'");
            sc.unlabeled.push_back(*c);
            continue;
        }
        if (cur.accept_word("noise")) {
            sc.noise_ref = cur.expect(Tok::String, "quoted path").text;
            cur.expect(Tok::Dot, "'.'");
            continue;
        }
        if (cur.at_word("default")) {
            cur.eat();
            InitialDefault d;
            d.id = cur.expect(Tok::Ident, "default id").text;
            cur.expect(Tok::Colon, "':'");
            d.head = ap.parse_literal();
            if (cur.accept_word("if")) {
                std::vector<NeqPair> neqs;
                ap.parse_body(d.body, nullptr, neqs);
                if (!neqs.empty()) cur.fail("defaults must be ground");
            }
            if (cur.accept_word("priority")) d.priority = cur.parse_int("priority value");
            cur.expect(Tok::Dot, "'.'");
            sc.history.defaults.push_back(std::move(d));
            continue;
        }
        cur.fail("expected a scenario record");
    }
    sc.history.next_step = sc.history.max_record_step();
    return sc;
}

// Task histories see both the domain-level and the scenario-level defaults.
inline History assemble_history(const SystemDescription& sd, const Scenario& sc) {
    History h = sc.history;
    h.defaults.insert(h.defaults.begin(), sd.defaults.begin(), sd.defaults.end());
    return h;
}

}  // namespace mixplan::lang
