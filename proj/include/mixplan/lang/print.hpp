#pragma once

#include <sstream>
#include <string>

#include "mixplan/lang/ast.hpp"

namespace mixplan::lang {

namespace detail {

// Recomputes the sort a variable would get from positional inference alone.
// Wherever that differs from the recorded sort, printing must annotate.
template <typename Body>
inline std::vector<SortId> inferred_sorts(const Symbols& sym, const std::vector<VarDecl>& vars,
                                          const std::vector<Atom>& head_atoms, const Body& body) {
    std::vector<SortId> inferred(vars.size(), kNoSort);
    auto touch = [&](const Atom& a) {
        const PredDecl& d = sym.pred(a.pred);
        for (std::size_t i = 0; i < a.args.size(); ++i) {
            const Term& t = a.args[i];
            if (!t.is_var()) continue;
            SortId expected = d.params[i];
            SortId& cur = inferred[t.id];
            if (cur == kNoSort || sym.sorts.is_subsort(expected, cur)) cur = expected;
        }
    };
    for (const Atom& a : head_atoms) touch(a);
    for (const Literal& l : body) touch(l.atom);
    return inferred;
}

class StmtPrinter {
  public:
    StmtPrinter(const Symbols& sym, const std::vector<VarDecl>& vars, std::vector<SortId> inferred)
        : sym_(sym), vars_(vars), inferred_(std::move(inferred)), seen_(vars.size(), false) {}

    std::string term(const Term& t) {
        if (!t.is_var()) return sym_.sorts.const_name(t.id);
        std::string s = vars_[t.id].name;
        if (!seen_[t.id]) {
            seen_[t.id] = true;
            if (vars_[t.id].sort != kNoSort && vars_[t.id].sort != inferred_[t.id])
                s += ":" + sym_.sorts.sort_name(vars_[t.id].sort);
        }
        return s;
    }

    std::string atom(const Atom& a) {
        std::string s = sym_.pred(a.pred).name;
        if (!a.args.empty()) {
            s += "(";
            for (std::size_t i = 0; i < a.args.size(); ++i) {
                if (i) s += ", ";
                s += term(a.args[i]);
            }
            s += ")";
        }
        return s;
    }

    std::string lit(const Literal& l) { return (l.neg ? "-" : "") + atom(l.atom); }

  private:
    const Symbols& sym_;
    const std::vector<VarDecl>& vars_;
    std::vector<SortId> inferred_;
    std::vector<bool> seen_;
};

template <typename Body>
inline StmtPrinter printer_for(const Symbols& sym, const std::vector<VarDecl>& vars,
                               const std::vector<Atom>& heads, const Body& body) {
    return StmtPrinter(sym, vars, inferred_sorts(sym, vars, heads, body));
}

inline void print_body(std::ostringstream& os, StmtPrinter& pr, const std::vector<Literal>& pos,
                       const std::vector<Literal>* negs, const std::vector<NeqPair>& neqs) {
    bool first = true;
    auto sep = [&] {
        if (!first) os << ", ";
        first = false;
    };
    for (const Literal& l : pos) {
        sep();
        os << pr.lit(l);
    }
    if (negs)
        for (const Literal& l : *negs) {
            sep();
            os << "not " << pr.lit(l);
        }
    for (const NeqPair& q : neqs) {
        sep();
        os << pr.term(q.first) << " != " << pr.term(q.second);
    }
}

}  // namespace detail

inline std::string print_domain(const SystemDescription& sd) {
    const Symbols& sym = sd.symbols;
    std::ostringstream os;
    for (SortId s = 0; s < static_cast<SortId>(sym.sorts.sort_count()); ++s)
        os << "#sort " << sym.sorts.sort_name(s) << ".\n";
    // Subsort edges are not directly exposed; recover them via is_subsort on
    // direct declarations by reprinting from instance checks is lossy, so the
    // hierarchy keeps its declaration API minimal and we print edges here.
    for (SortId s = 0; s < static_cast<SortId>(sym.sorts.sort_count()); ++s)
        for (SortId p = 0; p < static_cast<SortId>(sym.sorts.sort_count()); ++p)
            if (s != p && sym.sorts.is_subsort(s, p)) {
                // Only print direct edges: skip p if some intermediate q sits between.
                bool direct = true;
                for (SortId q = 0; q < static_cast<SortId>(sym.sorts.sort_count()); ++q)
                    if (q != s && q != p && sym.sorts.is_subsort(s, q) && sym.sorts.is_subsort(q, p))
                        direct = false;
                if (direct) os << "#subsort " << sym.sorts.sort_name(s) << " " << sym.sorts.sort_name(p)
                               << ".\n";
            }
    for (ConstId c = 0; c < static_cast<ConstId>(sym.sorts.const_count()); ++c)
        os << "#instance " << sym.sorts.const_name(c) << " : "
           << sym.sorts.sort_name(sym.sorts.const_sort(c)) << ".\n";
    for (PredId p = 0; p < static_cast<PredId>(sym.pred_count()); ++p) {
        const PredDecl& d = sym.pred(p);
        const char* dir = nullptr;
        switch (d.kind) {
            case PredKind::Static: dir = "#static "; break;
            case PredKind::FluentBasic: dir = "#fluent basic "; break;
            case PredKind::FluentDefined: dir = "#fluent defined "; break;
            case PredKind::ActionAgent: dir = "#action agent "; break;
            case PredKind::ActionExogenous: dir = "#action exogenous "; break;
            case PredKind::Attribute: dir = "#attribute "; break;
            case PredKind::Internal: continue;  // machinery; redeclared lazily
        }
        os << dir << d.name;
        if (!d.params.empty()) {
            os << "(";
            for (std::size_t i = 0; i < d.params.size(); ++i)
                os << (i ? ", " : "") << sym.sorts.sort_name(d.params[i]);
            os << ")";
        }
        os << ".\n";
    }
    for (const Atom& a : sd.statics) {
        detail::StmtPrinter pr(sym, {}, {});
        os << pr.atom(a) << ".\n";
    }
    for (const CausalLaw& law : sd.causal_laws) {
        auto pr = detail::printer_for(sym, law.vars, {law.action, law.effect.atom}, law.body);
        os << pr.atom(law.action) << " causes " << pr.lit(law.effect);
        if (!law.body.empty() || !law.neqs.empty()) {
            os << " if ";
            detail::print_body(os, pr, law.body, nullptr, law.neqs);
        }
        os << ".\n";
    }
    for (const StateConstraint& c : sd.constraints) {
        auto pr = detail::printer_for(sym, c.vars, {c.head.atom}, c.body);
        os << pr.lit(c.head) << " if ";
        detail::print_body(os, pr, c.body, nullptr, c.neqs);
        os << ".\n";
    }
    for (const Executability& ex : sd.execs) {
        auto pr = detail::printer_for(sym, ex.vars, ex.actions, ex.body);
        os << "impossible ";
        for (std::size_t i = 0; i < ex.actions.size(); ++i)
            os << (i ? ", " : "") << pr.atom(ex.actions[i]);
        if (!ex.body.empty() || !ex.neqs.empty()) {
            os << " if ";
            detail::print_body(os, pr, ex.body, nullptr, ex.neqs);
        }
        os << ".\n";
    }
    for (const AttributeRule& r : sd.attr_rules) {
        auto pr = detail::printer_for(sym, r.vars, {r.head.atom}, r.body);
        os << "attribute " << r.id << " : " << pr.lit(r.head) << " if ";
        detail::print_body(os, pr, r.body, nullptr, r.neqs);
        os << ".\n";
    }
    for (const InitialDefault& d : sd.defaults) {
        detail::StmtPrinter pr(sym, {}, {});
        os << "default " << d.id << " : " << pr.lit(d.head);
        if (!d.body.empty()) {
            os << " if ";
            bool first = true;
            for (const Literal& l : d.body) {
                if (!first) os << ", ";
                first = false;
                os << pr.lit(l);
            }
        }
        if (d.priority != 0) os << " priority " << d.priority;
        os << ".\n";
    }
    return os.str();
}

inline std::string print_rule(const Symbols& sym, const Rule& r) {
    std::ostringstream os;
    std::vector<Atom> heads;
    for (const Literal& l : r.head) heads.push_back(l.atom);
    std::vector<Literal> body_all = r.pos;
    body_all.insert(body_all.end(), r.negs.begin(), r.negs.end());
    auto pr = detail::printer_for(sym, r.vars, heads, body_all);
    for (std::size_t i = 0; i < r.head.size(); ++i) os << (i ? " | " : "") << pr.lit(r.head[i]);
    bool has_body = !r.pos.empty() || !r.negs.empty() || !r.neqs.empty();
    if (r.cr) {
        os << " +- ";
        if (has_body) detail::print_body(os, pr, r.pos, &r.negs, r.neqs);
        if (r.cr_bucket != 0) os << " priority " << r.cr_bucket;
    } else if (has_body || r.head.empty()) {
        os << " :- ";
        detail::print_body(os, pr, r.pos, &r.negs, r.neqs);
    }
    os << ".";
    return os.str();
}

inline std::string print_program(const Program& p) {
    std::ostringstream os;
    for (const Rule& r : p.rules) os << print_rule(p.symbols, r) << "\n";
    return os.str();
}

}  // namespace mixplan::lang
