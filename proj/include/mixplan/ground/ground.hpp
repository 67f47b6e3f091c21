#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mixplan/lang/ast.hpp"
#include "mixplan/util/error.hpp"

namespace mixplan::ground {

using lang::Atom;
using lang::ConstId;
using lang::Literal;
using lang::PredKind;
using lang::Program;
using lang::Provenance;
using lang::Rule;
using lang::SortId;
using lang::Symbols;
using lang::Term;

// A ground literal: atom id * 2, +1 for the strongly negated polarity.
using GLit = std::int32_t;
inline GLit make_glit(std::int32_t atom, bool neg) { return atom * 2 + (neg ? 1 : 0); }
inline std::int32_t glit_atom(GLit l) { return l / 2; }
inline bool glit_neg(GLit l) { return l & 1; }
inline GLit glit_complement(GLit l) { return l ^ 1; }

struct GroundRule {
    std::vector<GLit> head;  // 0, 1, or 2 (complementary pair)
    std::vector<GLit> pos;
    std::vector<GLit> negs;
    bool cr = false;
    int cr_bucket = 0;
    int id = -1;
    Provenance prov;
};

class AtomTable {
  public:
    std::int32_t intern(const Atom& a, const Symbols& sym) {
        auto it = ids_.find(a);
        if (it != ids_.end()) return it->second;
        std::int32_t id = static_cast<std::int32_t>(atoms_.size());
        atoms_.push_back(a);
        names_.push_back(lang::atom_to_string(sym, a));
        ids_.emplace(a, id);
        return id;
    }
    // Registration path for loaded programs where only names are known.
    std::int32_t intern_named(const std::string& name) {
        Atom a;
        a.pred = static_cast<lang::PredId>(atoms_.size());  // placeholder, opaque
        std::int32_t id = static_cast<std::int32_t>(atoms_.size());
        atoms_.push_back(a);
        names_.push_back(name);
        return id;
    }
    std::optional<std::int32_t> lookup(const Atom& a) const {
        auto it = ids_.find(a);
        if (it == ids_.end()) return std::nullopt;
        return it->second;
    }
    const Atom& atom(std::int32_t id) const { return atoms_[id]; }
    const std::string& name(std::int32_t id) const { return names_[id]; }
    std::size_t size() const { return atoms_.size(); }

  private:
    std::vector<Atom> atoms_;
    std::vector<std::string> names_;
    std::unordered_map<Atom, std::int32_t, lang::AtomHash> ids_;
};

struct GroundProgram {
    AtomTable atoms;
    std::vector<GroundRule> rules;
    Symbols symbols;  // signature for structured consumers; empty when loaded

    std::string lit_name(GLit l) const {
        return (glit_neg(l) ? "-" : "") + atoms.name(glit_atom(l));
    }
};

struct Stats {
    std::size_t atom_count = 0;
    std::size_t rule_count = 0;
    std::size_t cr_rule_count = 0;
};

inline Stats stats(const GroundProgram& gp) {
    Stats s;
    s.atom_count = gp.atoms.size();
    s.rule_count = gp.rules.size();
    for (const GroundRule& r : gp.rules)
        if (r.cr) ++s.cr_rule_count;
    return s;
}

struct GroundOptions {
    bool prune_statics = true;  // drop instances with a false static in the body
    std::size_t max_rules = 5'000'000;
    std::size_t max_atoms = 2'000'000;
};

namespace detail {

struct RuleHasher {
    std::size_t operator()(const GroundRule& r) const {
        std::size_t h = r.cr ? 0x9e3779b9 : 0;
        h = h * 31 + static_cast<std::size_t>(r.cr_bucket);
        for (GLit l : r.head) h = h * 1000003 + static_cast<std::size_t>(l) + 7;
        for (GLit l : r.pos) h = h * 1000003 + static_cast<std::size_t>(l) + 11;
        for (GLit l : r.negs) h = h * 1000003 + static_cast<std::size_t>(l) + 13;
        return h;
    }
};
struct RuleEq {
    bool operator()(const GroundRule& a, const GroundRule& b) const {
        return a.cr == b.cr && a.cr_bucket == b.cr_bucket && a.head == b.head && a.pos == b.pos &&
               a.negs == b.negs;
    }
};

class Grounder {
  public:
    Grounder(const Program& p, const GroundOptions& opt) : p_(p), opt_(opt) {
        gp_.symbols = p.symbols;
        for (const Atom& a : p.statics) static_facts_.insert(a);
    }

    GroundProgram run() {
        for (const Rule& r : p_.rules) ground_rule(r);
        int id = 0;
        for (GroundRule& r : gp_.rules) r.id = id++;
        return std::move(gp_);
    }

  private:
    bool is_static(const Atom& a) const {
        return p_.symbols.pred(a.pred).kind == PredKind::Static;
    }

    Atom substitute(const Atom& a) const {
        Atom g;
        g.pred = a.pred;
        g.args.reserve(a.args.size());
        for (const Term& t : a.args)
            g.args.push_back(t.is_var() ? Term::constant(binding_[t.id]) : t);
        return g;
    }

    // Evaluates a static literal against the closed-world fact set.
    bool static_holds(const Literal& l) const {
        bool present = static_facts_.count(substitute(l.atom)) > 0;
        return l.neg ? !present : present;
    }

    void ground_rule(const Rule& r) {
        binding_.assign(r.vars.size(), -1);
        for (std::size_t i = 0; i < r.vars.size(); ++i)
            if (r.vars[i].sort == lang::kNoSort)
                throw ValidationError("variable '" + r.vars[i].name + "' has no sort");
        enumerate(r, 0);
    }

    void enumerate(const Rule& r, std::size_t next_var) {
        if (next_var == r.vars.size()) {
            emit(r);
            return;
        }
        const auto& ms = p_.symbols.sorts.members(r.vars[next_var].sort);
        // A sort with zero instances silently produces zero rule instances.
        for (ConstId c : ms) {
            binding_[next_var] = c;
            if (!partial_ok(r, next_var)) continue;
            enumerate(r, next_var + 1);
        }
        binding_[next_var] = -1;
    }

    // Early pruning: once the newly bound variable completes a static body
    // literal or an inequality, evaluate it immediately.
    bool partial_ok(const Rule& r, std::size_t bound_var) const {
        auto fully_bound = [&](const Atom& a) {
            bool uses = false;
            for (const Term& t : a.args) {
                if (!t.is_var()) continue;
                if (static_cast<std::size_t>(t.id) == bound_var) uses = true;
                if (binding_[t.id] < 0) return false;
            }
            return uses;
        };
        if (opt_.prune_statics)
            for (const Literal& l : r.pos)
                if (is_static(l.atom) && fully_bound(l.atom) && !static_holds(l)) return false;
        for (const auto& [a, b] : r.neqs) {
            auto val = [&](const Term& t) { return t.is_var() ? binding_[t.id] : t.id; };
            bool uses = (a.is_var() && static_cast<std::size_t>(a.id) == bound_var) ||
                        (b.is_var() && static_cast<std::size_t>(b.id) == bound_var);
            bool bound = (!a.is_var() || binding_[a.id] >= 0) && (!b.is_var() || binding_[b.id] >= 0);
            if (uses && bound && val(a) == val(b)) return false;
        }
        return true;
    }

    void emit(const Rule& r) {
        GroundRule g;
        g.cr = r.cr;
        g.cr_bucket = r.cr_bucket;
        g.prov = r.prov;
        for (const Literal& l : r.head) {
            if (is_static(l.atom))
                throw ValidationError("static atom in rule head: " +
                                            lang::atom_to_string(p_.symbols, l.atom, &r.vars));
            g.head.push_back(make_glit(intern(substitute(l.atom)), l.neg));
        }
        for (const Literal& l : r.pos) {
            if (is_static(l.atom)) {
                if (opt_.prune_statics) {
                    if (!static_holds(l)) return;  // false static: drop the instance
                    continue;                      // true static: strip from the body
                }
            }
            g.pos.push_back(make_glit(intern(substitute(l.atom)), l.neg));
        }
        for (const Literal& l : r.negs) {
            if (is_static(l.atom) && opt_.prune_statics) {
                if (static_holds(l)) return;  // `not true-static` never holds
                continue;
            }
            g.negs.push_back(make_glit(intern(substitute(l.atom)), l.neg));
        }
        if (!seen_.insert(g).second) return;  // duplicate instance
        gp_.rules.push_back(std::move(g));
        if (gp_.rules.size() > opt_.max_rules || gp_.atoms.size() > opt_.max_atoms)
            throw ResourceError("grounding limit exceeded: " + std::to_string(gp_.atoms.size()) +
                                " atoms, " + std::to_string(gp_.rules.size()) + " rules");
    }

    std::int32_t intern(const Atom& a) { return gp_.atoms.intern(a, p_.symbols); }

    const Program& p_;
    const GroundOptions& opt_;
    GroundProgram gp_;
    std::unordered_set<Atom, lang::AtomHash> static_facts_;
    std::unordered_set<GroundRule, RuleHasher, RuleEq> seen_;
    std::vector<ConstId> binding_;
};

}  // namespace detail

inline GroundProgram ground(const Program& p, const GroundOptions& opt = {}) {
    detail::Grounder g(p, opt);
    return g.run();
}

// ---------------------------------------------------------------------------
// Flat numeric text format: one header line, one line per atom, one per rule.
// Used for external diffing and as solver input for the CLI.
// ---------------------------------------------------------------------------
inline std::string dump_flat(const GroundProgram& gp) {
    std::ostringstream os;
    os << "mixplan-ground 1\n";
    for (std::size_t i = 0; i < gp.atoms.size(); ++i) os << "a " << i << " " << gp.atoms.name(i) << "\n";
    for (const GroundRule& r : gp.rules) {
        os << "r h " << r.head.size();
        for (GLit l : r.head) os << " " << l;
        os << " p " << r.pos.size();
        for (GLit l : r.pos) os << " " << l;
        os << " n " << r.negs.size();
        for (GLit l : r.negs) os << " " << l;
        os << " c " << (r.cr ? 1 : 0) << " " << r.cr_bucket << "\n";
    }
    return os.str();
}

inline GroundProgram load_flat(const std::string& text) {
    GroundProgram gp;
    std::istringstream is(text);
    std::string magic;
    int version = 0;
    is >> magic >> version;
    if (magic != "mixplan-ground" || version != 1)
        throw Error("not a mixplan ground-program file");
    std::string tag;
    while (is >> tag) {
        if (tag == "a") {
            std::int64_t id;
            std::string name;
            is >> id >> name;
            if (id != static_cast<std::int64_t>(gp.atoms.size()))
                throw Error("atom ids must be dense and ordered");
            gp.atoms.intern_named(name);
        } else if (tag == "r") {
            GroundRule r;
            auto read_section = [&](const char* expect, std::vector<GLit>& out) {
                std::string t;
                std::size_t k;
                is >> t >> k;
                if (t != expect) throw Error("malformed rule line");
                out.resize(k);
                for (auto& l : out) {
                    is >> l;
                    if (glit_atom(l) < 0 || glit_atom(l) >= static_cast<std::int32_t>(gp.atoms.size()))
                        throw Error("rule references unknown atom");
                }
            };
            read_section("h", r.head);
            read_section("p", r.pos);
            read_section("n", r.negs);
            std::string t;
            int cr;
            is >> t >> cr >> r.cr_bucket;
            if (t != "c") throw Error("malformed rule line");
            r.cr = cr != 0;
            r.id = static_cast<int>(gp.rules.size());
            gp.rules.push_back(std::move(r));
        } else {
            throw Error("unknown record '" + tag + "' in ground-program file");
        }
    }
    return gp;
}

}  // namespace mixplan::ground
