#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mixplan/ground/ground.hpp"
#include "mixplan/reason/transition.hpp"
#include "mixplan/solve/solver.hpp"
#include "mixplan/translate/translate.hpp"

namespace mixplan::reason {

using translate::DiagnosisMode;
using translate::TranslationConfig;

// ---------------------------------------------------------------------------
// Plans.
// ---------------------------------------------------------------------------
struct PlanStep {
    Atom action;  // ground agent action
    int step = 0;
};

struct Plan {
    std::vector<PlanStep> steps;
    int horizon = 0;
};

enum class PlanStatus { Found, NoPlanWithinHorizon, InconsistentHistory, ResourceLimit };

struct PlanResult {
    PlanStatus status = PlanStatus::NoPlanWithinHorizon;
    Plan plan;
    // Believed state at history.next_step extracted from the chosen answer
    // set; used by executors to seed belief distributions.
    State believed;
    solve::SolveStats stats;
};

struct QueryLimits {
    std::uint64_t max_decisions = 10'000'000;
    double max_seconds = 60.0;
    int max_total_cr = 6;
};

namespace detail {

struct GroundQuery {
    ground::GroundProgram gp;
    translate::Vocab vocab() const { return translate::Vocab(gp.symbols); }
};

inline GroundQuery ground_translated(Program p) { return {ground::ground(std::move(p))}; }

// Occurrence literals of agent actions ordered by (step, atom id): branching
// on these first, true before false, makes the first stable model carry the
// lexicographically least plan.
inline std::vector<ground::GLit> plan_hints(const ground::GroundProgram& gp,
                                            const translate::Vocab& voc) {
    std::vector<std::pair<std::pair<int, int>, ground::GLit>> occ;
    for (std::size_t i = 0; i < gp.atoms.size(); ++i) {
        auto t = voc.split(gp.atoms.atom(i), gp.symbols);
        if (t && t->kind == "occurs" &&
            gp.symbols.pred(t->inner.pred).kind == PredKind::ActionAgent)
            occ.push_back({{t->step, static_cast<int>(i)},
                           ground::make_glit(static_cast<int>(i), false)});
    }
    std::sort(occ.begin(), occ.end());
    std::vector<ground::GLit> hints;
    for (auto& [k, l] : occ) hints.push_back(l);
    return hints;
}

struct ModelView {
    State initial;                                  // step-0 basics
    std::map<int, std::vector<Atom>> occurs;        // step -> ground actions (agent + exogenous)
    std::vector<std::pair<Atom, int>> expl_events;  // expl(action, step)
};

inline ModelView view_of(const ground::GroundProgram& gp, const translate::Vocab& voc,
                         const solve::AnswerSet& m) {
    ModelView v;
    for (auto l : m.lits) {
        if (ground::glit_neg(l)) continue;
        auto t = voc.split(gp.atoms.atom(ground::glit_atom(l)), gp.symbols);
        if (!t) continue;
        if (t->kind == "holds" && t->step == 0 &&
            gp.symbols.pred(t->inner.pred).kind == PredKind::FluentBasic)
            v.initial.basics.insert(t->inner);
        else if (t->kind == "occurs")
            v.occurs[t->step].push_back(t->inner);
        else if (t->kind == "expl")
            v.expl_events.emplace_back(t->inner, t->step);
    }
    return v;
}

// Replays all occurrences step by step through the deterministic transition
// semantics. Agent actions must be executable; exogenous effects just apply.
inline std::optional<State> replay(const GroundDomain& gd, const ModelView& v, int upto,
                                   int* failed_step = nullptr) {
    auto st = gd.close(v.initial.basics);
    if (!st) return std::nullopt;
    for (int i = 0; i < upto; ++i) {
        auto it = v.occurs.find(i);
        if (it == v.occurs.end()) continue;
        std::vector<Literal> effects;
        for (const Atom& a : it->second) {
            PredKind k = gd.sd().symbols.pred(a.pred).kind;
            if (k == PredKind::ActionAgent && !gd.executable(*st, a)) {
                if (failed_step) *failed_step = i;
                return std::nullopt;
            }
            auto effs = gd.effects(*st, a);
            effects.insert(effects.end(), effs.begin(), effs.end());
        }
        auto next = gd.apply_effects(*st, effects);
        if (!next) {
            if (failed_step) *failed_step = i;
            return std::nullopt;
        }
        st = std::move(next);
    }
    return st;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// plan: iterative deepening over horizons; the first consistent horizon wins
// and the lexicographically least plan at that horizon is returned.
// ---------------------------------------------------------------------------
inline PlanResult plan(const SystemDescription& sd, const GroundDomain& gd, const History& h,
                       const std::vector<Literal>& goal, int max_horizon,
                       const QueryLimits& lim = {}) {
    PlanResult out;
    int h_min = std::max(h.next_step, h.max_record_step());

    // History consistency comes first; planning on contradictory histories
    // would report a misleading "no plan". A history is treated as consistent
    // only when no consistency-restoring rule has to fire: contradictions
    // absorbed by withdrawing knowledge still warrant a diagnosis pass.
    {
        TranslationConfig cfg{.horizon = h_min, .first_free_step = h.next_step};
        auto q = detail::ground_translated(translate::translate(sd, h, cfg));
        solve::SolveOptions opt;
        opt.max_models = 1;
        opt.max_decisions = lim.max_decisions;
        opt.max_seconds = lim.max_seconds;
        opt.max_total_cr = lim.max_total_cr;
        auto res = solve::solve_with_cr(q.gp, opt);
        out.stats.decisions += res.stats.decisions;
        if (res.status == solve::Status::ResourceLimit) {
            out.status = PlanStatus::ResourceLimit;
            return out;
        }
        if (res.status == solve::Status::Inconsistent ||
            !res.models[0].applied_cr.empty()) {
            out.status = PlanStatus::InconsistentHistory;
            return out;
        }
    }

    for (int n = h_min; n <= max_horizon; ++n) {
        TranslationConfig cfg{.horizon = n, .first_free_step = h.next_step};
        auto q = detail::ground_translated(
            translate::add_goal(translate::translate(sd, h, cfg), goal, cfg));
        solve::SolveOptions opt;
        opt.max_models = 1;
        opt.max_decisions = lim.max_decisions;
        opt.max_seconds = lim.max_seconds;
        opt.max_total_cr = lim.max_total_cr;
        opt.decision_hints = detail::plan_hints(q.gp, q.vocab());
        auto res = solve::solve_with_cr(q.gp, opt);
        out.stats.decisions += res.stats.decisions;
        out.stats.conflicts += res.stats.conflicts;
        if (res.status == solve::Status::ResourceLimit) {
            out.status = PlanStatus::ResourceLimit;
            return out;
        }
        if (res.status != solve::Status::Consistent) continue;

        auto view = detail::view_of(q.gp, q.vocab(), res.models[0]);
        Plan plan;
        plan.horizon = n;
        for (const auto& [step, actions] : view.occurs) {
            if (step < h.next_step) continue;
            for (const Atom& a : actions)
                if (sd.symbols.pred(a.pred).kind == PredKind::ActionAgent)
                    plan.steps.push_back({a, step});
        }
        std::sort(plan.steps.begin(), plan.steps.end(),
                  [](const PlanStep& a, const PlanStep& b) { return a.step < b.step; });

        // The plan must replay through the deterministic semantics and entail
        // the goal; the solver and the interpreter check each other here.
        auto final_state = detail::replay(gd, view, n);
        if (!final_state) throw Error("internal: plan fails deterministic replay");
        for (const Literal& g : goal)
            if (!gd.holds(*final_state, g)) throw Error("internal: replayed plan misses the goal");
        auto believed = detail::replay(gd, view, h.next_step);
        if (!believed) throw Error("internal: history prefix fails replay");
        out.believed = std::move(*believed);
        out.status = PlanStatus::Found;
        out.plan = std::move(plan);
        return out;
    }
    out.status = PlanStatus::NoPlanWithinHorizon;
    return out;
}

// ---------------------------------------------------------------------------
// diagnose: explain reality-check contradictions by hypothesized exogenous
// occurrences. mode=all enumerates every hypothesis set consistent at the
// minimal default damage; mode=minimal only the cardinality-minimal ones.
// ---------------------------------------------------------------------------
struct Explanation {
    std::vector<HpdRecord> events;       // hypothesized exogenous occurrences
    std::vector<std::string> withdrawn;  // initial-state defaults given up
};

enum class DiagStatus { ConsistentAlready, Explained, Unexplainable, ResourceLimit };

struct DiagResult {
    DiagStatus status = DiagStatus::Unexplainable;
    std::vector<Explanation> explanations;
};

struct DiagnoseOptions {
    DiagnosisMode mode = DiagnosisMode::MinimalCr;
    int max_explanations = 64;
    QueryLimits limits;
};

inline DiagResult diagnose(const SystemDescription& sd, const History& h,
                           const DiagnoseOptions& opt = {}) {
    DiagResult out;
    int n = std::max(h.next_step, h.max_record_step());
    solve::SolveOptions sopt;
    sopt.max_decisions = opt.limits.max_decisions;
    sopt.max_seconds = opt.limits.max_seconds;
    sopt.max_total_cr = opt.limits.max_total_cr;

    {
        TranslationConfig cfg{.horizon = n};
        auto q = detail::ground_translated(translate::translate(sd, h, cfg));
        solve::SolveOptions one = sopt;
        one.max_models = 1;
        auto res = solve::solve_with_cr(q.gp, one);
        if (res.status == solve::Status::Consistent && res.models[0].applied_cr.empty()) {
            out.status = DiagStatus::ConsistentAlready;
            return out;
        }
        if (res.status == solve::Status::ResourceLimit) {
            out.status = DiagStatus::ResourceLimit;
            return out;
        }
    }

    TranslationConfig cfg{.horizon = n, .diagnosis = opt.mode};
    auto q = detail::ground_translated(translate::translate(sd, h, cfg));
    auto voc = q.vocab();
    std::vector<ground::GLit> proj;
    for (std::size_t i = 0; i < q.gp.atoms.size(); ++i) {
        auto t = voc.split(q.gp.atoms.atom(i), q.gp.symbols);
        if (t && t->kind == "expl") proj.push_back(ground::make_glit(static_cast<int>(i), false));
    }
    sopt.max_models = opt.max_explanations;
    auto res = solve::project_with_cr(q.gp, proj, sopt);
    if (res.status == solve::Status::ResourceLimit) {
        out.status = DiagStatus::ResourceLimit;
        return out;
    }
    if (res.status == solve::Status::Inconsistent) {
        out.status = DiagStatus::Unexplainable;
        return out;
    }
    for (const auto& p : res.projections) {
        Explanation e;
        for (auto l : p.lits) {
            auto t = voc.split(q.gp.atoms.atom(ground::glit_atom(l)), q.gp.symbols);
            e.events.push_back({t->inner, t->step});
        }
        for (int ri : p.applied_cr) {
            const auto& r = q.gp.rules[ri];
            if (r.prov.schema == RuleSchema::DefaultCr && r.prov.source >= 0 &&
                r.prov.source < static_cast<int>(h.defaults.size()))
                e.withdrawn.push_back(h.defaults[r.prov.source].id);
        }
        std::sort(e.withdrawn.begin(), e.withdrawn.end());
        std::sort(e.events.begin(), e.events.end(), [&](const HpdRecord& a, const HpdRecord& b) {
            if (a.step != b.step) return a.step < b.step;
            return lang::atom_to_string(sd.symbols, a.action) <
                   lang::atom_to_string(sd.symbols, b.action);
        });
        out.explanations.push_back(std::move(e));
    }
    std::sort(out.explanations.begin(), out.explanations.end(),
              [&](const Explanation& a, const Explanation& b) {
                  if (a.withdrawn.size() != b.withdrawn.size())
                      return a.withdrawn.size() < b.withdrawn.size();
                  if (a.events.size() != b.events.size()) return a.events.size() < b.events.size();
                  for (std::size_t i = 0; i < a.events.size(); ++i) {
                      if (a.events[i].step != b.events[i].step)
                          return a.events[i].step < b.events[i].step;
                      auto sa = lang::atom_to_string(sd.symbols, a.events[i].action);
                      auto sb = lang::atom_to_string(sd.symbols, b.events[i].action);
                      if (sa != sb) return sa < sb;
                  }
                  return false;
              });
    out.status = DiagStatus::Explained;
    return out;
}

// ---------------------------------------------------------------------------
// explain_scene: class labels at the smallest number of relaxed rules.
// ---------------------------------------------------------------------------
struct SceneLabeling {
    struct Candidate {
        ConstId label;
        int relaxed = 0;  // attribute rules withdrawn for this object
    };
    std::map<ConstId, std::vector<Candidate>> objects;
    std::vector<ConstId> unexplainable;
};

inline SceneLabeling explain_scene(const SystemDescription& sd,
                                   const std::vector<Literal>& observed,
                                   const std::vector<ConstId>& unlabeled,
                                   const QueryLimits& lim = {}) {
    SceneLabeling out;
    auto p = translate::add_scene_axioms(translate::scene_base(sd), sd, observed, unlabeled);
    auto gp = ground::ground(p);
    solve::SolveOptions opt;
    opt.max_decisions = lim.max_decisions;
    opt.max_seconds = lim.max_seconds;
    opt.max_total_cr = lim.max_total_cr;
    auto res = solve::solve_with_cr(gp, opt);
    if (res.status != solve::Status::Consistent) {
        out.unexplainable = unlabeled;
        return out;
    }
    auto is_a = gp.symbols.pred_id("is_a");
    for (const auto& m : res.models) {
        // Per-object relaxation counts for this answer set.
        std::map<ConstId, int> relaxed;
        for (int ri : m.applied_cr) {
            const auto& r = gp.rules[ri];
            if (r.prov.schema == RuleSchema::SceneAttrCr && !r.head.empty())
                ++relaxed[gp.atoms.atom(ground::glit_atom(r.head[0])).args[0].id];
        }
        for (auto l : m.lits) {
            if (ground::glit_neg(l)) continue;
            const Atom& a = gp.atoms.atom(ground::glit_atom(l));
            if (!is_a || a.pred != *is_a) continue;
            ConstId obj = a.args[0].id;
            ConstId cls = a.args[1].id;
            auto& cands = out.objects[obj];
            auto it = std::find_if(cands.begin(), cands.end(),
                                   [&](const auto& c) { return c.label == cls; });
            int rx = relaxed.count(obj) ? relaxed[obj] : 0;
            if (it == cands.end())
                cands.push_back({cls, rx});
            else
                it->relaxed = std::min(it->relaxed, rx);
        }
    }
    for (ConstId o : unlabeled)
        if (!out.objects.count(o)) out.unexplainable.push_back(o);
    for (auto& [o, cands] : out.objects)
        std::sort(cands.begin(), cands.end(),
                  [](const auto& a, const auto& b) { return a.label < b.label; });
    return out;
}

// ---------------------------------------------------------------------------
// Agent loop: plan, execute probabilistically, diagnose surprises, replan.
// ---------------------------------------------------------------------------

// Consequences of executing one planned action. `committed` statements have
// already been appended to the history by the executor.
struct ExecOutcome {
    bool advanced = false;   // an hpd record was committed for this step
    bool deviated = false;   // the committed action differs from the planned one
    bool replan = false;     // beliefs changed in a way that invalidates the plan
    long cycles = 0;         // simulated observation/action cycles consumed
};

class Executor {
  public:
    virtual ~Executor() = default;
    virtual ExecOutcome execute(const Atom& action, const State& believed, History& hist,
                                int step) = 0;
};

// Loop-to-world synchronization point: fires scripted exogenous events that
// are due at the given history step (announced events commit hpd records).
using StepHook = std::function<void(int next_step, History& hist)>;

enum class TaskOutcome { Success, NoPlan, Unexplainable, BudgetExhausted, ResourceLimit };

struct TaskResult {
    TaskOutcome outcome = TaskOutcome::BudgetExhausted;
    std::vector<PlanStep> executed;
    int diagnoses = 0;
    int replans = 0;
    long cycles = 0;
    double plan_ms = 0, exec_ms = 0, diag_ms = 0;
    History final_history;
};

struct LoopOptions {
    int max_horizon = 12;
    int max_replans = 8;
    long max_cycles = 500;
    int max_retries_per_step = 8;  // identical action re-executions without progress
    // Online repairs stay cheap: one fault hypothesis or one withdrawal per
    // diagnosis round. Offline queries may raise the cap.
    QueryLimits limits{.max_total_cr = 1};
};

inline TaskResult run_agent_loop(const SystemDescription& sd, const GroundDomain& gd,
                                 History hist, const std::vector<Literal>& goal, Executor& exec,
                                 const StepHook& sync, const LoopOptions& opt = {}) {
    TaskResult tr;
    Plan current;
    State believed;
    bool have_plan = false;
    bool ever_planned = false;
    std::size_t cursor = 0;
    int retries = 0;
    auto now = [] { return std::chrono::steady_clock::now(); };

    while (true) {
        if (tr.cycles > opt.max_cycles || tr.replans > opt.max_replans) {
            tr.outcome = TaskOutcome::BudgetExhausted;
            break;
        }
        if (sync) sync(hist.next_step, hist);

        if (!have_plan) {
            auto t0 = now();
            auto pr = plan(sd, gd, hist, goal, opt.max_horizon, opt.limits);
            tr.plan_ms += std::chrono::duration<double, std::milli>(now() - t0).count();
            if (pr.status == PlanStatus::InconsistentHistory) {
                auto t1 = now();
                DiagnoseOptions dopt;
                dopt.limits = opt.limits;
                auto d = diagnose(sd, hist, dopt);
                tr.diag_ms += std::chrono::duration<double, std::milli>(now() - t1).count();
                if (d.status != DiagStatus::Explained || d.explanations.empty()) {
                    tr.outcome = d.status == DiagStatus::ResourceLimit
                                     ? TaskOutcome::ResourceLimit
                                     : TaskOutcome::Unexplainable;
                    break;
                }
                const Explanation& chosen = d.explanations.front();
                if (chosen.events.empty() && chosen.withdrawn.empty()) {
                    tr.outcome = TaskOutcome::Unexplainable;  // nothing to commit
                    break;
                }
                ++tr.diagnoses;
                for (const auto& ev : chosen.events) hist.hpd.push_back(ev);
                for (const auto& id : chosen.withdrawn) hist.withdrawn_defaults.push_back(id);
                continue;
            }
            if (pr.status == PlanStatus::ResourceLimit) {
                tr.outcome = TaskOutcome::ResourceLimit;
                break;
            }
            if (pr.status == PlanStatus::NoPlanWithinHorizon) {
                tr.outcome = TaskOutcome::NoPlan;
                break;
            }
            if (ever_planned && !pr.plan.steps.empty()) ++tr.replans;
            ever_planned = true;
            if (pr.plan.steps.empty()) {
                tr.outcome = TaskOutcome::Success;
                break;
            }
            current = std::move(pr.plan);
            believed = std::move(pr.believed);
            have_plan = true;
            cursor = 0;
            retries = 0;
        }

        const Atom& action = current.steps[cursor].action;
        auto t0 = now();
        ExecOutcome out = exec.execute(action, believed, hist, hist.next_step);
        tr.exec_ms += std::chrono::duration<double, std::milli>(now() - t0).count();
        tr.cycles += out.cycles;

        if (out.advanced) {
            const HpdRecord& committed = hist.hpd.back();
            tr.executed.push_back({committed.action, committed.step});
            hist.bump(committed.step + 1);
            retries = 0;
            if (out.deviated || out.replan) {
                have_plan = false;
            } else {
                auto next = gd.apply(believed, committed.action);
                if (!next) {
                    have_plan = false;  // belief lost track; replan refreshes it
                } else {
                    believed = std::move(*next);
                    if (++cursor >= current.steps.size()) have_plan = false;
                }
            }
        } else if (out.replan) {
            have_plan = false;
        } else {
            // No commitment: the executor believes nothing happened. Retry.
            if (++retries > opt.max_retries_per_step) {
                tr.outcome = TaskOutcome::BudgetExhausted;
                break;
            }
        }
    }
    tr.final_history = std::move(hist);
    return tr;
}

// Machine-readable one-line trace records for the CLI and tests.
inline std::string trace_line(const std::string& phase, const std::string& detail) {
    std::ostringstream os;
    os << "{\"phase\":\"" << phase << "\",\"detail\":\"" << detail << "\"}";
    return os.str();
}

}  // namespace mixplan::reason
