#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mixplan/reason/reason.hpp"
#include "mixplan/reason/transition.hpp"

namespace mixplan::belief {

using namespace mixplan::lang;
using reason::GroundDomain;
using reason::State;

// ---------------------------------------------------------------------------
// Noise models.
// ---------------------------------------------------------------------------
struct SensorSpec {
    double tp = 1.0;  // p(O | E)
    double fp = 0.0;  // p(O | -E)
};

struct SensorModel {
    std::map<std::string, SensorSpec> by_pred;
    SensorSpec fallback{0.8, 0.1};

    SensorSpec lookup(const Symbols& sym, const Atom& a) const {
        auto it = by_pred.find(sym.pred(a.pred).name);
        return it == by_pred.end() ? fallback : it->second;
    }
};

struct MotionSpec {
    double success = 1.0;
    enum class Slip { None, Adjacent, Explicit } slip = Slip::None;
    std::vector<std::pair<std::string, double>> slip_targets;  // Explicit only
};

struct MotionModel {
    std::map<std::string, MotionSpec> by_action;
    MotionSpec fallback;

    MotionSpec lookup(const Symbols& sym, const Atom& action) const {
        auto it = by_action.find(sym.pred(action.pred).name);
        return it == by_action.end() ? fallback : it->second;
    }
};

struct NoiseConfig {
    SensorModel sensors;
    MotionModel motions;
};

// Config lines: `sensor <pred|*> tp=<f> fp=<f>` and
// `motion <action|*> success=<f> slip=none|adjacent|<loc:wt,...>`.
inline NoiseConfig parse_noise_config(const std::string& text) {
    NoiseConfig cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto cut = line.find('%');
        if (cut != std::string::npos) line.resize(cut);
        std::istringstream ls(line);
        std::string kind;
        if (!(ls >> kind)) continue;
        auto val = [&](const std::string& tok, const char* key) {
            std::string prefix = std::string(key) + "=";
            if (tok.rfind(prefix, 0) != 0)
                throw ParseError("expected " + prefix + "<value>", lineno, 1);
            return tok.substr(prefix.size());
        };
        if (kind == "sensor") {
            std::string name, tp, fp;
            ls >> name >> tp >> fp;
            SensorSpec s{std::stod(val(tp, "tp")), std::stod(val(fp, "fp"))};
            if (s.tp < 0 || s.tp > 1 || s.fp < 0 || s.fp > 1)
                throw ParseError("sensor rates must lie in [0,1]", lineno, 1);
            if (name == "*")
                cfg.sensors.fallback = s;
            else
                cfg.sensors.by_pred[name] = s;
        } else if (kind == "motion") {
            std::string name, succ, slip;
            ls >> name >> succ >> slip;
            MotionSpec m;
            m.success = std::stod(val(succ, "success"));
            if (m.success < 0 || m.success > 1)
                throw ParseError("motion success must lie in [0,1]", lineno, 1);
            std::string sv = val(slip, "slip");
            if (sv == "none")
                m.slip = MotionSpec::Slip::None;
            else if (sv == "adjacent")
                m.slip = MotionSpec::Slip::Adjacent;
            else {
                m.slip = MotionSpec::Slip::Explicit;
                std::istringstream ts(sv);
                std::string item;
                double total = 0;
                while (std::getline(ts, item, ',')) {
                    auto colon = item.find(':');
                    if (colon == std::string::npos)
                        throw ParseError("slip entries use loc:weight", lineno, 1);
                    double w = std::stod(item.substr(colon + 1));
                    m.slip_targets.emplace_back(item.substr(0, colon), w);
                    total += w;
                }
                if (std::abs(total + m.success - 1.0) > 1e-9)
                    throw ParseError("slip weights and success must sum to 1", lineno, 1);
            }
            if (name == "*")
                cfg.motions.fallback = m;
            else
                cfg.motions.by_action[name] = m;
        } else {
            throw ParseError("unknown noise entry '" + kind + "'", lineno, 1);
        }
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Belief state over a finite set of mutually exclusive hypotheses.
// ---------------------------------------------------------------------------
struct BeliefState {
    std::vector<Literal> hypotheses;
    std::vector<double> p;

    int argmax() const {
        int best = 0;
        for (int i = 1; i < static_cast<int>(p.size()); ++i)
            if (p[i] > p[best]) best = i;
        return best;
    }
    double max_p() const { return p.empty() ? 0.0 : p[argmax()]; }

    void normalize() {
        double sum = 0;
        for (double x : p) sum += x;
        if (sum <= 0) throw Error("belief distribution has zero mass");
        for (double& x : p) x /= sum;
    }

    bool is_normalized(double eps = 1e-9) const {
        double sum = 0;
        for (double x : p) {
            if (x < 0 || x > 1 + eps) return false;
            sum += x;
        }
        return std::abs(sum - 1.0) <= eps;
    }
};

enum class PriorSource { Uniform, HistoryDefault, Explicit };

// Builds the initial distribution. HistoryDefault concentrates `trust` mass
// on hypotheses matching initial-state defaults, the rest spread uniformly.
inline BeliefState init_belief(const std::vector<Literal>& subset, PriorSource source,
                               const std::vector<InitialDefault>* defaults = nullptr,
                               const std::vector<double>* explicit_prior = nullptr,
                               double trust = 0.8) {
    if (subset.empty()) throw Error("empty hypothesis subset");
    BeliefState b;
    b.hypotheses = subset;
    std::size_t n = subset.size();
    switch (source) {
        case PriorSource::Uniform:
            b.p.assign(n, 1.0 / static_cast<double>(n));
            break;
        case PriorSource::Explicit: {
            if (!explicit_prior || explicit_prior->size() != n)
                throw Error("explicit prior size mismatch");
            b.p = *explicit_prior;
            b.normalize();
            break;
        }
        case PriorSource::HistoryDefault: {
            std::vector<char> preferred(n, 0);
            std::size_t k = 0;
            if (defaults)
                for (std::size_t i = 0; i < n; ++i)
                    for (const auto& d : *defaults)
                        if (d.head == subset[i] && !preferred[i]) {
                            preferred[i] = 1;
                            ++k;
                        }
            if (k == 0 || k == n) {
                b.p.assign(n, 1.0 / static_cast<double>(n));
            } else {
                b.p.assign(n, (1.0 - trust) / static_cast<double>(n - k));
                for (std::size_t i = 0; i < n; ++i)
                    if (preferred[i]) b.p[i] = trust / static_cast<double>(k);
            }
            break;
        }
    }
    return b;
}

// One Bayesian update: an observation targeted at hypothesis i with the given
// sensor. Mutually exclusive support renormalizes the remaining mass
// proportionally, which reduces to the two-event posterior form for p_i.
inline BeliefState bayes_update(const BeliefState& b, int i, bool observed,
                                const SensorSpec& sensor) {
    if (i < 0 || i >= static_cast<int>(b.p.size())) throw Error("hypothesis index out of range");
    double li = observed ? sensor.tp : 1.0 - sensor.tp;
    double lo = observed ? sensor.fp : 1.0 - sensor.fp;
    if (observed && sensor.tp == 0.0 && sensor.fp == 0.0)
        throw Error("degenerate likelihood: p(O|E) = p(O|-E) = 0");
    BeliefState out = b;
    double sum = 0;
    for (std::size_t k = 0; k < out.p.size(); ++k) {
        out.p[k] *= (static_cast<int>(k) == i) ? li : lo;
        sum += out.p[k];
    }
    if (sum <= 0) throw Error("observation annihilates the belief distribution");
    for (double& x : out.p) x /= sum;
    return out;
}

// ---------------------------------------------------------------------------
// Relevant domain subset for one action: fluent instances from its causal
// laws and executability conditions, closed one step through state-constraint
// bodies and restricted by the static map relative to the believed state.
// ---------------------------------------------------------------------------
inline std::vector<Literal> relevant_subset(const Atom& action, const GroundDomain& gd,
                                            const State& believed) {
    const SystemDescription& sd = gd.sd();
    PredKind k = sd.symbols.pred(action.pred).kind;
    if (k != PredKind::ActionAgent && k != PredKind::ActionExogenous)
        throw Error("relevant_subset: not an action");

    // Seed: effect instances under current beliefs, falling back to the raw
    // effect heads when guarded laws are silent.
    std::vector<Atom> seed;
    for (const auto& e : gd.effects(believed, action)) seed.push_back(e.atom);
    if (seed.empty()) {
        for (const auto& law : sd.causal_laws) {
            if (law.action.pred != action.pred) continue;
            // Bind effect through action arguments where shared.
            Atom e = law.effect.atom;
            bool ok = true;
            for (auto& t : e.args) {
                if (!t.is_var()) continue;
                bool bound = false;
                for (std::size_t ai = 0; ai < law.action.args.size(); ++ai)
                    if (law.action.args[ai].is_var() && law.action.args[ai].id == t.id) {
                        t = action.args[ai];
                        bound = true;
                    }
                if (!bound) ok = false;
            }
            if (ok) seed.push_back(e);
        }
    }
    if (seed.empty()) throw Error("action has no observable effect model");

    // One-step closure through state-constraint bodies: instances of the same
    // functional family, kept when a static relation ties them to the
    // believed value (slip support) or they are believed true.
    std::vector<Atom> family;
    auto add = [&](const Atom& a) {
        for (const auto& f : family)
            if (f == a) return;
        family.push_back(a);
    };
    for (const Atom& s : seed) add(s);
    const Atom& primary = seed.front();
    const PredDecl& pd = sd.symbols.pred(primary.pred);
    if (pd.params.size() >= 1 && sd.symbols.pred(primary.pred).kind == PredKind::FluentBasic) {
        // Hypotheses must be mutually exclusive alternatives. The domain's
        // own exclusivity constraints (-p(.., V2) if p(.., V1), V1 != V2)
        // declare at which sort level values of this fluent exclude each
        // other; the level of the effect's value scopes the family, keeping
        // coarser-granularity views (room vs. spot) out of it.
        ConstId seed_val = primary.args.back().id;
        SortId level = pd.params.back();
        for (const auto& c : sd.constraints) {
            if (!c.head.neg || c.head.atom.pred != primary.pred) continue;
            if (c.body.size() != 1 || c.body[0].atom.pred != primary.pred || c.neqs.empty())
                continue;
            const Term& v2 = c.head.atom.args.back();
            if (!v2.is_var()) continue;
            SortId s = c.vars[v2.id].sort;
            if (sd.symbols.sorts.is_member(seed_val, s) && sd.symbols.sorts.is_subsort(s, level))
                level = s;
        }
        // Believed current value of the family at that level.
        std::optional<Atom> current;
        for (const Atom& b : believed.basics) {
            if (b.pred != primary.pred) continue;
            if (!sd.symbols.sorts.is_member(b.args.back().id, level)) continue;
            bool prefix = true;
            for (std::size_t i = 0; i + 1 < b.args.size(); ++i)
                if (!(b.args[i] == primary.args[i])) prefix = false;
            if (prefix) current = b;
        }
        if (current) {
            add(*current);
            ConstId cur_val = current->args.back().id;
            // Values one static hop from the current value, within the level.
            for (const Atom& st : sd.statics) {
                if (st.args.size() != 2) continue;
                ConstId other = -1;
                if (st.args[0].id == cur_val) other = st.args[1].id;
                if (st.args[1].id == cur_val) other = st.args[0].id;
                if (other < 0) continue;
                if (!sd.symbols.sorts.is_member(other, level)) continue;
                Atom a = primary;
                a.args.back() = Term::constant(other);
                add(a);
            }
        }
    }

    std::vector<Literal> out;
    if (family.size() == 1) {
        out.push_back({family[0], false});
        out.push_back({family[0], true});
    } else {
        std::sort(family.begin(), family.end(), [&](const Atom& a, const Atom& b) {
            return atom_to_string(sd.symbols, a) < atom_to_string(sd.symbols, b);
        });
        for (const Atom& a : family) out.push_back({a, false});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Probabilistic execution of one action against a world handle.
// ---------------------------------------------------------------------------
class WorldHandle {
  public:
    virtual ~WorldHandle() = default;
    // Issues the action once; false signals a broken handle, not a failed action.
    virtual bool attempt(const Atom& action) = 0;
    // One observation draw; nullopt when the fluent is not visible.
    virtual std::optional<bool> observe(const Atom& fluent) = 0;
};

struct ExecutionPolicy {
    double commit_threshold = 0.85;  // in (0.5, 1)
    int max_cycles = 50;
    int max_retries = 2;  // negative convergences before the anomaly is committed
    // Simulated-time weight of issuing an action, in observation cycles: a
    // base motion takes several sensor reads' worth of wall time.
    long action_cost = 5;

    void validate() const {
        if (!(commit_threshold > 0.5 && commit_threshold < 1.0))
            throw Error("commit threshold must lie in (0.5, 1)");
        if (max_cycles < 1) throw Error("max cycles must be at least 1");
    }
};

enum class ExecStatus { Completed, TimedOut };

struct ExecutionResult {
    ExecStatus status = ExecStatus::TimedOut;
    std::optional<HpdRecord> committed_hpd;
    std::vector<ObsRecord> committed_obs;
    long cycles = 0;      // action issue + observation draws
    long obs_cycles = 0;  // observation draws alone
    BeliefState final_belief;
    // Internal disposition for the agent loop.
    bool deviated = false;           // a different action was committed (slip)
    bool converged_negative = false; // belief says nothing happened; retry
};

// Executes one action: issue it, then observe and update until some
// hypothesis clears the commit threshold or the cycle budget runs out.
// On conviction the outcome is committed as hpd/obs statements; a timeout
// commits the contrary observation of the expected effect so that the
// logical layer notices the anomaly.
inline ExecutionResult execute_action(const Atom& action, const State& believed,
                                      const GroundDomain& gd, WorldHandle& world,
                                      const NoiseConfig& noise, const ExecutionPolicy& policy,
                                      int step, bool escalate_on_timeout = true) {
    policy.validate();
    const SystemDescription& sd = gd.sd();
    ExecutionResult res;

    auto subset = relevant_subset(action, gd, believed);
    std::vector<Literal> effs = gd.effects(believed, action);
    Literal expected = effs.empty() ? subset.front() : effs.front();

    if (!world.attempt(action)) return res;  // handle failure: timed out, zero cycles
    res.cycles += policy.action_cost;        // the action itself

    // Uniform prior over the relevant subset: conclusions about what the
    // action did are carried by observations, never by optimism about the
    // motion model, so a single stray reading cannot clear the threshold.
    BeliefState b = init_belief(subset, PriorSource::Uniform);

    // Observe, update, then test the threshold: conviction always rests on at
    // least one fresh observation. Hypotheses that yield no reading (out of
    // sensor range) are set aside so the probe rotates to observable ones.
    std::vector<char> unobservable(subset.size(), 0);
    for (int cycle = 0; cycle < policy.max_cycles; ++cycle) {
        int probe = -1;
        for (std::size_t i = 0; i < b.p.size(); ++i)
            if (!unobservable[i] && (probe < 0 || b.p[i] > b.p[probe])) probe = static_cast<int>(i);
        if (probe < 0) break;  // nothing in range; decide on what we have
        const Atom target = b.hypotheses[probe].atom;
        res.cycles += 1;
        res.obs_cycles += 1;
        auto reading = world.observe(target);
        if (!reading) {
            for (std::size_t i = 0; i < b.hypotheses.size(); ++i)
                if (b.hypotheses[i].atom == target) unobservable[i] = 1;
        }
        if (reading) {
            // The update targets the positive hypothesis of the probed atom.
            int pos_idx = probe;
            for (std::size_t i = 0; i < b.hypotheses.size(); ++i)
                if (b.hypotheses[i].atom == target && !b.hypotheses[i].neg)
                    pos_idx = static_cast<int>(i);
            b = bayes_update(b, pos_idx, *reading, noise.sensors.lookup(sd.symbols, target));
        }
#ifdef MIXPLAN_TRACE_EXEC
        std::fprintf(stderr, "    probe %s -> %s  max=%.3f\n",
                     atom_to_string(sd.symbols, target).c_str(),
                     reading ? (*reading ? "T" : "F") : "-", b.max_p());
#endif
        if (b.max_p() >= policy.commit_threshold) break;
    }

    res.final_belief = b;
    int winner = b.argmax();
    bool convinced = b.p[winner] >= policy.commit_threshold;

    if (convinced && b.hypotheses[winner] == expected) {
        res.status = ExecStatus::Completed;
        res.committed_hpd = HpdRecord{action, step};
        res.committed_obs.push_back({expected.atom, !expected.neg, step + 1});
        return res;
    }
    if (convinced) {
        // A different hypothesis won. For a positional family this is a slip:
        // what happened is the corresponding move, and it is committed as
        // such. Converging onto a hypothesis that already held before the
        // action means nothing happened at all.
        const Literal& won = b.hypotheses[winner];
        if (gd.holds(believed, won)) {
            res.status = ExecStatus::Completed;
            res.converged_negative = true;
            return res;
        }
        if (!won.neg && !(won.atom == expected.atom)) {
            // Find an agent action whose believed effect is the winning atom.
            for (const Atom& cand : gd.agent_actions()) {
                if (cand.pred != action.pred) continue;
                bool match = false;
                for (const Literal& e : gd.effects(believed, cand))
                    if (e.atom == won.atom && !e.neg) match = true;
                if (!match) continue;
                res.status = ExecStatus::Completed;
                res.deviated = true;
                res.committed_hpd = HpdRecord{cand, step};
                res.committed_obs.push_back({won.atom, true, step + 1});
                return res;
            }
        }
        res.status = ExecStatus::Completed;
        res.converged_negative = true;  // nothing committed; caller may retry
        return res;
    }
    // Timed out without conviction.
    res.status = ExecStatus::TimedOut;
    if (escalate_on_timeout) {
        res.committed_hpd = HpdRecord{action, step};
        res.committed_obs.push_back({expected.atom, expected.neg, step + 1});
    }
    return res;
}

// ---------------------------------------------------------------------------
// Agent-loop executor backed by the belief layer (the mixed architecture).
// ---------------------------------------------------------------------------
class BeliefExecutor : public reason::Executor {
  public:
    BeliefExecutor(const GroundDomain& gd, WorldHandle& world, NoiseConfig noise,
                   ExecutionPolicy policy = {})
        : gd_(gd), world_(world), noise_(std::move(noise)), policy_(policy) {}

    reason::ExecOutcome execute(const Atom& action, const State& believed, History& hist,
                                int step) override {
        reason::ExecOutcome out;
        auto res = execute_action(action, believed, gd_, world_, noise_, policy_, step,
                                  /*escalate_on_timeout=*/true);
        out.cycles = res.cycles;
        if (res.converged_negative) {
            // The belief layer is confident the action had no effect. Retry a
            // couple of times; then re-examine the believed preconditions
            // before blaming interference, since a stale commit (a door
            // believed open, an object believed present) is the more common
            // culprit and re-observing it keeps the history explainable.
            if (++negative_streak_ >= policy_.max_retries + 1) {
                negative_streak_ = 0;
                switch (disprove_precondition(action, believed, hist, step, out.cycles)) {
                    case ProbeResult::Acted:
                        out.advanced = true;
                        out.deviated = true;
                        out.replan = true;
                        return out;
                    case ProbeResult::Observed:
                        out.replan = true;
                        return out;
                    case ProbeResult::None:
                        break;
                }
                // Positional actions: re-estimate over the relevant subset.
                // Whatever the robot's position turns out to be is always
                // expressible without contradiction, unlike a fabricated
                // failed-effect record.
                auto subset = relevant_subset(action, gd_, believed);
                if (subset.size() > 2) {
                    relocalize(subset, believed, action, hist, step, out);
                    return out;
                }
                // Binary effect: commit the anomaly; reality checks route it
                // into diagnosis (a locked door, a vanished person).
                std::vector<Literal> effs = gd_.effects(believed, action);
                Literal expected = effs.empty() ? res.final_belief.hypotheses.front() : effs.front();
                hist.hpd.push_back({action, step});
                hist.obs.push_back({expected.atom, expected.neg, step + 1});
                out.advanced = true;
                out.replan = true;  // the contradiction forces diagnosis next
                return out;
            }
            return out;  // no commitment: retry the same step
        }
        negative_streak_ = 0;
        if (res.committed_hpd) {
            hist.hpd.push_back(*res.committed_hpd);
            for (const auto& o : res.committed_obs) hist.obs.push_back(o);
            out.advanced = true;
            out.deviated = res.deviated;
            out.replan = res.deviated || res.status == ExecStatus::TimedOut;
        }
        return out;
    }

  private:
    enum class ProbeResult { None, Observed, Acted };

    // Long re-observation pass over a positional family; commits the
    // conviction as a deviated sibling action or a confirming observation.
    void relocalize(const std::vector<Literal>& subset, const State& believed, const Atom& action,
                    History& hist, int step, reason::ExecOutcome& out) {
        BeliefState b = init_belief(subset, PriorSource::Uniform);
        int budget = std::min(16, policy_.max_cycles);
        std::vector<char> unobservable(subset.size(), 0);
        for (int c = 0; c < budget; ++c) {
            int probe = -1;
            for (std::size_t i = 0; i < b.p.size(); ++i)
                if (!unobservable[i] && (probe < 0 || b.p[i] > b.p[probe]))
                    probe = static_cast<int>(i);
            if (probe < 0) break;
            const Atom target = b.hypotheses[probe].atom;
            out.cycles += 1;
            auto r = world_.observe(target);
            if (!r)
                for (std::size_t i = 0; i < b.hypotheses.size(); ++i)
                    if (b.hypotheses[i].atom == target) unobservable[i] = 1;
            if (r) {
                int pos = probe;
                for (std::size_t i = 0; i < b.hypotheses.size(); ++i)
                    if (b.hypotheses[i].atom == target && !b.hypotheses[i].neg)
                        pos = static_cast<int>(i);
                b = bayes_update(b, pos, *r, noise_.sensors.lookup(gd_.sd().symbols, target));
            }
            if (b.max_p() >= policy_.commit_threshold) break;
        }
        out.replan = true;
        if (b.max_p() < policy_.commit_threshold) return;  // replan blind
        const Literal& won = b.hypotheses[b.argmax()];
        if (gd_.holds(believed, won)) {
            // Where it already was: the action did nothing observable.
            hist.obs.push_back({won.atom, !won.neg, step + 1});
            hist.bump(step + 1);
            return;
        }
        if (!won.neg) {
            for (const Atom& cand : gd_.agent_actions()) {
                if (cand.pred != action.pred) continue;
                bool matches = false;
                for (const Literal& eff : gd_.effects(believed, cand))
                    if (!eff.neg && eff.atom == won.atom) matches = true;
                if (!matches) continue;
                hist.hpd.push_back({cand, step});
                hist.obs.push_back({won.atom, true, step + 1});
                hist.bump(step + 1);
                out.advanced = true;
                out.deviated = true;
                return;
            }
        }
        hist.obs.push_back({won.atom, !won.neg, step + 1});
        hist.bump(step + 1);
    }

    // Probes executability-condition literals the agent believes do not hold
    // (those are what keeps the action allowed in its world view). When the
    // world contradicts the belief, the finding is committed: as the deviated
    // sibling action when it is one of their effects (a slip discovered
    // late), otherwise as a fresh observation whose reality check re-triggers
    // reasoning.
    ProbeResult disprove_precondition(const Atom& action, const State& believed, History& hist,
                                      int step, long& cycles) {
        const SystemDescription& sd = gd_.sd();
        std::vector<Atom> probed;
        for (const auto& exec : exec_instances(action)) {
            for (const Literal& l : exec) {
                if (sd.symbols.pred(l.atom.pred).kind != PredKind::FluentBasic) continue;
                if (gd_.holds(believed, l)) continue;  // believed true: not the blocker
                bool seen = false;
                for (const Atom& a : probed)
                    if (a == l.atom) seen = true;
                if (seen || probed.size() >= 4) continue;
                probed.push_back(l.atom);
                // Short binary re-observation of the atom.
                BeliefState b;
                b.hypotheses = {Literal{l.atom, false}, Literal{l.atom, true}};
                b.p = {0.5, 0.5};
                auto spec = noise_.sensors.lookup(sd.symbols, l.atom);
                int budget = std::min(8, policy_.max_cycles / 2);
                for (int c = 0; c < budget; ++c) {
                    cycles += 1;
                    auto r = world_.observe(l.atom);
                    if (!r) break;
                    b = bayes_update(b, 0, *r, spec);
                    if (b.max_p() >= policy_.commit_threshold) break;
                }
                if (b.max_p() < policy_.commit_threshold) continue;
                bool atom_true = b.argmax() == 0;
                bool literal_true = atom_true != l.neg;
                if (!literal_true) continue;  // belief confirmed; keep looking
                if (atom_true) {
                    for (const Atom& cand : gd_.agent_actions()) {
                        if (cand.pred != action.pred) continue;
                        bool matches = false;
                        for (const Literal& eff : gd_.effects(believed, cand))
                            if (!eff.neg && eff.atom == l.atom) matches = true;
                        if (!matches) continue;
                        hist.hpd.push_back({cand, step});
                        hist.obs.push_back({l.atom, true, step + 1});
                        hist.bump(step + 1);
                        return ProbeResult::Acted;
                    }
                }
                // The finding is fresh evidence: it lands on the step after
                // the failed attempts, leaving room for an exogenous event to
                // explain the change against older records.
                hist.obs.push_back({l.atom, atom_true, step + 1});
                hist.bump(step + 1);
                return ProbeResult::Observed;
            }
        }
        return ProbeResult::None;
    }

    // Ground executability-condition bodies for the action.
    std::vector<std::vector<Literal>> exec_instances(const Atom& action) {
        std::vector<std::vector<Literal>> out;
        const SystemDescription& sd = gd_.sd();
        for (const auto& e : sd.execs) {
            if (e.actions.size() != 1 || e.actions[0].pred != action.pred) continue;
            // Bind variables through the action arguments; enumerate the rest.
            std::vector<ConstId> bind(e.vars.size(), -1);
            bool ok = true;
            for (std::size_t i = 0; i < e.actions[0].args.size(); ++i) {
                const Term& t = e.actions[0].args[i];
                if (t.is_var())
                    bind[t.id] = action.args[i].id;
                else if (!(t == action.args[i]))
                    ok = false;
            }
            if (!ok) continue;
            std::function<void(std::size_t)> rec = [&](std::size_t vi) {
                if (vi == e.vars.size()) {
                    for (const auto& [a, b2] : e.neqs) {
                        ConstId va = a.is_var() ? bind[a.id] : a.id;
                        ConstId vb = b2.is_var() ? bind[b2.id] : b2.id;
                        if (va == vb) return;
                    }
                    std::vector<Literal> body;
                    for (const Literal& l : e.body) {
                        Literal g = l;
                        for (auto& t : g.atom.args)
                            if (t.is_var()) t = Term::constant(bind[t.id]);
                        if (sd.symbols.pred(g.atom.pred).kind == PredKind::Static) {
                            if (gd_.static_true(g.atom) == g.neg) return;  // instance dead
                            continue;
                        }
                        body.push_back(std::move(g));
                    }
                    out.push_back(std::move(body));
                    return;
                }
                if (bind[vi] >= 0) {
                    rec(vi + 1);
                    return;
                }
                for (ConstId c : sd.symbols.sorts.members(e.vars[vi].sort)) {
                    bind[vi] = c;
                    rec(vi + 1);
                }
                bind[vi] = -1;
            };
            rec(0);
        }
        return out;
    }

    const GroundDomain& gd_;
    WorldHandle& world_;
    NoiseConfig noise_;
    ExecutionPolicy policy_;
    int negative_streak_ = 0;
};

}  // namespace mixplan::belief
