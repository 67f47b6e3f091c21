// Command-line front end: planning, diagnosis, scene explanation, standalone
// solving, and the paired benchmark over the restaurant domain.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mixplan/belief/belief.hpp"
#include "mixplan/ground/ground.hpp"
#include "mixplan/lang/parse.hpp"
#include "mixplan/lang/print.hpp"
#include "mixplan/reason/reason.hpp"
#include "mixplan/sim/sim.hpp"

using json = nlohmann::json;
using namespace mixplan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;  // no plan / inconsistent / task failure
constexpr int kExitUsage = 2;

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    if (!f.good()) throw Error("cannot read file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string sibling_path(const std::string& anchor, const std::string& name) {
    auto cut = anchor.find_last_of('/');
    return cut == std::string::npos ? name : anchor.substr(0, cut + 1) + name;
}

std::string action_str(const lang::Symbols& sym, const lang::Atom& a) {
    return lang::atom_to_string(sym, a);
}

void emit(const json& j, bool as_json, const std::string& text) {
    if (as_json)
        std::cout << j.dump(2) << "\n";
    else
        std::cout << text;
}

struct Common {
    std::string domain;
    std::string scenario;
    bool as_json = false;
    std::string dump_program;
    std::string dump_ground;
};

void maybe_dump(const Common& c, const lang::Program& p) {
    if (!c.dump_program.empty()) {
        std::ofstream f(c.dump_program);
        f << lang::print_program(p);
    }
    if (!c.dump_ground.empty()) {
        std::ofstream f(c.dump_ground);
        f << ground::dump_flat(ground::ground(p));
    }
}

int cmd_plan(const Common& c, int horizon) {
    auto sd = lang::parse_domain(slurp(c.domain));
    auto sc = lang::parse_scenario(slurp(c.scenario), sd);
    auto hist = lang::assemble_history(sd, sc);
    reason::GroundDomain gd(sd);
    if (!c.dump_program.empty() || !c.dump_ground.empty()) {
        translate::TranslationConfig cfg{.horizon = horizon, .first_free_step = hist.next_step};
        maybe_dump(c, translate::add_goal(translate::translate(sd, hist, cfg), sc.goal, cfg));
    }
    auto pr = reason::plan(sd, gd, hist, sc.goal, horizon);
    json j;
    std::ostringstream text;
    switch (pr.status) {
        case reason::PlanStatus::Found: {
            j["status"] = "found";
            j["horizon"] = pr.plan.horizon;
            j["plan"] = json::array();
            for (const auto& s : pr.plan.steps) {
                j["plan"].push_back(
                    {{"step", s.step}, {"action", action_str(sd.symbols, s.action)}});
                text << "occurs(" << action_str(sd.symbols, s.action) << ", " << s.step << ")\n";
            }
            if (pr.plan.steps.empty()) text << "empty plan: the goal already holds\n";
            emit(j, c.as_json, text.str());
            return kExitOk;
        }
        case reason::PlanStatus::NoPlanWithinHorizon:
            j["status"] = "no-plan";
            j["plan"] = json::array();
            emit(j, c.as_json, "no plan within horizon " + std::to_string(horizon) + "\n");
            return kExitNegative;
        case reason::PlanStatus::InconsistentHistory:
            j["status"] = "inconsistent-history";
            j["plan"] = json::array();
            emit(j, c.as_json, "history is inconsistent; run diagnose\n");
            return kExitNegative;
        case reason::PlanStatus::ResourceLimit:
            j["status"] = "resource-limit";
            j["plan"] = json::array();
            emit(j, c.as_json, "resource limit exceeded\n");
            return kExitNegative;
    }
    return kExitNegative;
}

int cmd_diagnose(const Common& c, const std::string& mode, int max_expl) {
    auto sd = lang::parse_domain(slurp(c.domain));
    auto sc = lang::parse_scenario(slurp(c.scenario), sd);
    auto hist = lang::assemble_history(sd, sc);
    reason::DiagnoseOptions opt;
    opt.mode = mode == "all" ? translate::DiagnosisMode::AllExplanations
                             : translate::DiagnosisMode::MinimalCr;
    opt.max_explanations = max_expl;
    opt.limits.max_total_cr = 4;
    if (!c.dump_program.empty() || !c.dump_ground.empty()) {
        int n = std::max(hist.next_step, hist.max_record_step());
        translate::TranslationConfig cfg{.horizon = n, .diagnosis = opt.mode};
        maybe_dump(c, translate::translate(sd, hist, cfg));
    }
    auto d = reason::diagnose(sd, hist, opt);
    json j;
    std::ostringstream text;
    j["explanations"] = json::array();
    switch (d.status) {
        case reason::DiagStatus::ConsistentAlready:
            j["status"] = "consistent";
            emit(j, c.as_json, "history is consistent; nothing to explain\n");
            return kExitOk;
        case reason::DiagStatus::Unexplainable:
            j["status"] = "unexplainable";
            emit(j, c.as_json, "no exogenous hypothesis restores consistency\n");
            return kExitNegative;
        case reason::DiagStatus::ResourceLimit:
            j["status"] = "resource-limit";
            emit(j, c.as_json, "resource limit exceeded\n");
            return kExitNegative;
        case reason::DiagStatus::Explained:
            j["status"] = "explained";
            for (const auto& e : d.explanations) {
                json je;
                je["events"] = json::array();
                je["withdrawn"] = json::array();
                text << "explanation:";
                for (const auto& ev : e.events) {
                    je["events"].push_back(
                        {{"action", action_str(sd.symbols, ev.action)}, {"step", ev.step}});
                    text << " expl(" << action_str(sd.symbols, ev.action) << ", " << ev.step << ")";
                }
                for (const auto& w : e.withdrawn) {
                    je["withdrawn"].push_back(w);
                    text << " withdraw(" << w << ")";
                }
                if (e.events.empty() && e.withdrawn.empty()) text << " (empty)";
                text << "\n";
                j["explanations"].push_back(std::move(je));
            }
            emit(j, c.as_json, text.str());
            return kExitOk;
    }
    return kExitNegative;
}

int cmd_explain_scene(const Common& c) {
    auto sd = lang::parse_domain(slurp(c.domain));
    auto sc = lang::parse_scenario(slurp(c.scenario), sd);
    if (!c.dump_program.empty() || !c.dump_ground.empty())
        maybe_dump(c, translate::add_scene_axioms(translate::scene_base(sd), sd, sc.scene_facts,
                                                  sc.unlabeled));
    auto lab = reason::explain_scene(sd, sc.scene_facts, sc.unlabeled);
    json j;
    std::ostringstream text;
    j["objects"] = json::object();
    j["unexplainable"] = json::array();
    for (const auto& [obj, cands] : lab.objects) {
        const std::string name = sd.symbols.sorts.const_name(obj);
        j["objects"][name] = json::array();
        text << name << ":";
        for (const auto& cand : cands) {
            j["objects"][name].push_back(
                {{"label", sd.symbols.sorts.const_name(cand.label)}, {"relaxed", cand.relaxed}});
            text << " is_a(" << name << ", " << sd.symbols.sorts.const_name(cand.label) << ")";
            if (cand.relaxed) text << " [" << cand.relaxed << " relaxed]";
        }
        text << "\n";
    }
    for (auto o : lab.unexplainable) {
        j["unexplainable"].push_back(sd.symbols.sorts.const_name(o));
        text << sd.symbols.sorts.const_name(o) << ": unexplainable\n";
    }
    emit(j, c.as_json, text.str());
    return lab.unexplainable.empty() ? kExitOk : kExitNegative;
}

int cmd_solve(const std::string& path, int max_models, bool as_json) {
    std::string text = slurp(path);
    ground::GroundProgram gp;
    if (text.rfind("mixplan-ground", 0) == 0)
        gp = ground::load_flat(text);
    else
        gp = ground::ground(lang::parse_program(text));
    solve::SolveOptions opt;
    opt.max_models = max_models;
    bool has_cr = std::any_of(gp.rules.begin(), gp.rules.end(),
                              [](const auto& r) { return r.cr; });
    auto res = has_cr ? solve::solve_with_cr(gp, opt) : solve::answer_sets(gp, opt);
    json j;
    std::ostringstream out;
    j["models"] = json::array();
    switch (res.status) {
        case solve::Status::Inconsistent:
            j["status"] = "inconsistent";
            emit(j, as_json, "inconsistent\n");
            return kExitNegative;
        case solve::Status::ResourceLimit:
            j["status"] = "resource-limit";
            emit(j, as_json, "resource limit exceeded\n");
            return kExitNegative;
        case solve::Status::Consistent:
            j["status"] = "consistent";
            for (std::size_t i = 0; i < res.models.size(); ++i) {
                json jm = json::array();
                out << "answer set " << (i + 1) << ": {";
                for (std::size_t k = 0; k < res.models[i].lits.size(); ++k) {
                    auto name = gp.lit_name(res.models[i].lits[k]);
                    jm.push_back(name);
                    out << (k ? ", " : "") << name;
                }
                out << "}";
                if (!res.models[i].applied_cr.empty()) {
                    out << " [cr applied:";
                    for (int ri : res.models[i].applied_cr) out << " " << ri;
                    out << "]";
                }
                out << "\n";
                j["models"].push_back(std::move(jm));
            }
            emit(j, as_json, out.str());
            return kExitOk;
    }
    return kExitNegative;
}

json trial_json(const sim::TrialResult& r) {
    const char* outcome = "budget";
    switch (r.outcome) {
        case reason::TaskOutcome::Success: outcome = "success"; break;
        case reason::TaskOutcome::NoPlan: outcome = "no-plan"; break;
        case reason::TaskOutcome::Unexplainable: outcome = "unexplainable"; break;
        case reason::TaskOutcome::BudgetExhausted: outcome = "budget"; break;
        case reason::TaskOutcome::ResourceLimit: outcome = "resource-limit"; break;
    }
    return {{"success", r.success}, {"cycles", r.cycles}, {"diagnoses", r.diagnoses},
            {"replans", r.replans}, {"wall_ms", r.wall_ms}, {"outcome", outcome}};
}

int cmd_run(const std::string& domain, const std::string& arch, int trials, std::uint64_t seed,
            const std::string& noise_path, bool as_json) {
    auto sd = lang::parse_domain(slurp(domain));
    reason::GroundDomain gd(sd);
    auto noise = belief::parse_noise_config(slurp(noise_path));
    sim::TrialConfig::Arch a = arch == "mixed" ? sim::TrialConfig::Arch::Mixed
                               : arch == "asp" ? sim::TrialConfig::Arch::AspOnly
                                               : sim::TrialConfig::Arch::ProbGreedy;
    int arch_idx = arch == "mixed" ? 0 : arch == "asp" ? 1 : 2;
    json j;
    j["arch"] = arch;
    j["trials"] = json::array();
    int succ = 0;
    long cyc = 0;
    std::ostringstream text;
    for (int g = 0; g < trials; ++g) {
        sim::BenchTask task;
        sim::TrialConfig cfg;
        cfg.scenario = sim::make_bench_scenario(sd, gd, seed, g, task);
        cfg.task = task;
        cfg.arch = a;
        cfg.noise = noise;
        cfg.seed = Rng::derive(seed, static_cast<std::uint64_t>(g) * 8 + arch_idx);
        cfg.group = g;
        auto r = sim::run_trial(sd, gd, cfg);
        succ += r.success ? 1 : 0;
        cyc += r.cycles;
        auto tj = trial_json(r);
        tj["group"] = g;
        j["trials"].push_back(std::move(tj));
        text << "trial " << g << ": " << (r.success ? "success" : "failure") << " in " << r.cycles
             << " cycles\n";
    }
    double acc = trials ? static_cast<double>(succ) / trials : 0.0;
    j["accuracy"] = acc;
    j["time_mean"] = trials ? static_cast<double>(cyc) / trials : 0.0;
    text << "accuracy " << acc << ", mean cycles "
         << (trials ? static_cast<double>(cyc) / trials : 0.0) << "\n";
    emit(j, as_json, text.str());
    return succ == trials ? kExitOk : kExitNegative;
}

int cmd_bench(const std::string& domain, int trials, std::uint64_t seed,
              const std::string& noise_path, bool as_json) {
    auto sd = lang::parse_domain(slurp(domain));
    reason::GroundDomain gd(sd);
    auto noise = belief::parse_noise_config(slurp(noise_path));
    auto s = sim::run_benchmark(sd, gd, trials, seed, noise);
    json j;
    auto arch_json = [](const sim::ArchStats& a) {
        return json{{"n", a.n},
                    {"accuracy", a.accuracy},
                    {"time_mean", a.time_mean},
                    {"time_std", a.time_std}};
    };
    j["per_arch"] = {{"mixed", arch_json(s.mixed)},
                     {"asp_only", arch_json(s.asp)},
                     {"prob_greedy", arch_json(s.greedy)}};
    j["factors"] = {{"accuracy_asp", s.acc_factor_asp},
                    {"accuracy_greedy", s.acc_factor_greedy},
                    {"time_asp", s.time_factor_asp},
                    {"time_asp_std", s.time_factor_asp_std},
                    {"time_greedy", s.time_factor_greedy},
                    {"time_greedy_std", s.time_factor_greedy_std}};
    j["sign_tests"] = {{"accuracy_mixed_vs_asp_p", s.sign_p_accuracy_mixed_vs_asp},
                       {"time_greedy_vs_mixed_p", s.sign_p_time_greedy_vs_mixed}};
    j["pairs"] = json::array();
    for (const auto& p : s.pairs)
        j["pairs"].push_back({{"group", p.group},
                              {"mixed", trial_json(p.mixed)},
                              {"asp_only", trial_json(p.asp)},
                              {"prob_greedy", trial_json(p.greedy)}});
    emit(j, as_json, sim::format_table(s));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"answer-set planning with probabilistic execution"};
    app.require_subcommand(1);

    Common c;
    int horizon = 12;
    std::string mode = "minimal";
    int max_models = 0;
    int max_expl = 64;
    std::string program_path;
    std::string arch = "mixed";
    int trials = 100;
    std::uint64_t seed = 2024;
    std::string noise_path;
    bool paired = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("domain", c.domain, "domain file")->required();
        cmd->add_option("scenario", c.scenario, "scenario file")->required();
        cmd->add_flag("--json", c.as_json, "machine-readable output");
        cmd->add_option("--dump-program", c.dump_program, "write the translated program");
        cmd->add_option("--dump-ground", c.dump_ground, "write the ground program (flat format)");
    };

    auto* plan_cmd = app.add_subcommand("plan", "plan for the scenario goal");
    add_common(plan_cmd);
    plan_cmd->add_option("--horizon", horizon, "maximum plan horizon");

    auto* diag_cmd = app.add_subcommand("diagnose", "explain history contradictions");
    add_common(diag_cmd);
    diag_cmd->add_option("--mode", mode, "all | minimal")->check(CLI::IsMember({"all", "minimal"}));
    diag_cmd->add_option("--max-explanations", max_expl, "cap on returned explanations");

    auto* scene_cmd = app.add_subcommand("explain-scene", "label objects from attributes");
    add_common(scene_cmd);

    auto* solve_cmd = app.add_subcommand("solve", "answer sets of a program file");
    solve_cmd->add_option("program", program_path, "rule file or flat ground file")->required();
    solve_cmd->add_option("--models", max_models, "maximum models (0 = all)");
    bool solve_json = false;
    solve_cmd->add_flag("--json", solve_json, "machine-readable output");

    auto* run_cmd = app.add_subcommand("run", "run one architecture on generated tasks");
    run_cmd->add_option("--domain", c.domain, "domain file")->required();
    run_cmd->add_option("--arch", arch, "mixed | asp | prob")
        ->check(CLI::IsMember({"mixed", "asp", "prob"}));
    run_cmd->add_option("--trials", trials, "number of trials");
    run_cmd->add_option("--seed", seed, "base seed");
    run_cmd->add_option("--noise", noise_path, "noise config file")->required();
    run_cmd->add_flag("--paired", paired,
                      "note: generated scenarios are always pair-compatible across archs");
    bool run_json = false;
    run_cmd->add_flag("--json", run_json, "machine-readable output");

    auto* bench_cmd = app.add_subcommand("bench", "paired benchmark over all architectures");
    bench_cmd->add_option("--domain", c.domain, "domain file")->required();
    bench_cmd->add_option("--trials", trials, "paired trial groups");
    bench_cmd->add_option("--seed", seed, "base seed");
    bench_cmd->add_option("--noise", noise_path, "noise config file")->required();
    bool bench_json = false;
    bench_cmd->add_flag("--json", bench_json, "machine-readable output");

    CLI11_PARSE(app, argc, argv);
    (void)paired;

    try {
        if (plan_cmd->parsed()) return cmd_plan(c, horizon);
        if (diag_cmd->parsed()) return cmd_diagnose(c, mode, max_expl);
        if (scene_cmd->parsed()) return cmd_explain_scene(c);
        if (solve_cmd->parsed()) return cmd_solve(program_path, max_models, solve_json);
        if (run_cmd->parsed())
            return cmd_run(c.domain, arch, trials, seed, noise_path, run_json);
        if (bench_cmd->parsed())
            return cmd_bench(c.domain, trials, seed, noise_path, bench_json);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
