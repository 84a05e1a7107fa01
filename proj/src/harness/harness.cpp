#include "ccsim/harness/harness.hpp"

#include "ccsim/harness/builtin.hpp"
#include "ccsim/runtime/scenario_io.hpp"

#include <map>
#include <random>

namespace ccsim
{
    std::string PlacementSpec::describe() const
    {
        if (random_seed)
            return "random:" + std::to_string(*random_seed);
        return placement.describe();
    }

    PlacementSpec PlacementSpec::parse(std::string_view s)
    {
        PlacementSpec spec;
        if (s.starts_with("random:"))
        {
            const std::string num(s.substr(7));
            if (num.empty() || num.find_first_not_of("0123456789") != std::string::npos)
                fail(ErrorKind::invalid_configuration, "bad checkpoint placement '" + std::string(s) + "'");
            spec.random_seed = std::stoull(num);
            return spec;
        }
        spec.placement = CheckpointPlacement::parse(s);
        return spec;
    }

    bool RunResult::passed() const noexcept
    {
        if (error)
            return false;
        for (const auto& v : verdicts)
            if (!v.pass)
                return false;
        return true;
    }

    CheckpointPlacement resolve_placement(const ScenarioProgram& scenario, Algorithm algorithm, std::uint64_t seed,
                                          const PlacementSpec& spec)
    {
        if (!spec.random_seed)
            return spec.placement;
        SimConfig probe;
        probe.algorithm = algorithm;
        probe.seed = seed;
        Simulation sim(std::make_shared<const ScenarioProgram>(scenario), probe);
        sim.run();
        std::mt19937_64 rng(*spec.random_seed);
        return CheckpointPlacement::at_step(rng() % (sim.step() + 1));
    }

    namespace
    {
        void add_run_verdicts(RunResult& out, const Simulation& sim, const std::optional<std::string>& step_error)
        {
            const auto events = sim.trace().events();
            auto v = check_hb_acyclic(events);
            v.scenario = sim.scenario().name;
            v.seed = sim.config().seed;
            out.verdicts.push_back(v);

            Verdict inv{"step_invariants", sim.scenario().name, sim.config().seed, !step_error,
                        step_error.value_or("")};
            out.verdicts.push_back(inv);

            if (sim.checkpoint_fired())
            {
                const bool declared =
                    !sim.coordinator().history().empty() && sim.coordinator().history().back().declared;
                out.verdicts.push_back(Verdict{"safe_state_reached", sim.scenario().name, sim.config().seed, declared,
                                               declared ? "" : "round never declared a safe state"});
            }
            for (const auto& snap : sim.snapshots())
                out.verdicts.push_back(check_safe_state(snap, events));

            const auto bound = check_cascade_bound(sim);
            out.verdicts.push_back(
                Verdict{"cascade_bound", sim.scenario().name, sim.config().seed, !bound, bound.value_or("")});
        }

        RunResult drive(Simulation& sim, RunResult out)
        {
            std::optional<std::string> step_error;
            sim.set_step_observer([&](const Simulation& s) {
                if (!step_error)
                    step_error = check_step_invariants(s);
            });
            std::string status = sim.stopped() ? "stopped" : "completed";
            try
            {
                sim.run();
                status = sim.stopped() ? "stopped" : "completed";
            }
            catch (const SimError& e)
            {
                out.error = e.kind();
                status = std::string(to_string(e.kind()));
                out.verdicts.push_back(Verdict{"run", sim.scenario().name, sim.config().seed, false, e.what()});
            }
            sim.set_step_observer({});
            add_run_verdicts(out, sim, step_error);
            out.metrics = MetricsReport::from(sim, status);
            if (!sim.snapshots().empty())
                out.snapshot = sim.snapshots().back();
            out.trace = sim.trace();
            return out;
        }
    } // namespace

    RunResult run_scenario(const ScenarioProgram& scenario, const RunOptions& options)
    {
        RunResult out;
        auto legal = check_crossing_legality(scenario);
        out.verdicts.push_back(legal);

        SimConfig cfg;
        cfg.algorithm = options.algorithm;
        cfg.seed = options.seed;
        cfg.stop_after_snapshot = options.stop_after_snapshot;
        cfg.cc = options.cc;
        try
        {
            cfg.placement = resolve_placement(scenario, options.algorithm, options.seed, options.placement);
            Simulation sim(std::make_shared<const ScenarioProgram>(scenario), cfg);
            return drive(sim, std::move(out));
        }
        catch (const SimError& e)
        {
            out.error = e.kind();
            out.verdicts.push_back(Verdict{"run", scenario.name, options.seed, false, e.what()});
            out.metrics.algorithm = std::string(to_string(options.algorithm));
            out.metrics.scenario = scenario.name;
            out.metrics.seed = options.seed;
            out.metrics.placement = options.placement.describe();
            out.metrics.status = std::string(to_string(e.kind()));
            return out;
        }
    }

    RunResult restart_from(const SnapshotImage& image, std::uint64_t seed)
    {
        SimConfig cfg;
        cfg.algorithm = algorithm_from_string(image.algorithm);
        cfg.seed = seed;
        Simulation sim = Simulation::restart(image, cfg);
        return drive(sim, RunResult{});
    }

    ExhaustiveReport run_exhaustive(const ScenarioProgram& scenario, Algorithm algorithm, std::uint64_t max_states)
    {
        SimConfig cfg;
        cfg.algorithm = algorithm;
        cfg.mode = SchedulerMode::exhaustive_small;
        cfg.placement = algorithm == Algorithm::none ? CheckpointPlacement::none() : CheckpointPlacement::explore();
        Simulation initial(std::make_shared<const ScenarioProgram>(scenario), cfg);

        ExploreOptions opts;
        opts.max_states = max_states;
        opts.on_state = [](const Simulation& s) -> std::optional<std::string> {
            if (auto err = check_step_invariants(s))
                return err;
            // the state right after a declaration carries its snapshot
            const auto& rounds = s.coordinator().history();
            if (!s.snapshots().empty() && !rounds.empty() && rounds.back().safe_step + 1 == s.step())
                if (auto v = check_safe_state(s.snapshots().back(), s.trace().events()); !v.pass)
                    return v.detail;
            return std::nullopt;
        };
        opts.on_terminal = [](const Simulation& s) -> std::optional<std::string> {
            const auto events = s.trace().events();
            if (auto v = check_hb_acyclic(events); !v.pass)
                return v.detail;
            if (s.checkpoint_fired())
            {
                if (s.coordinator().history().empty() || !s.coordinator().history().back().declared)
                    return std::string("round never declared a safe state");
                for (const auto& snap : s.snapshots())
                    if (auto v = check_safe_state(snap, events); !v.pass)
                        return v.detail;
            }
            return check_cascade_bound(s);
        };
        ExhaustiveReport rep{explore(initial, opts), {}};
        rep.verdict.check = "exhaustive";
        rep.verdict.scenario = scenario.name;
        rep.verdict.pass = rep.result.ok();
        rep.verdict.detail = std::to_string(rep.result.states) + " states, " +
                             std::to_string(rep.result.transitions) + " transitions, " +
                             std::to_string(rep.result.terminals) + " terminals";
        if (rep.result.truncated)
            rep.verdict.detail += "; state limit reached";
        if (!rep.result.failures.empty())
            rep.verdict.detail += "; " + rep.result.failures.front();
        return rep;
    }

    nlohmann::json CompareTable::aggregate() const
    {
        std::map<std::string, nlohmann::json> per;
        for (const auto& r : rows)
        {
            auto& a = per[r.algorithm];
            if (a.is_null())
                a = {{"algorithm", r.algorithm}, {"runs", 0},         {"failures", 0},
                     {"unsupported", 0},         {"app_messages", 0}, {"protocol_messages", 0},
                     {"target_updates", 0},      {"barrier_messages", 0}};
            a["runs"] = a["runs"].get<std::uint64_t>() + 1;
            if (r.status == to_string(ErrorKind::unsupported_operation))
                a["unsupported"] = a["unsupported"].get<std::uint64_t>() + 1;
            else if (r.status != "completed" && r.status != "stopped")
                a["failures"] = a["failures"].get<std::uint64_t>() + 1;
            for (const char* k : {"app_messages", "protocol_messages", "target_updates", "barrier_messages"})
            {
                const std::uint64_t add = std::string(k) == "app_messages"        ? r.app_messages
                                          : std::string(k) == "protocol_messages" ? r.protocol_messages
                                          : std::string(k) == "target_updates"    ? r.target_updates
                                                                                  : r.barrier_messages;
                a[k] = a[k].get<std::uint64_t>() + add;
            }
        }
        nlohmann::json out = nlohmann::json::array();
        for (auto& [k, v] : per)
            out.push_back(v);
        return out;
    }

    nlohmann::json CompareTable::to_json() const
    {
        nlohmann::json rs = nlohmann::json::array();
        for (const auto& r : rows)
            rs.push_back(r.to_json());
        return {{"rows", rs}, {"aggregate", aggregate()}};
    }

    std::string CompareTable::to_csv() const
    {
        std::string out = MetricsReport::csv_header() + "\n";
        for (const auto& r : rows)
            out += r.csv_row() + "\n";
        return out;
    }

    CompareTable compare(const std::vector<ScenarioProgram>& scenarios, const std::vector<std::uint64_t>& seeds,
                         const std::vector<PlacementSpec>& placements, const std::vector<Algorithm>& algorithms)
    {
        CompareTable table;
        for (const auto& s : scenarios)
            for (auto seed : seeds)
                for (const auto& p : placements)
                    for (auto algo : algorithms)
                    {
                        if (algo == Algorithm::none && (p.random_seed || p.placement.kind !=
                                                                             CheckpointPlacement::Kind::none))
                            continue;
                        RunOptions o;
                        o.algorithm = algo;
                        o.seed = seed;
                        o.placement = p;
                        auto r = run_scenario(s, o);
                        if (r.metrics.status != to_string(ErrorKind::unsupported_operation) && !r.passed() && !r.error)
                            r.metrics.status = "verifier_failure";
                        table.rows.push_back(std::move(r.metrics));
                    }
        return table;
    }

    ScenarioProgram load_scenario(const std::string& name_or_path)
    {
        if (is_builtin(name_or_path))
            return builtin_scenario(name_or_path);
        return load_scenario_file(name_or_path);
    }
} // namespace ccsim
