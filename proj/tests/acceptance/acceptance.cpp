// Acceptance campaign: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "ccsim/harness/builtin.hpp"
#include "ccsim/harness/harness.hpp"
#include "ccsim/harness/workload.hpp"
#include "ccsim/runtime/cost_model.hpp"
#include "ccsim/runtime/scenario_io.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

using namespace ccsim;

namespace
{
    using Clock = std::chrono::steady_clock;

    constexpr int kScenarios = 500;
    constexpr int kPlacementsPerScenario = 3;
    constexpr int kReplayTriples = 100;
    constexpr int kExhaustiveScenarios = 300;

    struct Outcome
    {
        bool pass = true;
        std::string detail;
        std::vector<std::string> failures;

        void fail(const std::string& why)
        {
            pass = false;
            if (failures.size() < 5)
                failures.push_back(why);
        }
    };

    bool report(int n, const std::string& title, Outcome o, double seconds, double limit)
    {
        if (limit > 0 && seconds >= limit)
            o.fail("runtime " + std::to_string(seconds) + " s exceeds " + std::to_string(limit) + " s");
        if (limit > 0)
            std::printf("[%s] criterion %d: %s (%s; %.2f s, limit %.0f s)\n", o.pass ? "PASS" : "FAIL", n,
                        title.c_str(), o.detail.c_str(), seconds, limit);
        else
            std::printf("[%s] criterion %d: %s (%s)\n", o.pass ? "PASS" : "FAIL", n, title.c_str(), o.detail.c_str());
        for (const auto& f : o.failures)
            std::printf("    %s\n", f.c_str());
        std::fflush(stdout);
        return o.pass;
    }

    double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

    WorkloadParams campaign_params(int i)
    {
        WorkloadParams p;
        p.ranks = 2 + i % 15;                      // 2..16
        p.groups = 1 + (i * 7) % 6;                // 1..6
        p.ops = 60 + (i * 37) % 241;               // 60..300
        p.nonblocking_ratio = i % 2 == 0 ? 0.0 : 0.25;
        p.p2p_ratio = 0.1;
        p.compute_ratio = 0.1;
        return p;
    }

    /// Independent oracle for the two-phase-commit overhead: one trivial
    /// barrier per blocking collective instance, sized by its communicator.
    std::uint64_t expected_barrier_messages(const ScenarioProgram& s)
    {
        std::map<CommId, std::uint64_t> instances;
        std::map<CommId, std::size_t> size;
        size[kWorldComm] = static_cast<std::size_t>(s.world_size);
        std::map<CommId, CommId> parent;
        for (const auto& d : s.comms)
        {
            size[d.id] = d.members.size();
            parent[d.id] = d.parent;
        }
        // count per communicator on its lowest member: every member issues the same calls
        std::map<CommId, WorldRank> first;
        first[kWorldComm] = 0;
        for (const auto& d : s.comms)
            first[d.id] = d.members.front();
        for (int r = 0; r < s.world_size; ++r)
            for (const Op& op : s.programs[static_cast<std::size_t>(r)])
            {
                const CommId c = op.type == OpType::comm_create ? parent[op.comm] : op.comm;
                if (op.is_blocking_collective() && first[c] == r)
                    ++instances[c];
            }
        std::uint64_t total = 0;
        for (const auto& [c, n] : instances)
            total += n * barrier_cost(size[c]);
        return total;
    }

    bool criterion1()
    {
        const auto t0 = Clock::now();
        Outcome o;
        RunOptions opt;
        opt.algorithm = Algorithm::cc;
        opt.placement.placement = CheckpointPlacement::at_marks();
        const auto scenario = builtin_scenario("chain7");
        SimConfig cfg;
        cfg.algorithm = Algorithm::cc;
        cfg.placement = CheckpointPlacement::at_marks();
        Simulation sim(std::make_shared<const ScenarioProgram>(scenario), cfg);
        sim.run();
        const auto& rounds = sim.coordinator().history();
        auto g = [](std::vector<WorldRank> m) { return GroupKey(std::move(m)); };
        if (rounds.size() != 1 || !rounds[0].declared)
            o.fail("expected one declared round");
        else
        {
            const auto& init = rounds[0].initial_targets;
            const std::map<GroupKey, std::uint64_t> want_init{
                {g({1, 2}), 5}, {g({2, 3}), 7}, {g({3, 4, 5}), 2}, {g({5, 6}), 3}, {g({0, 1, 2, 3, 4, 5, 6}), 4}};
            if (init != want_init)
                o.fail("initial targets differ");
            const std::map<GroupKey, std::uint64_t> want_final{
                {g({1, 2}), 5}, {g({2, 3}), 7}, {g({3, 4, 5}), 3}, {g({5, 6}), 4}, {g({0, 1, 2, 3, 4, 5, 6}), 4}};
            if (rounds[0].final_targets != want_final)
                o.fail("final targets differ");
        }
        std::vector<std::tuple<WorldRank, WorldRank, std::string, std::uint64_t>> updates;
        std::uint64_t safe_step = 0;
        for (const auto& e : sim.trace().events())
        {
            if (e.type == EventType::update_send)
                updates.emplace_back(e.rank, e.detail.at("dest").get<int>(),
                                     e.detail.at("ggid").get<GroupKey>().to_string(),
                                     e.detail.at("new_target").get<std::uint64_t>());
            if (e.type == EventType::safe_state)
                safe_step = e.step;
            if (e.type == EventType::update_send && safe_step != 0)
                o.fail("update after safe state");
        }
        const decltype(updates) want{
            {3, 4, "{3,4,5}", 3}, {3, 5, "{3,4,5}", 3}, {5, 6, "{5,6}", 4}};
        if (updates != want)
            o.fail("update messages differ from 3->4, 3->5 ({3,4,5}=3), 5->6 ({5,6}=4)");
        auto verdict = check_safe_state(sim.snapshots().at(0), sim.trace().events());
        if (!verdict.pass)
            o.fail(verdict.detail);
        o.detail = "targets {1,2}:5 {2,3}:7 {3,4,5}:2 {5,6}:3, cascade to 3 and 4 with " +
                   std::to_string(updates.size()) + " updates";
        return report(1, "chain7 target cascade", o, since(t0), 1);
    }

    std::vector<ScenarioProgram> make_campaign()
    {
        std::vector<ScenarioProgram> out;
        for (int i = 0; i < kScenarios; ++i)
            out.push_back(generate_workload(1000 + static_cast<std::uint64_t>(i), campaign_params(i)));
        return out;
    }

    bool criterion2(const std::vector<ScenarioProgram>& campaign)
    {
        const auto t0 = Clock::now();
        Outcome o;
        std::size_t nb = 0;
        std::size_t max_ranks = 0;
        std::size_t max_ops = 0;
        for (std::size_t i = 0; i < campaign.size(); ++i)
        {
            const auto& s = campaign[i];
            nb += s.has_nonblocking();
            max_ranks = std::max(max_ranks, static_cast<std::size_t>(s.world_size));
            max_ops = std::max(max_ops, s.total_ops());
            RunOptions base;
            base.seed = i;
            base.algorithm = Algorithm::none;
            const auto plain = run_scenario(s, base);
            base.algorithm = Algorithm::cc;
            const auto cc = run_scenario(s, base);
            if (!plain.passed() || !cc.passed())
            {
                o.fail(s.name + ": run failed (" + plain.metrics.status + "/" + cc.metrics.status + ")");
                continue;
            }
            if (cc.metrics.protocol_messages != 0)
                o.fail(s.name + ": CC sent " + std::to_string(cc.metrics.protocol_messages) + " protocol messages");
            if (cc.metrics.app_messages != plain.metrics.app_messages ||
                cc.metrics.p2p_messages != plain.metrics.p2p_messages)
                o.fail(s.name + ": application messages differ");
            if (cc.metrics.checksum != plain.metrics.checksum)
                o.fail(s.name + ": application results differ");
        }
        if (max_ranks > 16 || max_ops > 300)
            o.fail("campaign exceeds 16 ranks / 300 ops");
        o.detail = std::to_string(campaign.size()) + " scenarios, " + std::to_string(nb) +
                   " with non-blocking ops, up to " + std::to_string(max_ranks) + " ranks and " +
                   std::to_string(max_ops) + " ops";
        return report(2, "zero-overhead property", o, since(t0), 120);
    }

    bool criterion3(const std::vector<ScenarioProgram>& campaign)
    {
        const auto t0 = Clock::now();
        Outcome o;
        std::size_t blocking = 0;
        std::size_t rejected = 0;
        for (std::size_t i = 0; i < campaign.size(); ++i)
        {
            const auto& s = campaign[i];
            RunOptions base;
            base.seed = i;
            base.algorithm = Algorithm::tpc;
            const auto tpc = run_scenario(s, base);
            if (s.has_nonblocking())
            {
                if (tpc.error != ErrorKind::unsupported_operation)
                    o.fail(s.name + ": non-blocking scenario not rejected (" + tpc.metrics.status + ")");
                else
                    ++rejected;
                continue;
            }
            ++blocking;
            base.algorithm = Algorithm::none;
            const auto plain = run_scenario(s, base);
            if (!tpc.passed() || !plain.passed())
            {
                o.fail(s.name + ": run failed");
                continue;
            }
            const auto want = expected_barrier_messages(s);
            const auto extra = tpc.metrics.app_messages + tpc.metrics.protocol_messages - plain.metrics.app_messages;
            if (extra != want || tpc.metrics.barrier_messages != want)
                o.fail(s.name + ": extra " + std::to_string(extra) + ", expected " + std::to_string(want));
        }
        o.detail = std::to_string(blocking) + " blocking-only scenarios exact, " + std::to_string(rejected) +
                   " non-blocking scenarios rejected";
        return report(3, "2PC overhead accounting", o, since(t0), 120);
    }

    struct RoundStats
    {
        std::size_t rounds = 0;
        std::uint64_t max_updates = 0;
    };

    bool criterion4(const std::vector<ScenarioProgram>& campaign, Outcome& cascade, RoundStats& stats)
    {
        const auto t0 = Clock::now();
        Outcome o;
        std::size_t snapshots = 0;
        std::uint64_t updates = 0;
        for (std::size_t i = 0; i < campaign.size(); ++i)
        {
            for (int k = 0; k < kPlacementsPerScenario; ++k)
            {
                RunOptions opt;
                opt.algorithm = Algorithm::cc;
                opt.seed = i * 31 + static_cast<std::size_t>(k);
                opt.placement.random_seed = i * 101 + static_cast<std::size_t>(k);
                const auto r = run_scenario(campaign[i], opt);
                const std::string where =
                    campaign[i].name + " seed " + std::to_string(opt.seed) + " " + opt.placement.describe();
                for (const auto& v : r.verdicts)
                    if (!v.pass)
                    {
                        if (v.check == "cascade_bound")
                            cascade.fail(where + ": " + v.detail);
                        else
                            o.fail(where + ": " + v.check + ": " + v.detail);
                    }
                if (!r.snapshot)
                    o.fail(where + ": no snapshot");
                else
                    ++snapshots;
                ++stats.rounds;
                stats.max_updates = std::max(stats.max_updates, r.metrics.target_updates);
                updates += r.metrics.target_updates;
            }
        }
        o.detail = std::to_string(snapshots) + " CC snapshots safe, " + std::to_string(updates) +
                   " target updates in total";
        return report(4, "safe-state soundness", o, since(t0), 300);
    }

    ScenarioProgram tiny(int i)
    {
        WorkloadParams p;
        p.ranks = 3;
        p.groups = 1 + i % 3;
        p.ops = 30;
        p.max_ops_per_rank = 10;
        p.nonblocking_ratio = i % 3 == 0 ? 0.0 : 0.3;
        p.p2p_ratio = i % 4 == 1 ? 0.2 : 0.05;
        p.compute_ratio = 0.05;
        return generate_workload(5000 + static_cast<std::uint64_t>(i), p);
    }

    bool criterion5()
    {
        const auto t0 = Clock::now();
        Outcome o;
        std::uint64_t states = 0;
        std::uint64_t terminals = 0;
        std::size_t longest = 0;
        std::vector<ScenarioProgram> set{builtin_scenario("late-bcast")};
        for (int i = 0; i < kExhaustiveScenarios; ++i)
            set.push_back(tiny(i));
        for (const auto& s : set)
        {
            for (const auto& prog : s.programs)
                longest = std::max(longest, prog.size());
            const auto rep = run_exhaustive(s, Algorithm::cc, 3'000'000);
            states += rep.result.states;
            terminals += rep.result.terminals;
            if (!rep.verdict.pass)
                o.fail(s.name + ": " + rep.verdict.detail);
            if (rep.result.snapshots == 0)
                o.fail(s.name + ": no branch took a snapshot");
        }
        if (longest > 10)
            o.fail("a program has more than 10 operations");
        o.detail = std::to_string(set.size()) + " three-rank scenarios (<= " + std::to_string(longest) +
                   " ops per rank), " + std::to_string(states) + " states, " + std::to_string(terminals) +
                   " terminal branches";
        return report(5, "exhaustive small-instance check", o, since(t0), 600);
    }

    bool criterion6(const std::vector<ScenarioProgram>& campaign, Outcome& cascade)
    {
        const auto t0 = Clock::now();
        Outcome o;
        std::size_t cc_n = 0;
        std::size_t tpc_n = 0;
        std::size_t aborted = 0;
        for (std::size_t i = 0; i < campaign.size() && (cc_n < kReplayTriples || tpc_n < kReplayTriples); ++i)
        {
            const auto& s = campaign[i];
            std::vector<Algorithm> algos;
            if (cc_n < kReplayTriples)
                algos.push_back(Algorithm::cc);
            if (tpc_n < kReplayTriples && !s.has_nonblocking())
                algos.push_back(Algorithm::tpc);
            for (auto algo : algos)
            {
                const std::uint64_t seed = 7 * i + 3;
                PlacementSpec spec;
                spec.random_seed = 13 * i + 5;
                const auto placement = resolve_placement(s, algo, seed, spec);
                const auto v = check_replay_equivalence(s, algo, seed, placement);
                (algo == Algorithm::cc ? cc_n : tpc_n) += 1;
                if (!v.pass)
                    o.fail(s.name + " " + std::string(to_string(algo)) + " " + placement.describe() + ": " +
                           v.detail);
                if (algo == Algorithm::tpc)
                {
                    SimConfig cfg;
                    cfg.algorithm = algo;
                    cfg.seed = seed;
                    cfg.placement = placement;
                    cfg.stop_after_snapshot = true;
                    Simulation sim(std::make_shared<const ScenarioProgram>(s), cfg);
                    sim.run();
                    for (const auto& ri : sim.snapshots().at(0).ranks)
                        if (!ri.aborted_barrier_log.empty())
                        {
                            ++aborted;
                            break;
                        }
                    if (auto b = check_cascade_bound(sim))
                        cascade.fail(*b);
                }
            }
        }
        if (cc_n < kReplayTriples || tpc_n < kReplayTriples)
            o.fail("not enough triples");
        o.detail = std::to_string(cc_n) + " CC and " + std::to_string(tpc_n) + " 2PC triples equal; " +
                   std::to_string(aborted) + " 2PC snapshots re-enter an aborted barrier";
        return report(6, "replay equivalence", o, since(t0), 300);
    }

    std::string slurp(const std::filesystem::path& p)
    {
        std::ifstream f(p, std::ios::binary);
        std::ostringstream os;
        os << f.rdbuf();
        return os.str();
    }

    bool criterion8(const std::vector<ScenarioProgram>& campaign)
    {
        const auto t0 = Clock::now();
        Outcome o;
        const auto dir = std::filesystem::temp_directory_path() / "ccsim-acceptance";
        std::filesystem::create_directories(dir);
        std::size_t checked = 0;
        auto once = [&](const ScenarioProgram& s, const RunOptions& opt, const std::string& tag) {
            const auto r = run_scenario(s, opt);
            const auto trace = dir / (tag + ".trace.jsonl");
            const auto metrics = dir / (tag + ".metrics.json");
            std::ofstream(trace, std::ios::binary) << r.trace.to_jsonl();
            std::ofstream(metrics, std::ios::binary) << r.metrics.to_json().dump(2) << "\n"
                                                     << r.metrics.csv_row() << "\n";
            return slurp(trace) + "\x1f" + slurp(metrics);
        };
        std::vector<std::pair<ScenarioProgram, RunOptions>> cases;
        for (auto algo : {Algorithm::none, Algorithm::cc, Algorithm::tpc})
        {
            RunOptions opt;
            opt.algorithm = algo;
            opt.seed = 42;
            if (algo != Algorithm::none)
                opt.placement.placement = CheckpointPlacement::at_marks();
            cases.emplace_back(builtin_scenario("chain7"), opt);
        }
        for (std::size_t i = 0; i < 40; ++i)
        {
            RunOptions opt;
            opt.algorithm = campaign[i].has_nonblocking() || i % 3 == 0 ? Algorithm::cc : Algorithm::tpc;
            opt.seed = 900 + i;
            opt.placement.random_seed = i;
            cases.emplace_back(campaign[i], opt);
        }
        for (std::size_t i = 0; i < cases.size(); ++i)
        {
            const auto a = once(cases[i].first, cases[i].second, "a" + std::to_string(i));
            const auto b = once(cases[i].first, cases[i].second, "b" + std::to_string(i));
            if (a != b)
                o.fail(cases[i].first.name + ": outputs differ between repeated runs");
            ++checked;
        }
        for (std::uint64_t seed = 0; seed < 20; ++seed)
            if (write_scenario(generate_workload(seed, campaign_params(static_cast<int>(seed)))) !=
                write_scenario(generate_workload(seed, campaign_params(static_cast<int>(seed)))))
                o.fail("generator output differs for seed " + std::to_string(seed));
        std::filesystem::remove_all(dir);
        o.detail = std::to_string(checked) + " repeated runs byte-identical (trace and metrics), 20 generator seeds";
        return report(8, "determinism", o, since(t0), 120);
    }
} // namespace

int main()
{
    bool ok = true;
    try
    {
        ok &= criterion1();
        const auto t_gen = Clock::now();
        const auto campaign = make_campaign();
        std::printf("generated %zu campaign scenarios in %.2f s\n", campaign.size(), since(t_gen));
        ok &= criterion2(campaign);
        ok &= criterion3(campaign);
        Outcome cascade;
        RoundStats stats;
        const auto t7 = Clock::now();
        ok &= criterion4(campaign, cascade, stats);
        ok &= criterion5();
        ok &= criterion6(campaign, cascade);
        {
            // chain7 round as well
            SimConfig cfg;
            cfg.algorithm = Algorithm::cc;
            cfg.placement = CheckpointPlacement::at_marks();
            Simulation sim(std::make_shared<const ScenarioProgram>(builtin_scenario("chain7")), cfg);
            sim.run();
            if (auto b = check_cascade_bound(sim))
                cascade.fail("chain7: " + *b);
        }
        cascade.detail = std::to_string(stats.rounds + 1) + " CC rounds plus the 2PC replay rounds within bound, max " +
                         std::to_string(stats.max_updates) + " updates in one round";
        ok &= report(7, "cascade bound", cascade, since(t7), 0);
        ok &= criterion8(campaign);
    }
    catch (const std::exception& e)
    {
        std::printf("[FAIL] acceptance aborted: %s\n", e.what());
        return 1;
    }
    std::printf("%s\n", ok ? "ALL CRITERIA PASS" : "SOME CRITERIA FAILED");
    return ok ? 0 : 1;
}
