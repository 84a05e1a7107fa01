#include "ccsim/harness/harness.hpp"
#include "ccsim/harness/workload.hpp"
#include "ccsim/runtime/scenario_io.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace
{
    using namespace ccsim;

    constexpr int kExitPass = 0;
    constexpr int kExitFail = 1;
    constexpr int kExitUsage = 2;

    void write_out(const std::string& path, const std::string& text)
    {
        if (path.empty() || path == "-")
        {
            std::cout << text;
            return;
        }
        std::ofstream f(path, std::ios::binary);
        if (!f)
            fail(ErrorKind::invalid_configuration, "cannot write " + path);
        f << text;
    }

    std::string read_file(const std::string& path)
    {
        std::ifstream f(path, std::ios::binary);
        if (!f)
            fail(ErrorKind::load_error, "cannot open " + path);
        std::ostringstream os;
        os << f.rdbuf();
        return os.str();
    }

    std::string metrics_text(const MetricsReport& m, const std::string& format)
    {
        if (format == "csv")
            return MetricsReport::csv_header() + "\n" + m.csv_row() + "\n";
        return m.to_json().dump(2) + "\n";
    }

    void print_verdicts(const std::vector<Verdict>& verdicts)
    {
        for (const auto& v : verdicts)
            std::cout << v.to_json().dump() << "\n";
    }

    struct RunArgs
    {
        std::string scenario;
        std::string algo = "cc";
        std::uint64_t seed = 0;
        std::optional<std::uint64_t> ckpt_step;
        std::optional<std::uint64_t> ckpt_random;
        bool ckpt_marks = false;
        bool stop_after = false;
        bool exhaustive = false;
        std::uint64_t max_states = 2'000'000;
        std::string snapshot_out;
        std::string metrics_out;
        std::string trace_out;
        std::string format = "json";
    };

    PlacementSpec placement_of(const RunArgs& a)
    {
        const int given = (a.ckpt_step ? 1 : 0) + (a.ckpt_random ? 1 : 0) + (a.ckpt_marks ? 1 : 0);
        if (given > 1)
            fail(ErrorKind::invalid_configuration, "choose one of --ckpt-at-step, --ckpt-random, --ckpt-at-marks");
        PlacementSpec p;
        if (a.ckpt_step)
            p.placement = CheckpointPlacement::at_step(*a.ckpt_step);
        if (a.ckpt_random)
            p.random_seed = *a.ckpt_random;
        if (a.ckpt_marks)
            p.placement = CheckpointPlacement::at_marks();
        return p;
    }

    int emit_result(const RunResult& r, const RunArgs& a)
    {
        print_verdicts(r.verdicts);
        if (!a.metrics_out.empty())
            write_out(a.metrics_out, metrics_text(r.metrics, a.format));
        if (!a.trace_out.empty())
            write_out(a.trace_out, r.trace.to_jsonl());
        if (!a.snapshot_out.empty())
        {
            if (!r.snapshot)
            {
                std::cerr << "no snapshot was taken\n";
                return kExitFail;
            }
            write_out(a.snapshot_out, r.snapshot->dump() + "\n");
        }
        return r.passed() ? kExitPass : kExitFail;
    }

    int cmd_run(const RunArgs& a)
    {
        const auto scenario = load_scenario(a.scenario);
        const auto algo = algorithm_from_string(a.algo);
        if (a.exhaustive)
        {
            const auto rep = run_exhaustive(scenario, algo, a.max_states);
            print_verdicts({rep.verdict});
            return rep.verdict.pass ? kExitPass : kExitFail;
        }
        RunOptions o;
        o.algorithm = algo;
        o.seed = a.seed;
        o.placement = placement_of(a);
        o.stop_after_snapshot = a.stop_after;
        return emit_result(run_scenario(scenario, o), a);
    }

    int cmd_restart(const RunArgs& a, const std::string& snapshot_in)
    {
        const auto image = SnapshotImage::load(snapshot_in);
        return emit_result(restart_from(image, a.seed), a);
    }

    struct VerifyArgs
    {
        std::string scenario;
        std::string snapshot_in;
        std::string trace_in;
        bool replay = false;
        std::string algo = "cc";
        std::uint64_t seed = 0;
        std::string placement = "random:1";
    };

    int cmd_verify(const VerifyArgs& a)
    {
        std::vector<Verdict> verdicts;
        std::optional<ScenarioProgram> scenario;
        if (!a.scenario.empty())
        {
            scenario = load_scenario(a.scenario);
            verdicts.push_back(check_crossing_legality(*scenario));
        }
        if (!a.snapshot_in.empty())
        {
            if (a.trace_in.empty())
                fail(ErrorKind::invalid_configuration, "--snapshot-in needs --trace-in");
            const auto image = SnapshotImage::load(a.snapshot_in);
            const auto trace = RunTrace::parse_jsonl(read_file(a.trace_in));
            verdicts.push_back(check_safe_state(image, trace.events()));
            verdicts.push_back(check_hb_acyclic(trace.events()));
            if (!scenario)
                scenario = image.scenario;
        }
        else if (!a.trace_in.empty())
            verdicts.push_back(check_hb_acyclic(RunTrace::parse_jsonl(read_file(a.trace_in)).events()));
        if (a.replay)
        {
            if (!scenario)
                fail(ErrorKind::invalid_configuration, "--replay needs a scenario");
            const auto algo = algorithm_from_string(a.algo);
            const auto spec = PlacementSpec::parse(a.placement);
            const auto placement = resolve_placement(*scenario, algo, a.seed, spec);
            verdicts.push_back(check_replay_equivalence(*scenario, algo, a.seed, placement));
        }
        if (verdicts.empty())
            fail(ErrorKind::invalid_configuration, "nothing to verify");
        print_verdicts(verdicts);
        for (const auto& v : verdicts)
            if (!v.pass)
                return kExitFail;
        return kExitPass;
    }
} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Collective checkpoint protocol simulator"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto add_run_flags = [&](CLI::App* sub) {
        sub->add_option("--seed", run_args.seed, "scheduler seed");
        sub->add_option("--metrics-out", run_args.metrics_out, "metrics file ('-' for stdout)");
        sub->add_option("--trace-out", run_args.trace_out, "event log file (JSON lines)");
        sub->add_option("--snapshot-out", run_args.snapshot_out, "snapshot file");
        sub->add_option("--format", run_args.format, "metrics format")->check(CLI::IsMember({"json", "csv"}));
    };

    auto* run = app.add_subcommand("run", "run a scenario (built-in name or JSON-lines file)");
    run->add_option("scenario", run_args.scenario, "scenario")->required();
    run->add_option("--algo", run_args.algo, "none, cc or 2pc")->check(CLI::IsMember({"none", "cc", "2pc"}));
    run->add_option("--ckpt-at-step", run_args.ckpt_step, "request a checkpoint at this scheduler step");
    run->add_option("--ckpt-random", run_args.ckpt_random, "request a checkpoint at a step drawn from this seed");
    run->add_flag("--ckpt-at-marks", run_args.ckpt_marks, "request a checkpoint once every rank waits at its mark");
    run->add_flag("--stop-after-ckpt", run_args.stop_after, "end the run after the snapshot");
    run->add_flag("--exhaustive", run_args.exhaustive, "explore every interleaving and checkpoint placement");
    run->add_option("--max-states", run_args.max_states, "state limit for --exhaustive");
    add_run_flags(run);

    std::string snapshot_in;
    auto* restart = app.add_subcommand("restart", "resume a snapshot and run to the end");
    restart->add_option("--snapshot-in", snapshot_in, "snapshot file")->required();
    add_run_flags(restart);

    WorkloadParams wp;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    auto* gen = app.add_subcommand("generate", "generate a random legal scenario");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--ranks", wp.ranks, "world size (1..64)");
    gen->add_option("--groups", wp.groups, "extra communicators");
    gen->add_option("--ops", wp.ops, "maximum total operations");
    gen->add_option("--max-ops-per-rank", wp.max_ops_per_rank, "per-rank operation bound (0: none)");
    gen->add_option("--nonblocking-ratio", wp.nonblocking_ratio, "share of non-blocking steps");
    gen->add_option("--p2p-ratio", wp.p2p_ratio, "share of point-to-point segments");
    gen->add_option("--compute-ratio", wp.compute_ratio, "share of compute steps");
    gen->add_option("-o,--out", gen_out, "output file (default stdout)");

    std::vector<std::string> cmp_scenarios;
    std::vector<std::uint64_t> cmp_seeds;
    std::vector<std::string> cmp_placements{"none"};
    std::vector<std::string> cmp_algos{"none", "cc", "2pc"};
    std::string cmp_format = "json";
    std::string cmp_out;
    auto* cmp = app.add_subcommand("compare", "tabulate metrics across algorithms, seeds and placements");
    cmp->add_option("scenarios", cmp_scenarios, "scenarios")->required();
    cmp->add_option("--seeds", cmp_seeds, "scheduler seeds")->delimiter(',');
    cmp->add_option("--placements", cmp_placements, "none, step:N, marks, random:SEED")->delimiter(',');
    cmp->add_option("--algos", cmp_algos, "algorithms")->delimiter(',');
    cmp->add_option("--format", cmp_format, "table format")->check(CLI::IsMember({"json", "csv"}));
    cmp->add_option("--metrics-out", cmp_out, "output file (default stdout)");

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "static legality, snapshot safety and replay checks");
    verify->add_option("scenario", va.scenario, "scenario");
    verify->add_option("--snapshot-in", va.snapshot_in, "snapshot to check");
    verify->add_option("--trace-in", va.trace_in, "event log the snapshot came from");
    verify->add_flag("--replay", va.replay, "run the checkpoint/restart differential");
    verify->add_option("--algo", va.algo, "algorithm for --replay")->check(CLI::IsMember({"cc", "2pc"}));
    verify->add_option("--seed", va.seed, "seed for --replay");
    verify->add_option("--placement", va.placement, "placement for --replay");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitUsage;
    }

    try
    {
        if (run->parsed())
            return cmd_run(run_args);
        if (restart->parsed())
            return cmd_restart(run_args, snapshot_in);
        if (gen->parsed())
        {
            write_out(gen_out, write_scenario(generate_workload(gen_seed, wp)));
            return kExitPass;
        }
        if (cmp->parsed())
        {
            std::vector<ScenarioProgram> scenarios;
            for (const auto& s : cmp_scenarios)
                scenarios.push_back(load_scenario(s));
            std::vector<PlacementSpec> placements;
            for (const auto& p : cmp_placements)
                placements.push_back(PlacementSpec::parse(p));
            std::vector<Algorithm> algos;
            for (const auto& a : cmp_algos)
                algos.push_back(algorithm_from_string(a));
            const auto table = compare(scenarios, cmp_seeds, placements, algos);
            write_out(cmp_out, cmp_format == "csv" ? table.to_csv() : table.to_json().dump(2) + "\n");
            return kExitPass;
        }
        if (verify->parsed())
            return cmd_verify(va);
    }
    catch (const SimError& e)
    {
        std::cerr << e.what() << "\n";
        const auto k = e.kind();
        return k == ErrorKind::invalid_configuration || k == ErrorKind::load_error ? kExitUsage : kExitFail;
    }
    return kExitUsage;
}
