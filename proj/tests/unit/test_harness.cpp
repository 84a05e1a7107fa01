#include "doctest.h"
#include "helpers.hpp"

#include "ccsim/harness/builtin.hpp"
#include "ccsim/harness/harness.hpp"
#include "ccsim/harness/workload.hpp"
#include "ccsim/runtime/cost_model.hpp"

#include <sstream>

using namespace testing;

TEST_CASE("generator output")
{
    WorkloadParams wp;
    wp.ranks = 6;
    wp.groups = 4;
    wp.nonblocking_ratio = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed)
    {
        const auto s = generate_workload(seed, wp);
        CHECK_EQ(s.name, "gen-" + std::to_string(seed));
        CHECK_FALSE(s.has_nonblocking());
        CHECK_LE(s.total_ops(), static_cast<std::size_t>(wp.ops));
        CHECK_NOTHROW(s.validate());
        CHECK(check_crossing_legality(s).pass);
        CHECK_EQ(s, generate_workload(seed, wp));
    }
    CHECK_NE(generate_workload(1, wp), generate_workload(2, wp));

    wp.nonblocking_ratio = 0.4;
    wp.max_ops_per_rank = 10;
    bool any_nonblocking = false;
    for (std::uint64_t seed = 0; seed < 10; ++seed)
    {
        const auto s = generate_workload(seed, wp);
        any_nonblocking = any_nonblocking || s.has_nonblocking();
        for (const auto& p : s.programs)
            CHECK_LE(p.size(), 10u);
    }
    CHECK(any_nonblocking);
}

TEST_CASE("generator parameter validation")
{
    WorkloadParams wp;
    wp.ranks = 0;
    CHECK_THROWS_AS(generate_workload(0, wp), SimError);
    wp = {};
    wp.ranks = 65;
    CHECK_THROWS_AS(wp.validate(), SimError);
    wp = {};
    wp.nonblocking_ratio = 0.6;
    wp.p2p_ratio = 0.6;
    CHECK_THROWS_AS(wp.validate(), SimError);
    wp = {};
    wp.compute_ratio = -0.1;
    CHECK_THROWS_AS(wp.validate(), SimError);
}

TEST_CASE("run_scenario on chain7")
{
    RunOptions o;
    o.algorithm = Algorithm::cc;
    o.seed = 2;
    o.placement.placement = CheckpointPlacement::at_marks();
    const auto r = run_scenario(builtin_scenario("chain7"), o);
    CHECK(r.passed());
    REQUIRE(r.snapshot.has_value());
    CHECK_EQ(r.metrics.status, "completed");
    CHECK_EQ(r.metrics.rounds, 1u);
    CHECK_EQ(r.metrics.target_updates, 3u);
    CHECK_EQ(r.metrics.protocol_messages, 3u);
    std::map<std::string, std::uint64_t> finals;
    for (const auto& g : r.metrics.groups)
        if (g.target)
            finals[g.group.to_string()] = *g.target;
    CHECK_EQ(finals.at("{1,2}"), 5u);
    CHECK_EQ(finals.at("{2,3}"), 7u);
    CHECK_EQ(finals.at("{3,4,5}"), 3u);
    CHECK_EQ(finals.at("{5,6}"), 4u);
}

TEST_CASE("run_scenario protocol costs")
{
    WorkloadParams wp;
    wp.ranks = 5;
    wp.nonblocking_ratio = 0;
    const auto s = generate_workload(8, wp);

    RunOptions o;
    o.algorithm = Algorithm::none;
    const auto plain_run = run_scenario(s, o);
    CHECK(plain_run.passed());
    CHECK_EQ(plain_run.metrics.protocol_messages, 0u);

    o.algorithm = Algorithm::tpc;
    const auto tpc = run_scenario(s, o);
    CHECK(tpc.passed());
    std::uint64_t want = 0;
    for (const auto& e : tpc.trace.events())
        if (e.type == EventType::barrier_complete)
        {
            const auto c = e.detail.at("comm").get<CommId>();
            const auto n = c == kWorldComm ? static_cast<std::size_t>(s.world_size) : s.comm(c).members.size();
            want += barrier_cost(n);
        }
    CHECK_EQ(tpc.metrics.barrier_messages, want);
    CHECK_EQ(tpc.metrics.app_messages, plain_run.metrics.app_messages);
}

TEST_CASE("random placement resolves inside the run")
{
    WorkloadParams wp;
    wp.ranks = 4;
    const auto s = generate_workload(4, wp);
    const auto spec = PlacementSpec::parse("random:9");
    REQUIRE(spec.random_seed.has_value());
    const auto p = resolve_placement(s, Algorithm::cc, 1, spec);
    CHECK_EQ(p.kind, CheckpointPlacement::Kind::at_step);
    CHECK_EQ(p, resolve_placement(s, Algorithm::cc, 1, spec));
    CHECK_LE(p.step, run(s, config(Algorithm::none, 1)).step());
    CHECK_EQ(spec.describe(), "random:9");
    CHECK_EQ(PlacementSpec::parse("step:12").placement, CheckpointPlacement::at_step(12));
    CHECK_EQ(PlacementSpec::parse("marks").placement.kind, CheckpointPlacement::Kind::at_marks);
    CHECK_THROWS_AS(PlacementSpec::parse("random:"), SimError);
    CHECK_THROWS_AS(PlacementSpec::parse("sometime"), SimError);
}

TEST_CASE("compare across algorithms")
{
    WorkloadParams wp;
    wp.ranks = 4;
    wp.nonblocking_ratio = 0;
    const std::vector<ScenarioProgram> blocking{generate_workload(1, wp), generate_workload(2, wp)};
    const std::vector<PlacementSpec> placements{PlacementSpec::parse("none"), PlacementSpec::parse("random:3")};
    const std::vector<Algorithm> algos{Algorithm::none, Algorithm::cc, Algorithm::tpc};
    const auto table = compare(blocking, {0, 1, 2}, placements, algos);
    CHECK_EQ(table.rows.size(), 2u * 3u * (3u + 2u));
    for (const auto& row : table.rows)
        CHECK_EQ(row.status, "completed");
    const auto agg = table.aggregate();
    REQUIRE_EQ(agg.size(), 3u);
    for (const auto& a : agg)
    {
        CHECK_EQ(a.at("failures"), 0);
        CHECK_EQ(a.at("runs"), a.at("algorithm") == "none" ? 6 : 12);
    }

    wp.nonblocking_ratio = 0.5;
    ScenarioProgram nb;
    for (std::uint64_t seed = 0;; ++seed)
    {
        nb = generate_workload(seed, wp);
        if (nb.has_nonblocking())
            break;
    }
    const auto nb_table = compare({nb}, {0}, {PlacementSpec::parse("none")}, {Algorithm::cc, Algorithm::tpc});
    REQUIRE_EQ(nb_table.rows.size(), 2u);
    CHECK_EQ(nb_table.rows[0].status, "completed");
    CHECK_EQ(nb_table.rows[1].status, "unsupported-operation");
    for (const auto& a : nb_table.aggregate())
        if (a.at("algorithm") == "2pc")
        {
            CHECK_EQ(a.at("unsupported"), 1);
            CHECK_EQ(a.at("failures"), 0);
        }

    CHECK(compare(blocking, {}, placements, algos).rows.empty());
}

TEST_CASE("metrics formats")
{
    RunOptions o;
    o.placement.placement = CheckpointPlacement::at_marks();
    const auto r = run_scenario(builtin_scenario("chain7"), o);
    const auto j = r.metrics.to_json();
    CHECK_EQ(j.at("algorithm"), "cc");
    CHECK_EQ(j.at("scenario"), "chain7");
    CHECK_EQ(j.at("placement"), "marks");
    CHECK_EQ(j.at("target_updates"), 3);

    const auto header = MetricsReport::csv_header();
    const auto row = r.metrics.csv_row();
    auto columns = [](const std::string& line) { return std::count(line.begin(), line.end(), ',') + 1; };
    CHECK_EQ(columns(header), columns(row));
    CHECK_NE(row.find("3.4.5=3/3"), std::string::npos);

    CompareTable t;
    t.rows.push_back(r.metrics);
    std::istringstream csv(t.to_csv());
    std::string first;
    std::getline(csv, first);
    CHECK_EQ(first, header);
}

TEST_CASE("load_scenario resolves built-ins")
{
    CHECK_EQ(load_scenario("chain7").world_size, 7);
    CHECK_EQ(load_scenario("late-bcast").world_size, 3);
    CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.jsonl"), SimError);
}

TEST_CASE("exhaustive search on late-bcast")
{
    const auto rep = run_exhaustive(builtin_scenario("late-bcast"), Algorithm::cc, 1'000'000);
    CHECK_MESSAGE(rep.verdict.pass, rep.verdict.detail);
    CHECK_FALSE(rep.result.truncated);
    CHECK_GT(rep.result.snapshots, 0u);
}
