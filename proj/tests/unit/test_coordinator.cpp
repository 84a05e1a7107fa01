#include "doctest.h"
#include "helpers.hpp"

#include "ccsim/harness/builtin.hpp"
#include "ccsim/harness/workload.hpp"

using namespace testing;

namespace
{
    ErrorKind error_of(const std::function<void()>& f)
    {
        try
        {
            f();
        }
        catch (const SimError& e)
        {
            return e.kind();
        }
        FAIL("expected a SimError");
        return ErrorKind::internal_invariant;
    }

    const GroupKey kA({0, 1});
    const GroupKey kB({1, 2});
} // namespace

TEST_CASE("key-value store accepts one report per rank")
{
    KeyValueStore kvs;
    kvs.put_report(0, {{kA, 3}});
    CHECK(kvs.has_report(0));
    CHECK_EQ(kvs.get(kA, 0), std::optional<std::uint64_t>{3});
    CHECK_FALSE(kvs.get(kB, 0).has_value());
    CHECK_EQ(error_of([&] { kvs.put_report(0, {{kA, 4}}); }), ErrorKind::protocol_violation);
}

TEST_CASE("targets are per-group maxima")
{
    KeyValueStore kvs;
    kvs.put_report(0, {{kA, 3}});
    kvs.put_report(1, {{kA, 5}, {kB, 1}});
    kvs.put_report(2, {{kB, 2}});
    const auto t = compute_targets(kvs, 3);
    CHECK_EQ(t.at(kA), 5u);
    CHECK_EQ(t.at(kB), 2u);

    KeyValueStore partial;
    partial.put_report(0, {});
    CHECK_EQ(error_of([&] { compute_targets(partial, 2); }), ErrorKind::protocol_violation);

    KeyValueStore empty_reports;
    empty_reports.put_report(0, {});
    empty_reports.put_report(1, {});
    CHECK(compute_targets(empty_reports, 2).empty());
}

TEST_CASE("quiescence ledger")
{
    QuiescenceLedger ledger(2);
    CHECK_FALSE(ledger.quiescent());
    ledger.report(0, RankStatus::reached, 1, 0);
    ledger.report(1, RankStatus::reached, 0, 0);
    CHECK(ledger.all_reached());
    CHECK_FALSE(ledger.quiescent());
    ledger.report(1, RankStatus::reached, 0, 1);
    CHECK(ledger.quiescent());
    ledger.report(1, RankStatus::reached, 0, 2);
    CHECK_EQ(error_of([&] { (void)ledger.quiescent(); }), ErrorKind::protocol_violation);
}

TEST_CASE("one round at a time")
{
    Coordinator c;
    c.open_round(3, 2);
    CHECK(c.active());
    CHECK_EQ(c.round().id, 1u);
    CHECK_EQ(error_of([&] { c.open_round(4, 2); }), ErrorKind::invalid_configuration);
    c.close_round();
    CHECK_FALSE(c.active());
    CHECK_EQ(c.open_round(9, 2).id, 2u);
    CHECK_EQ(c.history().size(), 1u);
}

TEST_CASE("a request before the first step or after the end is immediately safe")
{
    WorkloadParams wp;
    wp.ranks = 4;
    wp.nonblocking_ratio = 0;
    const auto s = generate_workload(3, wp);
    for (auto algo : {Algorithm::cc, Algorithm::tpc})
    {
        auto early = run(s, config(algo, 1, CheckpointPlacement::at_step(0)));
        REQUIRE_EQ(early.snapshots().size(), 1u);
        for (const auto& ri : early.snapshots().front().ranks)
            CHECK_EQ(ri.pc, 0u);
        CHECK_EQ(early.counters().protocol_messages(),
                 algo == Algorithm::cc ? 0u : run(s, config(algo, 1)).counters().protocol_messages());

        auto late = run(s, config(algo, 1, CheckpointPlacement::at_step(1'000'000)));
        REQUIRE_EQ(late.snapshots().size(), 1u);
        for (const auto& ri : late.snapshots().front().ranks)
            CHECK_EQ(ri.pc, s.programs[static_cast<std::size_t>(ri.rank)].size());
    }
}

TEST_CASE("chain7 round records initial and final targets")
{
    auto sim = run(builtin_scenario("chain7"), config(Algorithm::cc, 4, CheckpointPlacement::at_marks()));
    CHECK(sim.completed());
    REQUIRE_EQ(sim.coordinator().history().size(), 1u);
    const auto& round = sim.coordinator().history().front();
    CHECK(round.declared);
    CHECK_EQ(round.initial_targets.at(GroupKey({1, 2})), 5u);
    CHECK_EQ(round.initial_targets.at(GroupKey({2, 3})), 7u);
    CHECK_EQ(round.final_targets.at(GroupKey({3, 4, 5})), 3u);
    CHECK_EQ(round.final_targets.at(GroupKey({5, 6})), 4u);
    CHECK_EQ(round.updates_during_round, 3u);
    CHECK_EQ(round.store.report_count(), 7u);
}

TEST_CASE("snapshot images round-trip")
{
    WorkloadParams wp;
    wp.ranks = 5;
    wp.nonblocking_ratio = 0.3;
    for (std::uint64_t seed = 0; seed < 5; ++seed)
    {
        const auto s = generate_workload(seed, wp);
        auto cfg = config(Algorithm::cc, seed, CheckpointPlacement::at_step(30));
        cfg.stop_after_snapshot = true;
        auto sim = run(s, cfg);
        REQUIRE_EQ(sim.snapshots().size(), 1u);
        const auto& img = sim.snapshots().front();
        CHECK_EQ(SnapshotImage::parse(img.dump()), img);
    }
}

TEST_CASE("corrupt snapshots are load errors")
{
    CHECK_EQ(error_of([] { SnapshotImage::parse("not json"); }), ErrorKind::load_error);
    CHECK_EQ(error_of([] { SnapshotImage::parse("{}"); }), ErrorKind::load_error);

    auto cfg = config(Algorithm::cc, 0, CheckpointPlacement::at_marks());
    cfg.stop_after_snapshot = true;
    auto j = run(builtin_scenario("chain7"), cfg).snapshots().front().to_json();
    j["version"] = 99;
    CHECK_EQ(error_of([&] { SnapshotImage::from_json(j); }), ErrorKind::load_error);
    CHECK_EQ(error_of([] { SnapshotImage::load("/nonexistent/snapshot.json"); }), ErrorKind::load_error);
}

TEST_CASE("restart completes a wait on a drained request")
{
    auto s = make_scenario("drained", 2);
    for (auto& p : s.programs)
        p = {icoll(kWorldComm, 1, CollectiveType::allreduce), plain(OpType::mark), completion(OpType::wait, {1})};
    auto cfg = config(Algorithm::cc, 3, CheckpointPlacement::at_marks());
    cfg.stop_after_snapshot = true;
    auto sim = run(s, cfg);
    REQUIRE_EQ(sim.snapshots().size(), 1u);
    const auto& img = sim.snapshots().front();
    for (const auto& ri : img.ranks)
    {
        REQUIRE_EQ(ri.requests.size(), 1u);
        CHECK(ri.requests.front().drained);
        CHECK(ri.requests.front().completable());
    }

    auto restarted = Simulation::restart(SnapshotImage::parse(img.dump()), config(Algorithm::cc, 8));
    restarted.run();
    CHECK(restarted.completed());
    CHECK_EQ(restarted.global_checksum(), run(s, config(Algorithm::none)).global_checksum());
    CHECK_EQ(restarted.counters().collective_messages, 0u);
}

TEST_CASE("restart keeps group identities")
{
    auto cfg = config(Algorithm::cc, 2, CheckpointPlacement::at_marks());
    cfg.stop_after_snapshot = true;
    auto sim = run(builtin_scenario("chain7"), cfg);
    auto restarted = Simulation::restart(sim.snapshots().front(), config(Algorithm::cc, 6));
    for (const auto& [id, info] : sim.comm_table())
        CHECK_EQ(restarted.comm(id).group, info.group);
    for (const auto& rs : sim.ranks())
        CHECK_EQ(restarted.rank(rs.rank).cc.clock, rs.cc.clock);
    CHECK_GT(restarted.first_step(), sim.snapshots().front().step);
    restarted.run();
    CHECK(restarted.completed());
}
