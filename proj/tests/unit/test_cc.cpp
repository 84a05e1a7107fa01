#include "doctest.h"
#include "helpers.hpp"

#include "ccsim/harness/builtin.hpp"
#include "ccsim/harness/workload.hpp"

using namespace testing;

namespace
{
    const GroupKey kPair({0, 1});

    CcState pending_with(std::map<GroupKey, std::uint64_t> targets)
    {
        CcState s;
        s.ckpt_pending = true;
        for (const auto& [g, t] : targets)
            s.targets.set(g, t);
        return s;
    }
} // namespace

TEST_CASE("commit_begin without a pending checkpoint only counts")
{
    CcState s;
    CHECK(commit_begin(s, kPair, 0).empty());
    CHECK(commit_begin(s, kPair, 0).empty());
    CHECK_EQ(s.clock.seq(kPair), 2u);
    CHECK_EQ(s.updates_sent, 0u);
}

TEST_CASE("commit_begin past the target raises it and notifies the other members")
{
    const GroupKey g({2, 3, 4});
    auto s = pending_with({{g, 0}});
    const auto out = commit_begin(s, g, 3);
    REQUIRE_EQ(out.size(), 2u);
    CHECK_EQ(out[0].dest, 2);
    CHECK_EQ(out[1].dest, 4);
    CHECK_EQ(out[0].msg, (TargetUpdateMsg{g, 1, 3}));
    CHECK_EQ(s.targets.value_or_zero(g), 1u);
    CHECK_EQ(s.updates_sent, 2u);

    auto below = pending_with({{g, 5}});
    CHECK(commit_begin(below, g, 3).empty());
    CHECK_EQ(below.targets.value_or_zero(g), 5u);
}

TEST_CASE("updates apply as a maximum and count stale ones")
{
    auto s = pending_with({{kPair, 2}});
    const std::vector<TargetUpdateMsg> msgs{{kPair, 4, 1}, {kPair, 3, 1}, {GroupKey({0, 5}), 1, 5}};
    const auto outcome = apply_target_updates(s, msgs);
    CHECK_EQ(outcome.applied, 2u);
    CHECK_EQ(outcome.stale, 1u);
    CHECK_EQ(s.targets.value_or_zero(kPair), 4u);
    CHECK_EQ(s.updates_received, 3u);
    CHECK_EQ(s.stale_updates, 1u);

    const TargetUpdateMsg m{kPair, 9, 1};
    CHECK_EQ(TargetUpdateMsg::from_json(m.to_json()), m);
}

TEST_CASE("must_wait_for_updates")
{
    CcState idle;
    CHECK_FALSE(must_wait_for_updates(idle, 0));

    auto s = pending_with({{kPair, 1}});
    CHECK_FALSE(must_wait_for_updates(s, 0));
    commit_begin(s, kPair, 0);
    CHECK(must_wait_for_updates(s, 0));
    apply_target_updates(s, std::vector<TargetUpdateMsg>{{kPair, 2, 1}});
    CHECK_FALSE(must_wait_for_updates(s, 0));
}

TEST_CASE("a delayed update releases the lagging member")
{
    auto a = pending_with({{kPair, 1}});
    auto b = pending_with({{kPair, 1}});
    a.clock.restore(kPair, 1);
    b.clock.restore(kPair, 1);
    CHECK(must_wait_for_updates(b, 1));

    const auto out = commit_begin(a, kPair, 0);
    REQUIRE_EQ(out.size(), 1u);
    CHECK(must_wait_for_updates(b, 1));
    apply_target_updates(b, std::vector<TargetUpdateMsg>{out[0].msg});
    CHECK_FALSE(must_wait_for_updates(b, 1));
    CHECK(commit_begin(b, kPair, 1).empty());
    CHECK(must_wait_for_updates(b, 1));
    CHECK(must_wait_for_updates(a, 0));
}

TEST_CASE("request bookkeeping")
{
    CcState s;
    register_request(s, 4);
    register_request(s, 7);
    register_request(s, 9);
    on_request_consumed(s, 7);
    CHECK_EQ(s.incomplete_requests, std::vector<RequestId>{4, 9});
    on_request_consumed(s, 7);
    CHECK_EQ(s.incomplete_requests.size(), 2u);
}

TEST_CASE("drain_incomplete_requests")
{
    CcState empty;
    CHECK(drain_incomplete_requests(empty, [](RequestId) { return false; }).empty());

    CcState s;
    register_request(s, 1);
    register_request(s, 2);
    std::set<RequestId> done{2};
    const auto drained = drain_incomplete_requests(s, [&](RequestId id) {
        if (done.count(id))
            return true;
        done.insert(1);
        return false;
    });
    CHECK_EQ(drained, std::vector<RequestId>{2, 1});

    CHECK_THROWS_AS(drain_incomplete_requests(s, [](RequestId id) { return id == 2; }), SimError);
}

TEST_CASE("no checkpoint means no protocol traffic")
{
    WorkloadParams wp;
    wp.ranks = 6;
    wp.nonblocking_ratio = 0.25;
    for (std::uint64_t seed = 0; seed < 10; ++seed)
    {
        const auto s = generate_workload(seed, wp);
        auto plain_run = run(s, config(Algorithm::none, seed));
        auto cc_run = run(s, config(Algorithm::cc, seed));
        CHECK_EQ(cc_run.counters().protocol_messages(), 0u);
        CHECK_EQ(cc_run.counters().app_messages(), plain_run.counters().app_messages());
        CHECK_EQ(cc_run.global_checksum(), plain_run.global_checksum());
    }
}

TEST_CASE("chain7 at marks: rank 3 and rank 5 run one extra collective")
{
    const auto s = builtin_scenario("chain7");
    for (std::uint64_t seed = 0; seed < 8; ++seed)
    {
        auto cfg = config(Algorithm::cc, seed, CheckpointPlacement::at_marks());
        cfg.stop_after_snapshot = true;
        auto sim = run(s, cfg);
        REQUIRE_EQ(sim.snapshots().size(), 1u);
        const auto& targets = sim.snapshots().front().targets;
        CHECK_EQ(targets.at(GroupKey({1, 2})), 5u);
        CHECK_EQ(targets.at(GroupKey({2, 3})), 7u);
        CHECK_EQ(targets.at(GroupKey({3, 4, 5})), 3u);
        CHECK_EQ(targets.at(GroupKey({5, 6})), 4u);

        const auto& initial = sim.coordinator().history().back().initial_targets;
        CHECK_EQ(initial.at(GroupKey({3, 4, 5})), 2u);
        CHECK_EQ(initial.at(GroupKey({5, 6})), 3u);
        CHECK_EQ(sim.counters().target_updates, 3u);
        CHECK_EQ(sim.rank(3).cc.clock.seq(GroupKey({3, 4, 5})), 3u);
        CHECK_EQ(sim.rank(5).cc.clock.seq(GroupKey({5, 6})), 4u);
    }
}

TEST_CASE("non-blocking initiations advance SEQ")
{
    auto s = make_scenario("ibcasts", 2);
    for (auto& p : s.programs)
        p = {icoll(kWorldComm, 1, CollectiveType::bcast), icoll(kWorldComm, 2, CollectiveType::bcast),
             icoll(kWorldComm, 3, CollectiveType::bcast), completion(OpType::waitall, {1, 2, 3})};
    auto sim = run(s, config(Algorithm::cc, 1));
    const GroupKey world({0, 1});
    for (const auto& rs : sim.ranks())
    {
        CHECK_EQ(rs.cc.clock.seq(world), 3u);
        CHECK(rs.cc.incomplete_requests.empty());
    }
}

TEST_CASE("waitany removes one request from the incomplete list")
{
    auto s = make_scenario("waitany", 2);
    for (auto& p : s.programs)
        p = {icoll(kWorldComm, 1), icoll(kWorldComm, 2), completion(OpType::waitany, {1, 2}),
             completion(OpType::wait, {1}), completion(OpType::wait, {2})};
    auto sim = make_sim(s, config(Algorithm::cc, 2));
    bool seen = false;
    while (!sim.choices().empty())
    {
        sim.execute(sim.choices().front());
        const auto& r0 = sim.rank(0);
        if (r0.pc == 3 && !seen)
        {
            seen = true;
            CHECK_EQ(r0.cc.incomplete_requests.size(), 1u);
        }
    }
    CHECK(seen);
    CHECK(sim.rank(0).cc.incomplete_requests.empty());
}

TEST_CASE("a finished rank that receives a raised target is a protocol violation")
{
    auto s = make_scenario("violation", 3);
    s.comms = {{1, kWorldComm, {0, 1}}, {2, kWorldComm, {0, 2}}};
    for (auto& p : s.programs)
        p = {create(1), create(2)};
    s.programs[0].push_back(plain(OpType::mark));
    s.programs[0].push_back(coll(1));
    s.programs[0].push_back(coll(2));
    s.programs[2].push_back(coll(2));
    for (std::uint64_t seed = 0; seed < 4; ++seed)
    {
        try
        {
            run(s, config(Algorithm::cc, seed, CheckpointPlacement::at_marks()));
            FAIL("expected a protocol violation");
        }
        catch (const SimError& e)
        {
            CHECK_EQ(e.kind(), ErrorKind::protocol_violation);
        }
    }
}
