#include "doctest.h"

#include "ccsim/clock/collective_clock.hpp"
#include "ccsim/clock/group_key.hpp"

#include <algorithm>
#include <random>
#include <set>

using namespace ccsim;

TEST_CASE("group keys are sorted member sets")
{
    const GroupKey a({5, 3, 4});
    const GroupKey b({3, 4, 5});
    CHECK_EQ(a, b);
    CHECK_EQ(a.members(), std::vector<WorldRank>{3, 4, 5});
    CHECK_EQ(a.to_string(), "{3,4,5}");
    CHECK(a.contains(4));
    CHECK_FALSE(a.contains(2));
    CHECK_NE(GroupKey({1, 2}), GroupKey({1, 2, 3}));
    CHECK(GroupKey({1, 2}) < GroupKey({1, 3}));

    CHECK_THROWS_AS(GroupKey(std::vector<WorldRank>{}), SimError);
    CHECK_THROWS_AS(GroupKey({1, -1}), SimError);
    CHECK_THROWS_AS(GroupKey({2, 2}), SimError);
}

TEST_CASE("display hash is FNV-1a over the sorted ranks")
{
    CHECK_EQ(GroupKey({0}).display_hash(), 0x4d25767f9dce13f5ULL);
    CHECK_EQ(GroupKey({2, 1}).display_hash(), 0xc9c28939c99668c6ULL);
    CHECK_EQ(GroupKey({5, 4, 3}).display_hash(), 0xeda5747ffb2e2397ULL);
}

TEST_CASE("group key identity over random subsets")
{
    std::mt19937_64 rng(7);
    std::set<std::vector<WorldRank>> sets;
    std::set<GroupKey> keys;
    for (int i = 0; i < 5000; ++i)
    {
        std::vector<WorldRank> m;
        for (WorldRank r = 0; r < 12; ++r)
            if (rng() % 2)
                m.push_back(r);
        if (m.empty())
            continue;
        auto shuffled = m;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const GroupKey k(shuffled);
        CHECK_EQ(k.members(), m);
        CHECK_EQ(k, GroupKey(m));
        sets.insert(m);
        keys.insert(k);
    }
    CHECK_EQ(sets.size(), keys.size());
}

TEST_CASE("SEQ increments by exactly one per call")
{
    CollectiveClock c;
    const GroupKey g({0, 1});
    CHECK_EQ(c.seq(g), 0u);
    c.observe(g);
    CHECK_EQ(c.seq(g), 0u);
    CHECK_EQ(c.increment(g), 1u);
    CHECK_EQ(c.increment(g), 2u);
    CHECK_EQ(c.seq(GroupKey({0, 2})), 0u);
    c.observe(g);
    CHECK_EQ(c.seq(g), 2u);
}

TEST_CASE("reached_all_targets")
{
    CollectiveClock c;
    TargetTable t;
    const GroupKey mine({0, 1});
    const GroupKey foreign({2, 3});
    CHECK(reached_all_targets(c, t, 0));

    t.set(mine, 2);
    t.set(foreign, 9);
    CHECK_FALSE(reached_all_targets(c, t, 0));
    c.increment(mine);
    c.increment(mine);
    CHECK(reached_all_targets(c, t, 0));

    c.increment(mine);
    CHECK_THROWS_AS(reached_all_targets(c, t, 0), SimError);
}

TEST_CASE("target raise keeps the maximum")
{
    TargetTable t;
    const GroupKey g({1, 2});
    CHECK(t.raise(g, 3));
    CHECK_FALSE(t.raise(g, 2));
    CHECK_FALSE(t.raise(g, 3));
    CHECK(t.raise(g, 5));
    CHECK_EQ(t.value_or_zero(g), 5u);
    CHECK_EQ(t.value_or_zero(GroupKey({7})), 0u);
    t.clear();
    CHECK(t.empty());
}

TEST_CASE("clock and target JSON")
{
    CollectiveClock c;
    c.increment(GroupKey({0, 1}));
    c.increment(GroupKey({0, 1}));
    c.observe(GroupKey({0, 2, 3}));
    const auto j = clock_to_json(c);
    CHECK_EQ(j.dump(), R"([{"ggid":[0,1],"seq":2},{"ggid":[0,2,3],"seq":0}])");
    CHECK_EQ(clock_from_json(j), c);

    std::map<GroupKey, std::uint64_t> targets{{GroupKey({4}), 1}, {GroupKey({1, 2}), 7}};
    CHECK_EQ(targets_from_json(targets_to_json(targets)), targets);
}

TEST_CASE("restore never lowers a counter")
{
    CollectiveClock c;
    const GroupKey g({0, 1});
    c.restore(g, 4);
    CHECK_EQ(c.seq(g), 4u);
    c.restore(g, 4);
    CHECK_THROWS_AS(c.restore(g, 3), SimError);
}
