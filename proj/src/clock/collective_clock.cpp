#include "ccsim/clock/collective_clock.hpp"

namespace ccsim
{
    std::uint64_t CollectiveClock::seq(const GroupKey& g) const
    {
        auto it = seq_.find(g);
        return it == seq_.end() ? 0 : it->second;
    }

    void CollectiveClock::restore(const GroupKey& g, std::uint64_t value)
    {
        auto& slot = seq_[g];
        if (value < slot)
            fail(ErrorKind::load_error, "clock restore would decrease SEQ" + g.to_string());
        slot = value;
    }

    std::optional<std::uint64_t> TargetTable::get(const GroupKey& g) const
    {
        auto it = target_.find(g);
        if (it == target_.end())
            return std::nullopt;
        return it->second;
    }

    bool TargetTable::raise(const GroupKey& g, std::uint64_t v)
    {
        auto [it, inserted] = target_.try_emplace(g, v);
        if (inserted)
            return true;
        if (v <= it->second)
            return false;
        it->second = v;
        return true;
    }

    bool reached_all_targets(const CollectiveClock& clock, const TargetTable& targets, WorldRank self)
    {
        bool all = true;
        for (const auto& [g, target] : targets.entries())
        {
            if (!g.contains(self))
                continue;
            const auto s = clock.seq(g);
            if (s > target)
                fail(ErrorKind::internal_invariant,
                     "rank " + std::to_string(self) + " SEQ" + g.to_string() + "=" + std::to_string(s) +
                         " exceeds TARGET=" + std::to_string(target));
            if (s != target)
                all = false;
        }
        return all;
    }

    nlohmann::json clock_to_json(const CollectiveClock& clock)
    {
        auto out = nlohmann::json::array();
        for (const auto& [g, s] : clock.entries())
            out.push_back({{"ggid", g}, {"seq", s}});
        return out;
    }

    CollectiveClock clock_from_json(const nlohmann::json& j)
    {
        CollectiveClock c;
        for (const auto& e : j)
            c.restore(e.at("ggid").get<GroupKey>(), e.at("seq").get<std::uint64_t>());
        return c;
    }

    nlohmann::json targets_to_json(const std::map<GroupKey, std::uint64_t>& targets)
    {
        auto out = nlohmann::json::array();
        for (const auto& [g, t] : targets)
            out.push_back({{"ggid", g}, {"target", t}});
        return out;
    }

    std::map<GroupKey, std::uint64_t> targets_from_json(const nlohmann::json& j)
    {
        std::map<GroupKey, std::uint64_t> out;
        for (const auto& e : j)
            out[e.at("ggid").get<GroupKey>()] = e.at("target").get<std::uint64_t>();
        return out;
    }
} // namespace ccsim
