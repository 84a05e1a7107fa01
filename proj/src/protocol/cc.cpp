#include "ccsim/protocol/cc.hpp"

#include <algorithm>

namespace ccsim
{
    nlohmann::json TargetUpdateMsg::to_json() const
    {
        return {{"ggid", ggid}, {"new_target", new_target}, {"origin", origin}};
    }

    TargetUpdateMsg TargetUpdateMsg::from_json(const nlohmann::json& j)
    {
        return TargetUpdateMsg{j.at("ggid").get<GroupKey>(), j.at("new_target").get<std::uint64_t>(),
                               j.at("origin").get<WorldRank>()};
    }

    bool must_wait_for_updates(const CcState& state, WorldRank self)
    {
        return state.ckpt_pending && reached_all_targets(state.clock, state.targets, self);
    }

    std::vector<OutgoingUpdate> commit_begin(CcState& state, const GroupKey& g, WorldRank self)
    {
        std::vector<OutgoingUpdate> out;
        const auto seq = state.clock.increment(g);
        if (!state.ckpt_pending || seq <= state.targets.value_or_zero(g))
            return out;
        state.targets.raise(g, seq);
        for (WorldRank m : g.members())
            if (m != self)
                out.push_back(OutgoingUpdate{m, TargetUpdateMsg{g, seq, self}});
        state.updates_sent += out.size();
        return out;
    }

    UpdateOutcome apply_target_updates(CcState& state, std::span<const TargetUpdateMsg> msgs)
    {
        UpdateOutcome outcome;
        for (const auto& m : msgs)
        {
            if (state.targets.raise(m.ggid, m.new_target))
            {
                ++outcome.applied;
                outcome.raised.push_back(m.ggid);
            }
            else
                ++outcome.stale;
        }
        state.updates_received += msgs.size();
        state.stale_updates += outcome.stale;
        return outcome;
    }

    void register_request(CcState& state, RequestId id) { state.incomplete_requests.push_back(id); }

    void on_request_consumed(CcState& state, RequestId id)
    {
        auto& v = state.incomplete_requests;
        v.erase(std::remove(v.begin(), v.end(), id), v.end());
    }

    std::vector<RequestId> drain_incomplete_requests(const CcState& state, const std::function<bool(RequestId)>& test)
    {
        std::vector<RequestId> remaining = state.incomplete_requests;
        std::vector<RequestId> drained;
        while (!remaining.empty())
        {
            std::vector<RequestId> still;
            for (RequestId id : remaining)
            {
                if (test(id))
                    drained.push_back(id);
                else
                    still.push_back(id);
            }
            if (still.size() == remaining.size())
                fail(ErrorKind::protocol_violation,
                     "request " + std::to_string(still.front()) + " cannot complete at the safe state");
            remaining = std::move(still);
        }
        return drained;
    }
} // namespace ccsim
