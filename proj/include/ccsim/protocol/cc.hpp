#pragma once

#include "ccsim/clock/collective_clock.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "json.hpp"

namespace ccsim
{
    /// Reserved tag for target updates on the internal world duplicate.
    /// Application tags are small non-negative integers and never collide.
    inline constexpr int kTargetUpdateTag = 0x7ccc0001;

    /// Wire format: {"ggid":[world ranks], "new_target":N, "origin":R}.
    struct TargetUpdateMsg
    {
        GroupKey ggid;
        std::uint64_t new_target = 0;
        WorldRank origin = -1;

        nlohmann::json to_json() const;
        static TargetUpdateMsg from_json(const nlohmann::json& j);

        friend bool operator==(const TargetUpdateMsg&, const TargetUpdateMsg&) = default;
    };

    struct CcOptions
    {
        /// Treat comm_create as a wrapped blocking collective counted in
        /// SEQ of the parent's group.
        bool count_comm_create = true;
    };

    struct CcState
    {
        CollectiveClock clock;
        TargetTable targets;
        bool ckpt_pending = false;
        std::vector<RequestId> incomplete_requests;
        std::uint64_t updates_sent = 0;
        std::uint64_t updates_received = 0;
        std::uint64_t stale_updates = 0;

        friend bool operator==(const CcState&, const CcState&) = default;
    };

    /// Loop condition of wait_for_target_updates: a checkpoint is pending and
    /// every local target is reached, so the rank must not run further
    /// collectives until an update arrives or the checkpoint is released.
    bool must_wait_for_updates(const CcState& state, WorldRank self);

    struct OutgoingUpdate
    {
        WorldRank dest = -1;
        TargetUpdateMsg msg;
    };

    /// The part of commit_begin after its wait: increments SEQ[g] and, when a
    /// checkpoint is pending and SEQ[g] now exceeds TARGET[g], raises the
    /// local target and returns one update per other member of g.
    std::vector<OutgoingUpdate> commit_begin(CcState& state, const GroupKey& g, WorldRank self);

    struct UpdateOutcome
    {
        std::size_t applied = 0; // raised a local target
        std::size_t stale = 0;   // value already known (a concurrent sender got there first)
        std::vector<GroupKey> raised;
    };

    /// Applies every queued update in arrival order, TARGET := max(TARGET, new_target).
    UpdateOutcome apply_target_updates(CcState& state, std::span<const TargetUpdateMsg> msgs);

    void register_request(CcState& state, RequestId id);
    /// Removes a consumed request from the incomplete list (no-op if absent).
    void on_request_consumed(CcState& state, RequestId id);

    /// Repeatedly tests every registered incomplete request until all are
    /// globally complete. `test` reports completion without consuming. A pass
    /// that makes no progress means a request can never complete at this
    /// state and throws protocol_violation. Returns the drained ids.
    std::vector<RequestId> drain_incomplete_requests(const CcState& state,
                                                     const std::function<bool(RequestId)>& test);
} // namespace ccsim
