#pragma once

#include "ccsim/runtime/scenario.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace ccsim
{
    /// Identifies one collective instance: the index-th collective call on a
    /// communicator. A two-phase-commit trivial barrier shares the index of the
    /// application collective it guards.
    struct InstanceId
    {
        CommId comm = kWorldComm;
        std::uint64_t index = 0;
        bool trivial_barrier = false;

        friend bool operator==(const InstanceId&, const InstanceId&) = default;
        friend auto operator<=>(const InstanceId&, const InstanceId&) = default;
    };

    /// What every member must agree on for an instance to match.
    struct CallShape
    {
        OpType op = OpType::collective; // collective, icollective, or comm_create
        CollectiveKind kind{};
        CommId created = -1;               // comm_create only
        std::vector<int> subset;           // comm_create only, parent-local ranks
        bool trivial_barrier = false;

        friend bool operator==(const CallShape&, const CallShape&) = default;
    };

    struct Instance
    {
        InstanceId id;
        CallShape shape;
        std::vector<WorldRank> members;
        std::vector<std::optional<Payload>> inputs; // engaged once the local rank arrived
        std::vector<RequestId> requests;            // non-blocking: per local rank
        std::size_t arrived = 0;
        bool complete = false;
        std::vector<std::optional<Payload>> outputs; // disengaged: member's buffer unchanged
        std::vector<bool> released;
        std::size_t released_count = 0;

        friend bool operator==(const Instance&, const Instance&) = default;
    };

    /// Computes per-member results, indexed by local rank.
    ///   barrier:   nothing delivered
    ///   bcast:     every member receives the root's vector
    ///   reduce:    root receives the elementwise fold (shorter inputs padded with the op identity)
    ///   allreduce: every member receives the fold
    ///   gather:    root receives the concatenation in local-rank order
    ///   alltoall:  member i receives [in_0[i mod |in_0|], ..., in_{n-1}[i mod |in_{n-1}|]]
    std::vector<std::optional<Payload>> compute_collective(const CollectiveKind& kind,
                                                           const std::vector<Payload>& inputs);

    class CollectiveEngine
    {
    public:
        /// Registers a member's arrival. Creates the instance on first arrival;
        /// a shape that differs from earlier arrivals throws collective_mismatch.
        /// Returns true when this arrival completed the instance.
        bool arrive(const InstanceId& id, const CallShape& shape, const std::vector<WorldRank>& members,
                    int local_rank, Payload input, RequestId request = -1);

        bool is_complete(const InstanceId& id) const;
        bool has_arrived(const InstanceId& id, int local_rank) const;
        const Instance* find(const InstanceId& id) const;

        /// Hands a completed instance's result to one member. The instance is
        /// dropped once every member has taken its result.
        std::optional<Payload> release(const InstanceId& id, int local_rank);

        /// Drops a partially arrived instance; returns the local ranks that had arrived.
        std::vector<int> abort(const InstanceId& id);

        const std::map<InstanceId, Instance>& live() const noexcept { return live_; }
        void clear() noexcept { live_.clear(); }

        friend bool operator==(const CollectiveEngine&, const CollectiveEngine&) = default;

    private:
        std::map<InstanceId, Instance> live_;
    };
} // namespace ccsim
