#pragma once

#include "ccsim/runtime/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ccsim
{
    enum class CollectiveType
    {
        barrier,
        bcast,
        reduce,
        allreduce,
        gather,
        alltoall,
    };

    enum class ReduceOp
    {
        sum,
        max,
    };

    /// Collective operation and its arguments. `root` is a local rank of the
    /// communicator; it is ignored (and normalized to 0) for rootless kinds.
    struct CollectiveKind
    {
        CollectiveType type = CollectiveType::barrier;
        int root = 0;
        ReduceOp op = ReduceOp::sum;

        bool has_root() const noexcept
        {
            return type == CollectiveType::bcast || type == CollectiveType::reduce || type == CollectiveType::gather;
        }
        bool has_op() const noexcept { return type == CollectiveType::reduce || type == CollectiveType::allreduce; }

        friend bool operator==(const CollectiveKind&, const CollectiveKind&) = default;
    };

    enum class OpType
    {
        comm_create, // collective over the parent communicator
        collective,  // blocking collective
        icollective, // non-blocking initiation, returns a request
        test,
        wait,
        waitall,
        waitany,
        send,
        recv,
        compute,
        mark, // checkpoint trigger point; a no-op unless a run arms it
    };

    std::string_view to_string(OpType t) noexcept;
    std::string_view to_string(CollectiveType t) noexcept;
    std::string_view to_string(ReduceOp op) noexcept;
    OpType op_type_from_string(std::string_view s);
    CollectiveType collective_type_from_string(std::string_view s);
    ReduceOp reduce_op_from_string(std::string_view s);

    struct Op
    {
        OpType type = OpType::compute;
        CommId comm = kWorldComm; // target communicator; for comm_create, the new communicator
        CollectiveKind kind{};
        std::optional<Payload> data; // literal input; comm_create: member subset as parent-local ranks
        int peer = -1;               // local rank in `comm` for send/recv
        int tag = 0;
        std::vector<RequestId> requests; // icollective: exactly one; waits: one or more
        int ticks = 0;

        bool is_blocking_collective() const noexcept
        {
            return type == OpType::collective || type == OpType::comm_create;
        }
        bool is_completion() const noexcept
        {
            return type == OpType::test || type == OpType::wait || type == OpType::waitall || type == OpType::waitany;
        }
        bool is_p2p() const noexcept { return type == OpType::send || type == OpType::recv; }

        friend bool operator==(const Op&, const Op&) = default;
    };

    /// Declared communicator. `members` are world ranks in parent order,
    /// so local rank i is members[i].
    struct CommDecl
    {
        CommId id = kWorldComm;
        CommId parent = kWorldComm;
        std::vector<WorldRank> members;

        int local_rank_of(WorldRank r) const noexcept;
        friend bool operator==(const CommDecl&, const CommDecl&) = default;
    };

    struct ScenarioProgram
    {
        std::string name = "unnamed";
        int world_size = 0;
        std::vector<CommDecl> comms; // id 0 (WORLD) is implicit and never listed
        std::vector<std::vector<Op>> programs;

        /// WORLD included. Throws invalid_configuration for unknown ids.
        CommDecl comm(CommId id) const;
        bool has_comm(CommId id) const noexcept;
        bool has_nonblocking() const noexcept;
        std::size_t total_ops() const noexcept;

        /// Structural checks: declarations precede use, members are valid,
        /// every rank uses a communicator only after creating it, roots and
        /// peers are in range, request ids are unique per rank and referenced
        /// only after initiation. Throws invalid_configuration.
        void validate() const;

        friend bool operator==(const ScenarioProgram&, const ScenarioProgram&) = default;
    };

    /// Builds an empty program set with WORLD over n ranks.
    ScenarioProgram make_scenario(std::string name, int world_size);
} // namespace ccsim
