#pragma once

#include "ccsim/clock/collective_clock.hpp"
#include "ccsim/protocol/tpc.hpp"
#include "ccsim/runtime/request.hpp"
#include "ccsim/runtime/scenario.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace ccsim
{
    inline constexpr int kSnapshotFormatVersion = 1;

    /// One rank at the safe state. `pc` is the next operation to execute on
    /// restart: a rank parked after returning from a wrapped call resumes
    /// past it, a rank blocked in an unmatched point-to-point post re-posts.
    struct RankImage
    {
        WorldRank rank = 0;
        std::size_t pc = 0;
        Payload buffer;
        std::uint64_t digest = 0;
        std::uint64_t request_fold = 0;
        std::vector<CommId> comms;
        std::map<CommId, std::uint64_t> calls;
        CollectiveClock clock;
        std::vector<RequestId> incomplete_requests;
        std::vector<Request> requests;
        std::vector<AbortRecord> aborted_barrier_log;
        bool reposts_p2p = false;

        friend bool operator==(const RankImage&, const RankImage&) = default;
    };

    /// Whole-run image (all ranks in one document).
    struct SnapshotImage
    {
        int version = kSnapshotFormatVersion;
        std::string algorithm;
        std::uint64_t seed = 0;
        std::uint64_t step = 0;  // scheduler step of the snapshot event
        std::uint64_t round = 0;
        ScenarioProgram scenario;
        std::vector<CommDecl> communicators; // every communicator in the run, WORLD first
        std::map<GroupKey, std::uint64_t> targets;
        std::vector<RankImage> ranks;

        nlohmann::json to_json() const;
        /// Throws load_error on any structural problem.
        static SnapshotImage from_json(const nlohmann::json& j);

        std::string dump() const { return to_json().dump(); }
        static SnapshotImage parse(const std::string& text);
        void save(const std::string& path) const;
        static SnapshotImage load(const std::string& path);

        friend bool operator==(const SnapshotImage&, const SnapshotImage&) = default;
    };
} // namespace ccsim
