#pragma once

#include "ccsim/coordinator/snapshot.hpp"
#include "ccsim/runtime/simulation.hpp"
#include "ccsim/runtime/trace.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace ccsim
{
    struct Verdict
    {
        std::string check;
        std::string scenario;
        std::uint64_t seed = 0;
        bool pass = true;
        std::string detail;

        /// {"check","scenario","seed","pass","detail"}
        nlohmann::json to_json() const;
    };

    /// Blocking collective instances ordered by each rank's program order.
    /// Nodes are (communicator, call index) taken from coll_enter events.
    struct HbGraph
    {
        std::vector<std::pair<CommId, std::uint64_t>> nodes;
        std::vector<std::vector<std::size_t>> edges;

        static HbGraph from_trace(const std::vector<TraceEvent>& events);

        /// A cycle as a node list (first node repeated at the end), if any.
        std::optional<std::vector<std::size_t>> find_cycle() const;
    };

    Verdict check_hb_acyclic(const std::vector<TraceEvent>& events);

    /// Static check: every send has a matching receive (FIFO per
    /// src/dst/tag/comm), and for every communicator holding both endpoints
    /// the two sides have issued the same number of blocking collectives
    /// (comm_create counts on its parent) before the pair.
    Verdict check_crossing_legality(const ScenarioProgram& scenario);

    /// Checks a snapshot against the trace prefix that produced it:
    /// no rank inside a collective, every collective any member entered has
    /// been entered and left by all members, every initiated non-blocking
    /// collective is globally complete, and (for CC) SEQ = TARGET for every
    /// member group.
    Verdict check_safe_state(const SnapshotImage& snapshot, const std::vector<TraceEvent>& events);

    /// Uninterrupted run against checkpoint, JSON round-trip and restart with
    /// a different scheduler seed; per-rank application checksums must match.
    Verdict check_replay_equivalence(const ScenarioProgram& scenario, Algorithm algorithm, std::uint64_t seed,
                                     const CheckpointPlacement& placement);

    /// Online checks for one scheduler step under CC: SEQ never exceeds the
    /// rank's own TARGET during a round, the largest SEQ of each group is
    /// covered by a known or in-flight target, and (blocking-only scenarios)
    /// members' SEQ values differ by at most one.
    std::optional<std::string> check_step_invariants(const Simulation& sim);

    /// TargetUpdateMsg count of each finished round stays within
    /// collectives-during-round × (largest group size − 1).
    std::optional<std::string> check_cascade_bound(const Simulation& sim);
} // namespace ccsim
