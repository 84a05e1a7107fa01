#pragma once

#include "ccsim/runtime/simulation.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ccsim
{
    /// Returns a failure description, or nothing when the state is fine.
    using StateCheck = std::function<std::optional<std::string>(const Simulation&)>;

    struct ExploreOptions
    {
        std::uint64_t max_states = 2'000'000;
        std::size_t max_failures = 16; // stop collecting after this many
        StateCheck on_state;           // every newly visited state
        StateCheck on_terminal;        // every terminal state (after finish() succeeded)
    };

    struct ExploreResult
    {
        std::uint64_t states = 0;
        std::uint64_t transitions = 0;
        std::uint64_t terminals = 0;
        std::uint64_t snapshots = 0; // terminals whose run declared a safe state
        bool truncated = false;      // hit max_states
        std::vector<std::string> failures;

        bool ok() const noexcept { return failures.empty() && !truncated; }
    };

    /// Visits every state reachable under every scheduler choice (including
    /// the coordinator's, so with CheckpointPlacement::explore every
    /// checkpoint placement is covered). States are deduplicated by their
    /// 128-bit digest. Simulation errors on a branch are recorded as failures
    /// together with the choice sequence that produced them.
    ExploreResult explore(const Simulation& initial, const ExploreOptions& options);
} // namespace ccsim
