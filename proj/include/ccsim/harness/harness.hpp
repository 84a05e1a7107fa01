#pragma once

#include "ccsim/harness/metrics.hpp"
#include "ccsim/runtime/explorer.hpp"
#include "ccsim/runtime/simulation.hpp"
#include "ccsim/verifier/verifier.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace ccsim
{
    /// Where to checkpoint. `random` is resolved per run: the scenario is
    /// first run without a checkpoint to learn its length T, then a step in
    /// [0, T] is drawn from `random_seed`.
    struct PlacementSpec
    {
        CheckpointPlacement placement;
        std::optional<std::uint64_t> random_seed;

        std::string describe() const;
        static PlacementSpec parse(std::string_view s); // placement syntax plus "random:SEED"
    };

    struct RunOptions
    {
        Algorithm algorithm = Algorithm::cc;
        std::uint64_t seed = 0;
        PlacementSpec placement;
        bool stop_after_snapshot = false;
        CcOptions cc;
    };

    struct RunResult
    {
        MetricsReport metrics;
        std::vector<Verdict> verdicts;
        std::optional<SnapshotImage> snapshot;
        RunTrace trace;
        std::optional<ErrorKind> error;

        bool passed() const noexcept;
    };

    /// Picks the checkpoint step for a random placement.
    CheckpointPlacement resolve_placement(const ScenarioProgram& scenario, Algorithm algorithm, std::uint64_t seed,
                                          const PlacementSpec& spec);

    /// Runs one scenario end to end with every applicable verifier check.
    RunResult run_scenario(const ScenarioProgram& scenario, const RunOptions& options);

    /// Continues a run from a snapshot to the end of the program.
    RunResult restart_from(const SnapshotImage& image, std::uint64_t seed);

    struct ExhaustiveReport
    {
        ExploreResult result;
        Verdict verdict;
    };

    /// Explores every interleaving (and, under a protocol, every checkpoint
    /// placement), checking step invariants in each state and, at each
    /// terminal, that the round reached a safe state, the snapshot is safe,
    /// the HB graph is acyclic, and the cascade bound holds.
    ExhaustiveReport run_exhaustive(const ScenarioProgram& scenario, Algorithm algorithm, std::uint64_t max_states);

    struct CompareTable
    {
        std::vector<MetricsReport> rows;

        /// Per-algorithm totals: runs, failures, message sums.
        nlohmann::json aggregate() const;
        nlohmann::json to_json() const;
        std::string to_csv() const;
    };

    CompareTable compare(const std::vector<ScenarioProgram>& scenarios, const std::vector<std::uint64_t>& seeds,
                         const std::vector<PlacementSpec>& placements, const std::vector<Algorithm>& algorithms);

    /// Resolves a built-in name or a scenario file path.
    ScenarioProgram load_scenario(const std::string& name_or_path);
} // namespace ccsim
