#pragma once

#include "ccsim/runtime/scenario.hpp"

#include <cstdint>

namespace ccsim
{
    struct WorkloadParams
    {
        int ranks = 4;                  // 1..64
        int groups = 3;                 // extra communicators, 0..32
        int ops = 120;                  // upper bound on total operations across ranks
        int max_ops_per_rank = 0;       // 0: no per-rank bound
        double nonblocking_ratio = 0.2; // share of steps that initiate a non-blocking collective
        double p2p_ratio = 0.1;         // share of steps that open a point-to-point segment
        double compute_ratio = 0.1;
        int max_retries = 16;

        /// Throws invalid_configuration when a field is out of range.
        void validate() const;
    };

    /// Generates a legal scenario. Operations are laid out along one global
    /// order that every rank follows, so per-group call counts match and no
    /// cycle of blocking calls exists. Point-to-point pairs only appear in
    /// segments bracketed by two WORLD collectives with no other collective
    /// in between, and every request is waited on before the end. The same
    /// (seed, params) always yields the same scenario.
    ScenarioProgram generate_workload(std::uint64_t seed, const WorkloadParams& params);
} // namespace ccsim
