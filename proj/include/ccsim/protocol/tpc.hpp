#pragma once

#include "ccsim/runtime/scenario.hpp"

#include <cstdint>
#include <vector>

namespace ccsim
{
    /// A trivial barrier abandoned at checkpoint time; the rank re-enters it on restart.
    struct AbortRecord
    {
        CommId comm = kWorldComm;
        std::uint64_t index = 0;

        friend bool operator==(const AbortRecord&, const AbortRecord&) = default;
    };

    struct TpcState
    {
        bool ckpt_pending = false;
        bool in_trivial_barrier = false;
        std::vector<AbortRecord> aborted_barrier_log;

        friend bool operator==(const TpcState&, const TpcState&) = default;
    };

    enum class TpcDecision
    {
        complete_then_checkpoint,
        abort_and_checkpoint,
    };

    /// Per-communicator decision for a pending checkpoint: if every member
    /// has entered the trivial barrier, the guarded collective runs to
    /// completion first; otherwise the barrier is abandoned.
    TpcDecision tpc_safe_state_decision(const std::vector<bool>& entered_barrier);

    /// Two-phase commit wraps blocking collectives only.
    void tpc_require_supported(const Op& op);
    void tpc_require_supported(const ScenarioProgram& s);
} // namespace ccsim
