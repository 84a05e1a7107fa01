#include "ccsim/protocol/tpc.hpp"

#include <algorithm>

namespace ccsim
{
    TpcDecision tpc_safe_state_decision(const std::vector<bool>& entered_barrier)
    {
        const bool all = !entered_barrier.empty() &&
                         std::all_of(entered_barrier.begin(), entered_barrier.end(), [](bool b) { return b; });
        return all ? TpcDecision::complete_then_checkpoint : TpcDecision::abort_and_checkpoint;
    }

    void tpc_require_supported(const Op& op)
    {
        if (op.type == OpType::icollective || op.is_completion())
            fail(ErrorKind::unsupported_operation,
                 "two-phase commit does not support non-blocking collective " + std::string(to_string(op.type)));
    }

    void tpc_require_supported(const ScenarioProgram& s)
    {
        for (const auto& prog : s.programs)
            for (const auto& op : prog)
                tpc_require_supported(op);
    }
} // namespace ccsim
