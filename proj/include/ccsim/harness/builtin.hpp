#pragma once

#include "ccsim/runtime/scenario.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace ccsim
{
    /// Named scenarios shipped with the tool.
    ///
    /// "chain7": seven ranks; groups {1,2}, {2,3}, {3,4,5}, {5,6} are created
    /// over WORLD and driven so that, when every rank has stopped at its mark,
    /// the per-group maxima are 5, 7, 2 and 3 while rank 2 waits inside the
    /// seventh {2,3} collective. Checkpointing there (placement "marks")
    /// makes rank 3 run {3,4,5} a third time and rank 5 run {5,6} a fourth.
    ///
    /// "late-bcast": three ranks; rank 0 enters a broadcast while the
    /// others are still at their marks, so a checkpoint requested there must
    /// wait for the broadcast to finish everywhere.
    std::vector<std::string> builtin_names();
    bool is_builtin(std::string_view name);
    ScenarioProgram builtin_scenario(std::string_view name);
} // namespace ccsim
