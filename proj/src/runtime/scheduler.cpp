#include "ccsim/runtime/scheduler.hpp"

#include "ccsim/runtime/types.hpp"

#include <algorithm>
#include <string>

namespace ccsim
{
    std::string_view to_string(SchedulerMode m) noexcept
    {
        switch (m)
        {
        case SchedulerMode::random: return "random";
        case SchedulerMode::fixed_trace: return "fixed-trace";
        case SchedulerMode::exhaustive_small: return "exhaustive-small";
        }
        return "?";
    }

    SchedulerMode scheduler_mode_from_string(std::string_view s)
    {
        if (s == "random")
            return SchedulerMode::random;
        if (s == "fixed-trace")
            return SchedulerMode::fixed_trace;
        if (s == "exhaustive-small")
            return SchedulerMode::exhaustive_small;
        fail(ErrorKind::invalid_configuration, "unknown scheduler mode '" + std::string(s) + "'");
    }

    Scheduler::Scheduler(std::uint64_t seed, SchedulerMode mode, std::vector<int> fixed)
        : seed_(seed), mode_(mode), rng_(seed), fixed_(std::move(fixed))
    {
    }

    int Scheduler::choose(std::span<const int> enabled)
    {
        if (enabled.empty())
            fail(ErrorKind::internal_invariant, "scheduler asked to choose among no actors");
        switch (mode_)
        {
        case SchedulerMode::random:
            if (enabled.size() == 1)
                return enabled.front();
            return enabled[static_cast<std::size_t>(rng_() % enabled.size())];
        case SchedulerMode::fixed_trace:
            if (cursor_ < fixed_.size())
            {
                const int want = fixed_[cursor_++];
                if (std::find(enabled.begin(), enabled.end(), want) == enabled.end())
                    fail(ErrorKind::invalid_configuration, "fixed trace entry " + std::to_string(cursor_ - 1) +
                                                               " names actor " + std::to_string(want) +
                                                               " which is not enabled");
                return want;
            }
            return enabled.front();
        case SchedulerMode::exhaustive_small:
            break;
        }
        fail(ErrorKind::internal_invariant, "exhaustive mode is driven by the explorer");
    }
} // namespace ccsim
