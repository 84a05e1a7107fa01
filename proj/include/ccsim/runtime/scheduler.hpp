#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace ccsim
{
    enum class SchedulerMode
    {
        random,           // seeded uniform choice among enabled actors
        fixed_trace,      // replays a given actor sequence, then lowest enabled actor
        exhaustive_small, // driven by the explorer, never asked to choose
    };

    std::string_view to_string(SchedulerMode m) noexcept;
    SchedulerMode scheduler_mode_from_string(std::string_view s);

    /// Actor id of the checkpoint coordinator; ranks use their world rank.
    inline constexpr int kCoordinatorActor = -1;

    /// Picks the next actor. Identical (mode, seed, trace) and identical
    /// enabled sets produce identical choices on every platform: the draw is
    /// a raw mt19937_64 output reduced modulo the number of candidates.
    class Scheduler
    {
    public:
        explicit Scheduler(std::uint64_t seed = 0, SchedulerMode mode = SchedulerMode::random,
                           std::vector<int> fixed = {});

        /// `enabled` is sorted ascending and non-empty.
        int choose(std::span<const int> enabled);

        SchedulerMode mode() const noexcept { return mode_; }
        std::uint64_t seed() const noexcept { return seed_; }

    private:
        std::uint64_t seed_;
        SchedulerMode mode_;
        std::mt19937_64 rng_;
        std::vector<int> fixed_;
        std::size_t cursor_ = 0;
    };
} // namespace ccsim
