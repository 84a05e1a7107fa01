#pragma once

#include "ccsim/runtime/scenario.hpp"

#include <cstdint>

namespace ccsim
{
    // Simulated inter-rank message costs, charged once per collective
    // instance when it completes. Point-to-point pairs cost one message and
    // protocol target updates one message each.
    //
    //   barrier      n * ceil(log2 n)   (dissemination: ceil(log2 n) rounds, n messages per round)
    //   bcast        n - 1
    //   reduce       n - 1
    //   gather       n - 1
    //   allreduce    2 (n - 1)
    //   alltoall     n (n - 1)
    //   comm_create  2 (n - 1)          (over the parent communicator)

    constexpr std::uint64_t ceil_log2(std::uint64_t n) noexcept
    {
        std::uint64_t rounds = 0;
        std::uint64_t reach = 1;
        while (reach < n)
        {
            reach <<= 1;
            ++rounds;
        }
        return rounds;
    }

    constexpr std::uint64_t barrier_cost(std::uint64_t n) noexcept { return n * ceil_log2(n); }

    constexpr std::uint64_t collective_cost(CollectiveType t, std::uint64_t n) noexcept
    {
        if (n == 0)
            return 0;
        switch (t)
        {
        case CollectiveType::barrier: return barrier_cost(n);
        case CollectiveType::bcast:
        case CollectiveType::reduce:
        case CollectiveType::gather: return n - 1;
        case CollectiveType::allreduce: return 2 * (n - 1);
        case CollectiveType::alltoall: return n * (n - 1);
        }
        return 0;
    }

    constexpr std::uint64_t comm_create_cost(std::uint64_t parent_size) noexcept
    {
        return parent_size == 0 ? 0 : 2 * (parent_size - 1);
    }
} // namespace ccsim
