#pragma once

#include "ccsim/runtime/simulation.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace ccsim
{
    struct GroupMetric
    {
        GroupKey group;
        std::uint64_t max_seq = 0;
        std::optional<std::uint64_t> target; // final TARGET of the last round (cc)
    };

    struct MetricsReport
    {
        std::string algorithm;
        std::string scenario;
        std::uint64_t seed = 0;
        std::string placement = "none";
        std::string status = "completed"; // completed, stopped, or an error kind

        std::uint64_t app_messages = 0;
        std::uint64_t p2p_messages = 0;
        std::uint64_t collective_messages = 0;
        std::uint64_t protocol_messages = 0;
        std::uint64_t target_updates = 0;
        std::uint64_t stale_updates = 0;
        std::uint64_t barrier_messages = 0;
        std::uint64_t wrapper_invocations = 0;
        std::uint64_t blocking_collectives = 0;
        std::uint64_t rounds = 0;
        std::uint64_t collectives_during_round = 0;
        std::uint64_t steps_to_safe_state = 0;
        std::uint64_t total_steps = 0;
        std::uint64_t checksum = 0;
        std::vector<GroupMetric> groups;

        static MetricsReport from(const Simulation& sim, std::string status);

        nlohmann::json to_json() const;
        static std::string csv_header();
        std::string csv_row() const;
    };
} // namespace ccsim
