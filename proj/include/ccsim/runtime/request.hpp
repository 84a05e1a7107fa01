#pragma once

#include "ccsim/runtime/collective_engine.hpp"

#include <optional>
#include <string_view>

namespace ccsim
{
    enum class RequestState
    {
        pending,
        globally_complete,
        consumed, // behaves as the null request: tests true forever
    };

    std::string_view to_string(RequestState s) noexcept;
    RequestState request_state_from_string(std::string_view s);

    struct Request
    {
        RequestId id = -1;
        InstanceId instance;
        RequestState state = RequestState::pending;
        std::optional<Payload> payload; // filled at global completion
        bool drained = false;           // completion observed by a checkpoint drain

        bool completable() const noexcept { return state != RequestState::pending; }

        friend bool operator==(const Request&, const Request&) = default;
    };
} // namespace ccsim
