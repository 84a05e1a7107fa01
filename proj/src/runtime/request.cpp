#include "ccsim/runtime/request.hpp"

#include <string>

namespace ccsim
{
    std::string_view to_string(RequestState s) noexcept
    {
        switch (s)
        {
        case RequestState::pending: return "pending";
        case RequestState::globally_complete: return "globally_complete";
        case RequestState::consumed: return "consumed";
        }
        return "?";
    }

    RequestState request_state_from_string(std::string_view s)
    {
        if (s == "pending")
            return RequestState::pending;
        if (s == "globally_complete")
            return RequestState::globally_complete;
        if (s == "consumed")
            return RequestState::consumed;
        fail(ErrorKind::load_error, "unknown request state '" + std::string(s) + "'");
    }
} // namespace ccsim
