#include "ccsim/runtime/types.hpp"

namespace ccsim
{
    std::string_view to_string(ErrorKind kind) noexcept
    {
        switch (kind)
        {
        case ErrorKind::invalid_configuration: return "invalid-configuration";
        case ErrorKind::collective_mismatch: return "collective-mismatch";
        case ErrorKind::deadlock: return "deadlock";
        case ErrorKind::stuck_p2p: return "stuck-p2p";
        case ErrorKind::protocol_violation: return "protocol-violation";
        case ErrorKind::internal_invariant: return "internal-invariant";
        case ErrorKind::unsupported_operation: return "unsupported-operation";
        case ErrorKind::load_error: return "load-error";
        }
        return "unknown";
    }

    std::uint64_t hash_payload(const Payload& p) noexcept
    {
        std::uint64_t h = mix64(p.size());
        for (Value v : p)
            h = hash_combine(h, static_cast<std::uint64_t>(v));
        return h;
    }
} // namespace ccsim
