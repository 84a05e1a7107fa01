#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ccsim
{
    using WorldRank = int;
    using CommId = int;
    using RequestId = int;
    using Value = std::int64_t;
    using Payload = std::vector<Value>;

    inline constexpr CommId kWorldComm = 0;

    enum class ErrorKind
    {
        invalid_configuration,
        collective_mismatch,
        deadlock,
        stuck_p2p,
        protocol_violation,
        internal_invariant,
        unsupported_operation,
        load_error,
    };

    std::string_view to_string(ErrorKind kind) noexcept;

    class SimError : public std::runtime_error
    {
    public:
        SimError(ErrorKind kind, const std::string& what)
            : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
        {
        }

        ErrorKind kind() const noexcept { return kind_; }

    private:
        ErrorKind kind_;
    };

    [[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
    {
        throw SimError(kind, what);
    }

    /// 64-bit finalizer used for checksums and state digests (splitmix64).
    inline constexpr std::uint64_t mix64(std::uint64_t x) noexcept
    {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    inline constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) noexcept
    {
        return mix64(seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
    }

    std::uint64_t hash_payload(const Payload& p) noexcept;
} // namespace ccsim
