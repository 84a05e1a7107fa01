#pragma once

#include "ccsim/runtime/types.hpp"

#include <compare>
#include <deque>
#include <map>
#include <optional>

namespace ccsim
{
    /// Matching key: messages pair up FIFO per (src, dst, tag, comm).
    struct P2pKey
    {
        WorldRank src = 0;
        WorldRank dst = 0;
        int tag = 0;
        CommId comm = kWorldComm;

        friend bool operator==(const P2pKey&, const P2pKey&) = default;
        friend auto operator<=>(const P2pKey&, const P2pKey&) = default;
    };

    /// Rendezvous point-to-point matching: a send completes only together
    /// with its matching receive, so an unmatched post never carries data
    /// across ranks.
    class P2pEngine
    {
    public:
        struct Match
        {
            WorldRank waiting_rank; // the rank that had posted first and is now released
            Payload data;           // what the receiver gets
        };

        /// Posts a send. Returns the match when a receive was already waiting.
        std::optional<Match> post_send(const P2pKey& key, Payload data);
        /// Posts a receive. Returns the match when a send was already waiting.
        std::optional<Match> post_recv(const P2pKey& key);

        bool empty() const noexcept { return sends_.empty() && recvs_.empty(); }
        std::size_t pending() const noexcept;
        void clear() noexcept
        {
            sends_.clear();
            recvs_.clear();
        }

        friend bool operator==(const P2pEngine&, const P2pEngine&) = default;

    private:
        std::map<P2pKey, std::deque<Payload>> sends_;
        std::map<P2pKey, std::size_t> recvs_;
    };
} // namespace ccsim
