#include "ccsim/runtime/p2p.hpp"

namespace ccsim
{
    std::optional<P2pEngine::Match> P2pEngine::post_send(const P2pKey& key, Payload data)
    {
        auto it = recvs_.find(key);
        if (it != recvs_.end())
        {
            if (--it->second == 0)
                recvs_.erase(it);
            return Match{key.dst, std::move(data)};
        }
        sends_[key].push_back(std::move(data));
        return std::nullopt;
    }

    std::optional<P2pEngine::Match> P2pEngine::post_recv(const P2pKey& key)
    {
        auto it = sends_.find(key);
        if (it != sends_.end())
        {
            Payload data = std::move(it->second.front());
            it->second.pop_front();
            if (it->second.empty())
                sends_.erase(it);
            return Match{key.src, std::move(data)};
        }
        ++recvs_[key];
        return std::nullopt;
    }

    std::size_t P2pEngine::pending() const noexcept
    {
        std::size_t n = 0;
        for (const auto& [k, q] : sends_)
            n += q.size();
        for (const auto& [k, c] : recvs_)
            n += c;
        return n;
    }
} // namespace ccsim
