#include "ccsim/coordinator/coordinator.hpp"

#include <algorithm>

namespace ccsim
{
    void KeyValueStore::put_report(WorldRank rank, const std::map<GroupKey, std::uint64_t>& seqs)
    {
        if (!reported_.insert(rank).second)
            fail(ErrorKind::protocol_violation, "rank " + std::to_string(rank) + " reported twice in one round");
        for (const auto& [g, s] : seqs)
            entries_.emplace(std::make_pair(g, rank), s);
    }

    std::optional<std::uint64_t> KeyValueStore::get(const GroupKey& g, WorldRank rank) const
    {
        auto it = entries_.find({g, rank});
        if (it == entries_.end())
            return std::nullopt;
        return it->second;
    }

    std::map<GroupKey, std::uint64_t> compute_targets(const KeyValueStore& store, int world_size)
    {
        for (WorldRank r = 0; r < world_size; ++r)
            if (!store.has_report(r))
                fail(ErrorKind::protocol_violation,
                     "checkpoint round stalled: no SEQ report from rank " + std::to_string(r));
        std::map<GroupKey, std::uint64_t> targets;
        for (const auto& [key, seq] : store.entries())
        {
            auto& t = targets[key.first];
            t = std::max(t, seq);
        }
        return targets;
    }

    QuiescenceLedger::QuiescenceLedger(int world_size)
        : status_(static_cast<std::size_t>(world_size), RankStatus::running),
          sent_(static_cast<std::size_t>(world_size), 0), received_(static_cast<std::size_t>(world_size), 0)
    {
    }

    void QuiescenceLedger::report(WorldRank rank, RankStatus status, std::uint64_t sent, std::uint64_t received)
    {
        const auto i = static_cast<std::size_t>(rank);
        status_.at(i) = status;
        sent_[i] = sent;
        received_[i] = received;
    }

    bool QuiescenceLedger::all_reached() const noexcept
    {
        return std::all_of(status_.begin(), status_.end(), [](RankStatus s) { return s == RankStatus::reached; });
    }

    std::uint64_t QuiescenceLedger::total_sent() const noexcept
    {
        std::uint64_t n = 0;
        for (auto v : sent_)
            n += v;
        return n;
    }

    std::uint64_t QuiescenceLedger::total_received() const noexcept
    {
        std::uint64_t n = 0;
        for (auto v : received_)
            n += v;
        return n;
    }

    bool QuiescenceLedger::quiescent() const
    {
        const auto s = total_sent();
        const auto r = total_received();
        if (r > s)
            fail(ErrorKind::protocol_violation, "ledger inconsistency: " + std::to_string(r) +
                                                    " updates received but only " + std::to_string(s) + " sent");
        return all_reached() && s == r;
    }

    CheckpointRound& Coordinator::open_round(std::uint64_t step, int world_size)
    {
        if (active_)
            fail(ErrorKind::invalid_configuration,
                 "checkpoint requested while round " + std::to_string(active_->id) + " is still active");
        active_.emplace();
        active_->id = ++opened_;
        active_->requested_step = step;
        active_->ledger = QuiescenceLedger(world_size);
        return *active_;
    }

    void Coordinator::close_round()
    {
        if (!active_)
            fail(ErrorKind::internal_invariant, "no active checkpoint round to close");
        history_.push_back(std::move(*active_));
        active_.reset();
    }

    CheckpointRound& Coordinator::round()
    {
        if (!active_)
            fail(ErrorKind::internal_invariant, "no active checkpoint round");
        return *active_;
    }

    const CheckpointRound& Coordinator::round() const
    {
        if (!active_)
            fail(ErrorKind::internal_invariant, "no active checkpoint round");
        return *active_;
    }
} // namespace ccsim
