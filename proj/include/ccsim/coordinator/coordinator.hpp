#pragma once

#include "ccsim/clock/group_key.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace ccsim
{
    /// Reported SEQ values for one checkpoint round, keyed (ggid, rank).
    class KeyValueStore
    {
    public:
        /// Stores one rank's full report. A second report from the same rank
        /// in the same round throws protocol_violation.
        void put_report(WorldRank rank, const std::map<GroupKey, std::uint64_t>& seqs);

        bool has_report(WorldRank rank) const { return reported_.count(rank) != 0; }
        std::size_t report_count() const noexcept { return reported_.size(); }
        std::optional<std::uint64_t> get(const GroupKey& g, WorldRank rank) const;
        const std::map<std::pair<GroupKey, WorldRank>, std::uint64_t>& entries() const noexcept { return entries_; }

        friend bool operator==(const KeyValueStore&, const KeyValueStore&) = default;

    private:
        std::map<std::pair<GroupKey, WorldRank>, std::uint64_t> entries_;
        std::set<WorldRank> reported_;
    };

    /// TARGET[g] = max over ranks of reported SEQ[g]; a rank without an entry
    /// for g contributes 0. Every rank in [0, world_size) must have reported.
    std::map<GroupKey, std::uint64_t> compute_targets(const KeyValueStore& store, int world_size);

    enum class RankStatus
    {
        running,
        reached,
    };

    /// Termination detection for the target-update cascade. Ranks report
    /// status transitions with their cumulative update send/receive counters;
    /// the round is quiescent once every rank is reached and the counters
    /// balance (no update in flight).
    class QuiescenceLedger
    {
    public:
        QuiescenceLedger() = default;
        explicit QuiescenceLedger(int world_size);

        void report(WorldRank rank, RankStatus status, std::uint64_t sent, std::uint64_t received);

        RankStatus status(WorldRank rank) const { return status_.at(static_cast<std::size_t>(rank)); }
        std::uint64_t sent(WorldRank rank) const { return sent_.at(static_cast<std::size_t>(rank)); }
        std::uint64_t received(WorldRank rank) const { return received_.at(static_cast<std::size_t>(rank)); }
        std::size_t size() const noexcept { return status_.size(); }
        bool all_reached() const noexcept;
        std::uint64_t total_sent() const noexcept;
        std::uint64_t total_received() const noexcept;

        /// Throws protocol_violation when more updates were received than sent.
        bool quiescent() const;

        friend bool operator==(const QuiescenceLedger&, const QuiescenceLedger&) = default;

    private:
        std::vector<RankStatus> status_;
        std::vector<std::uint64_t> sent_;
        std::vector<std::uint64_t> received_;
    };

    struct CheckpointRound
    {
        std::uint64_t id = 0;
        std::uint64_t requested_step = 0;
        KeyValueStore store;
        std::map<GroupKey, std::uint64_t> initial_targets;
        QuiescenceLedger ledger;
        bool declared = false;
        std::uint64_t safe_step = 0;
        std::map<GroupKey, std::uint64_t> final_targets;
        std::uint64_t collectives_during_round = 0;
        std::uint64_t updates_during_round = 0;

        friend bool operator==(const CheckpointRound&, const CheckpointRound&) = default;
    };

    /// Round bookkeeping; at most one round is active at a time.
    class Coordinator
    {
    public:
        /// Opens a round. Throws invalid_configuration while another round is active.
        CheckpointRound& open_round(std::uint64_t step, int world_size);
        void close_round();

        bool active() const noexcept { return active_.has_value(); }
        CheckpointRound& round();
        const CheckpointRound& round() const;
        const std::vector<CheckpointRound>& history() const noexcept { return history_; }
        std::uint64_t rounds_opened() const noexcept { return opened_; }

        friend bool operator==(const Coordinator&, const Coordinator&) = default;

    private:
        std::uint64_t opened_ = 0;
        std::optional<CheckpointRound> active_;
        std::vector<CheckpointRound> history_;
    };
} // namespace ccsim
