#pragma once

#include "ccsim/clock/group_key.hpp"

#include <cstdint>
#include <map>
#include <optional>

#include "json.hpp"

namespace ccsim
{
    /// Per-rank SEQ[ggid] counters. An absent key reads as zero.
    class CollectiveClock
    {
    public:
        /// Registers a group seen at communicator creation (SEQ stays 0).
        void observe(const GroupKey& g) { seq_.try_emplace(g, 0); }

        /// Adds exactly one to SEQ[g] and returns the new value.
        std::uint64_t increment(const GroupKey& g) { return ++seq_[g]; }

        std::uint64_t seq(const GroupKey& g) const;
        const std::map<GroupKey, std::uint64_t>& entries() const noexcept { return seq_; }

        /// Snapshot restore only. Rejects lowering an existing counter.
        void restore(const GroupKey& g, std::uint64_t value);

        friend bool operator==(const CollectiveClock&, const CollectiveClock&) = default;

    private:
        std::map<GroupKey, std::uint64_t> seq_;
    };

    /// Per-rank TARGET[ggid] values; meaningful only while a checkpoint is pending.
    class TargetTable
    {
    public:
        std::optional<std::uint64_t> get(const GroupKey& g) const;
        std::uint64_t value_or_zero(const GroupKey& g) const { return get(g).value_or(0); }

        /// Installs the coordinator's initial value.
        void set(const GroupKey& g, std::uint64_t v) { target_[g] = v; }

        /// TARGET[g] := max(TARGET[g], v). Returns true when the value grew.
        bool raise(const GroupKey& g, std::uint64_t v);

        void clear() noexcept { target_.clear(); }
        bool empty() const noexcept { return target_.empty(); }
        const std::map<GroupKey, std::uint64_t>& entries() const noexcept { return target_; }

        friend bool operator==(const TargetTable&, const TargetTable&) = default;

    private:
        std::map<GroupKey, std::uint64_t> target_;
    };

    /// True iff SEQ[g] == TARGET[g] for every targeted group g that contains
    /// `self`. Groups `self` does not belong to are ignored. Observing
    /// SEQ[g] > TARGET[g] throws internal_invariant: the protocol raises the
    /// local target whenever it increments past it.
    bool reached_all_targets(const CollectiveClock& clock, const TargetTable& targets, WorldRank self);

    nlohmann::json clock_to_json(const CollectiveClock& clock);
    CollectiveClock clock_from_json(const nlohmann::json& j);
    nlohmann::json targets_to_json(const std::map<GroupKey, std::uint64_t>& targets);
    std::map<GroupKey, std::uint64_t> targets_from_json(const nlohmann::json& j);
} // namespace ccsim
