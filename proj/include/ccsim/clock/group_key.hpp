#pragma once

#include "ccsim/runtime/types.hpp"

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace ccsim
{
    /// Global group identity (ggid) of a communicator's underlying group.
    ///
    /// Identity is the canonical sorted set of world ranks, so communicators
    /// over the same set of processes (MPI_SIMILAR) share one key no matter
    /// how they were created or in which order members were listed. The
    /// FNV-1a digest is carried for display and metrics only; comparisons
    /// never look at it.
    class GroupKey
    {
    public:
        GroupKey() = default;

        /// Throws invalid_configuration on an empty list, a negative rank, or duplicates.
        explicit GroupKey(std::vector<WorldRank> members);

        const std::vector<WorldRank>& members() const noexcept { return members_; }
        std::size_t size() const noexcept { return members_.size(); }
        bool contains(WorldRank r) const noexcept;

        std::uint64_t display_hash() const noexcept;
        std::string to_string() const;

        friend bool operator==(const GroupKey&, const GroupKey&) = default;
        friend std::strong_ordering operator<=>(const GroupKey& a, const GroupKey& b)
        {
            return a.members_ <=> b.members_;
        }

    private:
        std::vector<WorldRank> members_;
    };

    /// FNV-1a over the little-endian bytes of each rank in the sorted list.
    std::uint64_t fnv1a_ranks(const std::vector<WorldRank>& sorted_members) noexcept;

    void to_json(nlohmann::json& j, const GroupKey& g);
    void from_json(const nlohmann::json& j, GroupKey& g);
} // namespace ccsim
