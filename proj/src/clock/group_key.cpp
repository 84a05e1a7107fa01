#include "ccsim/clock/group_key.hpp"

#include <algorithm>

namespace ccsim
{
    GroupKey::GroupKey(std::vector<WorldRank> members) : members_(std::move(members))
    {
        if (members_.empty())
            fail(ErrorKind::invalid_configuration, "group with no members");
        std::sort(members_.begin(), members_.end());
        if (members_.front() < 0)
            fail(ErrorKind::invalid_configuration, "negative world rank in group");
        if (std::adjacent_find(members_.begin(), members_.end()) != members_.end())
            fail(ErrorKind::invalid_configuration, "duplicate world rank in group");
    }

    bool GroupKey::contains(WorldRank r) const noexcept
    {
        return std::binary_search(members_.begin(), members_.end(), r);
    }

    std::uint64_t fnv1a_ranks(const std::vector<WorldRank>& sorted_members) noexcept
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (WorldRank r : sorted_members)
        {
            auto v = static_cast<std::uint32_t>(r);
            for (int i = 0; i < 4; ++i)
            {
                h ^= (v >> (8 * i)) & 0xffU;
                h *= 0x100000001b3ULL;
            }
        }
        return h;
    }

    std::uint64_t GroupKey::display_hash() const noexcept { return fnv1a_ranks(members_); }

    std::string GroupKey::to_string() const
    {
        std::string s = "{";
        for (std::size_t i = 0; i < members_.size(); ++i)
        {
            if (i)
                s += ',';
            s += std::to_string(members_[i]);
        }
        return s + "}";
    }

    void to_json(nlohmann::json& j, const GroupKey& g) { j = g.members(); }

    void from_json(const nlohmann::json& j, GroupKey& g)
    {
        g = GroupKey(j.get<std::vector<WorldRank>>());
    }
} // namespace ccsim
