#pragma once

#include "ccsim/runtime/types.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

namespace ccsim
{
    enum class EventType
    {
        coll_enter,      // blocking collective (or comm_create) entered the real call
        coll_return,     // ... and returned
        icoll_init,      // non-blocking collective initiated
        icoll_complete,  // instance globally complete (rank = last initiator)
        req_test,        // test call; detail.flag
        req_complete,    // wait/waitall/waitany returned
        wait_block,      // completion call blocked on a pending request
        p2p_post,        // unmatched post (rank now blocked)
        p2p_match,       // send/recv pair matched; rank = poster that completed the match
        compute,
        mark,
        finish,          // program end
        park,            // quiescence status -> reached
        resume,          // quiescence status -> running
        update_send,     // TargetUpdateMsg sent on the internal channel
        update_recv,
        commit_finish,   // left a wrapper after parking
        barrier_enter,   // two-phase commit trivial barrier entered
        barrier_complete,
        barrier_abort,
        barrier_reenter,
        ckpt_request,
        safe_state,
        drain,
        snapshot,
        release,
    };

    std::string_view to_string(EventType t) noexcept;
    EventType event_type_from_string(std::string_view s);

    /// Coordinator events carry rank -1.
    struct TraceEvent
    {
        std::uint64_t step = 0;
        WorldRank rank = -1;
        EventType type = EventType::compute;
        nlohmann::json detail = nlohmann::json::object();

        nlohmann::json to_json() const;
        static TraceEvent from_json(const nlohmann::json& j);
    };

    /// Append-only event log. Shares its prefix between copies, so copying a
    /// simulation state (exhaustive exploration) does not copy the history.
    class RunTrace
    {
    public:
        RunTrace() = default;
        RunTrace(const RunTrace&) = default;
        RunTrace(RunTrace&&) noexcept = default;
        RunTrace& operator=(const RunTrace&) = default;
        RunTrace& operator=(RunTrace&&) noexcept = default;
        ~RunTrace();

        void append(TraceEvent e);
        std::size_t size() const noexcept { return size_; }
        bool empty() const noexcept { return size_ == 0; }

        /// Events in scheduler order.
        std::vector<TraceEvent> events() const;
        static RunTrace from_events(const std::vector<TraceEvent>& events);

        /// One compact JSON object per line: {"step","rank","event","detail"}.
        std::string to_jsonl() const;
        static RunTrace parse_jsonl(const std::string& text);

    private:
        struct Node
        {
            TraceEvent event;
            std::shared_ptr<Node> prev;
        };
        std::shared_ptr<Node> head_;
        std::size_t size_ = 0;
    };
} // namespace ccsim
