#include "ccsim/runtime/trace.hpp"

#include <sstream>

namespace ccsim
{
    namespace
    {
        constexpr std::pair<std::string_view, EventType> kEventNames[] = {
            {"coll_enter", EventType::coll_enter},
            {"coll_return", EventType::coll_return},
            {"icoll_init", EventType::icoll_init},
            {"icoll_complete", EventType::icoll_complete},
            {"req_test", EventType::req_test},
            {"req_complete", EventType::req_complete},
            {"wait_block", EventType::wait_block},
            {"p2p_post", EventType::p2p_post},
            {"p2p_match", EventType::p2p_match},
            {"compute", EventType::compute},
            {"mark", EventType::mark},
            {"finish", EventType::finish},
            {"park", EventType::park},
            {"resume", EventType::resume},
            {"update_send", EventType::update_send},
            {"update_recv", EventType::update_recv},
            {"commit_finish", EventType::commit_finish},
            {"barrier_enter", EventType::barrier_enter},
            {"barrier_complete", EventType::barrier_complete},
            {"barrier_abort", EventType::barrier_abort},
            {"barrier_reenter", EventType::barrier_reenter},
            {"ckpt_request", EventType::ckpt_request},
            {"safe_state", EventType::safe_state},
            {"drain", EventType::drain},
            {"snapshot", EventType::snapshot},
            {"release", EventType::release},
        };
    } // namespace

    std::string_view to_string(EventType t) noexcept
    {
        for (const auto& [name, value] : kEventNames)
            if (value == t)
                return name;
        return "?";
    }

    EventType event_type_from_string(std::string_view s)
    {
        for (const auto& [name, value] : kEventNames)
            if (name == s)
                return value;
        fail(ErrorKind::load_error, "unknown trace event '" + std::string(s) + "'");
    }

    nlohmann::json TraceEvent::to_json() const
    {
        return {{"step", step}, {"rank", rank}, {"event", to_string(type)}, {"detail", detail}};
    }

    TraceEvent TraceEvent::from_json(const nlohmann::json& j)
    {
        TraceEvent e;
        e.step = j.at("step").get<std::uint64_t>();
        e.rank = j.at("rank").get<WorldRank>();
        e.type = event_type_from_string(j.at("event").get<std::string>());
        e.detail = j.value("detail", nlohmann::json::object());
        return e;
    }

    RunTrace::~RunTrace()
    {
        // Unlink iteratively; the default recursive release overflows the stack on long runs.
        auto node = std::move(head_);
        while (node && node.use_count() == 1)
            node = std::move(node->prev);
    }

    void RunTrace::append(TraceEvent e)
    {
        head_ = std::make_shared<Node>(Node{std::move(e), head_});
        ++size_;
    }

    std::vector<TraceEvent> RunTrace::events() const
    {
        std::vector<TraceEvent> out(size_);
        std::size_t i = size_;
        for (const Node* n = head_.get(); n; n = n->prev.get())
            out[--i] = n->event;
        return out;
    }

    RunTrace RunTrace::from_events(const std::vector<TraceEvent>& events)
    {
        RunTrace t;
        for (const auto& e : events)
            t.append(e);
        return t;
    }

    std::string RunTrace::to_jsonl() const
    {
        std::string out;
        for (const auto& e : events())
        {
            out += e.to_json().dump();
            out += '\n';
        }
        return out;
    }

    RunTrace RunTrace::parse_jsonl(const std::string& text)
    {
        RunTrace t;
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line))
        {
            if (line.find_first_not_of(" \t\r") == std::string::npos)
                continue;
            try
            {
                t.append(TraceEvent::from_json(nlohmann::json::parse(line)));
            }
            catch (const nlohmann::json::exception& e)
            {
                fail(ErrorKind::load_error, std::string("trace: ") + e.what());
            }
        }
        return t;
    }
} // namespace ccsim
