#include "ccsim/harness/metrics.hpp"

#include <map>
#include <sstream>

namespace ccsim
{
    MetricsReport MetricsReport::from(const Simulation& sim, std::string status)
    {
        MetricsReport m;
        m.algorithm = std::string(to_string(sim.config().algorithm));
        m.scenario = sim.scenario().name;
        m.seed = sim.config().seed;
        m.placement = sim.config().placement.describe();
        m.status = std::move(status);

        const auto& c = sim.counters();
        m.app_messages = c.app_messages();
        m.p2p_messages = c.p2p_messages;
        m.collective_messages = c.collective_messages;
        m.protocol_messages = c.protocol_messages();
        m.target_updates = c.target_updates;
        m.stale_updates = c.stale_updates;
        m.barrier_messages = c.barrier_messages;
        m.wrapper_invocations = c.wrapper_invocations;
        m.blocking_collectives = c.blocking_collectives;
        m.total_steps = sim.step() - sim.first_step();
        m.checksum = sim.global_checksum();

        const auto& history = sim.coordinator().history();
        m.rounds = history.size();
        for (const auto& r : history)
        {
            m.collectives_during_round += r.collectives_during_round;
            if (r.declared)
                m.steps_to_safe_state += r.safe_step - r.requested_step;
        }

        std::map<GroupKey, GroupMetric> groups;
        for (const auto& [id, info] : sim.comm_table())
        {
            auto& g = groups[info.group];
            g.group = info.group;
            for (WorldRank r : info.group.members())
                g.max_seq = std::max(g.max_seq, sim.rank(r).cc.clock.seq(info.group));
        }
        if (!history.empty())
            for (const auto& [g, t] : history.back().final_targets)
                if (groups.count(g))
                    groups[g].target = t;
        if (sim.config().algorithm == Algorithm::cc)
            for (auto& [g, gm] : groups)
                m.groups.push_back(gm);
        return m;
    }

    nlohmann::json MetricsReport::to_json() const
    {
        nlohmann::json groups_json = nlohmann::json::array();
        for (const auto& g : groups)
        {
            nlohmann::json j = {{"ggid", g.group}, {"hash", g.group.display_hash()}, {"max_seq", g.max_seq}};
            j["target"] = g.target ? nlohmann::json(*g.target) : nlohmann::json(nullptr);
            groups_json.push_back(std::move(j));
        }
        return {{"algorithm", algorithm},
                {"scenario", scenario},
                {"seed", seed},
                {"placement", placement},
                {"status", status},
                {"app_messages", app_messages},
                {"p2p_messages", p2p_messages},
                {"collective_messages", collective_messages},
                {"protocol_messages", protocol_messages},
                {"target_updates", target_updates},
                {"stale_updates", stale_updates},
                {"barrier_messages", barrier_messages},
                {"wrapper_invocations", wrapper_invocations},
                {"blocking_collectives", blocking_collectives},
                {"rounds", rounds},
                {"collectives_during_round", collectives_during_round},
                {"steps_to_safe_state", steps_to_safe_state},
                {"total_steps", total_steps},
                {"checksum", checksum},
                {"groups", groups_json}};
    }

    std::string MetricsReport::csv_header()
    {
        return "algorithm,scenario,seed,placement,status,app_messages,p2p_messages,collective_messages,"
               "protocol_messages,target_updates,stale_updates,barrier_messages,wrapper_invocations,"
               "blocking_collectives,rounds,collectives_during_round,steps_to_safe_state,total_steps,checksum,groups";
    }

    std::string MetricsReport::csv_row() const
    {
        std::ostringstream os;
        os << algorithm << ',' << scenario << ',' << seed << ',' << placement << ',' << status << ',' << app_messages
           << ',' << p2p_messages << ',' << collective_messages << ',' << protocol_messages << ',' << target_updates
           << ',' << stale_updates << ',' << barrier_messages << ',' << wrapper_invocations << ','
           << blocking_collectives << ',' << rounds << ',' << collectives_during_round << ',' << steps_to_safe_state
           << ',' << total_steps << ',' << checksum << ',';
        // groups as "1.2=5/5 3.4.5=3/-" so the column needs no quoting
        for (std::size_t i = 0; i < groups.size(); ++i)
        {
            if (i)
                os << ' ';
            const auto& mem = groups[i].group.members();
            for (std::size_t k = 0; k < mem.size(); ++k)
                os << (k ? "." : "") << mem[k];
            os << '=' << groups[i].max_seq << '/';
            if (groups[i].target)
                os << *groups[i].target;
            else
                os << '-';
        }
        return os.str();
    }
} // namespace ccsim
