#include "ccsim/verifier/verifier.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace ccsim
{
    namespace
    {
        using Node = std::pair<CommId, std::uint64_t>;

        std::string node_name(const Node& n)
        {
            return "comm " + std::to_string(n.first) + " #" + std::to_string(n.second);
        }

        Verdict make(std::string check, std::string scenario, std::uint64_t seed)
        {
            Verdict v;
            v.check = std::move(check);
            v.scenario = std::move(scenario);
            v.seed = seed;
            return v;
        }

        Verdict failed(Verdict v, std::string detail)
        {
            v.pass = false;
            v.detail = std::move(detail);
            return v;
        }

        Node node_of(const TraceEvent& e)
        {
            return {e.detail.at("comm").get<CommId>(), e.detail.at("index").get<std::uint64_t>()};
        }
    } // namespace

    nlohmann::json Verdict::to_json() const
    {
        return {{"check", check}, {"scenario", scenario}, {"seed", seed}, {"pass", pass}, {"detail", detail}};
    }

    HbGraph HbGraph::from_trace(const std::vector<TraceEvent>& events)
    {
        HbGraph g;
        std::map<Node, std::size_t> index;
        std::map<WorldRank, std::size_t> last;
        std::set<std::pair<std::size_t, std::size_t>> seen;
        for (const auto& e : events)
        {
            if (e.type != EventType::coll_enter)
                continue;
            const Node n = node_of(e);
            auto [it, inserted] = index.try_emplace(n, g.nodes.size());
            if (inserted)
            {
                g.nodes.push_back(n);
                g.edges.emplace_back();
            }
            auto prev = last.find(e.rank);
            if (prev != last.end() && prev->second != it->second && seen.insert({prev->second, it->second}).second)
                g.edges[prev->second].push_back(it->second);
            last[e.rank] = it->second;
        }
        return g;
    }

    std::optional<std::vector<std::size_t>> HbGraph::find_cycle() const
    {
        enum class Color
        {
            white,
            grey,
            black,
        };
        std::vector<Color> color(nodes.size(), Color::white);
        std::vector<std::size_t> parent(nodes.size(), 0);
        for (std::size_t root = 0; root < nodes.size(); ++root)
        {
            if (color[root] != Color::white)
                continue;
            std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
            color[root] = Color::grey;
            while (!stack.empty())
            {
                auto& [u, next] = stack.back();
                if (next == edges[u].size())
                {
                    color[u] = Color::black;
                    stack.pop_back();
                    continue;
                }
                const std::size_t v = edges[u][next++];
                if (color[v] == Color::grey)
                {
                    std::vector<std::size_t> cycle{v};
                    for (std::size_t w = u; w != v; w = parent[w])
                        cycle.push_back(w);
                    cycle.push_back(v);
                    std::reverse(cycle.begin(), cycle.end());
                    return cycle;
                }
                if (color[v] == Color::white)
                {
                    color[v] = Color::grey;
                    parent[v] = u;
                    stack.push_back({v, 0});
                }
            }
        }
        return std::nullopt;
    }

    Verdict check_hb_acyclic(const std::vector<TraceEvent>& events)
    {
        Verdict v = make("hb_acyclic", "", 0);
        const auto g = HbGraph::from_trace(events);
        if (auto cycle = g.find_cycle())
        {
            std::string d = "cycle:";
            for (std::size_t i = 0; i < cycle->size(); ++i)
                d += (i ? " -> " : " ") + node_name(g.nodes[(*cycle)[i]]);
            return failed(v, d);
        }
        v.detail = std::to_string(g.nodes.size()) + " instances";
        return v;
    }

    Verdict check_crossing_legality(const ScenarioProgram& s)
    {
        Verdict v = make("crossing_legality", s.name, 0);
        std::map<CommId, CommDecl> decls;
        decls[kWorldComm] = s.comm(kWorldComm);
        for (const auto& d : s.comms)
            decls[d.id] = d;

        struct Post
        {
            std::size_t pc;
            std::map<CommId, std::uint64_t> before;
        };
        std::map<P2pKey, std::vector<Post>> sends;
        std::map<P2pKey, std::vector<Post>> recvs;

        for (int r = 0; r < s.world_size; ++r)
        {
            std::map<CommId, std::uint64_t> count;
            const auto& prog = s.programs[static_cast<std::size_t>(r)];
            for (std::size_t pc = 0; pc < prog.size(); ++pc)
            {
                const Op& op = prog[pc];
                if (op.is_p2p())
                {
                    const auto& d = decls.at(op.comm);
                    const WorldRank peer = d.members.at(static_cast<std::size_t>(op.peer));
                    const bool send = op.type == OpType::send;
                    const P2pKey key{send ? r : peer, send ? peer : r, op.tag, op.comm};
                    (send ? sends : recvs)[key].push_back(Post{pc, count});
                }
                else if (op.type == OpType::collective)
                    ++count[op.comm];
                else if (op.type == OpType::comm_create)
                    ++count[decls.at(op.comm).parent];
            }
        }

        std::set<P2pKey> keys;
        for (const auto& [k, _] : sends)
            keys.insert(k);
        for (const auto& [k, _] : recvs)
            keys.insert(k);
        for (const auto& key : keys)
        {
            const auto& ss = sends[key];
            const auto& rr = recvs[key];
            const std::string who = "send " + std::to_string(key.src) + "->" + std::to_string(key.dst) + " tag " +
                                    std::to_string(key.tag) + " on comm " + std::to_string(key.comm);
            if (ss.size() != rr.size())
                return failed(v, who + ": " + std::to_string(ss.size()) + " sends but " + std::to_string(rr.size()) +
                                     " receives");
            for (std::size_t i = 0; i < ss.size(); ++i)
            {
                for (const auto& [id, d] : decls)
                {
                    if (d.local_rank_of(key.src) < 0 || d.local_rank_of(key.dst) < 0)
                        continue;
                    auto get = [&](const Post& p) {
                        auto it = p.before.find(id);
                        return it == p.before.end() ? std::uint64_t{0} : it->second;
                    };
                    const auto a = get(ss[i]);
                    const auto b = get(rr[i]);
                    if (a != b)
                        return failed(v, who + " (pair " + std::to_string(i) + ") straddles blocking collective #" +
                                             std::to_string(std::min(a, b)) + " on comm " + std::to_string(id) +
                                             ": sender has issued " + std::to_string(a) + ", receiver " +
                                             std::to_string(b));
                }
            }
        }
        return v;
    }

    Verdict check_safe_state(const SnapshotImage& snap, const std::vector<TraceEvent>& events)
    {
        Verdict v = make("safe_state", snap.scenario.name, snap.seed);
        std::map<CommId, std::size_t> comm_size;
        for (const auto& d : snap.communicators)
            comm_size[d.id] = d.members.size();

        std::map<WorldRank, std::int64_t> inside;
        std::map<Node, std::size_t> entered;
        std::map<Node, std::size_t> returned;
        std::map<Node, std::size_t> initiated;
        std::set<Node> nb_complete;
        for (const auto& e : events)
        {
            if (e.step >= snap.step)
                break;
            switch (e.type)
            {
            case EventType::coll_enter:
                ++inside[e.rank];
                ++entered[node_of(e)];
                break;
            case EventType::coll_return:
                --inside[e.rank];
                ++returned[node_of(e)];
                break;
            case EventType::icoll_init:
                ++initiated[node_of(e)];
                break;
            case EventType::icoll_complete:
                nb_complete.insert(node_of(e));
                break;
            default:
                break;
            }
        }

        for (const auto& [r, n] : inside)
            if (n != 0)
                return failed(v, "rank " + std::to_string(r) + " is inside a collective at the snapshot");
        for (const auto& [n, count] : entered)
        {
            const auto size = comm_size.at(n.first);
            if (count != size || returned[n] != size)
                return failed(v, node_name(n) + " entered by " + std::to_string(count) + " and left by " +
                                     std::to_string(returned[n]) + " of " + std::to_string(size) +
                                     " members before the snapshot");
        }
        for (const auto& [n, count] : initiated)
        {
            const auto size = comm_size.at(n.first);
            if (count != size || !nb_complete.count(n))
                return failed(v, "non-blocking " + node_name(n) + " initiated by " + std::to_string(count) + " of " +
                                     std::to_string(size) + " members before the snapshot");
        }

        for (const auto& ri : snap.ranks)
        {
            for (const auto& q : ri.requests)
                if (q.state == RequestState::pending)
                    return failed(v, "rank " + std::to_string(ri.rank) + " request " + std::to_string(q.id) +
                                         " is not globally complete in the snapshot");
            if (snap.algorithm != "cc")
                continue;
            for (const auto& [g, seq] : ri.clock.entries())
            {
                if (!g.contains(ri.rank))
                    continue;
                auto it = snap.targets.find(g);
                const std::uint64_t target = it == snap.targets.end() ? 0 : it->second;
                if (seq != target)
                    return failed(v, "rank " + std::to_string(ri.rank) + " SEQ" + g.to_string() + "=" +
                                         std::to_string(seq) + " but TARGET=" + std::to_string(target));
            }
        }
        if (snap.algorithm == "cc")
            for (const auto& [g, target] : snap.targets)
                for (WorldRank m : g.members())
                {
                    const auto& ri = snap.ranks.at(static_cast<std::size_t>(m));
                    if (ri.clock.seq(g) != target)
                        return failed(v, "rank " + std::to_string(m) + " SEQ" + g.to_string() + "=" +
                                             std::to_string(ri.clock.seq(g)) + " but TARGET=" +
                                             std::to_string(target));
                }
        v.detail = "snapshot at step " + std::to_string(snap.step);
        return v;
    }

    Verdict check_replay_equivalence(const ScenarioProgram& scenario, Algorithm algorithm, std::uint64_t seed,
                                     const CheckpointPlacement& placement)
    {
        Verdict v = make("replay_equivalence", scenario.name, seed);
        auto shared = std::make_shared<const ScenarioProgram>(scenario);
        try
        {
            SimConfig plain;
            plain.algorithm = algorithm;
            plain.seed = seed;
            Simulation reference(shared, plain);
            reference.run();

            SimConfig ck = plain;
            ck.placement = placement;
            ck.stop_after_snapshot = true;
            Simulation first(shared, ck);
            first.run();
            if (first.snapshots().empty())
                return failed(v, "no snapshot taken with placement " + placement.describe());

            const auto image = SnapshotImage::parse(first.snapshots().front().dump());
            SimConfig again = plain;
            again.seed = seed + 1;
            Simulation resumed = Simulation::restart(image, again);
            resumed.run();

            for (const auto& rs : reference.ranks())
            {
                const auto a = rs.checksum();
                const auto b = resumed.rank(rs.rank).checksum();
                if (a != b)
                    return failed(v, "rank " + std::to_string(rs.rank) + " checksum differs after restart from step " +
                                         std::to_string(image.step));
            }
            v.detail = "restart from step " + std::to_string(image.step) + " of " + std::to_string(reference.step());
        }
        catch (const SimError& e)
        {
            return failed(v, e.what());
        }
        return v;
    }

    std::optional<std::string> check_step_invariants(const Simulation& sim)
    {
        if (sim.config().algorithm != Algorithm::cc)
            return std::nullopt;
        const bool in_round = sim.coordinator().active() && !sim.coordinator().round().declared;

        std::map<GroupKey, std::uint64_t> max_seq;
        std::map<GroupKey, std::uint64_t> min_seq;
        std::map<GroupKey, std::uint64_t> known_target;
        for (const auto& rs : sim.ranks())
        {
            for (const auto& [g, seq] : rs.cc.clock.entries())
            {
                if (!g.contains(rs.rank))
                    continue;
                max_seq[g] = std::max(max_seq[g], seq);
                if (in_round && seq > rs.cc.targets.value_or_zero(g))
                    return "rank " + std::to_string(rs.rank) + " SEQ" + g.to_string() + "=" + std::to_string(seq) +
                           " exceeds its TARGET";
            }
            for (const auto& [g, t] : rs.cc.targets.entries())
                known_target[g] = std::max(known_target[g], t);
        }
        for (const auto& box : sim.mailboxes())
            for (const auto& m : box)
                known_target[m.ggid] = std::max(known_target[m.ggid], m.new_target);

        if (in_round)
            for (const auto& [g, s] : max_seq)
                if (s > known_target[g])
                    return "group " + g.to_string() + " max SEQ " + std::to_string(s) + " above every known target";

        if (!sim.scenario().has_nonblocking())
        {
            for (const auto& [id, info] : sim.comm_table())
            {
                const auto& g = info.group;
                std::uint64_t lo = UINT64_MAX;
                std::uint64_t hi = 0;
                for (WorldRank m : g.members())
                {
                    const auto s = sim.rank(m).cc.clock.seq(g);
                    lo = std::min(lo, s);
                    hi = std::max(hi, s);
                }
                if (hi > lo + 1)
                    return "group " + g.to_string() + " SEQ spread " + std::to_string(lo) + ".." + std::to_string(hi);
            }
        }
        return std::nullopt;
    }

    std::optional<std::string> check_cascade_bound(const Simulation& sim)
    {
        std::uint64_t max_group = 0;
        for (const auto& [id, info] : sim.comm_table())
            max_group = std::max<std::uint64_t>(max_group, info.group.size());
        const std::uint64_t fan = max_group == 0 ? 0 : max_group - 1;
        for (const auto& round : sim.coordinator().history())
            if (round.updates_during_round > round.collectives_during_round * fan)
                return "round " + std::to_string(round.id) + ": " + std::to_string(round.updates_during_round) +
                       " updates for " + std::to_string(round.collectives_during_round) + " collectives";
        return std::nullopt;
    }
} // namespace ccsim
