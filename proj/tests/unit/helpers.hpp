#pragma once

#include "ccsim/runtime/simulation.hpp"

#include <memory>

namespace testing
{
    using namespace ccsim;

    inline Op coll(CommId comm, CollectiveType t = CollectiveType::barrier, int root = 0,
                   ReduceOp rop = ReduceOp::sum)
    {
        Op op;
        op.type = OpType::collective;
        op.comm = comm;
        op.kind = CollectiveKind{t, root, rop};
        return op;
    }

    inline Op with_data(Op op, Payload p)
    {
        op.data = std::move(p);
        return op;
    }

    inline Op icoll(CommId comm, RequestId id, CollectiveType t = CollectiveType::barrier, int root = 0)
    {
        Op op = coll(comm, t, root);
        op.type = OpType::icollective;
        op.requests = {id};
        return op;
    }

    inline Op completion(OpType t, std::vector<RequestId> ids)
    {
        Op op;
        op.type = t;
        op.requests = std::move(ids);
        return op;
    }

    inline Op create(CommId id, std::optional<Payload> subset = std::nullopt)
    {
        Op op;
        op.type = OpType::comm_create;
        op.comm = id;
        op.data = std::move(subset);
        return op;
    }

    inline Op p2p(OpType t, int peer, int tag = 0, CommId comm = kWorldComm)
    {
        Op op;
        op.type = t;
        op.peer = peer;
        op.tag = tag;
        op.comm = comm;
        return op;
    }

    inline Op plain(OpType t, int ticks = 1)
    {
        Op op;
        op.type = t;
        op.ticks = t == OpType::compute ? ticks : 0;
        return op;
    }

    inline SimConfig config(Algorithm a, std::uint64_t seed = 0,
                            CheckpointPlacement placement = CheckpointPlacement::none())
    {
        SimConfig c;
        c.algorithm = a;
        c.seed = seed;
        c.placement = placement;
        return c;
    }

    inline Simulation make_sim(const ScenarioProgram& s, SimConfig c)
    {
        return Simulation(std::make_shared<const ScenarioProgram>(s), std::move(c));
    }

    inline Simulation run(const ScenarioProgram& s, SimConfig c)
    {
        auto sim = make_sim(s, std::move(c));
        sim.run();
        return sim;
    }

    inline std::size_t count_events(const Simulation& sim, EventType t)
    {
        std::size_t n = 0;
        for (const auto& e : sim.trace().events())
            n += e.type == t;
        return n;
    }
} // namespace testing
