#include "ccsim/runtime/collective_engine.hpp"

#include <algorithm>
#include <limits>

namespace ccsim
{
    namespace
    {
        Payload fold(ReduceOp op, const std::vector<Payload>& inputs)
        {
            std::size_t len = 0;
            for (const auto& in : inputs)
                len = std::max(len, in.size());
            const Value identity = op == ReduceOp::sum ? 0 : std::numeric_limits<Value>::min();
            Payload out(len, identity);
            for (const auto& in : inputs)
                for (std::size_t i = 0; i < in.size(); ++i)
                    out[i] = op == ReduceOp::sum ? out[i] + in[i] : std::max(out[i], in[i]);
            return out;
        }

        std::string describe(const InstanceId& id)
        {
            return std::string(id.trivial_barrier ? "trivial barrier " : "collective ") + "#" +
                   std::to_string(id.index) + " on comm " + std::to_string(id.comm);
        }
    } // namespace

    std::vector<std::optional<Payload>> compute_collective(const CollectiveKind& kind, const std::vector<Payload>& inputs)
    {
        const std::size_t n = inputs.size();
        std::vector<std::optional<Payload>> out(n);
        const auto root = static_cast<std::size_t>(kind.root);
        switch (kind.type)
        {
        case CollectiveType::barrier:
            break;
        case CollectiveType::bcast:
            for (auto& o : out)
                o = inputs[root];
            break;
        case CollectiveType::reduce:
            out[root] = fold(kind.op, inputs);
            break;
        case CollectiveType::allreduce: {
            const auto r = fold(kind.op, inputs);
            for (auto& o : out)
                o = r;
            break;
        }
        case CollectiveType::gather: {
            Payload all;
            for (const auto& in : inputs)
                all.insert(all.end(), in.begin(), in.end());
            out[root] = std::move(all);
            break;
        }
        case CollectiveType::alltoall:
            for (std::size_t i = 0; i < n; ++i)
            {
                Payload p;
                p.reserve(n);
                for (std::size_t j = 0; j < n; ++j)
                    p.push_back(inputs[j].empty() ? 0 : inputs[j][i % inputs[j].size()]);
                out[i] = std::move(p);
            }
            break;
        }
        return out;
    }

    bool CollectiveEngine::arrive(const InstanceId& id, const CallShape& shape, const std::vector<WorldRank>& members,
                                  int local_rank, Payload input, RequestId request)
    {
        auto [it, inserted] = live_.try_emplace(id);
        Instance& inst = it->second;
        if (inserted)
        {
            inst.id = id;
            inst.shape = shape;
            inst.members = members;
            inst.inputs.resize(members.size());
            inst.requests.assign(members.size(), -1);
            inst.released.assign(members.size(), false);
        }
        else if (!(inst.shape == shape))
        {
            fail(ErrorKind::collective_mismatch,
                 describe(id) + ": world rank " + std::to_string(members[static_cast<std::size_t>(local_rank)]) +
                     " called " + std::string(to_string(shape.op)) + "/" + std::string(to_string(shape.kind.type)) +
                     " but an earlier member called " + std::string(to_string(inst.shape.op)) + "/" +
                     std::string(to_string(inst.shape.kind.type)));
        }
        const auto lr = static_cast<std::size_t>(local_rank);
        if (inst.inputs[lr])
            fail(ErrorKind::internal_invariant, describe(id) + ": double arrival");
        inst.inputs[lr] = std::move(input);
        inst.requests[lr] = request;
        ++inst.arrived;
        if (inst.arrived < inst.members.size())
            return false;

        std::vector<Payload> ins;
        ins.reserve(inst.inputs.size());
        for (auto& in : inst.inputs)
            ins.push_back(*in);
        inst.outputs = compute_collective(inst.shape.kind, ins);
        inst.complete = true;
        return true;
    }

    bool CollectiveEngine::is_complete(const InstanceId& id) const
    {
        auto it = live_.find(id);
        return it != live_.end() && it->second.complete;
    }

    bool CollectiveEngine::has_arrived(const InstanceId& id, int local_rank) const
    {
        auto it = live_.find(id);
        return it != live_.end() && it->second.inputs[static_cast<std::size_t>(local_rank)].has_value();
    }

    const Instance* CollectiveEngine::find(const InstanceId& id) const
    {
        auto it = live_.find(id);
        return it == live_.end() ? nullptr : &it->second;
    }

    std::optional<Payload> CollectiveEngine::release(const InstanceId& id, int local_rank)
    {
        auto it = live_.find(id);
        if (it == live_.end() || !it->second.complete)
            fail(ErrorKind::internal_invariant, describe(id) + ": release before completion");
        Instance& inst = it->second;
        const auto lr = static_cast<std::size_t>(local_rank);
        if (inst.released[lr])
            fail(ErrorKind::internal_invariant, describe(id) + ": double release");
        inst.released[lr] = true;
        auto out = std::move(inst.outputs[lr]);
        if (++inst.released_count == inst.members.size())
            live_.erase(it);
        return out;
    }

    std::vector<int> CollectiveEngine::abort(const InstanceId& id)
    {
        std::vector<int> arrived;
        auto it = live_.find(id);
        if (it == live_.end())
            return arrived;
        if (it->second.complete)
            fail(ErrorKind::internal_invariant, describe(id) + ": abort after completion");
        for (std::size_t i = 0; i < it->second.inputs.size(); ++i)
            if (it->second.inputs[i])
                arrived.push_back(static_cast<int>(i));
        live_.erase(it);
        return arrived;
    }
} // namespace ccsim
