#include "ccsim/runtime/scenario.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace ccsim
{
    namespace
    {
        template <typename E, std::size_t N>
        E lookup(const std::pair<std::string_view, E> (&table)[N], std::string_view s, const char* what)
        {
            for (const auto& [name, value] : table)
                if (name == s)
                    return value;
            fail(ErrorKind::invalid_configuration, std::string("unknown ") + what + " '" + std::string(s) + "'");
        }

        constexpr std::pair<std::string_view, OpType> kOpNames[] = {
            {"comm_create", OpType::comm_create}, {"coll", OpType::collective},   {"icoll", OpType::icollective},
            {"test", OpType::test},               {"wait", OpType::wait},         {"waitall", OpType::waitall},
            {"waitany", OpType::waitany},         {"send", OpType::send},         {"recv", OpType::recv},
            {"compute", OpType::compute},         {"mark", OpType::mark},
        };

        constexpr std::pair<std::string_view, CollectiveType> kKindNames[] = {
            {"barrier", CollectiveType::barrier},     {"bcast", CollectiveType::bcast},
            {"reduce", CollectiveType::reduce},       {"allreduce", CollectiveType::allreduce},
            {"gather", CollectiveType::gather},       {"alltoall", CollectiveType::alltoall},
        };

        constexpr std::pair<std::string_view, ReduceOp> kReduceNames[] = {
            {"sum", ReduceOp::sum},
            {"max", ReduceOp::max},
        };

        template <typename E, std::size_t N>
        std::string_view name_of(const std::pair<std::string_view, E> (&table)[N], E v) noexcept
        {
            for (const auto& [name, value] : table)
                if (value == v)
                    return name;
            return "?";
        }

        [[noreturn]] void invalid(int rank, std::size_t pc, const std::string& msg)
        {
            fail(ErrorKind::invalid_configuration,
                 "rank " + std::to_string(rank) + " op " + std::to_string(pc) + ": " + msg);
        }
    } // namespace

    std::string_view to_string(OpType t) noexcept { return name_of(kOpNames, t); }
    std::string_view to_string(CollectiveType t) noexcept { return name_of(kKindNames, t); }
    std::string_view to_string(ReduceOp op) noexcept { return name_of(kReduceNames, op); }
    OpType op_type_from_string(std::string_view s) { return lookup(kOpNames, s, "op"); }
    CollectiveType collective_type_from_string(std::string_view s) { return lookup(kKindNames, s, "collective kind"); }
    ReduceOp reduce_op_from_string(std::string_view s) { return lookup(kReduceNames, s, "reduce op"); }

    int CommDecl::local_rank_of(WorldRank r) const noexcept
    {
        auto it = std::find(members.begin(), members.end(), r);
        return it == members.end() ? -1 : static_cast<int>(it - members.begin());
    }

    bool ScenarioProgram::has_comm(CommId id) const noexcept
    {
        if (id == kWorldComm)
            return true;
        return std::any_of(comms.begin(), comms.end(), [id](const CommDecl& d) { return d.id == id; });
    }

    CommDecl ScenarioProgram::comm(CommId id) const
    {
        if (id == kWorldComm)
        {
            CommDecl w;
            w.members.resize(static_cast<std::size_t>(world_size));
            for (int i = 0; i < world_size; ++i)
                w.members[static_cast<std::size_t>(i)] = i;
            return w;
        }
        for (const auto& d : comms)
            if (d.id == id)
                return d;
        fail(ErrorKind::invalid_configuration, "unknown communicator " + std::to_string(id));
    }

    bool ScenarioProgram::has_nonblocking() const noexcept
    {
        for (const auto& prog : programs)
            for (const auto& op : prog)
                if (op.type == OpType::icollective || op.is_completion())
                    return true;
        return false;
    }

    std::size_t ScenarioProgram::total_ops() const noexcept
    {
        std::size_t n = 0;
        for (const auto& prog : programs)
            n += prog.size();
        return n;
    }

    void ScenarioProgram::validate() const
    {
        if (world_size < 1)
            fail(ErrorKind::invalid_configuration, "world size must be at least 1");
        if (programs.size() != static_cast<std::size_t>(world_size))
            fail(ErrorKind::invalid_configuration, "expected one program per rank");

        std::map<CommId, CommDecl> decls;
        decls[kWorldComm] = comm(kWorldComm);
        for (const auto& d : comms)
        {
            if (d.id == kWorldComm || decls.count(d.id))
                fail(ErrorKind::invalid_configuration, "communicator id " + std::to_string(d.id) + " reused");
            auto parent = decls.find(d.parent);
            if (parent == decls.end())
                fail(ErrorKind::invalid_configuration,
                     "communicator " + std::to_string(d.id) + " declared before its parent");
            if (d.members.empty())
                fail(ErrorKind::invalid_configuration, "communicator " + std::to_string(d.id) + " has no members");
            std::set<WorldRank> seen;
            int last_parent_pos = -1;
            for (WorldRank m : d.members)
            {
                int pos = parent->second.local_rank_of(m);
                if (pos < 0)
                    fail(ErrorKind::invalid_configuration, "communicator " + std::to_string(d.id) +
                                                               " member " + std::to_string(m) + " not in parent");
                if (!seen.insert(m).second)
                    fail(ErrorKind::invalid_configuration,
                         "communicator " + std::to_string(d.id) + " lists a member twice");
                if (pos < last_parent_pos)
                    fail(ErrorKind::invalid_configuration,
                         "communicator " + std::to_string(d.id) + " members must follow parent order");
                last_parent_pos = pos;
            }
            decls[d.id] = d;
        }

        for (int r = 0; r < world_size; ++r)
        {
            std::set<CommId> created{kWorldComm};
            std::set<RequestId> initiated;
            const auto& prog = programs[static_cast<std::size_t>(r)];
            for (std::size_t pc = 0; pc < prog.size(); ++pc)
            {
                const Op& op = prog[pc];
                if (op.type == OpType::comm_create)
                {
                    auto it = decls.find(op.comm);
                    if (it == decls.end() || op.comm == kWorldComm)
                        invalid(r, pc, "comm_create of undeclared communicator");
                    if (!created.count(it->second.parent))
                        invalid(r, pc, "comm_create before parent exists on this rank");
                    if (decls[it->second.parent].local_rank_of(r) < 0)
                        invalid(r, pc, "comm_create by a non-member of the parent");
                    if (op.data)
                    {
                        const auto& parent = decls[it->second.parent];
                        for (Value v : *op.data)
                            if (v < 0 || v >= static_cast<Value>(parent.members.size()))
                                invalid(r, pc, "comm_create subset rank out of range");
                    }
                    if (it->second.local_rank_of(r) >= 0)
                        created.insert(op.comm);
                    continue;
                }
                if (op.type == OpType::collective || op.type == OpType::icollective || op.is_p2p())
                {
                    auto it = decls.find(op.comm);
                    if (it == decls.end())
                        invalid(r, pc, "unknown communicator " + std::to_string(op.comm));
                    if (!created.count(op.comm))
                        invalid(r, pc, "communicator " + std::to_string(op.comm) + " used before creation");
                    const auto n = static_cast<int>(it->second.members.size());
                    if (op.is_p2p())
                    {
                        if (op.peer < 0 || op.peer >= n)
                            invalid(r, pc, "peer out of range");
                        if (it->second.members[static_cast<std::size_t>(op.peer)] == r)
                            invalid(r, pc, "point-to-point with self");
                    }
                    else if (op.kind.has_root() && (op.kind.root < 0 || op.kind.root >= n))
                        invalid(r, pc, "root out of range");
                }
                if (op.type == OpType::icollective)
                {
                    if (op.requests.size() != 1)
                        invalid(r, pc, "non-blocking collective needs exactly one request id");
                    if (!initiated.insert(op.requests.front()).second)
                        invalid(r, pc, "request id reused");
                }
                if (op.is_completion())
                {
                    if (op.requests.empty())
                        invalid(r, pc, "completion call without request ids");
                    if ((op.type == OpType::test || op.type == OpType::wait) && op.requests.size() != 1)
                        invalid(r, pc, "test/wait take exactly one request id");
                    for (RequestId id : op.requests)
                        if (!initiated.count(id))
                            invalid(r, pc, "request " + std::to_string(id) + " not initiated yet");
                }
                if (op.type == OpType::compute && op.ticks < 0)
                    invalid(r, pc, "negative compute ticks");
            }
        }
    }

    ScenarioProgram make_scenario(std::string name, int world_size)
    {
        if (world_size < 1)
            fail(ErrorKind::invalid_configuration, "world size must be at least 1");
        ScenarioProgram s;
        s.name = std::move(name);
        s.world_size = world_size;
        s.programs.resize(static_cast<std::size_t>(world_size));
        return s;
    }
} // namespace ccsim
