#include "ccsim/harness/builtin.hpp"

namespace ccsim
{
    namespace
    {
        Op coll(CommId comm, CollectiveType type = CollectiveType::allreduce, int root = 0)
        {
            Op op;
            op.type = OpType::collective;
            op.comm = comm;
            op.kind.type = type;
            op.kind.root = root;
            return op;
        }

        Op simple(OpType t)
        {
            Op op;
            op.type = t;
            if (t == OpType::compute)
                op.ticks = 1;
            return op;
        }

        void repeat(std::vector<Op>& prog, const Op& op, int n)
        {
            for (int i = 0; i < n; ++i)
                prog.push_back(op);
        }

        ScenarioProgram chain7()
        {
            auto s = make_scenario("chain7", 7);
            const CommId c12 = 1, c23 = 2, g345 = 3, c56 = 4;
            s.comms = {{c12, kWorldComm, {1, 2}},
                       {c23, kWorldComm, {2, 3}},
                       {g345, kWorldComm, {3, 4, 5}},
                       {c56, kWorldComm, {5, 6}}};
            for (auto& prog : s.programs)
                for (const auto& d : s.comms)
                {
                    Op op;
                    op.type = OpType::comm_create;
                    op.comm = d.id;
                    prog.push_back(op);
                }
            auto& p = s.programs;
            const Op mark = simple(OpType::mark);

            repeat(p[1], coll(c12), 5);
            p[1].push_back(mark);
            p[1].push_back(coll(c12));

            repeat(p[2], coll(c12), 5);
            repeat(p[2], coll(c23), 7);
            p[2].push_back(coll(c12));

            repeat(p[3], coll(c23), 6);
            repeat(p[3], coll(g345, CollectiveType::bcast, 0), 2);
            p[3].push_back(mark);
            p[3].push_back(coll(g345, CollectiveType::bcast, 0));
            p[3].push_back(coll(c23));

            repeat(p[4], coll(g345, CollectiveType::bcast, 0), 2);
            p[4].push_back(mark);
            p[4].push_back(coll(g345, CollectiveType::bcast, 0));

            repeat(p[5], coll(g345, CollectiveType::bcast, 0), 2);
            repeat(p[5], coll(c56), 3);
            p[5].push_back(mark);
            p[5].push_back(coll(c56));
            p[5].push_back(coll(g345, CollectiveType::bcast, 0));

            repeat(p[6], coll(c56), 3);
            p[6].push_back(mark);
            p[6].push_back(coll(c56));
            return s;
        }

        ScenarioProgram late_bcast()
        {
            auto s = make_scenario("late-bcast", 3);
            Op bcast = coll(kWorldComm, CollectiveType::bcast, 0);
            Op root_bcast = bcast;
            root_bcast.data = Payload{42};
            s.programs[0] = {root_bcast, coll(kWorldComm)};
            for (int r = 1; r < 3; ++r)
                s.programs[static_cast<std::size_t>(r)] = {simple(OpType::mark), simple(OpType::compute), bcast,
                                                           coll(kWorldComm)};
            return s;
        }
    } // namespace

    std::vector<std::string> builtin_names() { return {"chain7", "late-bcast"}; }

    bool is_builtin(std::string_view name) { return name == "chain7" || name == "late-bcast"; }

    ScenarioProgram builtin_scenario(std::string_view name)
    {
        if (name == "chain7")
            return chain7();
        if (name == "late-bcast")
            return late_bcast();
        fail(ErrorKind::invalid_configuration, "no built-in scenario named '" + std::string(name) + "'");
    }
} // namespace ccsim
