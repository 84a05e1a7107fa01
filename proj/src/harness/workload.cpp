#include "ccsim/harness/workload.hpp"

#include "ccsim/runtime/simulation.hpp"
#include "ccsim/verifier/verifier.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

namespace ccsim
{
    namespace
    {
        // Draws are built from raw engine output so scenarios are identical
        // across standard libraries.
        class Rng
        {
        public:
            explicit Rng(std::uint64_t seed) : engine_(seed) {}

            std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }
            int range(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1))); }
            double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
            bool chance(double p) { return unit() < p; }

            template <class T>
            const T& pick(const std::vector<T>& v)
            {
                return v[below(v.size())];
            }

            std::vector<int> subset(const std::vector<int>& from, std::size_t k)
            {
                std::vector<int> pool = from;
                for (std::size_t i = 0; i < k; ++i)
                    std::swap(pool[i], pool[i + below(pool.size() - i)]);
                pool.resize(k);
                std::sort(pool.begin(), pool.end());
                return pool;
            }

        private:
            std::mt19937_64 engine_;
        };

        struct Builder
        {
            const WorkloadParams& p;
            Rng& rng;
            ScenarioProgram s;
            std::size_t total = 0;
            std::vector<RequestId> next_request;
            std::vector<std::vector<RequestId>> open; // initiated, not yet surely consumed

            std::size_t reserve() const { return static_cast<std::size_t>(p.ranks); }

            bool fits(const std::vector<WorldRank>& who, std::size_t each = 1) const
            {
                if (total + who.size() * each + reserve() > static_cast<std::size_t>(p.ops))
                    return false;
                if (p.max_ops_per_rank > 0)
                    for (WorldRank r : who)
                        if (s.programs[static_cast<std::size_t>(r)].size() + each + 1 >
                            static_cast<std::size_t>(p.max_ops_per_rank))
                            return false;
                return true;
            }

            void push(WorldRank r, Op op)
            {
                s.programs[static_cast<std::size_t>(r)].push_back(std::move(op));
                ++total;
            }

            CollectiveKind random_kind(std::size_t size)
            {
                static const std::vector<CollectiveType> types{CollectiveType::barrier, CollectiveType::bcast,
                                                               CollectiveType::reduce,  CollectiveType::allreduce,
                                                               CollectiveType::gather,  CollectiveType::alltoall};
                CollectiveKind k;
                k.type = rng.pick(types);
                k.root = k.has_root() ? static_cast<int>(rng.below(size)) : 0;
                const ReduceOp op = rng.chance(0.5) ? ReduceOp::sum : ReduceOp::max;
                k.op = k.has_op() ? op : ReduceOp::sum;
                return k;
            }

            void collective(const CommDecl& d, OpType type)
            {
                Op op;
                op.type = type;
                op.comm = d.id;
                op.kind = random_kind(d.members.size());
                const bool literal = rng.chance(0.3);
                for (WorldRank m : d.members)
                {
                    Op mine = op;
                    if (literal)
                        mine.data = Payload{static_cast<Value>(rng.range(1, 99)), static_cast<Value>(m)};
                    if (type == OpType::icollective)
                    {
                        const RequestId id = next_request[static_cast<std::size_t>(m)]++;
                        mine.requests = {id};
                        open[static_cast<std::size_t>(m)].push_back(id);
                    }
                    push(m, std::move(mine));
                }
            }

            void completion(WorldRank r)
            {
                auto& reqs = open[static_cast<std::size_t>(r)];
                Op op;
                const auto roll = rng.below(4);
                if (roll == 0)
                {
                    op.type = OpType::test;
                    op.requests = {rng.pick(reqs)};
                }
                else if (roll == 1)
                {
                    op.type = OpType::wait;
                    const auto i = rng.below(reqs.size());
                    op.requests = {reqs[i]};
                    reqs.erase(reqs.begin() + static_cast<std::ptrdiff_t>(i));
                }
                else
                {
                    op.type = roll == 2 ? OpType::waitany : OpType::waitall;
                    const auto k = 1 + rng.below(reqs.size());
                    std::vector<int> idx(reqs.size());
                    for (std::size_t i = 0; i < idx.size(); ++i)
                        idx[i] = static_cast<int>(i);
                    for (int i : rng.subset(idx, k))
                        op.requests.push_back(reqs[static_cast<std::size_t>(i)]);
                    if (op.type == OpType::waitall)
                        reqs.erase(std::remove_if(reqs.begin(), reqs.end(),
                                                  [&](RequestId id) {
                                                      return std::find(op.requests.begin(), op.requests.end(), id) !=
                                                             op.requests.end();
                                                  }),
                                   reqs.end());
                }
                push(r, std::move(op));
            }
        };

        ScenarioProgram attempt(Rng& rng, const WorkloadParams& p, std::uint64_t seed)
        {
            Builder b{p, rng, make_scenario("gen-" + std::to_string(seed), p.ranks), 0, {}, {}};
            b.next_request.assign(static_cast<std::size_t>(p.ranks), 0);
            b.open.resize(static_cast<std::size_t>(p.ranks));

            std::vector<int> world(static_cast<std::size_t>(p.ranks));
            for (int r = 0; r < p.ranks; ++r)
                world[static_cast<std::size_t>(r)] = r;
            std::vector<CommDecl> all{b.s.comm(kWorldComm)};

            // communicator declarations, created up front in declaration order
            for (int g = 0; g < p.groups; ++g)
            {
                CommDecl d;
                d.id = g + 1;
                d.parent = kWorldComm;
                if (g > 0 && rng.chance(0.15))
                {
                    const auto& twin = b.s.comms[rng.below(b.s.comms.size())];
                    d.parent = twin.parent;
                    d.members = twin.members;
                }
                else
                {
                    const CommDecl& parent = rng.chance(0.25) ? rng.pick(all) : all.front();
                    d.parent = parent.id;
                    const auto n = parent.members.size();
                    const std::size_t k = n == 1 ? 1 : (rng.chance(0.1) ? 1 : 2 + rng.below(n - 1));
                    d.members = rng.subset(parent.members, k);
                }
                const auto& parent = b.s.comm(d.parent);
                if (!b.fits(parent.members))
                    break;
                b.s.comms.push_back(d);
                all.push_back(d);
                Op create;
                create.type = OpType::comm_create;
                create.comm = d.id;
                for (WorldRank m : parent.members)
                    b.push(m, create);
            }

            const CommDecl& wd = all.front();
            int stall = 0;
            while (stall < 8)
            {
                const double roll = rng.unit();
                bool placed = false;
                if (roll < p.p2p_ratio && p.ranks >= 2)
                {
                    // WORLD collective, a few pairs, WORLD collective
                    const int pairs = rng.range(1, 3);
                    if (b.fits(world, static_cast<std::size_t>(2 + pairs)))
                    {
                        b.collective(wd, OpType::collective);
                        for (int i = 0; i < pairs; ++i)
                        {
                            const auto ends = rng.subset(world, 2);
                            const bool flip = rng.chance(0.5);
                            const WorldRank src = flip ? ends[1] : ends[0];
                            const WorldRank dst = flip ? ends[0] : ends[1];
                            std::vector<const CommDecl*> shared;
                            for (const auto& d : all)
                                if (d.local_rank_of(src) >= 0 && d.local_rank_of(dst) >= 0)
                                    shared.push_back(&d);
                            const CommDecl& c = *rng.pick(shared);
                            Op send;
                            send.type = OpType::send;
                            send.comm = c.id;
                            send.peer = c.local_rank_of(dst);
                            send.tag = rng.range(0, 3);
                            if (rng.chance(0.5))
                                send.data = Payload{static_cast<Value>(rng.range(100, 999))};
                            Op recv;
                            recv.type = OpType::recv;
                            recv.comm = c.id;
                            recv.peer = c.local_rank_of(src);
                            recv.tag = send.tag;
                            b.push(src, send);
                            b.push(dst, recv);
                        }
                        b.collective(wd, OpType::collective);
                        placed = true;
                    }
                }
                else if (roll < p.p2p_ratio + p.compute_ratio)
                {
                    const WorldRank r = static_cast<WorldRank>(rng.below(static_cast<std::uint64_t>(p.ranks)));
                    if (b.fits({r}))
                    {
                        Op op;
                        op.type = OpType::compute;
                        op.ticks = rng.range(1, 3);
                        b.push(r, op);
                        placed = true;
                    }
                }
                else if (roll < p.p2p_ratio + p.compute_ratio + p.nonblocking_ratio)
                {
                    // initiate, or complete something already open
                    std::vector<WorldRank> with_open;
                    for (int r = 0; r < p.ranks; ++r)
                        if (!b.open[static_cast<std::size_t>(r)].empty())
                            with_open.push_back(r);
                    if (!with_open.empty() && rng.chance(0.4))
                    {
                        const WorldRank r = rng.pick(with_open);
                        if (b.fits({r}))
                        {
                            b.completion(r);
                            placed = true;
                        }
                    }
                    else
                    {
                        const CommDecl& d = rng.chance(0.3) ? wd : rng.pick(all);
                        if (b.fits(d.members))
                        {
                            b.collective(d, OpType::icollective);
                            placed = true;
                        }
                    }
                }
                else
                {
                    const CommDecl& d = rng.chance(0.25) ? wd : rng.pick(all);
                    if (b.fits(d.members))
                    {
                        b.collective(d, OpType::collective);
                        placed = true;
                    }
                }
                stall = placed ? 0 : stall + 1;
            }

            for (int r = 0; r < p.ranks; ++r)
            {
                const auto& prog = b.s.programs[static_cast<std::size_t>(r)];
                std::vector<RequestId> all_ids;
                for (const Op& op : prog)
                    if (op.type == OpType::icollective)
                        all_ids.push_back(op.requests.front());
                bool settled = b.open[static_cast<std::size_t>(r)].empty();
                // a test or waitany may have left any request unconsumed
                for (const Op& op : prog)
                    if (op.type == OpType::test || op.type == OpType::waitany)
                        settled = false;
                if (!all_ids.empty() && !settled)
                {
                    Op fin;
                    fin.type = OpType::waitall;
                    fin.requests = all_ids;
                    b.push(r, fin);
                }
            }
            return std::move(b.s);
        }
    } // namespace

    void WorkloadParams::validate() const
    {
        auto bad = [](const std::string& what) { fail(ErrorKind::invalid_configuration, "workload: " + what); };
        if (ranks < 1 || ranks > 64)
            bad("ranks must be in [1, 64]");
        if (groups < 0 || groups > 32)
            bad("groups must be in [0, 32]");
        if (ops < 1 || ops > 100000)
            bad("ops must be in [1, 100000]");
        if (max_ops_per_rank < 0)
            bad("max_ops_per_rank must be non-negative");
        for (double r : {nonblocking_ratio, p2p_ratio, compute_ratio})
            if (!(r >= 0.0 && r <= 1.0))
                bad("ratios must be in [0, 1]");
        if (nonblocking_ratio + p2p_ratio + compute_ratio > 1.0)
            bad("ratios must sum to at most 1");
        if (max_retries < 1)
            bad("max_retries must be positive");
    }

    ScenarioProgram generate_workload(std::uint64_t seed, const WorkloadParams& params)
    {
        params.validate();
        Rng rng(seed);
        std::string last_error;
        for (int attempt_no = 0; attempt_no < params.max_retries; ++attempt_no)
        {
            ScenarioProgram s = attempt(rng, params, seed);
            try
            {
                s.validate();
                const auto legal = check_crossing_legality(s);
                if (!legal.pass)
                {
                    last_error = legal.detail;
                    continue;
                }
                SimConfig probe;
                probe.seed = seed;
                Simulation sim(std::make_shared<const ScenarioProgram>(s), probe);
                sim.run();
                return s;
            }
            catch (const SimError& e)
            {
                last_error = e.what();
            }
        }
        fail(ErrorKind::invalid_configuration,
             "workload generation failed after " + std::to_string(params.max_retries) + " attempts: " + last_error);
    }
} // namespace ccsim
