#include "ccsim/runtime/simulation.hpp"

#include "ccsim/runtime/cost_model.hpp"

#include <algorithm>

namespace ccsim
{
    namespace
    {
        using nlohmann::json;

        json instance_json(const InstanceId& id)
        {
            return {{"comm", id.comm}, {"index", id.index}};
        }

        struct Hasher
        {
            std::uint64_t a = 0x243f6a8885a308d3ULL;
            std::uint64_t b = 0x13198a2e03707344ULL;

            void add(std::uint64_t v)
            {
                a = hash_combine(a, v);
                b = hash_combine(b ^ 0xa4093822299f31d0ULL, v * 0x9e3779b97f4a7c15ULL + 1);
            }
            void add_payload(const std::optional<Payload>& p)
            {
                add(p ? 1 + hash_payload(*p) : 0);
            }
            void add_group(const GroupKey& g)
            {
                add(g.size());
                for (auto m : g.members())
                    add(static_cast<std::uint64_t>(m));
            }
        };
    } // namespace

    std::string_view to_string(Algorithm a) noexcept
    {
        switch (a)
        {
        case Algorithm::none:
            return "none";
        case Algorithm::cc:
            return "cc";
        case Algorithm::tpc:
            return "2pc";
        }
        return "?";
    }

    Algorithm algorithm_from_string(std::string_view s)
    {
        if (s == "none")
            return Algorithm::none;
        if (s == "cc")
            return Algorithm::cc;
        if (s == "2pc")
            return Algorithm::tpc;
        fail(ErrorKind::invalid_configuration, "unknown algorithm '" + std::string(s) + "'");
    }

    std::string CheckpointPlacement::describe() const
    {
        switch (kind)
        {
        case Kind::none:
            return "none";
        case Kind::at_step:
            return "step:" + std::to_string(step);
        case Kind::at_marks:
            return "marks";
        case Kind::explore:
            return "explore";
        }
        return "?";
    }

    CheckpointPlacement CheckpointPlacement::parse(std::string_view s)
    {
        if (s == "none")
            return none();
        if (s == "marks")
            return at_marks();
        if (s == "explore")
            return explore();
        if (s.starts_with("step:"))
        {
            const std::string num(s.substr(5));
            if (!num.empty() && std::all_of(num.begin(), num.end(), [](char c) { return c >= '0' && c <= '9'; }))
                return at_step(std::stoull(num));
        }
        fail(ErrorKind::invalid_configuration, "bad checkpoint placement '" + std::string(s) + "'");
    }

    std::string_view to_string(Phase p) noexcept
    {
        switch (p)
        {
        case Phase::ready:
            return "ready";
        case Phase::in_barrier:
            return "in_barrier";
        case Phase::inside:
            return "inside";
        case Phase::finish_commit:
            return "finish_commit";
        case Phase::in_wait:
            return "in_wait";
        case Phase::posted:
            return "posted";
        case Phase::done:
            return "done";
        }
        return "?";
    }

    std::uint64_t RankState::checksum() const noexcept
    {
        return hash_combine(hash_combine(hash_payload(buffer), digest), request_fold);
    }

    std::map<CommId, CommInfo> build_comm_table(const ScenarioProgram& s)
    {
        std::map<CommId, CommInfo> table;
        auto world = s.comm(kWorldComm);
        table.emplace(kWorldComm, CommInfo{world, GroupKey(world.members)});
        for (const auto& d : s.comms)
            table.emplace(d.id, CommInfo{d, GroupKey(d.members)});
        return table;
    }

    Simulation::Simulation(std::shared_ptr<const ScenarioProgram> scenario, SimConfig config)
        : scenario_(std::move(scenario)), config_(std::move(config)),
          scheduler_(config_.seed, config_.mode, config_.fixed_trace)
    {
        if (!scenario_)
            fail(ErrorKind::invalid_configuration, "no scenario");
        scenario_->validate();
        if (config_.algorithm == Algorithm::tpc)
            tpc_require_supported(*scenario_);
        if (config_.algorithm == Algorithm::none && config_.placement.kind != CheckpointPlacement::Kind::none)
            fail(ErrorKind::invalid_configuration, "a checkpoint needs a protocol (cc or 2pc)");
        comm_table_ = std::make_shared<const std::map<CommId, CommInfo>>(build_comm_table(*scenario_));

        const int n = scenario_->world_size;
        ranks_.resize(static_cast<std::size_t>(n));
        mailboxes_.resize(static_cast<std::size_t>(n));
        const GroupKey& world = comm(kWorldComm).group;
        for (int r = 0; r < n; ++r)
        {
            auto& rs = ranks_[static_cast<std::size_t>(r)];
            rs.rank = r;
            rs.buffer = Payload{static_cast<Value>(r)};
            rs.comms.insert(kWorldComm);
            if (config_.algorithm == Algorithm::cc)
                rs.cc.clock.observe(world);
            if (scenario_->programs[static_cast<std::size_t>(r)].empty())
                rs.phase = Phase::done;
        }
    }

    Simulation Simulation::restart(const SnapshotImage& image, SimConfig config)
    {
        if (image.algorithm != to_string(config.algorithm))
            fail(ErrorKind::load_error, "snapshot was taken under '" + image.algorithm + "', restart asked for '" +
                                            std::string(to_string(config.algorithm)) + "'");
        auto scenario = std::make_shared<const ScenarioProgram>(image.scenario);
        Simulation sim(scenario, std::move(config));

        std::vector<CommDecl> expected;
        for (const auto& [id, info] : *sim.comm_table_)
            expected.push_back(info.decl);
        if (expected != image.communicators)
            fail(ErrorKind::load_error, "snapshot communicator table does not match its scenario");
        if (image.ranks.size() != sim.ranks_.size())
            fail(ErrorKind::load_error, "snapshot rank count does not match world size");

        for (const auto& ri : image.ranks)
        {
            if (ri.rank < 0 || static_cast<std::size_t>(ri.rank) >= sim.ranks_.size())
                fail(ErrorKind::load_error, "snapshot rank out of range");
            auto& rs = sim.ranks_[static_cast<std::size_t>(ri.rank)];
            const auto& prog = scenario->programs[static_cast<std::size_t>(ri.rank)];
            if (ri.pc > prog.size())
                fail(ErrorKind::load_error, "snapshot pc beyond program end on rank " + std::to_string(ri.rank));
            rs.pc = ri.pc;
            rs.phase = ri.pc == prog.size() ? Phase::done : Phase::ready;
            rs.buffer = ri.buffer;
            rs.digest = ri.digest;
            rs.request_fold = ri.request_fold;
            rs.comms = std::set<CommId>(ri.comms.begin(), ri.comms.end());
            for (CommId c : rs.comms)
                if (!sim.comm_table_->count(c))
                    fail(ErrorKind::load_error, "snapshot names unknown communicator " + std::to_string(c));
            rs.calls = ri.calls;
            for (const auto& q : ri.requests)
            {
                Request copy = q;
                if (copy.drained && copy.state == RequestState::pending)
                    fail(ErrorKind::load_error, "drained request recorded as pending");
                rs.requests[copy.id] = copy;
            }
            if (sim.config_.algorithm == Algorithm::cc)
            {
                for (const auto& [g, v] : ri.clock.entries())
                    rs.cc.clock.restore(g, v);
                rs.cc.incomplete_requests = ri.incomplete_requests;
                for (RequestId id : rs.cc.incomplete_requests)
                    if (!rs.requests.count(id))
                        fail(ErrorKind::load_error, "incomplete request " + std::to_string(id) + " missing");
            }
            rs.tpc.aborted_barrier_log = ri.aborted_barrier_log;
        }
        sim.step_ = image.step + 1;
        sim.first_step_ = sim.step_;
        return sim;
    }

    const CommInfo& Simulation::comm(CommId id) const
    {
        auto it = comm_table_->find(id);
        if (it == comm_table_->end())
            fail(ErrorKind::invalid_configuration, "unknown communicator " + std::to_string(id));
        return it->second;
    }

    CommId Simulation::comm_parent(const Op& op) const { return comm(op.comm).decl.parent; }

    int Simulation::local_rank(CommId c, WorldRank r) const
    {
        const int lr = comm(c).decl.local_rank_of(r);
        if (lr < 0)
            fail(ErrorKind::internal_invariant,
                 "rank " + std::to_string(r) + " is not a member of communicator " + std::to_string(c));
        return lr;
    }

    const Op& Simulation::current_op(const RankState& rs) const
    {
        return scenario_->programs[static_cast<std::size_t>(rs.rank)].at(rs.pc);
    }

    bool Simulation::completed() const noexcept
    {
        return std::all_of(ranks_.begin(), ranks_.end(), [](const RankState& rs) { return rs.phase == Phase::done; });
    }

    std::uint64_t Simulation::global_checksum() const noexcept
    {
        std::uint64_t sum = 0;
        for (const auto& rs : ranks_)
            sum += rs.checksum();
        return sum;
    }

    bool Simulation::marks_held() const noexcept
    {
        return config_.placement.kind == CheckpointPlacement::Kind::at_marks && !fired_;
    }

    bool Simulation::wrapped(const Op& op) const noexcept
    {
        if (op.type == OpType::comm_create)
            return config_.cc.count_comm_create;
        return op.type == OpType::collective || op.type == OpType::icollective || op.is_completion();
    }

    bool Simulation::at_probe_point(const RankState& rs) const
    {
        switch (rs.phase)
        {
        case Phase::done:
        case Phase::finish_commit:
            return true;
        case Phase::ready:
            return wrapped(current_op(rs));
        default:
            return false;
        }
    }

    bool Simulation::parked(const RankState& rs) const
    {
        return config_.algorithm == Algorithm::cc && at_probe_point(rs) && must_wait_for_updates(rs.cc, rs.rank);
    }

    bool Simulation::reached(const RankState& rs) const
    {
        switch (config_.algorithm)
        {
        case Algorithm::cc:
            return rs.cc.ckpt_pending && reached_all_targets(rs.cc.clock, rs.cc.targets, rs.rank) &&
                   (at_probe_point(rs) || rs.phase == Phase::posted);
        case Algorithm::tpc:
            if (!rs.tpc.ckpt_pending)
                return false;
            switch (rs.phase)
            {
            case Phase::done:
            case Phase::posted:
                return true;
            case Phase::ready:
                return current_op(rs).is_blocking_collective();
            case Phase::in_barrier:
                return !engine_.is_complete(rs.current);
            default:
                return false;
            }
        case Algorithm::none:
            return false;
        }
        return false;
    }

    bool Simulation::rank_enabled(const RankState& rs) const
    {
        if (parked(rs))
            return !mailboxes_[static_cast<std::size_t>(rs.rank)].empty();
        switch (rs.phase)
        {
        case Phase::done:
        case Phase::posted:
            return false;
        case Phase::ready: {
            const Op& op = current_op(rs);
            if (op.type == OpType::mark)
                return !marks_held();
            if (config_.algorithm == Algorithm::tpc && rs.tpc.ckpt_pending && op.is_blocking_collective())
                return false;
            return true;
        }
        case Phase::in_barrier:
        case Phase::inside:
            return engine_.is_complete(rs.current);
        case Phase::finish_commit:
            return true;
        case Phase::in_wait:
            return completion_ready(rs, current_op(rs));
        }
        return false;
    }

    std::vector<int> Simulation::choices() const
    {
        if (stopped_)
            return {};
        if (coordinator_.active())
        {
            const auto& round = coordinator_.round();
            if (!round.declared && round.ledger.quiescent())
                return {kCoordinatorActor};
        }
        using K = CheckpointPlacement::Kind;
        const auto kind = config_.placement.kind;
        if (!fired_ && kind == K::at_step && step_ >= config_.placement.step)
            return {kCoordinatorActor};

        std::vector<int> out;
        for (const auto& rs : ranks_)
            if (rank_enabled(rs))
                out.push_back(rs.rank);
        if (!fired_ && kind != K::none)
        {
            if (out.empty())
                out.push_back(kCoordinatorActor);
            else if (kind == K::explore)
                out.insert(out.begin(), kCoordinatorActor);
        }
        return out;
    }

    void Simulation::execute(int actor)
    {
        if (actor == kCoordinatorActor)
            coordinator_step();
        else
        {
            if (actor < 0 || static_cast<std::size_t>(actor) >= ranks_.size())
                fail(ErrorKind::internal_invariant, "scheduler picked unknown actor " + std::to_string(actor));
            auto& rs = ranks_[static_cast<std::size_t>(actor)];
            if (!rank_enabled(rs))
                fail(ErrorKind::internal_invariant, "rank " + std::to_string(actor) + " is not enabled");
            rank_step(rs);
        }
        ++step_;
        refresh_quiescence();
        if (observer_)
            observer_(*this);
    }

    void Simulation::run()
    {
        for (;;)
        {
            if (step_ - first_step_ >= config_.max_steps)
                fail(ErrorKind::internal_invariant, "step limit exceeded");
            const auto c = choices();
            if (c.empty())
                break;
            execute(scheduler_.choose(c));
        }
        finish();
    }

    void Simulation::finish() const
    {
        if (stopped_ || completed())
            return;
        std::string blocked;
        bool all_p2p = true;
        for (const auto& rs : ranks_)
        {
            if (rs.phase == Phase::done)
                continue;
            if (rs.phase != Phase::posted)
                all_p2p = false;
            if (!blocked.empty())
                blocked += ", ";
            blocked += "rank " + std::to_string(rs.rank) + " (" + std::string(to_string(rs.phase)) + " at op " +
                       std::to_string(rs.pc) + ")";
        }
        if (coordinator_.active() && !coordinator_.round().declared)
            blocked += "; checkpoint round " + std::to_string(coordinator_.round().id) + " never reached a safe state";
        if (all_p2p)
            fail(ErrorKind::stuck_p2p, "unmatched point-to-point at end of run: " + blocked);
        fail(ErrorKind::deadlock, "no enabled event; blocked: " + blocked);
    }

    void Simulation::emit(WorldRank rank, EventType type, nlohmann::json detail)
    {
        trace_.append(TraceEvent{step_, rank, type, std::move(detail)});
    }

    // ---- rank steps ---------------------------------------------------------

    void Simulation::rank_step(RankState& rs)
    {
        if (parked(rs))
        {
            receive_updates(rs);
            return;
        }
        switch (rs.phase)
        {
        case Phase::ready:
            start_op(rs);
            break;
        case Phase::in_barrier:
            leave_trivial_barrier(rs);
            break;
        case Phase::inside:
            return_from_collective(rs);
            break;
        case Phase::finish_commit:
            emit(rs.rank, EventType::commit_finish);
            advance(rs);
            break;
        case Phase::in_wait:
            complete_wait(rs, current_op(rs));
            break;
        case Phase::posted:
        case Phase::done:
            fail(ErrorKind::internal_invariant, "blocked rank stepped");
        }
    }

    void Simulation::advance(RankState& rs)
    {
        ++rs.pc;
        rs.ticks_done = 0;
        rs.phase = Phase::ready;
        if (rs.pc == scenario_->programs[static_cast<std::size_t>(rs.rank)].size())
        {
            rs.phase = Phase::done;
            emit(rs.rank, EventType::finish);
        }
    }

    void Simulation::start_op(RankState& rs)
    {
        const Op& op = current_op(rs);
        switch (op.type)
        {
        case OpType::comm_create:
        case OpType::collective:
            if (config_.algorithm == Algorithm::tpc)
                enter_trivial_barrier(rs, op);
            else
                enter_collective(rs, op);
            break;
        case OpType::icollective:
            init_nonblocking(rs, op);
            break;
        case OpType::test:
            do_test(rs, op);
            break;
        case OpType::wait:
        case OpType::waitall:
        case OpType::waitany:
            if (config_.algorithm == Algorithm::cc)
                ++counters_.wrapper_invocations;
            if (completion_ready(rs, op))
                complete_wait(rs, op);
            else
            {
                rs.phase = Phase::in_wait;
                emit(rs.rank, EventType::wait_block, {{"requests", op.requests}});
            }
            break;
        case OpType::send:
        case OpType::recv:
            post_p2p(rs, op);
            break;
        case OpType::compute:
            if (++rs.ticks_done >= std::max(1, op.ticks))
            {
                emit(rs.rank, EventType::compute, {{"ticks", op.ticks}});
                advance(rs);
            }
            break;
        case OpType::mark:
            emit(rs.rank, EventType::mark);
            advance(rs);
            break;
        }
    }

    CallShape Simulation::shape_of(const Op& op) const
    {
        CallShape s;
        s.op = op.type;
        if (op.type == OpType::comm_create)
        {
            s.kind = CollectiveKind{};
            s.created = op.comm;
            if (op.data)
                s.subset.assign(op.data->begin(), op.data->end());
            else
            {
                const auto& parent = comm(comm_parent(op)).decl;
                for (WorldRank m : comm(op.comm).decl.members)
                    s.subset.push_back(parent.local_rank_of(m));
            }
        }
        else
        {
            s.kind = op.kind;
            if (!s.kind.has_root())
                s.kind.root = 0;
        }
        return s;
    }

    void Simulation::enter_trivial_barrier(RankState& rs, const Op& op)
    {
        const CommId c = target_comm(op);
        const InstanceId id{c, rs.calls[c], true};
        auto& log = rs.tpc.aborted_barrier_log;
        auto it = std::find(log.begin(), log.end(), AbortRecord{id.comm, id.index});
        if (it != log.end())
        {
            log.erase(it);
            emit(rs.rank, EventType::barrier_reenter, instance_json(id));
        }
        CallShape shape;
        shape.op = OpType::collective;
        shape.trivial_barrier = true;
        const auto& members = comm(c).decl.members;
        ++counters_.wrapper_invocations;
        const bool complete = engine_.arrive(id, shape, members, local_rank(c, rs.rank), {});
        rs.tpc.in_trivial_barrier = true;
        rs.phase = Phase::in_barrier;
        rs.current = id;
        emit(rs.rank, EventType::barrier_enter, instance_json(id));
        if (complete)
        {
            counters_.barrier_messages += barrier_cost(members.size());
            emit(rs.rank, EventType::barrier_complete, instance_json(id));
        }
    }

    void Simulation::leave_trivial_barrier(RankState& rs)
    {
        engine_.release(rs.current, local_rank(rs.current.comm, rs.rank));
        rs.tpc.in_trivial_barrier = false;
        enter_collective(rs, current_op(rs));
    }

    void Simulation::begin_wrapped(RankState& rs, CommId c)
    {
        ++counters_.wrapper_invocations;
        if (coordinator_.active() && !coordinator_.round().declared)
            ++coordinator_.round().collectives_during_round;
        send_updates(rs.rank, commit_begin(rs.cc, comm(c).group, rs.rank));
    }

    void Simulation::after_wrapped(RankState& rs)
    {
        if (must_wait_for_updates(rs.cc, rs.rank))
            rs.phase = Phase::finish_commit;
        else
            advance(rs);
    }

    void Simulation::enter_collective(RankState& rs, const Op& op)
    {
        const CommId c = target_comm(op);
        const InstanceId id{c, rs.calls[c]++, false};
        const bool cc_wrapped = config_.algorithm == Algorithm::cc && wrapped(op);
        if (cc_wrapped)
            begin_wrapped(rs, c);
        else if (config_.algorithm == Algorithm::tpc && coordinator_.active() && !coordinator_.round().declared)
            ++coordinator_.round().collectives_during_round;
        Payload input = op.type == OpType::comm_create ? Payload{} : (op.data ? *op.data : rs.buffer);
        const auto& members = comm(c).decl.members;
        const bool complete = engine_.arrive(id, shape_of(op), members, local_rank(c, rs.rank), std::move(input));
        rs.phase = Phase::inside;
        rs.current = id;
        json detail = instance_json(id);
        detail["group"] = comm(c).group;
        detail["op"] = std::string(to_string(op.type));
        if (op.type == OpType::collective)
            detail["kind"] = std::string(to_string(op.kind.type));
        if (cc_wrapped)
            detail["seq"] = rs.cc.clock.seq(comm(c).group);
        emit(rs.rank, EventType::coll_enter, std::move(detail));
        if (complete)
        {
            ++counters_.blocking_collectives;
            counters_.collective_messages += op.type == OpType::comm_create
                                                 ? comm_create_cost(members.size())
                                                 : collective_cost(op.kind.type, members.size());
        }
    }

    void Simulation::return_from_collective(RankState& rs)
    {
        const Op& op = current_op(rs);
        const InstanceId id = rs.current;
        auto out = engine_.release(id, local_rank(id.comm, rs.rank));
        if (out)
        {
            rs.buffer = *out;
            rs.digest = hash_combine(rs.digest, hash_payload(*out));
        }
        else
            rs.digest = hash_combine(rs.digest, 0x5bd1e995ULL);
        if (op.type == OpType::comm_create && comm(op.comm).decl.local_rank_of(rs.rank) >= 0)
        {
            rs.comms.insert(op.comm);
            if (config_.algorithm == Algorithm::cc)
                rs.cc.clock.observe(comm(op.comm).group);
        }
        emit(rs.rank, EventType::coll_return, instance_json(id));
        if (config_.algorithm == Algorithm::cc && wrapped(op))
            after_wrapped(rs);
        else
            advance(rs);
    }

    void Simulation::init_nonblocking(RankState& rs, const Op& op)
    {
        const CommId c = op.comm;
        const InstanceId id{c, rs.calls[c]++, false};
        const RequestId rid = op.requests.front();
        if (config_.algorithm == Algorithm::cc)
        {
            begin_wrapped(rs, c);
            register_request(rs.cc, rid);
        }
        rs.requests[rid] = Request{rid, id, RequestState::pending, std::nullopt, false};
        Payload input = op.data ? *op.data : rs.buffer;
        const auto& members = comm(c).decl.members;
        const bool complete = engine_.arrive(id, shape_of(op), members, local_rank(c, rs.rank), std::move(input), rid);
        json detail = instance_json(id);
        detail["group"] = comm(c).group;
        detail["request"] = rid;
        detail["kind"] = std::string(to_string(op.kind.type));
        if (config_.algorithm == Algorithm::cc)
            detail["seq"] = rs.cc.clock.seq(comm(c).group);
        emit(rs.rank, EventType::icoll_init, std::move(detail));
        if (complete)
            complete_nonblocking(id);
        if (config_.algorithm == Algorithm::cc)
            after_wrapped(rs);
        else
            advance(rs);
    }

    void Simulation::complete_nonblocking(const InstanceId& id)
    {
        const Instance inst = *engine_.find(id);
        counters_.collective_messages += collective_cost(inst.shape.kind.type, inst.members.size());
        for (std::size_t i = 0; i < inst.members.size(); ++i)
        {
            auto out = engine_.release(id, static_cast<int>(i));
            auto& q = ranks_[static_cast<std::size_t>(inst.members[i])].requests.at(inst.requests[i]);
            q.state = RequestState::globally_complete;
            q.payload = std::move(out);
        }
        emit(inst.members.back(), EventType::icoll_complete, instance_json(id));
    }

    void Simulation::consume(RankState& rs, RequestId id)
    {
        Request& q = rs.requests.at(id);
        if (q.state == RequestState::consumed)
            return;
        if (q.state == RequestState::pending)
            fail(ErrorKind::internal_invariant, "consuming a pending request");
        q.state = RequestState::consumed;
        rs.request_fold +=
            mix64(hash_combine(static_cast<std::uint64_t>(id), q.payload ? hash_payload(*q.payload) : 0x7e57ULL));
        if (config_.algorithm == Algorithm::cc)
            on_request_consumed(rs.cc, id);
    }

    void Simulation::do_test(RankState& rs, const Op& op)
    {
        if (config_.algorithm == Algorithm::cc)
            ++counters_.wrapper_invocations;
        const RequestId id = op.requests.front();
        const bool flag = rs.requests.at(id).completable();
        if (flag)
            consume(rs, id);
        emit(rs.rank, EventType::req_test, {{"request", id}, {"flag", flag}});
        advance(rs);
    }

    bool Simulation::completion_ready(const RankState& rs, const Op& op) const
    {
        if (op.type == OpType::waitany)
        {
            bool any_active = false;
            for (RequestId id : op.requests)
            {
                const auto& q = rs.requests.at(id);
                if (q.state == RequestState::consumed)
                    continue;
                any_active = true;
                if (q.state == RequestState::globally_complete)
                    return true;
            }
            return !any_active;
        }
        return std::all_of(op.requests.begin(), op.requests.end(),
                           [&](RequestId id) { return rs.requests.at(id).completable(); });
    }

    void Simulation::complete_wait(RankState& rs, const Op& op)
    {
        json consumed = json::array();
        if (op.type == OpType::waitany)
        {
            for (RequestId id : op.requests)
                if (rs.requests.at(id).state == RequestState::globally_complete)
                {
                    consume(rs, id);
                    consumed.push_back(id);
                    break;
                }
        }
        else
        {
            for (RequestId id : op.requests)
            {
                if (rs.requests.at(id).state != RequestState::consumed)
                    consumed.push_back(id);
                consume(rs, id);
            }
        }
        emit(rs.rank, EventType::req_complete, {{"requests", consumed}});
        advance(rs);
    }

    void Simulation::deliver(RankState& rs, const Payload& data)
    {
        rs.buffer = data;
        rs.digest = hash_combine(rs.digest, hash_payload(data));
    }

    void Simulation::post_p2p(RankState& rs, const Op& op)
    {
        const WorldRank peer = comm(op.comm).decl.members.at(static_cast<std::size_t>(op.peer));
        const bool is_send = op.type == OpType::send;
        const P2pKey key{is_send ? rs.rank : peer, is_send ? peer : rs.rank, op.tag, op.comm};
        json detail = {{"src", key.src}, {"dst", key.dst}, {"tag", key.tag}, {"comm", key.comm}};
        auto match = is_send ? p2p_.post_send(key, op.data ? *op.data : rs.buffer) : p2p_.post_recv(key);
        if (!match)
        {
            rs.phase = Phase::posted;
            emit(rs.rank, EventType::p2p_post, std::move(detail));
            return;
        }
        ++counters_.p2p_messages;
        auto& other = ranks_[static_cast<std::size_t>(match->waiting_rank)];
        deliver(is_send ? other : rs, match->data);
        emit(rs.rank, EventType::p2p_match, std::move(detail));
        advance(other);
        advance(rs);
    }

    // ---- protocol traffic ---------------------------------------------------

    void Simulation::send_updates(WorldRank origin, const std::vector<OutgoingUpdate>& out)
    {
        for (const auto& u : out)
        {
            mailboxes_[static_cast<std::size_t>(u.dest)].push_back(u.msg);
            ++counters_.target_updates;
            if (coordinator_.active())
                ++coordinator_.round().updates_during_round;
            json detail = u.msg.to_json();
            detail["dest"] = u.dest;
            emit(origin, EventType::update_send, std::move(detail));
        }
    }

    void Simulation::receive_updates(RankState& rs)
    {
        auto& box = mailboxes_[static_cast<std::size_t>(rs.rank)];
        std::vector<TargetUpdateMsg> msgs(box.begin(), box.end());
        box.clear();
        const auto outcome = apply_target_updates(rs.cc, msgs);
        counters_.stale_updates += outcome.stale;
        for (const auto& m : msgs)
            emit(rs.rank, EventType::update_recv, m.to_json());
        if (rs.phase == Phase::done)
            for (const auto& g : outcome.raised)
                if (g.contains(rs.rank))
                    fail(ErrorKind::protocol_violation, "finished rank " + std::to_string(rs.rank) +
                                                            " received a raised target for its group " +
                                                            g.to_string());
    }

    // ---- coordinator --------------------------------------------------------

    void Simulation::coordinator_step()
    {
        if (coordinator_.active() && !coordinator_.round().declared && coordinator_.round().ledger.quiescent())
            declare_safe_state();
        else
            request_checkpoint();
    }

    void Simulation::request_checkpoint()
    {
        if (config_.algorithm == Algorithm::none)
            fail(ErrorKind::invalid_configuration, "checkpoint requested without a protocol");
        fired_ = true;
        const int n = scenario_->world_size;
        auto& round = coordinator_.open_round(step_, n);
        if (config_.algorithm == Algorithm::cc)
        {
            for (const auto& rs : ranks_)
                round.store.put_report(rs.rank, rs.cc.clock.entries());
            round.initial_targets = compute_targets(round.store, n);
        }
        for (auto& rs : ranks_)
        {
            if (config_.algorithm == Algorithm::cc)
            {
                rs.cc.ckpt_pending = true;
                rs.cc.targets.clear();
                for (const auto& [g, t] : round.initial_targets)
                    rs.cc.targets.set(g, t);
            }
            else
                rs.tpc.ckpt_pending = true;
        }
        emit(kCoordinatorActor, EventType::ckpt_request,
             {{"round", round.id}, {"targets", targets_to_json(round.initial_targets)}});
    }

    void Simulation::refresh_quiescence()
    {
        if (!coordinator_.active() || coordinator_.round().declared || stopped_)
            return;
        auto& ledger = coordinator_.round().ledger;
        for (const auto& rs : ranks_)
        {
            const auto status = reached(rs) ? RankStatus::reached : RankStatus::running;
            const auto prev = ledger.status(rs.rank);
            if (status != prev || ledger.sent(rs.rank) != rs.cc.updates_sent ||
                ledger.received(rs.rank) != rs.cc.updates_received)
            {
                ledger.report(rs.rank, status, rs.cc.updates_sent, rs.cc.updates_received);
                if (status != prev)
                    emit(rs.rank, status == RankStatus::reached ? EventType::park : EventType::resume);
            }
        }
    }

    void Simulation::declare_safe_state()
    {
        auto& round = coordinator_.round();
        emit(kCoordinatorActor, EventType::safe_state, {{"round", round.id}});

        if (config_.algorithm == Algorithm::tpc)
        {
            std::vector<InstanceId> partial;
            for (const auto& [id, inst] : engine_.live())
            {
                if (!id.trivial_barrier || inst.complete)
                    fail(ErrorKind::internal_invariant,
                         "collective #" + std::to_string(id.index) + " on comm " + std::to_string(id.comm) +
                             " still in progress at safe state");
                partial.push_back(id);
            }
            for (const auto& id : partial)
            {
                const Instance inst = *engine_.find(id);
                std::vector<bool> entered;
                for (const auto& in : inst.inputs)
                    entered.push_back(in.has_value());
                if (tpc_safe_state_decision(entered) != TpcDecision::abort_and_checkpoint)
                    fail(ErrorKind::internal_invariant, "complete trivial barrier left at safe state");
                for (int lr : engine_.abort(id))
                {
                    auto& rs = ranks_[static_cast<std::size_t>(inst.members[static_cast<std::size_t>(lr)])];
                    rs.tpc.aborted_barrier_log.push_back(AbortRecord{id.comm, id.index});
                    rs.tpc.in_trivial_barrier = false;
                    rs.phase = Phase::ready;
                    emit(rs.rank, EventType::barrier_abort, instance_json(id));
                }
            }
        }
        else
        {
            for (auto& rs : ranks_)
            {
                if (!mailboxes_[static_cast<std::size_t>(rs.rank)].empty())
                    fail(ErrorKind::internal_invariant, "target update in flight at safe state");
                const auto drained = drain_incomplete_requests(
                    rs.cc, [&](RequestId id) { return rs.requests.at(id).completable(); });
                for (RequestId id : drained)
                    rs.requests.at(id).drained = true;
                if (!drained.empty())
                    emit(rs.rank, EventType::drain, {{"requests", drained}});
            }
            std::map<GroupKey, std::uint64_t> finals;
            for (const auto& rs : ranks_)
                for (const auto& [g, t] : rs.cc.targets.entries())
                    finals[g] = std::max(finals[g], t);
            round.final_targets = std::move(finals);
        }

        round.declared = true;
        round.safe_step = step_;
        snapshots_.push_back(build_snapshot());
        emit(kCoordinatorActor, EventType::snapshot, {{"round", round.id}, {"step", step_}});
        if (config_.stop_after_snapshot)
        {
            stopped_ = true;
            coordinator_.close_round();
            return;
        }
        for (auto& rs : ranks_)
        {
            rs.cc.ckpt_pending = false;
            rs.cc.targets.clear();
            rs.tpc.ckpt_pending = false;
        }
        emit(kCoordinatorActor, EventType::release, {{"round", round.id}});
        coordinator_.close_round();
    }

    SnapshotImage Simulation::build_snapshot() const
    {
        SnapshotImage img;
        img.algorithm = std::string(to_string(config_.algorithm));
        img.seed = config_.seed;
        img.step = step_;
        img.round = coordinator_.round().id;
        img.scenario = *scenario_;
        for (const auto& [id, info] : *comm_table_)
            img.communicators.push_back(info.decl);
        img.targets = coordinator_.round().final_targets;
        for (const auto& rs : ranks_)
        {
            RankImage ri;
            ri.rank = rs.rank;
            switch (rs.phase)
            {
            case Phase::done:
            case Phase::ready:
                ri.pc = rs.pc;
                break;
            case Phase::finish_commit:
                ri.pc = rs.pc + 1;
                break;
            case Phase::posted:
                ri.pc = rs.pc;
                ri.reposts_p2p = true;
                break;
            default:
                fail(ErrorKind::internal_invariant, "rank " + std::to_string(rs.rank) + " is " +
                                                        std::string(to_string(rs.phase)) + " at the safe state");
            }
            if (rs.ticks_done != 0)
                fail(ErrorKind::internal_invariant, "rank captured mid-compute");
            ri.buffer = rs.buffer;
            ri.digest = rs.digest;
            ri.request_fold = rs.request_fold;
            ri.comms.assign(rs.comms.begin(), rs.comms.end());
            ri.calls = rs.calls;
            ri.clock = rs.cc.clock;
            ri.incomplete_requests = rs.cc.incomplete_requests;
            for (const auto& [id, q] : rs.requests)
                ri.requests.push_back(q);
            ri.aborted_barrier_log = rs.tpc.aborted_barrier_log;
            img.ranks.push_back(std::move(ri));
        }
        return img;
    }

    StateHash Simulation::state_hash() const
    {
        Hasher h;
        h.add(fired_);
        h.add(stopped_);
        for (const auto& rs : ranks_)
        {
            h.add(rs.pc);
            h.add(static_cast<std::uint64_t>(rs.phase));
            h.add(static_cast<std::uint64_t>(rs.ticks_done));
            h.add(hash_payload(rs.buffer));
            h.add(rs.digest);
            h.add(rs.request_fold);
            h.add(rs.calls.size());
            for (const auto& [c, n] : rs.calls)
            {
                h.add(static_cast<std::uint64_t>(c));
                h.add(n);
            }
            h.add(rs.comms.size());
            for (CommId c : rs.comms)
                h.add(static_cast<std::uint64_t>(c));
            h.add(rs.requests.size());
            for (const auto& [id, q] : rs.requests)
            {
                h.add(static_cast<std::uint64_t>(id));
                h.add(static_cast<std::uint64_t>(q.state));
                h.add_payload(q.payload);
                h.add(q.drained);
            }
            h.add(static_cast<std::uint64_t>(rs.current.comm));
            h.add(rs.current.index);
            h.add(rs.current.trivial_barrier);
            h.add(rs.cc.clock.entries().size());
            for (const auto& [g, v] : rs.cc.clock.entries())
            {
                h.add_group(g);
                h.add(v);
            }
            h.add(rs.cc.targets.entries().size());
            for (const auto& [g, v] : rs.cc.targets.entries())
            {
                h.add_group(g);
                h.add(v);
            }
            h.add(rs.cc.ckpt_pending);
            h.add(rs.cc.incomplete_requests.size());
            for (RequestId id : rs.cc.incomplete_requests)
                h.add(static_cast<std::uint64_t>(id));
            h.add(rs.cc.updates_sent);
            h.add(rs.cc.updates_received);
            h.add(rs.tpc.ckpt_pending);
            h.add(rs.tpc.in_trivial_barrier);
            h.add(rs.tpc.aborted_barrier_log.size());
            for (const auto& a : rs.tpc.aborted_barrier_log)
            {
                h.add(static_cast<std::uint64_t>(a.comm));
                h.add(a.index);
            }
            const auto& box = mailboxes_[static_cast<std::size_t>(rs.rank)];
            h.add(box.size());
            for (const auto& m : box)
            {
                h.add_group(m.ggid);
                h.add(m.new_target);
                h.add(static_cast<std::uint64_t>(m.origin));
            }
        }
        h.add(engine_.live().size());
        for (const auto& [id, inst] : engine_.live())
        {
            h.add(static_cast<std::uint64_t>(id.comm));
            h.add(id.index);
            h.add(id.trivial_barrier);
            for (const auto& in : inst.inputs)
                h.add_payload(in);
            for (std::size_t i = 0; i < inst.released.size(); ++i)
                h.add(inst.released[i]);
            h.add(inst.complete);
        }
        h.add(p2p_.pending());
        h.add(coordinator_.active());
        h.add(coordinator_.rounds_opened());
        if (coordinator_.active())
        {
            const auto& round = coordinator_.round();
            h.add(round.declared);
            for (std::size_t r = 0; r < round.ledger.size(); ++r)
            {
                const auto wr = static_cast<WorldRank>(r);
                h.add(static_cast<std::uint64_t>(round.ledger.status(wr)));
                h.add(round.ledger.sent(wr));
                h.add(round.ledger.received(wr));
            }
        }
        return {h.a, h.b};
    }
} // namespace ccsim
