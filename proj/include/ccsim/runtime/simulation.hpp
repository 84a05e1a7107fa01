#pragma once

#include "ccsim/coordinator/coordinator.hpp"
#include "ccsim/coordinator/snapshot.hpp"
#include "ccsim/protocol/cc.hpp"
#include "ccsim/protocol/tpc.hpp"
#include "ccsim/runtime/collective_engine.hpp"
#include "ccsim/runtime/p2p.hpp"
#include "ccsim/runtime/request.hpp"
#include "ccsim/runtime/scenario.hpp"
#include "ccsim/runtime/scheduler.hpp"
#include "ccsim/runtime/trace.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace ccsim
{
    enum class Algorithm
    {
        none,
        cc,
        tpc,
    };

    std::string_view to_string(Algorithm a) noexcept; // "none", "cc", "2pc"
    Algorithm algorithm_from_string(std::string_view s);

    struct CheckpointPlacement
    {
        enum class Kind
        {
            none,
            at_step,  // request once the scheduler reaches `step` (or at the end if it never does)
            at_marks, // hold mark ops; request once no rank can move
            explore,  // request offered as a scheduler choice at every state (exhaustive mode)
        };
        Kind kind = Kind::none;
        std::uint64_t step = 0;

        static CheckpointPlacement none() { return {}; }
        static CheckpointPlacement at_step(std::uint64_t s) { return {Kind::at_step, s}; }
        static CheckpointPlacement at_marks() { return {Kind::at_marks, 0}; }
        static CheckpointPlacement explore() { return {Kind::explore, 0}; }

        /// "none", "step:N", "marks", "explore".
        std::string describe() const;
        static CheckpointPlacement parse(std::string_view s);

        friend bool operator==(const CheckpointPlacement&, const CheckpointPlacement&) = default;
    };

    struct SimConfig
    {
        Algorithm algorithm = Algorithm::none;
        std::uint64_t seed = 0;
        SchedulerMode mode = SchedulerMode::random;
        std::vector<int> fixed_trace;
        CheckpointPlacement placement;
        bool stop_after_snapshot = false;
        CcOptions cc;
        std::uint64_t max_steps = 50'000'000;
    };

    enum class Phase
    {
        ready,         // about to start program[pc]
        in_barrier,    // two-phase commit trivial barrier entered
        inside,        // inside the real blocking collective
        finish_commit, // returned from a wrapped call, commit_finish pending
        in_wait,       // blocked in wait/waitall/waitany
        posted,        // blocked in an unmatched send or recv
        done,
    };

    std::string_view to_string(Phase p) noexcept;

    struct RankState
    {
        WorldRank rank = 0;
        std::size_t pc = 0;
        Phase phase = Phase::ready;
        int ticks_done = 0;
        Payload buffer;
        std::uint64_t digest = 0;       // order-dependent fold of blocking results
        std::uint64_t request_fold = 0; // order-independent fold of consumed request payloads
        std::map<CommId, std::uint64_t> calls; // collective calls issued per communicator
        std::set<CommId> comms;                // communicators this rank holds
        std::map<RequestId, Request> requests;
        InstanceId current;
        CcState cc;
        TpcState tpc;

        /// Final application checksum of this rank.
        std::uint64_t checksum() const noexcept;

        friend bool operator==(const RankState&, const RankState&) = default;
    };

    /// Exact message accounting; see cost_model.hpp.
    struct SimCounters
    {
        std::uint64_t p2p_messages = 0;
        std::uint64_t collective_messages = 0;
        std::uint64_t target_updates = 0;
        std::uint64_t stale_updates = 0;
        std::uint64_t barrier_messages = 0;
        std::uint64_t wrapper_invocations = 0;
        std::uint64_t blocking_collectives = 0; // real blocking calls completed (instances)

        std::uint64_t app_messages() const noexcept { return p2p_messages + collective_messages; }
        std::uint64_t protocol_messages() const noexcept { return target_updates + barrier_messages; }

        friend bool operator==(const SimCounters&, const SimCounters&) = default;
    };

    /// Resolved communicator: declaration plus its group identity.
    struct CommInfo
    {
        CommDecl decl;
        GroupKey group;
    };

    using StateHash = std::pair<std::uint64_t, std::uint64_t>;

    /// The whole simulated world: ranks, runtime engines, protocol state and
    /// the checkpoint coordinator, advanced one actor step at a time. Copying
    /// a Simulation forks the world (the trace prefix is shared).
    class Simulation
    {
    public:
        Simulation(std::shared_ptr<const ScenarioProgram> scenario, SimConfig config);

        /// Rebuilds a world from a snapshot. The algorithm must match the image.
        static Simulation restart(const SnapshotImage& image, SimConfig config);

        /// Actors that may move now, ascending; the coordinator is -1. A
        /// forced coordinator action is returned alone. Empty means terminal.
        std::vector<int> choices() const;
        void execute(int actor);

        /// Runs with the configured scheduler until terminal, then classifies
        /// the end state (see finish()).
        void run();

        /// At a terminal state: returns normally if every rank finished or the
        /// run stopped after its snapshot; otherwise throws deadlock or stuck_p2p.
        void finish() const;

        bool stopped() const noexcept { return stopped_; }
        bool completed() const noexcept;

        const ScenarioProgram& scenario() const noexcept { return *scenario_; }
        std::shared_ptr<const ScenarioProgram> scenario_ptr() const noexcept { return scenario_; }
        const SimConfig& config() const noexcept { return config_; }
        const std::vector<RankState>& ranks() const noexcept { return ranks_; }
        const RankState& rank(WorldRank r) const { return ranks_.at(static_cast<std::size_t>(r)); }
        const CollectiveEngine& engine() const noexcept { return engine_; }
        const P2pEngine& p2p() const noexcept { return p2p_; }
        const Coordinator& coordinator() const noexcept { return coordinator_; }
        const std::vector<std::deque<TargetUpdateMsg>>& mailboxes() const noexcept { return mailboxes_; }
        const RunTrace& trace() const noexcept { return trace_; }
        const std::vector<SnapshotImage>& snapshots() const noexcept { return snapshots_; }
        const SimCounters& counters() const noexcept { return counters_; }
        std::uint64_t step() const noexcept { return step_; }
        std::uint64_t first_step() const noexcept { return first_step_; }
        const CommInfo& comm(CommId id) const;
        const std::map<CommId, CommInfo>& comm_table() const noexcept { return *comm_table_; }
        bool checkpoint_fired() const noexcept { return fired_; }

        std::uint64_t global_checksum() const noexcept;

        /// 128-bit digest of everything that determines future behavior
        /// (counters and the trace excluded).
        StateHash state_hash() const;

        /// Called after every executed step.
        void set_step_observer(std::function<void(const Simulation&)> f) { observer_ = std::move(f); }

    private:
        bool rank_enabled(const RankState& rs) const;
        bool at_probe_point(const RankState& rs) const;
        bool wrapped(const Op& op) const noexcept;
        bool parked(const RankState& rs) const;
        bool reached(const RankState& rs) const;
        bool marks_held() const noexcept;
        const Op& current_op(const RankState& rs) const;
        int local_rank(CommId comm, WorldRank r) const;

        void rank_step(RankState& rs);
        void coordinator_step();
        void request_checkpoint();
        void declare_safe_state();
        SnapshotImage build_snapshot() const;
        void refresh_quiescence();

        void start_op(RankState& rs);
        void enter_trivial_barrier(RankState& rs, const Op& op);
        void leave_trivial_barrier(RankState& rs);
        void enter_collective(RankState& rs, const Op& op);
        void return_from_collective(RankState& rs);
        void init_nonblocking(RankState& rs, const Op& op);
        void complete_nonblocking(const InstanceId& id);
        void do_test(RankState& rs, const Op& op);
        bool completion_ready(const RankState& rs, const Op& op) const;
        void complete_wait(RankState& rs, const Op& op);
        void consume(RankState& rs, RequestId id);
        void post_p2p(RankState& rs, const Op& op);
        void deliver(RankState& rs, const Payload& data);
        void advance(RankState& rs);
        void receive_updates(RankState& rs);
        void send_updates(WorldRank origin, const std::vector<OutgoingUpdate>& out);
        void begin_wrapped(RankState& rs, CommId comm);
        void after_wrapped(RankState& rs);
        CallShape shape_of(const Op& op) const;
        CommId target_comm(const Op& op) const noexcept { return op.type == OpType::comm_create ? comm_parent(op) : op.comm; }
        CommId comm_parent(const Op& op) const;

        void emit(WorldRank rank, EventType type, nlohmann::json detail = nlohmann::json::object());

        std::shared_ptr<const ScenarioProgram> scenario_;
        std::shared_ptr<const std::map<CommId, CommInfo>> comm_table_;
        SimConfig config_;
        Scheduler scheduler_;
        std::vector<RankState> ranks_;
        CollectiveEngine engine_;
        P2pEngine p2p_;
        Coordinator coordinator_;
        std::vector<std::deque<TargetUpdateMsg>> mailboxes_;
        RunTrace trace_;
        std::vector<SnapshotImage> snapshots_;
        SimCounters counters_;
        std::uint64_t step_ = 0;
        std::uint64_t first_step_ = 0;
        bool fired_ = false;
        bool stopped_ = false;
        std::function<void(const Simulation&)> observer_;
    };

    /// Builds the communicator table (WORLD first) for a validated scenario.
    std::map<CommId, CommInfo> build_comm_table(const ScenarioProgram& s);
} // namespace ccsim
