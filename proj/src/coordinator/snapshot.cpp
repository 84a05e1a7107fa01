#include "ccsim/coordinator/snapshot.hpp"

#include "ccsim/runtime/scenario_io.hpp"

#include <fstream>
#include <sstream>

namespace ccsim
{
    namespace
    {
        nlohmann::json instance_to_json(const InstanceId& id)
        {
            return {{"comm", id.comm}, {"index", id.index}, {"trivial_barrier", id.trivial_barrier}};
        }

        InstanceId instance_from_json(const nlohmann::json& j)
        {
            return InstanceId{j.at("comm").get<CommId>(), j.at("index").get<std::uint64_t>(),
                              j.value("trivial_barrier", false)};
        }

        nlohmann::json rank_to_json(const RankImage& r)
        {
            nlohmann::json calls = nlohmann::json::array();
            for (const auto& [c, n] : r.calls)
                calls.push_back({{"comm", c}, {"count", n}});
            nlohmann::json reqs = nlohmann::json::array();
            for (const auto& q : r.requests)
            {
                nlohmann::json e{{"id", q.id},
                                 {"instance", instance_to_json(q.instance)},
                                 {"state", to_string(q.state)},
                                 {"drained", q.drained}};
                if (q.payload)
                    e["payload"] = *q.payload;
                reqs.push_back(std::move(e));
            }
            nlohmann::json aborted = nlohmann::json::array();
            for (const auto& a : r.aborted_barrier_log)
                aborted.push_back({{"comm", a.comm}, {"index", a.index}});
            return {{"rank", r.rank},
                    {"pc", r.pc},
                    {"buffer", r.buffer},
                    {"digest", r.digest},
                    {"request_fold", r.request_fold},
                    {"comms", r.comms},
                    {"calls", calls},
                    {"clock", clock_to_json(r.clock)},
                    {"incomplete_requests", r.incomplete_requests},
                    {"requests", reqs},
                    {"aborted_barrier_log", aborted},
                    {"reposts_p2p", r.reposts_p2p}};
        }

        RankImage rank_from_json(const nlohmann::json& j)
        {
            RankImage r;
            r.rank = j.at("rank").get<WorldRank>();
            r.pc = j.at("pc").get<std::size_t>();
            r.buffer = j.at("buffer").get<Payload>();
            r.digest = j.at("digest").get<std::uint64_t>();
            r.request_fold = j.at("request_fold").get<std::uint64_t>();
            r.comms = j.at("comms").get<std::vector<CommId>>();
            for (const auto& c : j.at("calls"))
                r.calls[c.at("comm").get<CommId>()] = c.at("count").get<std::uint64_t>();
            r.clock = clock_from_json(j.at("clock"));
            r.incomplete_requests = j.at("incomplete_requests").get<std::vector<RequestId>>();
            for (const auto& e : j.at("requests"))
            {
                Request q;
                q.id = e.at("id").get<RequestId>();
                q.instance = instance_from_json(e.at("instance"));
                q.state = request_state_from_string(e.at("state").get<std::string>());
                q.drained = e.value("drained", false);
                if (e.contains("payload"))
                    q.payload = e.at("payload").get<Payload>();
                r.requests.push_back(std::move(q));
            }
            for (const auto& a : j.at("aborted_barrier_log"))
                r.aborted_barrier_log.push_back(AbortRecord{a.at("comm").get<CommId>(), a.at("index").get<std::uint64_t>()});
            r.reposts_p2p = j.value("reposts_p2p", false);
            return r;
        }
    } // namespace

    nlohmann::json SnapshotImage::to_json() const
    {
        nlohmann::json comms = nlohmann::json::array();
        for (const auto& d : communicators)
            comms.push_back({{"id", d.id}, {"parent", d.parent}, {"members", d.members}});
        nlohmann::json rs = nlohmann::json::array();
        for (const auto& r : ranks)
            rs.push_back(rank_to_json(r));
        return {{"format", "ccsim-snapshot"},
                {"version", version},
                {"algorithm", algorithm},
                {"seed", seed},
                {"step", step},
                {"round", round},
                {"scenario", scenario_to_json(scenario)},
                {"communicators", comms},
                {"targets", targets_to_json(targets)},
                {"ranks", rs}};
    }

    SnapshotImage SnapshotImage::from_json(const nlohmann::json& j)
    {
        try
        {
            if (j.value("format", "") != "ccsim-snapshot")
                fail(ErrorKind::load_error, "not a ccsim snapshot");
            SnapshotImage img;
            img.version = j.at("version").get<int>();
            if (img.version != kSnapshotFormatVersion)
                fail(ErrorKind::load_error, "unsupported snapshot version " + std::to_string(img.version));
            img.algorithm = j.at("algorithm").get<std::string>();
            img.seed = j.at("seed").get<std::uint64_t>();
            img.step = j.at("step").get<std::uint64_t>();
            img.round = j.at("round").get<std::uint64_t>();
            img.scenario = scenario_from_json(j.at("scenario"));
            for (const auto& c : j.at("communicators"))
                img.communicators.push_back(CommDecl{c.at("id").get<CommId>(), c.at("parent").get<CommId>(),
                                                     c.at("members").get<std::vector<WorldRank>>()});
            img.targets = targets_from_json(j.at("targets"));
            for (const auto& r : j.at("ranks"))
                img.ranks.push_back(rank_from_json(r));

            if (img.ranks.size() != static_cast<std::size_t>(img.scenario.world_size))
                fail(ErrorKind::load_error, "snapshot rank count does not match world size");
            for (std::size_t i = 0; i < img.ranks.size(); ++i)
            {
                const auto& r = img.ranks[i];
                if (r.rank != static_cast<WorldRank>(i))
                    fail(ErrorKind::load_error, "snapshot ranks out of order");
                if (r.pc > img.scenario.programs[i].size())
                    fail(ErrorKind::load_error, "rank " + std::to_string(i) + " pc beyond its program");
            }
            img.scenario.validate();
            return img;
        }
        catch (const nlohmann::json::exception& e)
        {
            fail(ErrorKind::load_error, std::string("snapshot: ") + e.what());
        }
        catch (const SimError& e)
        {
            if (e.kind() == ErrorKind::load_error)
                throw;
            fail(ErrorKind::load_error, std::string("snapshot: ") + e.what());
        }
    }

    SnapshotImage SnapshotImage::parse(const std::string& text)
    {
        nlohmann::json j;
        try
        {
            j = nlohmann::json::parse(text);
        }
        catch (const nlohmann::json::exception& e)
        {
            fail(ErrorKind::load_error, std::string("snapshot: ") + e.what());
        }
        return from_json(j);
    }

    void SnapshotImage::save(const std::string& path) const
    {
        std::ofstream out(path);
        if (!out)
            fail(ErrorKind::load_error, "cannot write " + path);
        out << to_json().dump(1) << '\n';
    }

    SnapshotImage SnapshotImage::load(const std::string& path)
    {
        std::ifstream in(path);
        if (!in)
            fail(ErrorKind::load_error, "cannot open " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }
} // namespace ccsim
