#include "ccsim/runtime/scenario_io.hpp"

#include <fstream>
#include <sstream>

namespace ccsim
{
    nlohmann::json op_to_json(WorldRank rank, const Op& op)
    {
        nlohmann::json j{{"rank", rank}, {"op", to_string(op.type)}};
        switch (op.type)
        {
        case OpType::comm_create:
            j["comm"] = op.comm;
            break;
        case OpType::collective:
        case OpType::icollective:
            j["comm"] = op.comm;
            j["kind"] = to_string(op.kind.type);
            if (op.kind.has_root())
                j["root"] = op.kind.root;
            if (op.kind.has_op())
                j["reduce"] = to_string(op.kind.op);
            break;
        case OpType::send:
        case OpType::recv:
            j["comm"] = op.comm;
            j["peer"] = op.peer;
            j["tag"] = op.tag;
            break;
        case OpType::compute:
            j["ticks"] = op.ticks;
            break;
        default:
            break;
        }
        if (op.data)
            j["data"] = *op.data;
        if (op.type == OpType::icollective || op.type == OpType::test || op.type == OpType::wait)
        {
            if (!op.requests.empty())
                j["request_id"] = op.requests.front();
        }
        else if (op.type == OpType::waitall || op.type == OpType::waitany)
            j["request_id"] = op.requests;
        return j;
    }

    Op op_from_json(const nlohmann::json& j)
    {
        Op op;
        op.type = op_type_from_string(j.at("op").get<std::string>());
        op.comm = j.value("comm", kWorldComm);
        if (j.contains("kind"))
            op.kind.type = collective_type_from_string(j.at("kind").get<std::string>());
        if (op.kind.has_root())
            op.kind.root = j.value("root", 0);
        if (j.contains("reduce"))
            op.kind.op = reduce_op_from_string(j.at("reduce").get<std::string>());
        if (j.contains("data"))
            op.data = j.at("data").get<Payload>();
        op.peer = j.value("peer", -1);
        op.tag = j.value("tag", 0);
        op.ticks = j.value("ticks", 0);
        if (j.contains("request_id"))
        {
            const auto& r = j.at("request_id");
            if (r.is_array())
                op.requests = r.get<std::vector<RequestId>>();
            else
                op.requests = {r.get<RequestId>()};
        }
        if ((op.type == OpType::collective || op.type == OpType::icollective) && !j.contains("kind"))
            fail(ErrorKind::invalid_configuration, "collective op without kind");
        return op;
    }

    nlohmann::json scenario_to_json(const ScenarioProgram& s)
    {
        auto lines = nlohmann::json::array();
        lines.push_back({{"format", "ccsim-scenario"},
                         {"version", kScenarioFormatVersion},
                         {"name", s.name},
                         {"world_size", s.world_size}});
        for (const auto& d : s.comms)
            lines.push_back({{"decl", "comm"}, {"id", d.id}, {"parent", d.parent}, {"members", d.members}});
        for (std::size_t r = 0; r < s.programs.size(); ++r)
            for (const auto& op : s.programs[r])
                lines.push_back(op_to_json(static_cast<WorldRank>(r), op));
        return lines;
    }

    ScenarioProgram scenario_from_json(const nlohmann::json& lines)
    {
        if (!lines.is_array() || lines.empty())
            fail(ErrorKind::load_error, "scenario has no header line");
        const auto& header = lines.front();
        if (header.value("format", "") != "ccsim-scenario")
            fail(ErrorKind::load_error, "first line is not a ccsim-scenario header");
        if (header.value("version", 0) != kScenarioFormatVersion)
            fail(ErrorKind::load_error, "unsupported scenario version");
        ScenarioProgram s = make_scenario(header.value("name", "unnamed"), header.at("world_size").get<int>());
        for (std::size_t i = 1; i < lines.size(); ++i)
        {
            const auto& j = lines[i];
            if (j.contains("decl"))
            {
                if (j.at("decl") != "comm")
                    fail(ErrorKind::load_error, "unknown declaration on line " + std::to_string(i + 1));
                s.comms.push_back(CommDecl{j.at("id").get<CommId>(), j.value("parent", kWorldComm),
                                           j.at("members").get<std::vector<WorldRank>>()});
                continue;
            }
            const auto rank = j.at("rank").get<int>();
            if (rank < 0 || rank >= s.world_size)
                fail(ErrorKind::load_error, "rank out of range on line " + std::to_string(i + 1));
            s.programs[static_cast<std::size_t>(rank)].push_back(op_from_json(j));
        }
        return s;
    }

    std::string write_scenario(const ScenarioProgram& s)
    {
        std::string out;
        for (const auto& line : scenario_to_json(s))
        {
            out += line.dump();
            out += '\n';
        }
        return out;
    }

    ScenarioProgram read_scenario(std::istream& in)
    {
        auto lines = nlohmann::json::array();
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line))
        {
            ++n;
            if (line.find_first_not_of(" \t\r") == std::string::npos)
                continue;
            try
            {
                lines.push_back(nlohmann::json::parse(line));
            }
            catch (const nlohmann::json::exception& e)
            {
                fail(ErrorKind::load_error, "line " + std::to_string(n) + ": " + e.what());
            }
        }
        try
        {
            return scenario_from_json(lines);
        }
        catch (const nlohmann::json::exception& e)
        {
            fail(ErrorKind::load_error, e.what());
        }
    }

    ScenarioProgram parse_scenario(const std::string& text)
    {
        std::istringstream in(text);
        return read_scenario(in);
    }

    ScenarioProgram load_scenario_file(const std::string& path)
    {
        std::ifstream in(path);
        if (!in)
            fail(ErrorKind::load_error, "cannot open " + path);
        return read_scenario(in);
    }

    void save_scenario_file(const ScenarioProgram& s, const std::string& path)
    {
        std::ofstream out(path);
        if (!out)
            fail(ErrorKind::load_error, "cannot write " + path);
        out << write_scenario(s);
    }
} // namespace ccsim
