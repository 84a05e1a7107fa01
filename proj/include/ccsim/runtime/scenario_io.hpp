#pragma once

#include "ccsim/runtime/scenario.hpp"

#include <istream>
#include <string>

#include "json.hpp"

namespace ccsim
{
    inline constexpr int kScenarioFormatVersion = 1;

    // JSON-lines scenario format, one object per line:
    //   {"format":"ccsim-scenario","version":1,"name":"...","world_size":N}      header, first line
    //   {"decl":"comm","id":C,"parent":P,"members":[world ranks...]}            communicator declaration
    //   {"rank":R,"op":"coll","comm":C,"kind":"reduce","root":0,"reduce":"sum","data":[...]}
    //   {"rank":R,"op":"icoll",...,"request_id":7}
    //   {"rank":R,"op":"waitall","request_id":[1,2,3]}
    //   {"rank":R,"op":"send","comm":C,"peer":1,"tag":0,"data":[5]}
    //   {"rank":R,"op":"compute","ticks":3}
    // Op lines for a rank appear in program order; ranks may interleave.

    nlohmann::json op_to_json(WorldRank rank, const Op& op);
    Op op_from_json(const nlohmann::json& j);

    std::string write_scenario(const ScenarioProgram& s);
    ScenarioProgram read_scenario(std::istream& in);
    ScenarioProgram parse_scenario(const std::string& text);
    ScenarioProgram load_scenario_file(const std::string& path);
    void save_scenario_file(const ScenarioProgram& s, const std::string& path);

    nlohmann::json scenario_to_json(const ScenarioProgram& s);
    ScenarioProgram scenario_from_json(const nlohmann::json& j);
} // namespace ccsim
