#include "ccsim/runtime/explorer.hpp"

#include <set>

namespace ccsim
{
    namespace
    {
        struct Frame
        {
            Simulation sim;
            std::vector<int> path;
        };

        std::string describe_path(const std::vector<int>& path)
        {
            std::string s = "[";
            for (std::size_t i = 0; i < path.size(); ++i)
            {
                if (i)
                    s += ",";
                s += std::to_string(path[i]);
            }
            return s + "]";
        }
    } // namespace

    ExploreResult explore(const Simulation& initial, const ExploreOptions& options)
    {
        ExploreResult result;
        std::set<StateHash> visited;
        std::vector<Frame> stack;

        auto record = [&](const std::string& what, const std::vector<int>& path) {
            if (result.failures.size() < options.max_failures)
                result.failures.push_back(what + " after choices " + describe_path(path));
        };
        auto visit = [&](Simulation sim, std::vector<int> path) {
            if (!visited.insert(sim.state_hash()).second)
                return;
            ++result.states;
            if (options.on_state)
                if (auto err = options.on_state(sim))
                    record(*err, path);
            stack.push_back(Frame{std::move(sim), std::move(path)});
        };

        visit(initial, {});
        while (!stack.empty() && result.failures.size() < options.max_failures)
        {
            if (result.states >= options.max_states)
            {
                result.truncated = true;
                break;
            }
            Frame frame = std::move(stack.back());
            stack.pop_back();

            std::vector<int> choices;
            try
            {
                choices = frame.sim.choices();
            }
            catch (const SimError& e)
            {
                record(e.what(), frame.path);
                continue;
            }

            if (choices.empty())
            {
                ++result.terminals;
                try
                {
                    frame.sim.finish();
                    if (!frame.sim.snapshots().empty())
                        ++result.snapshots;
                    if (options.on_terminal)
                        if (auto err = options.on_terminal(frame.sim))
                            record(*err, frame.path);
                }
                catch (const SimError& e)
                {
                    record(e.what(), frame.path);
                }
                continue;
            }

            for (std::size_t i = 0; i < choices.size(); ++i)
            {
                const bool last = i + 1 == choices.size();
                Simulation next = last ? std::move(frame.sim) : frame.sim;
                std::vector<int> path = frame.path;
                path.push_back(choices[i]);
                ++result.transitions;
                try
                {
                    next.execute(choices[i]);
                }
                catch (const SimError& e)
                {
                    record(e.what(), path);
                    continue;
                }
                visit(std::move(next), std::move(path));
            }
        }
        return result;
    }
} // namespace ccsim
