#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace florafill {

// Allow/disallow rules applicable to one user agent.
struct RobotsRules {
    std::vector<std::string> disallow;
    std::vector<std::string> allow;
};

// Picks the most specific matching agent group (longest token contained in
// `agent`, case-insensitive), falling back to "*".
RobotsRules parse_robots_txt(std::string_view body, std::string_view agent);

// Longest-match-wins over allow and disallow patterns; '*' wildcards and a
// '$' end anchor are honored. An empty rule set allows everything.
bool robots_allows(const RobotsRules& rules, std::string_view path);

}  // namespace florafill
