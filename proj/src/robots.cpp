#include "florafill/robots.hpp"

#include "florafill/common.hpp"

namespace florafill {

namespace {

struct AgentGroup {
    std::vector<std::string> agents;
    RobotsRules rules;
};

// pattern match with '*' wildcard and optional '$' anchor, anchored at start
bool pattern_matches(std::string_view pattern, std::string_view path, std::size_t* match_len) {
    bool anchored_end = !pattern.empty() && pattern.back() == '$';
    if (anchored_end) pattern.remove_suffix(1);

    // greedy segment matching
    std::size_t pi = 0, si = 0;
    std::size_t star_pi = std::string_view::npos, star_si = 0;
    while (si < path.size()) {
        if (pi < pattern.size() && (pattern[pi] == path[si])) {
            ++pi;
            ++si;
        } else if (pi < pattern.size() && pattern[pi] == '*') {
            star_pi = pi++;
            star_si = si;
        } else if (star_pi != std::string_view::npos) {
            pi = star_pi + 1;
            si = ++star_si;
        } else {
            break;
        }
    }
    while (pi < pattern.size() && pattern[pi] == '*') ++pi;
    bool full_pattern = pi == pattern.size();
    if (!full_pattern) return false;
    if (anchored_end && si != path.size()) return false;
    if (match_len) *match_len = pattern.size();
    return true;
}

}  // namespace

RobotsRules parse_robots_txt(std::string_view body, std::string_view agent) {
    std::vector<AgentGroup> groups;
    bool in_agent_list = false;

    for (std::string& raw : split_lines(body)) {
        std::size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.resize(hash);
        std::string line = trim(raw);
        if (line.empty()) continue;
        std::size_t colon = line.find(':');
        if (colon == std::string::npos) continue;
        std::string field = casefold(trim(line.substr(0, colon)));
        std::string value = trim(line.substr(colon + 1));

        if (field == "user-agent") {
            if (!in_agent_list) groups.emplace_back();
            groups.back().agents.push_back(casefold(value));
            in_agent_list = true;
            continue;
        }
        in_agent_list = false;
        if (groups.empty()) continue;
        if (field == "disallow") {
            if (!value.empty()) groups.back().rules.disallow.push_back(value);
        } else if (field == "allow") {
            if (!value.empty()) groups.back().rules.allow.push_back(value);
        }
    }

    std::string agent_cf = casefold(agent);
    const AgentGroup* best = nullptr;
    std::size_t best_len = 0;
    const AgentGroup* wildcard = nullptr;
    for (const AgentGroup& group : groups) {
        for (const std::string& token : group.agents) {
            if (token == "*") {
                if (!wildcard) wildcard = &group;
            } else if (agent_cf.find(token) != std::string::npos && token.size() > best_len) {
                best = &group;
                best_len = token.size();
            }
        }
    }
    if (!best) best = wildcard;
    return best ? best->rules : RobotsRules{};
}

bool robots_allows(const RobotsRules& rules, std::string_view path) {
    if (path.empty()) path = "/";
    std::size_t best_allow = 0, best_disallow = 0;
    bool any_allow = false, any_disallow = false;
    std::size_t len = 0;
    for (const std::string& p : rules.allow)
        if (pattern_matches(p, path, &len) && len >= best_allow) {
            best_allow = len;
            any_allow = true;
        }
    for (const std::string& p : rules.disallow)
        if (pattern_matches(p, path, &len) && len >= best_disallow) {
            best_disallow = len;
            any_disallow = true;
        }
    if (!any_disallow) return true;
    if (!any_allow) return false;
    return best_allow >= best_disallow;
}

}  // namespace florafill
