#ifndef COSEM_REPORT_HPP
#define COSEM_REPORT_HPP

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "harness.hpp"
#include "json.hpp"

namespace cosem {

struct ReportConfig {
    GenConfig gen;
    HarnessConfig harness;
};

inline nlohmann::json to_json(const Verdict& v)
{
    nlohmann::json j;
    j["term"] = v.term;
    j["class"] = to_string(v.cls);
    if (v.result) j[v.cls == TermClass::GoesWrong ? "stuck" : "value"] = *v.result;
    if (v.cls == TermClass::Converges || v.cls == TermClass::GoesWrong) j["steps"] = v.steps;
    if (v.cls == TermClass::DivergesUpTo) j["fuel"] = v.fuel;
    j["agreements"] = v.agreements;
    j["millis"] = v.millis;
    return j;
}

// {config, verdicts, summary}; verdicts sorted by term text so the report does
// not depend on the order terms were checked in.
inline nlohmann::json make_report(const ReportConfig& cfg, std::vector<Verdict> verdicts)
{
    std::stable_sort(verdicts.begin(), verdicts.end(),
                     [](const Verdict& a, const Verdict& b) { return a.term < b.term; });
    nlohmann::json j;
    j["config"] = {
        {"seed", cfg.gen.seed},
        {"count", cfg.gen.count},
        {"max_size", cfg.gen.max_size},
        {"mode", to_string(cfg.gen.mode)},
        {"fuel", cfg.harness.fuel},
        {"limit", cfg.harness.limit},
        {"bisim_depth", cfg.harness.bisim_depth},
        {"coeval_depth", cfg.harness.coeval_depth},
    };
    std::size_t pass = 0;
    std::map<std::string, std::map<std::string, std::size_t>> by_check;
    std::map<std::string, std::size_t> by_class;
    auto arr = nlohmann::json::array();
    for (const auto& v : verdicts) {
        if (v.all_pass()) ++pass;
        for (const auto& [name, ok] : v.agreements) ++by_check[name][ok ? "pass" : "fail"];
        ++by_class[to_string(v.cls)];
        arr.push_back(to_json(v));
    }
    for (auto& [name, counts] : by_check) {
        counts.try_emplace("pass", 0);
        counts.try_emplace("fail", 0);
    }
    j["verdicts"] = std::move(arr);
    j["summary"] = {{"pass", pass}, {"fail", verdicts.size() - pass}, {"by_check", by_check}, {"by_class", by_class}};
    return j;
}

} // namespace cosem

#endif
