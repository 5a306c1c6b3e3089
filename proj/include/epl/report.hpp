#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "epl/grid.hpp"
#include "epl/inequalities.hpp"
#include "epl/positivity.hpp"

namespace epl {

/// Tabular result of a multi-step experiment plus named pass/fail checks.
struct ExperimentReport {
    std::string name;
    std::vector<std::pair<std::string, std::string>> parameters;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::map<std::string, double> metrics;
    std::vector<std::pair<std::string, bool>> checks;

    bool passed() const
    {
        for (const auto& [name, ok] : checks)
            if (!ok) return false;
        return true;
    }

    std::vector<double> column(const std::string& col) const
    {
        std::size_t j = 0;
        while (j < columns.size() && columns[j] != col) ++j;
        EPL_REQUIRE(j < columns.size(), InvalidArgument, "unknown column " + col);
        std::vector<double> out;
        for (const auto& r : rows) out.push_back(r[j]);
        return out;
    }
};

/// CSV with a header row; reals use 17 significant digits.
inline std::string to_csv(const std::vector<std::string>& columns, const std::vector<std::vector<double>>& rows)
{
    std::string out;
    for (std::size_t j = 0; j < columns.size(); ++j) out += (j ? "," : "") + columns[j];
    out += '\n';
    for (const auto& r : rows) {
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (j) out += ',';
            out += detail::fmt17(r[j]);
        }
        out += '\n';
    }
    return out;
}

inline std::string to_csv(const ExperimentReport& r) { return to_csv(r.columns, r.rows); }

inline nlohmann::ordered_json to_json(const ExperimentReport& r)
{
    nlohmann::ordered_json j;
    j["experiment"] = r.name;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.parameters) params[k] = v;
    j["parameters"] = params;
    nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.metrics) metrics[k] = v;
    j["metrics"] = metrics;
    nlohmann::ordered_json checks = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.checks) checks[k] = v;
    j["checks"] = checks;
    j["passed"] = r.passed();
    return j;
}

inline nlohmann::ordered_json to_json(const RatioReport& r)
{
    nlohmann::ordered_json j;
    j["case"] = r.case_name;
    j["exponents"] = {{"p", r.p}, {"q", r.q}};
    j["constant"] = r.constant;
    nlohmann::ordered_json norms = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.norms) norms[k] = v;
    j["norms"] = norms;
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
    j["ratio"] = r.normalized_ratio;
    j["seed"] = r.seed;
    j["grid"] = r.grid;
    j["shape"] = r.shape;
    return j;
}

inline std::string ratio_csv(const std::vector<RatioReport>& reps)
{
    std::string out = "case,shape,seed,grid,lhs,rhs,constant,normalized_ratio\n";
    for (const auto& r : reps)
        out += r.case_name + "," + r.shape + "," + std::to_string(r.seed) + "," + std::to_string(r.grid) + "," +
               detail::fmt17(r.lhs) + "," + detail::fmt17(r.rhs) + "," + detail::fmt17(r.constant) + "," +
               detail::fmt17(r.normalized_ratio) + "\n";
    return out;
}

inline std::string alpha_table_csv(const std::vector<AlphaRow>& rows)
{
    std::string out = "alpha,min_eig,grid,puncture,iters,residual\n";
    for (const auto& r : rows)
        out += detail::fmt17(r.alpha) + "," + detail::fmt17(r.min_eig) + "," + std::to_string(r.grid) + "," +
               std::to_string(r.puncture) + "," + std::to_string(r.iters) + "," + detail::fmt17(r.residual) + "\n";
    return out;
}

}  // namespace epl
