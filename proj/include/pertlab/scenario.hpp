#pragma once

#include "pertlab/perturbation.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace pertlab {

using ordered_json = nlohmann::ordered_json;

struct PerturbationSpec {
    double epsilon = 0.0;
    std::uint64_t seed = 0;
};

/// A fully resolved experiment: the inclusion C in A in D, how B arises,
/// the metric configuration and which checks to run.
struct Scenario {
    std::string name;
    int ambient_dim = 0;
    std::vector<Mat> c_generators;
    std::vector<Mat> a_generators;
    std::vector<Mat> d_generators;
    std::optional<PerturbationSpec> perturbation;  // B = u0 A u0*, u0 in C'
    std::vector<Mat> b_generators;                 // used when no perturbation
    MetricConfig metric;
    std::vector<std::string> checks;
};

/// Shipped presets: "scalar-in-M2", "diag-in-M3", "block-M2-in-M4",
/// "group-algebra-Z2-in-M2". Throws InvalidConfig for unknown names.
Scenario preset_scenario(const std::string& preset, double epsilon,
                         std::uint64_t seed, const MetricConfig& metric);

std::vector<std::string> preset_names();
std::vector<std::string> default_checks();

ordered_json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const ordered_json& j);

ordered_json matrix_to_json(const Mat& m);
Mat matrix_from_json(const ordered_json& j);

/// One asserted bound: lhs <= rhs, margin = rhs - lhs.
struct CheckResult {
    std::string check_tag;
    std::string source;  // stable tag naming the bound being asserted
    double gamma = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    bool pass = false;
};

enum class RunStatus { ok, bound_violation, numerical_failure, config_error };

struct RunReport {
    std::string scenario_id;
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;
    std::vector<CheckResult> checks;
    bool all_pass = false;
    std::string error;
    RunStatus status = RunStatus::ok;
    ordered_json details;  // non-asserted diagnostics (pipeline quantities, margins)
};

RunReport run_scenario(const Scenario& s);

ordered_json report_to_json(const RunReport& r);
RunReport report_from_json(const ordered_json& j);

/// RFC-4180-style CSV, one row per (scenario, check), stable ordering by
/// scenario_id. Header row mandatory.
std::string reports_to_csv(const std::vector<RunReport>& reports);

/// Worst margin per check tag, for the aggregate summary.
std::string reports_summary(const std::vector<RunReport>& reports);

}  // namespace pertlab
