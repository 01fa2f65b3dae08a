// pertlab: scenario generation, batch execution and reporting for
// perturbation experiments on finite-dimensional C*-inclusions.
//
// Exit codes: 0 all asserted bounds pass, 1 bound violation,
// 2 configuration error, 3 numerical failure.

#include "pertlab/factorization.hpp"
#include "pertlab/scenario.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace pertlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBound = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int status_exit_code(RunStatus s) {
    switch (s) {
        case RunStatus::ok: return kExitOk;
        case RunStatus::bound_violation: return kExitBound;
        case RunStatus::config_error: return kExitConfig;
        case RunStatus::numerical_failure: return kExitNumerical;
    }
    return kExitNumerical;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidConfig("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidConfig("cannot write " + path);
    out << content;
}

Scenario load_scenario(const std::string& path) {
    ordered_json j;
    try {
        j = ordered_json::parse(read_file(path));
    } catch (const ordered_json::exception& ex) {
        throw InvalidConfig(path + ": " + ex.what());
    }
    return scenario_from_json(j);
}

int cmd_gen(const std::string& preset, double epsilon, std::uint64_t seed,
            int n_max, double tolerance, const std::string& output) {
    MetricConfig metric;
    metric.amplification_cutoff = n_max > 0 ? n_max : 4;
    if (tolerance > 0) metric.inner_tolerance = tolerance;
    metric.seed = seed;
    const Scenario s = preset_scenario(preset, epsilon, seed, metric);
    const std::string text = scenario_to_json(s).dump(2) + "\n";
    if (output.empty())
        std::cout << text;
    else
        write_file(output, text);
    return kExitOk;
}

std::string report_path_for(const std::string& scenario_path,
                            const std::string& output, bool many) {
    if (output.empty()) {
        fs::path p(scenario_path);
        p.replace_extension();
        return p.string() + ".report.json";
    }
    if (!many) return output;
    fs::path base = fs::path(scenario_path).filename();
    base.replace_extension();
    return (fs::path(output) / (base.string() + ".report.json")).string();
}

int cmd_run(const std::vector<std::string>& inputs, int jobs, int n_max,
            double tolerance, const std::string& output) {
    std::vector<Scenario> scenarios;
    for (const std::string& path : inputs) {
        Scenario s = load_scenario(path);
        if (n_max > 0) s.metric.amplification_cutoff = n_max;  // explicit override only
        if (tolerance > 0) s.metric.inner_tolerance = tolerance;
        scenarios.push_back(std::move(s));
    }
    if (!output.empty() && inputs.size() > 1) fs::create_directories(output);

    std::vector<RunReport> reports(scenarios.size());
    jobs = std::max(1, jobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < scenarios.size();
             i = next.fetch_add(1))
            reports[i] = run_scenario(scenarios[i]);
    };
    std::vector<std::future<void>> pool;
    for (int t = 1; t < jobs; ++t)
        pool.push_back(std::async(std::launch::async, worker));
    worker();
    for (auto& f : pool) f.get();

    int exit_code = kExitOk;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const RunReport& r = reports[i];
        const std::string path =
            report_path_for(inputs[i], output, inputs.size() > 1);
        write_file(path, report_to_json(r).dump(2) + "\n");
        std::cout << r.scenario_id << ": "
                  << (r.all_pass ? "all checks pass" : "FAILED") << " ("
                  << r.checks.size() << " checks, " << r.wall_time_s << " s) -> "
                  << path << '\n';
        if (!r.error.empty()) std::cout << "  error: " << r.error << '\n';
        for (const CheckResult& c : r.checks)
            if (!c.pass)
                std::cout << "  " << c.check_tag << ": lhs " << c.lhs << " > rhs "
                          << c.rhs << '\n';
        // Numerical failures outrank config errors, which outrank violations.
        exit_code = std::max(exit_code, status_exit_code(r.status));
    }
    return exit_code;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& output) {
    std::vector<RunReport> reports;
    for (const std::string& path : inputs) {
        ordered_json j;
        try {
            j = ordered_json::parse(read_file(path));
        } catch (const ordered_json::exception& ex) {
            throw InvalidConfig(path + ": " + ex.what());
        }
        reports.push_back(report_from_json(j));
    }
    const std::string csv = reports_to_csv(reports);
    if (output.empty())
        std::cout << csv;
    else
        write_file(output, csv);
    std::cout << reports_summary(reports);
    for (const RunReport& r : reports) {
        if (!r.all_pass) return kExitBound;
        for (const CheckResult& c : r.checks)
            if (!c.pass) return kExitBound;
    }
    return kExitOk;
}

int cmd_factor(int dim, int width, std::uint64_t seed, double tolerance) {
    if (dim < 1 || width < 1) throw InvalidConfig("--dim and --width must be >= 1");
    const ConcreteAlgebra alg = ConcreteAlgebra::full(dim);
    std::mt19937_64 rng(seed);
    Mat x(dim, dim * width);
    for (int j = 0; j < width; ++j)
        x.block(0, dim * j, dim, dim) = alg.random_element(rng);
    const double nx = op_norm(x);
    if (nx < 1e-12) throw SingularInput("drew a zero row");
    x /= nx;

    FactorSearchConfig cfg;
    cfg.seed = seed;
    if (tolerance > 0) cfg.residual_tol = tolerance;
    const FactorSearchResult res = search_length2(x, alg, cfg);
    if (!res.witness) {
        std::cout << "no length-2 witness found (best residual "
                  << res.best_residual << ")\n";
        return kExitNumerical;
    }
    const FactorizationReport check = check_factorization(x, dim, *res.witness);
    std::cout << "row 1 x " << width << " over M_" << dim << ", |x| = 1\n"
              << "residual  " << check.residual << '\n'
              << "K         " << check.k << '\n'
              << "K / |x|   " << res.ratio << '\n';
    return res.ratio < 55.0 ? kExitOk : kExitBound;
}

int cmd_dist(const std::string& input, int n_max, std::uint64_t seed,
             double tolerance) {
    Scenario s = load_scenario(input);
    if (n_max > 0) s.metric.amplification_cutoff = n_max;
    if (tolerance > 0) s.metric.inner_tolerance = tolerance;
    if (seed != 0) s.metric.seed = seed;

    const Tolerances tol;
    const ConcreteAlgebra c =
        ConcreteAlgebra::from_generators(s.ambient_dim, s.c_generators, tol);
    std::vector<Mat> a_gens = s.a_generators;
    for (const Mat& g : s.c_generators) a_gens.push_back(g);
    const ConcreteAlgebra a =
        ConcreteAlgebra::from_generators(s.ambient_dim, a_gens, tol);
    const ConcreteAlgebra b = [&] {
        if (s.perturbation) {
            const Mat u0 = random_unitary_near_identity_in_span(
                commutant_basis(c), s.ambient_dim, s.perturbation->epsilon,
                s.perturbation->seed);
            return conjugate_algebra(a, u0, tol);
        }
        std::vector<Mat> b_gens = s.b_generators;
        for (const Mat& g : s.c_generators) b_gens.push_back(g);
        return ConcreteAlgebra::from_generators(s.ambient_dim, b_gens, tol);
    }();

    const Bracket kk = kk_distance(a, b, s.metric);
    const RowDistanceReport row = row_distance(a, b, s.metric);
    std::cout << "d(A, B)      in [" << kk.lower << ", " << kk.upper << "]"
              << (kk.upper_certified ? "" : " (upper not certified)") << '\n';
    for (std::size_t n = 0; n < row.per_n.size(); ++n)
        std::cout << "d_row, n = " << n + 1 << "  in [" << row.per_n[n].lower
                  << ", " << row.per_n[n].upper << "]\n";
    std::cout << "d_row overall in [" << row.overall.lower << ", "
              << row.overall.upper << "]\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for perturbations of C*-inclusions"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    int jobs = 1;
    double tolerance = 0.0;  // 0 keeps each scenario's own setting
    int n_max = 0;           // 0 keeps each scenario's own cutoff
    std::string output;

    std::string preset = "scalar-in-M2";
    double epsilon = 1e-4;
    auto* gen = app.add_subcommand("gen", "emit a scenario file for a preset");
    gen->add_option("--preset", preset, "one of: scalar-in-M2, diag-in-M3, "
                                        "block-M2-in-M4, group-algebra-Z2-in-M2");
    gen->add_option("--epsilon", epsilon, "perturbation size |u0 - 1|");
    gen->add_option("--seed", seed, "master seed");
    gen->add_option("--n-max", n_max, "row amplification cutoff (default 4)");
    gen->add_option("--tolerance", tolerance, "inner solver tolerance");
    gen->add_option("--output,-o", output, "scenario file (stdout if omitted)");

    std::vector<std::string> run_inputs;
    auto* run = app.add_subcommand("run", "run scenarios and write reports");
    run->add_option("scenarios", run_inputs, "scenario files")->required();
    run->add_option("--jobs", jobs, "scenario-level parallelism");
    run->add_option("--n-max", n_max, "override row amplification cutoff");
    run->add_option("--tolerance", tolerance, "override inner solver tolerance");
    run->add_option("--output,-o", output,
                    "report file (single input) or directory (several)");

    std::vector<std::string> report_inputs;
    auto* report = app.add_subcommand("report", "aggregate reports into CSV");
    report->add_option("reports", report_inputs, "report files");
    report->add_option("--output,-o", output, "CSV file (stdout if omitted)");

    int dim = 2;
    int width = 4;
    auto* factor = app.add_subcommand("factor", "length-2 factorization of a random row");
    factor->add_option("--dim", dim, "ambient dimension");
    factor->add_option("--width", width, "number of blocks in the row");
    factor->add_option("--seed", seed, "seed for the row and the search");
    factor->add_option("--tolerance", tolerance, "residual tolerance");

    std::string dist_input;
    auto* dist = app.add_subcommand("dist", "distance brackets for a scenario's A, B");
    dist->add_option("scenario", dist_input, "scenario file")->required();
    dist->add_option("--n-max", n_max, "row amplification cutoff");
    dist->add_option("--seed", seed, "override estimator seed");
    dist->add_option("--tolerance", tolerance, "inner solver tolerance");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(preset, epsilon, seed, n_max, tolerance, output);
        if (run->parsed()) return cmd_run(run_inputs, jobs, n_max, tolerance, output);
        if (report->parsed()) return cmd_report(report_inputs, output);
        if (factor->parsed()) return cmd_factor(dim, width, seed, tolerance);
        if (dist->parsed()) return cmd_dist(dist_input, n_max, seed, tolerance);
    } catch (const InvalidConfig& ex) {
        std::cerr << "configuration error: " << ex.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& ex) {
        std::cerr << "numerical failure: " << ex.what() << '\n';
        return kExitNumerical;
    }
    return kExitConfig;
}
