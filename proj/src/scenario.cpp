#include "pertlab/scenario.hpp"

#include "pertlab/factorization.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace pertlab {

namespace {

constexpr double kSlack = 1e-9;

Mat basis_matrix_unit(int n, int i, int j) {
    Mat e = Mat::Zero(n, n);
    e(i, j) = 1.0;
    return e;
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"scalar-in-M2", "diag-in-M3", "block-M2-in-M4", "group-algebra-Z2-in-M2"};
}

std::vector<std::string> default_checks() {
    return {"watlem", "watlem2", "projest", "homo", "intertwine",
            "variant", "rm-inequality", "rowbound", "factorization"};
}

Scenario preset_scenario(const std::string& preset, double epsilon,
                         std::uint64_t seed, const MetricConfig& metric) {
    Scenario s;
    s.name = preset;
    s.metric = metric;
    s.checks = default_checks();
    s.perturbation = PerturbationSpec{epsilon, seed};
    if (preset == "scalar-in-M2") {
        // C = C1, A = diagonal, D = M_2; index of E_C^A is 2.
        s.ambient_dim = 2;
        s.a_generators = {Mat(Vec(Eigen::Vector2cd(1.0, 2.0)).asDiagonal())};
        s.d_generators = {basis_matrix_unit(2, 0, 1)};
    } else if (preset == "diag-in-M3") {
        // C = C1, A = diagonal, D = M_3; index 3.
        s.ambient_dim = 3;
        s.a_generators = {Mat(Vec(Eigen::Vector3cd(1.0, 2.0, 3.0)).asDiagonal())};
        s.d_generators = {basis_matrix_unit(3, 0, 1), basis_matrix_unit(3, 1, 2)};
    } else if (preset == "block-M2-in-M4") {
        // C = C1, A = M_2 (x) 1_2, D = M_4; index 4.
        s.ambient_dim = 4;
        Mat g = Mat::Zero(4, 4);
        g(0, 2) = 1.0;
        g(1, 3) = 1.0;  // e_12 (x) 1_2 in the block picture
        s.a_generators = {g};
        s.d_generators = {basis_matrix_unit(4, 0, 1), basis_matrix_unit(4, 1, 2),
                          basis_matrix_unit(4, 2, 3)};
    } else if (preset == "group-algebra-Z2-in-M2") {
        // C = C1, A = span{1, flip}, D = M_2; index 2.
        s.ambient_dim = 2;
        Mat flip = Mat::Zero(2, 2);
        flip(0, 1) = 1.0;
        flip(1, 0) = 1.0;
        s.a_generators = {flip};
        s.d_generators = {basis_matrix_unit(2, 0, 1)};
    } else {
        throw InvalidConfig("unknown preset: " + preset);
    }
    // C = scalars in every shipped preset.
    s.c_generators = {};
    return s;
}

ordered_json matrix_to_json(const Mat& m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat matrix_from_json(const ordered_json& j) {
    if (!j.is_array() || j.empty())
        throw InvalidConfig("matrix: expected a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.at(0).size());
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j.at(static_cast<std::size_t>(i));
        if (static_cast<Eigen::Index>(row.size()) != cols)
            throw InvalidConfig("matrix: ragged rows");
        for (Eigen::Index jj = 0; jj < cols; ++jj) {
            const auto& e = row.at(static_cast<std::size_t>(jj));
            if (!e.is_array() || e.size() != 2)
                throw InvalidConfig("matrix: entry must be [re, im]");
            m(i, jj) = Scalar(e.at(0).get<double>(), e.at(1).get<double>());
        }
    }
    return m;
}

namespace {

ordered_json matrices_to_json(const std::vector<Mat>& ms) {
    ordered_json arr = ordered_json::array();
    for (const Mat& m : ms) arr.push_back(matrix_to_json(m));
    return arr;
}

std::vector<Mat> matrices_from_json(const ordered_json& j) {
    std::vector<Mat> out;
    for (const auto& m : j) out.push_back(matrix_from_json(m));
    return out;
}

}  // namespace

ordered_json scenario_to_json(const Scenario& s) {
    ordered_json j;
    j["name"] = s.name;
    j["ambient_dim"] = s.ambient_dim;
    j["generators"]["C"] = matrices_to_json(s.c_generators);
    j["generators"]["A"] = matrices_to_json(s.a_generators);
    j["generators"]["D"] = matrices_to_json(s.d_generators);
    if (s.perturbation) {
        j["perturbation"]["epsilon"] = s.perturbation->epsilon;
        j["perturbation"]["seed"] = s.perturbation->seed;
    } else {
        j["generators"]["B"] = matrices_to_json(s.b_generators);
    }
    j["metric"]["restarts"] = s.metric.restarts;
    j["metric"]["inner_iterations"] = s.metric.inner_iterations;
    j["metric"]["inner_tolerance"] = s.metric.inner_tolerance;
    j["metric"]["amplification_cutoff"] = s.metric.amplification_cutoff;
    j["metric"]["seed"] = s.metric.seed;
    j["checks"] = s.checks;
    return j;
}

Scenario scenario_from_json(const ordered_json& j) {
    Scenario s;
    try {
        s.name = j.at("name").get<std::string>();
        s.ambient_dim = j.at("ambient_dim").get<int>();
        if (s.ambient_dim < 1) throw InvalidConfig("ambient_dim must be positive");
        const auto& gens = j.at("generators");
        s.c_generators = matrices_from_json(gens.at("C"));
        s.a_generators = matrices_from_json(gens.at("A"));
        s.d_generators = matrices_from_json(gens.at("D"));
        if (j.contains("perturbation") && !j.at("perturbation").is_null()) {
            PerturbationSpec p;
            p.epsilon = j.at("perturbation").at("epsilon").get<double>();
            p.seed = j.at("perturbation").at("seed").get<std::uint64_t>();
            s.perturbation = p;
        } else if (gens.contains("B")) {
            s.b_generators = matrices_from_json(gens.at("B"));
        } else {
            throw InvalidConfig("scenario needs a perturbation block or B generators");
        }
        const auto& m = j.at("metric");
        s.metric.restarts = m.at("restarts").get<int>();
        s.metric.inner_iterations = m.at("inner_iterations").get<int>();
        s.metric.inner_tolerance = m.at("inner_tolerance").get<double>();
        s.metric.amplification_cutoff = m.at("amplification_cutoff").get<int>();
        s.metric.seed = m.at("seed").get<std::uint64_t>();
        if (s.metric.restarts < 1 || s.metric.inner_iterations < 1 ||
            s.metric.amplification_cutoff < 1)
            throw InvalidConfig("metric counts must be >= 1");
        s.checks = j.at("checks").get<std::vector<std::string>>();
    } catch (const ordered_json::exception& ex) {
        throw InvalidConfig(std::string("scenario parse error: ") + ex.what());
    }
    return s;
}

namespace {

struct CheckRecorder {
    std::vector<CheckResult>& out;

    void assert_le(const std::string& tag, const std::string& source, double gamma,
                   double lhs, double rhs) {
        CheckResult c;
        c.check_tag = tag;
        c.source = source;
        c.gamma = gamma;
        c.lhs = lhs;
        c.rhs = rhs;
        c.margin = rhs - lhs;
        c.pass = lhs <= rhs;
        out.push_back(std::move(c));
    }
};

struct Instance {
    ConcreteAlgebra c;
    ConcreteAlgebra a;
    ConcreteAlgebra b;
    ConcreteAlgebra d;
};

Instance materialize(const Scenario& s) {
    const Tolerances tol;
    ConcreteAlgebra c = ConcreteAlgebra::from_generators(s.ambient_dim, s.c_generators, tol);
    ConcreteAlgebra a0 = ConcreteAlgebra::from_generators(s.ambient_dim, s.a_generators, tol);
    // A and D must contain C; D must contain A.
    std::vector<Mat> a_gens = s.a_generators;
    for (const Mat& g : s.c_generators) a_gens.push_back(g);
    ConcreteAlgebra a = ConcreteAlgebra::from_generators(s.ambient_dim, a_gens, tol);
    std::vector<Mat> d_gens = s.d_generators;
    for (const Mat& g : a_gens) d_gens.push_back(g);

    ConcreteAlgebra b = [&] {
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
    for (const Mat& g : b.basis()) d_gens.push_back(g);
    ConcreteAlgebra d = ConcreteAlgebra::from_generators(s.ambient_dim, d_gens, tol);
    (void)a0;
    return Instance{std::move(c), std::move(a), std::move(b), std::move(d)};
}

bool wants(const Scenario& s, const std::string& check) {
    for (const auto& c : s.checks)
        if (c == check) return true;
    return false;
}

ordered_json pipeline_details(const PerturbationReport& p) {
    ordered_json d;
    d["gamma_kk_upper"] = p.gamma_kk_upper;
    d["gamma_row_upper"] = p.gamma_row_upper;
    d["gamma_prime"] = p.gamma_prime;
    d["gamma_warning"] = p.gamma_warning;
    d["mm_star_residual"] = p.mm_star_residual;
    d["t_deviation"] = p.t_deviation;
    d["t_commutant_residual"] = p.t_commutant_residual;
    d["q_deviation"] = p.q_deviation;
    d["q_commutant_residual"] = p.q_commutant_residual;
    d["wqw_residual"] = p.wqw_residual;
    d["w_deviation"] = p.w_deviation;
    d["phi_hom_residual"] = p.phi_hom_residual;
    d["phi_adjoint_residual"] = p.phi_adjoint_residual;
    d["phi_fixes_c_residual"] = p.phi_fixes_c_residual;
    d["phi_row_deviation"] = p.phi_row_deviation;
    d["phi_row_at_witness"] = p.phi_row_at_witness;
    d["one_minus_s"] = p.one_minus_s;
    d["s_invertibility"] = p.s_invertibility;
    d["u_deviation"] = p.u_deviation;
    d["u_commutes_with_c"] = p.u_commutes_with_c;
    d["intertwine_sqrt2_margin"] =
        std::sqrt(2.0) * p.gamma_intertwine - p.u_deviation;
    d["u_bound_stated"] = p.u_bound_stated;
    d["u_bound_recomputed"] = p.u_bound_recomputed;
    d["bound_discrepancy"] = p.bound_discrepancy;
    d["conjugation_residual"] = p.conjugation_residual;
    d["conjugation_verdict"] = p.conjugation_verdict;
    return d;
}

void run_rowbound_check(const Scenario& s, CheckRecorder& rec) {
    const int n = s.ambient_dim;
    const ConcreteAlgebra ambient = ConcreteAlgebra::full(n);
    for (double cond : {1.1, 1.5, 2.0}) {
        // Similarity S with prescribed condition number, random orientation.
        std::mt19937_64 rng(s.metric.seed ^ 0x5151u ^ static_cast<std::uint64_t>(cond * 64));
        const Mat v = polar_unitary(random_gaussian(n, n, rng) +
                                    3.0 * Mat::Identity(n, n));
        Vec diag(n);
        for (int i = 0; i < n; ++i)
            diag(i) = 1.0 + (cond - 1.0) * i / std::max(1, n - 1);
        const Mat sm = v * diag.asDiagonal() * v.adjoint();
        const Mat sm_inv = v * diag.cwiseInverse().asDiagonal() * v.adjoint();
        auto phi = [&](const Mat& x) { return Mat(sm * x * sm_inv); };

        MetricConfig norm_cfg = s.metric;
        norm_cfg.amplification_cutoff = 1;
        const double phi_norm = row_norm_of_map(phi, ambient, 1, norm_cfg).lower;
        const double row_lower =
            row_norm_of_map(phi, ambient, s.metric.amplification_cutoff, s.metric).lower;
        rec.assert_le("rowbound-cond-" + format_double(cond), "row-norm-of-homomorphism",
                      cond, row_lower, std::sqrt(2.0) * phi_norm * phi_norm + 1e-6);
    }
}

void run_factorization_check(const Scenario& s, CheckRecorder& rec, ordered_json& details) {
    const ConcreteAlgebra m2 = ConcreteAlgebra::full(2);
    std::mt19937_64 rng(s.metric.seed ^ 0xfac7u);
    double worst_residual = 0.0;
    double worst_ratio = 0.0;
    int failures = 0;
    ordered_json ratios = ordered_json::array();
    for (int width = 1; width <= 6; ++width) {
        for (int rep = 0; rep < 2; ++rep) {
            Mat x(2, 2 * width);
            for (int j = 0; j < width; ++j)
                x.block(0, 2 * j, 2, 2) = m2.random_element(rng);
            const double nx = op_norm(x);
            if (nx < 1e-12) continue;
            x /= nx;
            FactorSearchConfig fcfg;
            fcfg.seed = s.metric.seed ^ (static_cast<std::uint64_t>(width) << 8) ^
                        static_cast<std::uint64_t>(rep);
            fcfg.rounds = 25;
            const FactorSearchResult res = search_length2(x, m2, fcfg);
            if (!res.witness) {
                ++failures;
                continue;
            }
            const FactorizationReport check = check_factorization(x, 2, *res.witness);
            worst_residual = std::max(worst_residual, check.residual);
            worst_ratio = std::max(worst_ratio, res.ratio);
            ratios.push_back({{"width", width}, {"ratio", res.ratio}});
        }
    }
    details["factorization"]["ratios"] = ratios;
    details["factorization"]["failures"] = failures;
    rec.assert_le("factor-residual", "length-two-witness-soundness", 0.0,
                  worst_residual, 1e-8);
    rec.assert_le("factor-ratio", "length-two-ratio", 0.0, worst_ratio, 55.0);
}

}  // namespace

RunReport run_scenario(const Scenario& s) {
    const auto start = std::chrono::steady_clock::now();
    RunReport report;
    report.scenario_id = s.name;
    report.seed = s.metric.seed;
    CheckRecorder rec{report.checks};
    try {
        const Tolerances tol;
        Instance inst = materialize(s);

        const bool needs_pipeline = wants(s, "projest") || wants(s, "homo") ||
                                    wants(s, "intertwine") || wants(s, "variant");
        const bool needs_metrics =
            needs_pipeline || wants(s, "watlem") || wants(s, "rm-inequality");

        Bracket kk;
        RowDistanceReport rowd;
        if (needs_metrics) {
            kk = kk_distance(inst.a, inst.b, s.metric);
            rowd = row_distance(inst.a, inst.b, s.metric);
            report.details["kk"] = {{"lower", kk.lower}, {"upper", kk.upper}};
            report.details["row"] = {{"lower", rowd.overall.lower},
                                     {"upper", rowd.overall.upper}};
        }

        if (wants(s, "watlem")) {
            const ConditionalExpectation e_b = trace_expectation(inst.d, inst.b, tol);
            const WatlemReport w =
                check_watlem(inst.a, e_b, rowd.overall.upper, s.metric);
            rec.assert_le("watlem-expectation", "row-expectation-deviation", w.gamma,
                          w.worst_exp_deviation, 2.0 * w.gamma + kSlack);
            rec.assert_le("watlem-left", "row-multiplicativity-defect", w.gamma,
                          w.worst_left_identity, 4.0 * w.gamma + kSlack);
            rec.assert_le("watlem-right", "row-multiplicativity-defect", w.gamma,
                          w.worst_right_identity, 4.0 * w.gamma + kSlack);
        }
        if (wants(s, "watlem2")) {
            const ConditionalExpectation e_b = trace_expectation(inst.d, inst.b, tol);
            const BasicConstruction bc(e_b);
            const Watlem2Report w2 = check_watlem2(bc, s.metric);
            rec.assert_le("watlem2-row", "gns-transfer-identity", 0.0,
                          w2.max_row_discrepancy, 1e-8);
            rec.assert_le("watlem2-matrix", "gns-transfer-identity", 0.0,
                          w2.max_matrix_discrepancy, 1e-8);
        }

        if (needs_pipeline) {
            const PerturbationReport p =
                perturbation_pipeline(inst.c, inst.a, inst.b, inst.d, s.metric, tol);
            report.details["pipeline"] = pipeline_details(p);
            if (!p.error.empty())
                throw SingularInput("pipeline failed: " + p.error);

            if (wants(s, "projest")) {
                rec.assert_le("projest", "projection-estimate", p.gamma_row_upper,
                              p.t_deviation, p.projest_bound + kSlack);
            }
            if (wants(s, "homo")) {
                rec.assert_le("homo-residual", "homomorphism-residual",
                              p.gamma_row_upper, p.phi_hom_residual, 1e-8);
                rec.assert_le("homo-fixes-c", "fixed-subalgebra", p.gamma_row_upper,
                              p.phi_fixes_c_residual, 1e-8);
                rec.assert_le("homo-row-bound", "homomorphism-row-deviation",
                              p.gamma_row_upper, p.phi_row_deviation,
                              p.phi_row_bound + kSlack);
            }
            if (wants(s, "intertwine")) {
                rec.assert_le("intertwine-u-bound", "intertwiner-deviation",
                              p.gamma_intertwine, p.u_deviation,
                              2.0 * p.gamma_intertwine + kSlack);
            }
            if (wants(s, "variant")) {
                rec.assert_le("variant-verdict", "unitary-conjugacy",
                              p.gamma_kk_upper, p.conjugation_residual, 1e-8);
                if (p.u_bound_stated_ok) {
                    rec.assert_le("variant-bound", "unitary-deviation-bound",
                                  p.gamma_kk_upper, p.u_deviation,
                                  p.u_bound_stated + kSlack);
                } else {
                    // Stated constant failed; fall back to the recomputed
                    // constant and record the discrepancy.
                    report.details["variant_bound_discrepancy"] = true;
                    rec.assert_le("variant-bound-recomputed", "unitary-deviation-bound",
                                  p.gamma_kk_upper, p.u_deviation,
                                  p.u_bound_recomputed + kSlack);
                }
            }
        }

        if (wants(s, "rm-inequality")) {
            rec.assert_le("rm-inequality", "row-metric-equivalence", kk.upper,
                          rowd.overall.lower, 220.0 * kk.upper + 1e-6);
        }
        if (wants(s, "rowbound")) run_rowbound_check(s, rec);
        if (wants(s, "factorization"))
            run_factorization_check(s, rec, report.details);
    } catch (const InvalidConfig& ex) {
        report.error = ex.what();
        report.status = RunStatus::config_error;
    } catch (const std::exception& ex) {
        report.error = ex.what();
        report.status = RunStatus::numerical_failure;
    }

    report.all_pass = report.status == RunStatus::ok;
    for (const CheckResult& c : report.checks)
        if (!c.pass) report.all_pass = false;
    if (report.status == RunStatus::ok && !report.all_pass)
        report.status = RunStatus::bound_violation;
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

namespace {

std::string status_to_string(RunStatus s) {
    switch (s) {
        case RunStatus::ok: return "ok";
        case RunStatus::bound_violation: return "bound-violation";
        case RunStatus::numerical_failure: return "numerical-failure";
        case RunStatus::config_error: return "config-error";
    }
    return "unknown";
}

RunStatus status_from_string(const std::string& s) {
    if (s == "ok") return RunStatus::ok;
    if (s == "bound-violation") return RunStatus::bound_violation;
    if (s == "numerical-failure") return RunStatus::numerical_failure;
    if (s == "config-error") return RunStatus::config_error;
    throw InvalidConfig("unknown run status: " + s);
}

}  // namespace

ordered_json report_to_json(const RunReport& r) {
    ordered_json j;
    j["scenario_id"] = r.scenario_id;
    j["seed"] = r.seed;
    j["wall_time_s"] = r.wall_time_s;
    j["status"] = status_to_string(r.status);
    j["all_pass"] = r.all_pass;
    j["error"] = r.error;
    ordered_json checks = ordered_json::array();
    for (const CheckResult& c : r.checks) {
        checks.push_back({{"check_tag", c.check_tag},
                          {"source", c.source},
                          {"gamma", c.gamma},
                          {"lhs", c.lhs},
                          {"rhs", c.rhs},
                          {"margin", c.margin},
                          {"pass", c.pass}});
    }
    j["checks"] = std::move(checks);
    j["details"] = r.details;
    return j;
}

RunReport report_from_json(const ordered_json& j) {
    RunReport r;
    try {
        r.scenario_id = j.at("scenario_id").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.wall_time_s = j.at("wall_time_s").get<double>();
        r.status = status_from_string(j.at("status").get<std::string>());
        r.all_pass = j.at("all_pass").get<bool>();
        r.error = j.at("error").get<std::string>();
        for (const auto& c : j.at("checks")) {
            CheckResult cr;
            cr.check_tag = c.at("check_tag").get<std::string>();
            cr.source = c.at("source").get<std::string>();
            cr.gamma = c.at("gamma").get<double>();
            cr.lhs = c.at("lhs").get<double>();
            cr.rhs = c.at("rhs").get<double>();
            cr.margin = c.at("margin").get<double>();
            cr.pass = c.at("pass").get<bool>();
            r.checks.push_back(std::move(cr));
        }
        if (j.contains("details")) r.details = j.at("details");
    } catch (const ordered_json::exception& ex) {
        throw InvalidConfig(std::string("report parse error: ") + ex.what());
    }
    return r;
}

std::string reports_to_csv(const std::vector<RunReport>& reports) {
    std::vector<const RunReport*> sorted;
    for (const RunReport& r : reports) sorted.push_back(&r);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const RunReport* a, const RunReport* b) {
                         return a->scenario_id < b->scenario_id;
                     });
    std::ostringstream os;
    os << "scenario_id,check_tag,source,gamma,lhs,rhs,margin,pass\n";
    for (const RunReport* r : sorted) {
        for (const CheckResult& c : r->checks) {
            os << r->scenario_id << ',' << c.check_tag << ',' << c.source << ','
               << format_double(c.gamma) << ',' << format_double(c.lhs) << ','
               << format_double(c.rhs) << ',' << format_double(c.margin) << ','
               << (c.pass ? "true" : "false") << '\n';
        }
    }
    return os.str();
}

std::string reports_summary(const std::vector<RunReport>& reports) {
    struct Agg {
        double worst_margin = std::numeric_limits<double>::infinity();
        int fails = 0;
        int total = 0;
    };
    std::map<std::string, Agg> by_tag;
    int errors = 0;
    for (const RunReport& r : reports) {
        if (!r.error.empty()) ++errors;
        for (const CheckResult& c : r.checks) {
            Agg& a = by_tag[c.check_tag];
            a.worst_margin = std::min(a.worst_margin, c.margin);
            a.total += 1;
            if (!c.pass) a.fails += 1;
        }
    }
    std::ostringstream os;
    for (const auto& [tag, agg] : by_tag) {
        os << tag << ": " << agg.total - agg.fails << '/' << agg.total
           << " pass, worst margin " << format_double(agg.worst_margin) << '\n';
    }
    if (errors > 0) os << errors << " scenario(s) ended with errors\n";
    return os.str();
}

}  // namespace pertlab
