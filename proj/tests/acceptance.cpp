// Acceptance suite: one line per criterion, [PASS]/[FAIL], exit 0 iff all pass.
// Tolerances are pinned here; the whole run targets well under five minutes.

#include "pertlab/factorization.hpp"
#include "pertlab/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

using namespace pertlab;

namespace {

int g_failures = 0;

void verdict(int number, const std::string& name, bool pass, const std::string& note) {
    std::printf("[%s] %2d %-38s %s\n", pass ? "PASS" : "FAIL", number, name.c_str(),
                note.c_str());
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

struct Inclusion {
    ConcreteAlgebra c;
    ConcreteAlgebra a;
    ConcreteAlgebra b;
    ConcreteAlgebra d;
};

Inclusion materialize_preset(const std::string& preset, double epsilon,
                             std::uint64_t seed) {
    MetricConfig metric;
    metric.seed = seed;
    const Scenario s = preset_scenario(preset, epsilon, seed, metric);
    const int n = s.ambient_dim;
    ConcreteAlgebra c = ConcreteAlgebra::from_generators(n, s.c_generators);
    ConcreteAlgebra a = ConcreteAlgebra::from_generators(n, s.a_generators);
    const Mat u0 = random_unitary_near_identity_in_span(commutant_basis(c), n,
                                                        epsilon, seed);
    ConcreteAlgebra b = conjugate_algebra(a, u0);
    ConcreteAlgebra d = ConcreteAlgebra::full(n);
    return {std::move(c), std::move(a), std::move(b), std::move(d)};
}

const std::vector<std::string> kPresets = {
    "scalar-in-M2", "diag-in-M3", "block-M2-in-M4", "group-algebra-Z2-in-M2"};

// ---------------------------------------------------------------- criterion 1

void criterion_quasi_basis() {
    double worst = 0.0;
    bool pass = true;
    for (const std::string& p : kPresets) {
        const Inclusion inc = materialize_preset(p, 1e-4, 101);
        for (const auto& e : {trace_expectation(inc.a, inc.c),
                              trace_expectation(inc.d, inc.b)}) {
            const QuasiBasis qb = quasi_basis(e);
            worst = std::max(worst, verify_quasi_basis(e, qb).max_residual);
        }
    }
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const int n = 2 + static_cast<int>(seed % 3);
        const Mat u = random_unitary_near_identity(n, 1.5, seed * 977);
        const auto sub = conjugate_algebra(ConcreteAlgebra::diagonal(n), u);
        const auto e = trace_expectation(ConcreteAlgebra::full(n), sub);
        worst = std::max(worst, verify_quasi_basis(e, quasi_basis(e)).max_residual);
    }
    pass = worst <= 1e-8;

    double index_err = 0.0;
    for (int n : {2, 3}) {
        const auto e = trace_expectation(ConcreteAlgebra::full(n),
                                         ConcreteAlgebra::scalars(n));
        const QuasiBasis qb = quasi_basis(e);
        const Mat expected =
            static_cast<double>(n * n) * Mat::Identity(n, n);
        index_err = std::max(index_err, (qb.index_element - expected).norm());
    }
    pass = pass && index_err <= 1e-8;
    verdict(1, "quasi-basis identity and index", pass,
            "worst residual " + fmt(worst) + ", index error " + fmt(index_err));
}

// ---------------------------------------------------------------- criterion 2

void criterion_jones_relations() {
    double worst_residual = 0.0;
    double min_witness = std::numeric_limits<double>::infinity();
    for (const std::string& p : kPresets) {
        const Inclusion inc = materialize_preset(p, 1e-4, 103);
        const BasicConstruction bc(trace_expectation(inc.d, inc.b));
        const CovariantReport rep = verify_covariant(bc);
        worst_residual = std::max({worst_residual, rep.commute_on_b,
                                   rep.expectation_identity});
        // Injectivity of b -> lambda(b) e_B, as a residual against zero.
        worst_residual = std::max(worst_residual,
                                  rep.injectivity_margin > 1e-8 ? 0.0 : 1.0);
        min_witness = std::min(min_witness, rep.witness_commutator);
    }
    const bool pass = worst_residual <= 1e-8 && min_witness > 0.05;
    verdict(2, "Jones projection relations", pass,
            "worst residual " + fmt(worst_residual) + ", min witness commutator " +
                fmt(min_witness));
}

// ---------------------------------------------------------------- criterion 3

void criterion_gns_identities() {
    MetricConfig cfg;
    cfg.restarts = 7;  // 28 rows per width, 112 rows over widths 1..4
    cfg.seed = 105;
    double worst = 0.0;
    for (const std::string& p : {std::string("scalar-in-M2"),
                                 std::string("group-algebra-Z2-in-M2")}) {
        const Inclusion inc = materialize_preset(p, 1e-4, 105);
        const BasicConstruction bc(trace_expectation(inc.d, inc.b));
        const Watlem2Report rep = check_watlem2(bc, cfg);
        worst = std::max({worst, rep.max_row_discrepancy, rep.max_matrix_discrepancy});
    }
    verdict(3, "expectation vs GNS identities", worst <= 1e-8,
            "worst discrepancy over 224 rows " + fmt(worst));
}

// ------------------------------------------------------- criteria 4, 5 and 6

struct PipelineCase {
    std::string preset;
    double epsilon;
    PerturbationReport report;
};

std::vector<PipelineCase> run_pipelines() {
    std::vector<PipelineCase> cases;
    for (double eps : {1e-3, 1e-4, 1e-5}) {
        cases.push_back({"scalar-in-M2", eps, {}});
        cases.push_back({"group-algebra-Z2-in-M2", eps, {}});
    }
    cases.push_back({"diag-in-M3", 1e-5, {}});
    cases.push_back({"block-M2-in-M4", 1e-5, {}});
    for (PipelineCase& c : cases) {
        const Inclusion inc = materialize_preset(c.preset, c.epsilon, 107);
        MetricConfig cfg;
        cfg.seed = 107;
        c.report = perturbation_pipeline(inc.c, inc.a, inc.b, inc.d, cfg);
    }
    return cases;
}

void criterion_projection_estimate(const std::vector<PipelineCase>& cases) {
    bool pass = true;
    double worst_margin = std::numeric_limits<double>::infinity();
    for (const PipelineCase& c : cases) {
        if (!c.report.error.empty()) pass = false;
        if (c.report.t_deviation > c.report.projest_bound + 1e-9) pass = false;
        worst_margin =
            std::min(worst_margin, c.report.projest_bound - c.report.t_deviation);
    }
    verdict(4, "projection estimate", pass,
            std::to_string(cases.size()) + " instances, worst margin " +
                fmt(worst_margin));
}

void criterion_homomorphism_bound(const std::vector<PipelineCase>& cases) {
    bool pass = true;
    double worst_res = 0.0;
    double worst_margin = std::numeric_limits<double>::infinity();
    for (const PipelineCase& c : cases) {
        if (!c.report.error.empty()) pass = false;
        worst_res = std::max({worst_res, c.report.phi_hom_residual,
                              c.report.phi_fixes_c_residual});
        worst_margin = std::min(worst_margin,
                                c.report.phi_row_bound - c.report.phi_row_deviation);
    }
    pass = pass && worst_res <= 1e-8 && worst_margin >= -1e-9;
    verdict(5, "homomorphism residuals and row bound", pass,
            "worst residual " + fmt(worst_res) + ", worst bound margin " +
                fmt(worst_margin));
}

void criterion_unitary_conjugacy(const std::vector<PipelineCase>& cases) {
    bool pass = true;
    bool discrepancy = false;
    double worst_res = 0.0;
    int checked = 0;
    for (const PipelineCase& c : cases) {
        if (c.epsilon != 1e-5) continue;
        ++checked;
        if (!c.report.error.empty() || !c.report.conjugation_verdict ||
            c.report.conjugation_residual > 1e-8)
            pass = false;
        worst_res = std::max(worst_res, c.report.conjugation_residual);
        if (!c.report.bound_satisfied) pass = false;
        if (c.report.bound_discrepancy) discrepancy = true;
    }
    pass = pass && checked == 4;  // one instance per preset
    std::string note = "uAu* = B on " + std::to_string(checked) +
                       " presets, worst span residual " + fmt(worst_res);
    if (discrepancy)
        note += "; stated constant failed, recomputed constant used (logged)";
    verdict(6, "unitary conjugacy with bound", pass, note);
}

// ---------------------------------------------------------------- criterion 7

void criterion_row_vs_kk() {
    bool pass = true;
    double worst_margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 30; ++i) {
        const int n = (i % 3 == 2) ? 3 : 2;
        const Mat frame = random_unitary_near_identity(n, 1.5, 1000 + i);
        const auto a = conjugate_algebra(ConcreteAlgebra::diagonal(n), frame);
        const double eps = std::pow(10.0, -2.0 - (i % 3));
        const Mat u = random_unitary_near_identity(n, eps, 2000 + i);
        const auto b = conjugate_algebra(a, u);
        MetricConfig cfg;
        cfg.restarts = 4;
        cfg.seed = 3000 + static_cast<std::uint64_t>(i);
        const Bracket kk = kk_distance(a, b, cfg);
        const RowDistanceReport row = row_distance(a, b, cfg);
        const double margin = 220.0 * kk.upper + 1e-6 - row.overall.lower;
        worst_margin = std::min(worst_margin, margin);
        if (margin < 0) pass = false;
    }
    verdict(7, "row distance vs 220 d", pass,
            "30 pairs, worst margin " + fmt(worst_margin));
}

// ---------------------------------------------------------------- criterion 8

void criterion_row_norm_bound() {
    bool pass = true;
    double worst_margin = std::numeric_limits<double>::infinity();
    const auto ambient = ConcreteAlgebra::full(2);
    for (double cond : {1.1, 1.5, 2.0}) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(cond * 4096));
        const Mat v = polar_unitary(random_gaussian(2, 2, rng) +
                                    3.0 * Mat::Identity(2, 2));
        Vec diag(2);
        diag << 1.0, cond;
        const Mat s = v * diag.asDiagonal() * v.adjoint();
        const Mat s_inv = v * diag.cwiseInverse().asDiagonal() * v.adjoint();
        auto phi = [&](const Mat& x) { return Mat(s * x * s_inv); };
        MetricConfig cfg;
        cfg.seed = 4000 + static_cast<std::uint64_t>(cond * 16);
        MetricConfig norm_cfg = cfg;
        norm_cfg.amplification_cutoff = 1;
        const double phi_norm = row_norm_of_map(phi, ambient, 1, norm_cfg).lower;
        const double row_lower = row_norm_of_map(phi, ambient, 4, cfg).lower;
        const double margin =
            std::sqrt(2.0) * phi_norm * phi_norm + 1e-6 - row_lower;
        worst_margin = std::min(worst_margin, margin);
        if (margin < 0) pass = false;
    }
    verdict(8, "row norm vs sqrt(2) |phi|^2", pass,
            "cond in {1.1, 1.5, 2}, worst margin " + fmt(worst_margin));
}

// ---------------------------------------------------------------- criterion 9

void criterion_factorization() {
    const auto m2 = ConcreteAlgebra::full(2);
    std::mt19937_64 rng(5000);
    bool pass = true;
    double worst_residual = 0.0;
    double worst_ratio = 0.0;
    int found = 0;
    int failures = 0;
    for (int width = 1; width <= 6; ++width) {
        for (int rep = 0; rep < 3; ++rep) {
            Mat x(2, 2 * width);
            for (int j = 0; j < width; ++j)
                x.block(0, 2 * j, 2, 2) = m2.random_element(rng);
            x /= op_norm(x);
            FactorSearchConfig cfg;
            cfg.seed = 6000 + static_cast<std::uint64_t>(width * 8 + rep);
            const FactorSearchResult res = search_length2(x, m2, cfg);
            if (!res.witness) {
                ++failures;  // permitted and reported, not a violation
                continue;
            }
            ++found;
            const FactorizationReport check = check_factorization(x, 2, *res.witness);
            worst_residual = std::max(worst_residual, check.residual);
            worst_ratio = std::max(worst_ratio, res.ratio);
            if (check.residual > 1e-8 || res.ratio >= 55.0) pass = false;
        }
    }
    pass = pass && found > 0;
    verdict(9, "length-2 factorization soundness", pass,
            std::to_string(found) + " witnesses, " + std::to_string(failures) +
                " failures, worst residual " + fmt(worst_residual) +
                ", worst ratio " + fmt(worst_ratio));
}

// --------------------------------------------------------------- criterion 10

// Closed-form 2x2 operator norm for the brute-force oracle.
double op_norm_2x2(const Mat& m) {
    const Mat g = m.adjoint() * m;
    const double t = g.trace().real();
    const double d = (g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0)).real();
    const double disc = std::max(0.0, t * t - 4.0 * d);
    return std::sqrt(std::max(0.0, (t + std::sqrt(disc)) / 2.0));
}

// d(A, B) for A = diagonal matrices, B = r A r^T with a rotation r, by
// nested grid search with refinement; independent of the metrics module.
double grid_oracle_distance(double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    Mat r(2, 2);
    r << c, -s, s, c;

    auto diag_elem = [](double r1, double p1, double r2, double p2) {
        Mat m = Mat::Zero(2, 2);
        m(0, 0) = Scalar(r1 * std::cos(p1), r1 * std::sin(p1));
        m(1, 1) = Scalar(r2 * std::cos(p2), r2 * std::sin(p2));
        return m;
    };

    constexpr double kPi = 3.14159265358979323846;
    // Inner inf over the unit ball of B for a fixed a in ball(A).
    auto inner_inf = [&](const Mat& a) {
        double best = std::numeric_limits<double>::infinity();
        double br1 = 0.5, bp1 = 0.0, br2 = 0.5, bp2 = 0.0;
        // Coarse pass.
        for (double r1 = 0.0; r1 <= 1.0; r1 += 0.25)
            for (double p1 = 0.0; p1 < 2 * kPi; p1 += kPi / 4)
                for (double r2 = 0.0; r2 <= 1.0; r2 += 0.25)
                    for (double p2 = 0.0; p2 < 2 * kPi; p2 += kPi / 4) {
                        const Mat b = r * diag_elem(r1, p1, r2, p2) * r.transpose();
                        const double v = op_norm_2x2(a - b);
                        if (v < best) {
                            best = v;
                            br1 = r1; bp1 = p1; br2 = r2; bp2 = p2;
                        }
                    }
        // Refinement passes around the best point.
        double hr = 0.125, hp = kPi / 8;
        for (int round = 0; round < 6; ++round) {
            for (double r1 : {br1 - hr, br1, br1 + hr})
                for (double p1 : {bp1 - hp, bp1, bp1 + hp})
                    for (double r2 : {br2 - hr, br2, br2 + hr})
                        for (double p2 : {bp2 - hp, bp2, bp2 + hp}) {
                            const double cr1 = std::clamp(r1, 0.0, 1.0);
                            const double cr2 = std::clamp(r2, 0.0, 1.0);
                            const Mat b =
                                r * diag_elem(cr1, p1, cr2, p2) * r.transpose();
                            const double v = op_norm_2x2(a - b);
                            if (v < best) {
                                best = v;
                                br1 = cr1; bp1 = p1; br2 = cr2; bp2 = p2;
                            }
                        }
            hr /= 2;
            hp /= 2;
        }
        return best;
    };

    // Outer sup over the unit ball of A. The two Hausdorff directions agree
    // by the rotational symmetry of the family.
    double sup = 0.0;
    double sr1 = 1.0, sp1 = 0.0, sr2 = 1.0, sp2 = 0.0;
    for (double r1 = 0.0; r1 <= 1.0; r1 += 0.5)
        for (double p1 = 0.0; p1 < 2 * kPi; p1 += kPi / 4)
            for (double r2 = 0.0; r2 <= 1.0; r2 += 0.5)
                for (double p2 = 0.0; p2 < 2 * kPi; p2 += kPi / 4) {
                    const double v = inner_inf(diag_elem(r1, p1, r2, p2));
                    if (v > sup) {
                        sup = v;
                        sr1 = r1; sp1 = p1; sr2 = r2; sp2 = p2;
                    }
                }
    double hr = 0.25, hp = kPi / 8;
    for (int round = 0; round < 5; ++round) {
        for (double r1 : {sr1 - hr, sr1, sr1 + hr})
            for (double p1 : {sp1 - hp, sp1, sp1 + hp})
                for (double r2 : {sr2 - hr, sr2, sr2 + hr})
                    for (double p2 : {sp2 - hp, sp2, sp2 + hp}) {
                        const double cr1 = std::clamp(r1, 0.0, 1.0);
                        const double cr2 = std::clamp(r2, 0.0, 1.0);
                        const double v = inner_inf(diag_elem(cr1, p1, cr2, p2));
                        if (v > sup) {
                            sup = v;
                            sr1 = cr1; sp1 = p1; sr2 = cr2; sp2 = p2;
                        }
                    }
        hr /= 2;
        hp /= 2;
    }
    return sup;
}

void criterion_metric_sanity() {
    bool pass = true;
    std::string note;

    MetricConfig cfg;
    cfg.seed = 7000;
    const double self = kk_distance(ConcreteAlgebra::diagonal(3),
                                    ConcreteAlgebra::diagonal(3), cfg)
                            .upper;
    if (self > 1e-6) pass = false;

    // Symmetry and unitary invariance on 20 seeded pairs. The upper
    // endpoints are seeded sup searches and not certified, so overlap is
    // asserted with a pinned slack of 5% of the larger upper endpoint.
    double worst_gap = 0.0;
    for (int i = 0; i < 20; ++i) {
        const auto a = ConcreteAlgebra::diagonal(2);
        const Mat u = random_unitary_near_identity(2, 5e-2, 8000 + i);
        const auto b = conjugate_algebra(a, u);
        MetricConfig pc;
        pc.restarts = 12;
        pc.seed = 8100 + static_cast<std::uint64_t>(i);
        const Bracket fwd = kk_distance(a, b, pc);
        pc.seed = 8200 + static_cast<std::uint64_t>(i);
        const Bracket bwd = kk_distance(b, a, pc);
        const Mat v = random_unitary_near_identity(2, 1.0, 8300 + i);
        pc.seed = 8400 + static_cast<std::uint64_t>(i);
        const Bracket rot =
            kk_distance(conjugate_algebra(a, v), conjugate_algebra(b, v), pc);
        for (const Bracket* other : {&bwd, &rot}) {
            const double gap = std::max(fwd.lower - other->upper,
                                        other->lower - fwd.upper);
            const double slack = 0.05 * std::max(fwd.upper, other->upper) + 1e-9;
            worst_gap = std::max(worst_gap, gap);
            if (gap > slack) pass = false;
        }
    }

    const double theta = 0.05;
    const double oracle = grid_oracle_distance(theta);
    const auto a = ConcreteAlgebra::diagonal(2);
    Mat r(2, 2);
    r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    const auto b = conjugate_algebra(a, r);
    MetricConfig oc;
    oc.restarts = 10;
    oc.seed = 9000;
    const Bracket est = kk_distance(a, b, oc);
    const double oracle_slack = 0.02;
    if (oracle < est.lower - oracle_slack || oracle > est.upper + oracle_slack)
        pass = false;

    note = "self " + fmt(self) + ", worst overlap gap " + fmt(worst_gap) +
           ", oracle " + fmt(oracle) + " vs bracket [" + fmt(est.lower) + ", " +
           fmt(est.upper) + "]";
    verdict(10, "metric estimator sanity", pass, note);
}

}  // namespace

int main() {
    criterion_quasi_basis();
    criterion_jones_relations();
    criterion_gns_identities();
    const std::vector<PipelineCase> cases = run_pipelines();
    criterion_projection_estimate(cases);
    criterion_homomorphism_bound(cases);
    criterion_unitary_conjugacy(cases);
    criterion_row_vs_kk();
    criterion_row_norm_bound();
    criterion_factorization();
    criterion_metric_sanity();
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
