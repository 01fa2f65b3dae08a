#include "pertlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pertlab {

double row_norm(const Mat& x, int ambient_dim) {
    (void)ambient_dim;
    return op_norm(x);
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Mat project_blocks(const Mat& x, const ConcreteAlgebra& alg, int bm, int bn) {
    const int n = alg.ambient_dim();
    Mat out(x.rows(), x.cols());
    for (int i = 0; i < bm; ++i)
        for (int j = 0; j < bn; ++j)
            out.block(i * n, j * n, n, n) = alg.project(x.block(i * n, j * n, n, n));
    return out;
}

// Feasible point of span(B)-blocks intersect operator unit ball. Clipping a
// span element stays in the span (functional calculus in the algebra), the
// extra projection and rescale clean up roundoff.
Mat make_feasible(const Mat& y, const ConcreteAlgebra& alg, int bm, int bn) {
    Mat c = project_blocks(clip_to_unit_ball(project_blocks(y, alg, bm, bn)), alg, bm, bn);
    const double nc = op_norm(c);
    if (nc > 1.0) c /= nc;
    return c;
}

// Dykstra alternating projections onto span intersect ball, finished with a
// feasibility pass.
Mat dykstra_project(const Mat& x, const ConcreteAlgebra& alg, int bm, int bn, int iters) {
    Mat y = x;
    Mat p = Mat::Zero(x.rows(), x.cols());
    Mat q = Mat::Zero(x.rows(), x.cols());
    for (int k = 0; k < iters; ++k) {
        const Mat a = project_blocks(y + p, alg, bm, bn);
        p = y + p - a;
        const Mat b = clip_to_unit_ball(a + q);
        q = a + q - b;
        y = b;
    }
    return make_feasible(y, alg, bm, bn);
}

Mat random_block_matrix(const ConcreteAlgebra& alg, int bm, int bn, std::mt19937_64& rng) {
    const int n = alg.ambient_dim();
    Mat x(static_cast<Eigen::Index>(bm) * n, static_cast<Eigen::Index>(bn) * n);
    for (int i = 0; i < bm; ++i)
        for (int j = 0; j < bn; ++j)
            x.block(i * n, j * n, n, n) = alg.random_element(rng);
    return x;
}

}  // namespace

Bracket dist_to_amplified_unit_ball(const Mat& x, const ConcreteAlgebra& alg,
                                    int block_rows, int block_cols,
                                    const MetricConfig& cfg) {
    const int n = alg.ambient_dim();
    if (x.rows() != static_cast<Eigen::Index>(block_rows) * n ||
        x.cols() != static_cast<Eigen::Index>(block_cols) * n)
        throw ShapeMismatch("dist_to_amplified_unit_ball: shape mismatch");

    Bracket result;
    const Mat span_part = project_blocks(x, alg, block_rows, block_cols);
    const double frob_off = (x - span_part).norm();
    const double min_side = static_cast<double>(std::min(x.rows(), x.cols()));
    result.lower = std::max({0.0, frob_off / std::sqrt(min_side), op_norm(x) - 1.0});

    Mat b = dykstra_project(x, alg, block_rows, block_cols, 25);
    double f = op_norm(x - b);
    Mat best_b = b;
    double best_f = f;

    const double a0 = best_f - result.lower + cfg.inner_tolerance;
    for (int k = 1; k <= cfg.inner_iterations; ++k) {
        if (best_f <= result.lower + cfg.inner_tolerance) break;
        const TopSingular ts = top_singular(x - b);
        const double alpha = a0 / std::sqrt(static_cast<double>(k));
        // Subgradient of |x - b| in b is -(u v*); step toward x.
        b = dykstra_project(b + alpha * (ts.left * ts.right.adjoint()), alg,
                            block_rows, block_cols, 8);
        f = op_norm(x - b);
        if (f < best_f) {
            best_f = f;
            best_b = b;
        }
    }
    result.upper = best_f;
    result.upper_certified = true;
    result.witness = best_b;
    if (result.upper < result.lower) result.lower = result.upper;  // roundoff guard
    return result;
}

Bracket dist_to_unit_ball(const Mat& x, const ConcreteAlgebra& b, const MetricConfig& cfg) {
    return dist_to_amplified_unit_ball(x, b, 1, 1, cfg);
}

namespace {

// One direction of the Hausdorff sup-inf: sup over the unit ball of
// M_{bm,bn}(from) of the distance to the unit ball of M_{bm,bn}(to).
Bracket sup_direction(const ConcreteAlgebra& from, const ConcreteAlgebra& to,
                      int bm, int bn, const MetricConfig& cfg, std::uint64_t salt) {
    std::mt19937_64 rng(mix_seed(cfg.seed, salt));
    Bracket best;
    best.upper_certified = false;

    MetricConfig probe = cfg;
    probe.inner_iterations = std::max(20, cfg.inner_iterations / 3);

    auto evaluate = [&](const Mat& x, const MetricConfig& c) {
        return dist_to_amplified_unit_ball(x, to, bm, bn, c);
    };
    auto absorb = [&](const Mat& x, const Bracket& in) {
        if (in.lower > best.lower) best.lower = in.lower;
        if (in.upper > best.upper) {
            best.upper = in.upper;
            best.witness = x;
        }
    };

    const int proposals = 8;
    for (int r = 0; r < cfg.restarts; ++r) {
        Mat x = random_block_matrix(from, bm, bn, rng);
        const double nx = op_norm(x);
        if (nx < 1e-14) continue;
        x /= nx;
        Bracket in = evaluate(x, cfg);
        absorb(x, in);
        // Coordinate-free hill climbing on the inner value.
        double cur = in.upper;
        double sigma = 0.5;
        for (int h = 0; h < proposals; ++h) {
            Mat xp = x + sigma * random_block_matrix(from, bm, bn, rng);
            const double np = op_norm(xp);
            if (np < 1e-14) continue;
            xp /= np;
            const Bracket inp = evaluate(xp, probe);
            if (inp.upper > cur) {
                const Bracket full = evaluate(xp, cfg);
                absorb(xp, full);
                if (full.upper > cur) {
                    cur = full.upper;
                    x = xp;
                } else {
                    sigma *= 0.6;
                }
            } else {
                absorb(xp, inp);
                sigma *= 0.6;
            }
        }
    }
    return best;
}

Bracket amplified_kk(const ConcreteAlgebra& a, const ConcreteAlgebra& b,
                     int bm, int bn, const MetricConfig& cfg) {
    if (a.ambient_dim() != b.ambient_dim())
        throw ShapeMismatch("kk_distance: ambient dimensions differ");
    const Bracket ab = sup_direction(a, b, bm, bn, cfg, 0x0a);
    const Bracket ba = sup_direction(b, a, bm, bn, cfg, 0x0b);
    Bracket out;
    out.lower = std::max(ab.lower, ba.lower);
    out.upper = std::max(ab.upper, ba.upper);
    out.upper_certified = false;
    out.witness = ab.upper >= ba.upper ? ab.witness : ba.witness;
    return out;
}

}  // namespace

Bracket kk_distance(const ConcreteAlgebra& a, const ConcreteAlgebra& b,
                    const MetricConfig& cfg) {
    return amplified_kk(a, b, 1, 1, cfg);
}

Bracket amplified_distance(const ConcreteAlgebra& a, const ConcreteAlgebra& b, int n,
                           const MetricConfig& cfg) {
    if (n < 1 || n > cfg.amplification_cutoff)
        throw InvalidConfig("amplified_distance: n outside [1, cutoff]");
    return amplified_kk(a, b, n, n, cfg);
}

RowDistanceReport row_distance(const ConcreteAlgebra& a, const ConcreteAlgebra& b,
                               const MetricConfig& cfg) {
    RowDistanceReport report;
    report.overall.upper_certified = false;
    for (int n = 1; n <= cfg.amplification_cutoff; ++n) {
        Bracket bn = amplified_kk(a, b, 1, n, cfg);
        if (bn.lower > report.overall.lower) report.overall.lower = bn.lower;
        if (bn.upper > report.overall.upper) {
            report.overall.upper = bn.upper;
            report.overall.witness = bn.witness;
        }
        report.per_n.push_back(std::move(bn));
    }
    return report;
}

Bracket row_norm_of_map(const std::function<Mat(const Mat&)>& phi,
                        const ConcreteAlgebra& domain, int n_max,
                        const MetricConfig& cfg) {
    const int n = domain.ambient_dim();
    Bracket result;
    result.upper = std::numeric_limits<double>::infinity();
    result.upper_certified = false;

    auto apply_row = [&](const Mat& x, int width) {
        Mat out(n, static_cast<Eigen::Index>(width) * n);
        for (int j = 0; j < width; ++j)
            out.block(0, j * n, n, n) = phi(x.block(0, j * n, n, n));
        return out;
    };

    for (int width = 1; width <= n_max; ++width) {
        std::mt19937_64 rng(mix_seed(cfg.seed, 0xc0 + static_cast<std::uint64_t>(width)));
        for (int r = 0; r < cfg.restarts; ++r) {
            Mat x = random_block_matrix(domain, 1, width, rng);
            double nx = op_norm(x);
            if (nx < 1e-14) continue;
            x /= nx;
            double cur = op_norm(apply_row(x, width));
            if (cur > result.lower) {
                result.lower = cur;
                result.witness = x;
            }
            double sigma = 0.5;
            for (int h = 0; h < 10; ++h) {
                Mat xp = x + sigma * random_block_matrix(domain, 1, width, rng);
                const double np = op_norm(xp);
                if (np < 1e-14) continue;
                xp /= np;
                const double v = op_norm(apply_row(xp, width));
                if (v > cur) {
                    cur = v;
                    x = xp;
                    if (cur > result.lower) {
                        result.lower = cur;
                        result.witness = x;
                    }
                } else {
                    sigma *= 0.6;
                }
            }
        }
    }
    return result;
}

}  // namespace pertlab
