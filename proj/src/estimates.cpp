#include "nonlocal/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nonlocal {

namespace {

void require_zero_extension(const Grid& g, const char* who) {
    if (g.boundary != Boundary::ZeroExtension)
        throw std::invalid_argument(std::string(who) + ": zero-extension grid required");
}

void require_ball_margin(const Grid& g, const Ball& b, double margin, const char* who) {
    for (int k = 0; k < g.dimension; ++k)
        if (std::abs(b.center[k]) + b.radius + margin > g.half_width) {
            std::ostringstream os;
            os << who << ": ball of radius " << b.radius << " at margin " << margin
               << " does not fit in the box";
            throw std::invalid_argument(os.str());
        }
}

}  // namespace

GridFunction seeded_function_outside(const Grid& g, const Ball& excluded, std::uint64_t seed) {
    Rng rng(seed);
    GridFunction f(g);
    for (std::size_t i = 0; i < f.size(); ++i) {
        // draw for every cell so the values at a given cell do not depend on
        // the exclusion geometry
        const double re = rng.uniform(-1.0, 1.0);
        const double im = rng.uniform(-1.0, 1.0);
        if (!excluded.contains(g.center(i), g.dimension)) f[i] = cplx{re, im};
    }
    return f;
}

CaccioppoliBreakdown caccioppoli_verify(const DiscreteOperator& op, const Ball& ball, cplx lambda,
                                        std::uint64_t forcing_seed) {
    return caccioppoli_verify(op, ball, lambda,
                              seeded_function_outside(op.grid, ball.dilate(2.0), forcing_seed));
}

CaccioppoliBreakdown caccioppoli_verify(const DiscreteOperator& op, const Ball& ball, cplx lambda,
                                        const GridFunction& f_ext) {
    const Grid& g = op.grid;
    require_zero_extension(g, "caccioppoli_verify");
    const Ball twoB = ball.dilate(2.0);
    require_ball_margin(g, twoB, ball.radius, "caccioppoli_verify");
    for (std::size_t i = 0; i < f_ext.size(); ++i)
        if (f_ext[i] != cplx{0.0, 0.0} && twoB.contains(g.center(i), g.dimension))
            throw std::invalid_argument("caccioppoli_verify: forcing must vanish on 2B");

    const double alpha = op.kernel.order;
    const double r = ball.radius;

    GridFunction u = resolve(op, lambda, f_ext);
    CutoffFunction eta = make_cutoff(g, ball.center, r);

    PowerPairWeights w(g, alpha);
    const std::vector<double>& gtail = w.exterior_tail();
    const std::vector<std::size_t> in2B = cells_in_ball(g, twoB);
    const std::vector<std::size_t> out2B = cells_outside_ball(g, twoB);
    const double hd = g.cell_measure();

    CaccioppoliBreakdown b;

    // |lambda| int |u eta|^2 over the whole grid
    double mass = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) mass += std::norm(u[i]) * sq(eta.values[i].real());
    b.lambda_mass = std::abs(lambda) * hd * mass;

    // 2B x 2B Gagliardo terms (ordered pairs = 2x unordered, both symmetric)
    double two_cut = 0.0, prod = 0.0;
    for (std::size_t a = 0; a < in2B.size(); ++a)
        for (std::size_t c = a + 1; c < in2B.size(); ++c) {
            const std::size_t i = in2B[a], j = in2B[c];
            const double gij = w(i, j);
            const double ei = eta.values[i].real(), ej = eta.values[j].real();
            const double du2 = std::norm(u[i] - u[j]);
            if (du2 != 0.0) two_cut += gij * du2 * (ei * ei + ej * ej);
            const double dp2 = std::norm(u[i] * ei - u[j] * ej);
            if (dp2 != 0.0) prod += gij * dp2;
        }
    b.gagliardo_cutoff = 2.0 * hd * hd * two_cut;
    b.gagliardo_product = 2.0 * hd * hd * prod;

    // exterior cross terms: for y in 2B the x-integral over R^d \ 2B splits
    // into in-box cells and the beyond-box tail
    double ext = 0.0;
    for (std::size_t j : in2B) {
        const double ej = eta.values[j].real();
        if (ej == 0.0) continue;
        double xmass = gtail[j];
        for (std::size_t i : out2B) xmass += hd * w(i, j);
        ext += std::norm(u[j]) * ej * ej * xmass;
    }
    b.exterior_yx = hd * ext;
    b.exterior_xy = b.exterior_yx;  // mirrored integrand, same value

    // right-hand side
    double m2 = 0.0, m1 = 0.0;
    for (std::size_t i : in2B) {
        m2 += std::norm(u[i]);
        m1 += std::abs(u[i]);
    }
    b.rhs_mass = std::pow(r, -2.0 * alpha) * hd * m2;
    double tail1 = 0.0;
    const double expo = g.dimension + 2.0 * alpha;
    for (std::size_t i : out2B)
        tail1 += std::abs(u[i]) * std::pow(dist(g.center(i), ball.center, g.dimension), -expo);
    b.rhs_tail = (hd * m1) * (hd * tail1);

    b.lhs_total = b.lambda_mass + b.gagliardo_cutoff + b.gagliardo_product + b.exterior_yx +
                  b.exterior_xy;
    b.rhs_total = b.rhs_mass + b.rhs_tail;
    b.ratio = (b.rhs_total == 0.0) ? 0.0 : b.lhs_total / b.rhs_total;
    return b;
}

VerificationReport caccioppoli_sweep(const DiscreteOperator& op, const Ball& ball,
                                     const std::vector<cplx>& lambdas,
                                     const std::vector<std::uint64_t>& seeds, int threads) {
    VerificationReport rep;
    rep.experiment = "caccioppoli";
    rep.params = {{"r", ball.radius},
                  {"center", {ball.center[0], ball.center[1]}},
                  {"alpha", op.kernel.order},
                  {"kernel", op.kernel.name},
                  {"n", op.grid.cells_per_dim},
                  {"L", op.grid.half_width}};

    struct Cell {
        cplx lam;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (const cplx& lam : lambdas)
        for (std::uint64_t seed : seeds) cells.push_back({lam, seed});
    std::vector<CaccioppoliBreakdown> results(cells.size());
    parallel_for(
        cells.size(),
        [&](std::size_t k) {
            results[k] = caccioppoli_verify(op, ball, cells[k].lam, cells[k].seed);
        },
        threads);

    double max_ratio = 0.0, min_ratio = std::numeric_limits<double>::infinity();
    std::string argmax;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const cplx lam = cells[k].lam;
        const CaccioppoliBreakdown& b = results[k];
        CaseRecord c;
        std::ostringstream id;
        id << "lam=" << lam.real() << (lam.imag() >= 0 ? "+" : "") << lam.imag()
           << "i seed=" << cells[k].seed;
        c.id = id.str();
        c.params = {{"lambda_re", lam.real()}, {"lambda_im", lam.imag()}, {"seed", cells[k].seed}};
        c.lhs = b.lhs_total;
        c.rhs = b.rhs_total;
        c.ratio = b.ratio;
        c.extra = {{"lambda_mass", b.lambda_mass},
                   {"gagliardo_cutoff", b.gagliardo_cutoff},
                   {"gagliardo_product", b.gagliardo_product},
                   {"exterior_yx", b.exterior_yx},
                   {"exterior_xy", b.exterior_xy},
                   {"rhs_mass", b.rhs_mass},
                   {"rhs_tail", b.rhs_tail}};
        if (!std::isfinite(b.ratio)) rep.hard_pass = false;
        if (b.ratio > max_ratio) {
            max_ratio = b.ratio;
            argmax = c.id;
        }
        min_ratio = std::min(min_ratio, b.ratio);
        rep.cases.push_back(std::move(c));
    }
    rep.summary = {{"max_ratio", max_ratio},
                   {"min_ratio", min_ratio},
                   {"argmax", argmax},
                   {"cases", rep.cases.size()}};
    rep.notes =
        "ratios are reported, not asserted against an analytic constant; uniformity in lambda "
        "is judged against the frozen regression baseline";
    return rep;
}

TailBoundPair tail_bound_check(const GridFunction& u, const Ball& ball, double alpha,
                               double c_check) {
    const Grid& g = u.grid;
    require_zero_extension(g, "tail_bound_check");
    const Ball twoB = ball.dilate(2.0);
    require_ball_margin(g, twoB, 0.0, "tail_bound_check");

    const double hd = g.cell_measure();
    const double r = ball.radius;
    const double expo = g.dimension + 2.0 * alpha;

    double m1 = 0.0, tail1 = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (twoB.contains(g.center(i), g.dimension))
            m1 += std::abs(u[i]);
        else
            tail1 += std::abs(u[i]) * std::pow(dist(g.center(i), ball.center, g.dimension), -expo);
    }

    TailBoundPair out;
    out.lhs = (hd * m1) * (hd * tail1);

    // sum over dyadic dilates until 2^{k+1} B covers the box, then the
    // geometric remainder with the box mean
    double corner_max = 0.0;
    for (int cx = -1; cx <= 1; cx += 2)
        for (int cy = -1; cy <= 1; cy += 2) {
            Point corner{cx * g.half_width, g.dimension == 2 ? cy * g.half_width : 0.0};
            corner_max = std::max(corner_max, dist(corner, ball.center, g.dimension));
        }
    double series = 0.0;
    int k = 1;
    double cover_mean = 0.0;
    const double q = std::pow(2.0, -2.0 * alpha);
    for (;; ++k) {
        const Ball bk = Ball{ball.center, std::pow(2.0, k + 1) * r};
        const std::vector<std::size_t> cells = cells_in_ball(g, bk);
        double mean = 0.0;
        for (std::size_t i : cells) mean += std::norm(u[i]);
        mean = cells.empty() ? 0.0 : mean / static_cast<double>(cells.size());
        series += std::pow(q, k) * mean;
        cover_mean = mean;
        if (bk.radius >= corner_max || k > 64) break;
    }
    series += cover_mean * std::pow(q, k + 1) / (1.0 - q);
    out.rhs_raw = std::pow(r, g.dimension - 2.0 * alpha) * series;
    out.rhs = c_check * out.rhs_raw;
    return out;
}

WrhResult wrh_check(const DiscreteOperator& op, const Ball& ball, cplx lambda, double p,
                    double iota, std::uint64_t f_seed) {
    return wrh_check(op, ball, lambda, p, iota,
                     seeded_function_outside(op.grid, ball.dilate(iota), f_seed));
}

WrhResult wrh_check(const DiscreteOperator& op, const Ball& ball, cplx lambda, double p,
                    double iota, const GridFunction& f) {
    if (!(p > 2.0)) throw std::domain_error("wrh_check: p > 2 required");
    if (!(iota > 1.0)) throw std::domain_error("wrh_check: iota > 1 required");
    const Grid& g = op.grid;
    require_zero_extension(g, "wrh_check");

    GridFunction Tf = resolvent_apply(op, lambda, f);

    WrhResult res;
    res.lambda = lambda;
    res.p = p;

    const std::vector<std::size_t> inB = cells_in_ball(g, ball);
    if (inB.empty()) throw std::invalid_argument("wrh_check: ball contains no cells");
    double lp = 0.0;
    for (std::size_t i : inB) lp += std::pow(std::abs(Tf[i]), p);
    res.lhs = std::pow(lp / static_cast<double>(inB.size()), 1.0 / p);

    const int kmax =
        static_cast<int>(std::ceil(std::log2(std::max(2.0, g.half_width / ball.radius)))) + 1;
    double sup = 0.0;
    auto candidate = [&](const std::vector<std::size_t>& cells) {
        if (cells.empty()) return;
        double m = 0.0;
        for (std::size_t i : cells) m += std::norm(Tf[i]) + std::norm(f[i]);
        sup = std::max(sup, std::sqrt(m / static_cast<double>(cells.size())));
    };
    for (int k = 0; k <= kmax; ++k)
        candidate(cells_in_ball(g, Ball{ball.center, std::pow(2.0, k) * ball.radius}));
    {
        std::vector<std::size_t> all(g.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        candidate(all);
    }
    res.rhs = sup;
    res.ratio = (res.rhs == 0.0) ? 0.0 : res.lhs / res.rhs;
    return res;
}

PRange admissible_p_range(int d, double alpha) {
    if (d < 1) throw std::invalid_argument("admissible_p_range: d >= 1");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("admissible_p_range: alpha in (0,1)");
    PRange r;
    const double s = alpha / d;
    r.lower = 1.0 / (0.5 + s);
    if (0.5 - s > 0.0)
        r.upper = 1.0 / (0.5 - s);
    else
        r.upper = std::numeric_limits<double>::infinity();
    return r;
}

EmbeddingExponents embedding_exponents(int d, double alpha, double p) {
    if (!(p >= 2.0)) throw std::domain_error("embedding_exponents: p >= 2 required");
    EmbeddingExponents e;
    e.theta = d * (0.5 - 1.0 / p);
    e.beta = (e.theta == 0.0) ? 0.0 : e.theta / alpha;
    return e;
}

VerificationReport resolvent_lp_sweep(const DiscreteOperator& op,
                                      const std::vector<double>& p_list,
                                      const std::vector<cplx>& lambda_lattice) {
    VerificationReport rep;
    rep.experiment = "resolvent-sweep";
    rep.params = {{"kernel", op.kernel.name},
                  {"alpha", op.kernel.order},
                  {"n", op.grid.cells_per_dim},
                  {"theta", op.sector.theta}};
    const PRange range = admissible_p_range(op.grid.dimension, op.kernel.order);

    std::optional<DiscreteOperator> adj;
    json per_p = json::object();
    for (double p : p_list) {
        if (!(p > 1.0)) throw std::domain_error("resolvent_lp_sweep: p > 1 required");
        double sup_lower = 0.0, sup_upper = 0.0;
        bool have_upper = true;
        for (const cplx& lam : lambda_lattice) {
            PNormEstimate est;
            if (p >= 2.0) {
                est = resolvent_p_norm(op, lam, p);
            } else {
                // duality: rerun on the adjoint kernel at the conjugate exponent
                if (!adj) adj = assemble(op.kernel.adjoint(), op.grid);
                est = resolvent_p_norm(*adj, std::conj(lam), p / (p - 1.0));
            }
            CaseRecord c;
            std::ostringstream id;
            id << "p=" << p << " lam=" << lam.real() << (lam.imag() >= 0 ? "+" : "")
               << lam.imag() << "i";
            c.id = id.str();
            c.params = {{"p", p},
                        {"lambda_re", lam.real()},
                        {"lambda_im", lam.imag()},
                        {"in_admissible_range", range.contains(p)}};
            c.lhs = est.lower;
            c.rhs = est.upper.value_or(0.0);
            c.ratio = est.lower;
            if (est.upper)
                c.extra = {{"upper", *est.upper}};
            else
                have_upper = false;
            sup_lower = std::max(sup_lower, est.lower);
            if (est.upper) sup_upper = std::max(sup_upper, *est.upper);
            rep.cases.push_back(std::move(c));
        }
        json entry = {{"sup_lower", sup_lower}, {"in_range", range.contains(p)}};
        if (have_upper) entry["sup_upper"] = sup_upper;
        per_p[std::to_string(p)] = entry;
    }
    rep.summary = {{"per_p", per_p},
                   {"admissible_lower", range.lower},
                   {"admissible_upper",
                    std::isinf(range.upper) ? json("inf") : json(range.upper)}};
    rep.notes =
        "exponents outside the admissible window are reported for contrast only; no bound is "
        "claimed there";
    return rep;
}

double square_function_ratio(const DiscreteOperator& op, const std::vector<cplx>& lambdas,
                             const std::vector<GridFunction>& fs, double p) {
    if (lambdas.empty() || lambdas.size() != fs.size())
        throw std::domain_error("square_function_ratio: need matching nonempty families");
    const std::size_t N = op.size();
    std::vector<double> num(N, 0.0), den(N, 0.0);
    for (std::size_t t = 0; t < lambdas.size(); ++t) {
        GridFunction Tf = resolvent_apply(op, lambdas[t], fs[t]);
        for (std::size_t i = 0; i < N; ++i) {
            num[i] += std::norm(Tf[i]);
            den[i] += std::norm(fs[t][i]);
        }
    }
    GridFunction gnum(op.grid), gden(op.grid);
    for (std::size_t i = 0; i < N; ++i) {
        gnum[i] = cplx{std::sqrt(num[i]), 0.0};
        gden[i] = cplx{std::sqrt(den[i]), 0.0};
    }
    const double dn = gden.lp_norm(p);
    const double nn = gnum.lp_norm(p);
    if (dn == 0.0) {
        if (nn == 0.0) return 0.0;
        throw std::logic_error("square_function_ratio: zero denominator with nonzero numerator");
    }
    return nn / dn;
}

}  // namespace nonlocal
