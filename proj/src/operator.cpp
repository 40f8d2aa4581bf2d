#include "nonlocal/operator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nonlocal/fft.hpp"
#include "nonlocal/quadrature.hpp"

namespace nonlocal {

namespace {

constexpr std::size_t kDenseCap = 4096;  // largest N for a dense matrix

// signed nearest offset for an index difference on the torus
inline long signed_offset(long e, int n, bool periodic) {
    if (!periodic) return e;
    if (e > n / 2) e -= n;
    if (e < -(n / 2)) e += n;
    return e;
}

// ---- power-law singular moments (unit coefficient) ----------------------

// d=1: integral of z^{1-2a} over [lo, hi]
double power_moment_1d(double lo, double hi, double alpha) {
    const double p = 2.0 - 2.0 * alpha;
    return (std::pow(hi, p) - std::pow(lo, p)) / p;
}

// d=2: integral of |z|^{-2a} over the square [-s, s]^2
double power_self_moment_2d(double s, double alpha) {
    const double p = 2.0 - 2.0 * alpha;
    const auto f = [alpha](double phi) { return std::pow(std::cos(phi), 2.0 * alpha - 2.0); };
    const double ang = integrate_panel(f, 0.0, 0.25 * pi, 24);
    return 8.0 / p * std::pow(s, p) * ang;
}

// d=2: integral of |z|^{-2a} over the cell centered at (ex*h, ey*h)
double power_cell_moment_2d(int ex, int ey, double h, double alpha) {
    const GaussRule& g = gauss_rule(12);
    double s = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        for (std::size_t j = 0; j < g.nodes.size(); ++j) {
            const double zx = ex * h + 0.5 * h * g.nodes[i];
            const double zy = ey * h + 0.5 * h * g.nodes[j];
            s += g.weights[i] * g.weights[j] * std::pow(zx * zx + zy * zy, -alpha);
        }
    return 0.25 * h * h * s;
}

// Near-diagonal weight table K~(e) for the kernel coeff*|z|^{-d-2a}:
// second-moment matched so that the offset star carries the full singular
// moment of the 3h-neighborhood including the self cell.
void power_near_table(const Grid& g, double alpha, double near[3][3]) {
    const double h = g.h();
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) near[a][b] = 0.0;
    if (g.dimension == 1) {
        const double q_nb = power_moment_1d(0.5 * h, 1.5 * h, alpha);
        const double q_self = 2.0 * power_moment_1d(0.0, 0.5 * h, alpha);
        const double w = (q_nb + 0.5 * q_self) / (h * h * h);
        near[1][0] = near[1][2] = w;
    } else {
        const double q_a = power_cell_moment_2d(1, 0, h, alpha);
        const double q_b = power_cell_moment_2d(1, 1, h, alpha);
        const double q_self = power_self_moment_2d(0.5 * h, alpha);
        const double total = 4.0 * (q_a + q_b);
        const double boost = 1.0 + q_self / total;
        const double wa = q_a * boost / (h * h * h * h);
        const double wb = q_b * boost / (2.0 * h * h * h * h);
        near[1][0] = near[1][2] = near[0][1] = near[2][1] = wa;
        near[0][0] = near[0][2] = near[2][0] = near[2][2] = wb;
    }
}

// Near table for a general translation-invariant profile k(z).
void profile_near_table(const KernelSpec& spec, const Grid& g, cplx near[3][3]) {
    const double h = g.h();
    const double alpha = spec.order;
    const double sing = 2.0 * alpha - 1.0;  // z^2 k(z) ~ z^{1-2a} in 1D radial sections
    auto k = [&spec](double zx, double zy) { return spec.profile(Point{zx, zy}); };
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) near[a][b] = cplx{0, 0};

    if (g.dimension == 1) {
        auto mom = [&](double sgn) {
            return integrate_graded_c([&](double z) { return k(sgn * z, 0.0) * z * z; }, 0.5 * h,
                                      1.5 * h, 0.125 * h, 1.4, 10);
        };
        const cplx qp = mom(+1.0), qm = mom(-1.0);
        const cplx q0 =
            integrate_endpoint_singular_c([&](double z) { return k(z, 0.0) * z * z; }, 0.0, 0.5 * h,
                                          sing) +
            integrate_endpoint_singular_c([&](double z) { return k(-z, 0.0) * z * z; }, 0.0,
                                          0.5 * h, sing);
        const double asum = std::abs(qp) + std::abs(qm);
        near[1][2] = (qp + q0 * (std::abs(qp) / asum)) / (h * h * h);
        near[1][0] = (qm + q0 * (std::abs(qm) / asum)) / (h * h * h);
        return;
    }

    // d = 2
    cplx q[3][3];
    const GaussRule& gr = gauss_rule(10);
    double asum = 0.0;
    for (int ey = -1; ey <= 1; ++ey)
        for (int ex = -1; ex <= 1; ++ex) {
            if (ex == 0 && ey == 0) continue;
            cplx s{0, 0};
            for (std::size_t i = 0; i < gr.nodes.size(); ++i)
                for (std::size_t j = 0; j < gr.nodes.size(); ++j) {
                    const double zx = ex * h + 0.5 * h * gr.nodes[i];
                    const double zy = ey * h + 0.5 * h * gr.nodes[j];
                    s += gr.weights[i] * gr.weights[j] * k(zx, zy) * (zx * zx + zy * zy);
                }
            q[ey + 1][ex + 1] = 0.25 * h * h * s;
            asum += std::abs(q[ey + 1][ex + 1]);
        }
    // self cell, polar with the square boundary
    cplx q0{0, 0};
    const GaussRule& ga = gauss_rule(16);
    for (std::size_t a = 0; a < ga.nodes.size(); ++a) {
        const double phi = pi * (1.0 + ga.nodes[a]);  // [0, 2pi)
        const double c = std::cos(phi), s = std::sin(phi);
        const double rmax = 0.5 * h / std::max(std::abs(c), std::abs(s));
        const cplx ray = integrate_endpoint_singular_c(
            [&](double rho) { return k(rho * c, rho * s) * rho * rho * rho; }, 0.0, rmax, sing);
        q0 += pi * ga.weights[a] * ray;
    }
    for (int ey = -1; ey <= 1; ++ey)
        for (int ex = -1; ex <= 1; ++ex) {
            if (ex == 0 && ey == 0) continue;
            const cplx qe = q[ey + 1][ex + 1];
            const double r2 = (ex * ex + ey * ey) * h * h;
            near[ey + 1][ex + 1] = (qe + q0 * (std::abs(qe) / asum)) / (h * h * r2);
        }
}

// Near table for a general kernel around cell center x. The section function
// K(x, x + z) is indexed by the offset from x to the partner cell, so callers
// look up entry (-e) for the pair weight Ktilde_{ij} with e = i - j.
void general_near_table(const KernelSpec& spec, const Grid& g, const Point& x, cplx near[3][3]) {
    KernelSpec local = spec;
    local.form = KernelForm::TranslationInvariant;
    local.profile = [&spec, x](const Point& z) {
        return spec.evaluator(x, Point{x[0] + z[0], x[1] + z[1]});
    };
    profile_near_table(local, g, near);
}

// ---- periodized profiles --------------------------------------------------

// sum over images of coeff*|z + period*m|^{-d-2a}, d = 1, with Euler-Maclaurin
// closed-form tails.
double power_periodized_1d(double z, double alpha, double period, int images) {
    const double expo = 1.0 + 2.0 * alpha;
    double s = 0.0;
    for (int m = -images; m <= images; ++m) s += std::pow(std::abs(z + period * m), -expo);
    const auto tail = [&](double w) {
        return std::pow(w, 1.0 - expo) / ((expo - 1.0) * period) -
               expo * period * std::pow(w, -expo - 1.0) / 24.0;
    };
    s += tail(period * (images + 0.5) + z) + tail(period * (images + 0.5) - z);
    return s;
}

double power_periodized_2d(double zx, double zy, double alpha, double period, int images) {
    const double expo = 2.0 + 2.0 * alpha;
    double s = 0.0;
    for (int my = -images; my <= images; ++my)
        for (int mx = -images; mx <= images; ++mx)
            s += std::pow(sq(zx + period * mx) + sq(zy + period * my), -0.5 * expo);
    const double rstar = period * (images + 0.5);
    s += (2.0 * pi / (period * period)) * std::pow(rstar, 2.0 - expo) / (expo - 2.0);
    return s;
}

// image correction (all images except m = 0) for an arbitrary profile
cplx profile_image_sum(const KernelSpec& spec, double zx, double zy, double period, int images) {
    cplx s{0, 0};
    const int d = spec.dimension;
    if (d == 1) {
        for (int m = -images; m <= images; ++m) {
            if (m == 0) continue;
            s += spec.profile(Point{zx + period * m, 0.0});
        }
        // envelope remainder midpoint
        const double alpha = spec.order;
        const double lamid = 0.5 * (spec.lambda + 1.0 / spec.lambda);
        const double w1 = period * (images + 0.5) + zx, w2 = period * (images + 0.5) - zx;
        s += lamid * (std::pow(w1, -2.0 * alpha) + std::pow(w2, -2.0 * alpha)) /
             (2.0 * alpha * period);
    } else {
        for (int my = -images; my <= images; ++my)
            for (int mx = -images; mx <= images; ++mx) {
                if (mx == 0 && my == 0) continue;
                s += spec.profile(Point{zx + period * mx, zy + period * my});
            }
        const double alpha = spec.order;
        const double lamid = 0.5 * (spec.lambda + 1.0 / spec.lambda);
        const double rstar = period * (images + 0.5);
        s += lamid * (2.0 * pi / (period * period)) * std::pow(rstar, -2.0 * alpha) /
             (2.0 * alpha);
    }
    return s;
}

// effective profile value at offset z (periodization applied in periodic mode)
cplx effective_profile(const KernelSpec& spec, const Grid& g, double zx, double zy) {
    const double period = 2.0 * g.half_width;
    if (g.boundary == Boundary::Periodic) {
        if (spec.power_coeff) {
            const double base = (g.dimension == 1)
                                    ? power_periodized_1d(zx, spec.order, period, 24)
                                    : power_periodized_2d(zx, zy, spec.order, period, 12);
            return *spec.power_coeff * base;
        }
        return spec.profile(Point{zx, zy}) + profile_image_sum(spec, zx, zy, period, 64);
    }
    return spec.profile(Point{zx, zy});
}

// ---- exterior tails -------------------------------------------------------

double ray_exit_distance(const Point& x, double cphi, double sphi, double L) {
    double t = std::numeric_limits<double>::infinity();
    if (cphi > 0.0) t = std::min(t, (L - x[0]) / cphi);
    if (cphi < 0.0) t = std::min(t, (-L - x[0]) / cphi);
    if (sphi > 0.0) t = std::min(t, (L - x[1]) / sphi);
    if (sphi < 0.0) t = std::min(t, (-L - x[1]) / sphi);
    return t;
}

}  // namespace

std::vector<double> power_exterior_tail(const Grid& g, double alpha) {
    g.validate();
    const double L = g.half_width;
    const std::size_t N = g.size();
    std::vector<double> t(N, 0.0);
    if (g.boundary == Boundary::Periodic) return t;  // no exterior on the torus
    if (g.dimension == 1) {
        for (std::size_t i = 0; i < N; ++i) {
            const double x = g.center(i)[0];
            t[i] = (std::pow(L - x, -2.0 * alpha) + std::pow(L + x, -2.0 * alpha)) / (2.0 * alpha);
        }
        return t;
    }
    // d = 2: split the angular integral at the corner directions seen from x
    const GaussRule& gr = gauss_rule(16);
    for (std::size_t i = 0; i < N; ++i) {
        const Point x = g.center(i);
        double corners[4] = {std::atan2(L - x[1], L - x[0]), std::atan2(L - x[1], -L - x[0]),
                             std::atan2(-L - x[1], -L - x[0]), std::atan2(-L - x[1], L - x[0])};
        std::sort(corners, corners + 4);
        double acc = 0.0;
        for (int a = 0; a < 4; ++a) {
            const double lo = corners[a];
            const double hi = (a == 3) ? corners[0] + 2.0 * pi : corners[a + 1];
            const double mid = 0.5 * (lo + hi), hw = 0.5 * (hi - lo);
            for (std::size_t q = 0; q < gr.nodes.size(); ++q) {
                const double phi = mid + hw * gr.nodes[q];
                const double rex = ray_exit_distance(x, std::cos(phi), std::sin(phi), L);
                acc += hw * gr.weights[q] * std::pow(rex, -2.0 * alpha) / (2.0 * alpha);
            }
        }
        t[i] = acc;
    }
    return t;
}

// ---- PowerPairWeights -----------------------------------------------------

PowerPairWeights::PowerPairWeights(const Grid& g, double alpha) : grid_(g), alpha_(alpha) {
    g.validate();
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("PowerPairWeights: alpha must lie in (0,1)");
    near_on_ = g.cells_per_dim >= 4;
    if (near_on_) power_near_table(g, alpha, near_);
}

double PowerPairWeights::operator()(std::size_t i, std::size_t j) const {
    if (i == j) throw std::invalid_argument("PowerPairWeights: self pair has no weight");
    const int n = grid_.cells_per_dim;
    const bool per = grid_.boundary == Boundary::Periodic;
    long ex, ey = 0;
    if (grid_.dimension == 1) {
        ex = static_cast<long>(i) - static_cast<long>(j);
    } else {
        ex = static_cast<long>(i % n) - static_cast<long>(j % n);
        ey = static_cast<long>(i / n) - static_cast<long>(j / n);
    }
    ex = signed_offset(ex, n, per);
    ey = signed_offset(ey, n, per);
    if (near_on_ && std::labs(ex) <= 1 && std::labs(ey) <= 1)
        return near_[ey + 1][ex + 1];
    const double h = grid_.h();
    const double r = h * std::sqrt(static_cast<double>(ex * ex + ey * ey));
    return std::pow(r, -(grid_.dimension + 2.0 * alpha_));
}

const std::vector<double>& PowerPairWeights::exterior_tail() const {
    if (tail_.empty()) tail_ = power_exterior_tail(grid_, alpha_);
    return tail_;
}

// ---- seminorm -------------------------------------------------------------

double seminorm(const GridFunction& u, double alpha, const std::optional<Ball>& region) {
    const Grid& g = u.grid;
    PowerPairWeights w(g, alpha);
    std::vector<std::size_t> cells;
    if (region) {
        cells = cells_in_ball(g, *region);
    } else {
        cells.resize(g.size());
        for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = i;
    }
    double s = 0.0;
    for (std::size_t a = 0; a < cells.size(); ++a)
        for (std::size_t b = a + 1; b < cells.size(); ++b) {
            const std::size_t i = cells[a], j = cells[b];
            const double d2 = std::norm(u[i] - u[j]);
            if (d2 != 0.0) s += 2.0 * w(i, j) * d2;  // both ordered pairs
        }
    const double hd = g.cell_measure();
    return hd * hd * s;
}

// ---- tail weights for a kernel ---------------------------------------------

namespace {

struct TailResult {
    std::vector<double> weights;
    double halfwidth = 0.0;
};

TailResult kernel_exterior_tail(const KernelSpec& spec, const Grid& g) {
    TailResult out;
    const std::size_t N = g.size();
    out.weights.assign(N, 0.0);
    if (g.boundary == Boundary::Periodic) return out;

    const double L = g.half_width;
    const double alpha = spec.order;

    if (spec.power_coeff) {
        // two-sided exterior integral of (K(x,y) + K(y,x)) has coefficient
        // 2 Re(c); the radial integral is exact, so no remainder interval
        const double c2 = 2.0 * spec.power_coeff->real();
        std::vector<double> base = power_exterior_tail(g, alpha);
        for (std::size_t i = 0; i < N; ++i) out.weights[i] = c2 * base[i];
        return out;
    }

    const double R = 8.0 * L;
    const double sigma = (g.dimension == 1) ? 2.0 : 2.0 * pi;
    const double rem = sigma * std::pow(R, -2.0 * alpha) / (2.0 * alpha);
    const double mid = (spec.lambda + 1.0 / spec.lambda) * rem;
    out.halfwidth = (1.0 / spec.lambda - spec.lambda) * rem;

    auto two_sided = [&spec](const Point& x, const Point& y) {
        return (spec.eval(x, y) + spec.eval(y, x)).real();
    };

    if (g.dimension == 1) {
        for (std::size_t i = 0; i < N; ++i) {
            const Point x = g.center(i);
            double acc = 0.0;
            for (double sgn : {+1.0, -1.0}) {
                const double gdist = (sgn > 0 ? L - x[0] : L + x[0]);
                auto f = [&](double t) {  // t = distance from x
                    return two_sided(x, Point{x[0] + sgn * t, 0.0});
                };
                acc += integrate_graded(f, gdist, R, 0.25 * gdist, 1.5, 10);
            }
            out.weights[i] = acc + mid;
        }
        return out;
    }

    // d = 2
    const GaussRule& gr = gauss_rule(12);
    for (std::size_t i = 0; i < N; ++i) {
        const Point x = g.center(i);
        double corners[4] = {std::atan2(L - x[1], L - x[0]), std::atan2(L - x[1], -L - x[0]),
                             std::atan2(-L - x[1], -L - x[0]), std::atan2(-L - x[1], L - x[0])};
        std::sort(corners, corners + 4);
        double acc = 0.0;
        for (int a = 0; a < 4; ++a) {
            const double lo = corners[a];
            const double hi = (a == 3) ? corners[0] + 2.0 * pi : corners[a + 1];
            const double amid = 0.5 * (lo + hi), ahw = 0.5 * (hi - lo);
            for (std::size_t q = 0; q < gr.nodes.size(); ++q) {
                const double phi = amid + ahw * gr.nodes[q];
                const double cph = std::cos(phi), sph = std::sin(phi);
                const double rex = ray_exit_distance(x, cph, sph, L);
                auto f = [&](double rho) {
                    const Point y{x[0] + rho * cph, x[1] + rho * sph};
                    return two_sided(x, y) * rho;
                };
                acc += ahw * gr.weights[q] * integrate_graded(f, rex, R, 0.25 * rex, 1.6, 8);
            }
        }
        out.weights[i] = acc + mid;
    }
    return out;
}

}  // namespace

// ---- assembly ---------------------------------------------------------------

DiscreteOperator assemble(const KernelSpec& spec_in, const Grid& grid, const AssembleOptions& opts) {
    KernelSpec spec = spec_in;
    if (spec.form == KernelForm::FractionalLaplacian && !spec.power_coeff) {
        // materialize the profile so the translation-invariant machinery has
        // a uniform entry point
        const double c = 0.5 * normalization_constant(spec.dimension, spec.order);
        const double expo = spec.dimension + 2.0 * spec.order;
        spec.power_coeff = cplx{c, 0.0};
        spec.profile = [c, expo](const Point& z) {
            return cplx{c * std::pow(std::sqrt(sq(z[0]) + sq(z[1])), -expo), 0.0};
        };
    }
    spec.validate_fields();
    grid.validate();
    if (spec.dimension != grid.dimension)
        throw std::invalid_argument("assemble: kernel and grid dimensions differ");
    const bool ze = grid.boundary == Boundary::ZeroExtension;
    if (ze && grid.cells_per_dim < 4)
        throw std::invalid_argument(
            "assemble: zero-extension grids need n >= 4 for near-diagonal quadrature");

    DiscreteOperator op;
    op.grid = grid;
    op.kernel = spec;
    op.sector = SectorParams::from_lambda(spec.lambda, opts.theta_fraction, opts.summands);

    const int d = grid.dimension;
    const int n = grid.cells_per_dim;
    const double h = grid.h();
    const double hd = grid.cell_measure();
    const std::size_t N = grid.size();

    if (ze) {
        TailResult tr = kernel_exterior_tail(spec, grid);
        op.tail_weights_ = std::move(tr.weights);
        op.tail_halfwidth_ = tr.halfwidth;
    }

    const bool near_on = n >= 4;

    if (spec.translation_invariant()) {
        op.has_stencil_ = true;
        // near-diagonal weights from the base profile
        cplx nearK[3][3] = {};
        if (near_on) {
            if (spec.power_coeff) {
                double tab[3][3];
                power_near_table(grid, spec.order, tab);
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b) nearK[a][b] = *spec.power_coeff * tab[a][b];
            } else {
                profile_near_table(spec, grid, nearK);
            }
            if (!ze) {
                // far images seen from a near offset enter as plain values
                for (int ey = (d == 2 ? -1 : 0); ey <= (d == 2 ? 1 : 0); ++ey)
                    for (int ex = -1; ex <= 1; ++ex) {
                        if (ex == 0 && ey == 0) continue;
                        nearK[ey + 1][ex + 1] += effective_profile(spec, grid, ex * h, ey * h) -
                                                 spec.profile(Point{ex * h, ey * h});
                    }
            }
        }

        auto ktilde = [&](long ex, long ey) -> cplx {  // signed offsets, not both zero
            if (near_on && std::labs(ex) <= 1 && std::labs(ey) <= 1)
                return nearK[ey + 1][ex + 1];
            return effective_profile(spec, grid, ex * h, ey * h);
        };
        auto sym_value = [&](long ex, long ey) -> cplx {
            return ktilde(ex, ey) + ktilde(-ex, -ey);
        };

        if (!ze) {
            // circulant: offset table indexed by (m mod n) per dimension
            op.emb_n_ = static_cast<std::size_t>(n);
            const std::size_t tn = (d == 1) ? op.emb_n_ : op.emb_n_ * op.emb_n_;
            op.stencil_.assign(tn, cplx{0, 0});
            if (d == 1) {
                for (int m = 1; m < n; ++m) {
                    const long ms = signed_offset(m, n, true);
                    op.stencil_[m] = sym_value(ms, 0);
                }
            } else {
                for (int my = 0; my < n; ++my)
                    for (int mx = 0; mx < n; ++mx) {
                        if (mx == 0 && my == 0) continue;
                        const long sx = signed_offset(mx, n, true);
                        const long sy = signed_offset(my, n, true);
                        op.stencil_[static_cast<std::size_t>(my) * n + mx] = sym_value(sx, sy);
                    }
            }
            // diagonal constant
            cplx dsum{0, 0};
            for (const cplx& v : op.stencil_) dsum += v;
            op.diag_.assign(N, hd * dsum);
            // symbol: direct cosine sum keeps symmetric kernels exactly
            // nonnegative; FFT route for large grids
            op.symbol_.assign(N, cplx{0, 0});
            const bool direct = (d == 1) ? (static_cast<long>(n) * n <= (1L << 24))
                                         : (static_cast<long>(N) * N <= (1L << 24));
            if (direct) {
                if (d == 1) {
                    for (int k = 0; k < n; ++k) {
                        cplx acc{0, 0};
                        for (int m = 1; m < n; ++m)
                            acc += op.stencil_[m] *
                                   (1.0 - std::cos(2.0 * pi * static_cast<double>(k) * m / n));
                        op.symbol_[k] = hd * acc;
                    }
                } else {
                    for (int ky = 0; ky < n; ++ky)
                        for (int kx = 0; kx < n; ++kx) {
                            cplx acc{0, 0};
                            for (int my = 0; my < n; ++my)
                                for (int mx = 0; mx < n; ++mx) {
                                    if (mx == 0 && my == 0) continue;
                                    const double ph =
                                        2.0 * pi * (static_cast<double>(kx) * mx +
                                                    static_cast<double>(ky) * my) / n;
                                    acc += op.stencil_[static_cast<std::size_t>(my) * n + mx] *
                                           (1.0 - std::cos(ph));
                                }
                            op.symbol_[static_cast<std::size_t>(ky) * n + kx] = hd * acc;
                        }
                }
            } else {
                std::vector<cplx> sf = op.stencil_;
                if (d == 1)
                    fft_plan(op.emb_n_).forward(sf);
                else
                    fft2(sf, op.emb_n_, op.emb_n_, false);
                const cplx dval = op.diag_[0];
                for (std::size_t k = 0; k < N; ++k) op.symbol_[k] = dval - hd * sf[k];
            }
            if (spec.symmetric) {
                for (auto& mu : op.symbol_) mu = cplx{std::max(mu.real(), 0.0), 0.0};
            }
        } else {
            // Toeplitz, embedded in a circulant of twice the size per dimension
            op.emb_n_ = 2 * static_cast<std::size_t>(n);
            const std::size_t tn = (d == 1) ? op.emb_n_ : op.emb_n_ * op.emb_n_;
            op.stencil_.assign(tn, cplx{0, 0});
            auto wrap = [&](long m) -> std::size_t {
                return static_cast<std::size_t>(m >= 0 ? m : static_cast<long>(op.emb_n_) + m);
            };
            if (d == 1) {
                std::vector<cplx> srow(n, cplx{0, 0});  // S(m), m = |offset|
                for (int m = 1; m < n; ++m) srow[m] = sym_value(m, 0);
                for (int m = 1; m < n; ++m) {
                    op.stencil_[wrap(m)] = srow[m];
                    op.stencil_[wrap(-m)] = srow[m];
                }
                // diagonal by prefix sums (exact, no FFT noise)
                std::vector<cplx> pre(n, cplx{0, 0});
                for (int m = 1; m < n; ++m) pre[m] = pre[m - 1] + srow[m];
                op.diag_.assign(N, cplx{0, 0});
                for (int i = 0; i < n; ++i) op.diag_[i] = hd * (pre[i] + pre[n - 1 - i]);
            } else {
                std::vector<cplx> stab(static_cast<std::size_t>(2 * n - 1) * (2 * n - 1),
                                       cplx{0, 0});
                auto sidx = [&](long ex, long ey) {
                    return static_cast<std::size_t>(ey + n - 1) * (2 * n - 1) +
                           static_cast<std::size_t>(ex + n - 1);
                };
                for (long ey = -(n - 1); ey <= n - 1; ++ey)
                    for (long ex = -(n - 1); ex <= n - 1; ++ex) {
                        if (ex == 0 && ey == 0) continue;
                        stab[sidx(ex, ey)] = sym_value(ex, ey);
                        op.stencil_[wrap(ey) * op.emb_n_ + wrap(ex)] = stab[sidx(ex, ey)];
                    }
                // 2-D prefix sums over the offset table for the diagonal
                const long w = 2 * n - 1;
                std::vector<cplx> pre(static_cast<std::size_t>(w + 1) * (w + 1), cplx{0, 0});
                for (long a = 0; a < w; ++a)
                    for (long b = 0; b < w; ++b)
                        pre[(a + 1) * (w + 1) + (b + 1)] = stab[a * w + b] +
                                                           pre[a * (w + 1) + (b + 1)] +
                                                           pre[(a + 1) * (w + 1) + b] -
                                                           pre[a * (w + 1) + b];
                auto rect = [&](long alo, long ahi, long blo, long bhi) {  // inclusive offsets
                    const long a0 = alo + n - 1, a1 = ahi + n, b0 = blo + n - 1, b1 = bhi + n;
                    return pre[a1 * (w + 1) + b1] - pre[a0 * (w + 1) + b1] -
                           pre[a1 * (w + 1) + b0] + pre[a0 * (w + 1) + b0];
                };
                op.diag_.assign(N, cplx{0, 0});
                for (int iy = 0; iy < n; ++iy)
                    for (int ix = 0; ix < n; ++ix)
                        op.diag_[static_cast<std::size_t>(iy) * n + ix] =
                            hd * rect(-iy, n - 1 - iy, -ix, n - 1 - ix);
            }
        }
        for (const cplx& v : op.stencil_)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw std::runtime_error("assemble: kernel evaluation produced non-finite weights");

        // forward transform of the stencil for the convolution path
        op.stencil_fft_ = op.stencil_;
        if (d == 1)
            fft_plan(op.emb_n_).forward(op.stencil_fft_);
        else
            fft2(op.stencil_fft_, op.emb_n_, op.emb_n_, false);

        if (opts.build_dense) op.build_dense_matrix();
        return op;
    }

    // general kernel: dense representation
    if (N > kDenseCap)
        throw std::invalid_argument("assemble: general kernels need N <= 4096 (dense)");
    op.has_stencil_ = false;
    op.dense_ = std::make_unique<Eigen::MatrixXcd>(
        Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N)));
    Eigen::MatrixXcd& A = *op.dense_;

    // per-cell near-diagonal weights
    std::vector<std::array<cplx, 9>> nearW;
    if (near_on) {
        nearW.assign(N, {});
        for (std::size_t i = 0; i < N; ++i) {
            cplx tab[3][3];
            general_near_table(spec, grid, grid.center(i), tab);
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) nearW[i][a * 3 + b] = tab[a][b];
        }
    }

    auto ktilde_pair = [&](std::size_t i, std::size_t j) -> cplx {
        long ex, ey = 0;
        if (d == 1) {
            ex = static_cast<long>(i) - static_cast<long>(j);
        } else {
            ex = static_cast<long>(i % n) - static_cast<long>(j % n);
            ey = static_cast<long>(i / n) - static_cast<long>(j / n);
        }
        ex = signed_offset(ex, n, !ze);
        ey = signed_offset(ey, n, !ze);
        // the per-cell table is indexed by the offset from x_i to x_j, which
        // is the negation of the index difference i - j
        if (near_on && std::labs(ex) <= 1 && std::labs(ey) <= 1)
            return nearW[i][(-ey + 1) * 3 + (-ex + 1)];
        const Point xi = grid.center(i);
        const Point yj = grid.nearest_image(xi, grid.center(j));
        return spec.eval(xi, yj);
    };

    for (std::size_t i = 0; i < N; ++i) {
        cplx rowsum{0, 0};
        for (std::size_t j = 0; j < N; ++j) {
            if (i == j) continue;
            const cplx s = ktilde_pair(i, j) + ktilde_pair(j, i);
            A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = -hd * s;
            rowsum += s;
        }
        cplx diag = hd * rowsum;
        if (ze) diag += op.tail_weights_[i];
        A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = diag;
        if (!std::isfinite(diag.real()) || !std::isfinite(diag.imag()))
            throw std::runtime_error("assemble: kernel evaluation produced non-finite weights");
    }
    return op;
}

// ---- DiscreteOperator methods ----------------------------------------------

GridFunction DiscreteOperator::apply(const GridFunction& u) const {
    if (has_stencil_) return stencil_apply(u, false);
    return apply_dense(u);
}

GridFunction DiscreteOperator::apply_fast(const GridFunction& u) const {
    if (!has_stencil_)
        throw std::runtime_error("apply_fast: operator has no translation-invariant representation");
    return stencil_apply(u, false);
}

GridFunction DiscreteOperator::apply_adjoint(const GridFunction& u) const {
    if (has_stencil_) return stencil_apply(u, true);
    const Eigen::MatrixXcd& A = dense();
    GridFunction out(grid);
    Eigen::Map<const Eigen::VectorXcd> x(u.values.data(), static_cast<Eigen::Index>(u.size()));
    Eigen::Map<Eigen::VectorXcd> y(out.values.data(), static_cast<Eigen::Index>(out.size()));
    y = A.adjoint() * x;
    return out;
}

GridFunction DiscreteOperator::apply_dense(const GridFunction& u) const {
    const Eigen::MatrixXcd& A = dense();
    GridFunction out(grid);
    Eigen::Map<const Eigen::VectorXcd> x(u.values.data(), static_cast<Eigen::Index>(u.size()));
    Eigen::Map<Eigen::VectorXcd> y(out.values.data(), static_cast<Eigen::Index>(out.size()));
    y = A * x;
    return out;
}

GridFunction DiscreteOperator::stencil_apply(const GridFunction& u, bool adjoint) const {
    // A is complex symmetric by construction, so A^H u = conj(A conj(u)).
    const int d = grid.dimension;
    const std::size_t N = grid.size();
    const std::size_t n = static_cast<std::size_t>(grid.cells_per_dim);
    const double hd = grid.cell_measure();
    const bool per = periodic();

    std::vector<cplx> work(d == 1 ? emb_n_ : emb_n_ * emb_n_, cplx{0, 0});
    if (per && d == 1) {
        for (std::size_t i = 0; i < N; ++i) work[i] = adjoint ? std::conj(u[i]) : u[i];
        fft_plan(emb_n_).forward(work);
        for (std::size_t k = 0; k < N; ++k) work[k] *= symbol_[k];
        fft_plan(emb_n_).inverse(work);
        GridFunction out(grid);
        for (std::size_t i = 0; i < N; ++i) out[i] = adjoint ? std::conj(work[i]) : work[i];
        return out;
    }
    if (per && d == 2) {
        for (std::size_t i = 0; i < N; ++i) work[i] = adjoint ? std::conj(u[i]) : u[i];
        fft2(work, emb_n_, emb_n_, false);
        for (std::size_t k = 0; k < N; ++k) work[k] *= symbol_[k];
        fft2(work, emb_n_, emb_n_, true);
        GridFunction out(grid);
        for (std::size_t i = 0; i < N; ++i) out[i] = adjoint ? std::conj(work[i]) : work[i];
        return out;
    }

    // zero-extension: embedded-circulant convolution
    if (d == 1) {
        for (std::size_t i = 0; i < n; ++i) work[i] = adjoint ? std::conj(u[i]) : u[i];
    } else {
        for (std::size_t iy = 0; iy < n; ++iy)
            for (std::size_t ix = 0; ix < n; ++ix)
                work[iy * emb_n_ + ix] = adjoint ? std::conj(u[iy * n + ix]) : u[iy * n + ix];
    }
    if (d == 1) {
        fft_plan(emb_n_).forward(work);
        for (std::size_t k = 0; k < emb_n_; ++k) work[k] *= stencil_fft_[k];
        fft_plan(emb_n_).inverse(work);
    } else {
        fft2(work, emb_n_, emb_n_, false);
        for (std::size_t k = 0; k < work.size(); ++k) work[k] *= stencil_fft_[k];
        fft2(work, emb_n_, emb_n_, true);
    }
    GridFunction out(grid);
    for (std::size_t i = 0; i < N; ++i) {
        const std::size_t wi = (d == 1) ? i : (i / n) * emb_n_ + (i % n);
        const cplx ui = adjoint ? std::conj(u[i]) : u[i];
        cplx v = diag_[i] * ui - hd * work[wi];
        if (!tail_weights_.empty()) v += tail_weights_[i] * ui;
        out[i] = adjoint ? std::conj(v) : v;
    }
    return out;
}

cplx DiscreteOperator::form_value(const GridFunction& u, const GridFunction& v) const {
    return inner(apply(u), v);
}

const std::vector<cplx>& DiscreteOperator::symbol() const {
    if (!spectral_available())
        throw std::runtime_error("symbol: requires a translation-invariant periodic operator");
    return symbol_;
}

const Eigen::MatrixXcd& DiscreteOperator::dense() const {
    if (!dense_) build_dense_matrix();
    return *dense_;
}

void DiscreteOperator::build_dense_matrix() const {
    const std::size_t N = grid.size();
    if (N > kDenseCap) throw std::runtime_error("dense: operator too large for a dense matrix");
    if (!has_stencil_)
        throw std::runtime_error("dense: general operator lost its dense representation");
    dense_ = std::make_unique<Eigen::MatrixXcd>(
        Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N)));
    Eigen::MatrixXcd& A = *dense_;
    const int d = grid.dimension;
    const std::size_t n = static_cast<std::size_t>(grid.cells_per_dim);
    const double hd = grid.cell_measure();
    const bool per = periodic();

    auto stencil_at = [&](long ex, long ey) -> cplx {
        if (per) {
            const std::size_t mx = static_cast<std::size_t>((ex % static_cast<long>(n) +
                                                             static_cast<long>(n)) %
                                                            static_cast<long>(n));
            const std::size_t my = static_cast<std::size_t>((ey % static_cast<long>(n) +
                                                             static_cast<long>(n)) %
                                                            static_cast<long>(n));
            return (d == 1) ? stencil_[mx] : stencil_[my * emb_n_ + mx];
        }
        auto wrap = [&](long m) {
            return static_cast<std::size_t>(m >= 0 ? m : static_cast<long>(emb_n_) + m);
        };
        return (d == 1) ? stencil_[wrap(ex)] : stencil_[wrap(ey) * emb_n_ + wrap(ex)];
    };

    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = 0; j < N; ++j) {
            if (i == j) continue;
            long ex, ey = 0;
            if (d == 1) {
                ex = static_cast<long>(i) - static_cast<long>(j);
            } else {
                ex = static_cast<long>(i % n) - static_cast<long>(j % n);
                ey = static_cast<long>(i / n) - static_cast<long>(j / n);
            }
            A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                -hd * stencil_at(ex, ey);
        }
        cplx diag = diag_[i];
        if (!tail_weights_.empty()) diag += tail_weights_[i];
        A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = diag;
    }
}

double DiscreteOperator::spectral_radius_estimate() const {
    if (radius_est_ >= 0.0) return radius_est_;
    if (spectral_available()) {
        double m = 0.0;
        for (const cplx& mu : symbol_) m = std::max(m, std::abs(mu));
        radius_est_ = m;
        return radius_est_;
    }
    GridFunction v(grid);
    Rng rng(1);
    for (auto& x : v.values) x = cplx{rng.uniform(0.5, 1.0), rng.uniform(-0.5, 0.5)};
    double est = 0.0;
    for (int it = 0; it < 12; ++it) {
        const double nv = v.l2_norm();
        v *= cplx{1.0 / nv, 0.0};
        v = apply(v);
        est = v.l2_norm();
    }
    radius_est_ = 1.1 * est;
    return radius_est_;
}

}  // namespace nonlocal
