#include "nonlocal/solve.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "nonlocal/fft.hpp"

namespace nonlocal {

namespace {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

Eigen::Map<const Vec> as_vec(const GridFunction& u) {
    return {u.values.data(), static_cast<Eigen::Index>(u.size())};
}

GridFunction from_vec(const Grid& g, const Vec& v) {
    GridFunction out(g);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = v(static_cast<Eigen::Index>(i));
    return out;
}

struct HermEig {
    Mat vectors;
    Eigen::VectorXd values;  // clamped at zero: the form is a sum of squares
};

}  // namespace

// Factorization cache: read-mostly, single-writer insertion, LRU eviction by
// byte budget.
struct SolverCache {
    std::mutex mu;
    struct Entry {
        std::shared_ptr<Eigen::PartialPivLU<Mat>> lu;
        std::size_t bytes = 0;
        std::uint64_t stamp = 0;
    };
    std::map<std::pair<double, double>, Entry> lus;
    std::uint64_t counter = 0;
    std::size_t total_bytes = 0;
    std::size_t budget = std::size_t{512} << 20;
    std::shared_ptr<HermEig> herm;
    std::shared_ptr<std::pair<Mat, Mat>> pade;  // num, den^{-1}-factored via lu below
};

namespace {

SolverCache& cache_of(const DiscreteOperator& op) {
    if (!op.solver_cache) op.solver_cache = std::make_shared<SolverCache>();
    return *op.solver_cache;
}

std::shared_ptr<Eigen::PartialPivLU<Mat>> lu_for(const DiscreteOperator& op, cplx lambda) {
    SolverCache& c = cache_of(op);
    const auto key = std::make_pair(lambda.real(), lambda.imag());
    std::lock_guard<std::mutex> lock(c.mu);
    auto it = c.lus.find(key);
    if (it != c.lus.end()) {
        it->second.stamp = ++c.counter;
        return it->second.lu;
    }
    const std::size_t N = op.size();
    Mat M = op.dense();
    for (std::size_t i = 0; i < N; ++i)
        M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += lambda;
    auto lu = std::make_shared<Eigen::PartialPivLU<Mat>>(std::move(M));
    SolverCache::Entry e{lu, 16 * N * N, ++c.counter};
    c.total_bytes += e.bytes;
    c.lus.emplace(key, std::move(e));
    while (c.total_bytes > c.budget && c.lus.size() > 1) {
        auto victim = c.lus.begin();
        for (auto jt = c.lus.begin(); jt != c.lus.end(); ++jt)
            if (jt->second.stamp < victim->second.stamp) victim = jt;
        c.total_bytes -= victim->second.bytes;
        c.lus.erase(victim);
    }
    return lu;
}

std::shared_ptr<HermEig> herm_for(const DiscreteOperator& op) {
    SolverCache& c = cache_of(op);
    {
        std::lock_guard<std::mutex> lock(c.mu);
        if (c.herm) return c.herm;
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(op.dense());
    auto he = std::make_shared<HermEig>();
    he->vectors = es.eigenvectors();
    he->values = es.eigenvalues().cwiseMax(0.0);
    std::lock_guard<std::mutex> lock(c.mu);
    if (!c.herm) c.herm = he;
    return c.herm;
}

void check_sector(const DiscreteOperator& op, cplx lambda) {
    if (lambda == cplx{0.0, 0.0}) throw std::domain_error("resolve: lambda = 0 is excluded");
    const double a = std::abs(std::arg(lambda));
    if (a > op.sector.theta + 1e-12)
        throw std::domain_error("resolve: lambda outside the closed working sector S_theta");
}

GridFunction spectral_solve(const DiscreteOperator& op, cplx lambda, const GridFunction& f,
                            bool adjoint) {
    const std::vector<cplx>& mu = op.symbol();
    const std::size_t N = op.size();
    std::vector<cplx> w(f.values);
    const int d = op.grid.dimension;
    const std::size_t n = static_cast<std::size_t>(op.grid.cells_per_dim);
    if (adjoint)
        for (auto& x : w) x = std::conj(x);
    if (d == 1)
        fft_plan(n).forward(w);
    else
        fft2(w, n, n, false);
    for (std::size_t k = 0; k < N; ++k) w[k] /= (lambda + mu[k]);
    if (d == 1)
        fft_plan(n).inverse(w);
    else
        fft2(w, n, n, true);
    if (adjoint)
        for (auto& x : w) x = std::conj(x);
    GridFunction out(op.grid);
    out.values = std::move(w);
    return out;
}

// right-preconditioned restarted GMRES for (lambda + A) u = f
GridFunction gmres_solve(const DiscreteOperator& op, cplx lambda, const GridFunction& f,
                         bool adjoint, double tol, SolveInfo* info) {
    const std::size_t N = op.size();
    const int restart = 60;
    const int max_outer = 40;

    // frozen-kernel circulant preconditioner on translation-invariant grids:
    // periodic symbol of the same stencil at the same size
    std::vector<cplx> precond_symbol;
    if (op.translation_invariant() && op.grid.dimension == 1 &&
        op.grid.boundary == Boundary::ZeroExtension) {
        Grid pg = op.grid;
        pg.boundary = Boundary::Periodic;
        KernelSpec ks = fractional_kernel(1, op.kernel.order);
        DiscreteOperator pop = assemble(ks, pg);
        precond_symbol = pop.symbol();
    }
    auto precond = [&](const GridFunction& r) -> GridFunction {
        if (precond_symbol.empty()) return r;
        std::vector<cplx> w(r.values);
        if (adjoint)
            for (auto& x : w) x = std::conj(x);
        fft_plan(w.size()).forward(w);
        for (std::size_t k = 0; k < w.size(); ++k) w[k] /= (lambda + precond_symbol[k]);
        fft_plan(w.size()).inverse(w);
        if (adjoint)
            for (auto& x : w) x = std::conj(x);
        GridFunction out(r.grid);
        out.values = std::move(w);
        return out;
    };
    auto apply_shifted = [&](const GridFunction& v) {
        GridFunction av = adjoint ? op.apply_adjoint(v) : op.apply(v);
        const cplx lam = adjoint ? std::conj(lambda) : lambda;
        for (std::size_t i = 0; i < N; ++i) av[i] += lam * v[i];
        return av;
    };

    const double fnorm = f.l2_norm();
    if (fnorm == 0.0) {
        if (info) info->residual_rel = 0.0;
        return GridFunction(op.grid);
    }

    GridFunction x(op.grid);
    double best_res = std::numeric_limits<double>::infinity();
    int total_iters = 0;

    for (int outer = 0; outer < max_outer; ++outer) {
        GridFunction r = apply_shifted(x);
        for (std::size_t i = 0; i < N; ++i) r[i] = f[i] - r[i];
        double beta = r.l2_norm();
        best_res = std::min(best_res, beta / fnorm);
        if (beta / fnorm <= tol) break;

        std::vector<GridFunction> V;
        V.reserve(restart + 1);
        GridFunction v0 = r;
        v0 *= cplx{1.0 / beta, 0.0};
        V.push_back(std::move(v0));

        std::vector<std::vector<cplx>> H(restart + 1, std::vector<cplx>(restart, cplx{0, 0}));
        std::vector<cplx> cs(restart), sn(restart), g(restart + 1, cplx{0, 0});
        g[0] = beta;
        int m = 0;
        for (int j = 0; j < restart; ++j) {
            ++total_iters;
            GridFunction w = apply_shifted(precond(V[j]));
            for (int i = 0; i <= j; ++i) {
                H[i][j] = inner(w, V[i]);
                for (std::size_t q = 0; q < N; ++q) w[q] -= H[i][j] * V[i][q];
            }
            const double hnext = w.l2_norm();
            H[j + 1][j] = hnext;
            for (int i = 0; i < j; ++i) {
                const cplx t = cs[i] * H[i][j] + sn[i] * H[i + 1][j];
                H[i + 1][j] = -std::conj(sn[i]) * H[i][j] + std::conj(cs[i]) * H[i + 1][j];
                H[i][j] = t;
            }
            const double denom = std::sqrt(std::norm(H[j][j]) + std::norm(H[j + 1][j]));
            if (denom == 0.0) {
                m = j;
                break;
            }
            cs[j] = std::conj(H[j][j]) / denom;
            sn[j] = std::conj(H[j + 1][j]) / denom;
            H[j][j] = cs[j] * H[j][j] + sn[j] * H[j + 1][j];
            H[j + 1][j] = 0.0;
            g[j + 1] = -std::conj(sn[j]) * g[j];
            g[j] = cs[j] * g[j];
            m = j + 1;
            if (hnext == 0.0) break;  // exact subspace, solution inside
            if (std::abs(g[j + 1]) / fnorm <= 0.2 * tol) break;
            w *= cplx{1.0 / hnext, 0.0};
            V.push_back(std::move(w));
        }
        // back substitution
        std::vector<cplx> y(m, cplx{0, 0});
        for (int i = m - 1; i >= 0; --i) {
            cplx s = g[i];
            for (int k = i + 1; k < m; ++k) s -= H[i][k] * y[k];
            y[i] = s / H[i][i];
        }
        GridFunction z(op.grid);
        for (int i = 0; i < m; ++i)
            for (std::size_t q = 0; q < N; ++q) z[q] += y[i] * V[i][q];
        z = precond(z);
        for (std::size_t q = 0; q < N; ++q) x[q] += z[q];

        GridFunction rr = apply_shifted(x);
        for (std::size_t i = 0; i < N; ++i) rr[i] = f[i] - rr[i];
        best_res = std::min(best_res, rr.l2_norm() / fnorm);
        if (best_res <= tol) break;
    }

    if (info) {
        info->iterations = total_iters;
        info->residual_rel = best_res;
    }
    if (best_res > tol)
        throw convergence_error("gmres: residual tolerance not reached", best_res, total_iters);
    return x;
}

}  // namespace

GridFunction resolve(const DiscreteOperator& op, cplx lambda, const GridFunction& f,
                     SolveMethod method, SolveInfo* info) {
    check_sector(op, lambda);
    const std::size_t N = op.size();
    const double tol = 1e-10;

    if (method == SolveMethod::Spectral && !op.spectral_available())
        throw std::runtime_error("resolve: spectral method needs a translation-invariant periodic operator");
    if (method == SolveMethod::Auto) {
        if (op.spectral_available())
            method = SolveMethod::Spectral;
        else if (N <= 4096)
            method = SolveMethod::DenseLU;
        else
            method = SolveMethod::Krylov;
    }

    switch (method) {
        case SolveMethod::Spectral: {
            GridFunction u = spectral_solve(op, lambda, f, false);
            if (info) {
                info->used = SolveMethod::Spectral;
                GridFunction r = op.apply(u);
                for (std::size_t i = 0; i < N; ++i) r[i] = f[i] - r[i] - lambda * u[i];
                const double fn = f.l2_norm();
                info->residual_rel = fn == 0.0 ? 0.0 : r.l2_norm() / fn;
            }
            return u;
        }
        case SolveMethod::DenseLU: {
            auto lu = lu_for(op, lambda);
            Vec u = lu->solve(as_vec(f));
            if (info) {
                info->used = SolveMethod::DenseLU;
                GridFunction ug = from_vec(op.grid, u);
                GridFunction r = op.apply(ug);
                for (std::size_t i = 0; i < N; ++i) r[i] = f[i] - r[i] - lambda * ug[i];
                const double fn = f.l2_norm();
                info->residual_rel = fn == 0.0 ? 0.0 : r.l2_norm() / fn;
                return ug;
            }
            return from_vec(op.grid, u);
        }
        case SolveMethod::Krylov: {
            SolveInfo local;
            GridFunction u = gmres_solve(op, lambda, f, false, tol, &local);
            local.used = SolveMethod::Krylov;
            if (info) *info = local;
            return u;
        }
        case SolveMethod::Auto:
            break;
    }
    throw std::logic_error("resolve: unreachable");
}

GridFunction resolve_adjoint(const DiscreteOperator& op, cplx lambda, const GridFunction& f,
                             SolveMethod method) {
    check_sector(op, lambda);
    const std::size_t N = op.size();
    if (method == SolveMethod::Auto) {
        if (op.spectral_available())
            method = SolveMethod::Spectral;
        else if (N <= 4096)
            method = SolveMethod::DenseLU;
        else
            method = SolveMethod::Krylov;
    }
    switch (method) {
        case SolveMethod::Spectral: {
            // (lambda + A)^H u = f  <=>  conj(lambda) + A^H with symbol conj(mu)
            const std::vector<cplx>& mu = op.symbol();
            std::vector<cplx> w(f.values);
            const int d = op.grid.dimension;
            const std::size_t n = static_cast<std::size_t>(op.grid.cells_per_dim);
            if (d == 1)
                fft_plan(n).forward(w);
            else
                fft2(w, n, n, false);
            for (std::size_t k = 0; k < op.size(); ++k)
                w[k] /= std::conj(lambda + mu[k]);
            if (d == 1)
                fft_plan(n).inverse(w);
            else
                fft2(w, n, n, true);
            GridFunction out(op.grid);
            out.values = std::move(w);
            return out;
        }
        case SolveMethod::DenseLU: {
            auto lu = lu_for(op, lambda);
            Vec u = lu->adjoint().solve(as_vec(f));
            return from_vec(op.grid, u);
        }
        case SolveMethod::Krylov: {
            return gmres_solve(op, lambda, f, true, 1e-10, nullptr);
        }
        case SolveMethod::Auto:
            break;
    }
    throw std::logic_error("resolve_adjoint: unreachable");
}

GridFunction resolvent_apply(const DiscreteOperator& op, cplx lambda, const GridFunction& f,
                             SolveMethod method) {
    GridFunction u = resolve(op, lambda, f, method);
    u *= lambda;
    return u;
}

double resolvent_l2_norm(const DiscreteOperator& op, cplx lambda) {
    check_sector(op, lambda);
    if (op.spectral_available()) {
        double m = 0.0;
        for (const cplx& mu : op.symbol()) m = std::max(m, std::abs(lambda) / std::abs(lambda + mu));
        return m;
    }
    if (op.kernel.symmetric) {
        auto he = herm_for(op);
        double m = 0.0;
        for (Eigen::Index i = 0; i < he->values.size(); ++i)
            m = std::max(m, std::abs(lambda) / std::abs(lambda + he->values(i)));
        return m;
    }
    if (op.size() <= 1024) {
        const std::size_t N = op.size();
        auto lu = lu_for(op, lambda);
        Mat T = lu->solve(Mat::Identity(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N)));
        T *= lambda;
        Eigen::BDCSVD<Mat> svd(T);
        return svd.singularValues()(0);
    }
    // power iteration on T^H T
    GridFunction v(op.grid);
    Rng rng(7);
    for (auto& x : v.values) x = rng.complex_normal();
    double est = 0.0;
    for (int it = 0; it < 30; ++it) {
        v *= cplx{1.0 / v.l2_norm(), 0.0};
        GridFunction Tv = resolvent_apply(op, lambda, v);
        GridFunction w = resolve_adjoint(op, lambda, Tv);
        w *= std::conj(lambda);
        est = std::sqrt(w.l2_norm());
        v = std::move(w);
    }
    return est;
}

namespace {

double lp_norm_plain(const std::vector<cplx>& v, double p, double hd) {
    double s = 0.0;
    for (const cplx& x : v) s += std::pow(std::abs(x), p);
    return std::pow(hd * s, 1.0 / p);
}

// duality map: y -> |y|^{p-1} phase(y), normalized to unit q-norm where
// q = p/(p-1)
std::vector<cplx> dual_vector(const std::vector<cplx>& y, double p, double hd) {
    std::vector<cplx> z(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double a = std::abs(y[i]);
        z[i] = (a == 0.0) ? cplx{0, 0} : std::pow(a, p - 1.0) * (y[i] / a);
    }
    const double q = p / (p - 1.0);
    const double nq = lp_norm_plain(z, q, hd);
    if (nq > 0.0)
        for (auto& x : z) x /= nq;
    return z;
}

}  // namespace

PNormEstimate resolvent_p_norm(const DiscreteOperator& op, cplx lambda, double p, int starts,
                               std::uint64_t seed) {
    if (!(p > 1.0)) throw std::domain_error("resolvent_p_norm: p > 1 required");
    check_sector(op, lambda);
    const std::size_t N = op.size();
    const double hd = op.grid.cell_measure();
    const double q = p / (p - 1.0);

    PNormEstimate est;
    Rng rng(seed);
    for (int s = 0; s < starts; ++s) {
        GridFunction x(op.grid);
        if (s == 0) {
            for (auto& v : x.values) v = cplx{1.0, 0.0};
        } else {
            for (auto& v : x.values) v = rng.complex_normal();
        }
        x *= cplx{1.0 / x.lp_norm(p), 0.0};
        double prev = 0.0;
        for (int it = 0; it < 24; ++it) {
            ++est.iterations;
            GridFunction y = resolvent_apply(op, lambda, x);
            const double gamma = y.lp_norm(p);
            est.lower = std::max(est.lower, gamma);
            if (gamma <= prev * (1.0 + 1e-10)) break;
            prev = gamma;
            std::vector<cplx> dy = dual_vector(y.values, p, hd);
            GridFunction dyg(op.grid);
            dyg.values = std::move(dy);
            GridFunction z = resolve_adjoint(op, lambda, dyg);
            z *= std::conj(lambda);
            // stationarity: ||z||_q <= Re <z, x> means x is a local maximizer
            const double zq = z.lp_norm(q);
            const double zx = inner(z, x).real();
            if (zq <= zx * (1.0 + 1e-12)) break;
            std::vector<cplx> nx = dual_vector(z.values, q, hd);
            x.values = std::move(nx);
        }
    }

    if (N <= 1024 && p >= 2.0) {
        auto lu = lu_for(op, lambda);
        Mat T = lu->solve(Mat::Identity(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N)));
        T *= lambda;
        // Riesz-Thorin: ||T||_p <= ||T||_2^{2/p} ||T||_inf^{1-2/p}
        Eigen::BDCSVD<Mat> svd(T);
        const double n2 = svd.singularValues()(0);
        double ninf = 0.0;
        for (Eigen::Index i = 0; i < T.rows(); ++i) ninf = std::max(ninf, T.row(i).cwiseAbs().sum());
        est.upper = std::pow(n2, 2.0 / p) * std::pow(ninf, 1.0 - 2.0 / p);
    }
    return est;
}

// ---- semigroup ------------------------------------------------------------

namespace {

// diagonal Pade(3,3) of e^{-tau A} as a dense propagator pair (numerator and
// factored denominator)
struct PadePropagator {
    Mat num;
    Eigen::PartialPivLU<Mat> den;
    double step_error = 0.0;  // per-step remainder estimate
};

PadePropagator make_pade(const DiscreteOperator& op, double tau) {
    const std::size_t N = op.size();
    if (N > 2048) throw std::runtime_error("semigroup: Pade path needs N <= 2048");
    const Mat& A = op.dense();
    Mat X = -tau * A;
    Mat X2 = X * X;
    Mat X3 = X2 * X;
    const Mat I = Mat::Identity(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    Mat num = I + 0.5 * X + X2 / 10.0 + X3 / 120.0;
    Mat den = I - 0.5 * X + X2 / 10.0 - X3 / 120.0;
    PadePropagator p{std::move(num), Eigen::PartialPivLU<Mat>(std::move(den)), 0.0};
    const double sigma = tau * op.spectral_radius_estimate();
    p.step_error = 36.0 / (720.0 * 5040.0) * std::pow(sigma, 7.0);
    return p;
}

}  // namespace

GridFunction semigroup_apply(const DiscreteOperator& op, double t, const GridFunction& u0,
                             double* accuracy) {
    if (t < 0.0) throw std::domain_error("semigroup_apply: t >= 0 required");
    if (accuracy) *accuracy = 0.0;
    if (t == 0.0) return u0;

    if (op.spectral_available()) {
        const std::vector<cplx>& mu = op.symbol();
        std::vector<cplx> w(u0.values);
        const int d = op.grid.dimension;
        const std::size_t n = static_cast<std::size_t>(op.grid.cells_per_dim);
        if (d == 1)
            fft_plan(n).forward(w);
        else
            fft2(w, n, n, false);
        for (std::size_t k = 0; k < w.size(); ++k) w[k] *= std::exp(-t * mu[k]);
        if (d == 1)
            fft_plan(n).inverse(w);
        else
            fft2(w, n, n, true);
        GridFunction out(op.grid);
        out.values = std::move(w);
        return out;
    }
    if (op.kernel.symmetric && op.size() <= 4096) {
        auto he = herm_for(op);
        Vec c = he->vectors.adjoint() * as_vec(u0);
        for (Eigen::Index i = 0; i < c.size(); ++i) c(i) *= std::exp(-t * he->values(i));
        return from_vec(op.grid, he->vectors * c);
    }

    // sub-stepped diagonal Pade
    const double rho = op.spectral_radius_estimate();
    const int m = std::max(1, static_cast<int>(std::ceil(t * rho / 0.2)));
    PadePropagator prop = make_pade(op, t / m);
    Vec y = as_vec(u0);
    for (int s = 0; s < m; ++s) y = prop.den.solve(prop.num * y);
    if (accuracy) *accuracy = m * prop.step_error;
    return from_vec(op.grid, y);
}

// ---- mild solution ----------------------------------------------------------

namespace {

// one-step propagator pair (full and half step) for the recurrence
struct Stepper {
    // spectral
    std::vector<cplx> efull, ehalf;
    // hermitian
    std::shared_ptr<HermEig> herm;
    Eigen::VectorXd hfull, hhalf;
    // pade
    std::unique_ptr<PadePropagator> pfull, phalf;
    int mode = 0;  // 0 spectral, 1 hermitian, 2 pade
};

Stepper make_stepper(const DiscreteOperator& op, double tau) {
    Stepper st;
    if (op.spectral_available()) {
        st.mode = 0;
        const std::vector<cplx>& mu = op.symbol();
        st.efull.resize(mu.size());
        st.ehalf.resize(mu.size());
        for (std::size_t k = 0; k < mu.size(); ++k) {
            st.efull[k] = std::exp(-tau * mu[k]);
            st.ehalf[k] = std::exp(-0.5 * tau * mu[k]);
        }
        return st;
    }
    if (op.kernel.symmetric && op.size() <= 4096) {
        st.mode = 1;
        st.herm = herm_for(op);
        st.hfull = (-tau * st.herm->values).array().exp();
        st.hhalf = (-0.5 * tau * st.herm->values).array().exp();
        return st;
    }
    st.mode = 2;
    st.pfull = std::make_unique<PadePropagator>(make_pade(op, tau));
    st.phalf = std::make_unique<PadePropagator>(make_pade(op, 0.5 * tau));
    return st;
}

GridFunction stepper_apply(const DiscreteOperator& op, const Stepper& st, bool half,
                           const GridFunction& v) {
    if (st.mode == 0) {
        std::vector<cplx> w(v.values);
        const int d = op.grid.dimension;
        const std::size_t n = static_cast<std::size_t>(op.grid.cells_per_dim);
        if (d == 1)
            fft_plan(n).forward(w);
        else
            fft2(w, n, n, false);
        const auto& e = half ? st.ehalf : st.efull;
        for (std::size_t k = 0; k < w.size(); ++k) w[k] *= e[k];
        if (d == 1)
            fft_plan(n).inverse(w);
        else
            fft2(w, n, n, true);
        GridFunction out(op.grid);
        out.values = std::move(w);
        return out;
    }
    if (st.mode == 1) {
        Vec c = st.herm->vectors.adjoint() * as_vec(v);
        const auto& e = half ? st.hhalf : st.hfull;
        for (Eigen::Index i = 0; i < c.size(); ++i) c(i) *= e(i);
        return from_vec(op.grid, st.herm->vectors * c);
    }
    const PadePropagator& p = half ? *st.phalf : *st.pfull;
    return from_vec(op.grid, p.den.solve(p.num * as_vec(v)));
}

double bochner_norm(const std::vector<double>& spatial_norms, double tau, double r) {
    double s = 0.0;
    for (double v : spatial_norms) s += tau * std::pow(v, r);
    return std::pow(s, 1.0 / r);
}

}  // namespace

MildSolutionResult mild_solution(const DiscreteOperator& op,
                                 const std::vector<GridFunction>& forcing, double tau,
                                 double r_exponent, double p_exponent) {
    if (forcing.empty()) throw std::invalid_argument("mild_solution: empty forcing");
    if (!(tau > 0.0)) throw std::invalid_argument("mild_solution: tau > 0 required");
    if (!(r_exponent > 1.0)) throw std::invalid_argument("mild_solution: r in (1,inf) required");
    const std::size_t M = forcing.size();

    MildSolutionResult res;
    res.stability_warning = op.spectral_radius_estimate() * tau > 50.0;

    Stepper st = make_stepper(op, tau);
    res.u.reserve(M + 1);
    res.u.emplace_back(op.grid);  // u(0) = 0
    for (std::size_t k = 0; k < M; ++k) {
        GridFunction next = stepper_apply(op, st, false, res.u.back());
        GridFunction kick = stepper_apply(op, st, true, forcing[k]);
        for (std::size_t i = 0; i < next.size(); ++i) next[i] += tau * kick[i];
        res.u.push_back(std::move(next));
    }

    // difference-quotient time derivative: centered interior, one-sided ends
    std::vector<double> dnorm(M + 1), anorm(M + 1), fnorm(M);
    for (std::size_t k = 0; k <= M; ++k) {
        GridFunction du(op.grid);
        if (k == 0) {
            for (std::size_t i = 0; i < du.size(); ++i)
                du[i] = (res.u[1][i] - res.u[0][i]) / tau;
        } else if (k == M) {
            for (std::size_t i = 0; i < du.size(); ++i)
                du[i] = (res.u[M][i] - res.u[M - 1][i]) / tau;
        } else {
            for (std::size_t i = 0; i < du.size(); ++i)
                du[i] = (res.u[k + 1][i] - res.u[k - 1][i]) / (2.0 * tau);
        }
        dnorm[k] = du.lp_norm(p_exponent);
        anorm[k] = op.apply(res.u[k]).lp_norm(p_exponent);
    }
    for (std::size_t k = 0; k < M; ++k) fnorm[k] = forcing[k].lp_norm(p_exponent);

    res.u_prime_norm = bochner_norm(dnorm, tau, r_exponent);
    res.au_norm = bochner_norm(anorm, tau, r_exponent);
    res.f_norm = bochner_norm(fnorm, tau, r_exponent);
    return res;
}

}  // namespace nonlocal
