#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "nonlocal/operator.hpp"

namespace nonlocal {

enum class SolveMethod { Auto, DenseLU, Krylov, Spectral };

struct SolveInfo {
    SolveMethod used = SolveMethod::Auto;
    double residual_rel = 0.0;
    int iterations = 0;
};

struct convergence_error : std::runtime_error {
    convergence_error(const std::string& msg, double best, int iters)
        : std::runtime_error(msg), best_residual(best), iterations(iters) {}
    double best_residual;
    int iterations;
};

struct ResolventQuery {
    cplx lambda{1.0, 0.0};
    GridFunction rhs;
    SolveMethod method = SolveMethod::Auto;
};

/// Solves (lambda + A) u = f to relative residual 1e-10. lambda must lie in
/// the closed working sector of the operator (|arg| <= theta), lambda != 0.
GridFunction resolve(const DiscreteOperator& op, cplx lambda, const GridFunction& f,
                     SolveMethod method = SolveMethod::Auto, SolveInfo* info = nullptr);

inline GridFunction resolve(const DiscreteOperator& op, const ResolventQuery& q,
                            SolveInfo* info = nullptr) {
    return resolve(op, q.lambda, q.rhs, q.method, info);
}

/// T_lambda f = lambda (lambda + A)^{-1} f.
GridFunction resolvent_apply(const DiscreteOperator& op, cplx lambda, const GridFunction& f,
                             SolveMethod method = SolveMethod::Auto);

/// Adjoint solve (lambda + A)^H u = f (same caches).
GridFunction resolve_adjoint(const DiscreteOperator& op, cplx lambda, const GridFunction& f,
                             SolveMethod method = SolveMethod::Auto);

/// Exact 2->2 norm of T_lambda: symbol maximum for circulant operators,
/// eigenvalues for Hermitian ones, SVD otherwise (N <= 1024).
double resolvent_l2_norm(const DiscreteOperator& op, cplx lambda);

struct PNormEstimate {
    double lower = 0.0;                 // Boyd-Higham iteration, best over starts
    std::optional<double> upper;        // Riesz-Thorin interpolation (dense, p >= 2)
    int iterations = 0;
};

/// Lower-bound estimate of ||T_lambda||_{p->p} (p >= 1) with an interpolation
/// upper bound when a dense matrix is affordable.
PNormEstimate resolvent_p_norm(const DiscreteOperator& op, cplx lambda, double p,
                               int starts = 4, std::uint64_t seed = 12345);

/// e^{-tA} u0. Spectral path for circulant or Hermitian operators, sub-stepped
/// diagonal Pade otherwise; `accuracy` (if given) receives the propagator
/// error estimate (0 for spectral paths).
GridFunction semigroup_apply(const DiscreteOperator& op, double t, const GridFunction& u0,
                             double* accuracy = nullptr);

struct MildSolutionResult {
    std::vector<GridFunction> u;  // nodes t_k = k tau, k = 0..M, u[0] = 0
    double u_prime_norm = 0.0;    // discrete L^r(L^p) of the difference quotient
    double au_norm = 0.0;         // discrete L^r(L^p) of A u
    double f_norm = 0.0;          // discrete L^r(L^p) of the forcing samples
    bool stability_warning = false;
};

/// Variation-of-constants solution of u' + Au = f, u(0) = 0, by the midpoint
/// exponential rule  u_{k+1} = e^{-tau A} u_k + tau e^{-(tau/2) A} f_k.
/// `forcing` holds the M panel-midpoint samples f(t_k + tau/2), k = 0..M-1.
MildSolutionResult mild_solution(const DiscreteOperator& op,
                                 const std::vector<GridFunction>& forcing, double tau,
                                 double r_exponent, double p_exponent);

struct MildSolutionQuery {
    std::vector<GridFunction> forcing;  // midpoint samples on the uniform grid
    double horizon = 1.0;               // T = M tau
    double r_exponent = 2.0;
    double p_exponent = 2.0;
};

inline MildSolutionResult mild_solution(const DiscreteOperator& op, const MildSolutionQuery& q) {
    return mild_solution(op, q.forcing, q.horizon / static_cast<double>(q.forcing.size()),
                         q.r_exponent, q.p_exponent);
}

}  // namespace nonlocal
