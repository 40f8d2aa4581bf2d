#pragma once

#include <optional>
#include <vector>

#include "nonlocal/operator.hpp"
#include "nonlocal/report.hpp"
#include "nonlocal/solve.hpp"

namespace nonlocal {

// Term-by-term record of the Caccioppoli inequality for the homogeneous
// resolvent equation: five left-hand integrals against two right-hand ones,
// all evaluated in the shared discrete pair measure.
struct CaccioppoliBreakdown {
    double lambda_mass = 0.0;        // |lambda| * int |u|^2 eta^2
    double gagliardo_cutoff = 0.0;   // 2Bx2B: |u(x)-u(y)|^2 (eta(x)^2 + eta(y)^2)
    double gagliardo_product = 0.0;  // 2Bx2B: |u eta(x) - u eta(y)|^2
    double exterior_yx = 0.0;        // 2B x (R^d \ 2B): |u(y)|^2 eta(y)^2
    double exterior_xy = 0.0;        // (R^d \ 2B) x 2B: |u(x)|^2 eta(x)^2
    double rhs_mass = 0.0;           // r^{-2a} int_{2B} |u|^2
    double rhs_tail = 0.0;           // int_{2B}|u| * int_{R^d\2B}|u(y)|/|x0-y|^{d+2a}
    double lhs_total = 0.0;
    double rhs_total = 0.0;
    double ratio = 0.0;  // lhs/rhs, 0 when both vanish
};

/// Manufactures a discrete solution of the homogeneous resolvent equation on
/// B(x0, 3r/2) by exterior forcing (seeded, supported outside 2B), then
/// evaluates every term of the inequality. Requires zero-extension mode and
/// B(x0, 2r) inside the box with margin >= r.
CaccioppoliBreakdown caccioppoli_verify(const DiscreteOperator& op, const Ball& ball, cplx lambda,
                                        std::uint64_t forcing_seed);

/// Same with explicit exterior forcing (must vanish on 2B).
CaccioppoliBreakdown caccioppoli_verify(const DiscreteOperator& op, const Ball& ball, cplx lambda,
                                        const GridFunction& f_ext);

/// Ratio sweep over a lambda x seed lattice; summary holds max ratio, the
/// argmax case, and the ratio spread. Cells are independent tasks; the merge
/// order is fixed, so the report does not depend on the thread count.
VerificationReport caccioppoli_sweep(const DiscreteOperator& op, const Ball& ball,
                                     const std::vector<cplx>& lambdas,
                                     const std::vector<std::uint64_t>& seeds, int threads = 1);

struct TailBoundPair {
    double lhs = 0.0;
    double rhs = 0.0;  // includes the caller's constant
    double rhs_raw = 0.0;
};

/// Dyadic-annuli tail bound: lhs = (int_{2B}|u|) (int_{R^d\2B}|u(y)|/|x0-y|^{d+2a} dy),
/// rhs = c_check * r^{d-2a} * sum_k 2^{-2ak} mean_{2^{k+1}B cap box}|u|^2
/// (with the geometric remainder once the dilates cover the box).
TailBoundPair tail_bound_check(const GridFunction& u, const Ball& ball, double alpha,
                               double c_check = 1.0);

struct WrhResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    cplx lambda{};
    double p = 0.0;
};

/// Weak reverse Hoelder pair for Tf = lambda (lambda+A)^{-1} f with seeded
/// bounded f vanishing on iota*B: lhs = (mean_B |Tf|^p)^{1/p}, rhs = sup over
/// the dyadic dilate family (and the whole box) of sqrt(mean(|Tf|^2 + |f|^2)).
WrhResult wrh_check(const DiscreteOperator& op, const Ball& ball, cplx lambda, double p,
                    double iota, std::uint64_t f_seed);

/// Same with explicit forcing (must vanish on iota*B).
WrhResult wrh_check(const DiscreteOperator& op, const Ball& ball, cplx lambda, double p,
                    double iota, const GridFunction& f);

struct PRange {
    double lower = 1.0;
    double upper = std::numeric_limits<double>::infinity();
    bool contains(double p) const { return p > lower && p < upper; }
};

/// Open interval of exponents p with |1/p - 1/2| < alpha/d.
PRange admissible_p_range(int d, double alpha);

struct EmbeddingExponents {
    double theta = 0.0;  // d(1/2 - 1/p)
    double beta = 0.0;   // theta / alpha
};

/// Sobolev-embedding bookkeeping for p >= 2.
EmbeddingExponents embedding_exponents(int d, double alpha, double p);

/// Estimates ||lambda (lambda+A)^{-1}||_{p->p} over the lattice for each p.
/// Exponents below 2 rerun the sweep on the adjoint kernel at the conjugate
/// exponent; exponents outside the admissible range are flagged, not asserted.
VerificationReport resolvent_lp_sweep(const DiscreteOperator& op,
                                      const std::vector<double>& p_list,
                                      const std::vector<cplx>& lambda_lattice);

/// || (sum_n |lambda_n (lambda_n+A)^{-1} f_n|^2)^{1/2} ||_p over
/// || (sum_n |f_n|^2)^{1/2} ||_p.
double square_function_ratio(const DiscreteOperator& op, const std::vector<cplx>& lambdas,
                             const std::vector<GridFunction>& fs, double p);

/// Seeded bounded function vanishing on the ball (uniform complex box values
/// outside, zero inside).
GridFunction seeded_function_outside(const Grid& g, const Ball& excluded, std::uint64_t seed);

}  // namespace nonlocal
