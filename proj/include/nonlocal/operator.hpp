#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <vector>

#include "nonlocal/grid.hpp"
#include "nonlocal/kernels.hpp"

namespace nonlocal {

// Pair-weight table for the unit power kernel |z|^{-d-2a}: far pairs take the
// center-distance value (nearest periodic image on the torus), near-diagonal
// pairs (offset <= 1 cell per axis, active for n >= 4) carry second-moment
// matched weights so that sums against (u_i - u_j)(v_i - v_j) stay consistent
// with the singular integral they discretize. The seminorm and the inequality
// verifiers all draw from this table so both sides of an estimate use the
// same discrete measure.
class PowerPairWeights {
public:
    PowerPairWeights(const Grid& g, double alpha);

    /// gamma_ij for an ordered pair i != j.
    double operator()(std::size_t i, std::size_t j) const;

    /// per-cell integral of |x_i - y|^{-d-2a} over R^d \ box (lazy).
    const std::vector<double>& exterior_tail() const;

    double alpha() const { return alpha_; }
    const Grid& grid() const { return grid_; }

private:
    Grid grid_;
    double alpha_ = 0.5;
    bool near_on_ = true;
    double near_[3][3] = {};  // [ey+1][ex+1]
    mutable std::vector<double> tail_;
};

/// Integral of |x - y|^{-d-2a} dy over R^d minus the grid box, for every cell
/// center x (closed form in d=1, corner-split angular quadrature in d=2).
std::vector<double> power_exterior_tail(const Grid& g, double alpha);

struct AssembleOptions {
    double theta_fraction = 0.9;  // working sector theta = fraction * Phi
    int summands = 3;             // summand count for the stored comparison constant
    // dense matrix: built automatically for general kernels and, when
    // requested, for translation-invariant ones
    bool build_dense = false;
    int threads = 1;
};

struct SolverCache;  // defined in solve.cpp

// Assembled quadratic-form operator: <Au, v> equals the discrete double sum
// h^{2d} sum_{i != j} Ktilde(x_i, x_j)(u_i - u_j) conj(v_i - v_j) plus, in
// zero-extension mode, the exterior tail term h^d sum_i w_i u_i conj(v_i).
class DiscreteOperator {
public:
    Grid grid;
    KernelSpec kernel;
    SectorParams sector;

    bool translation_invariant() const { return has_stencil_; }
    bool periodic() const { return grid.boundary == Boundary::Periodic; }
    /// FFT diagonalization available (translation-invariant periodic).
    bool spectral_available() const { return has_stencil_ && periodic(); }

    GridFunction apply(const GridFunction& u) const;
    /// Stencil path (circulant / embedded-circulant FFT); throws when the
    /// operator has no translation-invariant representation.
    GridFunction apply_fast(const GridFunction& u) const;
    /// Dense matvec; builds the matrix on first use.
    GridFunction apply_dense(const GridFunction& u) const;
    GridFunction apply_adjoint(const GridFunction& u) const;

    /// Form value <Au, v>.
    cplx form_value(const GridFunction& u, const GridFunction& v) const;

    const std::vector<double>& tail_weights() const { return tail_weights_; }
    double tail_halfwidth() const { return tail_halfwidth_; }

    /// Eigenvalues per FFT bin (translation-invariant periodic only).
    const std::vector<cplx>& symbol() const;

    const Eigen::MatrixXcd& dense() const;
    bool dense_built() const { return dense_ != nullptr; }

    /// Upper estimate of the spectral radius (max |symbol| when available,
    /// power iteration otherwise; cached).
    double spectral_radius_estimate() const;

    std::size_t size() const { return grid.size(); }

    mutable std::shared_ptr<SolverCache> solver_cache;

private:
    friend DiscreteOperator assemble(const KernelSpec&, const Grid&, const AssembleOptions&);

    void build_dense_matrix() const;
    GridFunction stencil_apply(const GridFunction& u, bool adjoint) const;

    bool has_stencil_ = false;
    std::size_t emb_n_ = 0;             // per-dimension FFT size (n or 2n)
    std::vector<cplx> stencil_;         // symmetrized offset table in FFT layout
    std::vector<cplx> stencil_fft_;     // forward transform of stencil_
    std::vector<cplx> diag_;            // h^d row sums of the offset table
    std::vector<cplx> symbol_;          // periodic: diag - h^d fft(stencil)
    std::vector<double> tail_weights_;  // zero-extension only
    double tail_halfwidth_ = 0.0;
    mutable std::unique_ptr<Eigen::MatrixXcd> dense_;
    mutable double radius_est_ = -1.0;
};

/// Builds the discrete operator for the kernel on the grid. Zero-extension
/// grids require n >= 4 (near-diagonal quadrature); general kernels get a
/// dense representation, translation-invariant ones a stencil.
DiscreteOperator assemble(const KernelSpec& spec, const Grid& grid,
                          const AssembleOptions& opts = {});

/// Discrete Gagliardo seminorm squared of u under the shared pair measure,
/// restricted to cells inside `region` when given.
double seminorm(const GridFunction& u, double alpha, const std::optional<Ball>& region = {});

}  // namespace nonlocal
