#pragma once

#include <array>
#include <optional>
#include <vector>

#include "nonlocal/grid.hpp"

namespace nonlocal {

// Axis-aligned dyadic cube on a cell grid: origin in cell coordinates, side in
// cells. Bisection halves the side; the path records child indices
// (bit 0: upper x half, bit 1: upper y half).
struct DyadicCube {
    std::array<long, 2> origin{0, 0};
    long side_cells = 0;
    int level = 0;
    std::vector<int> path;

    long cell_count(int d) const { return d == 1 ? side_cells : side_cells * side_cells; }
    bool contains_cell(long ix, long iy, int d) const {
        if (ix < origin[0] || ix >= origin[0] + side_cells) return false;
        if (d == 2 && (iy < origin[1] || iy >= origin[1] + side_cells)) return false;
        return true;
    }
    /// Dyadic parent (path truncated by one); level 0 throws.
    DyadicCube parent(int d) const;
    /// The 2^d children in index order.
    std::vector<DyadicCube> children(int d) const;
};

/// Cube covering the whole grid.
DyadicCube root_cube(const Grid& g);

struct CZCertificate {
    long count_in_cube = 0;
    long cube_cells = 0;
    long count_in_parent = 0;
    long parent_cells = 0;
};

struct CZResult {
    std::vector<DyadicCube> selected;
    double residual_measure = 0.0;  // h^d * count of A-cells left uncovered
    long residual_cells = 0;
    std::vector<CZCertificate> certificates;
    double delta = 0.0;
};

/// Caffarelli-Peral stopping-time selection on the dyadic tree below Q.
/// A is a set of grid cell indices with 0 < |A| < delta |Q| (integer cell
/// counts); bisection emits a cube the first time its A-density exceeds
/// delta, and stops at max_level. Certificates carry the exact counts for
/// conclusions (b) and (c).
CZResult cz_decompose(const Grid& g, const DyadicCube& Q, const std::vector<std::size_t>& A,
                      double delta, int max_level);

/// Hardy-Littlewood maximal function over grid-aligned axis cubes (whole-cell
/// unions inside the box, or inside `localized_to` when given; cells outside
/// the localization window get 0). Input must be nonnegative real.
GridFunction maximal(const GridFunction& g, const std::optional<DyadicCube>& localized_to = {});

struct DistributionSet {
    std::vector<std::size_t> cells;
    double measure = 0.0;  // h^d * count
    long count = 0;
};

/// E(lambda) = cells where (Mg) > lambda; decreasing in lambda.
DistributionSet distribution_set(const GridFunction& g, double lambda);
/// Same, reusing a precomputed maximal function.
DistributionSet distribution_set_from_maximal(const GridFunction& mg, double lambda);

/// Largest delta admissible for the good-lambda constant A = 1/(2 delta^{2/q})
/// to exceed 5^d.
double good_lambda_delta_threshold(double q, int d);

struct GoodLambdaRow {
    double lambda = 0.0;
    long count_EA = 0, count_E = 0, count_F = 0;
    double lhs = 0.0, rhs = 0.0;  // measures
    bool pass = false;
    double margin = 0.0;  // rhs - lhs
};

struct GoodLambdaResult {
    double A = 0.0;
    double delta = 0.0, gamma = 0.0, q = 0.0;
    std::vector<GoodLambdaRow> rows;
    bool all_pass = true;
};

/// Checks |E(A lambda)| <= delta |E(lambda)| + |{M(f_sq) > lambda gamma}| over
/// the lambda grid, with E drawn from Tf_sq. Inputs are nonnegative real grid
/// functions (squared magnitudes).
GoodLambdaResult good_lambda_check(const GridFunction& Tf_sq, const GridFunction& f_sq, double q,
                                   double delta, double gamma,
                                   const std::vector<double>& lambda_grid);

}  // namespace nonlocal
