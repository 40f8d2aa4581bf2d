#pragma once

#include <string>
#include <vector>

#include "nonlocal/kernels.hpp"
#include "nonlocal/util.hpp"

namespace nonlocal {

enum class Boundary { Periodic, ZeroExtension };

// Uniform tensor grid of cell centers on the box [-L, L]^d.
struct Grid {
    int dimension = 1;
    double half_width = 1.0;  // L
    int cells_per_dim = 2;    // n; h = 2L/n
    Boundary boundary = Boundary::ZeroExtension;

    double h() const { return 2.0 * half_width / cells_per_dim; }
    std::size_t size() const {
        std::size_t N = 1;
        for (int k = 0; k < dimension; ++k) N *= static_cast<std::size_t>(cells_per_dim);
        return N;
    }
    double cell_measure() const { return std::pow(h(), dimension); }

    // row-major: index = ix + n*iy
    Point center(std::size_t i) const {
        const double hh = h();
        Point p{};
        if (dimension == 1) {
            p[0] = -half_width + (static_cast<double>(i) + 0.5) * hh;
        } else {
            const auto n = static_cast<std::size_t>(cells_per_dim);
            p[0] = -half_width + (static_cast<double>(i % n) + 0.5) * hh;
            p[1] = -half_width + (static_cast<double>(i / n) + 0.5) * hh;
        }
        return p;
    }

    // nearest periodic image of y relative to x (identity in zero-extension mode)
    Point nearest_image(const Point& x, Point y) const {
        if (boundary != Boundary::Periodic) return y;
        const double period = 2.0 * half_width;
        for (int k = 0; k < dimension; ++k) {
            double dlt = y[k] - x[k];
            dlt -= period * std::round(dlt / period);
            y[k] = x[k] + dlt;
        }
        return y;
    }

    double torus_dist(const Point& a, const Point& b) const {
        return dist(a, nearest_image(a, b), dimension);
    }

    void validate() const;
    bool operator==(const Grid& o) const {
        return dimension == o.dimension && half_width == o.half_width &&
               cells_per_dim == o.cells_per_dim && boundary == o.boundary;
    }
};

// Complex cell-center samples on a grid.
struct GridFunction {
    Grid grid;
    std::vector<cplx> values;

    GridFunction() = default;
    explicit GridFunction(const Grid& g) : grid(g), values(g.size(), cplx{0.0, 0.0}) {}
    GridFunction(const Grid& g, std::vector<cplx> v);

    std::size_t size() const { return values.size(); }
    cplx& operator[](std::size_t i) { return values[i]; }
    const cplx& operator[](std::size_t i) const { return values[i]; }

    /// Discrete L^p norm (h^d sum |u|^p)^(1/p); p = inf gives the max norm.
    double lp_norm(double p) const;
    double l2_norm() const { return lp_norm(2.0); }

    /// Mean over an index set, counted in cells: (1/|S|) sum_{i in S} u_i.
    cplx mean(const std::vector<std::size_t>& cells) const;

    GridFunction& operator+=(const GridFunction& o);
    GridFunction& operator-=(const GridFunction& o);
    GridFunction& operator*=(cplx s);
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(cplx s, GridFunction a);

cplx inner(const GridFunction& a, const GridFunction& b);  // h^d sum a conj(b)

// Closed ball; cell membership is center-in-ball.
struct Ball {
    Point center{};
    double radius = 0.0;

    bool contains(const Point& p, int d) const { return dist(p, center, d) <= radius; }
    Ball dilate(double k) const { return Ball{center, k * radius}; }
};

/// Indices of cells whose centers lie in the ball.
std::vector<std::size_t> cells_in_ball(const Grid& g, const Ball& b);
/// Indices of in-box cells whose centers lie outside the ball.
std::vector<std::size_t> cells_outside_ball(const Grid& g, const Ball& b);

// Smoothstep cutoff: 1 on B(center, r), 0 outside B(center, 3r/2).
struct CutoffFunction {
    Point center{};
    double radius = 0.0;
    GridFunction values;
    double gradient_bound = 0.0;  // measured discrete Lipschitz constant times r
};

/// Builds the smoothstep cutoff; requires r >= 4h and B(center, 3r/2) inside
/// the box (throws std::invalid_argument otherwise).
CutoffFunction make_cutoff(const Grid& grid, const Point& center, double r);

// --- serialization -------------------------------------------------------

/// Writes <path>.gf (little-endian f64 re/im pairs, row-major) and a text
/// sidecar <path>.gf.hdr with d, L, n, boundary.
void save_grid_function(const GridFunction& u, const std::string& path);
GridFunction load_grid_function(const std::string& path);

/// CSV export (index, coordinates, re, im); intended for small grids.
void save_grid_function_csv(const GridFunction& u, const std::string& path);

}  // namespace nonlocal
