#include "nonlocal/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nonlocal {

void Grid::validate() const {
    if (dimension != 1 && dimension != 2)
        throw std::invalid_argument("Grid: dimension must be 1 or 2");
    if (!(half_width > 0.0)) throw std::invalid_argument("Grid: half_width must be positive");
    if (cells_per_dim < 2) throw std::invalid_argument("Grid: cells_per_dim >= 2 required");
}

GridFunction::GridFunction(const Grid& g, std::vector<cplx> v) : grid(g), values(std::move(v)) {
    if (values.size() != g.size())
        throw std::invalid_argument("GridFunction: value count does not match grid size");
}

double GridFunction::lp_norm(double p) const {
    if (std::isinf(p)) {
        double m = 0.0;
        for (const cplx& v : values) m = std::max(m, std::abs(v));
        return m;
    }
    if (!(p > 0.0)) throw std::invalid_argument("lp_norm: p must be positive");
    double s = 0.0;
    for (const cplx& v : values) s += std::pow(std::abs(v), p);
    return std::pow(grid.cell_measure() * s, 1.0 / p);
}

cplx GridFunction::mean(const std::vector<std::size_t>& cells) const {
    if (cells.empty()) return {0.0, 0.0};
    cplx s{0.0, 0.0};
    for (std::size_t i : cells) s += values[i];
    return s / static_cast<double>(cells.size());
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
}
GridFunction& GridFunction::operator-=(const GridFunction& o) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    return *this;
}
GridFunction& GridFunction::operator*=(cplx s) {
    for (auto& v : values) v *= s;
    return *this;
}
GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(cplx s, GridFunction a) { return a *= s; }

cplx inner(const GridFunction& a, const GridFunction& b) {
    cplx s{0.0, 0.0};
    for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * std::conj(b.values[i]);
    return a.grid.cell_measure() * s;
}

std::vector<std::size_t> cells_in_ball(const Grid& g, const Ball& b) {
    std::vector<std::size_t> out;
    const std::size_t N = g.size();
    for (std::size_t i = 0; i < N; ++i)
        if (b.contains(g.center(i), g.dimension)) out.push_back(i);
    return out;
}

std::vector<std::size_t> cells_outside_ball(const Grid& g, const Ball& b) {
    std::vector<std::size_t> out;
    const std::size_t N = g.size();
    for (std::size_t i = 0; i < N; ++i)
        if (!b.contains(g.center(i), g.dimension)) out.push_back(i);
    return out;
}

CutoffFunction make_cutoff(const Grid& grid, const Point& center, double r) {
    grid.validate();
    if (r < 4.0 * grid.h())
        throw std::invalid_argument("make_cutoff: ball not resolved, need r >= 4h");
    for (int k = 0; k < grid.dimension; ++k)
        if (std::abs(center[k]) + 1.5 * r > grid.half_width)
            throw std::invalid_argument("make_cutoff: B(center, 3r/2) not contained in the box");

    auto smoothstep = [](double t) { return t * t * (3.0 - 2.0 * t); };

    CutoffFunction cf;
    cf.center = center;
    cf.radius = r;
    cf.values = GridFunction(grid);
    const std::size_t N = grid.size();
    for (std::size_t i = 0; i < N; ++i) {
        const double rho = dist(grid.center(i), center, grid.dimension);
        const double t = std::clamp((1.5 * r - rho) / (0.5 * r), 0.0, 1.0);
        cf.values[i] = cplx{smoothstep(t), 0.0};
    }

    // measured Lipschitz constant over adjacent cells, scaled by r
    const double h = grid.h();
    const int n = grid.cells_per_dim;
    double lip = 0.0;
    auto at = [&](std::size_t i) { return cf.values[i].real(); };
    if (grid.dimension == 1) {
        for (int i = 0; i + 1 < n; ++i)
            lip = std::max(lip, std::abs(at(i + 1) - at(i)) / h);
    } else {
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                const std::size_t i = static_cast<std::size_t>(ix) + static_cast<std::size_t>(n) * iy;
                if (ix + 1 < n) lip = std::max(lip, std::abs(at(i + 1) - at(i)) / h);
                if (iy + 1 < n) lip = std::max(lip, std::abs(at(i + n) - at(i)) / h);
            }
    }
    cf.gradient_bound = lip * r;
    return cf;
}

// --- serialization -------------------------------------------------------

namespace {

void write_le_f64(std::ostream& os, double x) {
    std::uint64_t u;
    std::memcpy(&u, &x, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

double read_le_f64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double x;
    std::memcpy(&x, &u, 8);
    return x;
}

}  // namespace

void save_grid_function(const GridFunction& u, const std::string& path) {
    {
        std::ofstream hdr(path + ".gf.hdr");
        if (!hdr) throw std::runtime_error("save_grid_function: cannot open " + path + ".gf.hdr");
        hdr.precision(17);
        hdr << "d " << u.grid.dimension << "\n"
            << "L " << u.grid.half_width << "\n"
            << "n " << u.grid.cells_per_dim << "\n"
            << "boundary " << (u.grid.boundary == Boundary::Periodic ? "periodic" : "zero_extension")
            << "\n";
    }
    std::ofstream bin(path + ".gf", std::ios::binary);
    if (!bin) throw std::runtime_error("save_grid_function: cannot open " + path + ".gf");
    for (const cplx& v : u.values) {
        write_le_f64(bin, v.real());
        write_le_f64(bin, v.imag());
    }
}

GridFunction load_grid_function(const std::string& path) {
    Grid g;
    {
        std::ifstream hdr(path + ".gf.hdr");
        if (!hdr) throw std::runtime_error("load_grid_function: cannot open " + path + ".gf.hdr");
        std::string key;
        std::string bnd;
        while (hdr >> key) {
            if (key == "d")
                hdr >> g.dimension;
            else if (key == "L")
                hdr >> g.half_width;
            else if (key == "n")
                hdr >> g.cells_per_dim;
            else if (key == "boundary")
                hdr >> bnd;
        }
        g.boundary = (bnd == "periodic") ? Boundary::Periodic : Boundary::ZeroExtension;
        g.validate();
    }
    GridFunction u(g);
    std::ifstream bin(path + ".gf", std::ios::binary);
    if (!bin) throw std::runtime_error("load_grid_function: cannot open " + path + ".gf");
    for (auto& v : u.values) {
        const double re = read_le_f64(bin);
        const double im = read_le_f64(bin);
        v = {re, im};
    }
    if (!bin) throw std::runtime_error("load_grid_function: truncated payload in " + path + ".gf");
    return u;
}

void save_grid_function_csv(const GridFunction& u, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_grid_function_csv: cannot open " + path);
    os << (u.grid.dimension == 1 ? "index,x,re,im\n" : "index,x,y,re,im\n");
    os.precision(17);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const Point p = u.grid.center(i);
        os << i << ',' << p[0];
        if (u.grid.dimension == 2) os << ',' << p[1];
        os << ',' << u.values[i].real() << ',' << u.values[i].imag() << '\n';
    }
}

}  // namespace nonlocal
