#include "nonlocal/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace nonlocal {

namespace {

GaussRule compute_rule(int n) {
    GaussRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Chebyshev initial guess, Newton on P_n
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        const double dp = n * (x * p1 - p0) / (x * x - 1.0);
        r.nodes[i] = x;
        r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

}  // namespace

const GaussRule& gauss_rule(int order) {
    if (order < 1) throw std::invalid_argument("gauss_rule: order >= 1");
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_rule(order)).first;
    return it->second;
}

double integrate_panel(const std::function<double(double)>& f, double a, double b, int order) {
    const GaussRule& g = gauss_rule(order);
    const double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * f(mid + hw * g.nodes[i]);
    return hw * s;
}

cplx integrate_panel_c(const std::function<cplx(double)>& f, double a, double b, int order) {
    const GaussRule& g = gauss_rule(order);
    const double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
    cplx s{0.0, 0.0};
    for (std::size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * f(mid + hw * g.nodes[i]);
    return hw * s;
}

double integrate_graded(const std::function<double(double)>& f, double a, double b,
                        double first_width, double ratio, int order) {
    if (!(b > a)) return 0.0;
    double s = 0.0, lo = a, w = first_width;
    while (lo < b) {
        const double hi = std::min(b, lo + w);
        s += integrate_panel(f, lo, hi, order);
        lo = hi;
        w *= ratio;
    }
    return s;
}

cplx integrate_graded_c(const std::function<cplx(double)>& f, double a, double b,
                        double first_width, double ratio, int order) {
    if (!(b > a)) return {0.0, 0.0};
    cplx s{0.0, 0.0};
    double lo = a, w = first_width;
    while (lo < b) {
        const double hi = std::min(b, lo + w);
        s += integrate_panel_c(f, lo, hi, order);
        lo = hi;
        w *= ratio;
    }
    return s;
}

double integrate_endpoint_singular(const std::function<double(double)>& f, double a, double b,
                                   double s, int order, int levels) {
    if (!(b > a)) return 0.0;
    const double len = b - a;
    double acc = 0.0;
    double hi = len;
    for (int k = 0; k < levels; ++k) {
        const double lo = hi * 0.5;
        acc += integrate_panel(f, a + lo, a + hi, order);
        hi = lo;
    }
    // innermost sliver [a, a+hi]: extrapolate f ~ c (z-a)^{-s}
    if (s < 1.0) {
        const double zm = a + 0.5 * hi;
        const double c = f(zm) * std::pow(0.5 * hi, s);
        acc += c * std::pow(hi, 1.0 - s) / (1.0 - s);
    }
    return acc;
}

cplx integrate_endpoint_singular_c(const std::function<cplx(double)>& f, double a, double b,
                                   double s, int order, int levels) {
    if (!(b > a)) return {0.0, 0.0};
    const double len = b - a;
    cplx acc{0.0, 0.0};
    double hi = len;
    for (int k = 0; k < levels; ++k) {
        const double lo = hi * 0.5;
        acc += integrate_panel_c(f, a + lo, a + hi, order);
        hi = lo;
    }
    if (s < 1.0) {
        const double zm = a + 0.5 * hi;
        const cplx c = f(zm) * std::pow(0.5 * hi, s);
        acc += c * std::pow(hi, 1.0 - s) / (1.0 - s);
    }
    return acc;
}

}  // namespace nonlocal
