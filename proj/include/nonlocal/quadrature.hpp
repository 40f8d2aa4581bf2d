#pragma once

#include <functional>
#include <vector>

#include "nonlocal/util.hpp"

namespace nonlocal {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;  // sum to 2
};

/// Gauss-Legendre rule of the given order (Newton iteration on P_n; cached).
const GaussRule& gauss_rule(int order);

/// Integral of f over [a, b] with a single Gauss panel.
double integrate_panel(const std::function<double(double)>& f, double a, double b, int order = 10);
cplx integrate_panel_c(const std::function<cplx(double)>& f, double a, double b, int order = 10);

/// Integral of f over [a, b] with panels that start at width `first_width`
/// near a and grow by `ratio`; for integrands that are steep (but smooth)
/// near a, e.g. kernel tails just outside the box.
double integrate_graded(const std::function<double(double)>& f, double a, double b,
                        double first_width, double ratio = 2.0, int order = 10);
cplx integrate_graded_c(const std::function<cplx(double)>& f, double a, double b,
                        double first_width, double ratio = 2.0, int order = 10);

/// Integral over [a, b] of f with an integrable algebraic singularity
/// f ~ c (z-a)^{-s}, s < 1, at the lower endpoint. Geometric bisection toward
/// a plus a power-extrapolated correction for the innermost sliver.
double integrate_endpoint_singular(const std::function<double(double)>& f, double a, double b,
                                   double s, int order = 10, int levels = 30);
cplx integrate_endpoint_singular_c(const std::function<cplx(double)>& f, double a, double b,
                                   double s, int order = 10, int levels = 30);

}  // namespace nonlocal
