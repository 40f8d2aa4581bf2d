#include "nonlocal/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nonlocal {

double normalization_constant(int d, double alpha) {
    if (d < 1) throw std::invalid_argument("normalization_constant: d >= 1 required");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("normalization_constant: alpha must lie in (0,1)");
    // |Gamma(-a)| = Gamma(1-a)/a for a in (0,1); all tgamma arguments positive.
    const double num = std::pow(4.0, alpha) * std::tgamma(0.5 * d + alpha) * alpha;
    const double den = std::pow(pi, 0.5 * d) * std::tgamma(1.0 - alpha);
    return num / den;
}

double sector_angle(double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw std::domain_error("sector_angle: Lambda must lie strictly in (0,1)");
    return pi - std::acos(lambda * lambda);
}

void KernelSpec::validate_fields() const {
    if (dimension != 1 && dimension != 2)
        throw std::invalid_argument("KernelSpec: dimension must be 1 or 2");
    if (!(order > 0.0 && order < 1.0))
        throw std::invalid_argument("KernelSpec: order alpha must lie in (0,1)");
    if (!(lambda > 0.0 && lambda < 1.0))
        throw std::invalid_argument("KernelSpec: Lambda must lie strictly in (0,1)");
    if (form == KernelForm::TranslationInvariant && !profile)
        throw std::invalid_argument("KernelSpec: translation-invariant form needs a profile");
    if (form == KernelForm::General && !evaluator)
        throw std::invalid_argument("KernelSpec: general form needs an evaluator");
}

cplx KernelSpec::eval(const Point& x, const Point& y) const {
    if (form == KernelForm::General) return evaluator(x, y);
    Point z{};
    for (int k = 0; k < dimension; ++k) z[k] = x[k] - y[k];
    if (profile) return profile(z);
    // bare FractionalLaplacian spec without a materialized profile
    const double c = 0.5 * normalization_constant(dimension, order);
    return {c * std::pow(dist(x, y, dimension), -(dimension + 2.0 * order)), 0.0};
}

KernelSpec KernelSpec::adjoint() const {
    KernelSpec a = *this;
    a.name = name + "-adjoint";
    if (symmetric) return a;  // K real symmetric: A* = A
    switch (form) {
        case KernelForm::FractionalLaplacian:
            break;
        case KernelForm::TranslationInvariant: {
            auto p = profile;
            a.profile = [p](const Point& z) {
                Point mz{-z[0], -z[1]};
                return std::conj(p(mz));
            };
            break;
        }
        case KernelForm::General: {
            auto e = evaluator;
            a.evaluator = [e](const Point& x, const Point& y) { return std::conj(e(y, x)); };
            break;
        }
    }
    return a;
}

KernelSpec fractional_kernel(int d, double alpha) {
    KernelSpec k;
    k.dimension = d;
    k.order = alpha;
    k.form = KernelForm::FractionalLaplacian;
    k.symmetric = true;
    k.name = "fractional";
    const double c = 0.5 * normalization_constant(d, alpha);
    const double expo = d + 2.0 * alpha;
    k.profile = [c, expo](const Point& z) {
        return cplx{c * std::pow(std::sqrt(sq(z[0]) + sq(z[1])), -expo), 0.0};
    };
    k.power_coeff = cplx{c, 0.0};
    k.lambda = std::min(c, 1.0 / c);
    k.lambda = std::min(k.lambda, 0.999);  // Lambda < 1 strictly
    k.validate_fields();
    return k;
}

KernelSpec phase_perturbed_kernel(int d, double alpha) {
    KernelSpec k;
    k.dimension = d;
    k.order = alpha;
    k.lambda = 0.8;
    k.form = KernelForm::TranslationInvariant;
    k.symmetric = false;  // complex-valued
    k.name = "phase-perturbed";
    const double expo = d + 2.0 * alpha;
    k.profile = [expo](const Point& z) {
        const double r = std::sqrt(sq(z[0]) + sq(z[1]));
        const double rho = std::pow(r, -expo);
        return cplx{rho, 0.5 * rho};
    };
    k.power_coeff = cplx{1.0, 0.5};
    k.validate_fields();
    return k;
}

KernelSpec checkerboard_kernel(int d, double alpha, double lambda, double tile) {
    KernelSpec k;
    k.dimension = d;
    k.order = alpha;
    k.lambda = lambda;
    k.form = KernelForm::General;
    k.symmetric = true;
    k.name = "checkerboard";
    const double expo = d + 2.0 * alpha;
    const double lo = lambda, hi = 1.0 / lambda;
    k.evaluator = [d, expo, lo, hi, tile](const Point& x, const Point& y) {
        auto parity = [tile, d](const Point& p) {
            long s = 0;
            for (int j = 0; j < d; ++j) s += static_cast<long>(std::floor(p[j] / tile));
            return s & 1L;
        };
        const double c = (parity(x) == parity(y)) ? lo : hi;
        return cplx{c * std::pow(dist(x, y, d), -expo), 0.0};
    };
    k.validate_fields();
    return k;
}

KernelSpec power_kernel(int d, double alpha, double lambda) {
    KernelSpec k;
    k.dimension = d;
    k.order = alpha;
    k.lambda = lambda;
    k.form = KernelForm::General;
    k.symmetric = true;
    k.name = "power";
    const double expo = d + 2.0 * alpha;
    k.evaluator = [d, expo](const Point& x, const Point& y) {
        return cplx{std::pow(dist(x, y, d), -expo), 0.0};
    };
    k.validate_fields();
    return k;
}

KernelSpec kernel_by_name(const std::string& name, int d, double alpha, double lambda) {
    if (name == "fractional") return fractional_kernel(d, alpha);
    if (name == "phase-perturbed") return phase_perturbed_kernel(d, alpha);
    if (name == "checkerboard") return checkerboard_kernel(d, alpha, lambda);
    if (name == "power") return power_kernel(d, alpha, lambda);
    throw std::invalid_argument("unknown kernel catalog entry: " + name);
}

EllipticityReport validate_ellipticity(const KernelSpec& spec, int samples, std::uint64_t seed) {
    spec.validate_fields();
    if (samples < 1) throw std::invalid_argument("validate_ellipticity: samples >= 1 required");

    Rng rng(seed);
    const int d = spec.dimension;
    const double expo = d + 2.0 * spec.order;

    EllipticityReport rep;
    rep.samples = samples;
    rep.worst_margin = std::numeric_limits<double>::infinity();

    for (int s = 0; s < samples; ++s) {
        Point x{}, y{};
        for (int k = 0; k < d; ++k) x[k] = rng.uniform(-1.0, 1.0);
        // separation stratified over >= 4 decades
        const double sep = std::pow(10.0, rng.uniform(-3.0, 1.0));
        if (d == 1) {
            y[0] = x[0] + (rng.uniform() < 0.5 ? -sep : sep);
        } else {
            const double ang = rng.uniform(0.0, 2.0 * pi);
            y[0] = x[0] + sep * std::cos(ang);
            y[1] = x[1] + sep * std::sin(ang);
        }

        const cplx v = spec.eval(x, y);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            std::ostringstream os;
            os << "validate_ellipticity: non-finite kernel value at x=(" << x[0] << "," << x[1]
               << ") y=(" << y[0] << "," << y[1] << ")";
            throw std::runtime_error(os.str());
        }
        const double scale = std::pow(dist(x, y, d), expo);
        const double lower = v.real() * scale - spec.lambda;          // >= 0 required
        const double upper = 1.0 / spec.lambda - std::abs(v) * scale;  // >= 0 required
        const double margin = std::min(lower, upper);
        if (margin < rep.worst_margin) {
            rep.worst_margin = margin;
            rep.worst_x = x;
            rep.worst_y = y;
        }
    }
    // kernels that sit exactly on an envelope bound land at margin zero up to
    // pow() rounding; tolerate that without accepting real violations
    rep.pass = rep.worst_margin >= -1e-12;
    return rep;
}

namespace {

// |t*e^{i a} + (1-t)*e^{i b}| minimized over t in [0,1]; the minimum over the
// mass split equals cos(gamma/2) for ray angle gamma = |a-b| <= pi.
double two_ray_min(double a, double b) {
    const double gamma = std::abs(a - b);
    return std::cos(0.5 * gamma);
}

// distance from point p to the segment [a, b] in the plane
double point_segment_dist(cplx p, cplx a, cplx b) {
    const cplx ab = b - a;
    const double len2 = std::norm(ab);
    if (len2 == 0.0) return std::abs(p - a);
    double t = ((p - a).real() * ab.real() + (p - a).imag() * ab.imag()) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(p - (a + t * ab));
}

}  // namespace

double sector_sum_constant(double theta, double phi, int summands) {
    if (summands < 1) throw std::invalid_argument("sector_sum_constant: m >= 1 required");
    const double psi = pi - phi;
    if (theta < 0.0 || psi < 0.0)
        throw std::domain_error("sector_sum_constant: need theta >= 0 and phi <= pi");
    if (theta + psi >= pi)
        throw std::domain_error("sector_sum_constant: theta + (pi - phi) >= pi, no such constant");

    // Normalize |z| + sum |w_i| = 1 and minimize |z + sum w_i|. With one
    // summand the w-mass sits on a single ray of the psi-sector; grid over the
    // two ray angles, closed-form over the mass split.
    double best = 1.0;
    const int na = 96;
    for (int i = 0; i <= na; ++i) {
        const double a = -theta + 2.0 * theta * i / na;
        for (int j = 0; j <= na; ++j) {
            const double b = pi - (-psi + 2.0 * psi * j / na);  // -w direction
            best = std::min(best, two_ray_min(a, b - pi));
        }
    }
    // local refinement around the extreme rays (the coarse grid already
    // contains the endpoints; this tightens interior minima if any)
    {
        double a = theta, b = -psi;
        double step = 2.0 * theta / na + 1e-12;
        for (int it = 0; it < 60; ++it) {
            bool moved = false;
            for (double da : {-step, 0.0, step})
                for (double db : {-step, 0.0, step}) {
                    const double aa = std::clamp(a + da, -theta, theta);
                    const double bb = std::clamp(b + db, -psi, psi);
                    if (two_ray_min(aa, bb) < two_ray_min(a, b) - 1e-17) {
                        a = aa;
                        b = bb;
                        moved = true;
                    }
                }
            if (!moved) step *= 0.5;
            if (step < 1e-14) break;
        }
        best = std::min(best, two_ray_min(a, b));
    }

    if (summands >= 2) {
        // w-mass may split across both boundary rays of the psi-sector; the
        // reachable sums fill the chord of the arc. Minimize the distance from
        // -z to the scaled chord over (z-angle, z-mass).
        const cplx ep{std::cos(psi), std::sin(psi)};
        const cplx em{std::cos(psi), -std::sin(psi)};
        auto chord_val = [&](double a0, double t0) {
            const cplx p = -t0 * cplx{std::cos(a0), std::sin(a0)};
            return point_segment_dist(p, (1.0 - t0) * em, (1.0 - t0) * ep);
        };
        double ba = theta, bt = 0.5, bv = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= na; ++i) {
            const double a0 = -theta + 2.0 * theta * i / na;
            for (int j = 0; j <= na; ++j) {
                const double t0 = static_cast<double>(j) / na;
                const double v = chord_val(a0, t0);
                if (v < bv) {
                    bv = v;
                    ba = a0;
                    bt = t0;
                }
            }
        }
        double step = 1.0 / na;
        for (int it = 0; it < 60; ++it) {
            bool moved = false;
            for (double da : {-step, 0.0, step})
                for (double dt : {-step, 0.0, step}) {
                    const double aa = std::clamp(ba + da * theta, -theta, theta);
                    const double tt = std::clamp(bt + dt, 0.0, 1.0);
                    const double v = chord_val(aa, tt);
                    if (v < bv - 1e-17) {
                        bv = v;
                        ba = aa;
                        bt = tt;
                        moved = true;
                    }
                }
            if (!moved) step *= 0.5;
            if (step < 1e-14) break;
        }
        best = std::min(best, bv);
    }

    if (!(best > 0.0))
        throw std::domain_error("sector_sum_constant: degenerate minimum (sectors touch)");
    return 1.0 / best;
}

SectorParams SectorParams::from_lambda(double lambda, double theta_fraction, int summands) {
    SectorParams sp;
    sp.phi = sector_angle(lambda);
    sp.theta = theta_fraction * sp.phi;
    sp.comparison_constant = sector_sum_constant(sp.theta, sp.phi, summands);
    return sp;
}

}  // namespace nonlocal
