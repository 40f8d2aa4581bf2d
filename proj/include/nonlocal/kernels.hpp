#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nonlocal/util.hpp"

namespace nonlocal {

using Point = std::array<double, 2>;  // d <= 2; unused coordinates stay 0

inline double dist(const Point& a, const Point& b, int d) {
    double s = 0.0;
    for (int k = 0; k < d; ++k) s += sq(a[k] - b[k]);
    return std::sqrt(s);
}

enum class KernelForm { FractionalLaplacian, TranslationInvariant, General };

/// Normalization constant C_{d,alpha} that gives the singular-kernel operator
/// the Fourier symbol |xi|^{2 alpha}.
double normalization_constant(int d, double alpha);

/// Angle Phi = pi - arccos(Lambda^2); the resolvent sector aperture produced
/// by the ellipticity constant.
double sector_angle(double lambda);

// A non-local kernel K(x, y) of order 2*alpha with a two-sided elliptic
// envelope:  Lambda <= Re K * |x-y|^{d+2a}  and  |K| * |x-y|^{d+2a} <= 1/Lambda.
struct KernelSpec {
    int dimension = 1;    // 1 or 2
    double order = 0.5;   // alpha in (0,1)
    double lambda = 0.5;  // Lambda in (0,1)
    KernelForm form = KernelForm::FractionalLaplacian;
    bool symmetric = true;  // K(x,y) == K(y,x) and K real-valued

    // TranslationInvariant: profile(z), z != 0
    std::function<cplx(const Point&)> profile;
    // General: evaluator(x, y), x != y
    std::function<cplx(const Point&, const Point&)> evaluator;
    // Set when the profile is exactly coeff * |z|^{-d-2a}; enables closed-form
    // singular moments and image-sum remainders in the assembler.
    std::optional<cplx> power_coeff;

    std::string name = "kernel";

    /// Kernel value at a concrete point pair (x != y).
    cplx eval(const Point& x, const Point& y) const;

    bool translation_invariant() const { return form != KernelForm::General; }

    /// Adjoint kernel K*(x,y) = conj(K(y,x)); same ellipticity window.
    KernelSpec adjoint() const;

    void validate_fields() const;  // throws std::invalid_argument on bad fields
};

/// Fractional Laplacian preset: K(x,y) = (C_{d,a}/2) |x-y|^{-d-2a}, so that the
/// assembled double-sum form realizes the operator with symbol |xi|^{2 alpha}.
KernelSpec fractional_kernel(int d, double alpha);

/// Complex phase perturbation: K(x,y) = (1 + 0.5i) |x-y|^{-d-2a}, Lambda = 0.8.
KernelSpec phase_perturbed_kernel(int d, double alpha);

/// Piecewise kernel oscillating between the Lambda and 1/Lambda envelopes on a
/// checkerboard of tiles with side `tile` (real, symmetric, not translation
/// invariant).
KernelSpec checkerboard_kernel(int d, double alpha, double lambda = 0.5, double tile = 0.25);

/// Plain unit-coefficient kernel |x-y|^{-d-2a} registered as a general
/// evaluator (matches the Gagliardo pair measure exactly).
KernelSpec power_kernel(int d, double alpha, double lambda = 0.9);

/// Catalog lookup: "fractional", "phase-perturbed", "checkerboard", "power".
KernelSpec kernel_by_name(const std::string& name, int d, double alpha, double lambda);

struct EllipticityReport {
    bool pass = false;
    double worst_margin = 0.0;  // min over samples of the dimensionless slack
    Point worst_x{}, worst_y{};
    int samples = 0;
};

/// Spot-checks the elliptic envelope on seeded sample pairs whose separations
/// span at least four decades. Throws on a non-finite kernel value, naming the
/// offending pair.
EllipticityReport validate_ellipticity(const KernelSpec& spec, int samples, std::uint64_t seed);

// Working sector geometry: lambda parameters live in S_theta, form values in
// the closed sector of half-angle pi - Phi.
struct SectorParams {
    double phi = 0.0;
    double theta = 0.0;
    double comparison_constant = 1.0;  // C with |z| + sum|w_i| <= C |z + sum w_i|

    static SectorParams from_lambda(double lambda, double theta_fraction = 0.9, int summands = 3);
};

/// Smallest C such that |z| + sum |w_i| <= C |z + sum w_i| for all z in the
/// closed sector of half-angle theta and w_i in the closed sector of
/// half-angle pi - phi (m summands). Computed by boundary-ray minimization;
/// throws std::domain_error when theta + (pi - phi) >= pi.
double sector_sum_constant(double theta, double phi, int summands);

}  // namespace nonlocal
