#pragma once

// Full spectrum of one mode: real branches of l and f, the conjugate pair, and
// an argument-principle count on the standard rectangle.

#include <algorithm>
#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "gpspectra/complex_spectrum.hpp"
#include "gpspectra/pencil.hpp"
#include "gpspectra/real_spectrum.hpp"

namespace gpspectra {

struct SpectrumOptions {
    std::size_t branches = 0; // 0: all N branches
    double residual_tol = 1e-10;
    bool certify = true; // count zeros on certification_contour(p, N); needs all branches
};

struct SpectrumResult {
    std::vector<BranchRoot> real_roots; // mu_{n,k}
    std::vector<BranchRoot> f_roots;    // x_{n,k}
    Complex plus;
    Complex minus;
    double pair_residual = 0.0;
    FixedPointResult fixed_point;
    int newton_steps = 0;
    std::optional<CountCertificate> certificate;

    /// All computed zeros of l: real branches then lambda^+, lambda^-.
    std::vector<Complex> zeros() const {
        std::vector<Complex> out;
        for (const auto& r : real_roots) out.emplace_back(r.value, 0.0);
        out.push_back(plus);
        out.push_back(minus);
        return out;
    }
};

inline SpectrumResult compute_spectrum(const ModePencil<ExponentialKernel>& p,
                                       const SpectrumOptions& options = {}) {
    const std::size_t n = p.kernel().size();
    const std::size_t count = options.branches == 0 ? n : options.branches;
    SpectrumResult out;
    RootOptions root_options;
    root_options.residual_tol = options.residual_tol;
    out.real_roots = real_roots(p, count, root_options);
    out.f_roots = f_roots(p, count, root_options);

    out.fixed_point = fixed_point_pair(p);
    NewtonOptions newton;
    newton.residual_tol = options.residual_tol;
    const RefinedRoot refined = newton_refine(p, out.fixed_point.plus, newton);
    out.plus = refined.value;
    out.minus = std::conj(refined.value);
    out.pair_residual = refined.residual;
    out.newton_steps = refined.steps;

    if (options.certify && count == n) {
        out.certificate = count_zeros(p, certification_contour(p, n));
    }
    return out;
}

} // namespace gpspectra
