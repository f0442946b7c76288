#pragma once

// The conjugate pair lambda^+- of l: a fixed-point map seeded at +ia, Newton
// polish, and argument-principle zero counts on rectangles.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "gpspectra/errors.hpp"
#include "gpspectra/kernel.hpp"
#include "gpspectra/pencil.hpp"

namespace gpspectra {

struct FixedPointResult {
    Complex plus;
    Complex minus;
    Complex tau;
    int iterations = 0;
    double contraction = 0.0; // |g'(tau)| at the returned iterate
};

struct FixedPointOptions {
    int max_iterations = 200;
    double tolerance = 1e-14;
};

namespace detail {

template <class Kernel>
Complex fixed_point_map(const ModePencil<Kernel>& p, Complex tau, double* slope) {
    const double a = p.frequency();
    const Complex lambda = Complex(0.0, a) + tau * a;
    const Complex shift = tau + Complex(0.0, 2.0);
    const Complex khat = laplace(p.kernel(), lambda);
    if (slope != nullptr) {
        const Complex dkhat = laplace_deriv(p.kernel(), lambda);
        *slope = std::abs(p.weight() * (dkhat * a * shift - khat) / (shift * shift));
    }
    return p.weight() * khat / shift;
}

} // namespace detail

/// Iterates tau -> w Khat(ia + tau a) / (tau + 2i) from tau = 0, so that
/// lambda^+ = ia + tau a solves l = 0. tau is complex.
template <class Kernel>
FixedPointResult fixed_point_pair(const ModePencil<Kernel>& p, const FixedPointOptions& options = {}) {
    Complex tau(0.0, 0.0);
    FixedPointResult out;
    for (int it = 1; it <= options.max_iterations; ++it) {
        double slope = 0.0;
        const Complex next = detail::fixed_point_map(p, tau, &slope);
        if (!(slope < 1.0)) {
            std::ostringstream os;
            os.precision(6);
            os << "fixed-point map is not contracting at a = " << p.frequency()
               << " (|g'| = " << slope << " at iteration " << it << ")";
            throw NonContraction(os.str());
        }
        const double change = std::abs(next - tau);
        tau = next;
        out.contraction = slope;
        if (change < options.tolerance * (1.0 + std::abs(tau))) {
            const double a = p.frequency();
            out.tau = tau;
            out.plus = Complex(0.0, a) + tau * a;
            out.minus = std::conj(out.plus);
            out.iterations = it;
            return out;
        }
    }
    throw MaxIterations("fixed-point iteration did not converge in " +
                        std::to_string(options.max_iterations) + " iterations at a = " +
                        std::to_string(p.frequency()));
}

struct NewtonOptions {
    double residual_tol = 1e-10;
    int max_steps = 50;
};

struct RefinedRoot {
    Complex value;
    double residual = 0.0; // |l(value)|
    int steps = 0;
};

/// Newton on l from seed. Runs until the step stalls at round-off, then
/// requires |l| <= residual_tol * max(a^2, |z|^2).
template <class Kernel>
RefinedRoot newton_refine(const ModePencil<Kernel>& p, Complex seed, const NewtonOptions& options = {}) {
    const double a = p.frequency();
    auto scale_of = [&](Complex z) { return std::max(a * a, std::norm(z)); };
    auto eval = [&](Complex z) -> Complex {
        try {
            return eval_symbol(p, z);
        } catch (const PoleProximity& e) {
            throw NewtonDivergence(std::string("Newton iterate entered a pole guard: ") + e.what());
        }
    };
    auto eval_d = [&](Complex z) -> Complex {
        try {
            return eval_symbol_deriv(p, z);
        } catch (const PoleProximity& e) {
            throw NewtonDivergence(std::string("Newton iterate entered a pole guard: ") + e.what());
        }
    };

    constexpr double eps = std::numeric_limits<double>::epsilon();
    Complex z = seed;
    Complex value = eval(z);
    double residual = std::abs(value);
    int rises = 0;
    bool converged = residual == 0.0;
    int steps = 0;
    while (!converged && steps < options.max_steps) {
        const Complex d = eval_d(z);
        if (d == Complex(0.0, 0.0)) throw NewtonDivergence("Newton derivative vanished");
        const Complex step = value / d;
        const Complex next = z - step;
        const Complex next_value = eval(next);
        const double next_residual = std::abs(next_value);
        ++steps;
        const double tol = options.residual_tol * scale_of(z);
        if (next_residual >= residual && residual <= tol) {
            converged = true; // no further progress below tolerance: keep z
            break;
        }
        if (next_residual > residual) {
            if (++rises >= 2) {
                std::ostringstream os;
                os.precision(6);
                os << "Newton residual increased twice in a row near z = " << detail::format_complex(z)
                   << " (|l| = " << next_residual << ")";
                throw NewtonDivergence(os.str());
            }
        } else {
            rises = 0;
        }
        z = next;
        value = next_value;
        residual = next_residual;
        if (residual == 0.0 || std::abs(step) <= 8.0 * eps * std::abs(z)) converged = true;
    }
    if (!converged) {
        throw NewtonDivergence("Newton did not settle within " + std::to_string(options.max_steps) +
                               " steps from seed " + detail::format_complex(seed));
    }
    if (!(residual <= options.residual_tol * scale_of(z))) {
        std::ostringstream os;
        os.precision(6);
        os << "Newton root " << detail::format_complex(z) << " has residual " << residual
           << " above " << options.residual_tol << " * " << scale_of(z);
        throw ResidualFailure(os.str());
    }
    return RefinedRoot{z, residual, steps};
}

struct RectContour {
    double x_min = 0.0;
    double x_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;
    int samples_per_side = 64;
};

struct CountCertificate {
    int winding = 0; // zeros minus poles inside
    int poles_inside = 0;
    int zeros_inferred = 0;
    double max_quadrature_defect = 0.0;
    int samples_per_side = 0; // at acceptance
};

struct CountOptions {
    int max_samples_per_side = 1 << 18;
};

namespace detail {

inline double distance_to_boundary(const RectContour& r, Complex z) {
    const double x = z.real();
    const double y = z.imag();
    const bool inside_x = x >= r.x_min && x <= r.x_max;
    const bool inside_y = y >= r.y_min && y <= r.y_max;
    if (inside_x && inside_y) {
        return std::min({x - r.x_min, r.x_max - x, y - r.y_min, r.y_max - y});
    }
    const double dx = inside_x ? 0.0 : std::min(std::abs(x - r.x_min), std::abs(x - r.x_max));
    const double dy = inside_y ? 0.0 : std::min(std::abs(y - r.y_min), std::abs(y - r.y_max));
    return std::hypot(dx, dy);
}

} // namespace detail

/// (1/2 pi i) \oint l'/l over the rectangle, by the trapezoid rule with
/// samples doubled (midpoints added) until two consecutive levels round to the
/// same integer with defect below 0.25 and differ by less than 0.05.
/// zeros_inferred adds back the enclosed simple poles. The first level already
/// resolves the short side and the closest pole, so thin rectangles are not
/// accepted on a grid coarser than their features.
inline CountCertificate count_zeros(const ModePencil<ExponentialKernel>& p, const RectContour& rect,
                                    const CountOptions& options = {}) {
    if (!(rect.x_min < rect.x_max) || !(rect.y_min < rect.y_max)) {
        throw DomainError("contour needs x_min < x_max and y_min < y_max");
    }
    if (rect.samples_per_side < 1) throw DomainError("contour needs samples_per_side >= 1");
    const double edge_guard =
        1e-3 * std::min(rect.x_max - rect.x_min, rect.y_max - rect.y_min);
    int poles_inside = 0;
    double feature = std::min(rect.x_max - rect.x_min, rect.y_max - rect.y_min);
    for (double rate : p.kernel().rates()) {
        const double pole = -rate;
        const Complex z(pole, 0.0);
        const double distance = detail::distance_to_boundary(rect, z);
        feature = std::min(feature, distance);
        if (distance < edge_guard) {
            std::ostringstream os;
            os.precision(17);
            os << "pole " << pole << " lies within the edge guard of the contour";
            throw ContourFailure(os.str());
        }
        if (pole > rect.x_min && pole < rect.x_max && rect.y_min < 0.0 && rect.y_max > 0.0) {
            ++poles_inside;
        }
    }

    const std::array<Complex, 5> corners{Complex(rect.x_min, rect.y_min), Complex(rect.x_max, rect.y_min),
                                         Complex(rect.x_max, rect.y_max), Complex(rect.x_min, rect.y_max),
                                         Complex(rect.x_min, rect.y_min)};
    auto log_deriv = [&](Complex z) -> Complex {
        try {
            const Complex v = eval_symbol(p, z);
            if (v == Complex(0.0, 0.0)) throw ContourFailure("zero of l on the contour");
            return eval_symbol_deriv(p, z) / v;
        } catch (const PoleProximity& e) {
            throw ContourFailure(std::string("contour passes a pole: ") + e.what());
        }
    };

    // Node values per side, n + 1 nodes each (corners duplicated). Spacing on
    // the longest side starts at no more than a quarter of the feature scale.
    const double longest = std::max(rect.x_max - rect.x_min, rect.y_max - rect.y_min);
    int n = rect.samples_per_side;
    while (n < options.max_samples_per_side && longest / n > 0.25 * feature) n *= 2;
    std::array<std::vector<Complex>, 4> values;
    for (int s = 0; s < 4; ++s) {
        values[s].resize(static_cast<std::size_t>(n) + 1);
        for (int j = 0; j <= n; ++j) {
            const double frac = static_cast<double>(j) / n;
            values[s][static_cast<std::size_t>(j)] = log_deriv(corners[s] + frac * (corners[s + 1] - corners[s]));
        }
    }
    auto integral = [&]() {
        Complex total(0.0, 0.0);
        for (int s = 0; s < 4; ++s) {
            const auto& v = values[s];
            Complex sum = 0.5 * (v.front() + v.back());
            for (std::size_t j = 1; j + 1 < v.size(); ++j) sum += v[j];
            total += sum * (corners[s + 1] - corners[s]) / static_cast<double>(v.size() - 1);
        }
        return total / Complex(0.0, 2.0 * std::numbers::pi);
    };

    bool have_previous = false;
    long previous_round = 0;
    double previous_defect = 0.0;
    Complex previous_raw(0.0, 0.0);
    while (true) {
        const Complex raw = integral();
        const double nearest = std::round(raw.real());
        const double defect = std::abs(raw - Complex(nearest, 0.0));
        const long rounded = static_cast<long>(nearest);
        if (defect < 0.25 && have_previous && previous_defect < 0.25 && rounded == previous_round &&
            std::abs(raw - previous_raw) < 0.05) {
            CountCertificate cert;
            cert.winding = static_cast<int>(rounded);
            cert.poles_inside = poles_inside;
            cert.zeros_inferred = cert.winding + poles_inside;
            cert.max_quadrature_defect = std::max(defect, previous_defect);
            cert.samples_per_side = n;
            if (cert.zeros_inferred < 0) {
                throw ContourFailure("argument principle returned a negative zero count");
            }
            return cert;
        }
        have_previous = true;
        previous_round = rounded;
        previous_defect = defect;
        previous_raw = raw;
        if (2 * n > options.max_samples_per_side) {
            std::ostringstream os;
            os.precision(6);
            os << "winding integral did not settle (defect " << defect << " at " << n
               << " samples per side); a zero or pole is too close to the contour";
            throw ContourFailure(os.str());
        }
        for (int s = 0; s < 4; ++s) {
            std::vector<Complex> refined(2 * static_cast<std::size_t>(n) + 1);
            for (int j = 0; j <= n; ++j) refined[2 * static_cast<std::size_t>(j)] = values[s][static_cast<std::size_t>(j)];
            for (int j = 0; j < n; ++j) {
                const double frac = (2.0 * j + 1.0) / (2.0 * n);
                refined[2 * static_cast<std::size_t>(j) + 1] =
                    log_deriv(corners[s] + frac * (corners[s + 1] - corners[s]));
            }
            values[s] = std::move(refined);
        }
        n *= 2;
    }
}

/// Rectangle [-X, X] x [-Y, Y] with X = (gamma_w + gamma_{w+1})/2 and
/// Y = 1.1 a sqrt(1 + S1 w). For window = N the missing gamma_{N+1} is
/// extrapolated as gamma_N + (gamma_N - gamma_{N-1}), or 2 gamma_1 when N = 1.
inline RectContour certification_contour(const ModePencil<ExponentialKernel>& p, std::size_t window) {
    const auto g = p.kernel().rates();
    const std::size_t n = g.size();
    if (window == 0 || window > n) {
        throw DomainError("contour window must lie in 1.." + std::to_string(n));
    }
    const double next = window < n ? g[window] : (n == 1 ? 2.0 * g[0] : 2.0 * g[n - 1] - g[n - 2]);
    const double x = 0.5 * (g[window - 1] + next);
    const double y = 1.1 * p.frequency() * std::sqrt(1.0 + p.kernel().coefficient_sum() * p.weight());
    return RectContour{-x, x, -y, y, 64};
}

} // namespace gpspectra
