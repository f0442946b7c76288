#pragma once

// Independent cross-checks: simultaneous polynomial root finding on the
// expanded symbol, the auxiliary-variable ODE whose matrix has the pencil's
// zeros as eigenvalues, and a time-domain decay estimate.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/float128.hpp>

#include "gpspectra/errors.hpp"
#include "gpspectra/fit.hpp"
#include "gpspectra/kernel.hpp"
#include "gpspectra/pencil.hpp"

namespace gpspectra {

using quad_real = boost::multiprecision::float128;

namespace detail {

// Minimal complex arithmetic over an arbitrary real type (std::complex is
// only specified for the built-in floating types).
template <class Real>
struct Cx {
    Real re{0};
    Real im{0};

    friend Cx operator+(const Cx& a, const Cx& b) { return {a.re + b.re, a.im + b.im}; }
    friend Cx operator-(const Cx& a, const Cx& b) { return {a.re - b.re, a.im - b.im}; }
    friend Cx operator*(const Cx& a, const Cx& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend Cx operator*(const Real& s, const Cx& a) { return {s * a.re, s * a.im}; }
    friend Cx operator/(const Cx& a, const Cx& b) {
        using std::abs;
        // Smith's algorithm
        if (abs(b.re) >= abs(b.im)) {
            const Real q = b.im / b.re;
            const Real d = b.re + b.im * q;
            return {(a.re + a.im * q) / d, (a.im - a.re * q) / d};
        }
        const Real q = b.re / b.im;
        const Real d = b.re * q + b.im;
        return {(a.re * q + a.im) / d, (a.im * q - a.re) / d};
    }
};

template <class Real>
Real cabs(const Cx<Real>& z) {
    using std::abs;
    using std::sqrt;
    const Real ar = abs(z.re);
    const Real ai = abs(z.im);
    const Real big = ar > ai ? ar : ai;
    if (big == Real(0)) return Real(0);
    const Real small = ar > ai ? ai : ar;
    const Real q = small / big;
    return big * sqrt(Real(1) + q * q);
}

template <class Real>
Complex to_double(const Cx<Real>& z) {
    return {static_cast<double>(z.re), static_cast<double>(z.im)};
}

// Horner for p and p'; also returns sum |c_i| |z|^i as the rounding scale.
template <class Real>
void horner(const std::vector<Real>& c, const Cx<Real>& z, Cx<Real>& value, Cx<Real>& deriv,
            Real& scale) {
    const std::size_t n = c.size() - 1;
    value = Cx<Real>{c[n], Real(0)};
    deriv = Cx<Real>{Real(0), Real(0)};
    const Real r = cabs(z);
    using std::abs;
    scale = abs(c[n]);
    for (std::size_t i = n; i-- > 0;) {
        deriv = deriv * z + value;
        value = value * z + Cx<Real>{c[i], Real(0)};
        scale = scale * r + abs(c[i]);
    }
}

} // namespace detail

struct AberthResult {
    std::vector<Complex> roots;
    int sweeps = 0;
    double max_backward_error = 0.0; // max |P(z)| / sum |c_i| |z|^i
    double conjugate_defect = 0.0;   // max distance of conj(z) to the nearest root, relative
};

struct AberthOptions {
    int max_sweeps = 500;
    double residual_tol = 1e-10;
    double conjugate_tol = 1e-10;
};

/// All roots of a monic polynomial (ascending coefficients, real) by the
/// Aberth-Ehrlich iteration in Real arithmetic. Starting points are spread
/// on circles whose radii come from the Newton polygon of |c_i|.
template <class Real>
AberthResult aberth_roots(const std::vector<Real>& coeffs, const AberthOptions& options = {}) {
    using std::abs;
    using std::log;
    if (coeffs.size() < 2) throw DomainError("aberth_roots needs degree >= 1");
    const std::size_t n = coeffs.size() - 1;
    if (n > poly_max + 2) throw DomainError("aberth_roots degree exceeds the supported maximum");
    if (abs(coeffs[n] - Real(1)) > Real(1e-12)) throw DomainError("aberth_roots needs a monic polynomial");

    // Upper convex hull of (i, log|c_i|).
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i <= n; ++i) {
        if (coeffs[i] != Real(0)) {
            pts.emplace_back(static_cast<double>(i), static_cast<double>(log(abs(coeffs[i]))));
        }
    }
    std::vector<std::pair<double, double>> hull;
    for (const auto& pt : pts) {
        while (hull.size() >= 2) {
            const auto& o = hull[hull.size() - 2];
            const auto& a = hull.back();
            const double cross = (a.first - o.first) * (pt.second - o.second) -
                                 (a.second - o.second) * (pt.first - o.first);
            if (cross >= 0.0) {
                hull.pop_back();
            } else {
                break;
            }
        }
        hull.push_back(pt);
    }

    std::vector<detail::Cx<Real>> z;
    z.reserve(n);
    // Zero roots from vanishing low-order coefficients.
    const std::size_t zero_roots = static_cast<std::size_t>(pts.front().first);
    for (std::size_t i = 0; i < zero_roots; ++i) {
        const double r = 1e-30 * (1.0 + static_cast<double>(i));
        z.push_back({Real(r), Real(r * 0.5)});
    }
    const double two_pi = 2.0 * std::numbers::pi;
    const double sigma = 0.7;
    for (std::size_t s = 0; s + 1 < hull.size(); ++s) {
        const std::size_t i = static_cast<std::size_t>(hull[s].first);
        const std::size_t j = static_cast<std::size_t>(hull[s + 1].first);
        const std::size_t m = j - i;
        const double radius = std::exp((hull[s].second - hull[s + 1].second) / static_cast<double>(m));
        for (std::size_t k = 0; k < m; ++k) {
            const double angle = two_pi * static_cast<double>(k) / static_cast<double>(m) +
                                 two_pi * static_cast<double>(i) / static_cast<double>(n) + sigma;
            z.push_back({Real(radius * std::cos(angle)), Real(radius * std::sin(angle))});
        }
    }

    const Real eps = std::numeric_limits<Real>::epsilon();
    std::vector<bool> done(n, false);
    AberthResult out;
    int sweep = 0;
    for (; sweep < options.max_sweeps; ++sweep) {
        bool all_done = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (done[i]) continue;
            detail::Cx<Real> p;
            detail::Cx<Real> dp;
            Real scale;
            detail::horner(coeffs, z[i], p, dp, scale);
            // At the rounding floor further corrections only jitter.
            if (detail::cabs(p) <= Real(static_cast<double>(4 * n)) * eps * scale) {
                done[i] = true;
                continue;
            }
            const detail::Cx<Real> ratio = p / dp;
            detail::Cx<Real> sum;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) sum = sum + detail::Cx<Real>{Real(1), Real(0)} / (z[i] - z[j]);
            }
            const detail::Cx<Real> corr =
                ratio / (detail::Cx<Real>{Real(1), Real(0)} - ratio * sum);
            z[i] = z[i] - corr;
            if (detail::cabs(corr) <= Real(4) * eps * detail::cabs(z[i])) {
                done[i] = true;
            } else {
                all_done = false;
            }
        }
        if (all_done) break;
    }
    if (sweep >= options.max_sweeps) {
        throw MaxIterations("Aberth iteration did not converge in " + std::to_string(options.max_sweeps) +
                            " sweeps");
    }
    out.sweeps = sweep + 1;

    for (const auto& root : z) {
        detail::Cx<Real> p;
        detail::Cx<Real> dp;
        Real scale;
        detail::horner(coeffs, root, p, dp, scale);
        const double backward = static_cast<double>(detail::cabs(p) / scale);
        out.max_backward_error = std::max(out.max_backward_error, backward);
        out.roots.push_back(detail::to_double(root));
    }
    for (const auto& root : z) {
        const detail::Cx<Real> conj{root.re, -root.im};
        Real best = detail::cabs(conj - z.front());
        for (const auto& other : z) {
            const Real d = detail::cabs(conj - other);
            if (d < best) best = d;
        }
        const Real mag = detail::cabs(root);
        const double rel = static_cast<double>(best / (mag > Real(1) ? mag : Real(1)));
        out.conjugate_defect = std::max(out.conjugate_defect, rel);
    }
    if (!(out.max_backward_error <= options.residual_tol)) {
        std::ostringstream os;
        os.precision(6);
        os << "Aberth roots fail the residual check (backward error " << out.max_backward_error << ")";
        throw ResidualFailure(os.str());
    }
    if (!(out.conjugate_defect <= options.conjugate_tol)) {
        std::ostringstream os;
        os.precision(6);
        os << "Aberth roots are not closed under conjugation (defect " << out.conjugate_defect << ")";
        throw ResidualFailure(os.str());
    }
    return out;
}

/// Roots of l for an exponential-sum pencil via the quad-precision expansion.
inline AberthResult oracle_roots(const ModePencil<ExponentialKernel>& p, const AberthOptions& options = {}) {
    return aberth_roots(to_polynomial<quad_real>(p), options);
}

inline constexpr std::size_t ode_max = 32;

/// Linear system for the state (u, u', w_1..w_N), w_k(t) = int_0^t e^{-gamma_k (t-s)} u(s) ds:
///   u'' = -a^2 u + a^{2xi} sum c_k w_k,  w_k' = -gamma_k w_k + u.
struct ModeSystem {
    std::size_t dimension = 0;
    std::vector<double> matrix; // row-major, dimension x dimension

    double at(std::size_t row, std::size_t col) const { return matrix[row * dimension + col]; }
    double trace() const {
        double t = 0.0;
        for (std::size_t i = 0; i < dimension; ++i) t += at(i, i);
        return t;
    }
};

inline ModeSystem build_mode_system(const ModePencil<ExponentialKernel>& p) {
    const auto c = p.kernel().coeffs();
    const auto g = p.kernel().rates();
    const std::size_t n = c.size();
    if (n > ode_max) {
        throw DomainError("mode system supports at most " + std::to_string(ode_max) + " kernel terms");
    }
    ModeSystem sys;
    sys.dimension = n + 2;
    sys.matrix.assign(sys.dimension * sys.dimension, 0.0);
    auto set = [&](std::size_t r, std::size_t col, double v) { sys.matrix[r * sys.dimension + col] = v; };
    const double a = p.frequency();
    set(0, 1, 1.0);
    set(1, 0, -a * a);
    for (std::size_t k = 0; k < n; ++k) {
        set(1, 2 + k, p.coupling() * c[k]);
        set(2 + k, 0, 1.0);
        set(2 + k, 2 + k, -g[k]);
    }
    return sys;
}

/// det(zI - M), ascending and monic, by the Faddeev-LeVerrier recursion in Real.
template <class Real = quad_real>
std::vector<Real> characteristic_polynomial(const ModeSystem& sys) {
    const std::size_t n = sys.dimension;
    std::vector<Real> a(n * n);
    for (std::size_t i = 0; i < n * n; ++i) a[i] = Real(sys.matrix[i]);
    std::vector<Real> coeff(n + 1, Real(0));
    coeff[n] = Real(1);
    std::vector<Real> m(n * n, Real(0)); // M_0 = 0
    std::vector<Real> am(n * n);
    for (std::size_t k = 1; k <= n; ++k) {
        // M_k = A M_{k-1} + c_{n-k+1} I
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                Real s(0);
                for (std::size_t l = 0; l < n; ++l) s += a[i * n + l] * m[l * n + j];
                am[i * n + j] = s;
            }
        }
        for (std::size_t i = 0; i < n; ++i) am[i * n + i] += coeff[n - k + 1];
        m.swap(am);
        // c_{n-k} = -tr(A M_k) / k
        Real tr(0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t l = 0; l < n; ++l) tr += a[i * n + l] * m[l * n + i];
        }
        coeff[n - k] = -tr / Real(static_cast<double>(k));
    }
    return coeff;
}

struct DecayEstimate {
    double rate = 0.0;         // fitted exponential rate of the envelope
    std::size_t peaks = 0;     // peaks used (0 when the fallback fit was used)
    bool monotone_fallback = false; // fewer than 4 peaks: log fit of |u| + |u'|/a
    double log_residual_rms = 0.0;
    bool beats_suspected = false;
};

/// RK4 integration of the mode system from u = 1, u' = 0, w = 0 over [0, T];
/// the decay rate is the slope of log |u| at its peaks in [T/2, T].
inline DecayEstimate simulate_decay(const ModePencil<ExponentialKernel>& p, double horizon, double step) {
    const double a = p.frequency();
    const double fastest = std::max(a, p.kernel().largest_rate());
    if (!(horizon > 0.0) || !(step > 0.0)) throw DomainError("simulation needs positive horizon and step");
    if (step > 0.05 / fastest) {
        std::ostringstream os;
        os.precision(6);
        os << "step " << step << " rejected: must be <= 0.05/max(a, gamma_N) = " << 0.05 / fastest;
        throw DomainError(os.str());
    }
    const ModeSystem sys = build_mode_system(p);
    const std::size_t n = sys.dimension;
    struct Entry {
        std::size_t row;
        std::size_t col;
        double value;
    };
    std::vector<Entry> nonzeros;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (sys.at(i, j) != 0.0) nonzeros.push_back({i, j, sys.at(i, j)});
        }
    }
    auto rhs = [&](const std::vector<double>& x, std::vector<double>& dx) {
        std::fill(dx.begin(), dx.end(), 0.0);
        for (const auto& e : nonzeros) dx[e.row] += e.value * x[e.col];
    };

    const auto steps = static_cast<std::size_t>(std::ceil(horizon / step));
    const double h = horizon / static_cast<double>(steps);
    const std::size_t start = steps / 2;
    std::vector<double> x(n, 0.0);
    x[0] = 1.0;
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);

    std::vector<std::pair<double, double>> peaks; // (t, log |u|)
    std::vector<std::pair<double, double>> envelope;
    const std::size_t stride = std::max<std::size_t>(1, (steps - start) / 4000);
    double prev2 = 0.0;
    double prev1 = 0.0;
    for (std::size_t s = 1; s <= steps; ++s) {
        rhs(x, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
        rhs(tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
        rhs(tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
        rhs(tmp, k4);
        for (std::size_t i = 0; i < n; ++i) x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (!std::isfinite(x[0]) || !std::isfinite(x[1])) {
            throw EnvelopeFitFailure("simulation produced a non-finite state");
        }
        const double cur = std::abs(x[0]);
        const double t = h * static_cast<double>(s);
        if (s >= start + 2 && prev1 > prev2 && prev1 >= cur && prev1 > 0.0) {
            // Parabola through the three samples around the maximum.
            const double denom = prev2 - 2.0 * prev1 + cur;
            double offset = 0.0;
            double peak = prev1;
            if (denom < 0.0) {
                offset = 0.5 * (prev2 - cur) / denom;
                peak = prev1 - 0.25 * (prev2 - cur) * offset;
            }
            peaks.emplace_back(t - h + offset * h, std::log(peak));
        }
        if (s >= start && (s - start) % stride == 0) {
            const double env = cur + std::abs(x[1]) / a;
            if (env > 0.0) envelope.emplace_back(t, std::log(env));
        }
        prev2 = prev1;
        prev1 = cur;
    }

    DecayEstimate out;
    const std::vector<std::pair<double, double>>* data = &peaks;
    if (peaks.size() < 4) {
        out.monotone_fallback = true;
        data = &envelope;
    } else {
        out.peaks = peaks.size();
    }
    if (data->size() < 2) throw EnvelopeFitFailure("too few samples to fit the decay envelope");
    // Linear least squares of log-envelope on t.
    double mt = 0.0;
    double my = 0.0;
    for (const auto& [t, y] : *data) {
        mt += t;
        my += y;
    }
    mt /= static_cast<double>(data->size());
    my /= static_cast<double>(data->size());
    double stt = 0.0;
    double sty = 0.0;
    for (const auto& [t, y] : *data) {
        stt += (t - mt) * (t - mt);
        sty += (t - mt) * (y - my);
    }
    if (!(stt > 0.0)) throw EnvelopeFitFailure("degenerate time span in the decay fit");
    out.rate = sty / stt;
    double ss = 0.0;
    for (const auto& [t, y] : *data) {
        const double e = y - (my + out.rate * (t - mt));
        ss += e * e;
    }
    out.log_residual_rms = std::sqrt(ss / static_cast<double>(data->size()));
    out.beats_suspected = out.log_residual_rms > 0.05;
    return out;
}

/// max Re over the oracle roots of l.
inline double spectral_abscissa(const std::vector<Complex>& roots) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& z : roots) best = std::max(best, z.real());
    return best;
}

struct RootMatch {
    std::vector<std::pair<std::size_t, std::size_t>> pairs; // (index in A, index in B)
    double max_deviation = 0.0;                              // max |a - b| / max(1, |a|)
    bool used_assignment = false;                            // greedy was ambiguous
};

namespace detail {

// Minimum-cost perfect assignment (Hungarian algorithm, potentials form).
inline std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& cost) {
    const std::size_t n = cost.size();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = match[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> row_to_col(n);
    for (std::size_t j = 1; j <= n; ++j) row_to_col[match[j] - 1] = j - 1;
    return row_to_col;
}

} // namespace detail

/// Pairs two root sets by greedy nearest neighbour; if any greedy choice has a
/// runner-up within twice the chosen distance, solves the optimal assignment
/// instead.
inline RootMatch match_roots(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    if (a.size() != b.size()) {
        throw DomainError("match_roots needs equal cardinalities (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
    }
    const std::size_t n = a.size();
    auto deviation = [](Complex x, Complex y) { return std::abs(x - y) / std::max(1.0, std::abs(x)); };
    RootMatch out;
    std::vector<bool> taken(n, false);
    bool ambiguous = false;
    for (std::size_t i = 0; i < n && !ambiguous; ++i) {
        double best = std::numeric_limits<double>::infinity();
        double second = best;
        std::size_t best_j = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (taken[j]) continue;
            const double d = std::abs(a[i] - b[j]);
            if (d < best) {
                second = best;
                best = d;
                best_j = j;
            } else if (d < second) {
                second = d;
            }
        }
        if (second <= 2.0 * best && best > 0.0) {
            ambiguous = true;
            break;
        }
        taken[best_j] = true;
        out.pairs.emplace_back(i, best_j);
    }
    if (ambiguous) {
        std::vector<std::vector<double>> cost(n, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) cost[i][j] = deviation(a[i], b[j]);
        }
        const auto assign = detail::hungarian(cost);
        out.pairs.clear();
        for (std::size_t i = 0; i < n; ++i) out.pairs.emplace_back(i, assign[i]);
        out.used_assignment = true;
    }
    for (const auto& [i, j] : out.pairs) out.max_deviation = std::max(out.max_deviation, deviation(a[i], b[j]));
    return out;
}

} // namespace gpspectra
