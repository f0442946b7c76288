#pragma once

// Real zeros of l and f, one per interval (-gamma_k, -gamma_{k-1}), gamma_0 = 0.
//
// Everything is evaluated in offset coordinates z = -gamma_k + t, so that
// z + gamma_j = (gamma_j - gamma_k) + t keeps full relative precision in t
// even when the root sits a hair to the right of the pole.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gpspectra/errors.hpp"
#include "gpspectra/fit.hpp"
#include "gpspectra/kernel.hpp"
#include "gpspectra/pencil.hpp"

namespace gpspectra {

struct Interval {
    double lo;
    double hi;
};

struct BranchRoot {
    std::size_t index = 0; // k, 1-based
    double value = 0.0;
    double offset = 0.0; // value + gamma_k, computed directly
    Interval interval{};
    double residual = 0.0;
};

/// Intervals (-gamma_k, -gamma_{k-1}) for k = 1..count.
inline std::vector<Interval> bracket_intervals(const ExponentialKernel& kernel, std::size_t count) {
    if (count > kernel.size()) {
        throw DomainError("requested " + std::to_string(count) + " branches but the kernel has " +
                          std::to_string(kernel.size()) + " terms");
    }
    const auto g = kernel.rates();
    std::vector<Interval> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        out.push_back(Interval{-g[k], k == 0 ? 0.0 : -g[k - 1]});
    }
    return out;
}

struct RootOptions {
    double residual_tol = 1e-10;
    bool enforce_residual = true;
};

enum class RealTarget { symbol, f };

namespace detail {

struct RealSample {
    double value;
    double deriv;
};

// l or f (and d/dt) at z = -anchor + t, where anchor is one of the rates or 0.
inline RealSample real_eval(const ModePencil<ExponentialKernel>& p, RealTarget target, double anchor,
                            double t) {
    const auto c = p.kernel().coeffs();
    const auto g = p.kernel().rates();
    CompensatedSum khat;
    CompensatedSum dkhat; // -Khat'
    for (std::size_t j = 0; j < c.size(); ++j) {
        const double d = (g[j] - anchor) + t;
        if (d == 0.0) {
            throw PoleProximity("real branch evaluation hit the pole -gamma_" + std::to_string(j + 1));
        }
        khat.add(c[j] / d);
        dkhat.add(c[j] / (d * d));
    }
    if (target == RealTarget::f) {
        return {1.0 - p.weight() * khat.value(), p.weight() * dkhat.value()};
    }
    const double z = t - anchor;
    const double a = p.frequency();
    CompensatedSum value;
    value.add(z * z);
    value.add(a * a);
    value.add(-p.coupling() * khat.value());
    return {value.value(), 2.0 * z + p.coupling() * dkhat.value()};
}

inline std::string describe_interval(std::size_t k, const Interval& iv) {
    std::ostringstream os;
    os.precision(17);
    os << "branch " << k << " interval (" << iv.lo << ", " << iv.hi << ")";
    return os.str();
}

inline BranchRoot find_branch(const ModePencil<ExponentialKernel>& p, RealTarget target,
                              std::size_t k, const Interval& iv, const RootOptions& options) {
    const double anchor = -iv.lo; // gamma_k
    const double width = iv.hi - iv.lo;
    const bool right_pole = k > 1;
    auto eval = [&](double t) { return real_eval(p, target, anchor, t); };
    const char* name = target == RealTarget::symbol ? "l" : "f";

    // Left end: value tends to -inf at the pole. Shrink the standoff while the
    // sample is still positive (root closer to the pole than the standoff).
    double eta = 1e-9 * width;
    double t_lo = eta;
    double v_lo = eval(t_lo).value;
    while (v_lo >= 0.0 && eta > 1e-250 * width) {
        eta *= 1e-6;
        t_lo = eta;
        v_lo = eval(t_lo).value;
    }
    // Right end: +inf at the next pole for k > 1; the origin (no pole) for k = 1.
    double t_hi = width - 1e-9 * width;
    double v_hi = eval(t_hi).value;
    if (right_pole) {
        double eta_hi = 1e-9 * width;
        while (v_hi <= 0.0 && eta_hi > 1e-12 * width) {
            eta_hi *= 1e-1;
            t_hi = width - eta_hi;
            v_hi = eval(t_hi).value;
        }
    }
    if (!(v_lo < 0.0 && v_hi > 0.0)) {
        std::ostringstream os;
        os.precision(6);
        os << "no sign change of " << name << " on " << describe_interval(k, iv) << ": value "
           << v_lo << " at offset " << t_lo << ", value " << v_hi << " at offset " << t_hi;
        throw NoSignChange(os.str());
    }

    // Geometric bisection while the bracket spans more than a factor 2, then
    // arithmetic bisection down to 1e-13 of the interval (and of the offset).
    while (t_hi > 2.0 * t_lo) {
        const double mid = std::sqrt(t_lo) * std::sqrt(t_hi);
        const double v = eval(mid).value;
        if (v == 0.0) {
            t_lo = t_hi = mid;
            break;
        }
        (v < 0.0 ? t_lo : t_hi) = mid;
    }
    while (t_hi - t_lo > 1e-13 * std::min(width, t_lo)) {
        const double mid = 0.5 * (t_lo + t_hi);
        if (mid <= t_lo || mid >= t_hi) break;
        const double v = eval(mid).value;
        if (v == 0.0) {
            t_lo = t_hi = mid;
            break;
        }
        (v < 0.0 ? t_lo : t_hi) = mid;
    }

    double t = 0.5 * (t_lo + t_hi);
    RealSample s = eval(t);
    for (int step = 0; step < 8 && s.value != 0.0 && s.deriv != 0.0; ++step) {
        const double next = t - s.value / s.deriv;
        if (next == t || !(next >= t_lo && next <= t_hi)) break;
        const RealSample ns = eval(next);
        if (!(std::abs(ns.value) < std::abs(s.value))) break;
        t = next;
        s = ns;
    }

    BranchRoot root;
    root.index = k;
    root.offset = t;
    root.value = t - anchor;
    root.interval = iv;
    root.residual = std::abs(s.value);
    if (target == RealTarget::symbol && options.enforce_residual) {
        const double a = p.frequency();
        const double scale = std::max(a * a, root.value * root.value);
        if (!(root.residual <= options.residual_tol * scale)) {
            std::ostringstream os;
            os.precision(6);
            os << "residual " << root.residual << " of l exceeds " << options.residual_tol
               << " * " << scale << " on " << describe_interval(k, iv);
            throw ResidualFailure(os.str());
        }
    }
    return root;
}

} // namespace detail

/// mu_{n,k}: one zero of l per interval, k = 1..count.
inline std::vector<BranchRoot> real_roots(const ModePencil<ExponentialKernel>& p, std::size_t count,
                                          const RootOptions& options = {}) {
    const auto intervals = bracket_intervals(p.kernel(), count);
    std::vector<BranchRoot> out;
    out.reserve(count);
    for (std::size_t k = 0; k < intervals.size(); ++k) {
        out.push_back(detail::find_branch(p, RealTarget::symbol, k + 1, intervals[k], options));
    }
    return out;
}

/// x_{n,k}: one zero of f = 1 - w Khat per interval. The residual recorded is |f|.
inline std::vector<BranchRoot> f_roots(const ModePencil<ExponentialKernel>& p, std::size_t count,
                                       const RootOptions& options = {}) {
    const auto intervals = bracket_intervals(p.kernel(), count);
    std::vector<BranchRoot> out;
    out.reserve(count);
    for (std::size_t k = 0; k < intervals.size(); ++k) {
        out.push_back(detail::find_branch(p, RealTarget::f, k + 1, intervals[k], options));
    }
    return out;
}

/// Smallest slack in -gamma_k < mu_k < x_k < -gamma_{k-1} over all branches,
/// measured in offsets; negative means a violation.
inline double interlacing_margin(std::span<const BranchRoot> mu, std::span<const BranchRoot> x) {
    if (mu.size() != x.size()) throw DomainError("interlacing check needs matching branch lists");
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double width = mu[i].interval.hi - mu[i].interval.lo;
        margin = std::min(margin, mu[i].offset);
        margin = std::min(margin, x[i].offset - mu[i].offset);
        margin = std::min(margin, width - x[i].offset);
    }
    return margin;
}

struct BranchLimitRecord {
    std::size_t index = 0;
    std::vector<double> frequencies;
    std::vector<double> distance; // |mu_k + gamma_k|
    std::vector<double> gap;      // x_k - mu_k
    bool monotone = false;        // distance strictly decreasing along the ladder
    OrderFit distance_fit;
    OrderFit gap_fit;
};

/// Tracks mu_{n,k} -> -gamma_k and the gap x_{n,k} - mu_{n,k} along an
/// increasing ladder of frequencies.
inline BranchLimitRecord branch_limit_check(const ExponentialKernel& kernel, double xi,
                                            std::span<const double> frequencies, std::size_t k,
                                            const RootOptions& options = {}) {
    if (k == 0 || k > kernel.size()) {
        throw DomainError("branch index " + std::to_string(k) + " outside 1.." +
                          std::to_string(kernel.size()));
    }
    if (frequencies.size() < 2) throw DomainError("branch_limit_check needs at least two frequencies");
    for (std::size_t i = 1; i < frequencies.size(); ++i) {
        if (!(frequencies[i] > frequencies[i - 1])) {
            throw DomainError("branch_limit_check needs an increasing frequency ladder");
        }
    }
    BranchLimitRecord rec;
    rec.index = k;
    const Interval iv = bracket_intervals(kernel, k).back();
    std::vector<std::pair<double, double>> dist_pts;
    std::vector<std::pair<double, double>> gap_pts;
    for (double a : frequencies) {
        const ModePencil<ExponentialKernel> p(a, xi, kernel);
        const BranchRoot mu = detail::find_branch(p, RealTarget::symbol, k, iv, options);
        const BranchRoot x = detail::find_branch(p, RealTarget::f, k, iv, options);
        rec.frequencies.push_back(a);
        rec.distance.push_back(mu.offset);
        rec.gap.push_back(x.offset - mu.offset);
        dist_pts.emplace_back(a, mu.offset);
        gap_pts.emplace_back(a, x.offset - mu.offset);
    }
    rec.monotone = true;
    for (std::size_t i = 1; i < rec.distance.size(); ++i) {
        if (!(rec.distance[i] < rec.distance[i - 1])) rec.monotone = false;
    }
    rec.distance_fit = detail::log_log_fit(dist_pts);
    bool gaps_positive = std::all_of(rec.gap.begin(), rec.gap.end(), [](double g) { return g > 0.0; });
    if (gaps_positive) {
        rec.gap_fit = detail::log_log_fit(gap_pts);
    } else {
        rec.gap_fit.below_floor = true;
        rec.gap_fit.points = gap_pts.size();
    }
    return rec;
}

inline BranchLimitRecord branch_limit_check(const ExponentialKernel& kernel, double xi,
                                            const std::vector<double>& frequencies, std::size_t k,
                                            const RootOptions& options = {}) {
    return branch_limit_check(kernel, xi, std::span<const double>(frequencies), k, options);
}

} // namespace gpspectra
