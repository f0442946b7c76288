#pragma once

// Job runners behind the gpspectra subcommands. Each returns the complete
// output text plus an exit code; nothing here touches the filesystem.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "config.hpp"
#include "gpspectra/gpspectra.hpp"

namespace gpspectra::cli {

enum ExitCode : int { exit_ok = 0, exit_verify_failed = 1, exit_config = 2, exit_numerical = 3 };

struct JobOutput {
    std::string text;        // CSV with '#' metadata header
    int exit_code = exit_ok;
    std::string diagnostics; // for standard error
};

inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string header(const JobConfig& cfg) {
    std::string out = "# gpspectra ";
    out += version;
    out += "\n# job: ";
    out += to_string(cfg.job);
    out += "\n# effective-config: ";
    out += cfg.effective.dump();
    out += "\n";
    return out;
}

namespace detail {

// Runs body(i) for i in [0, count) on up to `jobs` threads. Exceptions are
// captured per index so the caller can report them in index order.
inline std::vector<std::exception_ptr> parallel_for(std::size_t count, unsigned jobs,
                                                    const std::function<void(std::size_t)>& body) {
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return errors;
}

// Rethrows the first captured failure (lowest mode index), tagged with the mode.
inline void rethrow_first(const std::vector<std::exception_ptr>& errors, const std::vector<double>& modes,
                          JobOutput& out) {
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const DomainError& e) {
            out.exit_code = exit_config;
            out.diagnostics += "mode n=" + std::to_string(i + 1) + " (a_n=" + fmt(modes[i]) + "): " + e.what() + "\n";
        } catch (const NumericalError& e) {
            out.exit_code = exit_numerical;
            out.diagnostics += "mode n=" + std::to_string(i + 1) + " (a_n=" + fmt(modes[i]) +
                               ") failed: " + e.what() + "\n";
        }
        out.text.clear();
        return;
    }
}

struct CheckRow {
    std::string check;
    bool pass = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string status_override; // e.g. "skipped", "flagged"
};

inline std::string check_line(const std::string& n, const std::string& a, const CheckRow& row) {
    const std::string status = row.status_override.empty() ? (row.pass ? "pass" : "fail") : row.status_override;
    return n + "," + a + "," + row.check + "," + status + "," + fmt(row.measured) + "," + fmt(row.threshold) + "\n";
}

// Relative deviation of sum/product of zeros from the expanded polynomial's
// coefficients: sum = -sum gamma, product = (-1)^N a^2 prod gamma (1 - S w).
inline std::pair<double, double> vieta_defects(const ModePencil<ExponentialKernel>& p, const SpectrumResult& s) {
    const auto g = p.kernel().rates();
    gpspectra::detail::CompensatedSum sum_gamma;
    for (double x : g) sum_gamma.add(x);
    gpspectra::detail::CompensatedSum sum_roots;
    for (const auto& r : s.real_roots) sum_roots.add(r.value);
    sum_roots.add(2.0 * s.plus.real());
    const double sum_defect = std::abs(sum_roots.value() + sum_gamma.value()) / sum_gamma.value();

    // Products compared through logarithms to stay in range.
    double log_roots = 2.0 * std::log(std::abs(s.plus));
    int sign_roots = 1;
    for (const auto& r : s.real_roots) {
        log_roots += std::log(std::abs(r.value));
        if (r.value < 0.0) sign_roots = -sign_roots;
    }
    const double a = p.frequency();
    const double factor = 1.0 - p.kernel().weighted_sum() * p.weight();
    double log_expected = 2.0 * std::log(a) + std::log(std::abs(factor));
    for (double x : g) log_expected += std::log(x);
    int sign_expected = (g.size() % 2 == 0) ? 1 : -1;
    if (factor < 0.0) sign_expected = -sign_expected;
    const double product_defect =
        sign_roots == sign_expected ? std::abs(std::expm1(log_roots - log_expected)) : 2.0;
    return {sum_defect, product_defect};
}

} // namespace detail

inline JobOutput run_spectrum(const JobConfig& cfg, unsigned jobs = 1) {
    JobOutput out;
    const ExponentialKernel kernel = cfg.exponential_kernel();
    std::vector<std::string> blocks(cfg.modes.size());
    const auto errors = detail::parallel_for(cfg.modes.size(), jobs, [&](std::size_t i) {
        const double a = cfg.modes[i];
        const ModePencil<ExponentialKernel> p(a, cfg.xi, kernel);
        SpectrumOptions opt;
        opt.branches = cfg.branches;
        opt.residual_tol = cfg.residual_tol;
        opt.certify = false;
        const SpectrumResult s = compute_spectrum(p, opt);
        std::string rows;
        const std::string prefix = std::to_string(i + 1) + "," + fmt(a) + "," + fmt(cfg.xi) + ",";
        for (const auto& r : s.real_roots) {
            rows += prefix + "real_" + std::to_string(r.index) + "," + std::to_string(r.index) + "," + fmt(r.value) +
                    ",0," + fmt(r.residual) + "," + fmt(r.interval.lo) + "," + fmt(r.interval.hi) + "\n";
        }
        rows += prefix + "pair,," + fmt(s.plus.real()) + "," + fmt(s.plus.imag()) + "," + fmt(s.pair_residual) + ",,\n";
        blocks[i] = std::move(rows);
    });
    out.text = header(cfg) + "n,a_n,xi,kind,k,re,im,residual,interval_lo,interval_hi\n";
    for (const auto& b : blocks) out.text += b;
    detail::rethrow_first(errors, cfg.modes, out);
    return out;
}

inline JobOutput run_verify(const JobConfig& cfg, unsigned jobs = 1) {
    JobOutput out;
    const ExponentialKernel kernel = cfg.exponential_kernel();
    const AdmissibilityReport report = admissibility_report(kernel);
    std::string text = header(cfg) + "n,a_n,check,status,measured,threshold\n";
    bool all_pass = report.admissible;
    text += detail::check_line("", "", {"admissibility", report.admissible, report.weighted_sum, 1.0, ""});

    std::vector<std::vector<detail::CheckRow>> rows(cfg.modes.size());
    std::vector<std::string> failures(cfg.modes.size());
    const auto errors = detail::parallel_for(cfg.modes.size(), jobs, [&](std::size_t i) {
        const double a = cfg.modes[i];
        const ModePencil<ExponentialKernel> p(a, cfg.xi, kernel);
        const std::size_t n = kernel.size();
        const std::size_t count = cfg.branches == 0 ? n : cfg.branches;
        auto& out_rows = rows[i];
        try {
            // The solve uses the default residual floor; the configured
            // tolerance is applied by the residual checks below.
            const double solve_tol = std::max(cfg.residual_tol, 1e-10);
            SpectrumResult s;
            RootOptions ro;
            ro.residual_tol = solve_tol;
            ro.enforce_residual = false;
            s.real_roots = real_roots(p, count, ro);
            s.f_roots = f_roots(p, count, ro);
            s.fixed_point = fixed_point_pair(p);
            NewtonOptions no;
            no.residual_tol = solve_tol;
            const RefinedRoot refined = newton_refine(p, s.fixed_point.plus, no);
            s.plus = refined.value;
            s.minus = std::conj(refined.value);
            s.pair_residual = refined.residual;

            double worst_real = 0.0;
            for (const auto& r : s.real_roots) {
                worst_real = std::max(worst_real, r.residual / std::max(a * a, r.value * r.value));
            }
            out_rows.push_back({"residual_real", worst_real <= cfg.residual_tol, worst_real, cfg.residual_tol, ""});
            const double pair_rel = s.pair_residual / std::max(a * a, std::norm(s.plus));
            out_rows.push_back({"residual_pair", pair_rel <= cfg.residual_tol, pair_rel, cfg.residual_tol, ""});

            const double margin = interlacing_margin(s.real_roots, s.f_roots);
            out_rows.push_back({"interlacing", margin > 0.0, margin, 0.0, ""});

            const RefinedRoot conj_root = newton_refine(p, std::conj(s.fixed_point.plus), no);
            const double conj_dev = std::abs(conj_root.value - s.minus) / std::abs(s.plus);
            out_rows.push_back({"conjugacy", conj_dev <= 1e-12, conj_dev, 1e-12, ""});

            if (count == n) {
                const auto [sum_defect, product_defect] = detail::vieta_defects(p, s);
                out_rows.push_back({"vieta_sum", sum_defect <= 1e-12, sum_defect, 1e-12, ""});
                out_rows.push_back({"vieta_product", product_defect <= 1e-10, product_defect, 1e-10, ""});
                const CountCertificate cert = count_zeros(p, certification_contour(p, n));
                out_rows.push_back({"contour_count", cert.zeros_inferred == static_cast<int>(n + 2),
                                    static_cast<double>(cert.zeros_inferred), static_cast<double>(n + 2), ""});
                out_rows.push_back({"contour_defect", cert.max_quadrature_defect < 0.25, cert.max_quadrature_defect,
                                    0.25, ""});
                if (n <= poly_max) {
                    const AberthResult oracle = oracle_roots(p);
                    const double dev = match_roots(s.zeros(), oracle.roots).max_deviation;
                    out_rows.push_back({"oracle_match", dev < 1e-8, dev, 1e-8, ""});
                }
            }
        } catch (const NumericalError& e) {
            out_rows.push_back({"solve", false, std::nan(""), std::nan(""), ""});
            failures[i] = e.what();
        }
    });
    detail::rethrow_first(errors, cfg.modes, out);
    if (out.exit_code != exit_ok) return out;

    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (const auto& row : rows[i]) {
            all_pass = all_pass && (row.pass || !row.status_override.empty());
            text += detail::check_line(std::to_string(i + 1), fmt(cfg.modes[i]), row);
        }
        if (!failures[i].empty()) {
            out.diagnostics += "mode n=" + std::to_string(i + 1) + " (a_n=" + fmt(cfg.modes[i]) + "): " + failures[i] + "\n";
        }
    }
    if (!report.admissible) {
        out.diagnostics += "kernel is not admissible: S = " + fmt(report.weighted_sum) + " >= 1\n";
    }
    out.text = std::move(text);
    out.exit_code = all_pass ? exit_ok : exit_verify_failed;
    return out;
}

namespace detail {

struct PairPoint {
    Complex value;
    double residual = 0.0;
};

template <class Kernel>
PairPoint solve_pair(const ModePencil<Kernel>& p, double residual_tol) {
    const FixedPointResult fp = fixed_point_pair(p);
    NewtonOptions no;
    no.residual_tol = residual_tol;
    const RefinedRoot r = newton_refine(p, fp.plus, no);
    return {r.value, r.residual};
}

inline std::string fit_footer(const std::string& name, const std::vector<std::pair<double, double>>& pts) {
    const OrderFit fit = empirical_order(pts);
    if (fit.below_floor) return "# fit," + name + ",below_floor,," + std::to_string(fit.points) + "\n";
    return "# fit," + name + "," + fmt(fit.slope) + "," + fmt(fit.half_width) + "," + std::to_string(fit.points) + "\n";
}

} // namespace detail

inline JobOutput run_sweep(const JobConfig& cfg, unsigned jobs = 1) {
    JobOutput out;
    const std::size_t m = cfg.modes.size();
    std::vector<detail::PairPoint> numeric(m);
    std::vector<AsymptoticPrediction> predicted(m);
    Regime regime = Regime::tends_to_axis;

    std::optional<ExponentialKernel> exp_kernel;
    std::optional<PowerLawKernel> tail_kernel;
    if (cfg.power_law && cfg.power_law->tail_correction) {
        tail_kernel.emplace(cfg.power_law->family, std::min(1e-12, cfg.quadrature_tol));
    } else {
        exp_kernel.emplace(cfg.exponential_kernel());
    }
    if (cfg.power_law) {
        regime = classify_regime(cfg.xi, cfg.power_law->family.exponent_r());
    } else {
        // Finite sums behave like Khat ~ S1/z, the r = 1 case.
        regime = classify_regime(cfg.xi, 1.0);
    }
    const auto errors = detail::parallel_for(m, jobs, [&](std::size_t i) {
        const double a = cfg.modes[i];
        if (tail_kernel) {
            numeric[i] = detail::solve_pair(ModePencil<PowerLawKernel>(a, cfg.xi, *tail_kernel), cfg.residual_tol);
        } else {
            numeric[i] = detail::solve_pair(ModePencil<ExponentialKernel>(a, cfg.xi, *exp_kernel), cfg.residual_tol);
        }
        predicted[i] = cfg.power_law ? predict_power_law(a, cfg.xi, cfg.power_law->family)
                                     : predict_finite_sum(a, cfg.xi, exp_kernel->coefficient_sum());
    });
    detail::rethrow_first(errors, cfg.modes, out);
    if (out.exit_code != exit_ok) return out;

    std::string text = header(cfg) + "n,a_n,xi,re,im,pred_re,pred_im,err_re,err_im,residual,tag,regime\n";
    std::vector<std::pair<double, double>> err_re;
    std::vector<std::pair<double, double>> err_im;
    std::vector<std::pair<double, double>> abs_re;
    for (std::size_t i = 0; i < m; ++i) {
        const double a = cfg.modes[i];
        const Complex z = numeric[i].value;
        const Complex q = predicted[i].value;
        const double er = std::abs(z.real() - q.real());
        const double ei = std::abs(z.imag() - q.imag());
        err_re.emplace_back(a, er);
        err_im.emplace_back(a, ei);
        abs_re.emplace_back(a, std::abs(z.real()));
        text += std::to_string(i + 1) + "," + fmt(a) + "," + fmt(cfg.xi) + "," + fmt(z.real()) + "," + fmt(z.imag()) +
                "," + fmt(q.real()) + "," + fmt(q.imag()) + "," + fmt(er) + "," + fmt(ei) + "," +
                fmt(numeric[i].residual) + "," + std::string(to_string(predicted[i].tag)) + "," +
                std::string(to_string(regime)) + "\n";
    }
    text += "# fit,quantity,slope,half_width,points\n";
    text += detail::fit_footer("err_re", err_re);
    text += detail::fit_footer("err_im", err_im);
    text += detail::fit_footer("abs_re", abs_re);
    out.text = std::move(text);
    return out;
}

inline JobOutput run_asymptote(const JobConfig& cfg, unsigned jobs = 1) {
    JobOutput out;
    const std::size_t m = cfg.modes.size();
    std::vector<AsymptoticPrediction> predicted(m);
    std::vector<std::optional<double>> khat_error(m);
    std::optional<ExponentialKernel> exp_kernel;
    std::optional<PowerLawKernel> tail_kernel;
    if (cfg.power_law && cfg.power_law->tail_correction) {
        tail_kernel.emplace(cfg.power_law->family, std::min(1e-12, cfg.quadrature_tol));
    } else {
        exp_kernel.emplace(cfg.exponential_kernel());
    }
    const Regime regime = classify_regime(cfg.xi, cfg.power_law ? cfg.power_law->family.exponent_r() : 1.0);
    const auto errors = detail::parallel_for(m, jobs, [&](std::size_t i) {
        const double a = cfg.modes[i];
        if (!cfg.power_law) {
            predicted[i] = predict_finite_sum(a, cfg.xi, exp_kernel->coefficient_sum());
            return;
        }
        predicted[i] = predict_power_law(a, cfg.xi, cfg.power_law->family);
        const Complex z(0.0, a);
        ApproxOptions ao;
        ao.quadrature_tol = cfg.quadrature_tol;
        const Complex lead = khat_asymptotic(cfg.power_law->family, z, ao).value;
        const Complex exact = tail_kernel ? laplace(*tail_kernel, z) : laplace(*exp_kernel, z);
        khat_error[i] = std::abs(lead - exact) / std::abs(exact);
    });
    detail::rethrow_first(errors, cfg.modes, out);
    if (out.exit_code != exit_ok) return out;

    std::string text = header(cfg);
    if (cfg.power_law) {
        const double r = cfg.power_law->family.exponent_r();
        text += "# exponent-r: " + fmt(r) + "\n";
        if (r < 1.0) {
            const Complex d = constant_D(r);
            text += "# constant-D: " + fmt(d.real()) + "," + fmt(d.imag()) + "\n";
        }
    }
    text += "n,a_n,xi,pred_re,pred_im,order_re,order_im,tag,regime,khat_rel_error\n";
    for (std::size_t i = 0; i < m; ++i) {
        const auto& q = predicted[i];
        text += std::to_string(i + 1) + "," + fmt(cfg.modes[i]) + "," + fmt(cfg.xi) + "," + fmt(q.value.real()) + "," +
                fmt(q.value.imag()) + "," + fmt(q.remainder_order) + "," + fmt(q.remainder_order_imag) + "," +
                std::string(to_string(q.tag)) + "," + std::string(to_string(regime)) + "," +
                (khat_error[i] ? fmt(*khat_error[i]) : std::string()) + "\n";
    }
    out.text = std::move(text);
    return out;
}

inline JobOutput run_oracle_check(const JobConfig& cfg, unsigned jobs = 1) {
    JobOutput out;
    const ExponentialKernel kernel = cfg.exponential_kernel();
    const std::size_t n = kernel.size();
    std::vector<std::vector<detail::CheckRow>> rows(cfg.modes.size());
    std::vector<std::string> notes(cfg.modes.size());
    const auto errors = detail::parallel_for(cfg.modes.size(), jobs, [&](std::size_t i) {
        const double a = cfg.modes[i];
        const ModePencil<ExponentialKernel> p(a, cfg.xi, kernel);
        auto& out_rows = rows[i];
        SpectrumOptions opt;
        opt.residual_tol = cfg.residual_tol;
        opt.certify = false;
        const SpectrumResult s = compute_spectrum(p, opt);
        const auto poly = to_polynomial<quad_real>(p);
        const AberthResult oracle = aberth_roots(poly);
        const double dev = match_roots(s.zeros(), oracle.roots).max_deviation;
        out_rows.push_back({"oracle_match", dev < 1e-8, dev, 1e-8, ""});

        if (n <= ode_max) {
            const ModeSystem sys = build_mode_system(p);
            gpspectra::detail::CompensatedSum sum_gamma;
            for (double g : kernel.rates()) sum_gamma.add(g);
            const double trace_dev = std::abs(sys.trace() + sum_gamma.value()) / sum_gamma.value();
            out_rows.push_back({"trace", trace_dev <= 1e-12, trace_dev, 1e-12, ""});
            if (n <= 8) {
                const auto charpoly = characteristic_polynomial<quad_real>(sys);
                double coeff_dev = 0.0;
                for (std::size_t k = 0; k < poly.size(); ++k) {
                    const quad_real diff = abs(charpoly[k] - poly[k]);
                    const quad_real ref = abs(poly[k]);
                    const double rel = ref > 0 ? static_cast<double>(diff / ref) : static_cast<double>(diff);
                    coeff_dev = std::max(coeff_dev, rel);
                }
                out_rows.push_back({"charpoly_match", coeff_dev <= 1e-12, coeff_dev, 1e-12, ""});
                const AberthResult eig = aberth_roots(charpoly);
                const double eig_dev = match_roots(eig.roots, oracle.roots).max_deviation;
                out_rows.push_back({"system_eigen_match", eig_dev < 1e-8, eig_dev, 1e-8, ""});
            } else {
                out_rows.push_back({"charpoly_match", true, 0.0, 1e-12, "skipped"});
            }
            if (cfg.simulation) {
                const DecayEstimate est = simulate_decay(p, cfg.simulation->horizon, cfg.simulation->step);
                const double abscissa = spectral_abscissa(oracle.roots);
                const double rel = std::abs(est.rate - abscissa) / std::max(std::abs(abscissa), 1e-300);
                detail::CheckRow row{"decay_rate", rel <= 0.05, rel, 0.05, ""};
                if (est.monotone_fallback || est.beats_suspected) {
                    row.status_override = row.pass ? "flagged" : "";
                    notes[i] = est.monotone_fallback ? "decay fit used the monotone fallback (real root dominates)"
                                                     : "decay envelope shows beats";
                }
                out_rows.push_back(row);
            }
        } else {
            out_rows.push_back({"trace", true, 0.0, 1e-12, "skipped"});
        }
    });
    detail::rethrow_first(errors, cfg.modes, out);
    if (out.exit_code != exit_ok) return out;

    std::string text = header(cfg) + "n,a_n,check,status,measured,threshold\n";
    bool all_pass = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (const auto& row : rows[i]) {
            all_pass = all_pass && (row.pass || !row.status_override.empty());
            text += detail::check_line(std::to_string(i + 1), fmt(cfg.modes[i]), row);
        }
        if (!notes[i].empty()) {
            out.diagnostics += "mode n=" + std::to_string(i + 1) + " (a_n=" + fmt(cfg.modes[i]) + "): " + notes[i] + "\n";
        }
    }
    out.text = std::move(text);
    out.exit_code = all_pass ? exit_ok : exit_verify_failed;
    return out;
}

inline JobOutput run_job(const JobConfig& cfg, unsigned jobs = 1) {
    switch (cfg.job) {
    case JobKind::spectrum: return run_spectrum(cfg, jobs);
    case JobKind::verify: return run_verify(cfg, jobs);
    case JobKind::sweep: return run_sweep(cfg, jobs);
    case JobKind::oracle_check: return run_oracle_check(cfg, jobs);
    case JobKind::asymptote: return run_asymptote(cfg, jobs);
    }
    return {};
}

} // namespace gpspectra::cli
