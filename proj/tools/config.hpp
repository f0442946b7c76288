#pragma once

// Job configuration: strict JSON schema, defaults, and the echoed
// effective-config block.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gpspectra/gpspectra.hpp"

namespace gpspectra::cli {

using json = nlohmann::json;

/// Schema violation, carrying a JSON-pointer style location.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(const std::string& path, const std::string& message)
        : std::runtime_error("config error at " + (path.empty() ? std::string("/") : path) + ": " + message),
          path_(path) {}
    const std::string& path() const { return path_; }

  private:
    std::string path_;
};

enum class JobKind { spectrum, verify, sweep, oracle_check, asymptote };

inline std::string_view to_string(JobKind kind) {
    switch (kind) {
    case JobKind::spectrum: return "spectrum";
    case JobKind::verify: return "verify";
    case JobKind::sweep: return "sweep";
    case JobKind::oracle_check: return "oracle-check";
    case JobKind::asymptote: return "asymptote";
    }
    return "unknown";
}

inline std::optional<JobKind> parse_job_kind(std::string_view name) {
    if (name == "spectrum") return JobKind::spectrum;
    if (name == "verify") return JobKind::verify;
    if (name == "sweep") return JobKind::sweep;
    if (name == "oracle-check") return JobKind::oracle_check;
    if (name == "asymptote") return JobKind::asymptote;
    return std::nullopt;
}

struct ExplicitKernelSpec {
    std::vector<double> coeffs;
    std::vector<double> rates;
};

struct PowerLawSpec {
    PowerLawFamily family;
    bool tail_correction = false;
};

struct SimulationSpec {
    double horizon = 0.0;
    double step = 0.0;
};

struct JobConfig {
    JobKind job = JobKind::spectrum;
    std::optional<ExplicitKernelSpec> explicit_kernel;
    std::optional<PowerLawSpec> power_law;
    double xi = 0.5;
    std::vector<double> modes;
    std::size_t branches = 0; // 0: all
    double residual_tol = 1e-10;
    double quadrature_tol = 1e-10;
    std::optional<SimulationSpec> simulation;
    std::optional<std::string> output;
    json effective; // normalized document with defaults filled in

    /// The exponential ladder used by root finding (materialized if power-law).
    ExponentialKernel exponential_kernel() const {
        if (explicit_kernel) return ExponentialKernel(explicit_kernel->coeffs, explicit_kernel->rates);
        return materialize(power_law->family);
    }
};

namespace detail {

inline void reject_unknown(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (auto a : allowed) ok = ok || it.key() == a;
        if (!ok) throw ConfigError(path + "/" + it.key(), "unknown key");
    }
}

inline const json& require_object(const json& doc, const std::string& path) {
    if (!doc.is_object()) throw ConfigError(path, "expected an object");
    return doc;
}

inline double number_at(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path, "expected a finite number");
    return x;
}

inline double positive_at(const json& v, const std::string& path) {
    const double x = number_at(v, path);
    if (!(x > 0.0)) throw ConfigError(path, "must be positive");
    return x;
}

inline std::size_t count_at(const json& v, const std::string& path) {
    if (!v.is_number_integer() && !v.is_number_unsigned()) throw ConfigError(path, "expected a non-negative integer");
    const auto x = v.get<long long>();
    if (x < 0) throw ConfigError(path, "expected a non-negative integer");
    return static_cast<std::size_t>(x);
}

inline std::vector<double> positive_list(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(positive_at(v[i], path + "/" + std::to_string(i)));
    return out;
}

} // namespace detail

/// Parses and validates a job document. `subcommand`, when given, must agree
/// with an explicit "job" key and becomes the job kind otherwise.
inline JobConfig parse_config(std::string_view text, std::optional<JobKind> subcommand = std::nullopt) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("invalid JSON: ") + e.what());
    }
    detail::require_object(doc, "");
    detail::reject_unknown(doc, "",
                           {"job", "kernel", "xi", "modes", "branches", "tolerances", "simulation", "output"});

    JobConfig cfg;
    json eff = json::object();

    // job
    if (doc.contains("job")) {
        if (!doc["job"].is_string()) throw ConfigError("/job", "expected a string");
        const auto kind = parse_job_kind(doc["job"].get<std::string>());
        if (!kind) throw ConfigError("/job", "unknown job kind '" + doc["job"].get<std::string>() + "'");
        if (subcommand && *subcommand != *kind) {
            throw ConfigError("/job", "job '" + std::string(to_string(*kind)) + "' does not match subcommand '" +
                                          std::string(to_string(*subcommand)) + "'");
        }
        cfg.job = *kind;
    } else if (subcommand) {
        cfg.job = *subcommand;
    } else {
        throw ConfigError("/job", "missing job kind");
    }
    eff["job"] = std::string(to_string(cfg.job));

    // kernel
    if (!doc.contains("kernel")) throw ConfigError("/kernel", "missing kernel");
    const json& kernel = detail::require_object(doc["kernel"], "/kernel");
    const bool has_explicit = kernel.contains("coeffs") || kernel.contains("rates");
    const bool has_family = kernel.contains("power_law");
    if (has_explicit == has_family) {
        throw ConfigError("/kernel", "give exactly one of {coeffs, rates} or power_law");
    }
    if (has_explicit) {
        detail::reject_unknown(kernel, "/kernel", {"coeffs", "rates"});
        if (!kernel.contains("coeffs")) throw ConfigError("/kernel/coeffs", "missing");
        if (!kernel.contains("rates")) throw ConfigError("/kernel/rates", "missing");
        ExplicitKernelSpec spec;
        spec.coeffs = detail::positive_list(kernel["coeffs"], "/kernel/coeffs");
        spec.rates = detail::positive_list(kernel["rates"], "/kernel/rates");
        try {
            (void)ExponentialKernel(spec.coeffs, spec.rates);
        } catch (const DomainError& e) {
            throw ConfigError("/kernel", e.what());
        }
        eff["kernel"] = {{"coeffs", spec.coeffs}, {"rates", spec.rates}};
        cfg.explicit_kernel = std::move(spec);
    } else {
        detail::reject_unknown(kernel, "/kernel", {"power_law"});
        const json& pl = detail::require_object(kernel["power_law"], "/kernel/power_law");
        detail::reject_unknown(pl, "/kernel/power_law", {"A", "B", "alpha", "beta", "N", "tail_correction"});
        for (const char* key : {"A", "B", "alpha", "beta", "N"}) {
            if (!pl.contains(key)) throw ConfigError(std::string("/kernel/power_law/") + key, "missing");
        }
        PowerLawSpec spec;
        spec.family.amplitude = detail::positive_at(pl["A"], "/kernel/power_law/A");
        spec.family.scale = detail::positive_at(pl["B"], "/kernel/power_law/B");
        spec.family.alpha = detail::positive_at(pl["alpha"], "/kernel/power_law/alpha");
        spec.family.beta = detail::positive_at(pl["beta"], "/kernel/power_law/beta");
        spec.family.terms = detail::count_at(pl["N"], "/kernel/power_law/N");
        if (pl.contains("tail_correction")) {
            if (!pl["tail_correction"].is_boolean()) throw ConfigError("/kernel/power_law/tail_correction", "expected a boolean");
            spec.tail_correction = pl["tail_correction"].get<bool>();
        }
        try {
            spec.family.validate();
        } catch (const DomainError& e) {
            throw ConfigError("/kernel/power_law", e.what());
        }
        if (spec.tail_correction && cfg.job != JobKind::sweep && cfg.job != JobKind::asymptote) {
            throw ConfigError("/kernel/power_law/tail_correction",
                              "the tail-corrected kernel is only available to sweep and asymptote jobs");
        }
        if (spec.family.terms > 200000) throw ConfigError("/kernel/power_law/N", "at most 200000 explicit terms");
        eff["kernel"] = {{"power_law",
                          {{"A", spec.family.amplitude},
                           {"B", spec.family.scale},
                           {"alpha", spec.family.alpha},
                           {"beta", spec.family.beta},
                           {"N", spec.family.terms},
                           {"tail_correction", spec.tail_correction}}}};
        cfg.power_law = spec;
    }

    // xi
    if (!doc.contains("xi")) throw ConfigError("/xi", "missing");
    cfg.xi = detail::number_at(doc["xi"], "/xi");
    if (!(cfg.xi > 0.0 && cfg.xi < 1.0)) throw ConfigError("/xi", "xi must lie strictly inside (0,1)");
    eff["xi"] = cfg.xi;

    // modes
    if (!doc.contains("modes")) throw ConfigError("/modes", "missing");
    const json& modes = detail::require_object(doc["modes"], "/modes");
    if (modes.contains("values") == modes.contains("geometric")) {
        throw ConfigError("/modes", "give exactly one of values or geometric");
    }
    if (modes.contains("values")) {
        detail::reject_unknown(modes, "/modes", {"values"});
        cfg.modes = detail::positive_list(modes["values"], "/modes/values");
        eff["modes"] = {{"values", cfg.modes}};
    } else {
        detail::reject_unknown(modes, "/modes", {"geometric"});
        const json& geo = detail::require_object(modes["geometric"], "/modes/geometric");
        detail::reject_unknown(geo, "/modes/geometric", {"a_min", "factor", "count"});
        for (const char* key : {"a_min", "factor", "count"}) {
            if (!geo.contains(key)) throw ConfigError(std::string("/modes/geometric/") + key, "missing");
        }
        const double a_min = detail::positive_at(geo["a_min"], "/modes/geometric/a_min");
        const double factor = detail::number_at(geo["factor"], "/modes/geometric/factor");
        if (!(factor > 1.0)) throw ConfigError("/modes/geometric/factor", "must exceed 1");
        const std::size_t count = detail::count_at(geo["count"], "/modes/geometric/count");
        for (std::size_t i = 0; i < count; ++i) {
            cfg.modes.push_back(a_min * std::pow(factor, static_cast<double>(i)));
        }
        eff["modes"] = {{"geometric", {{"a_min", a_min}, {"factor", factor}, {"count", count}}}};
    }
    if (cfg.modes.empty()) throw ConfigError("/modes", "mode ladder is empty");
    for (std::size_t i = 0; i < cfg.modes.size(); ++i) {
        if (!std::isfinite(cfg.modes[i])) throw ConfigError("/modes", "mode " + std::to_string(i) + " is not finite");
    }

    // branches
    if (doc.contains("branches")) cfg.branches = detail::count_at(doc["branches"], "/branches");
    const std::size_t terms = cfg.explicit_kernel ? cfg.explicit_kernel->coeffs.size() : cfg.power_law->family.terms;
    if (cfg.branches > terms) {
        throw ConfigError("/branches", "requested " + std::to_string(cfg.branches) + " branches but the kernel has " +
                                           std::to_string(terms) + " terms");
    }
    eff["branches"] = cfg.branches;

    // tolerances
    if (doc.contains("tolerances")) {
        const json& tol = detail::require_object(doc["tolerances"], "/tolerances");
        detail::reject_unknown(tol, "/tolerances", {"residual_tol", "quadrature_tol"});
        if (tol.contains("residual_tol")) cfg.residual_tol = detail::positive_at(tol["residual_tol"], "/tolerances/residual_tol");
        if (tol.contains("quadrature_tol")) {
            cfg.quadrature_tol = detail::positive_at(tol["quadrature_tol"], "/tolerances/quadrature_tol");
        }
    }
    eff["tolerances"] = {{"residual_tol", cfg.residual_tol}, {"quadrature_tol", cfg.quadrature_tol}};

    // simulation
    if (doc.contains("simulation")) {
        const json& sim = detail::require_object(doc["simulation"], "/simulation");
        detail::reject_unknown(sim, "/simulation", {"horizon", "step"});
        for (const char* key : {"horizon", "step"}) {
            if (!sim.contains(key)) throw ConfigError(std::string("/simulation/") + key, "missing");
        }
        SimulationSpec spec{detail::positive_at(sim["horizon"], "/simulation/horizon"),
                            detail::positive_at(sim["step"], "/simulation/step")};
        cfg.simulation = spec;
        eff["simulation"] = {{"horizon", spec.horizon}, {"step", spec.step}};
    }

    // output
    if (doc.contains("output")) {
        if (!doc["output"].is_string()) throw ConfigError("/output", "expected a string");
        cfg.output = doc["output"].get<std::string>();
    }

    // job-specific requirements
    if (cfg.job == JobKind::sweep) {
        if (cfg.modes.size() < 4) throw ConfigError("/modes", "sweep needs at least 4 modes");
        double lo = cfg.modes.front();
        double hi = lo;
        for (double a : cfg.modes) {
            lo = std::min(lo, a);
            hi = std::max(hi, a);
        }
        if (hi / lo < 100.0 * (1.0 - 1e-12)) throw ConfigError("/modes", "sweep modes must span at least two decades");
    }
    if (cfg.simulation && cfg.job != JobKind::oracle_check) {
        throw ConfigError("/simulation", "simulation settings apply to oracle-check only");
    }

    cfg.effective = std::move(eff);
    return cfg;
}

} // namespace gpspectra::cli
