// gpspectra <spectrum|verify|sweep|oracle-check|asymptote> --config <path> [--out <path>] [--jobs <int>]

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "config.hpp"
#include "jobs.hpp"

namespace {

using gpspectra::cli::JobKind;

int run(JobKind kind, const std::string& config_path, std::string out_path, unsigned jobs) {
    using namespace gpspectra::cli;
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
        std::cerr << "gpspectra: cannot read config '" << config_path << "'\n";
        return exit_config;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();

    JobConfig cfg;
    try {
        cfg = parse_config(buffer.str(), kind);
    } catch (const ConfigError& e) {
        std::cerr << "gpspectra: " << e.what() << "\n";
        return exit_config;
    }
    if (out_path.empty() && cfg.output) out_path = *cfg.output;

    JobOutput result;
    try {
        result = run_job(cfg, jobs);
    } catch (const gpspectra::DomainError& e) {
        std::cerr << "gpspectra: " << e.what() << "\n";
        return exit_config;
    } catch (const gpspectra::NumericalError& e) {
        std::cerr << "gpspectra: numerical failure: " << e.what() << "\n";
        return exit_numerical;
    }
    std::cerr << result.diagnostics;
    if (result.exit_code == exit_config || result.exit_code == exit_numerical) return result.exit_code;

    if (out_path.empty()) {
        std::cout << result.text;
        std::cout.flush();
    } else {
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        if (!out) {
            std::cerr << "gpspectra: cannot write '" << out_path << "'\n";
            return exit_config;
        }
        out << result.text;
    }
    return result.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectra of Gurtin-Pipkin mode pencils with exponential-sum memory kernels"};
    app.set_version_flag("--version", std::string(gpspectra::version));
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    unsigned jobs = 1;
    const std::pair<const char*, const char*> commands[] = {
        {"spectrum", "real branches and the complex pair for every mode"},
        {"verify", "interlacing, Vieta, contour-count and oracle checks"},
        {"sweep", "complex pair against its leading asymptotics over a ladder"},
        {"oracle-check", "polynomial, ODE-system and time-domain cross-checks"},
        {"asymptote", "closed-form asymptotic predictions only"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON job description")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_path, "output CSV (default: config 'output' or stdout)");
        sub->add_option("--jobs", jobs, "worker threads for independent modes")->check(CLI::Range(1u, 1024u));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : gpspectra::cli::exit_config;
    }
    const std::string name = app.get_subcommands().front()->get_name();
    return run(*gpspectra::cli::parse_job_kind(name), config_path, out_path, jobs);
}
