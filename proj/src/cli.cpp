#include "bioconv/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bioconv/config.hpp"
#include "bioconv/io.hpp"
#include "bioconv/verify.hpp"

namespace bioconv {

namespace {

using nlohmann::json;

json envelope(const std::string& command, int code, json report) {
    return {{"command", command}, {"exit_code", code}, {"report", std::move(report)}};
}

std::vector<std::string> failed_checks(const std::vector<HypothesisCheck>& checks) {
    std::vector<std::string> out;
    for (const auto& c : checks)
        if (!c.satisfied) out.push_back(c.name);
    return out;
}

std::string joined(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
    return s;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + p.string() + "' for writing");
    f << text << "\n";
}

std::vector<int> parse_grids(const std::vector<std::string>& items) {
    std::vector<int> grids;
    for (const auto& item : items) {
        std::stringstream ss(item);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok.empty()) continue;
            std::size_t used = 0;
            int n = 0;
            try {
                n = std::stoi(tok, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != tok.size() || n < 4) throw std::invalid_argument("invalid grid size '" + tok + "'");
            grids.push_back(n);
        }
    }
    return grids;
}

struct Options {
    bool json_out = false;
    bool strict = false;
    int jobs = 1;
    std::string config;
    std::string fields;
    std::string output;
    std::string mms_case;
    std::vector<std::string> grids;
    bool csv = false;
};

int cmd_certify(const Options& o, std::ostream& out) {
    const RunConfig cfg = load_config(o.config);
    const Certificate cert = make_certificate(cfg);
    const auto failed = failed_checks(cert.existence_checks);
    const int code = failed.empty() ? kExitOk : kExitCertificate;
    if (o.json_out) {
        json rep = json::parse(certificate_to_json(cert));
        rep["failed_existence_checks"] = failed;
        out << envelope("certify", code, rep).dump(2) << "\n";
    } else {
        out << certificate_to_text(cert);
        if (!failed.empty()) out << "existence FAILED: " << joined(failed) << "\n";
    }
    return code;
}

int cmd_solve(const Options& o, std::ostream& out, std::ostream& err) {
    RunConfig cfg = load_config(o.config);
    if (o.strict) cfg.solver.strict = true;
    const std::filesystem::path dir = o.output.empty() ? cfg.output_directory : o.output;
    const ProblemData data = make_problem(cfg);
    const Certificate cert = make_certificate(cfg);
    PicardOptions opts = make_picard_options(cfg);
    opts.certificate = &cert;

    SolveOutcome outcome{FieldState(data.grid), {}, {}};
    try {
        outcome = solve_stationary(FieldState(data.grid, cfg.alpha1, cfg.alpha2), data, opts);
    } catch (const CertificateFailure& e) {
        if (o.json_out)
            out << envelope("solve", kExitCertificate, {{"error", e.what()}}).dump(2) << "\n";
        err << "solve: " << e.what() << "\n";
        return kExitCertificate;
    } catch (const PicardDivergence& e) {
        if (o.json_out) {
            json rep = json::parse(solve_report_to_json(SolveReport{}, e.history()));
            rep["error"] = e.what();
            out << envelope("solve", kExitDivergence, rep).dump(2) << "\n";
        }
        err << "solve: " << e.what() << "\n";
        return kExitDivergence;
    }

    std::filesystem::create_directories(dir);
    const auto base = (dir / cfg.output_prefix).string();
    const auto paths = write_fields(outcome.state, base);
    const std::string report_json = solve_report_to_json(outcome.report, outcome.history);
    write_text(base + "_report.json", report_json);
    const int code = outcome.report.converged ? kExitOk : kExitDivergence;

    if (o.json_out) {
        json rep = json::parse(report_json);
        rep["files"] = {{"vtk", paths.first}, {"sidecar", paths.second}, {"report", base + "_report.json"}};
        out << envelope("solve", code, rep).dump(2) << "\n";
    } else {
        const SolveReport& r = outcome.report;
        out << "converged = " << (r.converged ? "true" : "false") << "\n";
        out << "iterations = " << r.iterations << "\n";
        out << "final_increment = " << r.final_increment << "\n";
        out << "norms.u_v = " << r.norms.u_v << "\n";
        out << "norms.n_hat_h1 = " << r.norms.n_h1 << "\n";
        out << "norms.c_hat_h1 = " << r.norms.c_h1 << "\n";
        out << "contraction_ratio = " << r.contraction_ratio << "\n";
        if (r.pi_value) out << "pi = " << *r.pi_value << "\n";
        out << "flux_residual = " << r.flux_residual << "\n";
        for (const auto& w : r.warnings) out << "warning: " << w << "\n";
        out << "wrote " << paths.first << ", " << paths.second << ", " << base << "_report.json\n";
    }
    return code;
}

int cmd_verify(const Options& o, std::ostream& out) {
    const RunConfig cfg = load_config(o.config);
    const FieldState state = read_fields(o.fields);
    const ProblemData data = make_problem(cfg);
    if (!(state.grid() == data.grid)) throw GridMismatch("verify: fields and config");
    const Certificate cert = make_certificate(cfg);
    const AprioriAudit audit = audit_apriori(state, cert);
    const FluxAudit flux = flux_audit(state, data);
    const double residual = coupled_residual(state, data);
    const int code = audit.all_pass() ? kExitOk : kExitCertificate;
    if (o.json_out) {
        const auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
        json rep;
        rep["apriori"] = json::parse(audit.to_json());
        rep["flux"] = {{"bacteria_flux", num(flux.bacteria_flux)},
                       {"divergence", num(flux.divergence)},
                       {"mean_n_hat", num(flux.mean_n_hat)},
                       {"mean_c_hat", num(flux.mean_c_hat)}};
        rep["coupled_residual"] = num(residual);
        rep["pass"] = audit.all_pass();
        out << envelope("verify", code, rep).dump(2) << "\n";
    } else {
        out << audit.to_text();
        out << "flux.bacteria_flux = " << flux.bacteria_flux << "\n";
        out << "flux.divergence = " << flux.divergence << "\n";
        out << "flux.mean_n_hat = " << flux.mean_n_hat << "\n";
        out << "flux.mean_c_hat = " << flux.mean_c_hat << "\n";
        out << "coupled_residual = " << residual << "\n";
        out << "apriori = " << (audit.all_pass() ? "pass" : "FAIL") << "\n";
    }
    return code;
}

int cmd_mms(const Options& o, std::ostream& out) {
    const std::vector<int> grids = parse_grids(o.grids);
    PicardOptions opts;
    opts.tolerance = 1e-12;
    const ConvergenceTable t = convergence_study(o.mms_case, grids, opts, o.jobs);
    if (o.json_out)
        out << envelope("mms", kExitOk, json::parse(t.to_json())).dump(2) << "\n";
    else
        out << (o.csv ? t.to_csv() : t.to_text());
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Stationary bioconvection solver with solvability certificates", "bioconv"};
    app.require_subcommand(1);
    app.add_flag("--json", o.json_out, "Print reports as JSON");
    app.add_option("--jobs", o.jobs, "Parallel grid solves for mms")->check(CLI::Range(1, 256));

    auto* certify = app.add_subcommand("certify", "Evaluate the solvability certificate of a config");
    certify->add_option("config", o.config, "Config file")->required();

    auto* solve = app.add_subcommand("solve", "Solve the stationary problem and write fields and report");
    solve->add_option("config", o.config, "Config file")->required();
    solve->add_flag("--strict", o.strict, "Refuse to solve when existence checks fail");
    solve->add_option("-o,--output", o.output, "Output directory (overrides the config)");

    auto* verify = app.add_subcommand("verify", "Audit stored fields against the certificate bounds");
    verify->add_option("config", o.config, "Config file")->required();
    verify->add_option("fields", o.fields, "Sidecar (.bioc) file")->required();

    auto* mms = app.add_subcommand("mms", "Manufactured-solution convergence table");
    mms->add_option("case", o.mms_case, "Case name (rest | stratified)")->required();
    mms->add_option("grids", o.grids, "Cells per edge, e.g. 8,16,32 or 8 16 32")->required();
    mms->add_flag("--csv", o.csv, "CSV instead of the text table");

    for (auto* sub : {certify, solve, verify, mms}) {
        sub->add_flag("--json", o.json_out, "Print reports as JSON");
        sub->add_option("--jobs", o.jobs, "Parallel grid solves for mms")->check(CLI::Range(1, 256));
    }

    if (argc <= 1) {
        err << app.help();
        return kExitUsage;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "bioconv: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (*certify) return cmd_certify(o, out);
        if (*solve) return cmd_solve(o, out, err);
        if (*verify) return cmd_verify(o, out);
        if (*mms) return cmd_mms(o, out);
    } catch (const ConfigError& e) {
        err << "bioconv: config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const FormatError& e) {
        err << "bioconv: fields error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const PicardDivergence& e) {
        err << "bioconv: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const std::exception& e) {
        err << "bioconv: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace bioconv
