#include "pandexit_cli/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pandexit/diagnostics.hpp"
#include "pandexit/oracle.hpp"
#include "pandexit/report_io.hpp"
#include "pandexit/service.hpp"
#include "pandexit/solver.hpp"
#include "pandexit/version.hpp"

namespace pandexit::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Carries an exit code out of a subcommand.
struct Failure {
    int code;
};

void print_errors(std::ostream& err, const std::vector<FieldError>& errors) {
    for (const auto& e : errors) err << "error: " << e.field << ": " << e.message << '\n';
}

json read_document(const std::string& path, std::ostream& err) {
    std::ifstream in(path);
    if (!in) {
        err << "error: cannot read scenario file '" << path << "'\n";
        throw Failure{kIoError};
    }
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return json::parse(buf.str());
    } catch (const json::parse_error& e) {
        err << "error: " << path << " is not valid JSON: " << e.what() << '\n';
        throw Failure{kUsageOrValidation};
    }
}

Scenario validated(const json& doc, std::ostream& err) {
    auto result = validate(doc);
    if (!result.ok()) {
        print_errors(err, result.errors);
        throw Failure{kUsageOrValidation};
    }
    return *result.scenario;
}

void ensure_directory(const std::string& dir, std::ostream& err) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        err << "error: cannot create output directory '" << dir << "'\n";
        throw Failure{kIoError};
    }
}

template <class Writer>
void write_file(const fs::path& path, std::ostream& err, Writer&& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        err << "error: cannot write '" << path.string() << "'\n";
        throw Failure{kIoError};
    }
    writer(out);
    if (!out) {
        err << "error: failed writing '" << path.string() << "'\n";
        throw Failure{kIoError};
    }
}

void write_json(const fs::path& path, const json& value, std::ostream& err) {
    write_file(path, err, [&](std::ostream& out) { out << value.dump(2) << '\n'; });
}

struct SolveArgs {
    std::string scenario;
    std::string out = ".";
    std::optional<double> step;
    std::optional<std::string> convention;
    std::string format = "csv";
};

int do_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
    json doc = read_document(a.scenario, err);
    if (doc.is_object()) {
        if (a.step) doc["numerics"]["step_days"] = *a.step;
        if (a.convention) doc["numerics"]["adjoint_convention"] = *a.convention;
    }
    const Scenario s = validated(doc, err);
    ensure_directory(a.out, err);

    SolveResult result;
    try {
        result = solve(s);
    } catch (const std::exception& e) {
        err << "error: solver failed: " << e.what() << '\n';
        throw Failure{kNotConverged};
    }
    const Diagnostics diag = run_diagnostics(result.trajectory, s);

    const fs::path dir(a.out);
    if (a.format == "json") {
        write_json(dir / "trajectory.json", to_json(result.trajectory), err);
    } else {
        write_file(dir / "trajectory.csv", err,
                   [&](std::ostream& o) { write_trajectory_csv(o, result.trajectory); });
    }
    json report = to_json(result.report);
    report["scenario_digest"] = result.trajectory.scenario_digest;
    write_json(dir / "report.json", report, err);
    write_json(dir / "diagnostics.json", to_json(diag), err);

    out << "J = " << json(result.report.objective).dump() << ", converged = "
        << (result.report.converged ? "true" : "false") << ", iterations = "
        << result.report.iterations << '\n';
    for (const auto& w : result.report.warnings) err << "warning: " << w << '\n';
    return result.report.converged ? kOk : kNotConverged;
}

int do_oracle(const std::string& scenario, int intervals, const std::string& dir,
              std::ostream& out, std::ostream& err) {
    const Scenario s = validated(read_document(scenario, err), err);
    if (intervals < 1) {
        err << "error: --intervals must be at least 1\n";
        return kUsageOrValidation;
    }
    ensure_directory(dir, err);
    const OracleResult r = optimize(s, static_cast<std::size_t>(intervals));
    write_json(fs::path(dir) / "oracle.json", to_json(r), err);
    out << "J = " << json(r.objective).dump() << ", N = " << r.intervals
        << ", converged = " << (r.converged ? "true" : "false") << '\n';
    // The oracle always returns its best feasible control; a stalled line
    // search is reported in oracle.json rather than through the exit code.
    return kOk;
}

int do_verify(const std::string& scenario, std::ostream& out, std::ostream& err) {
    const Scenario s = validated(read_document(scenario, err), err);
    bool all = true;
    for (const auto& suite : run_verification(s)) {
        out << (suite.passed ? "PASS " : "FAIL ") << suite.name << ": " << suite.detail << '\n';
        all = all && suite.passed;
    }
    return all ? kOk : kUsageOrValidation;
}

int do_monitor(const std::string& path, double epsilon, std::ostream& out, std::ostream& err) {
    std::ifstream in(path);
    if (!in) {
        err << "error: cannot read trajectory file '" << path << "'\n";
        return kIoError;
    }
    Trajectory traj;
    try {
        traj = read_trajectory_csv(in);
    } catch (const std::exception& e) {
        err << "error: " << path << ": " << e.what() << '\n';
        return kUsageOrValidation;
    }
    if (!(epsilon >= 0.0)) {
        err << "error: --epsilon must be nonnegative\n";
        return kUsageOrValidation;
    }
    out << to_json(rebound_monitor(traj, epsilon), true).dump(2) << '\n';
    return kOk;
}

int do_serve(const std::string& host, int port, const std::optional<std::string>& static_dir,
             std::ostream& out, std::ostream& err) {
    if (static_dir && !fs::is_directory(*static_dir)) {
        err << "error: static directory '" << *static_dir << "' does not exist\n";
        return kIoError;
    }
    HttpServer server(static_dir);
    const int bound = server.bind(host, port);
    if (bound < 0) {
        err << "error: cannot bind " << host << ":" << port << '\n';
        return kIoError;
    }
    out << "pandexit " << kVersion << " listening on http://" << host << ":" << bound << '\n'
        << std::flush;
    return server.listen() ? kOk : kIoError;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Optimal reopening policies under contagion", "pandexit"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1, 1);

    SolveArgs solve_args;
    auto* solve_cmd = app.add_subcommand("solve", "Solve the optimal control problem");
    solve_cmd->add_option("--scenario", solve_args.scenario, "Scenario JSON file")->required();
    solve_cmd->add_option("--out", solve_args.out, "Output directory");
    solve_cmd->add_option("--step", solve_args.step, "Override numerics.step_days")
        ->check(CLI::PositiveNumber);
    solve_cmd->add_option("--convention", solve_args.convention, "Adjoint sign convention")
        ->check(CLI::IsMember({"textbook", "paper"}));
    solve_cmd->add_option("--format", solve_args.format, "Trajectory format")
        ->check(CLI::IsMember({"csv", "json"}));

    std::string oracle_scenario, oracle_out = ".";
    int intervals = 30;
    auto* oracle_cmd = app.add_subcommand("oracle", "Direct-transcription reference optimum");
    oracle_cmd->add_option("--scenario", oracle_scenario, "Scenario JSON file")->required();
    oracle_cmd->add_option("--intervals", intervals, "Number of control levels N");
    oracle_cmd->add_option("--out", oracle_out, "Output directory");

    std::string verify_scenario;
    auto* verify_cmd = app.add_subcommand("verify", "Run the self-test property suites");
    verify_cmd->add_option("--scenario", verify_scenario, "Scenario JSON file")->required();

    std::string trajectory_path;
    double epsilon = 1e-3;
    auto* monitor_cmd = app.add_subcommand("monitor", "Rebound warning on a trajectory CSV");
    monitor_cmd->add_option("--trajectory", trajectory_path, "Trajectory CSV")->required();
    monitor_cmd->add_option("--epsilon", epsilon, "Rebound threshold, persons/day");

    int port = 8080;
    std::string host = "127.0.0.1";
    std::optional<std::string> static_dir;
    auto* serve_cmd = app.add_subcommand("serve", "Start the JSON API");
    serve_cmd->add_option("--port", port, "TCP port (0 picks a free one)")
        ->check(CLI::Range(0, 65535));
    serve_cmd->add_option("--host", host, "Bind address");
    serve_cmd->add_option("--static", static_dir, "Directory served under /");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsageOrValidation;
    }

    try {
        if (*solve_cmd) return do_solve(solve_args, out, err);
        if (*oracle_cmd) return do_oracle(oracle_scenario, intervals, oracle_out, out, err);
        if (*verify_cmd) return do_verify(verify_scenario, out, err);
        if (*monitor_cmd) return do_monitor(trajectory_path, epsilon, out, err);
        if (*serve_cmd) return do_serve(host, port, static_dir, out, err);
    } catch (const Failure& f) {
        return f.code;
    }
    return kUsageOrValidation;
}

int run(int argc, char** argv) {
    return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace pandexit::cli
