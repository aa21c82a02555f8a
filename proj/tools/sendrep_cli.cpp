// sendrep command line: generate synthetic logs, export HDS tables, run
// filtering simulations, and sweep batch frequency / history length.
//
// Exit codes: 0 success, 2 usage error, 3 data/config error, 4 audit
// violation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sendrep/benchmark.hpp"
#include "sendrep/hds.hpp"
#include "sendrep/metrics.hpp"
#include "sendrep/simulator.hpp"
#include "sendrep/srm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sendrep;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitAudit = 4;

/// One flat bag of experiment parameters; a JSON spec file fills it first,
/// command-line flags override field by field.
struct Params {
    std::string preset = "custom";
    std::string log_path;
    std::string srm = "hds-spam";
    std::string learner = "naive-bayes";
    std::string mode = "continuous";
    uint64_t seed = 1;
    double duration = kWeekMinutes;
    double batch_period = 1.0;
    double w0 = 60.0;
    int windows = 5;
    double pred = 60.0;
    double cadence = 0.0;
    double blt = 0.5;
    double wlt = 0.05;
    double clear_period = 1440.0;
    double heuristic_history = 960.0;
    std::string out = "out";
};

void load_spec(const std::string& path, Params& p) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open spec file: " + path);
    json j = json::parse(in);
    auto get = [&](const char* k, auto& field) {
        if (j.contains(k)) j.at(k).get_to(field);
    };
    get("preset", p.preset);
    get("log", p.log_path);
    get("srm", p.srm);
    get("learner", p.learner);
    get("mode", p.mode);
    get("seed", p.seed);
    get("duration", p.duration);
    get("batch_period", p.batch_period);
    get("w0", p.w0);
    get("windows", p.windows);
    get("pred", p.pred);
    get("cadence", p.cadence);
    get("blt", p.blt);
    get("wlt", p.wlt);
    get("clear_period", p.clear_period);
    get("heuristic_history", p.heuristic_history);
    get("out", p.out);
}

json resolved_spec(const Params& p) {
    return json{{"preset", p.preset},
                {"log", p.log_path},
                {"srm", p.srm},
                {"learner", p.learner},
                {"mode", p.mode},
                {"seed", p.seed},
                {"duration", p.duration},
                {"batch_period", p.batch_period},
                {"w0", p.w0},
                {"windows", p.windows},
                {"pred", p.pred},
                {"cadence", p.cadence},
                {"blt", p.blt},
                {"wlt", p.wlt},
                {"clear_period", p.clear_period},
                {"heuristic_history", p.heuristic_history},
                {"out", p.out}};
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

/// Registers the shared experiment flags on a subcommand, bound to p.
void add_common_flags(CLI::App* cmd, Params& p) {
    cmd->add_option("--spec", "JSON spec file; explicit flags override it")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", p.seed, "master RNG seed");
    cmd->add_option("--out", p.out, "output directory");
    cmd->add_option("--srm", p.srm, "mechanism")
        ->check(CLI::IsMember({"heuristic", "el", "hds-spam", "hds-err"}));
    cmd->add_option("--learner", p.learner, "model family")
        ->check(CLI::IsMember({"naive-bayes", "logistic", "tree"}));
    cmd->add_option("--mode", p.mode, "simulation mode")
        ->check(CLI::IsMember({"continuous", "batch"}));
    cmd->add_option("--batch-period", p.batch_period, "batch period, minutes")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--w0", p.w0, "smallest history window, minutes")->check(CLI::PositiveNumber);
    cmd->add_option("--windows", p.windows, "number of history windows")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--pred", p.pred, "prediction window, minutes")->check(CLI::PositiveNumber);
    cmd->add_option("--cadence", p.cadence, "record grid step, minutes (0 = w0)");
    cmd->add_option("--blt", p.blt, "blacklisting threshold");
    cmd->add_option("--wlt", p.wlt, "whitelisting threshold");
    cmd->add_option("--clear-period", p.clear_period, "minutes between list clearings (0 = never)");
    cmd->add_option("--log", p.log_path, "input email log CSV (default: synthesize)");
}

ExperimentConfig to_experiment(const Params& p) {
    ExperimentConfig cfg;
    cfg.srm = srm_from_string(p.srm);
    cfg.learner = learner_from_string(p.learner);
    cfg.hds = HdsConfig{p.w0, p.windows, p.pred, p.cadence == 0.0 ? p.w0 : p.cadence};
    cfg.heuristic_history = p.heuristic_history;
    cfg.mode = p.mode == "batch" ? SimMode::batch : SimMode::continuous;
    cfg.batch_period = p.batch_period;
    cfg.thresholds = Thresholds{p.blt, p.wlt, 0.5};
    cfg.clear_period = p.clear_period;
    cfg.split_seed = p.seed;
    return cfg;
}

EmailLog load_or_synthesize(const Params& p) {
    if (!p.log_path.empty()) return parse_log(p.log_path);
    return standard_benchmark_log(p.seed).log;
}

int cmd_generate(const Params& p) {
    fs::create_directories(p.out);
    auto res = synthesize_log(default_mix(), p.duration, p.seed);
    write_log(res.log, (fs::path(p.out) / "log.csv").string());
    write_truth(res.truth, (fs::path(p.out) / "truth.csv").string());
    double spam = 0;
    for (const auto& r : res.log.records) spam += r.spam_class;
    json manifest = resolved_spec(p);
    manifest["emails"] = res.log.records.size();
    manifest["ips"] = res.log.distinct_ips().size();
    manifest["spam_fraction"] = res.log.records.empty() ? 0.0 : spam / res.log.records.size();
    write_json(fs::path(p.out) / "manifest.json", manifest);
    std::cout << "wrote " << res.log.records.size() << " emails to " << p.out << "/log.csv\n";
    return 0;
}

int cmd_export_hds(const Params& p) {
    fs::create_directories(p.out);
    EmailLog log = p.log_path.empty() ? EmailLog{} : parse_log(p.log_path);
    HdsConfig cfg{p.w0, p.windows, p.pred, p.cadence == 0.0 ? p.w0 : p.cadence};
    std::vector<std::string> warnings;
    auto rows = build_hds(log, cfg, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    std::ofstream out(fs::path(p.out) / "hds.csv");
    write_hds_csv(rows, cfg, out);
    write_json(fs::path(p.out) / "resolved_spec.json", resolved_spec(p));
    std::cout << "wrote " << rows.size() << " hds rows to " << p.out << "/hds.csv\n";
    return 0;
}

/// Runs one experiment cell and writes report/roc files under dir.
ExperimentResult run_cell(const EmailLog& log, const ExperimentConfig& cfg, const fs::path& dir) {
    fs::create_directories(dir);
    auto res = run_experiment(log, cfg);
    write_json(dir / "report.json", report_to_json(res.report));
    if (res.report.roc) {
        std::ofstream roc(dir / "roc.csv");
        write_roc_csv(*res.report.roc, roc);
    }
    json audit_j;
    audit_j["violations"] = res.audit_report.violations;
    write_json(dir / "audit.json", audit_j);
    return res;
}

std::string fmt(const std::optional<double>& v) {
    return v ? std::to_string(*v) : std::string("nan");
}

int cmd_run(const Params& p) {
    fs::create_directories(p.out);
    write_json(fs::path(p.out) / "resolved_spec.json", resolved_spec(p));
    EmailLog log = load_or_synthesize(p);
    bool violated = false;

    std::vector<std::string> srms;
    if (p.preset == "continuous-comparison") srms = {"heuristic", "el", "hds-spam", "hds-err"};
    else srms = {p.srm};

    std::ofstream summary(fs::path(p.out) / "summary.csv");
    summary << "srm,error,tpr,fpr,auc,fgain,bl_size,wl_hits,bl_hits\n";
    for (const auto& name : srms) {
        ExperimentConfig cfg = to_experiment(p);
        cfg.srm = srm_from_string(name);
        if (p.preset == "continuous-comparison") cfg.mode = SimMode::continuous;
        auto res = run_cell(log, cfg, fs::path(p.out) / name);
        const auto& r = res.report;
        summary << name << ',' << fmt(r.error) << ',' << fmt(r.tpr) << ',' << fmt(r.fpr) << ','
                << fmt(r.auc) << ',' << fmt(r.fgain_value) << ',' << r.bl_size << ',' << r.wl_hits
                << ',' << r.bl_hits << "\n";
        std::cout << name << ": error=" << fmt(r.error) << " auc=" << fmt(r.auc)
                  << " fgain=" << fmt(r.fgain_value) << "\n";
        if (!res.audit_report.ok()) {
            violated = true;
            for (const auto& v : res.audit_report.violations)
                std::cerr << name << " audit violation: " << v << "\n";
        }
    }
    return violated ? kExitAudit : 0;
}

int cmd_sweep(const Params& p) {
    fs::create_directories(p.out);
    write_json(fs::path(p.out) / "resolved_spec.json", resolved_spec(p));
    EmailLog log = load_or_synthesize(p);
    bool violated = false;

    std::ofstream summary(fs::path(p.out) / "summary.csv");
    auto emit = [&](const std::string& label, double value, const ExperimentConfig& cfg) {
        auto res = run_cell(log, cfg, fs::path(p.out) / label);
        summary << value << ',' << fmt(res.report.auc) << ',' << fmt(res.report.error) << ','
                << fmt(res.report.fgain_value) << "\n";
        std::cout << label << ": auc=" << fmt(res.report.auc) << "\n";
        if (!res.audit_report.ok()) violated = true;
    };

    if (p.preset == "batch-frequency-sweep") {
        summary << "batch_period,auc,error,fgain\n";
        for (double period : {0.5, 1.0, 2.0, 5.0, 20.0, 60.0}) {
            ExperimentConfig cfg = to_experiment(p);
            cfg.mode = SimMode::batch;
            cfg.batch_period = period;
            emit("period-" + std::to_string(period), period, cfg);
        }
    } else if (p.preset == "history-length-sweep") {
        summary << "windows,auc,error,fgain\n";
        for (int n = 1; n <= 14; ++n) {
            ExperimentConfig cfg = to_experiment(p);
            cfg.hds.w0 = 0.25;  // 15 s
            cfg.hds.n = n;
            cfg.hds.cadence = p.cadence == 0.0 ? 15.0 : p.cadence;
            emit("n-" + std::to_string(n), n, cfg);
        }
    } else {
        std::cerr << "sweep requires --preset batch-frequency-sweep or history-length-sweep\n";
        return kExitUsage;
    }
    return violated ? kExitAudit : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sender reputation toolkit"};
    app.require_subcommand(1);

    Params p;
    // the spec file seeds the defaults before the main parse, so that any
    // explicitly passed flag wins
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--spec") {
            try {
                load_spec(argv[i + 1], p);
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitData;
            }
        }

    auto* gen = app.add_subcommand("generate", "synthesize an email log with ground truth");
    add_common_flags(gen, p);
    gen->add_option("--duration", p.duration, "simulated minutes")->check(CLI::PositiveNumber);

    auto* exp = app.add_subcommand("export-hds", "build and export the historical data set");
    add_common_flags(exp, p);

    auto* runc = app.add_subcommand("run", "train a mechanism and simulate filtering");
    add_common_flags(runc, p);
    runc->add_option("--preset", p.preset, "continuous-comparison or custom")
        ->check(CLI::IsMember({"continuous-comparison", "custom"}));

    auto* sweep = app.add_subcommand("sweep", "parameter sweep with a summary CSV");
    add_common_flags(sweep, p);
    sweep->add_option("--preset", p.preset, "batch-frequency-sweep or history-length-sweep")
        ->check(CLI::IsMember({"batch-frequency-sweep", "history-length-sweep"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    // the comparison preset defaults to the day-scale prediction horizon
    if (runc->parsed() && p.preset == "continuous-comparison") {
        if (!runc->count("--w0")) p.w0 = 120.0;
        if (!runc->count("--pred")) p.pred = 1440.0;
    }

    try {
        if (gen->parsed()) return cmd_generate(p);
        if (exp->parsed()) return cmd_export_hds(p);
        if (runc->parsed()) return cmd_run(p);
        if (sweep->parsed()) return cmd_sweep(p);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
