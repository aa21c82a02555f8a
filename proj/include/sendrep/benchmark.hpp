#pragma once

// Desk-scale synthetic benchmarks and the experiment driver shared by the
// CLI presets and the acceptance suite. The standard benchmark mixes
// benign, spamming, compromised, and erratic senders (>= 25% of IPs change
// behavior during the run) over a simulated week.

#include <cstdint>
#include <string>
#include <vector>

#include "sendrep/email_log.hpp"
#include "sendrep/metrics.hpp"
#include "sendrep/simulator.hpp"
#include "sendrep/srm.hpp"
#include "sendrep/synth.hpp"

namespace sendrep {

constexpr double kWeekMinutes = 168.0 * 60.0;

inline std::vector<std::pair<SenderArchetype, size_t>> standard_mix() {
    std::vector<std::pair<SenderArchetype, size_t>> mix;
    auto arch = [](ArchetypeKind k, double rate, double p0, double p1) {
        SenderArchetype a;
        a.kind = k;
        a.rate = rate;
        a.spam_prob_before = p0;
        a.spam_prob_after = p1;
        // weakly class-informative attributes; aggregation makes them useful
        a.ham = AttrModel{1.6, 0.4, 40.0, 0.6};
        a.spam = AttrModel{2.0, 0.7, 46.0, 0.6};
        return a;
    };
    // stable senders
    mix.push_back({arch(ArchetypeKind::benign, 3.0, 0.02, 0.0), 330});
    mix.push_back({arch(ArchetypeKind::benign, 6.0, 0.01, 0.0), 300});
    mix.push_back({arch(ArchetypeKind::benign, 6.0, 0.25, 0.0), 170});   // dirty but ham
    mix.push_back({arch(ArchetypeKind::spammer, 6.0, 0.92, 0.0), 280});
    mix.push_back({arch(ArchetypeKind::spammer, 6.0, 0.75, 0.0), 170});  // moderate
    // behavior changers (>= 25% of the population)
    auto comp_up = arch(ArchetypeKind::compromised, 4.0, 0.02, 0.9);
    auto comp_down = arch(ArchetypeKind::compromised, 4.0, 0.9, 0.02);
    auto err = arch(ArchetypeKind::erratic, 6.0, 0.05, 0.85);
    err.flip_period = 15.0;
    mix.push_back({comp_up, 180});
    mix.push_back({comp_down, 120});
    mix.push_back({err, 450});
    return mix;  // 2,000 IPs, 750 changers (37.5%)
}

/// Mix with 30% erratic flippers, for the false-positive protection study.
inline std::vector<std::pair<SenderArchetype, size_t>> erratic_heavy_mix() {
    auto mix = standard_mix();
    for (auto& [a, n] : mix) {
        if (a.kind == ArchetypeKind::erratic) n = 600;
        else if (a.kind == ArchetypeKind::compromised) n = 50;
        else if (a.kind == ArchetypeKind::benign && a.spam_prob_before < 0.1) n = 400;
    }
    return mix;  // 600 erratic of 2,000 IPs
}

/// Default mix for `generate`: expected spam fraction ~= 12.3%.
inline std::vector<std::pair<SenderArchetype, size_t>> default_mix() {
    std::vector<std::pair<SenderArchetype, size_t>> mix;
    SenderArchetype benign;
    benign.kind = ArchetypeKind::benign;
    benign.rate = 0.6;
    benign.spam_prob_before = 0.02;
    SenderArchetype spammer;
    spammer.kind = ArchetypeKind::spammer;
    spammer.rate = 0.45;
    spammer.spam_prob_before = 0.9;
    spammer.spam = AttrModel{2.6, 1.1, 55.0, 0.6};
    mix.push_back({benign, 1700});
    mix.push_back({spammer, 300});
    return mix;
}

struct ExperimentConfig {
    SrmKind srm = SrmKind::hds_spam;
    LearnerKind learner = LearnerKind::logistic;
    Hyperparams hyper;
    HdsConfig hds{60.0, 5, 60.0, 60.0};  // w0, n, pred, cadence
    double heuristic_history = 960.0;
    SimMode mode = SimMode::continuous;
    double batch_period = 1.0;
    Thresholds thresholds;
    double clear_period = 1440.0;
    double split_fraction = 0.5;
    uint64_t split_seed = 1;
};

struct ExperimentResult {
    RunReport report;
    AuditReport audit_report;
};

/// Splits the log by IP, trains the SRM on the training half, simulates the
/// validation half, and reports.
inline ExperimentResult run_experiment(const EmailLog& log, const ExperimentConfig& cfg) {
    auto [train, valid] = split_by_ip(log, cfg.split_fraction, cfg.split_seed);
    FitConfig fit;
    fit.learner = cfg.learner;
    fit.hyper = cfg.hyper;
    fit.hds = cfg.hds;
    fit.heuristic_history = cfg.heuristic_history;
    fit.thresholds = cfg.thresholds;
    SrmState srm = fit_srm(cfg.srm, train, fit);
    SimConfig sim;
    sim.mode = cfg.mode;
    sim.batch_period = cfg.batch_period;
    sim.thresholds = cfg.thresholds;
    sim.clear_period = cfg.clear_period;
    RunResult res = run(valid, srm, sim);
    ExperimentResult out;
    out.audit_report = audit(valid, res, cfg.srm);
    out.report = report(valid, res, cfg.thresholds);
    return out;
}

inline SynthResult standard_benchmark_log(uint64_t seed) {
    return synthesize_log(standard_mix(), kWeekMinutes, seed);
}

inline SynthResult erratic_benchmark_log(uint64_t seed) {
    return synthesize_log(erratic_heavy_mix(), kWeekMinutes, seed);
}

}  // namespace sendrep
