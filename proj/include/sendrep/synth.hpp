#pragma once

// Synthetic email-log generation from sender archetypes. Each synthetic IP
// follows a Poisson arrival process; emitted emails are labeled spam with a
// probability that may change over time (compromised and erratic senders).
// A ground-truth sidecar records each IP's hidden archetype.

#include <cmath>
#include <fstream>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sendrep/email_log.hpp"

namespace sendrep {

enum class ArchetypeKind { benign, spammer, compromised, erratic };

inline const char* to_string(ArchetypeKind k) {
    switch (k) {
        case ArchetypeKind::benign: return "benign";
        case ArchetypeKind::spammer: return "spammer";
        case ArchetypeKind::compromised: return "compromised";
        case ArchetypeKind::erratic: return "erratic";
    }
    return "?";
}

inline ArchetypeKind archetype_from_string(const std::string& s) {
    if (s == "benign") return ArchetypeKind::benign;
    if (s == "spammer") return ArchetypeKind::spammer;
    if (s == "compromised") return ArchetypeKind::compromised;
    if (s == "erratic") return ArchetypeKind::erratic;
    throw parse_error("unknown archetype: " + s);
}

/// Per-emitted-class attribute distributions: counts are geometric around
/// the mean, pt is log-normal with the given log-scale dispersion.
struct AttrModel {
    double nr_mean = 1.5;
    double ae_mean = 0.4;
    double pt_mean = 40.0;
    double pt_sigma = 0.5;
};

struct SenderArchetype {
    ArchetypeKind kind = ArchetypeKind::benign;
    double rate = 1.0;              ///< mean emails per hour
    double spam_prob_before = 0.0;  ///< spam probability (before switch/in start phase)
    double spam_prob_after = 0.0;   ///< after switch (compromised) or flipped phase (erratic)
    double switch_time = -1.0;      ///< compromised: minutes; < 0 draws per IP in [0.25,0.75]*duration
    double flip_period = 0.0;       ///< erratic: mean minutes between behavior flips
    AttrModel ham;
    AttrModel spam;
};

struct GroundTruth {
    uint32_t ip = 0;
    ArchetypeKind kind = ArchetypeKind::benign;
    double switch_time = -1.0;  ///< actual per-IP switch time, -1 when n/a
};

struct SynthResult {
    EmailLog log;
    std::vector<GroundTruth> truth;  ///< ordered by ip
};

namespace detail {

inline uint32_t draw_count(std::mt19937_64& rng, double mean) {
    if (mean <= 0.0) return 0;
    std::geometric_distribution<uint32_t> d(1.0 / (mean + 1.0));
    return d(rng);
}

inline void emit_email(std::mt19937_64& rng, const SenderArchetype& a, uint32_t ip, double t,
                       double p_spam, std::vector<EmailRecord>& out) {
    std::bernoulli_distribution spam(p_spam);
    EmailRecord r;
    r.ip = ip;
    r.t = t;
    r.spam_class = spam(rng) ? 1 : 0;
    const AttrModel& m = r.spam_class ? a.spam : a.ham;
    r.nr = 1 + draw_count(rng, m.nr_mean - 1.0);
    r.ae = draw_count(rng, m.ae_mean);
    std::lognormal_distribution<double> pt(std::log(m.pt_mean) - 0.5 * m.pt_sigma * m.pt_sigma,
                                           m.pt_sigma);
    r.pt = pt(rng);
    out.push_back(r);
}

}  // namespace detail

/// Deterministic per (archetypes, duration, seed). Throws config_error on
/// an empty mix or non-positive duration.
inline SynthResult synthesize_log(const std::vector<std::pair<SenderArchetype, size_t>>& archetypes,
                                  double duration, uint64_t seed) {
    if (duration <= 0) throw config_error("duration must be > 0");
    size_t total_ips = 0;
    for (const auto& [a, n] : archetypes) {
        if (a.rate <= 0) throw config_error("archetype rate must be > 0");
        total_ips += n;
    }
    if (total_ips == 0) throw config_error("no sender IPs configured");

    std::mt19937_64 master(seed);
    std::unordered_set<uint32_t> used;
    SynthResult res;
    std::vector<EmailRecord>& recs = res.log.records;

    for (const auto& [a, n] : archetypes) {
        for (size_t i = 0; i < n; ++i) {
            uint32_t ip;
            do {
                ip = static_cast<uint32_t>(master());
            } while (ip == 0 || !used.insert(ip).second);
            std::mt19937_64 rng(master());

            double sw = -1.0;
            if (a.kind == ArchetypeKind::compromised) {
                sw = a.switch_time;
                if (sw < 0) {
                    std::uniform_real_distribution<double> u(0.25 * duration, 0.75 * duration);
                    sw = u(rng);
                }
                if (sw > duration) throw config_error("switch_time beyond log duration");
            }
            res.truth.push_back({ip, a.kind, sw});

            const double mean_gap = 60.0 / a.rate;  // minutes
            std::exponential_distribution<double> gap(1.0 / mean_gap);

            // erratic phase schedule
            bool phase_before = true;
            double next_flip = duration + 1;
            std::exponential_distribution<double> flip_gap;
            if (a.kind == ArchetypeKind::erratic && a.flip_period > 0) {
                flip_gap = std::exponential_distribution<double>(1.0 / a.flip_period);
                next_flip = flip_gap(rng);
            }

            double t = gap(rng);
            while (t <= duration) {
                while (t > next_flip) {
                    phase_before = !phase_before;
                    next_flip += flip_gap(rng);
                }
                double p = a.spam_prob_before;
                if (a.kind == ArchetypeKind::compromised && t > sw) p = a.spam_prob_after;
                if (a.kind == ArchetypeKind::erratic && !phase_before) p = a.spam_prob_after;
                detail::emit_email(rng, a, ip, t, p, recs);
                t += gap(rng);
            }
        }
    }
    res.log.duration = duration;
    res.log.finalize();
    std::sort(res.truth.begin(), res.truth.end(),
              [](const GroundTruth& x, const GroundTruth& y) { return x.ip < y.ip; });
    return res;
}

inline const char* kTruthHeader = "ip,archetype,switch_time";

inline void write_truth(const std::vector<GroundTruth>& truth, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write " + path);
    out << kTruthHeader << '\n';
    for (const auto& g : truth)
        out << format_ip(g.ip) << ',' << to_string(g.kind) << ',' << g.switch_time << '\n';
}

inline std::vector<GroundTruth> parse_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw parse_error("empty truth file");
    std::vector<GroundTruth> out;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto f = detail::split_csv_line(line);
        if (f.size() != 3) throw parse_error("line " + std::to_string(lineno) + ": bad truth row");
        out.push_back({parse_ip(f[0]), archetype_from_string(f[1]), std::stod(f[2])});
    }
    return out;
}

}  // namespace sendrep
