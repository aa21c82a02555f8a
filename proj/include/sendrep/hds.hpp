#pragma once

// Historical data set construction: per-IP aggregation over n exponentially
// growing windows (T0 - w0*2^i, T0], i = 0..n-1, plus spammingness and
// erraticness targets over the prediction window (T0, T0 + pred].

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sendrep/email_log.hpp"
#include "sendrep/ip_history.hpp"

namespace sendrep {

struct HdsConfig {
    double w0 = 60.0;      ///< smallest-window length, minutes
    int n = 5;             ///< window count
    double pred = 60.0;    ///< prediction-window length, minutes
    double cadence = 0.0;  ///< spacing of T0 grid; <= 0 means w0

    double effective_cadence() const { return cadence > 0 ? cadence : w0; }
    /// total history length w0 * 2^(n-1)
    double delta_t() const { return w0 * std::pow(2.0, n - 1); }
    void validate() const {
        if (w0 <= 0) throw config_error("w0 must be > 0");
        if (n < 1) throw config_error("n must be >= 1");
        if (pred <= 0) throw config_error("pred must be > 0");
    }
};

constexpr int kFeaturesPerWindow = 14;

/// The 14 aggregate statistics of one IP over one window. An empty window
/// (no emails) is flagged and all-zero.
struct FeatureSet {
    double email_count = 0;
    double nr_sum = 0, nr_mean = 0, nr_var = 0;
    double ae_sum = 0, ae_mean = 0, ae_var = 0;
    double pt_sum = 0, pt_mean = 0, pt_var = 0;
    double spam_sum = 0, spam_mean = 0, spam_var = 0;
    double erraticness = 0;
    bool empty = true;

    std::vector<double> values() const {
        return {email_count, nr_sum, nr_mean, nr_var, ae_sum,   ae_mean,  ae_var,
                pt_sum,      pt_mean, pt_var, spam_sum, spam_mean, spam_var, erraticness};
    }
};

inline FeatureSet make_feature_set(const WindowStats& w) {
    FeatureSet f;
    if (w.count == 0) return f;
    f.empty = false;
    double c = static_cast<double>(w.count);
    auto var = [c](double sum, double sq) {
        double m = sum / c;
        return std::max(0.0, sq / c - m * m);
    };
    f.email_count = c;
    f.nr_sum = w.sum_nr; f.nr_mean = w.sum_nr / c; f.nr_var = var(w.sum_nr, w.sq_nr);
    f.ae_sum = w.sum_ae; f.ae_mean = w.sum_ae / c; f.ae_var = var(w.sum_ae, w.sq_ae);
    f.pt_sum = w.sum_pt; f.pt_mean = w.sum_pt / c; f.pt_var = var(w.sum_pt, w.sq_pt);
    f.spam_sum = w.sum_spam;
    f.spam_mean = w.sum_spam / c;
    f.spam_var = var(w.sum_spam, w.sum_spam);  // 0/1 values: sq == sum
    f.erraticness = static_cast<double>(w.flips);
    return f;
}

/// One HDS row: n feature sets ordered smallest window first, plus the
/// prediction-window targets. Targets are unset iff the prediction window
/// holds no emails (`defined` false); such rows stay usable for scoring.
struct HdsRecord {
    uint32_t ip = 0;
    double t0 = 0;
    std::vector<FeatureSet> feature_sets;
    std::optional<double> target_spammingness;
    std::optional<double> target_erraticness;
    bool defined = false;

    std::vector<double> feature_row() const {
        std::vector<double> row;
        row.reserve(feature_sets.size() * kFeaturesPerWindow);
        for (const auto& fs : feature_sets)
            for (double v : fs.values()) row.push_back(v);
        return row;
    }
};

namespace detail {
inline IpHistory history_of(const EmailLog& log, uint32_t ip) {
    IpHistory h;
    for (const auto& r : log.records)
        if (r.ip == ip) h.append(r);
    return h;
}
}  // namespace detail

/// Fraction of spam among the IP's emails in (start, end]; nullopt when the
/// window holds no emails.
inline std::optional<double> spammingness(const IpHistory& h, double start, double end) {
    auto w = h.window(start, end);
    if (w.count == 0) return std::nullopt;
    return w.sum_spam / static_cast<double>(w.count);
}

inline std::optional<double> spammingness(const EmailLog& log, uint32_t ip, double start,
                                          double end) {
    return spammingness(detail::history_of(log, ip), start, end);
}

/// Number of spam<->ham changes between chronologically adjacent in-window
/// emails of the IP; nullopt when the window holds no emails.
inline std::optional<long> erraticness(const IpHistory& h, double start, double end) {
    auto w = h.window(start, end);
    if (w.count == 0) return std::nullopt;
    return static_cast<long>(w.flips);
}

inline std::optional<long> erraticness(const EmailLog& log, uint32_t ip, double start,
                                       double end) {
    return erraticness(detail::history_of(log, ip), start, end);
}

inline FeatureSet feature_set(const IpHistory& h, double start, double end) {
    return make_feature_set(h.window(start, end));
}

inline FeatureSet feature_set(const EmailLog& log, uint32_t ip, double start, double end) {
    return feature_set(detail::history_of(log, ip), start, end);
}

/// Builds the n feature sets ending at t0 (smallest window first).
inline std::vector<FeatureSet> window_features(const IpHistory& h, double t0,
                                               const HdsConfig& cfg) {
    std::vector<FeatureSet> out;
    out.reserve(static_cast<size_t>(cfg.n));
    double w = cfg.w0;
    for (int i = 0; i < cfg.n; ++i, w *= 2) out.push_back(feature_set(h, t0 - w, t0));
    return out;
}

/// One row per (IP, T0 on the cadence grid) where the IP has at least one
/// email in (T0 - delta_t, T0]. Emits a warning (not an error) when the
/// total history length is not shorter than the log.
inline std::vector<HdsRecord> build_hds(const EmailLog& log, const HdsConfig& cfg,
                                        std::vector<std::string>* warnings = nullptr) {
    cfg.validate();
    if (warnings && cfg.delta_t() >= log.duration && log.duration > 0)
        warnings->push_back("total history length " + std::to_string(cfg.delta_t()) +
                            " min is not shorter than the log span");
    std::map<uint32_t, IpHistory> hist;
    for (const auto& r : log.records) hist[r.ip].append(r);

    const double cad = cfg.effective_cadence();
    const double dt = cfg.delta_t();
    std::vector<HdsRecord> out;
    for (auto& [ip, h] : hist) {
        for (long k = 1;; ++k) {
            double t0 = cad * static_cast<double>(k);
            if (t0 > log.duration + 1e-9) break;
            if (h.window(t0 - dt, t0).count == 0) continue;
            HdsRecord rec;
            rec.ip = ip;
            rec.t0 = t0;
            rec.feature_sets = window_features(h, t0, cfg);
            rec.target_spammingness = spammingness(h, t0, t0 + cfg.pred);
            auto z = erraticness(h, t0, t0 + cfg.pred);
            if (z) rec.target_erraticness = static_cast<double>(*z);
            rec.defined = rec.target_spammingness.has_value();
            out.push_back(std::move(rec));
        }
    }
    return out;
}

/// Stable per-window column names, n * 14 of them, smallest window first.
inline std::vector<std::string> hds_feature_names(const HdsConfig& cfg) {
    static const char* stat[kFeaturesPerWindow] = {
        "ec",     "nr_sum", "nr_mean", "nr_var", "ae_sum",   "ae_mean",  "ae_var",
        "pt_sum", "pt_mean", "pt_var", "spam_sum", "spam_mean", "spam_var", "err"};
    std::vector<std::string> names;
    names.reserve(static_cast<size_t>(cfg.n) * kFeaturesPerWindow);
    for (int i = 0; i < cfg.n; ++i)
        for (const char* s : stat) names.push_back("w" + std::to_string(i) + "_" + s);
    return names;
}

inline void write_hds_csv(const std::vector<HdsRecord>& rows, const HdsConfig& cfg,
                          std::ostream& out) {
    out << "ip,t0";
    for (const auto& n : hds_feature_names(cfg)) out << ',' << n;
    out << ",target_spammingness,target_erraticness,defined\n";
    for (const auto& r : rows) {
        out << format_ip(r.ip) << ',' << r.t0;
        for (double v : r.feature_row()) out << ',' << v;
        out << ',';
        if (r.target_spammingness) out << *r.target_spammingness;
        out << ',';
        if (r.target_erraticness) out << *r.target_erraticness;
        out << ',' << (r.defined ? 1 : 0) << '\n';
    }
}

}  // namespace sendrep
