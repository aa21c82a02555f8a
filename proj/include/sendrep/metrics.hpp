#pragma once

// Evaluation metrics over run traces: confusion counts, error/TPR/FPR,
// ROC/AUC, list statistics, FGain, and information-gain feature ranking.
// Undefined metrics (zero denominators) stay unset, never 0.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "sendrep/dataset.hpp"
#include "sendrep/simulator.hpp"

namespace sendrep {

/// Rejection-based counts: tp = spam rejected, fp = ham rejected,
/// tn = ham accepted, fn = spam accepted.
struct ConfusionCounts {
    long tp = 0, tn = 0, fp = 0, fn = 0;
    long total() const { return tp + tn + fp + fn; }
};

inline ConfusionCounts confusion(const std::vector<EmailOutcome>& outcomes) {
    ConfusionCounts c;
    for (const auto& o : outcomes) {
        if (o.accepted) (o.spam_class ? c.fn : c.tn)++;
        else (o.spam_class ? c.tp : c.fp)++;
    }
    return c;
}

struct RocCurve {
    std::vector<std::pair<double, double>> points;  ///< (fpr, tpr), (0,0) .. (1,1)
    std::vector<double> thresholds;                 ///< score cut per interior point
    double auc = 0.5;
};

struct undefined_metric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Threshold sweep over distinct scores; trapezoidal AUC (equals the
/// Mann-Whitney pair statistic with ties counted half).
inline RocCurve roc_auc(std::vector<std::pair<double, bool>> scored) {
    long pos = 0, neg = 0;
    for (const auto& [s, y] : scored) (y ? pos : neg)++;
    if (pos == 0 || neg == 0)
        throw undefined_metric_error("roc_auc needs at least one positive and one negative");
    std::sort(scored.begin(), scored.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    RocCurve roc;
    roc.points.push_back({0.0, 0.0});
    long tp = 0, fp = 0;
    double auc = 0, prev_fpr = 0, prev_tpr = 0;
    size_t i = 0;
    while (i < scored.size()) {
        double s = scored[i].first;
        while (i < scored.size() && scored[i].first == s) {
            (scored[i].second ? tp : fp)++;
            ++i;
        }
        double fpr = static_cast<double>(fp) / static_cast<double>(neg);
        double tpr = static_cast<double>(tp) / static_cast<double>(pos);
        auc += 0.5 * (fpr - prev_fpr) * (tpr + prev_tpr);
        roc.points.push_back({fpr, tpr});
        roc.thresholds.push_back(s);
        prev_fpr = fpr;
        prev_tpr = tpr;
    }
    roc.auc = auc;
    return roc;
}

/// Fraction of emails resolved by list hits (spared content inspection).
inline double fgain(long wl_hits, long bl_hits, long total_emails) {
    if (total_emails <= 0) throw undefined_metric_error("fgain with zero emails");
    return static_cast<double>(wl_hits + bl_hits) / static_cast<double>(total_emails);
}

namespace detail {
inline double entropy(const std::map<int, long>& counts, long total) {
    double h = 0;
    for (const auto& [v, c] : counts) {
        if (c == 0) continue;
        double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}
}  // namespace detail

/// H(target) - sum_v p(v) H(target | v) over the column discretized into
/// equal-frequency bins. Binary target required; a constant target gives 0.
inline double infogain(const Dataset& d, const std::string& column, int bins = 10) {
    auto it = std::find(d.names.begin(), d.names.end(), column);
    if (it == d.names.end()) throw config_error("no such column: " + column);
    size_t j = static_cast<size_t>(it - d.names.begin());
    size_t n = d.num_rows();
    if (n == 0) return 0.0;

    // equal-frequency bin edges; identical values always share a bin
    std::vector<double> vals(n);
    for (size_t i = 0; i < n; ++i) vals[i] = d.rows[i][j];
    std::vector<double> sorted = vals;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> edges;  // upper-exclusive edges between bins
    for (int b = 1; b < bins; ++b) {
        size_t k = n * static_cast<size_t>(b) / static_cast<size_t>(bins);
        if (k == 0 || k >= n) continue;
        double e = sorted[k];
        if (edges.empty() || e > edges.back()) edges.push_back(e);
    }
    auto bin_of = [&](double v) {
        return std::lower_bound(edges.begin(), edges.end(),
                                std::nextafter(v, std::numeric_limits<double>::max())) -
               edges.begin();
    };

    std::map<int, long> target_counts;
    std::map<long, std::map<int, long>> per_bin;
    std::map<long, long> bin_totals;
    for (size_t i = 0; i < n; ++i) {
        int y = static_cast<int>(d.target[i]);
        target_counts[y]++;
        long b = bin_of(vals[i]);
        per_bin[b][y]++;
        bin_totals[b]++;
    }
    double h = detail::entropy(target_counts, static_cast<long>(n));
    double cond = 0;
    for (const auto& [b, counts] : per_bin) {
        double p = static_cast<double>(bin_totals[b]) / static_cast<double>(n);
        cond += p * detail::entropy(counts, bin_totals[b]);
    }
    return std::max(0.0, h - cond);
}

struct RunReport {
    ConfusionCounts counts;
    std::optional<double> error, tpr, fpr, auc, fgain_value;
    long bl_size = 0;   ///< distinct IPs added to the blacklist during the run
    long wl_hits = 0;
    long bl_hits = 0;
    std::optional<RocCurve> roc;
};

/// An IP counts as a spam sender for ROC purposes iff its spammingness over
/// the full validation span exceeds blt.
inline std::unordered_map<uint32_t, bool> roc_ground_truth(const EmailLog& validation_log,
                                                           double blt) {
    std::unordered_map<uint32_t, std::pair<long, long>> counts;  // (spam, total)
    for (const auto& r : validation_log.records) {
        auto& c = counts[r.ip];
        c.first += r.spam_class;
        c.second += 1;
    }
    std::unordered_map<uint32_t, bool> label;
    for (const auto& [ip, c] : counts)
        label[ip] = static_cast<double>(c.first) / static_cast<double>(c.second) > blt;
    return label;
}

/// Last recorded decision score per IP, over all IPs with at least one
/// SRM decision.
inline std::unordered_map<uint32_t, double> last_scores(const std::vector<TraceEvent>& trace) {
    std::unordered_map<uint32_t, double> s;
    for (const auto& e : trace)
        if (e.type == TraceEvent::Type::verdict) s[e.ip] = e.score;
    return s;
}

inline RunReport report(const EmailLog& validation_log, const RunResult& res,
                        const Thresholds& thr) {
    RunReport rep;
    rep.counts = confusion(res.outcomes);
    const auto& c = rep.counts;
    if (c.total() > 0) rep.error = static_cast<double>(c.fp + c.fn) / c.total();
    if (c.tp + c.fn > 0) rep.tpr = static_cast<double>(c.tp) / (c.tp + c.fn);
    if (c.fp + c.tn > 0) rep.fpr = static_cast<double>(c.fp) / (c.fp + c.tn);
    rep.wl_hits = res.lists.wl_hits;
    rep.bl_hits = res.lists.bl_hits;
    std::set<uint32_t> bl_ips;
    for (const auto& e : res.trace)
        if (e.type == TraceEvent::Type::verdict && e.action == Action::blacklist)
            bl_ips.insert(e.ip);
    rep.bl_size = static_cast<long>(bl_ips.size());
    if (c.total() > 0) rep.fgain_value = fgain(rep.wl_hits, rep.bl_hits, c.total());

    auto labels = roc_ground_truth(validation_log, thr.blt);
    std::vector<std::pair<double, bool>> scored;
    for (const auto& [ip, score] : last_scores(res.trace)) {
        auto it = labels.find(ip);
        if (it != labels.end()) scored.push_back({score, it->second});
    }
    try {
        rep.roc = roc_auc(std::move(scored));
        rep.auc = rep.roc->auc;
    } catch (const undefined_metric_error&) {
        // single-class or empty population: auc stays unset
    }
    return rep;
}

inline nlohmann::json report_to_json(const RunReport& r) {
    nlohmann::json j;
    auto put = [&](const char* k, const std::optional<double>& v) {
        if (v) j[k] = *v;
        else j[k] = nullptr;
    };
    j["tp"] = r.counts.tp;
    j["tn"] = r.counts.tn;
    j["fp"] = r.counts.fp;
    j["fn"] = r.counts.fn;
    put("error", r.error);
    put("tpr", r.tpr);
    put("fpr", r.fpr);
    put("auc", r.auc);
    put("fgain", r.fgain_value);
    j["bl_size"] = r.bl_size;
    j["wl_hits"] = r.wl_hits;
    j["bl_hits"] = r.bl_hits;
    return j;
}

inline void write_roc_csv(const RocCurve& roc, std::ostream& out) {
    out << "threshold,fpr,tpr\n";
    for (size_t i = 1; i < roc.points.size(); ++i)
        out << roc.thresholds[i - 1] << ',' << roc.points[i].first << ',' << roc.points[i].second
            << '\n';
}

}  // namespace sendrep
