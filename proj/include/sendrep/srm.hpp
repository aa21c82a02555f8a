#pragma once

// The four sender reputation mechanisms. Each maps observed traffic to a
// per-IP blacklist / whitelist / none verdict with a score used for ROC
// analysis. Models are trained once on the training split and frozen; the
// run only mutates the mechanism's visible email history.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sendrep/email_log.hpp"
#include "sendrep/hds.hpp"
#include "sendrep/ip_history.hpp"
#include "sendrep/learners.hpp"

namespace sendrep {

enum class SrmKind { heuristic, el, hds_spam, hds_err };

inline const char* to_string(SrmKind k) {
    switch (k) {
        case SrmKind::heuristic: return "heuristic";
        case SrmKind::el: return "el";
        case SrmKind::hds_spam: return "hds-spam";
        case SrmKind::hds_err: return "hds-err";
    }
    return "?";
}

inline SrmKind srm_from_string(const std::string& s) {
    if (s == "heuristic") return SrmKind::heuristic;
    if (s == "el") return SrmKind::el;
    if (s == "hds-spam") return SrmKind::hds_spam;
    if (s == "hds-err") return SrmKind::hds_err;
    throw config_error("unknown srm kind: " + s);
}

struct Thresholds {
    double blt = 0.5;      ///< blacklisting threshold
    double wlt = 0.05;     ///< whitelisting threshold
    double epsilon = 0.5;  ///< erraticness stability cutoff

    void validate() const {
        if (!(wlt < blt)) throw config_error("wlt must be < blt");
    }
};

enum class Action { blacklist, whitelist, none };

inline const char* to_string(Action a) {
    switch (a) {
        case Action::blacklist: return "blacklist";
        case Action::whitelist: return "whitelist";
        case Action::none: return "none";
    }
    return "?";
}

struct Verdict {
    uint32_t ip = 0;
    Action action = Action::none;
    double score = 0.5;  ///< [0,1] confidence recorded for ROC
    double at = 0.0;     ///< decision timestamp
};

/// EL feature row for one record: subnets, nr, ae, pt, t.
inline const std::vector<std::string>& el_feature_names() {
    static const std::vector<std::string> names = {"ip8", "ip16", "ip24", "ip32",
                                                   "nr",  "ae",   "pt",   "t"};
    return names;
}

inline std::vector<double> el_feature_row(const EmailRecord& r) {
    auto f = subnet_features(r.ip);
    return {static_cast<double>(f.ip8), static_cast<double>(f.ip16), static_cast<double>(f.ip24),
            static_cast<double>(f.ip32), static_cast<double>(r.nr), static_cast<double>(r.ae),
            r.pt, r.t};
}

struct SrmState {
    SrmKind kind = SrmKind::heuristic;
    std::optional<Model> model;           ///< el / hds kinds only
    HdsConfig hds;                        ///< hds kinds
    double history_minutes = 960.0;       ///< heuristic window length
    std::map<uint32_t, IpHistory> seen;   ///< visible email history (not el)

    /// Feeds one accepted email to the mechanism's visible history.
    void observe(const EmailRecord& r) {
        if (kind == SrmKind::el) return;
        seen[r.ip].append(r);
    }

    const IpHistory* history(uint32_t ip) const {
        auto it = seen.find(ip);
        return it == seen.end() ? nullptr : &it->second;
    }
};

namespace detail {
/// Ties at the thresholds fall to none (strict inequalities).
inline Action threshold_action(double s, const Thresholds& thr) {
    if (s > thr.blt) return Action::blacklist;
    if (s < thr.wlt) return Action::whitelist;
    return Action::none;
}
}  // namespace detail

/// Spammingness over (now - H, now]; undefined history scores 0.5 / none.
inline Verdict heuristic_decide(const SrmState& state, uint32_t ip, double now,
                                const Thresholds& thr) {
    Verdict v{ip, Action::none, 0.5, now};
    const IpHistory* h = state.history(ip);
    if (!h) return v;
    auto s = spammingness(*h, now - state.history_minutes, now);
    if (!s) return v;
    v.score = *s;
    v.action = detail::threshold_action(*s, thr);
    return v;
}

/// Classifies a single record; blacklists on score > blt, whitelists on
/// score < wlt.
inline Verdict el_decide(const SrmState& state, const EmailRecord& r, const Thresholds& thr) {
    if (!state.model) throw config_error("el srm has no trained model");
    double s = predict_score(*state.model, el_feature_row(r));
    return Verdict{r.ip, detail::threshold_action(s, thr), s, r.t};
}

/// Two-stage rule: the classifier's predicted future spammingness p gates
/// the decision, the heuristic threshold on historical spammingness in the
/// largest window confirms it. Prediction alone never lists an IP.
inline Verdict hds_spam_decide(const SrmState& state, uint32_t ip, double now,
                               const Thresholds& thr) {
    if (!state.model) throw config_error("hds-spam srm has no trained model");
    Verdict v{ip, Action::none, 0.5, now};
    const IpHistory* h = state.history(ip);
    if (!h) return v;
    std::vector<double> row;
    for (const auto& fs : window_features(*h, now, state.hds))
        for (double x : fs.values()) row.push_back(x);
    double p = predict_score(*state.model, row);
    v.score = p;
    auto hist_spam = spammingness(*h, now - state.hds.delta_t(), now);
    if (!hist_spam) return v;
    if (p > 0.5 && *hist_spam > thr.blt) v.action = Action::blacklist;
    else if (p < 0.5 && *hist_spam < thr.wlt) v.action = Action::whitelist;
    return v;
}

/// Applies the heuristic rule only when the classifier predicts a stable
/// (non-erratic) sender; predicted-erratic IPs are never listed. The ROC
/// score is stability times historical spammingness.
inline Verdict hds_err_decide(const SrmState& state, uint32_t ip, double now,
                              const Thresholds& thr) {
    if (!state.model) throw config_error("hds-err srm has no trained model");
    Verdict v{ip, Action::none, 0.5, now};
    const IpHistory* h = state.history(ip);
    if (!h) return v;
    std::vector<double> row;
    for (const auto& fs : window_features(*h, now, state.hds))
        for (double x : fs.values()) row.push_back(x);
    double p_erratic = predict_score(*state.model, row);
    double stability = 1.0 - p_erratic;
    auto hist_spam = spammingness(*h, now - state.hds.delta_t(), now);
    v.score = std::clamp(stability * (hist_spam ? *hist_spam : 0.5), 0.0, 1.0);
    if (p_erratic >= 0.5) return v;  // expected to keep flipping: leave unlisted
    if (!hist_spam) return v;
    if (*hist_spam > thr.blt) v.action = Action::blacklist;
    else if (*hist_spam < thr.wlt) v.action = Action::whitelist;
    return v;
}

struct FitConfig {
    LearnerKind learner = LearnerKind::naive_bayes;
    Hyperparams hyper;
    HdsConfig hds;
    double heuristic_history = 960.0;
    Thresholds thresholds;
};

/// Trains the mechanism on the training split. The returned state starts
/// with an empty visible history.
inline SrmState fit_srm(SrmKind kind, const EmailLog& train_log, const FitConfig& cfg) {
    cfg.thresholds.validate();
    SrmState st;
    st.kind = kind;
    st.hds = cfg.hds;
    st.history_minutes = cfg.heuristic_history;
    if (kind == SrmKind::heuristic) return st;
    if (train_log.records.empty()) throw config_error("training log is empty");

    Dataset d;
    if (kind == SrmKind::el) {
        d.names = el_feature_names();
        for (const auto& r : train_log.records) {
            d.rows.push_back(el_feature_row(r));
            d.target.push_back(r.spam_class);
        }
    } else {
        auto rows = build_hds(train_log, cfg.hds);
        d.names = hds_feature_names(cfg.hds);
        for (const auto& rec : rows) {
            if (!rec.defined) continue;
            d.rows.push_back(rec.feature_row());
            if (kind == SrmKind::hds_spam)
                d.target.push_back(*rec.target_spammingness > 0.5 ? 1.0 : 0.0);
            else
                d.target.push_back(*rec.target_erraticness > cfg.thresholds.epsilon ? 1.0 : 0.0);
        }
        if (d.rows.empty())
            throw config_error(std::string("no defined-target HDS rows for config w0=") +
                               std::to_string(cfg.hds.w0) + " n=" + std::to_string(cfg.hds.n) +
                               " pred=" + std::to_string(cfg.hds.pred));
    }
    d.finalize();
    st.model = train(cfg.learner, d, cfg.hyper);
    return st;
}

}  // namespace sendrep
