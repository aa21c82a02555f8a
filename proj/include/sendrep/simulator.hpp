#pragma once

// Evaluation environment: streams validation emails through whitelist ->
// blacklist -> SRM, in continuous or batch mode, maintaining the address
// lists and emitting outcome, decision, and feed traces for audit.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "sendrep/email_log.hpp"
#include "sendrep/srm.hpp"

namespace sendrep {

enum class SimMode { continuous, batch };

struct SimConfig {
    SimMode mode = SimMode::continuous;
    double batch_period = 1.0;   ///< minutes, batch mode only
    Thresholds thresholds;
    double clear_period = 0.0;   ///< minutes between list clearings; 0 = never

    void validate() const {
        thresholds.validate();
        if (mode == SimMode::batch && batch_period <= 0)
            throw config_error("batch_period must be > 0 in batch mode");
    }
};

enum class Route { wl_hit, bl_hit, srm_accept, srm_reject, default_accept };

inline const char* to_string(Route r) {
    switch (r) {
        case Route::wl_hit: return "wl-hit";
        case Route::bl_hit: return "bl-hit";
        case Route::srm_accept: return "srm-accept";
        case Route::srm_reject: return "srm-reject";
        case Route::default_accept: return "default-accept";
    }
    return "?";
}

struct EmailOutcome {
    size_t index = 0;  ///< position in the validation log
    double t = 0;
    uint32_t ip = 0;
    Route route = Route::default_accept;
    bool accepted = true;
    int spam_class = 0;
};

/// Black/white lists keyed by IP with insertion timestamps. An IP is in at
/// most one list at any instant. Hit counters are cumulative run totals and
/// survive list clearing.
struct AddressLists {
    std::unordered_map<uint32_t, double> blacklist;
    std::unordered_map<uint32_t, double> whitelist;
    long wl_hits = 0;
    long bl_hits = 0;

    void clear_lists() {
        blacklist.clear();
        whitelist.clear();
    }
};

struct TraceEvent {
    enum class Type { verdict, clear, feed };
    Type type = Type::verdict;
    double t = 0;
    uint32_t ip = 0;
    Action action = Action::none;  ///< verdict only
    double score = 0.5;            ///< verdict only
    size_t rec_index = 0;          ///< feed only
    bool fed_while_blacklisted = false;  ///< feed only, should never be set by run()
};

struct RunResult {
    std::vector<EmailOutcome> outcomes;
    std::vector<TraceEvent> trace;  ///< chronological verdict/clear/feed events
    AddressLists lists;
};

/// Boundary grid over (start, end]: start + k*period for k >= 1, plus a
/// final partial boundary at end.
inline std::vector<double> batch_boundaries(double start, double end, double period) {
    if (period <= 0) throw config_error("period must be > 0");
    std::vector<double> out;
    for (double b = start + period; b < end - 1e-9; b += period) out.push_back(b);
    if (end > start) out.push_back(end);
    return out;
}

namespace detail {

struct SimEngine {
    const EmailLog& log;
    SrmState& srm;
    const SimConfig& cfg;
    RunResult res;
    std::vector<EmailRecord> pending;  ///< batch mode: logged, not yet examined
    std::vector<size_t> pending_idx;

    SimEngine(const EmailLog& l, SrmState& s, const SimConfig& c) : log(l), srm(s), cfg(c) {}

    void feed(const EmailRecord& r, size_t idx) {
        if (srm.kind == SrmKind::el) return;  // el consumes records directly
        srm.observe(r);
        TraceEvent e;
        e.type = TraceEvent::Type::feed;
        e.t = r.t;
        e.ip = r.ip;
        e.rec_index = idx;
        e.fed_while_blacklisted = res.lists.blacklist.count(r.ip) > 0;
        res.trace.push_back(e);
    }

    void record_verdict(const Verdict& v) {
        TraceEvent e;
        e.type = TraceEvent::Type::verdict;
        e.t = v.at;
        e.ip = v.ip;
        e.action = v.action;
        e.score = v.score;
        res.trace.push_back(e);
    }

    void apply_verdict(const Verdict& v) {
        record_verdict(v);
        if (v.action == Action::blacklist) res.lists.blacklist.emplace(v.ip, v.at);
        else if (v.action == Action::whitelist) res.lists.whitelist.emplace(v.ip, v.at);
    }

    Verdict decide_ip(uint32_t ip, double now) {
        switch (srm.kind) {
            case SrmKind::heuristic: return heuristic_decide(srm, ip, now, cfg.thresholds);
            case SrmKind::hds_spam: return hds_spam_decide(srm, ip, now, cfg.thresholds);
            case SrmKind::hds_err: return hds_err_decide(srm, ip, now, cfg.thresholds);
            case SrmKind::el: break;
        }
        throw config_error("decide_ip called for el srm");
    }

    bool listed(uint32_t ip) const {
        return res.lists.blacklist.count(ip) || res.lists.whitelist.count(ip);
    }

    /// Processes all records logged since the previous boundary. Verdicts
    /// are collected into the two address sets and merged deterministically
    /// (sorted by IP); on a conflict the blacklist wins. IPs already listed
    /// are left untouched.
    void run_batch_boundary(double now) {
        std::map<uint32_t, Verdict> bl_set, wl_set;
        if (srm.kind == SrmKind::el) {
            std::set<uint32_t> tentative_bl;
            for (size_t k = 0; k < pending.size(); ++k) {
                const auto& r = pending[k];
                if (listed(r.ip) || tentative_bl.count(r.ip)) continue;
                Verdict v = el_decide(srm, r, cfg.thresholds);
                v.at = now;
                record_verdict(v);
                if (v.action == Action::blacklist) {
                    bl_set[r.ip] = v;
                    tentative_bl.insert(r.ip);
                } else if (v.action == Action::whitelist && !bl_set.count(r.ip)) {
                    wl_set[r.ip] = v;
                }
            }
        } else {
            std::set<uint32_t> ips;
            for (size_t k = 0; k < pending.size(); ++k) {
                feed(pending[k], pending_idx[k]);
                ips.insert(pending[k].ip);
            }
            for (uint32_t ip : ips) {
                if (listed(ip)) continue;
                Verdict v = decide_ip(ip, now);
                record_verdict(v);
                if (v.action == Action::blacklist) bl_set[ip] = v;
                else if (v.action == Action::whitelist) wl_set[ip] = v;
            }
        }
        pending.clear();
        pending_idx.clear();
        for (auto& [ip, v] : bl_set)
            if (!listed(ip)) res.lists.blacklist.emplace(ip, now);
        for (auto& [ip, v] : wl_set)
            if (!listed(ip) && !bl_set.count(ip)) res.lists.whitelist.emplace(ip, now);
    }

    void fire_clear(double now) {
        res.lists.clear_lists();
        TraceEvent e;
        e.type = TraceEvent::Type::clear;
        e.t = now;
        res.trace.push_back(e);
    }

    void process_email(const EmailRecord& r, size_t idx) {
        EmailOutcome o;
        o.index = idx;
        o.t = r.t;
        o.ip = r.ip;
        o.spam_class = r.spam_class;
        if (res.lists.whitelist.count(r.ip)) {
            o.route = Route::wl_hit;
            o.accepted = true;
            ++res.lists.wl_hits;
            feed(r, idx);  // accepted emails still update the visible history
        } else if (res.lists.blacklist.count(r.ip)) {
            o.route = Route::bl_hit;
            o.accepted = false;
            ++res.lists.bl_hits;
        } else if (cfg.mode == SimMode::batch) {
            o.route = Route::default_accept;
            o.accepted = true;
            pending.push_back(r);
            pending_idx.push_back(idx);
        } else {
            feed(r, idx);
            Verdict v = (srm.kind == SrmKind::el) ? el_decide(srm, r, cfg.thresholds)
                                                  : decide_ip(r.ip, r.t);
            apply_verdict(v);
            if (v.action == Action::blacklist) {
                o.route = Route::srm_reject;
                o.accepted = false;
            } else if (v.action == Action::whitelist) {
                o.route = Route::srm_accept;
                o.accepted = true;
            } else {
                o.route = Route::default_accept;
                o.accepted = true;
            }
        }
        res.outcomes.push_back(o);
    }
};

}  // namespace detail

/// Runs the filtering simulation over the validation log. Lists start
/// empty. Deterministic for identical inputs.
inline RunResult run(const EmailLog& validation_log, SrmState& srm, const SimConfig& cfg) {
    cfg.validate();
    detail::SimEngine eng(validation_log, srm, cfg);

    double span_end = validation_log.duration;
    std::vector<std::pair<double, int>> events;  // (time, 0=boundary 1=clear)
    if (cfg.mode == SimMode::batch && span_end > 0)
        for (double b : batch_boundaries(0.0, span_end, cfg.batch_period)) events.push_back({b, 0});
    if (cfg.clear_period > 0 && span_end > 0)
        for (double c = cfg.clear_period; c <= span_end + 1e-9; c += cfg.clear_period)
            events.push_back({c, 1});
    std::stable_sort(events.begin(), events.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    size_t next_event = 0;
    auto fire_events_before = [&](double t) {
        while (next_event < events.size() && events[next_event].first < t) {
            auto [et, type] = events[next_event++];
            if (type == 0) eng.run_batch_boundary(et);
            else eng.fire_clear(et);
        }
    };
    for (size_t i = 0; i < validation_log.records.size(); ++i) {
        const auto& r = validation_log.records[i];
        fire_events_before(r.t);
        eng.process_email(r, i);
    }
    fire_events_before(span_end + 1.0);  // flush remaining boundaries and clears
    if (!eng.pending.empty()) eng.run_batch_boundary(span_end);
    return std::move(eng.res);
}

struct AuditReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

/// Verifies routing totality, list exclusivity over the decision trace, and
/// the blacklisted-IP feed exclusion. Report-based: violations are
/// returned, never thrown.
inline AuditReport audit(const EmailLog& log, const RunResult& res, SrmKind kind) {
    AuditReport rep;
    if (res.outcomes.size() != log.records.size())
        rep.violations.push_back("routing totality: " + std::to_string(res.outcomes.size()) +
                                 " outcomes for " + std::to_string(log.records.size()) +
                                 " records");
    std::vector<char> seen(log.records.size(), 0);
    for (const auto& o : res.outcomes) {
        if (o.index >= seen.size() || seen[o.index]) {
            rep.violations.push_back("routing totality: duplicate or bad record index " +
                                     std::to_string(o.index));
            continue;
        }
        seen[o.index] = 1;
        if (o.route == Route::wl_hit && !o.accepted)
            rep.violations.push_back("wl-hit not accepted at t=" + std::to_string(o.t));
        if (o.route == Route::bl_hit && o.accepted)
            rep.violations.push_back("bl-hit accepted at t=" + std::to_string(o.t));
    }

    // replay the trace
    std::unordered_map<uint32_t, double> bl, wl;
    std::map<std::pair<uint32_t, double>, Action> decided_at;
    for (const auto& e : res.trace) {
        switch (e.type) {
            case TraceEvent::Type::clear:
                bl.clear();
                wl.clear();
                break;
            case TraceEvent::Type::verdict: {
                auto key = std::make_pair(e.ip, e.t);
                auto it = decided_at.find(key);
                if (it != decided_at.end() && it->second != e.action &&
                    e.action != Action::none && it->second != Action::none)
                    rep.violations.push_back("conflicting verdicts for ip " + format_ip(e.ip) +
                                             " at t=" + std::to_string(e.t));
                decided_at[key] = e.action;
                if (e.action == Action::blacklist) {
                    if (wl.count(e.ip))
                        rep.violations.push_back("exclusivity: ip " + format_ip(e.ip) +
                                                 " blacklisted while whitelisted at t=" +
                                                 std::to_string(e.t));
                    bl.emplace(e.ip, e.t);
                } else if (e.action == Action::whitelist) {
                    if (bl.count(e.ip))
                        rep.violations.push_back("exclusivity: ip " + format_ip(e.ip) +
                                                 " whitelisted while blacklisted at t=" +
                                                 std::to_string(e.t));
                    wl.emplace(e.ip, e.t);
                }
                break;
            }
            case TraceEvent::Type::feed:
                if (kind != SrmKind::el && (e.fed_while_blacklisted || bl.count(e.ip)))
                    rep.violations.push_back("feed exclusion: blacklisted ip " + format_ip(e.ip) +
                                             " reached the srm at t=" + std::to_string(e.t));
                break;
        }
    }
    return rep;
}

}  // namespace sendrep
