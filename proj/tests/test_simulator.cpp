#include <doctest.h>

#include <set>

#include "fixtures.hpp"
#include "sendrep/metrics.hpp"
#include "sendrep/simulator.hpp"

using namespace sendrep;

namespace {

EmailLog uniform_log(uint32_t ip, int n, int spam, double dt = 1.0, double t0 = 0.0) {
    EmailLog log;
    for (int i = 0; i < n; ++i)
        log.records.push_back({ip, t0 + (i + 1) * dt, 1, 0, 1.0, i < spam ? 1 : 0});
    log.finalize();
    return log;
}

EmailLog merge_logs(const EmailLog& a, const EmailLog& b) {
    EmailLog out;
    out.records = a.records;
    out.records.insert(out.records.end(), b.records.begin(), b.records.end());
    out.duration = std::max(a.duration, b.duration);
    out.finalize();
    return out;
}

SrmState heuristic_srm(double history = 960.0) {
    SrmState st;
    st.kind = SrmKind::heuristic;
    st.history_minutes = history;
    return st;
}

}  // namespace

TEST_CASE("batch_boundaries grid") {
    CHECK(batch_boundaries(0.0, 10.0, 5.0) == std::vector<double>{5.0, 10.0});
    CHECK(batch_boundaries(0.0, 9.0, 5.0) == std::vector<double>{5.0, 9.0});
    CHECK(batch_boundaries(0.0, 4.0, 5.0) == std::vector<double>{4.0});
    CHECK(batch_boundaries(0.0, 0.0, 5.0).empty());
    CHECK_THROWS_AS(batch_boundaries(0.0, 1.0, 0.0), config_error);
}

TEST_CASE("empty log yields an empty clean run") {
    EmailLog log;
    log.finalize();
    auto srm = heuristic_srm();
    SimConfig cfg;
    auto res = run(log, srm, cfg);
    CHECK(res.outcomes.empty());
    CHECK(res.lists.blacklist.empty());
    CHECK(audit(log, res, SrmKind::heuristic).ok());
}

TEST_CASE("continuous heuristic: pure spammer is cut off after one email") {
    EmailLog log = uniform_log(1, 10, 10);
    auto srm = heuristic_srm();
    SimConfig cfg;
    auto res = run(log, srm, cfg);
    REQUIRE(res.outcomes.size() == 10);
    CHECK(res.outcomes[0].route == Route::srm_reject);
    for (size_t i = 1; i < 10; ++i) {
        CHECK(res.outcomes[i].route == Route::bl_hit);
        CHECK(!res.outcomes[i].accepted);
    }
    CHECK(res.lists.bl_hits == 9);
    CHECK(res.lists.blacklist.count(1) == 1);
    CHECK(audit(log, res, SrmKind::heuristic).ok());

    // blacklisted emails never reach the visible history
    std::set<size_t> fed;
    for (const auto& e : res.trace)
        if (e.type == TraceEvent::Type::feed) fed.insert(e.rec_index);
    CHECK(fed == std::set<size_t>{0});
}

TEST_CASE("continuous heuristic: clean sender is whitelisted and still fed") {
    EmailLog log = uniform_log(1, 8, 0);
    auto srm = heuristic_srm();
    SimConfig cfg;
    auto res = run(log, srm, cfg);
    CHECK(res.outcomes[0].route == Route::srm_accept);
    for (size_t i = 1; i < 8; ++i) CHECK(res.outcomes[i].route == Route::wl_hit);
    CHECK(res.lists.wl_hits == 7);
    for (const auto& o : res.outcomes) CHECK(o.accepted);
    // wl-hits keep feeding history: one feed per record
    long feeds = 0;
    for (const auto& e : res.trace)
        if (e.type == TraceEvent::Type::feed) ++feeds;
    CHECK(feeds == 8);
    CHECK(audit(log, res, SrmKind::heuristic).ok());
}

TEST_CASE("batch heuristic decides only at boundaries") {
    EmailLog spam = uniform_log(1, 6, 6, 1.0);        // t = 1..6
    EmailLog ham = uniform_log(2, 6, 0, 1.0, 10.0);   // t = 11..16
    EmailLog log = merge_logs(spam, ham);
    auto srm = heuristic_srm();
    SimConfig cfg;
    cfg.mode = SimMode::batch;
    cfg.batch_period = 8.0;  // boundaries at t=8 and t=16
    auto res = run(log, srm, cfg);
    // every spam email predates the first boundary: all default-accepted
    for (size_t i = 0; i < 6; ++i) CHECK(res.outcomes[i].route == Route::default_accept);
    // after t=8 the spammer is listed; the ham sender is still undecided
    CHECK(res.lists.blacklist.count(1) == 1);
    for (size_t i = 6; i < 12; ++i) CHECK(res.outcomes[i].route == Route::default_accept);
    CHECK(res.lists.whitelist.count(2) == 1);  // listed at the final boundary
    CHECK(audit(log, res, SrmKind::heuristic).ok());
}

TEST_CASE("batch and continuous agree on final list membership") {
    EmailLog log = merge_logs(uniform_log(1, 20, 20, 3.0), uniform_log(2, 20, 0, 3.0));
    for (double period : {0.5, 2.0, 10.0}) {
        auto cont = heuristic_srm();
        SimConfig cc;
        auto rc = run(log, cont, cc);
        auto bat = heuristic_srm();
        SimConfig cb;
        cb.mode = SimMode::batch;
        cb.batch_period = period;
        auto rb = run(log, bat, cb);
        CHECK(rc.lists.blacklist.count(1) == 1);
        CHECK(rb.lists.blacklist.count(1) == 1);
        CHECK(rc.lists.whitelist.count(2) == 1);
        CHECK(rb.lists.whitelist.count(2) == 1);
        CHECK(audit(log, rb, SrmKind::heuristic).ok());
    }
}

TEST_CASE("list clearing resets membership but keeps hit counters") {
    EmailLog log = uniform_log(1, 30, 30, 2.0);  // spam at t = 2..60
    auto srm = heuristic_srm();
    SimConfig cfg;
    cfg.clear_period = 25.0;
    auto res = run(log, srm, cfg);
    long clears = 0;
    for (const auto& e : res.trace)
        if (e.type == TraceEvent::Type::clear) ++clears;
    CHECK(clears == 2);  // t=25 and t=50
    // relisted immediately after each clear, so almost everything is a bl-hit
    CHECK(res.lists.bl_hits >= 25);
    CHECK(res.lists.blacklist.count(1) == 1);  // relisted after the last clear
    CHECK(audit(log, res, SrmKind::heuristic).ok());
}

TEST_CASE("el batch skips records of tentatively blacklisted ips") {
    // model: constant blacklist verdict
    SrmState st;
    st.kind = SrmKind::el;
    Model m;
    m.kind = LearnerKind::logistic;
    m.columns = el_feature_names();
    m.lr.w.assign(8, 0.0);
    m.lr.mu.assign(8, 0.0);
    m.lr.sd.assign(8, 1.0);
    m.lr.bias = 10.0;
    st.model = std::move(m);

    EmailLog log = uniform_log(1, 5, 5, 0.1);  // all inside one batch
    SimConfig cfg;
    cfg.mode = SimMode::batch;
    cfg.batch_period = 100.0;
    auto res = run(log, st, cfg);
    long verdicts = 0;
    for (const auto& e : res.trace)
        if (e.type == TraceEvent::Type::verdict) ++verdicts;
    CHECK(verdicts == 1);  // records after the tentative listing are skipped
    CHECK(res.lists.blacklist.count(1) == 1);
    CHECK(audit(log, res, SrmKind::el).ok());
}

TEST_CASE("runs are deterministic") {
    std::mt19937_64 rng(41);
    EmailLog log = fixtures::random_micro_log(rng, 60, 4);
    for (auto mode : {SimMode::continuous, SimMode::batch}) {
        auto s1 = heuristic_srm(5.0);
        auto s2 = heuristic_srm(5.0);
        SimConfig cfg;
        cfg.mode = mode;
        cfg.batch_period = 2.0;
        auto r1 = run(log, s1, cfg);
        auto r2 = run(log, s2, cfg);
        REQUIRE(r1.outcomes.size() == r2.outcomes.size());
        for (size_t i = 0; i < r1.outcomes.size(); ++i) {
            CHECK(r1.outcomes[i].route == r2.outcomes[i].route);
            CHECK(r1.outcomes[i].accepted == r2.outcomes[i].accepted);
        }
        CHECK(r1.lists.bl_hits == r2.lists.bl_hits);
        CHECK(r1.lists.wl_hits == r2.lists.wl_hits);
        CHECK(audit(log, r1, SrmKind::heuristic).ok());
    }
}

TEST_CASE("audit flags injected faults") {
    EmailLog log = uniform_log(1, 2, 2);
    auto srm = heuristic_srm();
    SimConfig cfg;
    auto res = run(log, srm, cfg);
    REQUIRE(audit(log, res, SrmKind::heuristic).ok());

    SUBCASE("conflicting verdicts at one instant") {
        RunResult bad = res;
        TraceEvent e;
        e.type = TraceEvent::Type::verdict;
        e.t = res.trace.front().t;
        e.ip = 1;
        e.action = Action::whitelist;
        // duplicate the blacklist decision time with the opposite action
        for (const auto& ev : res.trace)
            if (ev.type == TraceEvent::Type::verdict && ev.action == Action::blacklist) e.t = ev.t;
        bad.trace.push_back(e);
        auto rep = audit(log, bad, SrmKind::heuristic);
        CHECK(!rep.ok());
    }
    SUBCASE("feeding a blacklisted ip") {
        RunResult bad = res;
        TraceEvent e;
        e.type = TraceEvent::Type::feed;
        e.t = 1.5;
        e.ip = 1;
        e.rec_index = 1;
        e.fed_while_blacklisted = true;
        bad.trace.push_back(e);
        auto rep = audit(log, bad, SrmKind::heuristic);
        CHECK(!rep.ok());
        CHECK(rep.violations.front().find("feed exclusion") != std::string::npos);
    }
    SUBCASE("rejected email routed as wl-hit") {
        RunResult bad = res;
        bad.outcomes[0].route = Route::wl_hit;
        bad.outcomes[0].accepted = false;
        CHECK(!audit(log, bad, SrmKind::heuristic).ok());
    }
    SUBCASE("missing outcome") {
        RunResult bad = res;
        bad.outcomes.pop_back();
        CHECK(!audit(log, bad, SrmKind::heuristic).ok());
    }
    SUBCASE("duplicate record index") {
        RunResult bad = res;
        bad.outcomes[1].index = 0;
        CHECK(!audit(log, bad, SrmKind::heuristic).ok());
    }
}

TEST_CASE("report wires the run into metrics") {
    EmailLog log = merge_logs(uniform_log(1, 12, 12, 2.0), uniform_log(2, 12, 0, 2.0));
    auto srm = heuristic_srm();
    SimConfig cfg;
    auto res = run(log, srm, cfg);
    auto rep = report(log, res, cfg.thresholds);
    REQUIRE(rep.error.has_value());
    CHECK(*rep.error < 0.2);       // one spam slipped through before listing
    REQUIRE(rep.auc.has_value());
    CHECK(*rep.auc == doctest::Approx(1.0));
    CHECK(rep.bl_size == 1);
    CHECK(rep.wl_hits == res.lists.wl_hits);
}
