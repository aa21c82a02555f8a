#include <doctest.h>

#include <cmath>
#include <random>

#include "sendrep/metrics.hpp"

using namespace sendrep;

namespace {

/// Mann-Whitney pair statistic: fraction of (positive, negative) pairs
/// ranked correctly, ties counted half.
double mann_whitney(const std::vector<std::pair<double, bool>>& scored) {
    double wins = 0;
    long pairs = 0;
    for (const auto& [sp, yp] : scored) {
        if (!yp) continue;
        for (const auto& [sn, yn] : scored) {
            if (yn) continue;
            ++pairs;
            if (sp > sn) wins += 1.0;
            else if (sp == sn) wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

EmailOutcome outcome(bool accepted, int spam) {
    EmailOutcome o;
    o.accepted = accepted;
    o.spam_class = spam;
    o.route = accepted ? Route::default_accept : Route::bl_hit;
    return o;
}

}  // namespace

TEST_CASE("confusion counts and error") {
    std::vector<EmailOutcome> out = {
        outcome(false, 1),  // spam rejected: tp
        outcome(true, 1),   // spam accepted: fn
        outcome(false, 0),  // ham rejected: fp
        outcome(true, 0),   // ham accepted: tn
    };
    auto c = confusion(out);
    CHECK(c.tp == 1);
    CHECK(c.fn == 1);
    CHECK(c.fp == 1);
    CHECK(c.tn == 1);
    CHECK(static_cast<double>(c.fp + c.fn) / c.total() == doctest::Approx(0.5));
}

TEST_CASE("confusion all ham accepted is degenerate") {
    std::vector<EmailOutcome> out(10, outcome(true, 0));
    auto c = confusion(out);
    CHECK(c.tn == 10);
    CHECK(c.tp + c.fn == 0);  // tpr undefined upstream
    CHECK(c.fp == 0);
}

TEST_CASE("confusion matches independent tally on a mixed fixture") {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> bit(0, 1);
    std::vector<EmailOutcome> out;
    for (int i = 0; i < 20; ++i) out.push_back(outcome(bit(rng) == 1, bit(rng)));
    auto c = confusion(out);
    long tp = 0, tn = 0, fp = 0, fn = 0;
    for (const auto& o : out) {
        if (o.spam_class && !o.accepted) tp++;
        if (o.spam_class && o.accepted) fn++;
        if (!o.spam_class && !o.accepted) fp++;
        if (!o.spam_class && o.accepted) tn++;
    }
    CHECK(c.tp == tp);
    CHECK(c.tn == tn);
    CHECK(c.fp == fp);
    CHECK(c.fn == fn);
    CHECK(c.total() == 20);
}

TEST_CASE("roc extremes") {
    // perfectly ordered
    std::vector<std::pair<double, bool>> perfect = {
        {0.9, true}, {0.8, true}, {0.3, false}, {0.1, false}};
    auto roc = roc_auc(perfect);
    CHECK(roc.auc == doctest::Approx(1.0));
    CHECK(roc.points.front() == std::pair<double, double>{0.0, 0.0});
    CHECK(roc.points.back() == std::pair<double, double>{1.0, 1.0});

    // constant scores
    std::vector<std::pair<double, bool>> flat = {
        {0.4, true}, {0.4, false}, {0.4, true}, {0.4, false}};
    CHECK(roc_auc(flat).auc == doctest::Approx(0.5));
}

TEST_CASE("roc four-example fixture") {
    std::vector<std::pair<double, bool>> s = {
        {0.9, true}, {0.8, false}, {0.7, true}, {0.1, false}};
    // 3 of 4 positive-negative pairs correctly ordered
    CHECK(roc_auc(s).auc == doctest::Approx(0.75));
}

TEST_CASE("roc is monotone and equals mann-whitney on random sets") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> bit(0, 1);
    std::uniform_int_distribution<int> quant(1, 5);
    for (int it = 0; it < 100; ++it) {
        std::vector<std::pair<double, bool>> s;
        int n = 2 + static_cast<int>(rng() % 40);
        for (int i = 0; i < n; ++i) {
            // quantized scores force ties
            double score = (it % 2) ? u(rng) : quant(rng) / 5.0;
            s.push_back({score, bit(rng) == 1});
        }
        s[0].second = true;
        s[1].second = false;
        auto roc = roc_auc(s);
        CHECK(std::abs(roc.auc - mann_whitney(s)) < 1e-9);
        for (size_t i = 1; i < roc.points.size(); ++i) {
            CHECK(roc.points[i].first >= roc.points[i - 1].first);
            CHECK(roc.points[i].second >= roc.points[i - 1].second);
        }
    }
}

TEST_CASE("roc rejects single-class input") {
    std::vector<std::pair<double, bool>> s = {{0.5, true}, {0.6, true}};
    CHECK_THROWS_AS(roc_auc(s), undefined_metric_error);
}

TEST_CASE("fgain") {
    CHECK(fgain(1916636, 457120, 2864208) == doctest::Approx(0.8288).epsilon(1e-3));
    CHECK(fgain(0, 0, 100) == 0.0);
    CHECK(fgain(60, 40, 100) == 1.0);
    CHECK_THROWS_AS(fgain(1, 1, 0), undefined_metric_error);
}

TEST_CASE("infogain perfect, constant, and hand-computed columns") {
    Dataset d;
    d.names = {"same", "flat", "half"};
    // 8 rows; target 4/4; "half" splits into two 4-row bins with 3/1 and 1/3
    double half_vals[8] = {0, 0, 0, 0, 1, 1, 1, 1};
    double targets[8] = {1, 1, 1, 0, 1, 0, 0, 0};
    for (int i = 0; i < 8; ++i) {
        d.rows.push_back({targets[i], 7.0, half_vals[i]});
        d.target.push_back(targets[i]);
    }
    d.finalize();

    double h = 1.0;  // H(4/8 target)
    CHECK(infogain(d, "same", 2) == doctest::Approx(h));
    CHECK(infogain(d, "flat", 2) == doctest::Approx(0.0));
    // hand arithmetic: H=1, H(target|bin)=H(3/4)=0.811278 both bins
    double expected = 1.0 - (-0.75 * std::log2(0.75) - 0.25 * std::log2(0.25));
    CHECK(infogain(d, "half", 2) == doctest::Approx(expected).epsilon(1e-9));
    CHECK_THROWS_AS(infogain(d, "missing", 2), config_error);
}

TEST_CASE("report on a degenerate all-ham accepted run") {
    EmailLog log;
    log.records = {{1, 1.0, 1, 0, 1.0, 0}, {1, 2.0, 1, 0, 1.0, 0}, {2, 3.0, 1, 0, 1.0, 0}};
    log.finalize();
    RunResult res;
    for (size_t i = 0; i < log.records.size(); ++i) {
        EmailOutcome o;
        o.index = i;
        o.t = log.records[i].t;
        o.ip = log.records[i].ip;
        o.spam_class = 0;
        o.accepted = true;
        o.route = i == 0 ? Route::default_accept : Route::wl_hit;
        res.outcomes.push_back(o);
    }
    res.lists.wl_hits = 2;
    TraceEvent e;
    e.type = TraceEvent::Type::verdict;
    e.ip = 1;
    e.action = Action::whitelist;
    e.score = 0.0;
    res.trace.push_back(e);
    Thresholds thr;
    auto rep = report(log, res, thr);
    CHECK(*rep.error == 0.0);
    CHECK(!rep.tpr.has_value());  // no spam existed: undefined, not zero
    CHECK(*rep.fpr == 0.0);
    CHECK(rep.bl_size == 0);
    CHECK(*rep.fgain_value == doctest::Approx(2.0 / 3.0));
    CHECK(!rep.auc.has_value());  // single-class ip population
    auto j = report_to_json(rep);
    CHECK(j["tpr"].is_null());
    CHECK(j["error"] == 0.0);
}
