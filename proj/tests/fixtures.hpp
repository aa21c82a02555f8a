#pragma once

// Shared fixtures and independent brute-force oracles for the test suites.
// Oracles here deliberately avoid the library's prefix-sum machinery.

#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include "sendrep/email_log.hpp"

namespace fixtures {

using sendrep::EmailLog;
using sendrep::EmailRecord;

inline constexpr uint32_t IP1 = 0x0a000001;  // 10.0.0.1
inline constexpr uint32_t IP2 = 0x0a000002;  // 10.0.0.2
inline constexpr uint32_t IP3 = 0x0a000003;  // 10.0.0.3

/// Ten-row example log: (ip, t, ae, spam_class); nr/pt are filler values.
inline EmailLog example_log() {
    struct Row {
        uint32_t ip;
        double t;
        uint32_t ae;
        int spam;
    };
    const Row rows[] = {
        {IP1, 1.0, 6, 0},  {IP1, 1.5, 2, 0}, {IP1, 2.8, 3, 1},  {IP1, 4.1, 0, 0},
        {IP1, 5.5, 2, 0},  {IP1, 6.3, 2, 0}, {IP1, 7.1, 57, 1}, {IP1, 7.9, 48, 1},
        {IP3, 9.0, 53, 1}, {IP2, 11.0, 2, 0},
    };
    EmailLog log;
    for (const auto& r : rows) log.records.push_back({r.ip, r.t, 1, r.ae, 10.0, r.spam});
    log.finalize();
    return log;
}

inline std::string example_log_csv() {
    std::ostringstream os;
    sendrep::write_log_stream(example_log(), os);
    return os.str();
}

// --- brute-force oracles (independent scans over raw records) ---

inline std::vector<EmailRecord> in_window(const EmailLog& log, uint32_t ip, double start,
                                          double end) {
    std::vector<EmailRecord> out;
    for (const auto& r : log.records)
        if (r.ip == ip && r.t > start && r.t <= end) out.push_back(r);
    return out;
}

inline std::optional<double> brute_spammingness(const EmailLog& log, uint32_t ip, double start,
                                                double end) {
    auto recs = in_window(log, ip, start, end);
    if (recs.empty()) return std::nullopt;
    long spam = 0;
    for (const auto& r : recs) spam += r.spam_class;
    return static_cast<double>(spam) / static_cast<double>(recs.size());
}

inline std::optional<long> brute_erraticness(const EmailLog& log, uint32_t ip, double start,
                                             double end) {
    auto recs = in_window(log, ip, start, end);
    if (recs.empty()) return std::nullopt;
    long flips = 0;
    for (size_t i = 1; i < recs.size(); ++i)
        if (recs[i].spam_class != recs[i - 1].spam_class) ++flips;
    return flips;
}

/// Small random multi-IP log for oracle-equivalence property tests.
inline EmailLog random_micro_log(std::mt19937_64& rng, size_t max_emails = 50, size_t max_ips = 5) {
    std::uniform_int_distribution<size_t> n_emails(1, max_emails);
    std::uniform_int_distribution<uint32_t> ip_pick(1, static_cast<uint32_t>(max_ips));
    std::uniform_real_distribution<double> time(0.0, 20.0);
    std::uniform_int_distribution<int> label(0, 1);
    std::uniform_int_distribution<uint32_t> count(0, 5);
    EmailLog log;
    size_t n = n_emails(rng);
    for (size_t i = 0; i < n; ++i)
        log.records.push_back({ip_pick(rng), time(rng), 1 + count(rng), count(rng), 5.0,
                               label(rng)});
    log.finalize();
    return log;
}

}  // namespace fixtures
