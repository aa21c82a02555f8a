#pragma once

// Email log data model: one record per received email, identified by the
// sender MTA's IPv4 address, plus CSV parsing/serialization and the
// IP-disjoint train/validation split.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace sendrep {

struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One email-log line. Times are decimal minutes from the log epoch.
struct EmailRecord {
    uint32_t ip = 0;
    double t = 0.0;        ///< receiving time, minutes
    uint32_t nr = 1;       ///< number of recipients, >= 1
    uint32_t ae = 0;       ///< addressing errors
    double pt = 0.0;       ///< CBF processing time, milliseconds
    int spam_class = 0;    ///< 1 = spam, 0 = ham
};

/// Subnet/host identifiers derived from an address: the top 8, 16, 24
/// bits and the full 32-bit value. Each is a prefix of the next.
struct IpFeatures {
    uint32_t ip8 = 0;
    uint32_t ip16 = 0;
    uint32_t ip24 = 0;
    uint32_t ip32 = 0;
};

inline IpFeatures subnet_features(uint32_t ip) {
    return IpFeatures{ip >> 24, ip >> 16, ip >> 8, ip};
}

/// Records non-decreasing in t; ties keep their original order.
struct EmailLog {
    std::vector<EmailRecord> records;
    double duration = 0.0;  ///< span end in minutes; defaults to last t

    void finalize() {
        std::stable_sort(records.begin(), records.end(),
                         [](const EmailRecord& a, const EmailRecord& b) { return a.t < b.t; });
        if (duration <= 0.0 && !records.empty()) duration = records.back().t;
    }

    std::vector<uint32_t> distinct_ips() const {
        std::set<uint32_t> s;
        for (const auto& r : records) s.insert(r.ip);
        return {s.begin(), s.end()};
    }
};

inline std::string format_ip(uint32_t ip) {
    std::ostringstream os;
    os << (ip >> 24) << '.' << ((ip >> 16) & 0xff) << '.' << ((ip >> 8) & 0xff) << '.'
       << (ip & 0xff);
    return os.str();
}

/// Accepts dotted-quad or plain unsigned-integer form.
inline uint32_t parse_ip(const std::string& s) {
    if (s.find('.') == std::string::npos) {
        size_t pos = 0;
        unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size() || v > 0xffffffffull) throw parse_error("bad ip: " + s);
        return static_cast<uint32_t>(v);
    }
    uint32_t ip = 0;
    size_t start = 0;
    for (int i = 0; i < 4; ++i) {
        size_t end = (i < 3) ? s.find('.', start) : s.size();
        if (end == std::string::npos) throw parse_error("bad ip: " + s);
        size_t pos = 0;
        unsigned long v = std::stoul(s.substr(start, end - start), &pos);
        if (pos != end - start || v > 255) throw parse_error("bad ip: " + s);
        ip = (ip << 8) | static_cast<uint32_t>(v);
        start = end + 1;
    }
    return ip;
}

namespace detail {
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}
}  // namespace detail

inline const char* kLogHeader = "ip,t,nr,ae,pt,spam_class";

/// Parses a log CSV. Malformed lines raise parse_error naming the line;
/// non-binary spam_class raises validation_error naming the line.
inline EmailLog parse_log_stream(std::istream& in) {
    EmailLog log;
    std::string line;
    size_t lineno = 0;
    if (!std::getline(in, line)) throw parse_error("empty file: missing header");
    ++lineno;
    // tolerate trailing \r
    std::string hdr = line;
    if (!hdr.empty() && hdr.back() == '\r') hdr.pop_back();
    if (hdr != kLogHeader) throw parse_error("line 1: bad header, expected '" + std::string(kLogHeader) + "'");
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto f = detail::split_csv_line(line);
        if (f.size() != 6)
            throw parse_error("line " + std::to_string(lineno) + ": expected 6 fields, got " +
                              std::to_string(f.size()));
        EmailRecord r;
        try {
            r.ip = parse_ip(f[0]);
            r.t = std::stod(f[1]);
            r.nr = static_cast<uint32_t>(std::stoul(f[2]));
            r.ae = static_cast<uint32_t>(std::stoul(f[3]));
            r.pt = std::stod(f[4]);
            size_t pos = 0;
            long sc = std::stol(f[5], &pos);
            if (pos != f[5].size()) throw std::invalid_argument(f[5]);
            r.spam_class = static_cast<int>(sc);
        } catch (const validation_error&) {
            throw;
        } catch (const std::exception& e) {
            throw parse_error("line " + std::to_string(lineno) + ": " + e.what());
        }
        if (r.spam_class != 0 && r.spam_class != 1)
            throw validation_error("line " + std::to_string(lineno) +
                                   ": spam_class must be 0 or 1, got " + f[5]);
        if (r.t < 0)
            throw validation_error("line " + std::to_string(lineno) + ": negative timestamp");
        if (r.nr < 1)
            throw validation_error("line " + std::to_string(lineno) + ": nr must be >= 1");
        if (r.pt < 0)
            throw validation_error("line " + std::to_string(lineno) + ": negative pt");
        log.records.push_back(r);
    }
    log.finalize();
    return log;
}

inline EmailLog parse_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open " + path);
    return parse_log_stream(in);
}

inline void write_log_stream(const EmailLog& log, std::ostream& out) {
    out << kLogHeader << '\n';
    for (const auto& r : log.records)
        out << format_ip(r.ip) << ',' << r.t << ',' << r.nr << ',' << r.ae << ',' << r.pt << ','
            << r.spam_class << '\n';
}

inline void write_log(const EmailLog& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write " + path);
    write_log_stream(log, out);
}

/// Assigns every distinct IP wholly to one side; approximately `fraction`
/// of the distinct IPs land in the first output. Deterministic per seed.
inline std::pair<EmailLog, EmailLog> split_by_ip(const EmailLog& log, double fraction,
                                                 uint64_t seed) {
    auto ips = log.distinct_ips();
    std::mt19937_64 rng(seed);
    std::shuffle(ips.begin(), ips.end(), rng);
    size_t k = static_cast<size_t>(std::llround(fraction * static_cast<double>(ips.size())));
    if (k > ips.size()) k = ips.size();
    std::unordered_set<uint32_t> first(ips.begin(), ips.begin() + static_cast<long>(k));
    EmailLog a, b;
    a.duration = b.duration = log.duration;
    for (const auto& r : log.records)
        (first.count(r.ip) ? a : b).records.push_back(r);
    return {std::move(a), std::move(b)};
}

}  // namespace sendrep
