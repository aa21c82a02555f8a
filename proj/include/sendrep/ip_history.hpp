#pragma once

// Append-only per-IP email history with prefix sums, so any half-open
// window (start, end] can be aggregated in O(log n). Windows everywhere in
// this project are start-exclusive / end-inclusive.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sendrep/email_log.hpp"

namespace sendrep {

struct WindowStats {
    size_t count = 0;
    double sum_nr = 0, sq_nr = 0;
    double sum_ae = 0, sq_ae = 0;
    double sum_pt = 0, sq_pt = 0;
    double sum_spam = 0;
    size_t flips = 0;  ///< adjacent spam/ham label changes within the window
};

class IpHistory {
public:
    void append(const EmailRecord& r) {
        if (!t_.empty() && r.t < t_.back())
            throw std::invalid_argument("IpHistory: timestamps must be non-decreasing");
        t_.push_back(r.t);
        push(nr_, sq_nr_, r.nr);
        push(ae_, sq_ae_, r.ae);
        push(pt_, sq_pt_, r.pt);
        spam_.push_back((spam_.empty() ? 0.0 : spam_.back()) + r.spam_class);
        bool flip = last_class_ >= 0 && last_class_ != r.spam_class;
        flips_.push_back((flips_.empty() ? 0 : flips_.back()) + (flip ? 1 : 0));
        last_class_ = r.spam_class;
    }

    size_t size() const { return t_.size(); }
    double last_time() const { return t_.empty() ? 0.0 : t_.back(); }

    /// Aggregates over records with start < t <= end.
    WindowStats window(double start, double end) const {
        size_t lo = std::upper_bound(t_.begin(), t_.end(), start) - t_.begin();
        size_t hi = std::upper_bound(t_.begin(), t_.end(), end) - t_.begin();
        WindowStats w;
        if (lo >= hi) return w;
        w.count = hi - lo;
        w.sum_nr = at(nr_, hi) - at(nr_, lo);
        w.sq_nr = at(sq_nr_, hi) - at(sq_nr_, lo);
        w.sum_ae = at(ae_, hi) - at(ae_, lo);
        w.sq_ae = at(sq_ae_, hi) - at(sq_ae_, lo);
        w.sum_pt = at(pt_, hi) - at(pt_, lo);
        w.sq_pt = at(sq_pt_, hi) - at(sq_pt_, lo);
        w.sum_spam = at(spam_, hi) - at(spam_, lo);
        // flips_[k] compares record k with k-1; only pairs fully inside count
        w.flips = static_cast<size_t>(at(flips_, hi) - at(flips_, lo + 1));
        return w;
    }

private:
    static void push(std::vector<double>& sum, std::vector<double>& sq, double v) {
        sum.push_back((sum.empty() ? 0.0 : sum.back()) + v);
        sq.push_back((sq.empty() ? 0.0 : sq.back()) + v * v);
    }
    template <class V>
    static double at(const V& prefix, size_t i) {
        return i == 0 ? 0.0 : static_cast<double>(prefix[i - 1]);
    }

    std::vector<double> t_;
    std::vector<double> nr_, sq_nr_, ae_, sq_ae_, pt_, sq_pt_, spam_;
    std::vector<long> flips_;
    int last_class_ = -1;
};

}  // namespace sendrep
