#pragma once

// Named-column feature matrix with a float target vector, the common input
// of all learners.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "sendrep/email_log.hpp"

namespace sendrep {

struct Dataset {
    std::vector<std::string> names;
    std::vector<std::vector<double>> rows;
    std::vector<double> target;

    size_t num_rows() const { return rows.size(); }
    size_t num_cols() const { return names.size(); }

    /// Replaces NaN/inf entries by 0 and, for each affected column, appends
    /// a companion 0/1 column flagging the imputed rows. Throws on
    /// non-finite targets and shape mismatches.
    void finalize() {
        if (rows.size() != target.size())
            throw validation_error("dataset: row count != target length");
        for (double y : target)
            if (!std::isfinite(y)) throw validation_error("dataset: non-finite target");
        std::vector<char> bad(names.size(), 0);
        for (auto& r : rows) {
            if (r.size() != names.size())
                throw validation_error("dataset: row width != column count");
            for (size_t j = 0; j < r.size(); ++j)
                if (!std::isfinite(r[j])) bad[j] = 1;
        }
        for (size_t j = 0; j < bad.size(); ++j) {
            if (!bad[j]) continue;
            names.push_back(names[j] + "_missing");
            for (auto& r : rows) {
                bool miss = !std::isfinite(r[j]);
                if (miss) r[j] = 0.0;
                r.push_back(miss ? 1.0 : 0.0);
            }
        }
    }
};

}  // namespace sendrep
