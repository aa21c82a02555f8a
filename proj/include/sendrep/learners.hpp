#pragma once

// In-repo learners: Gaussian naive Bayes, logistic regression trained by
// full-batch gradient descent, and a depth-limited decision tree. All three
// expose a calibrated score in [0,1]. Training is deterministic: fixed
// initialization, fixed iteration counts, no subsampling.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sendrep/dataset.hpp"

namespace sendrep {

enum class LearnerKind { naive_bayes, logistic, tree };

inline const char* to_string(LearnerKind k) {
    switch (k) {
        case LearnerKind::naive_bayes: return "naive-bayes";
        case LearnerKind::logistic: return "logistic";
        case LearnerKind::tree: return "tree";
    }
    return "?";
}

inline LearnerKind learner_from_string(const std::string& s) {
    if (s == "naive-bayes") return LearnerKind::naive_bayes;
    if (s == "logistic") return LearnerKind::logistic;
    if (s == "tree") return LearnerKind::tree;
    throw config_error("unknown learner: " + s);
}

struct Hyperparams {
    int logistic_iters = 500;
    double learning_rate = 0.1;
    int max_depth = 4;
    size_t min_leaf = 1;
    double var_floor = 1e-9;  ///< Gaussian variance floor, survives constant features
};

struct degenerate_model_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct schema_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

struct NbParams {
    double prior1 = 0.5;
    std::vector<double> mean0, var0, mean1, var1;
};

struct LogisticParams {
    std::vector<double> w;
    double bias = 0;
    std::vector<double> mu, sd;  ///< training standardization
};

struct TreeNode {
    int feature = -1;  ///< -1 marks a leaf
    double threshold = 0;
    double value = 0;  ///< leaf prediction: mean target of routed rows
    std::unique_ptr<TreeNode> left, right;
};

struct TreeParams {
    std::unique_ptr<TreeNode> root;
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace detail

class Model {
public:
    LearnerKind kind = LearnerKind::naive_bayes;
    bool regression = false;  ///< tree regressors predict unclipped leaf means
    std::vector<std::string> columns;

    detail::NbParams nb;
    detail::LogisticParams lr;
    detail::TreeParams tree;

    void check_row(const std::vector<double>& row) const {
        if (row.size() != columns.size())
            throw schema_error("row width " + std::to_string(row.size()) +
                               " != model schema width " + std::to_string(columns.size()));
    }
    void check_schema(const std::vector<std::string>& names) const {
        if (names != columns) throw schema_error("column names differ from training schema");
    }

    /// log P(class|row) pair, normalized
    std::pair<double, double> nb_log_posteriors(const std::vector<double>& row) const {
        double l0 = std::log(1.0 - nb.prior1);
        double l1 = std::log(nb.prior1);
        for (size_t j = 0; j < row.size(); ++j) {
            auto logn = [](double x, double m, double v) {
                double d = x - m;
                return -0.5 * (std::log(2.0 * M_PI * v) + d * d / v);
            };
            l0 += logn(row[j], nb.mean0[j], nb.var0[j]);
            l1 += logn(row[j], nb.mean1[j], nb.var1[j]);
        }
        double mx = std::max(l0, l1);
        double z = std::log(std::exp(l0 - mx) + std::exp(l1 - mx)) + mx;
        return {l0 - z, l1 - z};
    }

    double predict(const std::vector<double>& row) const {
        check_row(row);
        switch (kind) {
            case LearnerKind::naive_bayes:
                return std::exp(nb_log_posteriors(row).second);
            case LearnerKind::logistic: {
                double z = lr.bias;
                for (size_t j = 0; j < row.size(); ++j)
                    z += lr.w[j] * (row[j] - lr.mu[j]) / lr.sd[j];
                return detail::sigmoid(z);
            }
            case LearnerKind::tree: {
                const detail::TreeNode* node = tree.root.get();
                while (node->feature >= 0)
                    node = (row[static_cast<size_t>(node->feature)] <= node->threshold)
                               ? node->left.get()
                               : node->right.get();
                return node->value;
            }
        }
        return 0.5;
    }
};

/// Probability-like score in [0,1]; thresholding at 0.5 gives the hard class.
inline double predict_score(const Model& m, const std::vector<double>& row) {
    double p = m.predict(row);
    if (m.regression) return p;  // raw magnitude for regressors
    return std::clamp(p, 0.0, 1.0);
}

namespace detail {

inline void fit_gaussians(const Dataset& d, int cls, double var_floor, std::vector<double>& mean,
                          std::vector<double>& var) {
    size_t cols = d.num_cols();
    mean.assign(cols, 0.0);
    var.assign(cols, 0.0);
    size_t n = 0;
    for (size_t i = 0; i < d.num_rows(); ++i) {
        if (static_cast<int>(d.target[i]) != cls) continue;
        ++n;
        for (size_t j = 0; j < cols; ++j) mean[j] += d.rows[i][j];
    }
    for (size_t j = 0; j < cols; ++j) mean[j] /= static_cast<double>(n);
    for (size_t i = 0; i < d.num_rows(); ++i) {
        if (static_cast<int>(d.target[i]) != cls) continue;
        for (size_t j = 0; j < cols; ++j) {
            double dv = d.rows[i][j] - mean[j];
            var[j] += dv * dv;
        }
    }
    for (size_t j = 0; j < cols; ++j) var[j] = std::max(var[j] / static_cast<double>(n), var_floor);
}

inline Model train_naive_bayes(const Dataset& d, const Hyperparams& hp) {
    Model m;
    m.kind = LearnerKind::naive_bayes;
    m.columns = d.names;
    size_t n1 = 0;
    for (double y : d.target) n1 += static_cast<size_t>(y);
    m.nb.prior1 = static_cast<double>(n1) / static_cast<double>(d.num_rows());
    fit_gaussians(d, 0, hp.var_floor, m.nb.mean0, m.nb.var0);
    fit_gaussians(d, 1, hp.var_floor, m.nb.mean1, m.nb.var1);
    return m;
}

/// Gradient of the mean cross-entropy loss at (w, bias) on standardized
/// features. Shared with the finite-difference check in tests.
inline void logistic_gradient(const std::vector<std::vector<double>>& x,
                              const std::vector<double>& y, const std::vector<double>& w,
                              double bias, std::vector<double>& gw, double& gb) {
    size_t mrows = x.size(), cols = w.size();
    gw.assign(cols, 0.0);
    gb = 0.0;
    for (size_t i = 0; i < mrows; ++i) {
        double z = bias;
        for (size_t j = 0; j < cols; ++j) z += w[j] * x[i][j];
        double err = sigmoid(z) - y[i];
        for (size_t j = 0; j < cols; ++j) gw[j] += err * x[i][j];
        gb += err;
    }
    double inv = 1.0 / static_cast<double>(mrows);
    for (auto& g : gw) g *= inv;
    gb *= inv;
}

inline double logistic_loss(const std::vector<std::vector<double>>& x,
                            const std::vector<double>& y, const std::vector<double>& w,
                            double bias) {
    double loss = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        double z = bias;
        for (size_t j = 0; j < w.size(); ++j) z += w[j] * x[i][j];
        // numerically stable log(1+e^z) - y*z
        loss += (z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) - y[i] * z;
    }
    return loss / static_cast<double>(x.size());
}

inline Model train_logistic(const Dataset& d, const Hyperparams& hp) {
    Model m;
    m.kind = LearnerKind::logistic;
    m.columns = d.names;
    size_t cols = d.num_cols(), n = d.num_rows();
    m.lr.mu.assign(cols, 0.0);
    m.lr.sd.assign(cols, 1.0);
    for (const auto& r : d.rows)
        for (size_t j = 0; j < cols; ++j) m.lr.mu[j] += r[j];
    for (auto& v : m.lr.mu) v /= static_cast<double>(n);
    std::vector<double> var(cols, 0.0);
    for (const auto& r : d.rows)
        for (size_t j = 0; j < cols; ++j) {
            double dv = r[j] - m.lr.mu[j];
            var[j] += dv * dv;
        }
    for (size_t j = 0; j < cols; ++j) {
        double sd = std::sqrt(var[j] / static_cast<double>(n));
        m.lr.sd[j] = sd > 1e-12 ? sd : 1.0;
    }
    std::vector<std::vector<double>> x(n, std::vector<double>(cols));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < cols; ++j) x[i][j] = (d.rows[i][j] - m.lr.mu[j]) / m.lr.sd[j];

    m.lr.w.assign(cols, 0.0);
    m.lr.bias = 0.0;
    std::vector<double> gw;
    double gb = 0;
    for (int it = 0; it < hp.logistic_iters; ++it) {
        logistic_gradient(x, d.target, m.lr.w, m.lr.bias, gw, gb);
        for (size_t j = 0; j < cols; ++j) m.lr.w[j] -= hp.learning_rate * gw[j];
        m.lr.bias -= hp.learning_rate * gb;
    }
    return m;
}

inline std::unique_ptr<TreeNode> grow_tree(const Dataset& d, std::vector<size_t> idx, int depth,
                                           const Hyperparams& hp) {
    auto node = std::make_unique<TreeNode>();
    double sum = 0;
    for (size_t i : idx) sum += d.target[i];
    node->value = sum / static_cast<double>(idx.size());

    if (depth >= hp.max_depth || idx.size() < 2 * hp.min_leaf || idx.size() < 2) return node;

    double base_sse = 0;
    for (size_t i : idx) {
        double dv = d.target[i] - node->value;
        base_sse += dv * dv;
    }
    if (base_sse <= 1e-12) return node;

    int best_feat = -1;
    double best_thr = 0, best_gain = 1e-12;
    std::vector<std::pair<double, double>> col(idx.size());  // (x, y)
    for (size_t j = 0; j < d.num_cols(); ++j) {
        for (size_t k = 0; k < idx.size(); ++k)
            col[k] = {d.rows[idx[k]][j], d.target[idx[k]]};
        std::sort(col.begin(), col.end());
        double left_sum = 0, left_sq = 0;
        double tot_sum = 0, tot_sq = 0;
        for (auto& [x, y] : col) {
            tot_sum += y;
            tot_sq += y * y;
        }
        size_t n = col.size();
        for (size_t k = 0; k + 1 < n; ++k) {
            left_sum += col[k].second;
            left_sq += col[k].second * col[k].second;
            if (col[k].first == col[k + 1].first) continue;
            size_t nl = k + 1, nr = n - nl;
            if (nl < hp.min_leaf || nr < hp.min_leaf) continue;
            double rs = tot_sum - left_sum, rq = tot_sq - left_sq;
            double sse = (left_sq - left_sum * left_sum / static_cast<double>(nl)) +
                         (rq - rs * rs / static_cast<double>(nr));
            double gain = base_sse - sse;
            if (gain > best_gain) {
                best_gain = gain;
                best_feat = static_cast<int>(j);
                best_thr = 0.5 * (col[k].first + col[k + 1].first);
            }
        }
    }
    if (best_feat < 0) return node;

    std::vector<size_t> li, ri;
    for (size_t i : idx)
        (d.rows[i][static_cast<size_t>(best_feat)] <= best_thr ? li : ri).push_back(i);
    if (li.empty() || ri.empty()) return node;
    node->feature = best_feat;
    node->threshold = best_thr;
    node->left = grow_tree(d, std::move(li), depth + 1, hp);
    node->right = grow_tree(d, std::move(ri), depth + 1, hp);
    return node;
}

inline Model train_tree(const Dataset& d, const Hyperparams& hp) {
    Model m;
    m.kind = LearnerKind::tree;
    m.columns = d.names;
    std::vector<size_t> idx(d.num_rows());
    std::iota(idx.begin(), idx.end(), 0);
    m.tree.root = grow_tree(d, std::move(idx), 0, hp);
    return m;
}

inline void require_trainable(const Dataset& d) {
    if (d.num_rows() < 2) throw degenerate_model_error("need at least 2 training rows");
    if (d.rows.empty() || d.rows[0].size() != d.names.size())
        throw schema_error("dataset rows do not match column names");
}

}  // namespace detail

/// Binary classifier training; targets must be 0/1 with both classes present.
inline Model train(LearnerKind kind, const Dataset& d, const Hyperparams& hp = {}) {
    detail::require_trainable(d);
    bool has0 = false, has1 = false;
    for (double y : d.target) {
        if (y == 0.0) has0 = true;
        else if (y == 1.0) has1 = true;
        else throw validation_error("classification targets must be 0 or 1");
    }
    if (!has0 || !has1)
        throw degenerate_model_error("single-class training set");
    switch (kind) {
        case LearnerKind::naive_bayes: return detail::train_naive_bayes(d, hp);
        case LearnerKind::logistic: return detail::train_logistic(d, hp);
        case LearnerKind::tree: return detail::train_tree(d, hp);
    }
    throw config_error("unknown learner kind");
}

enum class RegressorKind { logistic_on_threshold, tree };

/// Non-negative target regression. The tree predicts leaf means; the
/// logistic-on-threshold variant predicts P(target > epsilon).
inline Model train_regressor(RegressorKind kind, const Dataset& d, const Hyperparams& hp = {},
                             double epsilon = 0.5) {
    detail::require_trainable(d);
    if (kind == RegressorKind::tree) {
        Model m = detail::train_tree(d, hp);
        m.regression = true;
        return m;
    }
    Dataset bin = d;
    for (auto& y : bin.target) y = (y > epsilon) ? 1.0 : 0.0;
    return train(LearnerKind::logistic, bin, hp);
}

// --- JSON dump/load (experiment resumption) ---

namespace detail {
inline nlohmann::json tree_to_json(const TreeNode* n) {
    nlohmann::json j;
    if (n->feature < 0) {
        j["value"] = n->value;
    } else {
        j["feature"] = n->feature;
        j["threshold"] = n->threshold;
        j["value"] = n->value;
        j["left"] = tree_to_json(n->left.get());
        j["right"] = tree_to_json(n->right.get());
    }
    return j;
}
inline std::unique_ptr<TreeNode> tree_from_json(const nlohmann::json& j) {
    auto n = std::make_unique<TreeNode>();
    n->value = j.at("value").get<double>();
    if (j.contains("feature")) {
        n->feature = j.at("feature").get<int>();
        n->threshold = j.at("threshold").get<double>();
        n->left = tree_from_json(j.at("left"));
        n->right = tree_from_json(j.at("right"));
    }
    return n;
}
}  // namespace detail

inline nlohmann::json model_to_json(const Model& m) {
    nlohmann::json j;
    j["kind"] = to_string(m.kind);
    j["regression"] = m.regression;
    j["columns"] = m.columns;
    switch (m.kind) {
        case LearnerKind::naive_bayes:
            j["prior1"] = m.nb.prior1;
            j["mean0"] = m.nb.mean0;
            j["var0"] = m.nb.var0;
            j["mean1"] = m.nb.mean1;
            j["var1"] = m.nb.var1;
            break;
        case LearnerKind::logistic:
            j["w"] = m.lr.w;
            j["bias"] = m.lr.bias;
            j["mu"] = m.lr.mu;
            j["sd"] = m.lr.sd;
            break;
        case LearnerKind::tree:
            j["tree"] = detail::tree_to_json(m.tree.root.get());
            break;
    }
    return j;
}

inline Model model_from_json(const nlohmann::json& j) {
    Model m;
    m.kind = learner_from_string(j.at("kind").get<std::string>());
    m.regression = j.value("regression", false);
    m.columns = j.at("columns").get<std::vector<std::string>>();
    switch (m.kind) {
        case LearnerKind::naive_bayes:
            m.nb.prior1 = j.at("prior1").get<double>();
            m.nb.mean0 = j.at("mean0").get<std::vector<double>>();
            m.nb.var0 = j.at("var0").get<std::vector<double>>();
            m.nb.mean1 = j.at("mean1").get<std::vector<double>>();
            m.nb.var1 = j.at("var1").get<std::vector<double>>();
            break;
        case LearnerKind::logistic:
            m.lr.w = j.at("w").get<std::vector<double>>();
            m.lr.bias = j.at("bias").get<double>();
            m.lr.mu = j.at("mu").get<std::vector<double>>();
            m.lr.sd = j.at("sd").get<std::vector<double>>();
            break;
        case LearnerKind::tree:
            m.tree.root = detail::tree_from_json(j.at("tree"));
            break;
    }
    return m;
}

}  // namespace sendrep
