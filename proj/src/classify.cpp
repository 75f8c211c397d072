#include "rumble/classify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "rumble/errors.hpp"
#include "rumble/rng.hpp"

namespace rumble::classify {

namespace {

using features::FeatureKind;
using features::Label;

double target_pm1(Label label) { return label == Label::Rumble ? 1.0 : -1.0; }

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Gaussian elimination with partial pivoting.
std::vector<double> solve_linear(std::vector<std::vector<double>> a, std::vector<double> rhs) {
    const std::size_t n = rhs.size();
    double amax = 0.0;
    for (const auto& row : a)
        for (double v : row) amax = std::max(amax, std::abs(v));
    const double tol = std::max(amax, 1.0) * 1e-12;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < tol) throw NumericError("singular normal equations");
        std::swap(a[col], a[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double acc = rhs[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= a[i][c] * x[c];
        x[i] = acc / a[i][i];
    }
    return x;
}

struct DesignMatrix {
    std::vector<std::vector<double>> x;  // standardized rows
    std::vector<double> y;               // +1 rumble, -1 background
};

DesignMatrix standardized_design(const Dataset& train, const Standardization& st) {
    DesignMatrix d;
    d.x.reserve(train.size());
    d.y.reserve(train.size());
    for (const auto& row : train.rows) {
        d.x.push_back(standardize(st, row.values));
        d.y.push_back(target_pm1(row.label));
    }
    return d;
}

void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[rng.below(i)]);
}

std::string percent_cell(const std::optional<double>& v, bool implemented) {
    if (!implemented) return "-";
    if (!v) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f %%", *v * 100.0);
    return buf;
}

std::string number_or_empty(const std::optional<double>& v) {
    if (!v) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", *v);
    return buf;
}

}  // namespace

std::size_t Dataset::dim() const {
    if (rows.empty()) throw DataError("empty dataset");
    return rows.front().values.size();
}

FeatureKind Dataset::kind() const {
    if (rows.empty()) throw DataError("empty dataset");
    return rows.front().kind;
}

std::size_t Dataset::count(Label label) const {
    std::size_t n = 0;
    for (const auto& row : rows)
        if (row.label == label) ++n;
    return n;
}

void Dataset::validate() const {
    if (rows.empty()) throw DataError("empty dataset");
    const FeatureKind k = rows.front().kind;
    const std::size_t d = rows.front().values.size();
    for (const auto& row : rows) {
        row.validate();
        if (row.kind != k) throw DataError("dataset mixes feature kinds");
        if (row.values.size() != d) throw DataError("dataset mixes feature dimensions");
    }
}

void Dataset::validate_for_training() const {
    validate();
    if (count(Label::Rumble) == 0 || count(Label::Background) == 0)
        throw DataError("training data must contain both classes");
}

Standardization fit_standardization(const Dataset& train) {
    train.validate();
    const std::size_t n = train.size();
    const std::size_t d = train.dim();
    Standardization st;
    st.means.assign(d, 0.0);
    st.stds.assign(d, 0.0);
    for (const auto& row : train.rows)
        for (std::size_t j = 0; j < d; ++j) st.means[j] += row.values[j];
    for (std::size_t j = 0; j < d; ++j) st.means[j] /= static_cast<double>(n);
    for (const auto& row : train.rows)
        for (std::size_t j = 0; j < d; ++j) {
            const double c = row.values[j] - st.means[j];
            st.stds[j] += c * c;
        }
    for (std::size_t j = 0; j < d; ++j) {
        double sd = std::sqrt(st.stds[j] / static_cast<double>(n));
        if (sd <= 1e-12 * std::max(1.0, std::abs(st.means[j]))) sd = 1.0;
        st.stds[j] = sd;
    }
    return st;
}

std::vector<double> standardize(const Standardization& st, const std::vector<double>& x) {
    if (x.size() != st.means.size()) throw SizeError("feature dimension mismatch");
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - st.means[j]) / st.stds[j];
    return out;
}

std::string linear_kind_name(LinearModel::Kind kind) {
    switch (kind) {
        case LinearModel::Kind::Ridge: return "ridge";
        case LinearModel::Kind::SvmLinear: return "svm_linear";
        case LinearModel::Kind::Logistic: return "logistic";
    }
    throw DataError("unknown linear model kind");
}

LinearModel::Kind linear_kind_from_name(const std::string& name) {
    if (name == "ridge") return LinearModel::Kind::Ridge;
    if (name == "svm_linear") return LinearModel::Kind::SvmLinear;
    if (name == "logistic") return LinearModel::Kind::Logistic;
    throw DataError("unknown linear model kind: " + name);
}

LinearModel train_ridge(const Dataset& train, double alpha) {
    train.validate_for_training();
    if (!std::isfinite(alpha) || alpha < 0.0)
        throw ConfigError("ridge alpha must be finite and nonnegative");

    const auto st = fit_standardization(train);
    const auto design = standardized_design(train, st);
    const std::size_t d = train.dim();
    const std::size_t m = d + 1;  // bias column appended last

    std::vector<std::vector<double>> a(m, std::vector<double>(m, 0.0));
    std::vector<double> rhs(m, 0.0);
    for (std::size_t i = 0; i < design.x.size(); ++i) {
        std::vector<double> z = design.x[i];
        z.push_back(1.0);
        for (std::size_t r = 0; r < m; ++r) {
            rhs[r] += z[r] * design.y[i];
            for (std::size_t c = 0; c < m; ++c) a[r][c] += z[r] * z[c];
        }
    }
    for (std::size_t j = 0; j < d; ++j) a[j][j] += alpha;  // bias stays unregularized

    const auto w = solve_linear(std::move(a), std::move(rhs));

    LinearModel model;
    model.kind = LinearModel::Kind::Ridge;
    model.weights.assign(w.begin(), w.end() - 1);
    model.bias = w.back();
    model.hyperparams = {{"alpha", alpha}};
    model.standardization = st;
    return model;
}

LinearModel train_svm_linear(const Dataset& train, double c, std::size_t epochs, double step,
                             std::vector<double>* objective_trace) {
    train.validate_for_training();
    if (!std::isfinite(c) || c <= 0.0) throw ConfigError("svm C must be positive");
    if (!std::isfinite(step) || step <= 0.0) throw ConfigError("svm step must be positive");

    const auto st = fit_standardization(train);
    const auto design = standardized_design(train, st);
    const std::size_t n = design.x.size();
    const std::size_t d = train.dim();

    std::vector<double> w(d, 0.0);
    double b = 0.0;

    auto objective = [&](const std::vector<double>& wv, double bv) {
        double reg = 0.0;
        for (double v : wv) reg += v * v;
        double hinge = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double z = bv;
            for (std::size_t j = 0; j < d; ++j) z += wv[j] * design.x[i][j];
            hinge += std::max(0.0, 1.0 - design.y[i] * z);
        }
        return 0.5 * reg + c * hinge / static_cast<double>(n);
    };

    double obj = objective(w, b);
    if (objective_trace) {
        objective_trace->clear();
        objective_trace->push_back(obj);
    }

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        std::vector<double> gw = w;
        double gb = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double z = b;
            for (std::size_t j = 0; j < d; ++j) z += w[j] * design.x[i][j];
            if (design.y[i] * z < 1.0) {
                const double f = c * design.y[i] / static_cast<double>(n);
                for (std::size_t j = 0; j < d; ++j) gw[j] -= f * design.x[i][j];
                gb -= f;
            }
        }

        // halve the step until the move no longer increases the objective
        bool accepted = false;
        double t = step;
        for (int half = 0; half < 40 && !accepted; ++half) {
            std::vector<double> wc(d);
            for (std::size_t j = 0; j < d; ++j) wc[j] = w[j] - t * gw[j];
            const double bc = b - t * gb;
            const double cand = objective(wc, bc);
            if (cand <= obj) {
                w = std::move(wc);
                b = bc;
                obj = cand;
                accepted = true;
            } else {
                t *= 0.5;
            }
        }
        if (objective_trace) objective_trace->push_back(obj);
        if (!accepted) break;
    }

    LinearModel model;
    model.kind = LinearModel::Kind::SvmLinear;
    model.weights = std::move(w);
    model.bias = b;
    model.hyperparams = {{"c", c},
                         {"epochs", static_cast<double>(epochs)},
                         {"step", step}};
    model.standardization = st;
    return model;
}

LinearModel train_logistic(const Dataset& train, double step, std::size_t epochs) {
    train.validate_for_training();
    if (!std::isfinite(step) || step <= 0.0) throw ConfigError("logistic step must be positive");

    const auto st = fit_standardization(train);
    const auto design = standardized_design(train, st);
    const std::size_t n = design.x.size();
    const std::size_t d = train.dim();

    std::vector<double> w(d, 0.0);
    double b = 0.0;
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        std::vector<double> gw(d, 0.0);
        double gb = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double z = b;
            for (std::size_t j = 0; j < d; ++j) z += w[j] * design.x[i][j];
            const double y01 = design.y[i] > 0.0 ? 1.0 : 0.0;
            const double err = (sigmoid(z) - y01) / static_cast<double>(n);
            for (std::size_t j = 0; j < d; ++j) gw[j] += err * design.x[i][j];
            gb += err;
        }
        for (std::size_t j = 0; j < d; ++j) w[j] -= step * gw[j];
        b -= step * gb;
    }

    LinearModel model;
    model.kind = LinearModel::Kind::Logistic;
    model.weights = std::move(w);
    model.bias = b;
    model.hyperparams = {{"step", step}, {"epochs", static_cast<double>(epochs)}};
    model.standardization = st;
    return model;
}

namespace {

double gini(std::size_t pos, std::size_t n) {
    if (n == 0) return 0.0;
    const double p = static_cast<double>(pos) / static_cast<double>(n);
    return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

int build_tree(std::vector<TreeNode>& nodes, const Dataset& train,
               const std::vector<std::size_t>& idx, std::size_t depth, std::size_t max_depth) {
    const std::size_t n = idx.size();
    std::size_t pos = 0;
    for (std::size_t i : idx)
        if (train.rows[i].label == Label::Rumble) ++pos;

    auto make_leaf = [&]() {
        TreeNode leaf;
        leaf.leaf = 2 * pos >= n ? Label::Rumble : Label::Background;
        nodes.push_back(leaf);
        return static_cast<int>(nodes.size() - 1);
    };

    if (pos == 0 || pos == n || depth >= max_depth) return make_leaf();

    const std::size_t d = train.dim();
    const double parent = gini(pos, n);
    bool found = false;
    std::size_t best_feature = 0;
    double best_threshold = 0.0;
    double best_gain = -std::numeric_limits<double>::infinity();

    std::vector<std::pair<double, bool>> vals(n);  // (value, is rumble)
    for (std::size_t f = 0; f < d; ++f) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto& row = train.rows[idx[i]];
            vals[i] = {row.values[f], row.label == Label::Rumble};
        }
        std::sort(vals.begin(), vals.end());
        std::size_t left_pos = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (vals[i].second) ++left_pos;
            if (vals[i].first == vals[i + 1].first) continue;
            const std::size_t nl = i + 1;
            const std::size_t nr = n - nl;
            const double child = (static_cast<double>(nl) * gini(left_pos, nl) +
                                  static_cast<double>(nr) * gini(pos - left_pos, nr)) /
                                 static_cast<double>(n);
            const double gain = parent - child;
            if (!found || gain > best_gain) {
                found = true;
                best_feature = f;
                best_threshold = 0.5 * (vals[i].first + vals[i + 1].first);
                best_gain = gain;
            }
        }
    }

    if (!found) return make_leaf();  // every feature constant on this node

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : idx) {
        if (train.rows[i].values[best_feature] <= best_threshold)
            left_idx.push_back(i);
        else
            right_idx.push_back(i);
    }

    TreeNode node;
    node.feature = static_cast<int>(best_feature);
    node.threshold = best_threshold;
    nodes.push_back(node);
    const int self = static_cast<int>(nodes.size() - 1);
    const int left = build_tree(nodes, train, left_idx, depth + 1, max_depth);
    nodes[self].left = left;
    const int right = build_tree(nodes, train, right_idx, depth + 1, max_depth);
    nodes[self].right = right;
    return self;
}

}  // namespace

TreeModel train_tree(const Dataset& train, std::size_t max_depth) {
    // A single-class set is legal here and collapses to one leaf.
    train.validate();

    std::vector<std::size_t> idx(train.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;

    TreeModel model;
    model.max_depth = max_depth;
    build_tree(model.nodes, train, idx, 0, max_depth);
    return model;
}

double decision_value(const LinearModel& model, const std::vector<double>& x) {
    if (x.size() != model.weights.size()) throw SizeError("feature dimension mismatch");
    const auto z = standardize(model.standardization, x);
    double acc = model.bias;
    for (std::size_t j = 0; j < z.size(); ++j) acc += model.weights[j] * z[j];
    return acc;
}

Label predict(const LinearModel& model, const std::vector<double>& x) {
    return decision_value(model, x) >= 0.0 ? Label::Rumble : Label::Background;
}

Label predict(const TreeModel& model, const std::vector<double>& x) {
    if (model.nodes.empty()) throw StateError("empty tree");
    std::size_t at = 0;
    for (std::size_t steps = 0; steps <= model.nodes.size(); ++steps) {
        const TreeNode& node = model.nodes[at];
        if (node.is_leaf()) return node.leaf;
        const auto f = static_cast<std::size_t>(node.feature);
        if (f >= x.size()) throw SizeError("feature dimension mismatch");
        const int next = x[f] <= node.threshold ? node.left : node.right;
        if (next < 0 || static_cast<std::size_t>(next) >= model.nodes.size())
            throw StateError("malformed tree");
        at = static_cast<std::size_t>(next);
    }
    throw StateError("tree traversal did not reach a leaf");
}

Label predict(const Model& model, const std::vector<double>& x) {
    return std::visit([&](const auto& m) { return predict(m, x); }, model);
}

EvalReport evaluate(const Model& model, const Dataset& test) {
    test.validate();

    EvalReport r;
    for (const auto& row : test.rows) {
        const bool actual = row.label == Label::Rumble;
        const bool predicted = predict(model, row.values) == Label::Rumble;
        if (actual && predicted)
            ++r.tp;
        else if (!actual && predicted)
            ++r.fp;
        else if (!actual)
            ++r.tn;
        else
            ++r.fn;
    }

    auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    r.accuracy = ratio(r.tp + r.tn, r.total());
    r.sensitivity = ratio(r.tp, r.tp + r.fn);
    r.recall = r.sensitivity;
    r.specificity = ratio(r.tn, r.tn + r.fp);
    r.precision = ratio(r.tp, r.tp + r.fp);
    if (r.sensitivity && r.specificity)
        r.balanced_accuracy = 0.5 * (*r.sensitivity + *r.specificity);
    if (r.precision && r.recall && *r.precision + *r.recall > 0.0)
        r.f1 = 2.0 * *r.precision * *r.recall / (*r.precision + *r.recall);
    return r;
}

std::string CvResult::formatted() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f ± %.3f %%", mean * 100.0, stddev * 100.0);
    return buf;
}

std::vector<std::vector<std::size_t>> stratified_folds(const Dataset& data, std::size_t k,
                                                       std::uint64_t seed) {
    data.validate();
    if (k < 2) throw ConfigError("need at least 2 folds");
    if (k > data.size()) throw ConfigError("more folds than samples");

    std::vector<std::size_t> rumble_idx, background_idx;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.rows[i].label == Label::Rumble)
            rumble_idx.push_back(i);
        else
            background_idx.push_back(i);
    }
    Rng rng(seed);
    shuffle_indices(rumble_idx, rng);
    shuffle_indices(background_idx, rng);

    // deal one class after the other so each class spreads evenly over folds
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t at = 0;
    for (std::size_t i : rumble_idx) folds[at++ % k].push_back(i);
    for (std::size_t i : background_idx) folds[at++ % k].push_back(i);
    return folds;
}

CvResult kfold_cv(const Dataset& data, std::size_t k, const Trainer& trainer,
                  std::uint64_t seed) {
    const auto folds = stratified_folds(data, k, seed);

    CvResult result;
    for (const auto& fold : folds) {
        std::vector<bool> held(data.size(), false);
        for (std::size_t i : fold) held[i] = true;
        Dataset train, test;
        for (std::size_t i = 0; i < data.size(); ++i)
            (held[i] ? test : train).rows.push_back(data.rows[i]);
        const Model model = trainer(train);
        const auto report = evaluate(model, test);
        result.fold_accuracies.push_back(report.accuracy.value());
    }

    const auto n = static_cast<double>(result.fold_accuracies.size());
    for (double a : result.fold_accuracies) result.mean += a;
    result.mean /= n;
    for (double a : result.fold_accuracies) {
        const double c = a - result.mean;
        result.stddev += c * c;
    }
    result.stddev = std::sqrt(result.stddev / n);
    return result;
}

SplitResult split_dataset(const Dataset& data, double train_fraction, std::uint64_t seed) {
    data.validate();
    if (!std::isfinite(train_fraction) || train_fraction <= 0.0 || train_fraction >= 1.0)
        throw ConfigError("train fraction must lie strictly between 0 and 1");

    Rng rng(seed);
    SplitResult out;
    for (Label label : {Label::Rumble, Label::Background}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < data.size(); ++i)
            if (data.rows[i].label == label) idx.push_back(i);
        if (idx.size() < 2)
            throw DataError("each class needs at least two samples to split");
        shuffle_indices(idx, rng);
        auto n_train = static_cast<std::size_t>(
            std::llround(train_fraction * static_cast<double>(idx.size())));
        n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < n_train ? out.train : out.test).rows.push_back(data.rows[idx[i]]);
    }
    return out;
}

Registry default_registry() {
    Registry reg;
    reg.push_back({FeatureKind::Mfcc,
                   {{"ridge", [](const Dataset& d) { return Model(train_ridge(d)); }},
                    {"svm_linear", [](const Dataset& d) { return Model(train_svm_linear(d)); }},
                    {"logistic", [](const Dataset& d) { return Model(train_logistic(d)); }}}});
    reg.push_back({FeatureKind::Hjorth,
                   {{"tree", [](const Dataset& d) { return Model(train_tree(d)); }},
                    {"adaboost", {}},
                    {"random_forest", {}}}});
    reg.push_back({FeatureKind::Sed,
                   {{"lgbm", {}},
                    {"gradient_boosting", {}},
                    {"adaboost", {}}}});
    return reg;
}

std::vector<LeaderboardRow> leaderboard(const std::map<FeatureKind, Dataset>& data,
                                        const Registry& registry, double train_fraction,
                                        std::size_t k, std::uint64_t seed) {
    std::vector<LeaderboardRow> rows;
    for (const auto& [kind, algorithms] : registry) {
        const auto it = data.find(kind);
        if (it == data.end())
            throw DataError(std::string("no dataset for feature kind ") + features::kind_name(kind));
        const Dataset& ds = it->second;
        for (const auto& algo : algorithms) {
            LeaderboardRow row;
            row.kind = kind;
            row.algorithm = algo.name;
            row.implemented = algo.implemented();
            if (row.implemented) {
                row.cv = kfold_cv(ds, k, algo.trainer, seed);
                const auto split = split_dataset(ds, train_fraction, seed);
                const Model model = algo.trainer(split.train);
                row.holdout = evaluate(model, split.test);
            }
            rows.push_back(std::move(row));
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const LeaderboardRow& a, const LeaderboardRow& b) {
        if (a.implemented != b.implemented) return a.implemented;
        if (!a.implemented) return false;  // stubs keep registration order
        return a.cv.mean > b.cv.mean;
    });
    return rows;
}

std::string render_leaderboard(const std::vector<LeaderboardRow>& rows) {
    const std::vector<std::string> header = {"Feature", "Algorithm", "Accuracy", "BA", "F1"};
    std::vector<std::vector<std::string>> cells;
    cells.push_back(header);
    for (const auto& row : rows) {
        cells.push_back({features::kind_name(row.kind), row.algorithm,
                         row.implemented ? row.cv.formatted() : "not implemented",
                         percent_cell(row.holdout.balanced_accuracy, row.implemented),
                         percent_cell(row.holdout.f1, row.implemented)});
    }

    std::vector<std::size_t> widths(header.size(), 0);
    for (const auto& line : cells)
        for (std::size_t c = 0; c < line.size(); ++c) {
            // the ± glyph is two bytes but one column
            std::size_t len = line[c].size();
            if (line[c].find("±") != std::string::npos) --len;
            widths[c] = std::max(widths[c], len);
        }

    std::string out;
    for (std::size_t r = 0; r < cells.size(); ++r) {
        for (std::size_t c = 0; c < cells[r].size(); ++c) {
            std::size_t len = cells[r][c].size();
            if (cells[r][c].find("±") != std::string::npos) --len;
            out += cells[r][c];
            if (c + 1 < cells[r].size()) out.append(widths[c] - len + 2, ' ');
        }
        out += '\n';
        if (r == 0) {
            std::size_t total = 0;
            for (std::size_t c = 0; c < widths.size(); ++c)
                total += widths[c] + (c + 1 < widths.size() ? 2 : 0);
            out.append(total, '-');
            out += '\n';
        }
    }
    return out;
}

std::string leaderboard_csv(const std::vector<LeaderboardRow>& rows) {
    std::string out = "feature,algorithm,implemented,accuracy_mean,accuracy_std,balanced_accuracy,f1\n";
    for (const auto& row : rows) {
        out += features::kind_name(row.kind);
        out += ',';
        out += row.algorithm;
        out += row.implemented ? ",1," : ",0,";
        if (row.implemented) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "%.17g,%.17g", row.cv.mean, row.cv.stddev);
            out += buf;
        } else {
            out += ',';
        }
        out += ',';
        out += number_or_empty(row.holdout.balanced_accuracy);
        out += ',';
        out += number_or_empty(row.holdout.f1);
        out += '\n';
    }
    return out;
}

}  // namespace rumble::classify
