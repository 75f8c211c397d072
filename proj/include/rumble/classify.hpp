#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rumble/features.hpp"

namespace rumble::classify {

/// Labeled feature vectors of a single kind and dimension.
struct Dataset {
    std::vector<features::FeatureVector> rows;

    std::size_t size() const { return rows.size(); }
    std::size_t dim() const;
    features::FeatureKind kind() const;
    std::size_t count(features::Label label) const;

    /// Nonempty, uniform kind and dimension, every row well formed.
    void validate() const;
    /// validate() plus at least one sample of each class.
    void validate_for_training() const;
};

/// Per-feature shift and scale fitted on training data.
/// Constant features get std 1 so they pass through as zeros.
struct Standardization {
    std::vector<double> means;
    std::vector<double> stds;
};

Standardization fit_standardization(const Dataset& train);
std::vector<double> standardize(const Standardization& st, const std::vector<double>& x);

struct LinearModel {
    enum class Kind { Ridge, SvmLinear, Logistic };

    Kind kind = Kind::Ridge;
    std::vector<double> weights;  // in standardized feature space
    double bias = 0.0;
    std::map<std::string, double> hyperparams;
    Standardization standardization;
};

std::string linear_kind_name(LinearModel::Kind kind);
LinearModel::Kind linear_kind_from_name(const std::string& name);

/// Flat binary decision tree. Node 0 is the root; children always have
/// larger indices than their parent, so traversal terminates.
struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    features::Label leaf = features::Label::Background;

    bool is_leaf() const { return feature < 0; }
};

struct TreeModel {
    std::vector<TreeNode> nodes;
    std::size_t max_depth = 4;
};

using Model = std::variant<LinearModel, TreeModel>;

/// Ridge regression on +/-1 targets with an unregularized bias column,
/// solved by the normal equations on standardized features.
LinearModel train_ridge(const Dataset& train, double alpha = 1.0);

/// Primal hinge loss + L2 penalty, batch subgradient descent with
/// backtracking step halving so the objective never increases.
/// `objective_trace`, when given, receives the objective after every epoch
/// (front entry is the initial value).
LinearModel train_svm_linear(const Dataset& train, double c = 1.0, std::size_t epochs = 300,
                             double step = 0.5, std::vector<double>* objective_trace = nullptr);

/// Maximum likelihood by batch gradient descent on the mean log loss.
LinearModel train_logistic(const Dataset& train, double step = 1.0, std::size_t epochs = 2000);

/// CART with Gini impurity and exhaustive midpoint threshold search.
/// Ties go to the lowest feature index, then the lowest threshold.
/// Zero-gain splits are taken when nothing better exists.
TreeModel train_tree(const Dataset& train, std::size_t max_depth = 4);

/// w.x + b in standardized feature space.
double decision_value(const LinearModel& model, const std::vector<double>& x);

features::Label predict(const LinearModel& model, const std::vector<double>& x);
features::Label predict(const TreeModel& model, const std::vector<double>& x);
features::Label predict(const Model& model, const std::vector<double>& x);

/// Confusion counts plus derived metrics; rumble is the positive class.
/// Ratios with a zero denominator are reported absent, never as 0.
struct EvalReport {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::optional<double> accuracy;
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> balanced_accuracy;
    std::optional<double> f1;

    std::size_t total() const { return tp + fp + tn + fn; }
};

EvalReport evaluate(const Model& model, const Dataset& test);

using Trainer = std::function<Model(const Dataset&)>;

struct CvResult {
    std::vector<double> fold_accuracies;
    double mean = 0.0;
    double stddev = 0.0;  // population std over folds

    /// "97.05 ± 0.051 %"
    std::string formatted() const;
};

/// Deterministic stratified fold assignment: indices of each class are
/// shuffled with the seed, concatenated, and dealt round-robin, which keeps
/// per-fold class counts within one of each other.
std::vector<std::vector<std::size_t>> stratified_folds(const Dataset& data, std::size_t k,
                                                       std::uint64_t seed);

CvResult kfold_cv(const Dataset& data, std::size_t k, const Trainer& trainer, std::uint64_t seed);

struct SplitResult {
    Dataset train;
    Dataset test;
};

/// Stratified train/test split; each class keeps at least one sample on
/// both sides.
SplitResult split_dataset(const Dataset& data, double train_fraction, std::uint64_t seed);

/// Fraction of each class used for training under the two named splits.
inline constexpr double kPaperTrainFraction = 0.2;
inline constexpr double kConventionalTrainFraction = 0.8;

struct AlgorithmSpec {
    std::string name;
    Trainer trainer;  // empty for registered but unimplemented algorithms

    bool implemented() const { return static_cast<bool>(trainer); }
};

/// Algorithms tried per feature kind, in registration order.
using Registry = std::vector<std::pair<features::FeatureKind, std::vector<AlgorithmSpec>>>;

Registry default_registry();

struct LeaderboardRow {
    features::FeatureKind kind = features::FeatureKind::Mfcc;
    std::string algorithm;
    bool implemented = false;
    CvResult cv;          // meaningful only when implemented
    EvalReport holdout;   // evaluated on the held-out split
};

/// Cross-validated accuracy plus held-out BA/F1 for every registered pair,
/// implemented rows sorted by accuracy descending, stubs at the bottom.
std::vector<LeaderboardRow> leaderboard(const std::map<features::FeatureKind, Dataset>& data,
                                        const Registry& registry, double train_fraction,
                                        std::size_t k, std::uint64_t seed);

std::string render_leaderboard(const std::vector<LeaderboardRow>& rows);
std::string leaderboard_csv(const std::vector<LeaderboardRow>& rows);

}  // namespace rumble::classify
