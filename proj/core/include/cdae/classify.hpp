#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cdae/eval.hpp"
#include "cdae/features.hpp"

namespace cdae {

struct Category {
  std::string id;
  std::vector<std::string> genes;  // distinct, file order
};

/// Multi-label gene annotations; a gene may sit in any number of categories.
struct AnnotationTable {
  std::vector<Category> categories;  // first-appearance order
};

/// CSV `category_id,gene_id` with a header row; duplicate pairs are merged.
AnnotationTable read_annotations(const std::filesystem::path& path);
void write_annotations(const AnnotationTable& table, const std::filesystem::path& path);

/// Keeps categories whose genes present in `genes` number within
/// [min_genes, max_genes]; kept categories list only those genes.
AnnotationTable filter_categories(const AnnotationTable& table, std::span<const std::string> genes,
                                  std::size_t min_genes = 15, std::size_t max_genes = 500);

/// 0/1 membership of each of `genes` in `category`.
std::vector<int> category_labels(const Category& category, std::span<const std::string> genes);

/// Row-major copy of a feature matrix as an Eigen matrix (genes x D).
Eigen::MatrixXd to_eigen(const FeatureMatrix& m);

struct FoldPlan {
  std::vector<std::vector<std::size_t>> folds;  // each sorted ascending
};

/// Seeded stratified partition. Positives then negatives are shuffled and
/// dealt round-robin, negatives continuing where positives stopped, so
/// per-fold class counts differ by at most one. Throws TooFewSamples when
/// either class has fewer than k members.
FoldPlan stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed);

struct ClassWeights {
  double negative = 1.0;
  double positive = 1.0;

  /// n / (2 n_c) for each class c.
  static ClassWeights balanced(std::span<const int> labels);
};

struct LogRegOptions {
  double tolerance = 1e-6;      // stop when the gradient's max-norm drops below
  std::size_t max_iterations = 10000;
  std::size_t history = 10;     // L-BFGS memory
};

struct ClassifierModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  double lambda = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Objective sum_i c(y_i) logloss(sigmoid(w.x_i + b), y_i) + lambda |w|^2
/// (bias unpenalised). Exposed for gradient testing.
struct LogRegObjective {
  const Eigen::MatrixXd& x;
  std::span<const int> y;
  double lambda;
  ClassWeights weights;

  /// theta = (w, b); returns f and writes the gradient.
  double operator()(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const;
};

/// Minimises LogRegObjective with L-BFGS directions and Armijo
/// backtracking. `weights` defaults to balanced.
ClassifierModel train_weighted_logreg(const Eigen::MatrixXd& x, std::span<const int> y, double lambda,
                                      std::optional<ClassWeights> weights = std::nullopt,
                                      const LogRegOptions& options = {});

/// sigmoid(w.x + b) per row, computed without overflow.
Eigen::VectorXd predict_scores(const ClassifierModel& model, const Eigen::MatrixXd& x);

/// Per-column standardisation fitted on a subset of rows; constant
/// columns keep scale 1.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& x, std::span<const std::size_t> rows);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x, std::span<const std::size_t> rows) const;
};

std::vector<double> default_lambda_grid();

struct NestedCvOptions {
  std::vector<double> lambda_grid = default_lambda_grid();
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  LogRegOptions solver;
};

struct LambdaSelection {
  double lambda = 0.0;
  std::vector<double> mean_inner_auc;  // per grid entry, grid order
};

/// Inner k-fold search over `train_rows` only; ties go to the smaller lambda.
LambdaSelection select_lambda(const Eigen::MatrixXd& x, std::span<const int> y,
                              std::span<const std::size_t> train_rows, const NestedCvOptions& options,
                              std::uint64_t seed);

/// Two-level cross-validation: for each outer fold, lambda is chosen by
/// inner CV on the outer-training rows, the model is refit on all of them,
/// and AUC is measured on the held-out fold.
std::vector<FoldResult> nested_cv(const Eigen::MatrixXd& x, std::span<const int> y,
                                  const NestedCvOptions& options);

/// Seed used for the inner split of outer fold `fold`.
std::uint64_t inner_seed(std::uint64_t seed, std::size_t fold) noexcept;

struct ClassifyOptions {
  NestedCvOptions cv;
  std::size_t min_genes = 15;
  std::size_t max_genes = 500;
  std::size_t threads = 1;
};

/// nested_cv for every category that survives filtering. Categories that
/// cannot be folded are skipped with a message appended to `warnings`.
std::vector<CategoryResult> classify_categories(const FeatureMatrix& features,
                                                const AnnotationTable& annotations,
                                                const ClassifyOptions& options,
                                                std::vector<std::string>* warnings = nullptr);

}  // namespace cdae
