#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace cdae {

/// Area under the ROC curve as the Mann-Whitney statistic: the fraction of
/// (positive, negative) pairs ranked correctly, ties counting one half.
/// O(n log n) via mid-ranks. labels are 0/1; throws UndefinedAuc unless
/// both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Held-out result of one outer cross-validation fold.
struct FoldResult {
  std::size_t fold = 0;
  double auc = 0.0;
  double lambda = 0.0;

  bool operator==(const FoldResult&) const = default;
};

struct CategoryResult {
  std::string category_id;
  std::vector<FoldResult> folds;

  bool operator==(const CategoryResult&) const = default;
};

/// CSV `category_id,fold,auc,lambda`, one line per outer fold.
void write_aucs_csv(std::span<const CategoryResult> results, const std::filesystem::path& path);
std::string format_aucs_csv(std::span<const CategoryResult> results);
std::vector<CategoryResult> read_aucs_csv(const std::filesystem::path& path);

struct CategorySummary {
  std::string category_id;
  double mean_auc = 0.0;
  std::vector<double> fold_auc;
  std::vector<double> fold_lambda;
};

struct EvalReport {
  std::size_t dimension = 0;
  std::vector<CategorySummary> categories;
  double mean_auc = 0.0;  // unweighted mean of per-category fold means
};

/// Throws NoCategories when `results` is empty.
EvalReport summarize(std::span<const CategoryResult> results, std::size_t dimension);

/// `category_id,mean_auc,folds,lambdas` plus a final `mean` row.
std::string report_csv(const EvalReport& report);
/// Per-category table, aligned plain text or GitHub markdown.
std::string report_table(const EvalReport& report, bool markdown);

/// `dimension,mean_auc`, sorted by dimension. Duplicate dimensions throw
/// InvalidArgument.
std::string plot_data_csv(std::span<const EvalReport> reports);

}  // namespace cdae
