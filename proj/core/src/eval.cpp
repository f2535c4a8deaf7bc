#include "cdae/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include "binary_io.hpp"
#include "cdae/csv.hpp"
#include "cdae/error.hpp"

namespace cdae {

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw_error(ErrorCode::ShapeMismatch, std::to_string(scores.size()) + " scores for " +
                                              std::to_string(labels.size()) + " labels");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of mid-ranks (1-based) of the positives.
  double rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t pos_in_group = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) pos_in_group += labels[order[j++]] != 0;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    rank_sum += mid_rank * static_cast<double>(pos_in_group);
    positives += pos_in_group;
    i = j;
  }
  const std::size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0)
    throw_error(ErrorCode::UndefinedAuc, "needs both classes, got " + std::to_string(positives) +
                                             " positives and " + std::to_string(negatives) + " negatives");
  const double np = static_cast<double>(positives), nn = static_cast<double>(negatives);
  const double u = rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * nn);
}

std::string format_aucs_csv(std::span<const CategoryResult> results) {
  std::string out = "category_id,fold,auc,lambda\n";
  for (const auto& r : results)
    for (const auto& f : r.folds)
      out += r.category_id + "," + std::to_string(f.fold) + "," + format_double(f.auc) + "," +
             format_double(f.lambda) + "\n";
  return out;
}

void write_aucs_csv(std::span<const CategoryResult> results, const std::filesystem::path& path) {
  detail::write_text_file(path, format_aucs_csv(results));
}

std::vector<CategoryResult> read_aucs_csv(const std::filesystem::path& path) {
  const CsvRows rows = read_csv(path);
  if (rows.empty() || rows[0] != std::vector<std::string>{"category_id", "fold", "auc", "lambda"})
    throw_error(ErrorCode::ParseError, path.string() + ": expected header 'category_id,fold,auc,lambda'");
  std::vector<CategoryResult> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 4)
      throw_error(ErrorCode::ParseError, path.string() + " row " + std::to_string(i + 1) + ": expected 4 fields");
    if (out.empty() || out.back().category_id != r[0]) out.push_back({r[0], {}});
    out.back().folds.push_back(
        {parse_size(r[1], path.string()), parse_double(r[2], path.string()), parse_double(r[3], path.string())});
  }
  return out;
}

EvalReport summarize(std::span<const CategoryResult> results, std::size_t dimension) {
  if (results.empty()) throw_error(ErrorCode::NoCategories, "no categories survived filtering");
  EvalReport report;
  report.dimension = dimension;
  double total = 0.0;
  for (const auto& r : results) {
    if (r.folds.empty()) throw_error(ErrorCode::InvalidArgument, "category " + r.category_id + " has no folds");
    CategorySummary s{r.category_id, 0.0, {}, {}};
    for (const auto& f : r.folds) {
      s.fold_auc.push_back(f.auc);
      s.fold_lambda.push_back(f.lambda);
      s.mean_auc += f.auc;
    }
    s.mean_auc /= static_cast<double>(r.folds.size());
    total += s.mean_auc;
    report.categories.push_back(std::move(s));
  }
  report.mean_auc = total / static_cast<double>(results.size());
  return report;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string join(const std::vector<double>& v, char sep, bool shortest) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += shortest ? format_double(v[i]) : fixed(v[i], 4);
  }
  return out;
}

}  // namespace

std::string report_csv(const EvalReport& report) {
  std::string out = "category_id,mean_auc,fold_aucs,lambdas\n";
  for (const auto& c : report.categories)
    out += c.category_id + "," + format_double(c.mean_auc) + "," + join(c.fold_auc, ';', true) + "," +
           join(c.fold_lambda, ';', true) + "\n";
  out += "mean," + format_double(report.mean_auc) + ",,\n";
  return out;
}

std::string report_table(const EvalReport& report, bool markdown) {
  std::ostringstream os;
  if (markdown) {
    os << "| category | mean AUC | fold AUCs | chosen lambda |\n";
    os << "|---|---:|---|---|\n";
    for (const auto& c : report.categories)
      os << "| " << c.category_id << " | " << fixed(c.mean_auc, 4) << " | " << join(c.fold_auc, ' ', false)
         << " | " << join(c.fold_lambda, ' ', true) << " |\n";
    os << "| **mean** | **" << fixed(report.mean_auc, 4) << "** | | |\n";
    os << "\nRepresentation dimension: " << report.dimension << "\n";
    return os.str();
  }
  std::size_t width = 8;
  for (const auto& c : report.categories) width = std::max(width, c.category_id.size());
  auto pad = [width](const std::string& s) { return s + std::string(width - s.size(), ' '); };
  os << pad("category") << "  mean_auc  lambdas\n";
  for (const auto& c : report.categories)
    os << pad(c.category_id) << "  " << fixed(c.mean_auc, 4) << "    " << join(c.fold_lambda, ' ', true) << "\n";
  os << pad("mean") << "  " << fixed(report.mean_auc, 4) << "\n";
  os << "dimension " << report.dimension << ", " << report.categories.size() << " categories\n";
  return os.str();
}

std::string plot_data_csv(std::span<const EvalReport> reports) {
  std::vector<const EvalReport*> sorted;
  std::set<std::size_t> dims;
  for (const auto& r : reports) {
    if (!dims.insert(r.dimension).second)
      throw_error(ErrorCode::InvalidArgument, "duplicate dimension " + std::to_string(r.dimension));
    sorted.push_back(&r);
  }
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->dimension < b->dimension; });
  std::string out = "dimension,mean_auc\n";
  for (const auto* r : sorted) out += std::to_string(r->dimension) + "," + format_double(r->mean_auc) + "\n";
  return out;
}

}  // namespace cdae
