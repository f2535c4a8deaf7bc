#include "cdae/classify.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <sstream>

#include "binary_io.hpp"
#include "cdae/csv.hpp"
#include "cdae/error.hpp"
#include "cdae/parallel.hpp"
#include "cdae/rng.hpp"

namespace cdae {

AnnotationTable read_annotations(const std::filesystem::path& path) {
  const CsvRows rows = read_csv(path);
  if (rows.empty() || rows[0].size() != 2 || rows[0][0] != "category_id" || rows[0][1] != "gene_id")
    throw_error(ErrorCode::ParseError, path.string() + ": expected header 'category_id,gene_id'");
  AnnotationTable table;
  std::map<std::string, std::size_t> index;
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 2 || r[0].empty() || r[1].empty())
      throw_error(ErrorCode::ParseError, path.string() + " row " + std::to_string(i + 1) +
                                             ": expected non-empty category_id,gene_id");
    if (!seen.insert({r[0], r[1]}).second) continue;
    auto [it, fresh] = index.try_emplace(r[0], table.categories.size());
    if (fresh) table.categories.push_back({r[0], {}});
    table.categories[it->second].genes.push_back(r[1]);
  }
  return table;
}

void write_annotations(const AnnotationTable& table, const std::filesystem::path& path) {
  std::string out = "category_id,gene_id\n";
  for (const auto& c : table.categories)
    for (const auto& g : c.genes) out += c.id + "," + g + "\n";
  detail::write_text_file(path, out);
}

AnnotationTable filter_categories(const AnnotationTable& table, std::span<const std::string> genes,
                                  std::size_t min_genes, std::size_t max_genes) {
  const std::set<std::string> present(genes.begin(), genes.end());
  AnnotationTable out;
  for (const auto& c : table.categories) {
    Category kept{c.id, {}};
    for (const auto& g : c.genes)
      if (present.count(g)) kept.genes.push_back(g);
    if (kept.genes.size() >= min_genes && kept.genes.size() <= max_genes)
      out.categories.push_back(std::move(kept));
  }
  return out;
}

std::vector<int> category_labels(const Category& category, std::span<const std::string> genes) {
  const std::set<std::string> members(category.genes.begin(), category.genes.end());
  std::vector<int> labels(genes.size());
  for (std::size_t i = 0; i < genes.size(); ++i) labels[i] = members.count(genes[i]) ? 1 : 0;
  return labels;
}

Eigen::MatrixXd to_eigen(const FeatureMatrix& m) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.dim));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t d = 0; d < m.dim; ++d)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = m.values[i * m.dim + d];
  return x;
}

FoldPlan stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw_error(ErrorCode::InvalidArgument, "need at least 2 folds");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(i);
  if (pos.size() < k || neg.size() < k)
    throw_error(ErrorCode::TooFewSamples, std::to_string(pos.size()) + " positives and " +
                                              std::to_string(neg.size()) + " negatives for " +
                                              std::to_string(k) + " folds");
  Rng rng(seed);
  auto shuffle = [&rng](std::vector<std::size_t>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
  };
  shuffle(pos);
  shuffle(neg);
  FoldPlan plan;
  plan.folds.resize(k);
  std::size_t slot = 0;
  for (std::size_t i : pos) plan.folds[slot++ % k].push_back(i);
  for (std::size_t i : neg) plan.folds[slot++ % k].push_back(i);
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());
  return plan;
}

ClassWeights ClassWeights::balanced(std::span<const int> labels) {
  std::size_t pos = 0;
  for (int v : labels) pos += v != 0;
  const double n = static_cast<double>(labels.size());
  const std::size_t neg = labels.size() - pos;
  return ClassWeights{neg ? n / (2.0 * static_cast<double>(neg)) : 1.0,
                      pos ? n / (2.0 * static_cast<double>(pos)) : 1.0};
}

namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_inputs(const Eigen::MatrixXd& x, std::span<const int> y) {
  if (static_cast<std::size_t>(x.rows()) != y.size())
    throw_error(ErrorCode::ShapeMismatch, std::to_string(x.rows()) + " rows for " + std::to_string(y.size()) + " labels");
  if (!x.allFinite()) throw_error(ErrorCode::NonFinite, "feature matrix contains NaN or Inf");
  for (int v : y)
    if (v != 0 && v != 1) throw_error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
}

}  // namespace

double LogRegObjective::operator()(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const {
  const Eigen::Index d = x.cols();
  const auto w = theta.head(d);
  const double b = theta(d);
  const Eigen::VectorXd z = (x * w).array() + b;
  Eigen::VectorXd dz(z.size());
  double f = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const bool positive = y[static_cast<std::size_t>(i)] != 0;
    const double c = positive ? weights.positive : weights.negative;
    f += c * (positive ? softplus(-z(i)) : softplus(z(i)));
    dz(i) = c * (sigmoid(z(i)) - (positive ? 1.0 : 0.0));
  }
  f += lambda * w.squaredNorm();
  grad.resize(d + 1);
  grad.head(d).noalias() = x.transpose() * dz;
  grad.head(d) += 2.0 * lambda * w;
  grad(d) = dz.sum();
  return f;
}

ClassifierModel train_weighted_logreg(const Eigen::MatrixXd& x, std::span<const int> y, double lambda,
                                      std::optional<ClassWeights> weights, const LogRegOptions& options) {
  check_inputs(x, y);
  if (!(lambda >= 0.0)) throw_error(ErrorCode::InvalidArgument, "lambda must be >= 0");
  const LogRegObjective objective{x, y, lambda, weights ? *weights : ClassWeights::balanced(y)};

  const Eigen::Index n = x.cols() + 1;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad(n), next_grad(n), next(n);
  double f = objective(theta, grad);

  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> memory;  // (s, y) pairs
  ClassifierModel model;
  model.lambda = lambda;
  std::size_t iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    if (grad.lpNorm<Eigen::Infinity>() < options.tolerance) {
      model.converged = true;
      break;
    }
    // Two-loop recursion for the quasi-Newton direction.
    Eigen::VectorXd q = grad;
    std::vector<double> alpha(memory.size());
    for (std::size_t m = memory.size(); m-- > 0;) {
      const auto& [s, yv] = memory[m];
      alpha[m] = s.dot(q) / yv.dot(s);
      q -= alpha[m] * yv;
    }
    if (!memory.empty()) {
      const auto& [s, yv] = memory.back();
      q *= s.dot(yv) / yv.squaredNorm();
    } else {
      q /= std::max(1.0, grad.lpNorm<Eigen::Infinity>());
    }
    for (std::size_t m = 0; m < memory.size(); ++m) {
      const auto& [s, yv] = memory[m];
      const double beta = yv.dot(q) / yv.dot(s);
      q += (alpha[m] - beta) * s;
    }
    Eigen::VectorXd dir = -q;
    double slope = grad.dot(dir);
    if (!(slope < 0.0)) {
      memory.clear();
      dir = -grad / std::max(1.0, grad.lpNorm<Eigen::Infinity>());
      slope = grad.dot(dir);
    }

    // Armijo backtracking.
    double step = 1.0;
    double next_f = 0.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k, step *= 0.5) {
      next = theta + step * dir;
      next_f = objective(next, next_grad);
      if (std::isfinite(next_f) && next_f <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (memory.empty()) break;  // no descent possible along the gradient either
      memory.clear();
      continue;
    }
    Eigen::VectorXd s = next - theta, yv = next_grad - grad;
    if (s.dot(yv) > 1e-12 * s.norm() * yv.norm()) {
      memory.emplace_back(std::move(s), std::move(yv));
      if (memory.size() > options.history) memory.pop_front();
    }
    theta.swap(next);
    grad.swap(next_grad);
    f = next_f;
  }
  if (!model.converged && grad.lpNorm<Eigen::Infinity>() < options.tolerance) model.converged = true;
  if (!theta.allFinite()) throw_error(ErrorCode::NonFinite, "logistic regression produced non-finite weights");
  model.iterations = iter;
  model.weights = theta.head(x.cols());
  model.bias = theta(x.cols());
  return model;
}

Eigen::VectorXd predict_scores(const ClassifierModel& model, const Eigen::MatrixXd& x) {
  if (x.cols() != model.weights.size())
    throw_error(ErrorCode::ShapeMismatch, "feature width " + std::to_string(x.cols()) + " vs model " +
                                              std::to_string(model.weights.size()));
  Eigen::VectorXd z = (x * model.weights).array() + model.bias;
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = sigmoid(z(i));
  return z;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& x, std::span<const std::size_t> rows) {
  Standardizer s;
  s.mean = Eigen::RowVectorXd::Zero(x.cols());
  s.scale = Eigen::RowVectorXd::Ones(x.cols());
  if (rows.empty()) return s;
  for (std::size_t r : rows) s.mean += x.row(static_cast<Eigen::Index>(r));
  s.mean /= static_cast<double>(rows.size());
  Eigen::RowVectorXd var = Eigen::RowVectorXd::Zero(x.cols());
  for (std::size_t r : rows) var += (x.row(static_cast<Eigen::Index>(r)) - s.mean).array().square().matrix();
  var /= static_cast<double>(rows.size());
  for (Eigen::Index j = 0; j < x.cols(); ++j) s.scale(j) = var(j) > 1e-24 ? std::sqrt(var(j)) : 1.0;
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x, std::span<const std::size_t> rows) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) =
        (x.row(static_cast<Eigen::Index>(rows[i])) - mean).array() / scale.array();
  return out;
}

std::vector<double> default_lambda_grid() { return {1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0}; }

std::uint64_t inner_seed(std::uint64_t seed, std::size_t fold) noexcept { return Rng::mix(seed, fold + 1); }

namespace {

std::vector<int> gather(std::span<const int> y, std::span<const std::size_t> rows) {
  std::vector<int> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = y[rows[i]];
  return out;
}

// AUC on `test` of a model fit on standardised `train` rows.
double fit_and_score(const Eigen::MatrixXd& x, std::span<const int> y, std::span<const std::size_t> train,
                     std::span<const std::size_t> test, double lambda, const LogRegOptions& solver) {
  const Standardizer st = Standardizer::fit(x, train);
  const auto ytrain = gather(y, train);
  const ClassifierModel model = train_weighted_logreg(st.apply(x, train), ytrain, lambda, std::nullopt, solver);
  const Eigen::VectorXd scores = predict_scores(model, st.apply(x, test));
  return roc_auc(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())), gather(y, test));
}

// Complement of fold f within the plan, ascending.
std::vector<std::size_t> rest_of(const FoldPlan& plan, std::size_t f) {
  std::vector<std::size_t> out;
  for (std::size_t g = 0; g < plan.folds.size(); ++g)
    if (g != f) out.insert(out.end(), plan.folds[g].begin(), plan.folds[g].end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

LambdaSelection select_lambda(const Eigen::MatrixXd& x, std::span<const int> y,
                              std::span<const std::size_t> train_rows, const NestedCvOptions& options,
                              std::uint64_t seed) {
  if (options.lambda_grid.empty()) throw_error(ErrorCode::InvalidArgument, "empty lambda grid");
  const auto ytrain = gather(y, train_rows);
  const FoldPlan inner = stratified_kfold(ytrain, options.folds, seed);

  std::vector<double> grid = options.lambda_grid;
  std::vector<std::size_t> order(grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return grid[a] < grid[b]; });

  LambdaSelection sel;
  sel.mean_inner_auc.assign(grid.size(), 0.0);
  for (std::size_t f = 0; f < inner.folds.size(); ++f) {
    std::vector<std::size_t> tr, va;
    for (std::size_t i : rest_of(inner, f)) tr.push_back(train_rows[i]);
    for (std::size_t i : inner.folds[f]) va.push_back(train_rows[i]);
    for (std::size_t g = 0; g < grid.size(); ++g)
      sel.mean_inner_auc[g] += fit_and_score(x, y, tr, va, grid[g], options.solver);
  }
  for (double& v : sel.mean_inner_auc) v /= static_cast<double>(inner.folds.size());

  // Ascending lambda; strict improvement required, so ties keep the smaller.
  std::size_t best = order.front();
  for (std::size_t g : order)
    if (sel.mean_inner_auc[g] > sel.mean_inner_auc[best]) best = g;
  sel.lambda = grid[best];
  return sel;
}

std::vector<FoldResult> nested_cv(const Eigen::MatrixXd& x, std::span<const int> y,
                                  const NestedCvOptions& options) {
  check_inputs(x, y);
  const FoldPlan outer = stratified_kfold(y, options.folds, options.seed);
  std::vector<FoldResult> results;
  for (std::size_t f = 0; f < outer.folds.size(); ++f) {
    const auto train = rest_of(outer, f);
    const LambdaSelection sel = select_lambda(x, y, train, options, inner_seed(options.seed, f));
    results.push_back({f, fit_and_score(x, y, train, outer.folds[f], sel.lambda, options.solver), sel.lambda});
  }
  return results;
}

namespace {

std::uint64_t hash_id(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::vector<CategoryResult> classify_categories(const FeatureMatrix& features,
                                                const AnnotationTable& annotations,
                                                const ClassifyOptions& options,
                                                std::vector<std::string>* warnings) {
  const AnnotationTable kept =
      filter_categories(annotations, features.gene_ids, options.min_genes, options.max_genes);
  const Eigen::MatrixXd x = to_eigen(features);
  const std::size_t n = kept.categories.size();
  std::vector<std::optional<CategoryResult>> slots(n);
  std::vector<std::string> skipped(n);
  parallel_for(n, options.threads, [&](std::size_t c) {
    const auto& cat = kept.categories[c];
    const auto labels = category_labels(cat, features.gene_ids);
    NestedCvOptions cv = options.cv;
    cv.seed = Rng::mix(options.cv.seed, hash_id(cat.id));
    try {
      slots[c] = CategoryResult{cat.id, nested_cv(x, labels, cv)};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TooFewSamples) throw;
      skipped[c] = "skipping category " + cat.id + ": " + e.what();
    }
  });
  std::vector<CategoryResult> out;
  for (std::size_t c = 0; c < n; ++c) {
    if (slots[c]) out.push_back(std::move(*slots[c]));
    else if (warnings) warnings->push_back(skipped[c]);
  }
  return out;
}

}  // namespace cdae
