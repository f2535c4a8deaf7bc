#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "cdae/classify.hpp"
#include "cdae/error.hpp"
#include "test_util.hpp"

namespace cdae {
namespace {

using test::TempDir;

std::vector<std::string> names(std::size_t n, const std::string& prefix = "g") {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

// Two Gaussian clouds in d dimensions, separated along the first axis by `gap`.
void gaussian_problem(std::size_t n, std::size_t d, double gap, unsigned seed, Eigen::MatrixXd& x,
                      std::vector<int>& y, double positive_rate = 0.3) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> z;
  std::bernoulli_distribution pos(positive_rate);
  x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  y.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = pos(gen);
    for (std::size_t j = 0; j < d; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = z(gen);
    x(static_cast<Eigen::Index>(i), 0) += y[i] ? gap : 0.0;
  }
}

TEST(Filter, InclusiveBounds) {
  const auto genes = names(600);
  AnnotationTable t;
  t.categories.push_back({"c14", std::vector<std::string>(genes.begin(), genes.begin() + 14)});
  t.categories.push_back({"c15", std::vector<std::string>(genes.begin(), genes.begin() + 15)});
  t.categories.push_back({"c500", std::vector<std::string>(genes.begin(), genes.begin() + 500)});
  t.categories.push_back({"c501", std::vector<std::string>(genes.begin(), genes.begin() + 501)});
  t.categories.push_back({"absent", names(20, "other")});
  auto mixed = names(20, "other");
  mixed.insert(mixed.end(), genes.begin(), genes.begin() + 15);
  t.categories.push_back({"mixed", mixed});
  const AnnotationTable kept = filter_categories(t, genes, 15, 500);
  std::vector<std::string> ids;
  for (const auto& c : kept.categories) ids.push_back(c.id);
  EXPECT_EQ(ids, (std::vector<std::string>{"c15", "c500", "mixed"}));
  EXPECT_EQ(kept.categories[2].genes.size(), 15u);
}

TEST(Annotations, ReadMergesDuplicatesAndRoundTrips) {
  TempDir dir("ann");
  {
    std::ofstream os(dir / "a.csv");
    os << "category_id,gene_id\nGO:1,g1\nGO:2,g1\nGO:1,g2\nGO:1,g1\n";
  }
  const AnnotationTable t = read_annotations(dir / "a.csv");
  ASSERT_EQ(t.categories.size(), 2u);
  EXPECT_EQ(t.categories[0].genes, (std::vector<std::string>{"g1", "g2"}));
  write_annotations(t, dir / "b.csv");
  const AnnotationTable back = read_annotations(dir / "b.csv");
  ASSERT_EQ(back.categories.size(), 2u);
  EXPECT_EQ(back.categories[1].genes, t.categories[1].genes);
  const std::vector<std::string> genes{"g2", "g3", "g1"};
  EXPECT_EQ(category_labels(t.categories[0], genes), (std::vector<int>{1, 0, 1}));
}

TEST(Folds, ExactAndRemainderCounts) {
  std::vector<int> y(50, 0);
  for (int i = 0; i < 10; ++i) y[static_cast<std::size_t>(i * 5)] = 1;
  const FoldPlan p = stratified_kfold(y, 5, 1);
  for (const auto& f : p.folds) {
    std::size_t pos = 0;
    for (auto i : f) pos += static_cast<std::size_t>(y[i]);
    EXPECT_EQ(pos, 2u);
    EXPECT_EQ(f.size() - pos, 8u);
  }
  std::vector<int> y11(40, 0);
  for (int i = 0; i < 11; ++i) y11[static_cast<std::size_t>(i)] = 1;
  const FoldPlan q = stratified_kfold(y11, 5, 2);
  std::multiset<std::size_t> counts;
  for (const auto& f : q.folds) {
    std::size_t pos = 0;
    for (auto i : f) pos += static_cast<std::size_t>(y11[i]);
    counts.insert(pos);
  }
  EXPECT_EQ(counts, (std::multiset<std::size_t>{3, 2, 2, 2, 2}));
}

TEST(Folds, PartitionDeterminismAndBalance) {
  std::mt19937 gen(3);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(20, 120)(gen);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(2, 7)(gen);
    std::vector<int> y(n, 0);
    for (std::size_t i = 0; i < n; ++i) y[i] = std::bernoulli_distribution(0.3)(gen);
    std::size_t npos = 0;
    for (int v : y) npos += static_cast<std::size_t>(v);
    if (npos < k || n - npos < k) continue;
    const FoldPlan p = stratified_kfold(y, k, static_cast<std::uint64_t>(t));
    std::vector<int> seen(n, 0);
    std::size_t lo = n, hi = 0;
    for (const auto& f : p.folds) {
      std::size_t pos = 0;
      for (auto i : f) ++seen[i], pos += static_cast<std::size_t>(y[i]);
      lo = std::min(lo, pos);
      hi = std::max(hi, pos);
    }
    for (int s : seen) EXPECT_EQ(s, 1);
    EXPECT_LE(hi - lo, 1u);
    EXPECT_EQ(stratified_kfold(y, k, static_cast<std::uint64_t>(t)).folds, p.folds);
  }
  std::vector<int> few(30, 0);
  few[0] = few[1] = few[2] = 1;
  try {
    stratified_kfold(few, 5, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewSamples);
  }
}

TEST(LogReg, ObjectiveGradientMatchesFiniteDifferences) {
  Eigen::MatrixXd x;
  std::vector<int> y;
  gaussian_problem(40, 4, 1.0, 4, x, y);
  const LogRegObjective f{x, y, 0.3, ClassWeights::balanced(y)};
  std::mt19937 gen(5);
  std::normal_distribution<double> z;
  Eigen::VectorXd theta(5);
  for (int i = 0; i < 5; ++i) theta(i) = z(gen);
  Eigen::VectorXd g, scratch;
  f(theta, g);
  for (int i = 0; i < 5; ++i) {
    const double eps = 1e-5;
    Eigen::VectorXd a = theta, b = theta;
    a(i) += eps;
    b(i) -= eps;
    const double num = (f(a, scratch) - f(b, scratch)) / (2 * eps);
    EXPECT_LT(std::abs(num - g(i)) / std::max(std::abs(g(i)), 1e-8), 1e-6) << i;
  }
}

TEST(LogReg, BalancedWeights) {
  const std::vector<int> y{1, 0, 0, 0};
  const ClassWeights w = ClassWeights::balanced(y);
  EXPECT_DOUBLE_EQ(w.positive, 4.0 / 2.0);
  EXPECT_DOUBLE_EQ(w.negative, 4.0 / 6.0);
}

TEST(LogReg, SeparableToyHasTrainingAucOne) {
  Eigen::MatrixXd x(8, 2);
  x << 0, 0, 1, 0, 0, 1, 1, 1, 3, 3, 4, 3, 3, 4, 4, 4;
  const std::vector<int> y{0, 0, 0, 0, 1, 1, 1, 1};
  const ClassifierModel m = train_weighted_logreg(x, y, 1e-3);
  EXPECT_TRUE(m.converged);
  const Eigen::VectorXd s = predict_scores(m, x);
  EXPECT_EQ(roc_auc(std::span<const double>(s.data(), 8), y), 1.0);
}

TEST(LogReg, HugeLambdaShrinksWeights) {
  Eigen::MatrixXd x;
  std::vector<int> y;
  gaussian_problem(60, 3, 2.0, 6, x, y);
  const ClassifierModel m = train_weighted_logreg(x, y, 1e9);
  EXPECT_LT(m.weights.lpNorm<Eigen::Infinity>(), 1e-7);
  const Eigen::VectorXd s = predict_scores(m, x);
  EXPECT_LT(s.maxCoeff() - s.minCoeff(), 1e-7);
  // Balanced weights put the unpenalised bias at the class-balanced point.
  EXPECT_NEAR(s(0), 0.5, 1e-6);
}

TEST(LogReg, IntegerWeightEqualsDuplication) {
  Eigen::MatrixXd x;
  std::vector<int> y;
  gaussian_problem(40, 3, 1.0, 7, x, y);
  const ClassifierModel weighted = train_weighted_logreg(x, y, 0.5, ClassWeights{1.0, 3.0});
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (int r = 0; r < (y[static_cast<std::size_t>(i)] ? 3 : 1); ++r) rows.push_back(i);
  Eigen::MatrixXd xd(static_cast<Eigen::Index>(rows.size()), x.cols());
  std::vector<int> yd;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    xd.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]);
    yd.push_back(y[static_cast<std::size_t>(rows[r])]);
  }
  const ClassifierModel dup = train_weighted_logreg(xd, yd, 0.5, ClassWeights{1.0, 1.0});
  EXPECT_LT((weighted.weights - dup.weights).lpNorm<Eigen::Infinity>(), 1e-6);
  EXPECT_NEAR(weighted.bias, dup.bias, 1e-6);
}

TEST(LogReg, ScalingInvarianceOfRankingAtZeroLambda) {
  Eigen::MatrixXd x;
  std::vector<int> y;
  gaussian_problem(60, 3, 0.8, 8, x, y);
  const ClassifierModel a = train_weighted_logreg(x, y, 0.0);
  const ClassifierModel b = train_weighted_logreg(x * 7.5, y, 0.0);
  ASSERT_TRUE(a.converged && b.converged);
  const Eigen::VectorXd sa = predict_scores(a, x), sb = predict_scores(b, x * 7.5);
  const double auc_a = roc_auc(std::span<const double>(sa.data(), 60), y);
  const double auc_b = roc_auc(std::span<const double>(sb.data(), 60), y);
  EXPECT_NEAR(auc_a, auc_b, 1e-3);
}

TEST(LogReg, PredictEdgeCases) {
  ClassifierModel zero;
  zero.weights = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd x(2, 2);
  x << 1, 2, -3, 4;
  const Eigen::VectorXd s = predict_scores(zero, x);
  EXPECT_EQ(s(0), 0.5);
  EXPECT_EQ(s(1), 0.5);
  ClassifierModel big = zero;
  big.weights << 1e6, 0;
  Eigen::MatrixXd ext(3, 2);
  ext << 1e300, 0, -1e300, 0, 1e-3, 0;
  const Eigen::VectorXd e = predict_scores(big, ext);
  for (int i = 0; i < 3; ++i) EXPECT_TRUE(std::isfinite(e(i)));
  EXPECT_LT(e(1), e(2));
  EXPECT_LE(e(2), e(0));
  EXPECT_THROW(predict_scores(zero, Eigen::MatrixXd::Zero(2, 3)), Error);
  Eigen::MatrixXd bad = x;
  bad(0, 0) = std::nan("");
  EXPECT_THROW(train_weighted_logreg(bad, std::vector<int>{0, 1}, 1.0), Error);
}

TEST(Standardizer, TrainRowsOnly) {
  Eigen::MatrixXd x(4, 2);
  x << 1, 5, 3, 5, 100, 5, -100, 5;
  const std::vector<std::size_t> rows{0, 1};
  const Standardizer s = Standardizer::fit(x, rows);
  EXPECT_DOUBLE_EQ(s.mean(0), 2.0);
  EXPECT_DOUBLE_EQ(s.scale(1), 1.0);  // constant column
  const Eigen::MatrixXd z = s.apply(x, rows);
  EXPECT_NEAR(z(0, 0) + z(1, 0), 0.0, 1e-15);
  EXPECT_EQ(z(0, 1), 0.0);
}

// Plain k-fold CV written from the building blocks.
std::vector<double> plain_cv(const Eigen::MatrixXd& x, const std::vector<int>& y, double lambda, std::size_t k,
                             std::uint64_t seed) {
  const FoldPlan p = stratified_kfold(y, k, seed);
  std::vector<double> aucs;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (!std::binary_search(p.folds[f].begin(), p.folds[f].end(), i)) train.push_back(i);
    const Standardizer s = Standardizer::fit(x, train);
    std::vector<int> ytr;
    for (auto i : train) ytr.push_back(y[i]);
    const ClassifierModel m = train_weighted_logreg(s.apply(x, train), ytr, lambda);
    const Eigen::VectorXd sc = predict_scores(m, s.apply(x, p.folds[f]));
    std::vector<int> yte;
    for (auto i : p.folds[f]) yte.push_back(y[i]);
    aucs.push_back(roc_auc(std::span<const double>(sc.data(), yte.size()), yte));
  }
  return aucs;
}

TEST(NestedCv, SingleLambdaIsPlainCv) {
  Eigen::MatrixXd x;
  std::vector<int> y;
  gaussian_problem(80, 4, 1.0, 9, x, y);
  NestedCvOptions o;
  o.lambda_grid = {0.1};
  o.seed = 17;
  const auto r = nested_cv(x, y, o);
  const auto ref = plain_cv(x, y, 0.1, 5, 17);
  ASSERT_EQ(r.size(), 5u);
  for (std::size_t f = 0; f < 5; ++f) {
    EXPECT_EQ(r[f].fold, f);
    EXPECT_EQ(r[f].lambda, 0.1);
    EXPECT_NEAR(r[f].auc, ref[f], 1e-12);
  }
}

TEST(NestedCv, TestFoldMutationsNeverChangeLambda) {
  Eigen::MatrixXd x;
  std::vector<int> y;
  gaussian_problem(70, 5, 0.7, 10, x, y);
  NestedCvOptions o;
  o.seed = 3;
  const FoldPlan outer = stratified_kfold(y, 5, o.seed);
  std::mt19937 gen(11);
  std::normal_distribution<double> z(0, 50);
  for (std::size_t f = 0; f < 5; ++f) {
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (!std::binary_search(outer.folds[f].begin(), outer.folds[f].end(), i)) train.push_back(i);
    const LambdaSelection base = select_lambda(x, y, train, o, inner_seed(o.seed, f));
    for (int m = 0; m < 4; ++m) {
      Eigen::MatrixXd xm = x;
      std::vector<int> ym = y;
      for (auto i : outer.folds[f]) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) xm(static_cast<Eigen::Index>(i), j) = z(gen);
        if (m % 2) ym[i] = 1 - ym[i];
      }
      const LambdaSelection after = select_lambda(xm, ym, train, o, inner_seed(o.seed, f));
      EXPECT_EQ(after.lambda, base.lambda);
      EXPECT_EQ(after.mean_inner_auc, base.mean_inner_auc);
    }
  }
}

TEST(NestedCv, RandomLabelsNearChance) {
  Eigen::MatrixXd x;
  std::vector<int> y;
  gaussian_problem(150, 10, 0.0, 12, x, y);
  NestedCvOptions o;
  o.seed = 5;
  double mean = 0;
  for (const auto& r : nested_cv(x, y, o)) mean += r.auc / 5;
  EXPECT_NEAR(mean, 0.5, 0.15);
}

TEST(NestedCv, SeparableDataScoresHigh) {
  Eigen::MatrixXd x;
  std::vector<int> y;
  gaussian_problem(120, 6, 4.0, 13, x, y);
  NestedCvOptions o;
  o.seed = 6;
  double mean = 0;
  for (const auto& r : nested_cv(x, y, o)) mean += r.auc / 5;
  EXPECT_GE(mean, 0.95);
}

TEST(ClassifyCategories, SkipsUnfoldableAndIsThreadIndependent) {
  Eigen::MatrixXd x;
  std::vector<int> y;
  gaussian_problem(90, 4, 2.0, 14, x, y);
  FeatureMatrix fm;
  fm.gene_ids = names(90);
  fm.dim = 4;
  for (Eigen::Index i = 0; i < 90; ++i)
    for (Eigen::Index j = 0; j < 4; ++j) fm.values.push_back(x(i, j));
  AnnotationTable t;
  Category c1{"A", {}}, c2{"B", {}}, c3{"tiny", {}};
  for (std::size_t i = 0; i < 90; ++i) {
    if (y[i]) c1.genes.push_back(fm.gene_ids[i]);
    if (i % 5 == 0) c2.genes.push_back(fm.gene_ids[i]);
  }
  // 86 of 90 genes: only four negatives, too few for five folds.
  for (std::size_t i = 0; i < 86; ++i) c3.genes.push_back(fm.gene_ids[i]);
  t.categories = {c1, c2, c3};
  ClassifyOptions o;
  o.max_genes = 500;
  std::vector<std::string> warnings;
  const auto r1 = classify_categories(fm, t, o, &warnings);
  ASSERT_EQ(r1.size(), 2u);
  EXPECT_EQ(r1[0].category_id, "A");
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("tiny"), std::string::npos);
  o.threads = 3;
  EXPECT_EQ(classify_categories(fm, t, o), r1);
}

}  // namespace
}  // namespace cdae
