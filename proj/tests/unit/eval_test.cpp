#include <gtest/gtest.h>

#include <random>

#include "cdae/error.hpp"
#include "cdae/eval.hpp"
#include "test_util.hpp"

namespace cdae {
namespace {

using test::TempDir;

double pair_count_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double good = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        pairs += 1;
        good += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
      }
  return good / pairs;
}

TEST(Auc, Examples) {
  EXPECT_EQ(roc_auc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, std::vector<int>{1, 1, 0, 0}), 1.0);
  EXPECT_EQ(roc_auc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<int>{1, 1, 0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(roc_auc(std::vector<double>{0.5, 0.5, 0.4}, std::vector<int>{1, 0, 0}), 0.75);
}

TEST(Auc, SingleClassUndefined) {
  try {
    roc_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UndefinedAuc);
  }
  EXPECT_THROW(roc_auc(std::vector<double>{0.1}, std::vector<int>{1, 0}), Error);
}

TEST(Auc, MatchesPairCountingWithTies) {
  std::mt19937 gen(1);
  for (int t = 0; t < 200; ++t) {
    const int n = std::uniform_int_distribution<int>(2, 50)(gen);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
      s[i] = std::uniform_int_distribution<int>(0, 6)(gen) * 0.25;
      y[i] = std::bernoulli_distribution(0.4)(gen);
    }
    y[0] = 1;
    y[1] = 0;
    EXPECT_NEAR(roc_auc(s, y), pair_count_auc(s, y), 1e-12);
    std::vector<double> t2(n), neg(n);
    for (int i = 0; i < n; ++i) {
      t2[i] = std::exp(3 * s[i]) - 7;
      neg[i] = -s[i];
    }
    EXPECT_NEAR(roc_auc(t2, y), roc_auc(s, y), 1e-12);
    // Tied pairs count one half on both sides, so the complement law survives ties.
    EXPECT_NEAR(roc_auc(s, y) + roc_auc(neg, y), 1.0, 1e-12);
  }
}

TEST(AucsCsv, RoundTrip) {
  TempDir dir("aucs");
  const std::vector<CategoryResult> r{{"GO:1", {{0, 0.75, 0.1}, {1, 1.0 / 3.0, 10}}}, {"GO:2", {{0, 0.5, 1e-3}}}};
  write_aucs_csv(r, dir / "a.csv");
  EXPECT_EQ(read_aucs_csv(dir / "a.csv"), r);
  EXPECT_EQ(format_aucs_csv(r).substr(0, 25), "category_id,fold,auc,lamb");
}

TEST(Summarize, Means) {
  const std::vector<CategoryResult> one{{"c", {{0, 0.75, 1}}}};
  EXPECT_DOUBLE_EQ(summarize(one, 10).mean_auc, 0.75);
  const std::vector<CategoryResult> two{{"a", {{0, 1.0, 1}, {1, 1.0, 1}}}, {"b", {{0, 0.94, 1}, {1, 0.98, 1}}}};
  const EvalReport r = summarize(two, 1800);
  EXPECT_NEAR(r.mean_auc, 0.98, 1e-15);
  EXPECT_EQ(r.dimension, 1800u);
  ASSERT_EQ(r.categories.size(), 2u);
  EXPECT_NEAR(r.categories[1].mean_auc, 0.96, 1e-15);
  try {
    summarize(std::vector<CategoryResult>{}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoCategories);
  }
}

TEST(Reports, TablesAndPlotData) {
  const std::vector<CategoryResult> r{{"GO:7", {{0, 0.5, 1}, {1, 1.0, 10}}}};
  const EvalReport rep = summarize(r, 2625);
  const std::string md = report_table(rep, true);
  EXPECT_NE(md.find("| GO:7"), std::string::npos);
  EXPECT_NE(md.find("---"), std::string::npos);
  EXPECT_NE(report_table(rep, false).find("GO:7"), std::string::npos);
  const std::string csv = report_csv(rep);
  EXPECT_EQ(csv.rfind("category_id,mean_auc", 0), 0u);
  EXPECT_NE(csv.find("\nmean,"), std::string::npos);

  EvalReport small = rep;
  small.dimension = 1800;
  const std::vector<EvalReport> unsorted{rep, small};
  const std::string plot = plot_data_csv(unsorted);
  EXPECT_EQ(plot.rfind("dimension,mean_auc\n1800,", 0), 0u);
  EXPECT_NE(plot.find("\n2625,"), std::string::npos);
  EXPECT_EQ(plot_data_csv(std::vector<EvalReport>{rep}), "dimension,mean_auc\n2625,0.75\n");
  const std::vector<EvalReport> dup{rep, rep};
  EXPECT_THROW(plot_data_csv(dup), Error);
}

}  // namespace
}  // namespace cdae
