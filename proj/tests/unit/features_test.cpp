#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <map>

#include "cdae/architecture.hpp"
#include "cdae/csv.hpp"
#include "cdae/error.hpp"
#include "cdae/features.hpp"
#include "test_util.hpp"

namespace cdae {
namespace {

using test::TempDir;

const char* kSpec =
    "input 8 4\n"
    "conv filters=2 kernel=3 act=relu\n"
    "maxpool\n"
    "conv filters=1 kernel=3 act=relu\n"
    "bottleneck after=3\n"
    "unpool\n"
    "deconv filters=1 kernel=3 act=tanh\n";

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream os(p, std::ios::binary);
  os << s;
}

// Writes `n` random 16x8 images and a manifest assigning them to genes.
DatasetManifest make_dataset(const TempDir& dir, const std::vector<std::string>& genes, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(0, 1);
  DatasetManifest m;
  m.base_dir = dir.path();
  for (std::size_t i = 0; i < genes.size(); ++i) {
    GrayImage img{16, 8, {}};
    for (int k = 0; k < 128; ++k) img.values.push_back(u(gen));
    const std::string name = "img" + std::to_string(i) + ".pgm";
    write_pgm(img, dir / name);
    m.rows.push_back({name, genes[i], {}});
  }
  write_manifest(m, dir / "manifest.csv");
  return read_manifest(dir / "manifest.csv");
}

TEST(Manifest, RoundTripAndGenes) {
  TempDir dir("manifest");
  write_text(dir / "m.csv", "image_path,gene_id,split\na.png,G1,train\nsub/b.png,G2,\nc.png,G1,test\n");
  const DatasetManifest m = read_manifest(dir / "m.csv");
  ASSERT_EQ(m.rows.size(), 3u);
  EXPECT_EQ(m.genes(), (std::vector<std::string>{"G1", "G2"}));
  EXPECT_EQ(m.resolve(m.rows[1]), dir.path() / "sub/b.png");
  EXPECT_EQ(m.rows[2].split, "test");
  write_manifest(m, dir / "m2.csv");
  const DatasetManifest back = read_manifest(dir / "m2.csv");
  ASSERT_EQ(back.rows.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.rows[i].image, m.rows[i].image);
    EXPECT_EQ(back.rows[i].gene_id, m.rows[i].gene_id);
    EXPECT_EQ(back.rows[i].split, m.rows[i].split);
  }
}

TEST(Manifest, Errors) {
  TempDir dir("manifest_err");
  auto code = [&](const std::string& text) {
    write_text(dir / "m.csv", text);
    try {
      read_manifest(dir / "m.csv");
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::NonFinite;
  };
  EXPECT_EQ(code("path,gene\na,b\n"), ErrorCode::ParseError);
  EXPECT_EQ(code("image_path,gene_id\na.png,\n"), ErrorCode::ParseError);
  EXPECT_EQ(code("image_path,gene_id\na.png,G1\na.png,G2\n"), ErrorCode::ParseError);
  EXPECT_EQ(code("image_path,gene_id\na.png,G1\n"), ErrorCode::NonFinite);
}

TEST(ModelInput, TooSmallImageNamesFile) {
  TempDir dir("small");
  write_pgm(GrayImage{4, 4, std::vector<double>(16, 0.5)}, dir / "tiny.pgm");
  try {
    load_model_input(dir / "tiny.pgm", 8, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
    EXPECT_NE(std::string(e.what()).find("tiny.pgm"), std::string::npos);
  }
  const Tensor t = load_model_input(dir / "tiny.pgm", 2, 2);
  EXPECT_EQ(t.shape(), (Shape{1, 1, 2, 2}));
  for (double v : t.values()) EXPECT_NEAR(v, 2 * (128.0 / 255) - 1, 1e-15);
}

TEST(FeatureMatrix, GeneMeansOfEncodings) {
  TempDir dir("fm");
  const std::vector<std::string> genes{"B", "A", "B", "C", "A", "B"};
  const DatasetManifest m = make_dataset(dir, genes, 1);
  const Model model = Model::initialize(parse_spec(kSpec), 3);
  const FeatureMatrix fm = build_feature_matrix(model, m);
  EXPECT_EQ(fm.gene_ids, (std::vector<std::string>{"B", "A", "C"}));
  EXPECT_EQ(fm.dim, 8u);  // 4x2 bottleneck
  std::map<std::string, std::vector<double>> sum;
  std::map<std::string, int> count;
  for (std::size_t i = 0; i < genes.size(); ++i) {
    const auto code = model.encode_rows(load_model_input(m.resolve(m.rows[i]), 8, 4)).front();
    auto& s = sum[genes[i]];
    s.resize(code.size(), 0.0);
    for (std::size_t k = 0; k < code.size(); ++k) s[k] += code[k];
    ++count[genes[i]];
  }
  for (std::size_t g = 0; g < fm.rows(); ++g)
    for (std::size_t k = 0; k < fm.dim; ++k)
      EXPECT_NEAR(fm.row(g)[k], sum[fm.gene_ids[g]][k] / count[fm.gene_ids[g]], 1e-14);
  EXPECT_EQ(build_feature_matrix(model, m, 3), fm);
}

TEST(FeatureMatrix, PermutationOfManifestOnlyReordersRows) {
  TempDir dir("perm");
  const std::vector<std::string> genes{"G1", "G2", "G3", "G4", "G5"};
  DatasetManifest m = make_dataset(dir, genes, 2);
  const Model model = Model::initialize(parse_spec(kSpec), 4);
  const FeatureMatrix a = build_feature_matrix(model, m);
  std::reverse(m.rows.begin(), m.rows.end());
  const FeatureMatrix b = build_feature_matrix(model, m);
  ASSERT_EQ(b.gene_ids.front(), "G5");
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto j = static_cast<std::size_t>(
        std::find(b.gene_ids.begin(), b.gene_ids.end(), a.gene_ids[i]) - b.gene_ids.begin());
    ASSERT_LT(j, b.rows());
    for (std::size_t k = 0; k < a.dim; ++k) EXPECT_EQ(a.row(i)[k], b.row(j)[k]);
  }
}

TEST(FeatureFiles, CsvAndBinaryRoundTripExactly) {
  TempDir dir("ffiles");
  FeatureMatrix fm{{"g1", "g2"}, 3, {0.1, 1.0 / 3.0, -2.5e-300, 1e300, 0.0, std::nextafter(1.0, 2.0)}};
  write_features_csv(fm, dir / "f.csv");
  write_features_binary(fm, dir / "f.fmat");
  EXPECT_EQ(read_features_csv(dir / "f.csv"), fm);
  EXPECT_EQ(read_features_binary(dir / "f.fmat"), fm);
  EXPECT_EQ(read_features(dir / "f.csv"), fm);
  EXPECT_EQ(read_features(dir / "f.fmat"), fm);
  const CsvRows rows = read_csv(dir / "f.csv");
  EXPECT_EQ(rows[0], (std::vector<std::string>{"gene_id", "f0", "f1", "f2"}));
}

TEST(Csv, Helpers) {
  const CsvRows r = parse_csv("a,b\r\n\n1,2\n");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[1][1], "2");
  for (double v : {0.1, 1.0 / 3.0, 1e-310, -7.0, 123456789.125})
    EXPECT_EQ(parse_double(format_double(v), "v"), v);
  EXPECT_THROW(parse_double("1.5x", "v"), Error);
  EXPECT_THROW(parse_size("-3", "n"), Error);
  EXPECT_EQ(parse_size("42", "n"), 42u);
}

}  // namespace
}  // namespace cdae
