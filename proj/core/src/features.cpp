#include "cdae/features.hpp"

#include <map>
#include <set>
#include <sstream>

#include "binary_io.hpp"
#include "cdae/csv.hpp"
#include "cdae/error.hpp"
#include "cdae/parallel.hpp"

namespace cdae {

namespace {
constexpr std::string_view kFeatureMagic = "FMAT";
constexpr std::uint16_t kFeatureVersion = 1;
}  // namespace

std::filesystem::path DatasetManifest::resolve(const ManifestRow& row) const {
  return row.image.is_absolute() ? row.image : base_dir / row.image;
}

std::vector<std::string> DatasetManifest::genes() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& r : rows)
    if (seen.insert(r.gene_id).second) out.push_back(r.gene_id);
  return out;
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  const CsvRows rows = read_csv(path);
  if (rows.empty() || rows[0].size() < 2 || rows[0][0] != "image_path" || rows[0][1] != "gene_id")
    throw_error(ErrorCode::ParseError, path.string() + ": expected header 'image_path,gene_id'");
  DatasetManifest m;
  m.base_dir = path.parent_path();
  std::set<std::string> seen;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::string where = path.string() + " row " + std::to_string(i + 1);
    if (r.size() < 2 || r.size() > 3) throw_error(ErrorCode::ParseError, where + ": expected 2 or 3 fields");
    if (r[0].empty()) throw_error(ErrorCode::ParseError, where + ": empty image path");
    if (r[1].empty()) throw_error(ErrorCode::ParseError, where + ": empty gene id");
    if (!seen.insert(r[0]).second) throw_error(ErrorCode::ParseError, where + ": duplicate image path " + r[0]);
    m.rows.push_back({r[0], r[1], r.size() == 3 ? r[2] : std::string{}});
  }
  return m;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  bool with_split = false;
  for (const auto& r : manifest.rows) with_split = with_split || !r.split.empty();
  std::ostringstream os;
  os << "image_path,gene_id" << (with_split ? ",split" : "") << '\n';
  for (const auto& r : manifest.rows) {
    os << r.image.generic_string() << ',' << r.gene_id;
    if (with_split) os << ',' << r.split;
    os << '\n';
  }
  detail::write_text_file(path, os.str());
}

Tensor load_model_input(const std::filesystem::path& path, std::size_t h, std::size_t w) {
  const GrayImage img = load_image(path);
  if (img.h < h || img.w < w)
    throw_error(ErrorCode::ShapeMismatch, path.string() + " is " + std::to_string(img.h) + "x" +
                                              std::to_string(img.w) + ", model input is " +
                                              std::to_string(h) + "x" + std::to_string(w));
  return normalize(downsample(img, h, w));
}

std::vector<Tensor> load_manifest_images(const DatasetManifest& manifest, std::size_t h,
                                         std::size_t w, std::size_t threads) {
  std::vector<Tensor> images(manifest.rows.size());
  parallel_for(images.size(), threads, [&](std::size_t i) {
    images[i] = load_model_input(manifest.resolve(manifest.rows[i]), h, w);
  });
  return images;
}

FeatureMatrix build_feature_matrix(const Model& model, const DatasetManifest& manifest,
                                   std::size_t threads) {
  const auto images = load_manifest_images(manifest, model.spec().input_h, model.spec().input_w, threads);
  return build_feature_matrix(model, manifest, images, threads);
}

FeatureMatrix build_feature_matrix(const Model& model, const DatasetManifest& manifest,
                                   std::span<const Tensor> images, std::size_t threads) {
  if (images.size() != manifest.rows.size())
    throw_error(ErrorCode::ShapeMismatch, std::to_string(images.size()) + " images for " +
                                              std::to_string(manifest.rows.size()) + " manifest rows");
  std::vector<std::vector<double>> codes(images.size());
  parallel_for(images.size(), threads, [&](std::size_t i) {
    auto rows = model.encode_rows(images[i]);
    codes[i] = std::move(rows.front());
  });

  FeatureMatrix fm;
  fm.gene_ids = manifest.genes();
  fm.dim = model.feature_dim();
  fm.values.assign(fm.gene_ids.size() * fm.dim, 0.0);
  std::map<std::string, std::size_t> row_of;
  for (std::size_t g = 0; g < fm.gene_ids.size(); ++g) row_of[fm.gene_ids[g]] = g;
  std::vector<std::size_t> counts(fm.gene_ids.size(), 0);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::size_t g = row_of.at(manifest.rows[i].gene_id);
    ++counts[g];
    double* dst = fm.values.data() + g * fm.dim;
    for (std::size_t d = 0; d < fm.dim; ++d) dst[d] += codes[i][d];
  }
  for (std::size_t g = 0; g < counts.size(); ++g)
    if (counts[g] > 1)
      for (std::size_t d = 0; d < fm.dim; ++d) fm.values[g * fm.dim + d] /= static_cast<double>(counts[g]);
  return fm;
}

void write_features_csv(const FeatureMatrix& m, const std::filesystem::path& path) {
  std::string out = "gene_id";
  for (std::size_t d = 0; d < m.dim; ++d) out += ",f" + std::to_string(d);
  out += '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out += m.gene_ids[i];
    for (double v : m.row(i)) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  detail::write_text_file(path, out);
}

FeatureMatrix read_features_csv(const std::filesystem::path& path) {
  const CsvRows rows = read_csv(path);
  if (rows.empty() || rows[0].empty() || rows[0][0] != "gene_id")
    throw_error(ErrorCode::ParseError, path.string() + ": expected header starting with 'gene_id'");
  FeatureMatrix m;
  m.dim = rows[0].size() - 1;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != m.dim + 1)
      throw_error(ErrorCode::ParseError, path.string() + " row " + std::to_string(i + 1) + ": expected " +
                                             std::to_string(m.dim + 1) + " fields");
    m.gene_ids.push_back(rows[i][0]);
    for (std::size_t d = 1; d <= m.dim; ++d) m.values.push_back(parse_double(rows[i][d], path.string()));
  }
  return m;
}

void write_features_binary(const FeatureMatrix& m, const std::filesystem::path& path) {
  detail::ByteWriter w;
  w.bytes(kFeatureMagic);
  w.u16(kFeatureVersion);
  w.u64(m.rows());
  w.u64(m.dim);
  for (const auto& id : m.gene_ids) {
    w.u32(static_cast<std::uint32_t>(id.size()));
    w.bytes(id);
  }
  for (double v : m.values) w.f64(v);
  detail::write_file(path, w.buffer());
}

FeatureMatrix read_features_binary(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  detail::ByteReader r(bytes, path.string());
  r.need(kFeatureMagic.size());
  if (r.bytes(kFeatureMagic.size()) != kFeatureMagic)
    throw_error(ErrorCode::BadMagic, path.string() + " is not a feature matrix file");
  if (const auto v = r.u16(); v != kFeatureVersion)
    throw_error(ErrorCode::VersionMismatch, "feature matrix version " + std::to_string(v));
  FeatureMatrix m;
  const std::uint64_t rows = r.u64();
  m.dim = r.u64();
  for (std::uint64_t i = 0; i < rows; ++i) m.gene_ids.push_back(r.bytes(r.u32()));
  r.need(rows * m.dim * 8);
  m.values.resize(rows * m.dim);
  for (double& v : m.values) v = r.f64();
  return m;
}

FeatureMatrix read_features(const std::filesystem::path& path) {
  const auto head = detail::read_file(path);
  if (head.size() >= 4 && std::string_view(reinterpret_cast<const char*>(head.data()), 4) == kFeatureMagic)
    return read_features_binary(path);
  return read_features_csv(path);
}

}  // namespace cdae
