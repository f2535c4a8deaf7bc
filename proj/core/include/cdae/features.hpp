#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cdae/image.hpp"
#include "cdae/model.hpp"

namespace cdae {

struct ManifestRow {
  std::filesystem::path image;  // relative paths resolve against the manifest's directory
  std::string gene_id;
  std::string split;            // optional tag, may be empty
};

/// Image-to-gene table, CSV `image_path,gene_id[,split]` with a header row.
struct DatasetManifest {
  std::vector<ManifestRow> rows;
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const ManifestRow& row) const;
  /// Distinct gene ids in order of first appearance.
  std::vector<std::string> genes() const;
};

/// Throws ParseError on a bad header, empty gene id, or duplicate image path.
DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Genes x D code matrix, row-major.
struct FeatureMatrix {
  std::vector<std::string> gene_ids;
  std::size_t dim = 0;
  std::vector<double> values;

  std::size_t rows() const noexcept { return gene_ids.size(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values).subspan(i * dim, dim);
  }
  bool operator==(const FeatureMatrix&) const = default;
};

/// Load, area-downsample to (h, w), and map to [-1, 1]. Images smaller
/// than (h, w) raise ShapeMismatch naming the file.
Tensor load_model_input(const std::filesystem::path& path, std::size_t h, std::size_t w);

std::vector<Tensor> load_manifest_images(const DatasetManifest& manifest, std::size_t h,
                                         std::size_t w, std::size_t threads = 1);

/// One row per distinct gene (first-appearance order): the mean code vector
/// over that gene's images.
FeatureMatrix build_feature_matrix(const Model& model, const DatasetManifest& manifest,
                                   std::size_t threads = 1);

/// Same, from images already loaded in manifest order.
FeatureMatrix build_feature_matrix(const Model& model, const DatasetManifest& manifest,
                                   std::span<const Tensor> images, std::size_t threads = 1);

/// CSV with header `gene_id,f0,...,f{D-1}`; values round-trip exactly.
void write_features_csv(const FeatureMatrix& m, const std::filesystem::path& path);
FeatureMatrix read_features_csv(const std::filesystem::path& path);

/// Binary: "FMAT" | u16 version | u64 rows | u64 dim | per row u32 length +
/// gene id bytes | rows*dim f64, little-endian.
void write_features_binary(const FeatureMatrix& m, const std::filesystem::path& path);
FeatureMatrix read_features_binary(const std::filesystem::path& path);

/// Dispatches on the FMAT magic.
FeatureMatrix read_features(const std::filesystem::path& path);

}  // namespace cdae
