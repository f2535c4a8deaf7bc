#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cdae/classify.hpp"
#include "cdae/features.hpp"
#include "cdae/image.hpp"
#include "cdae/rng.hpp"

namespace cdae {

/// Parameters of the synthetic expression-image generator.
struct SynthConfig {
  std::size_t genes = 200;
  std::size_t categories = 8;
  std::size_t height = 96;
  std::size_t width = 48;
  std::size_t images_per_gene = 1;
  double label_density = 0.15;         // P(gene in category), independent per pair
  std::size_t min_category_genes = 15;
  std::size_t max_category_genes = 60;
  double stripe_freq_lo = 0.12;        // cycles per pixel
  double stripe_freq_hi = 0.30;
  double blob_density_lo = 0.04;       // blobs per pixel of motif area
  double blob_density_hi = 0.09;
  double background = 0.25;            // slide intensity outside the tissue
  double tissue = 0.35;                // tissue intensity at the rim
  double motif_amplitude = 0.35;
  double noise_sigma = 0.03;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class MotifFamily { Stripes, Blobs };

/// Texture that marks membership in one category. Positions are in pixels.
struct Motif {
  std::string category_id;
  MotifFamily family = MotifFamily::Stripes;
  double center_y = 0.0;
  double center_x = 0.0;
  double radius = 0.0;
  double frequency = 0.0;     // stripes: cycles per pixel
  double orientation = 0.0;   // stripes: radians
  double blob_spacing = 0.0;  // blobs: lattice pitch in pixels
  double blob_sigma = 0.0;    // blobs: Gaussian width in pixels
};

struct SynthDataset {
  DatasetManifest manifest;
  AnnotationTable annotations;
  std::vector<Motif> motifs;                              // one per category
  std::vector<std::string> gene_ids;
  std::vector<std::vector<std::size_t>> gene_categories;  // category indices per gene
};

/// Deterministic category layout and gene assignment (no rendering).
/// Throws InvalidArgument when no assignment meets the size bounds.
SynthDataset plan_dataset(const SynthConfig& config);

/// Elliptical tissue mask plus each listed category's motif (random phase)
/// plus Gaussian pixel noise inside the mask, clamped to [0, 1].
GrayImage render_image(const SynthConfig& config, const std::vector<Motif>& motifs,
                       const std::vector<std::size_t>& categories, Rng& rng);

/// Writes images/*.pgm, manifest.csv, annotations.csv and ground_truth.csv
/// (`gene_id,category_id,family,center_y,center_x,radius,frequency,orientation,blob_spacing,blob_sigma`)
/// under `out_dir`.
SynthDataset generate(const SynthConfig& config, const std::filesystem::path& out_dir,
                      std::size_t threads = 1);

}  // namespace cdae
