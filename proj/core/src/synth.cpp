#include "cdae/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "binary_io.hpp"
#include "cdae/csv.hpp"
#include "cdae/error.hpp"
#include "cdae/parallel.hpp"

namespace cdae {

namespace {

constexpr std::uint64_t kLayoutStream = 0x6c61796f7574ULL;
constexpr std::uint64_t kAssignStream = 0x61737369676eULL;
constexpr std::size_t kMaxAssignAttempts = 10000;

std::string gene_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "gene%04zu", i + 1);
  return buf;
}

std::string category_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "GO:%07zu", i + 1);
  return buf;
}

}  // namespace

void SynthConfig::validate() const {
  if (genes == 0 || categories == 0 || images_per_gene == 0)
    throw_error(ErrorCode::InvalidArgument, "genes, categories and images per gene must be >= 1");
  if (height < 8 || width < 8) throw_error(ErrorCode::InvalidArgument, "images must be at least 8x8");
  if (!(label_density > 0.0 && label_density < 1.0))
    throw_error(ErrorCode::InvalidArgument, "label density must lie in (0, 1)");
  if (min_category_genes > max_category_genes)
    throw_error(ErrorCode::InvalidArgument, "min category size exceeds max");
  if (!(noise_sigma >= 0.0) || !(motif_amplitude >= 0.0))
    throw_error(ErrorCode::InvalidArgument, "noise and amplitude must be >= 0");
  if (!(background >= 0.0 && background <= 1.0) || !(tissue >= 0.0 && tissue <= 1.0))
    throw_error(ErrorCode::InvalidArgument, "background and tissue intensities must lie in [0, 1]");
  if (!(stripe_freq_lo > 0.0 && stripe_freq_lo <= stripe_freq_hi) ||
      !(blob_density_lo > 0.0 && blob_density_lo <= blob_density_hi))
    throw_error(ErrorCode::InvalidArgument, "motif parameter bands must be positive and ordered");
}

SynthDataset plan_dataset(const SynthConfig& config) {
  config.validate();
  SynthDataset ds;
  const double h = static_cast<double>(config.height), w = static_cast<double>(config.width);

  // Motif sites on a two-column grid inside the tissue ellipse.
  const std::size_t rows = (config.categories + 1) / 2;
  const double pitch_y = h / static_cast<double>(rows + 1);
  const double radius = std::max(2.0, std::min(0.4 * pitch_y, 0.15 * w));
  Rng layout(Rng::mix(config.seed, kLayoutStream));
  for (std::size_t c = 0; c < config.categories; ++c) {
    Motif m;
    m.category_id = category_name(c);
    m.family = c % 2 == 0 ? MotifFamily::Stripes : MotifFamily::Blobs;
    m.center_y = pitch_y * static_cast<double>(c / 2 + 1);
    m.center_x = (config.categories == 1 ? 0.5 : c % 2 == 0 ? 0.32 : 0.68) * w;
    m.radius = radius;
    m.frequency = layout.uniform(config.stripe_freq_lo, config.stripe_freq_hi);
    m.orientation = layout.uniform(0.0, std::numbers::pi);
    m.blob_spacing = 1.0 / std::sqrt(layout.uniform(config.blob_density_lo, config.blob_density_hi));
    m.blob_sigma = 0.3 * m.blob_spacing;
    ds.motifs.push_back(m);
  }

  Rng assign(Rng::mix(config.seed, kAssignStream));
  bool ok = false;
  std::vector<std::size_t> sizes;
  for (std::size_t attempt = 0; attempt < kMaxAssignAttempts && !ok; ++attempt) {
    ds.gene_categories.assign(config.genes, {});
    sizes.assign(config.categories, 0);
    for (std::size_t g = 0; g < config.genes; ++g)
      for (std::size_t c = 0; c < config.categories; ++c)
        if (assign.uniform() < config.label_density) {
          ds.gene_categories[g].push_back(c);
          ++sizes[c];
        }
    ok = std::all_of(sizes.begin(), sizes.end(), [&](std::size_t s) {
      return s >= config.min_category_genes && s <= config.max_category_genes;
    });
  }
  if (!ok)
    throw_error(ErrorCode::InvalidArgument,
                "unsatisfiable category sizes: " + std::to_string(config.genes) + " genes at density " +
                    format_double(config.label_density) + " never gave every category " +
                    std::to_string(config.min_category_genes) + "-" + std::to_string(config.max_category_genes) +
                    " genes");

  ds.annotations.categories.resize(config.categories);
  for (std::size_t c = 0; c < config.categories; ++c) ds.annotations.categories[c].id = ds.motifs[c].category_id;
  for (std::size_t g = 0; g < config.genes; ++g) {
    ds.gene_ids.push_back(gene_name(g));
    for (std::size_t c : ds.gene_categories[g]) ds.annotations.categories[c].genes.push_back(ds.gene_ids.back());
    for (std::size_t k = 0; k < config.images_per_gene; ++k)
      ds.manifest.rows.push_back(
          {std::filesystem::path("images") / (ds.gene_ids.back() + "_" + std::to_string(k) + ".pgm"),
           ds.gene_ids.back(), {}});
  }
  return ds;
}

GrayImage render_image(const SynthConfig& config, const std::vector<Motif>& motifs,
                       const std::vector<std::size_t>& categories, Rng& rng) {
  const std::size_t H = config.height, W = config.width;
  GrayImage img{H, W, std::vector<double>(H * W, config.background)};
  const double cy = 0.5 * static_cast<double>(H), cx = 0.5 * static_cast<double>(W);
  const double ay = 0.47 * static_cast<double>(H), ax = 0.47 * static_cast<double>(W);
  std::vector<bool> inside(H * W);
  for (std::size_t y = 0; y < H; ++y)
    for (std::size_t x = 0; x < W; ++x) {
      const double dy = (static_cast<double>(y) + 0.5 - cy) / ay, dx = (static_cast<double>(x) + 0.5 - cx) / ax;
      const double r2 = dy * dy + dx * dx;
      inside[y * W + x] = r2 <= 1.0;
      // Tissue brightens slightly towards the centre.
      if (r2 <= 1.0) img.at(y, x) = config.tissue + 0.1 * config.tissue * (1.0 - r2);
    }

  for (std::size_t c : categories) {
    const Motif& m = motifs[c];
    const double phase_a = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double off_y = rng.uniform(0.0, m.blob_spacing), off_x = rng.uniform(0.0, m.blob_spacing);
    const double cos_t = std::cos(m.orientation), sin_t = std::sin(m.orientation);
    const auto y0 = static_cast<std::size_t>(std::max(0.0, std::floor(m.center_y - m.radius - 1)));
    const auto y1 = std::min(H, static_cast<std::size_t>(std::ceil(m.center_y + m.radius + 1)));
    const auto x0 = static_cast<std::size_t>(std::max(0.0, std::floor(m.center_x - m.radius - 1)));
    const auto x1 = std::min(W, static_cast<std::size_t>(std::ceil(m.center_x + m.radius + 1)));
    for (std::size_t y = y0; y < y1; ++y)
      for (std::size_t x = x0; x < x1; ++x) {
        const double py = static_cast<double>(y) + 0.5, px = static_cast<double>(x) + 0.5;
        const double d = std::hypot(py - m.center_y, px - m.center_x);
        if (d > m.radius + 1.0 || !inside[y * W + x]) continue;
        const double edge = std::clamp(m.radius + 1.0 - d, 0.0, 1.0);  // one-pixel soft rim
        double pattern;
        if (m.family == MotifFamily::Stripes) {
          const double t = (px * cos_t + py * sin_t) * m.frequency * 2.0 * std::numbers::pi + phase_a;
          pattern = 0.5 + 0.5 * std::sin(t);
        } else {
          // Nearest lattice node of the phase-shifted blob grid.
          const double gy = std::round((py - off_y) / m.blob_spacing) * m.blob_spacing + off_y;
          const double gx = std::round((px - off_x) / m.blob_spacing) * m.blob_spacing + off_x;
          const double r2 = (py - gy) * (py - gy) + (px - gx) * (px - gx);
          pattern = std::exp(-r2 / (2.0 * m.blob_sigma * m.blob_sigma));
        }
        img.at(y, x) += config.motif_amplitude * edge * pattern;
      }
  }

  for (std::size_t i = 0; i < img.values.size(); ++i) {
    if (inside[i] && config.noise_sigma > 0.0) img.values[i] += config.noise_sigma * rng.normal();
    img.values[i] = std::clamp(img.values[i], 0.0, 1.0);
  }
  return img;
}

SynthDataset generate(const SynthConfig& config, const std::filesystem::path& out_dir, std::size_t threads) {
  SynthDataset ds = plan_dataset(config);
  std::filesystem::create_directories(out_dir / "images");
  parallel_for(config.genes, threads, [&](std::size_t g) {
    const Rng gene_rng(Rng::mix(config.seed, g + 1));
    for (std::size_t k = 0; k < config.images_per_gene; ++k) {
      Rng rng = gene_rng.derive(k);
      const GrayImage img = render_image(config, ds.motifs, ds.gene_categories[g], rng);
      write_pgm(img, out_dir / ds.manifest.rows[g * config.images_per_gene + k].image);
    }
  });
  ds.manifest.base_dir = out_dir;
  write_manifest(ds.manifest, out_dir / "manifest.csv");
  write_annotations(ds.annotations, out_dir / "annotations.csv");

  std::string truth =
      "gene_id,category_id,family,center_y,center_x,radius,frequency,orientation,blob_spacing,blob_sigma\n";
  for (std::size_t g = 0; g < config.genes; ++g)
    for (std::size_t c : ds.gene_categories[g]) {
      const Motif& m = ds.motifs[c];
      truth += ds.gene_ids[g] + "," + m.category_id + "," +
               (m.family == MotifFamily::Stripes ? "stripes" : "blobs") + "," + format_double(m.center_y) + "," +
               format_double(m.center_x) + "," + format_double(m.radius) + "," + format_double(m.frequency) +
               "," + format_double(m.orientation) + "," + format_double(m.blob_spacing) + "," +
               format_double(m.blob_sigma) + "\n";
    }
  detail::write_text_file(out_dir / "ground_truth.csv", truth);
  return ds;
}

}  // namespace cdae
