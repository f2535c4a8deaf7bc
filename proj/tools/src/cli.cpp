#include "cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cdae/cdae.hpp"

namespace cdae::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

// Seed streams split off the user seed so model init, masking and fold
// assignment never share a generator.
constexpr std::uint64_t kInitStream = 101;
constexpr std::uint64_t kTrainStream = 102;
constexpr std::uint64_t kClassifyStream = 103;

struct GlobalOptions {
  std::optional<std::size_t> threads;
};

struct SynthOptions {
  std::string out;
  SynthConfig cfg;
};

struct TrainOptions {
  std::string spec = "desk";
  std::string manifest;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t epochs = 30;
  std::size_t batch = 16;
  double lr = 0.05;
  double decay = 0.9;
  std::optional<double> corrupt;
};

struct EncodeOptions {
  std::string model;
  std::string spec;
  std::string manifest;
  std::string out;
  std::uint64_t seed = 0;
  bool binary = false;
};

struct ClassifyCliOptions {
  std::string features;
  std::string annotations;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t folds = 5;
  std::size_t min_genes = 15;
  std::size_t max_genes = 500;
  std::vector<double> lambdas;
};

struct EvaluateOptions {
  std::vector<std::string> aucs;
  std::vector<std::size_t> dimensions;
  std::string out;
  bool markdown = false;
};

struct GradcheckOptions {
  std::uint64_t seed = 7;
  double eps = 1e-5;
};

struct PipelineOptions {
  std::string spec = "desk";
  std::string out;
  std::uint64_t seed = 0;
  std::size_t genes = 200;
  std::size_t categories = 8;
  std::size_t images_per_gene = 1;
  double noise = SynthConfig{}.noise_sigma;
  double density = SynthConfig{}.label_density;
  std::size_t epochs = 30;
  std::size_t batch = 16;
  double lr = 0.05;
  double decay = 0.9;
  std::size_t folds = 5;
  std::size_t min_genes = 15;
  std::size_t max_genes = 500;
};

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_error(ErrorCode::MissingFile, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw_error(ErrorCode::Io, "cannot write " + path.string());
  os << text;
  if (!os) throw_error(ErrorCode::Io, "write failed for " + path.string());
}

fs::path ensure_dir(const std::string& dir) {
  if (dir.empty()) throw_error(ErrorCode::InvalidArgument, "--out is required");
  fs::create_directories(dir);
  return fs::path(dir);
}

/// A path to an architecture file or the name of a built-in preset.
ArchitectureSpec resolve_spec(const std::string& arg) {
  std::string text;
  if (fs::exists(arg)) {
    text = read_text(arg);
  } else {
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), arg) == names.end())
      throw_error(ErrorCode::MissingFile, "no architecture file or preset named '" + arg + "'");
    text = preset_text(arg);
  }
  try {
    return parse_spec(text);
  } catch (const Error& e) {
    // A malformed architecture is a configuration problem whatever the cause.
    throw Error(ErrorCode::InvalidArgument, "architecture '" + arg + "': " + e.what());
  }
}

void write_run_json(const fs::path& dir, const Json& record) {
  Json j;
  j["tool"] = "cdae";
  j["version"] = CDAE_VERSION;
  j["model_format"] = kModelFormatVersion;
  for (auto it = record.begin(); it != record.end(); ++it) j[it.key()] = it.value();
  write_text(dir / "run.json", j.dump(2) + "\n");
}

std::string log_line(const EpochStats& s) {
  return std::to_string(s.epoch) + "," + format_double(s.lr) + "," + format_double(s.mean_mse) + "\n";
}

LossHistory train_and_log(Model& model, std::span<const Tensor> images, const TrainConfig& cfg,
                          const fs::path& out_dir, Streams io) {
  std::string log = "epoch,lr,mean_mse\n";
  auto history = train(model, images, cfg, [&](const EpochStats& s) {
    log += log_line(s);
    io.err << "epoch " << s.epoch << "/" << cfg.epochs << "  lr " << s.lr << "  mse " << s.mean_mse
           << std::endl;
  });
  write_text(out_dir / "train_log.csv", log);
  return history;
}

Json train_config_json(const TrainConfig& cfg) {
  return Json{{"epochs", cfg.epochs},       {"batch_size", cfg.batch_size}, {"lr0", cfg.lr0},
              {"decay", cfg.decay},         {"corruption_rate", cfg.corruption_rate},
              {"seed", cfg.seed}};
}

Json grid_json(const std::vector<double>& grid) {
  Json a = Json::array();
  for (double v : grid) a.push_back(v);
  return a;
}

// ---------------------------------------------------------------------------

int cmd_synth(const SynthOptions& o, std::size_t threads, Streams io) {
  const fs::path out = ensure_dir(o.out);
  o.cfg.validate();
  const SynthDataset ds = generate(o.cfg, out, threads);
  io.out << "wrote " << ds.manifest.rows.size() << " images for " << ds.gene_ids.size() << " genes, "
         << ds.annotations.categories.size() << " categories to " << out.string() << "\n";
  write_run_json(out, Json{{"command", "synth"},
                           {"seed", o.cfg.seed},
                           {"genes", o.cfg.genes},
                           {"categories", o.cfg.categories},
                           {"height", o.cfg.height},
                           {"width", o.cfg.width},
                           {"images_per_gene", o.cfg.images_per_gene},
                           {"noise_sigma", o.cfg.noise_sigma}});
  return kOk;
}

int cmd_train(const TrainOptions& o, std::size_t threads, Streams io) {
  const ArchitectureSpec spec = resolve_spec(o.spec);
  TrainConfig cfg;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch;
  cfg.lr0 = o.lr;
  cfg.decay = o.decay;
  cfg.corruption_rate = o.corrupt.value_or(spec.corruption_rate);
  cfg.seed = Rng::mix(o.seed, kTrainStream);
  cfg.threads = threads;
  cfg.validate();
  const fs::path out = ensure_dir(o.out);

  const DatasetManifest manifest = read_manifest(o.manifest);
  const auto images = load_manifest_images(manifest, spec.input_h, spec.input_w, threads);
  Model model = Model::initialize(spec, Rng::mix(o.seed, kInitStream));
  const auto history = train_and_log(model, images, cfg, out, io);
  save_model(model, out / "model.cdae");
  io.out << "trained " << model.parameter_count() << " parameters on " << images.size()
         << " images; mse " << history.front().mean_mse << " -> " << history.back().mean_mse << "\n";
  write_run_json(out, Json{{"command", "train-cdae"},
                           {"seed", o.seed},
                           {"spec", o.spec},
                           {"manifest", o.manifest},
                           {"train", train_config_json(cfg)}});
  return kOk;
}

int cmd_encode(const EncodeOptions& o, std::size_t threads, Streams io) {
  if (o.model.empty() == o.spec.empty())
    throw_error(ErrorCode::InvalidArgument, "encode needs exactly one of --model or --spec");
  Model model = o.model.empty() ? Model::initialize(resolve_spec(o.spec), Rng::mix(o.seed, kInitStream))
                                : load_model(o.model);
  const fs::path out = ensure_dir(o.out);
  const DatasetManifest manifest = read_manifest(o.manifest);
  const FeatureMatrix fm = build_feature_matrix(model, manifest, threads);
  const fs::path file = out / (o.binary ? "features.fmat" : "features.csv");
  if (o.binary) write_features_binary(fm, file);
  else write_features_csv(fm, file);
  io.out << "encoded " << fm.rows() << " genes x " << fm.dim << " features to " << file.string() << "\n";
  write_run_json(out, Json{{"command", "encode"},
                           {"seed", o.seed},
                           {"model", o.model},
                           {"spec", o.spec},
                           {"manifest", o.manifest},
                           {"feature_dim", fm.dim}});
  return kOk;
}

int run_classification(const FeatureMatrix& fm, const AnnotationTable& table, const ClassifyOptions& opts,
                       const fs::path& out, Streams io, std::vector<CategoryResult>& results) {
  std::vector<std::string> warnings;
  results = classify_categories(fm, table, opts, &warnings);
  for (const auto& w : warnings) io.err << "warning: " << w << "\n";
  write_aucs_csv(results, out / "aucs.csv");
  if (results.empty()) {
    io.err << "no categories left after filtering (" << opts.min_genes << ".." << opts.max_genes
           << " genes)\n";
    return kNoCategories;
  }
  return kOk;
}

ClassifyOptions make_classify_options(std::uint64_t seed, std::size_t folds, std::size_t min_genes,
                                      std::size_t max_genes, const std::vector<double>& lambdas,
                                      std::size_t threads) {
  ClassifyOptions opts;
  opts.cv.seed = Rng::mix(seed, kClassifyStream);
  opts.cv.folds = folds;
  if (!lambdas.empty()) opts.cv.lambda_grid = lambdas;
  opts.min_genes = min_genes;
  opts.max_genes = max_genes;
  opts.threads = threads;
  if (folds < 2) throw_error(ErrorCode::InvalidArgument, "--folds must be >= 2");
  if (min_genes > max_genes) throw_error(ErrorCode::InvalidArgument, "--min-genes exceeds --max-genes");
  for (double l : opts.cv.lambda_grid)
    if (!(l >= 0.0) || !std::isfinite(l)) throw_error(ErrorCode::InvalidArgument, "lambda must be finite and >= 0");
  return opts;
}

int cmd_classify(const ClassifyCliOptions& o, std::size_t threads, Streams io) {
  const ClassifyOptions opts =
      make_classify_options(o.seed, o.folds, o.min_genes, o.max_genes, o.lambdas, threads);
  const fs::path out = ensure_dir(o.out);
  const FeatureMatrix fm = read_features(o.features);
  const AnnotationTable table = read_annotations(o.annotations);
  std::vector<CategoryResult> results;
  const int code = run_classification(fm, table, opts, out, io, results);
  write_run_json(out, Json{{"command", "classify"},
                           {"seed", o.seed},
                           {"features", o.features},
                           {"annotations", o.annotations},
                           {"folds", o.folds},
                           {"min_genes", o.min_genes},
                           {"max_genes", o.max_genes},
                           {"lambda_grid", grid_json(opts.cv.lambda_grid)}});
  if (code == kOk) io.out << "classified " << results.size() << " categories\n";
  return code;
}

void write_reports(std::span<const EvalReport> reports, const fs::path& out, bool markdown, Streams io) {
  std::string md;
  std::string csv;
  for (const auto& r : reports) {
    if (reports.size() > 1) md += "## dimension " + std::to_string(r.dimension) + "\n\n";
    md += report_table(r, true) + "\n";
    csv += report_csv(r);
    io.out << report_table(r, markdown) << "\n";
  }
  write_text(out / "report.md", md);
  write_text(out / "report.csv", csv);
  write_text(out / "plot_data.csv", plot_data_csv(reports));
}

int cmd_evaluate(const EvaluateOptions& o, Streams io) {
  if (o.aucs.empty()) throw_error(ErrorCode::InvalidArgument, "evaluate needs at least one --aucs file");
  std::vector<std::size_t> dims = o.dimensions;
  if (dims.empty() && o.aucs.size() == 1) dims.push_back(0);
  if (dims.size() != o.aucs.size())
    throw_error(ErrorCode::InvalidArgument, "give one --dimension per --aucs file");
  const fs::path out = ensure_dir(o.out);
  std::vector<EvalReport> reports;
  for (std::size_t i = 0; i < o.aucs.size(); ++i) {
    const auto results = read_aucs_csv(o.aucs[i]);
    if (results.empty()) {
      write_text(out / "report.md", "no categories: " + o.aucs[i] + " holds no results\n");
      io.err << "no categories in " << o.aucs[i] << "\n";
      return kNoCategories;
    }
    reports.push_back(summarize(results, dims[i]));
  }
  write_reports(reports, out, o.markdown, io);
  Json inputs = Json::array();
  for (std::size_t i = 0; i < o.aucs.size(); ++i) inputs.push_back(Json{{"aucs", o.aucs[i]}, {"dimension", dims[i]}});
  write_run_json(out, Json{{"command", "evaluate"}, {"inputs", inputs}});
  return kOk;
}

struct GradcheckCase {
  const char* name;
  const char* spec;
  bool linear;
};

// One case per layer kind, the three mixed chains, and two purely linear chains.
const std::vector<GradcheckCase>& gradcheck_cases() {
  static const std::vector<GradcheckCase> cases = {
      {"conv", "input 8 6\nconv filters=1 kernel=3 act=none\nbottleneck after=1\n", true},
      {"conv-chain", "input 8 6\nconv filters=2 kernel=3 act=none\nconv filters=2 kernel=5 act=none\n"
                     "deconv filters=1 kernel=3 act=none\nbottleneck after=2\n", true},
      {"conv-relu", "input 8 6\nconv filters=3 kernel=3 act=relu\nconv filters=1 kernel=5 act=none\n"
                    "bottleneck after=1\n", false},
      {"deconv-tanh", "input 8 6\nconv filters=2 kernel=3 act=none\ndeconv filters=1 kernel=3 act=tanh\n"
                      "bottleneck after=1\n", false},
      {"maxpool", "input 8 6\nconv filters=2 kernel=3 act=none\nmaxpool size=2\nunpool size=2\n"
                  "conv filters=1 kernel=1 act=none\nbottleneck after=2\n", false},
      {"unpool", "input 8 6\nmaxpool size=2\nconv filters=2 kernel=3 act=none\nunpool size=2\n"
                 "deconv filters=1 kernel=3 act=none\nbottleneck after=2\n", false},
      {"activation-relu", "input 8 6\nconv filters=2 kernel=3 act=none\nactivation act=relu\n"
                          "deconv filters=1 kernel=3 act=none\nbottleneck after=2\n", false},
      {"activation-tanh", "input 8 6\nconv filters=2 kernel=3 act=none\nactivation act=tanh\n"
                          "deconv filters=1 kernel=3 act=none\nbottleneck after=2\n", false},
      {"chain-pool", "input 8 8\nconv filters=2 kernel=3 act=none\nmaxpool size=2\nunpool size=2\n"
                     "deconv filters=1 kernel=3 act=none\nbottleneck after=2\n", false},
      {"chain-relu", "input 8 8\nconv filters=2 kernel=3 act=relu\nmaxpool size=2\nunpool size=2\n"
                     "deconv filters=1 kernel=3 act=none\nbottleneck after=2\n", false},
      {"chain-tanh", "input 8 8\nconv filters=2 kernel=3 act=relu\nmaxpool size=2\nunpool size=2\n"
                     "deconv filters=1 kernel=3 act=tanh\nbottleneck after=2\n", false},
  };
  return cases;
}

int cmd_gradcheck(const GradcheckOptions& o, Streams io) {
  if (!(o.eps > 0.0)) throw_error(ErrorCode::InvalidArgument, "--eps must be positive");
  double worst = 0.0;
  double worst_linear = 0.0;
  Rng root(o.seed);
  for (std::size_t i = 0; i < gradcheck_cases().size(); ++i) {
    const auto& c = gradcheck_cases()[i];
    Rng rng = root.derive(i);
    const double err = gradient_check(parse_spec(c.spec), rng, o.eps);
    (c.linear ? worst_linear : worst) = std::max(c.linear ? worst_linear : worst, err);
    io.out << c.name << (c.linear ? " (linear)" : "") << ": " << err << "\n";
  }
  const bool ok = worst < 1e-5 && worst_linear < 1e-10;
  io.out << "max relative error " << std::max(worst, worst_linear) << " (linear chains " << worst_linear
         << ")\n"
         << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? kOk : kNumeric;
}

int cmd_pipeline(const PipelineOptions& o, std::size_t threads, Streams io) {
  const auto t0 = std::chrono::steady_clock::now();
  const ArchitectureSpec spec = resolve_spec(o.spec);
  const fs::path out = ensure_dir(o.out);

  SynthConfig synth;
  synth.genes = o.genes;
  synth.categories = o.categories;
  synth.height = spec.input_h;
  synth.width = spec.input_w;
  synth.images_per_gene = o.images_per_gene;
  synth.noise_sigma = o.noise;
  synth.label_density = o.density;
  synth.seed = o.seed;
  synth.validate();

  TrainConfig cfg;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch;
  cfg.lr0 = o.lr;
  cfg.decay = o.decay;
  cfg.corruption_rate = spec.corruption_rate;
  cfg.seed = Rng::mix(o.seed, kTrainStream);
  cfg.threads = threads;
  cfg.validate();
  const ClassifyOptions copts = make_classify_options(o.seed, o.folds, o.min_genes, o.max_genes, {}, threads);

  io.err << "[1/5] synth\n";
  const SynthDataset ds = generate(synth, out / "data", threads);
  const DatasetManifest manifest = read_manifest(out / "data" / "manifest.csv");
  const auto images = load_manifest_images(manifest, spec.input_h, spec.input_w, threads);

  io.err << "[2/5] train-cdae\n";
  Model model = Model::initialize(spec, Rng::mix(o.seed, kInitStream));
  const auto history = train_and_log(model, images, cfg, out, io);
  save_model(model, out / "model.cdae");

  io.err << "[3/5] encode\n";
  const FeatureMatrix fm = build_feature_matrix(model, manifest, images, threads);
  write_features_csv(fm, out / "features.csv");

  io.err << "[4/5] classify\n";
  std::vector<CategoryResult> results;
  const int code = run_classification(fm, ds.annotations, copts, out, io, results);

  Json record{{"command", "pipeline"},
              {"seed", o.seed},
              {"spec", o.spec},
              {"synth", Json{{"genes", synth.genes},
                             {"categories", synth.categories},
                             {"height", synth.height},
                             {"width", synth.width},
                             {"images_per_gene", synth.images_per_gene},
                             {"noise_sigma", synth.noise_sigma},
                             {"label_density", synth.label_density}}},
              {"train", train_config_json(cfg)},
              {"classify", Json{{"folds", copts.cv.folds},
                                {"min_genes", copts.min_genes},
                                {"max_genes", copts.max_genes},
                                {"lambda_grid", grid_json(copts.cv.lambda_grid)}}},
              {"feature_dim", fm.dim},
              {"first_epoch_mse", history.front().mean_mse},
              {"last_epoch_mse", history.back().mean_mse}};
  if (code != kOk) {
    write_text(out / "report.md", "no categories left after filtering\n");
    write_run_json(out, record);
    return code;
  }

  io.err << "[5/5] evaluate\n";
  const EvalReport report = summarize(results, fm.dim);
  write_reports(std::span<const EvalReport>(&report, 1), out, false, io);
  record["mean_auc"] = report.mean_auc;
  write_run_json(out, record);

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  io.out << "mse epoch 1 " << history.front().mean_mse << ", epoch " << history.back().epoch << " "
         << history.back().mean_mse << "\n"
         << "mean AUC " << report.mean_auc << " over " << report.categories.size() << " categories\n"
         << "elapsed " << secs << " s\n";
  return kOk;
}

int exit_code_for(const Error& e) {
  if (e.code() == ErrorCode::NoCategories) return kNoCategories;
  switch (e.category()) {
    case ErrorCategory::Config: return kConfig;
    case ErrorCategory::Data: return kData;
    case ErrorCategory::Numeric: return kNumeric;
  }
  return kInternal;
}

}  // namespace

int run(int argc, char** argv) { return run(argc, argv, std::cout, std::cerr); }

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Convolutional denoising autoencoder features for gene-function classification", "cdae"};
  app.require_subcommand(1);
  app.set_version_flag("--version", CDAE_VERSION);

  GlobalOptions global;
  app.add_option("--threads", global.threads, "Worker threads (default: CDAE_THREADS or hardware count)")
      ->check(CLI::PositiveNumber);

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic labelled image set");
  synth->add_option("--out", so.out, "Output directory")->required();
  synth->add_option("--seed", so.cfg.seed, "Random seed");
  synth->add_option("--genes", so.cfg.genes, "Number of genes");
  synth->add_option("--categories", so.cfg.categories, "Number of categories");
  synth->add_option("--height", so.cfg.height, "Image height");
  synth->add_option("--width", so.cfg.width, "Image width");
  synth->add_option("--images-per-gene", so.cfg.images_per_gene, "Images per gene");
  synth->add_option("--noise", so.cfg.noise_sigma, "Pixel noise sigma");
  synth->add_option("--density", so.cfg.label_density, "Probability a gene joins a category");

  TrainOptions to;
  auto* trainc = app.add_subcommand("train-cdae", "Train an autoencoder on a manifest of images");
  trainc->add_option("--spec,--config", to.spec, "Architecture file or preset name")->capture_default_str();
  trainc->add_option("--manifest", to.manifest, "Image manifest CSV")->required();
  trainc->add_option("--out", to.out, "Output directory")->required();
  trainc->add_option("--seed", to.seed, "Random seed");
  trainc->add_option("--epochs", to.epochs, "Training epochs")->capture_default_str();
  trainc->add_option("--batch", to.batch, "Mini-batch size")->capture_default_str();
  trainc->add_option("--lr", to.lr, "Initial learning rate")->capture_default_str();
  trainc->add_option("--decay", to.decay, "Per-epoch learning rate factor")->capture_default_str();
  trainc->add_option("--corrupt", to.corrupt, "Masking rate (default: from the architecture)");

  EncodeOptions eo;
  auto* encode = app.add_subcommand("encode", "Compute per-gene feature vectors");
  auto* model_opt = encode->add_option("--model", eo.model, "Trained model file");
  auto* spec_opt = encode->add_option("--spec,--config", eo.spec, "Architecture for a randomly initialised model");
  model_opt->excludes(spec_opt);
  encode->add_option("--manifest", eo.manifest, "Image manifest CSV")->required();
  encode->add_option("--out", eo.out, "Output directory")->required();
  encode->add_option("--seed", eo.seed, "Seed for --spec initialisation");
  encode->add_flag("--binary", eo.binary, "Write features.fmat instead of features.csv");

  ClassifyCliOptions co;
  auto* classify = app.add_subcommand("classify", "Nested cross-validated classification per category");
  classify->add_option("--features", co.features, "Feature file (CSV or binary)")->required();
  classify->add_option("--annotations", co.annotations, "category_id,gene_id CSV")->required();
  classify->add_option("--out", co.out, "Output directory")->required();
  classify->add_option("--seed", co.seed, "Random seed");
  classify->add_option("--folds", co.folds, "Outer and inner fold count")->capture_default_str();
  classify->add_option("--min-genes", co.min_genes, "Smallest category kept")->capture_default_str();
  classify->add_option("--max-genes", co.max_genes, "Largest category kept")->capture_default_str();
  classify->add_option("--lambda", co.lambdas, "Regularisation grid (repeatable)");

  EvaluateOptions vo;
  auto* evaluate = app.add_subcommand("evaluate", "Summarise AUC files into reports");
  evaluate->add_option("--aucs", vo.aucs, "aucs.csv from classify (repeatable)")->required();
  evaluate->add_option("--dimension", vo.dimensions, "Feature dimension of each --aucs file");
  evaluate->add_option("--out", vo.out, "Output directory")->required();
  evaluate->add_flag("--markdown", vo.markdown, "Print a markdown table");

  GradcheckOptions go;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every layer kind");
  gradcheck->add_option("--seed", go.seed, "Random seed")->capture_default_str();
  gradcheck->add_option("--eps", go.eps, "Central difference step")->capture_default_str();

  PipelineOptions po;
  auto* pipeline = app.add_subcommand("pipeline", "synth, train-cdae, encode, classify and evaluate");
  pipeline->add_option("--spec,--config", po.spec, "Architecture file or preset name")->capture_default_str();
  pipeline->add_option("--out", po.out, "Output directory")->required();
  pipeline->add_option("--seed", po.seed, "Random seed");
  pipeline->add_option("--genes", po.genes, "Number of genes")->capture_default_str();
  pipeline->add_option("--categories", po.categories, "Number of categories")->capture_default_str();
  pipeline->add_option("--images-per-gene", po.images_per_gene, "Images per gene")->capture_default_str();
  pipeline->add_option("--noise", po.noise, "Pixel noise sigma")->capture_default_str();
  pipeline->add_option("--density", po.density, "Probability a gene joins a category")->capture_default_str();
  pipeline->add_option("--epochs", po.epochs, "Training epochs")->capture_default_str();
  pipeline->add_option("--batch", po.batch, "Mini-batch size")->capture_default_str();
  pipeline->add_option("--lr", po.lr, "Initial learning rate")->capture_default_str();
  pipeline->add_option("--decay", po.decay, "Per-epoch learning rate factor")->capture_default_str();
  pipeline->add_option("--folds", po.folds, "Outer and inner fold count")->capture_default_str();
  pipeline->add_option("--min-genes", po.min_genes, "Smallest category kept")->capture_default_str();
  pipeline->add_option("--max-genes", po.max_genes, "Largest category kept")->capture_default_str();

  if (argc <= 1) {
    err << app.help();
    return kUsage;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << CDAE_VERSION << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  const Streams io{out, err};
  try {
    const std::size_t threads = resolve_threads(global.threads);
    if (*synth) return cmd_synth(so, threads, io);
    if (*trainc) return cmd_train(to, threads, io);
    if (*encode) return cmd_encode(eo, threads, io);
    if (*classify) return cmd_classify(co, threads, io);
    if (*evaluate) return cmd_evaluate(vo, io);
    if (*gradcheck) return cmd_gradcheck(go, io);
    if (*pipeline) return cmd_pipeline(po, threads, io);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}

}  // namespace cdae::cli
