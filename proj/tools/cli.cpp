#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "autocrop/cascade.hpp"
#include "autocrop/data.hpp"
#include "autocrop/error.hpp"
#include "autocrop/harness.hpp"
#include "autocrop/parallel.hpp"

namespace autocrop::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Training data for the stand-alone split when a directory has no
// train.csv/test.csv pair.
constexpr double kTrainFraction = 0.7;
constexpr std::uint64_t kSplitSeed = 0x5eed;

struct Hyper {
  CascadeParams params;
  int cap = 256;
  std::uint64_t weight_seed = 7;
  std::string weights;
  std::string init_crop = "full";
  int threads = 0;
};

void add_threads(CLI::App* cmd, int& threads) {
  cmd->add_option("--threads", threads, "Worker threads (default: all cores)")->check(CLI::PositiveNumber);
}

void add_hyper(CLI::App* cmd, Hyper& h) {
  CascadeParams& p = h.params;
  cmd->add_option("--T", p.stages, "Cascade stages")->check(CLI::Range(0, 1000))->capture_default_str();
  cmd->add_option("--S", p.boost.depth, "Comparisons per fern")->check(CLI::Range(1, 8))->capture_default_str();
  cmd->add_option("--M", p.boost.iterations, "Ferns per primitive regressor")
      ->check(CLI::Range(1, 100000))
      ->capture_default_str();
  cmd->add_option("--Q", p.boost.candidates, "Candidate ferns per boosting iteration")
      ->check(CLI::Range(1, 100000))
      ->capture_default_str();
  cmd->add_option("--lambda", p.shrinkage, "Stage shrinkage in (0, 1]")
      ->check(CLI::Range(0.0, 1.0) & CLI::Validator(
                                         [](std::string& s) {
                                           return std::stod(s) > 0.0 ? std::string() : "lambda must be positive";
                                         },
                                         "", "positive"))
      ->capture_default_str();
  cmd->add_option("--beta", p.boost.beta, "Fern bin shrinkage")->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd->add_option("--seed", p.seed, "Training seed")->capture_default_str();
  cmd->add_option("--validation-fraction", p.validation_fraction, "Held-out share for early stopping")
      ->check(CLI::Range(0.0, 0.99))
      ->capture_default_str();
  cmd->add_option("--patience", p.patience, "Stages without validation gain before stopping")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--init-crop", h.init_crop, "Initial crop: full, 0.5 or 0.25")
      ->check(CLI::IsMember({"full", "1", "1.0", "0.5", "0.25"}))
      ->capture_default_str();
  cmd->add_option("--cap", h.cap, "Longest side fed to the network")->check(CLI::Range(32, 4096))->capture_default_str();
  cmd->add_option("--weight-seed", h.weight_seed, "Seed of the generated network weights")->capture_default_str();
  cmd->add_option("--weights", h.weights, "Network weight file (overrides --weight-seed)");
  add_threads(cmd, h.threads);
}

ExtractorConfig make_extractor(const Hyper& h) {
  if (h.weights.empty()) return ExtractorConfig::random(h.weight_seed, h.cap);
  ExtractorConfig cfg = load_weights(h.weights);
  cfg.cap = h.cap;
  cfg.validate();
  return cfg;
}

void apply_threads(int threads) {
  if (threads > 0) set_thread_count(threads);
}

/// A dataset argument is either an annotation CSV or a directory holding
/// annotations.csv and optionally a train.csv/test.csv pair.
struct DataSource {
  fs::path base;
  std::vector<AnnotationRecord> train;
  std::vector<AnnotationRecord> test;
};

std::vector<AnnotationRecord> load_csv(const fs::path& path, std::ostream& err) {
  std::vector<std::string> warnings;
  auto records = load_annotations(path, &warnings);
  for (const std::string& w : warnings) err << "warning: " << path.string() << ": " << w << "\n";
  if (records.empty()) throw ConfigError("no annotations in " + path.string());
  return records;
}

DataSource resolve_data(const fs::path& arg, std::ostream& err) {
  DataSource src;
  if (!fs::exists(arg)) throw IoError("no such dataset: " + arg.string());
  if (fs::is_directory(arg)) {
    src.base = arg;
    if (fs::exists(arg / "train.csv") && fs::exists(arg / "test.csv")) {
      src.train = load_csv(arg / "train.csv", err);
      src.test = load_csv(arg / "test.csv", err);
      return src;
    }
    const auto all = load_csv(arg / "annotations.csv", err);
    if (all.size() < 2) {
      src.train = src.test = all;
    } else {
      std::tie(src.train, src.test) = split(all, kTrainFraction, kSplitSeed);
    }
    return src;
  }
  src.base = arg.parent_path();
  src.train = src.test = load_csv(arg, err);
  return src;
}

std::string rect_text(const PixelRect& r) {
  return std::to_string(r.x1) + " " + std::to_string(r.y1) + " " + std::to_string(r.x2) + " " + std::to_string(r.y2);
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir, std::ostream& out) {
  const SynthSpec spec = spec_path.empty() ? SynthSpec{} : load_synth_spec(spec_path);
  const auto records = synth_generate(spec, out_dir);
  out << "wrote " << records.size() << " images to " << out_dir << "\n";
  return kOk;
}

int cmd_train(Hyper h, const std::string& data, const std::string& model_path, std::ostream& out,
              std::ostream& err) {
  apply_threads(h.threads);
  h.params.initial_crop = parse_initial_crop(h.init_crop);
  h.params.validate();
  const DataSource src = resolve_data(data, err);
  const auto images = load_dataset(src.train, src.base);
  const ExtractorConfig extractor = make_extractor(h);
  err << "training on " << images.size() << " images\n";
  const CascadeModel model = ccr_train(to_train_samples(images), h.params, extractor, [&](const StageStats& s) {
    err << "stage " << s.stage << " train_iou=" << fixed(s.train_iou, 4)
        << " val_iou=" << fixed(s.validation_iou, 4) << "\n";
  });
  save_model(model, model_path);
  out << "saved " << model_path << " (" << model.stage_count() << " stages)\n";
  return kOk;
}

int cmd_predict(const std::string& model_path, const std::string& image_path, const std::string& trace_dir,
                bool as_json, int threads, std::ostream& out) {
  apply_threads(threads);
  const CascadeModel model = load_model(model_path);
  const Image img = load_ppm(image_path);
  const Prediction p = ccr_predict(model, img);
  const PixelRect r = denormalize(p.region, img.dims());
  if (!trace_dir.empty()) write_crop_sequence(p, img, kSequenceStages, trace_dir);
  if (as_json) {
    json traj = json::array();
    for (const CropRegion& c : p.trajectory) {
      const PixelRect s = denormalize(clamp_to_image(c, img.dims()), img.dims());
      traj.push_back({s.x1, s.y1, s.x2, s.y2});
    }
    json doc{{"image", image_path},
             {"rect", {r.x1, r.y1, r.x2, r.y2}},
             {"normalized", p.region.as_array()},
             {"stages", model.stage_count()},
             {"trajectory", std::move(traj)}};
    out << doc.dump() << "\n";
  } else {
    out << rect_text(r) << "\n";
  }
  return kOk;
}

int cmd_eval(const std::string& model_path, const std::string& data, bool as_json, int threads, std::ostream& out,
             std::ostream& err) {
  apply_threads(threads);
  const CascadeModel model = load_model(model_path);
  const DataSource src = resolve_data(data, err);
  const auto images = load_dataset(src.test, src.base);
  const auto curve = run_curve(model, images);
  const CurvePoint& last = curve.back();
  if (as_json) {
    json stages = json::array();
    for (const CurvePoint& c : curve) stages.push_back({{"stage", c.stage}, {"mean_iou", c.mean_iou}, {"mean_bde", c.mean_bde}});
    json doc{{"images", images.size()}, {"mean_iou", last.mean_iou}, {"mean_bde", last.mean_bde}, {"curve", stages}};
    out << doc.dump() << "\n";
  } else {
    out << "mean_iou=" << fixed(last.mean_iou, 3) << " mean_bde=" << fixed(last.mean_bde, 3) << "\n";
  }
  return kOk;
}

int cmd_bench(Hyper h, const std::string& sweep, const std::string& data, const std::string& out_dir, bool timing,
              std::ostream& out, std::ostream& err) {
  apply_threads(h.threads);
  h.params.initial_crop = parse_initial_crop(h.init_crop);
  h.params.validate();
  const SweepKind kind = parse_sweep_kind(sweep);
  const DataSource src = resolve_data(data, err);
  const auto train = load_dataset(src.train, src.base);
  const auto test = load_dataset(src.test, src.base);
  const ExtractorConfig extractor = make_extractor(h);
  const auto grid = make_grid(kind, h.params);

  const fs::path run_dir = fs::path(out_dir) / (sweep + "-" + config_hash(sweep, grid, extractor, train.size(), test.size()));
  fs::create_directories(run_dir);
  const SweepResult result =
      run_sweep(sweep, grid, train, test, extractor, [&](const std::string& line) { err << line << "\n"; });

  {
    std::ofstream csv(run_dir / "curves.csv", std::ios::binary);
    csv << curve_csv(result, timing);
    if (!csv) throw IoError("cannot write " + (run_dir / "curves.csv").string());
  }
  const Image& probe = *test.front().image;
  for (const CellResult& cell : result.cells) {
    std::string name = cell.cell.name;
    for (char& c : name)
      if (c == '=' || c == '/' || c == ' ') c = '_';
    write_crop_sequence(ccr_predict(cell.model, probe), probe, kSequenceStages, run_dir / "sequences" / name);
  }
  out << run_dir.string() << "\n";
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cascaded cropping regression for automatic image cropping", "autocrop"};
  app.require_subcommand(1);

  std::string synth_spec, synth_out;
  CLI::App* synth = app.add_subcommand("synth", "Generate the synthetic cropping benchmark");
  synth->add_option("--spec", synth_spec, "Benchmark spec (JSON); defaults when omitted")->check(CLI::ExistingFile);
  synth->add_option("--out", synth_out, "Output directory")->required();

  Hyper train_h;
  std::string train_data, train_out;
  CLI::App* train = app.add_subcommand("train", "Train a cascade");
  train->add_option("--data", train_data, "Dataset directory or annotation CSV")->required();
  train->add_option("--out", train_out, "Model file to write")->required();
  add_hyper(train, train_h);

  std::string pred_model, pred_image, pred_trace;
  bool pred_json = false;
  int pred_threads = 0;
  CLI::App* predict = app.add_subcommand("predict", "Crop one image");
  predict->add_option("--model", pred_model, "Model file")->required();
  predict->add_option("--image", pred_image, "Input PPM image")->required();
  predict->add_option("--trace-dir", pred_trace, "Write per-stage crop overlays here");
  predict->add_flag("--json", pred_json, "Machine-readable output");
  add_threads(predict, pred_threads);

  std::string eval_model, eval_data;
  bool eval_json = false;
  int eval_threads = 0;
  CLI::App* eval = app.add_subcommand("eval", "Mean IoU and BDE on a dataset");
  eval->add_option("--model", eval_model, "Model file")->required();
  eval->add_option("--data", eval_data, "Dataset directory or annotation CSV")->required();
  eval->add_flag("--json", eval_json, "Machine-readable output");
  add_threads(eval, eval_threads);

  Hyper bench_h;
  std::string bench_sweep, bench_data, bench_out;
  bool bench_no_timing = false;
  CLI::App* bench = app.add_subcommand("bench", "Run an ablation sweep and write per-stage curves");
  bench->add_option("--sweep", bench_sweep, "ferns, primitive or init")
      ->required()
      ->check(CLI::IsMember({"ferns", "primitive", "init"}));
  bench->add_option("--data", bench_data, "Dataset directory or annotation CSV")->required();
  bench->add_option("--out", bench_out, "Run root directory")->required();
  bench->add_flag("--no-timing", bench_no_timing, "Write 0 in the seconds column for reproducible CSV");
  add_hyper(bench, bench_h);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*synth) return cmd_synth(synth_spec, synth_out, out);
    if (*train) return cmd_train(train_h, train_data, train_out, out, err);
    if (*predict) return cmd_predict(pred_model, pred_image, pred_trace, pred_json, pred_threads, out);
    if (*eval) return cmd_eval(eval_model, eval_data, eval_json, eval_threads, out, err);
    if (*bench) return cmd_bench(bench_h, bench_sweep, bench_data, bench_out, !bench_no_timing, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace autocrop::cli
