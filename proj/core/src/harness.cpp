#include "autocrop/harness.hpp"

#include <cinttypes>
#include <cstdio>

#include <json.hpp>

#include "autocrop/error.hpp"
#include "autocrop/parallel.hpp"
#include "autocrop/random.hpp"

namespace autocrop {

std::vector<CurvePoint> run_curve(const CascadeModel& model, std::span<const LabeledImage> test, int report_stages,
                                  BdeMode mode) {
  if (test.empty()) throw ConfigError("curve evaluation needs a non-empty test set");
  const int stages = std::max(report_stages, model.stage_count());
  std::vector<Prediction> preds(test.size());
  parallel_for(test.size(), [&](std::size_t i) { preds[i] = ccr_predict(model, *test[i].image); });

  std::vector<CurvePoint> curve(static_cast<std::size_t>(stages) + 1);
  for (int t = 0; t <= stages; ++t) {
    CurvePoint& p = curve[static_cast<std::size_t>(t)];
    p.stage = t;
    for (std::size_t i = 0; i < test.size(); ++i) {
      const Prediction& pr = preds[i];
      const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(t), pr.trajectory.size() - 1);
      const CropRegion c = clamp_to_image(pr.trajectory[k], test[i].image->dims());
      p.mean_iou += iou(c, test[i].truth);
      p.mean_bde += bde(c, test[i].truth, mode);
      for (std::size_t s = 0; s < k; ++s) p.seconds += pr.stage_seconds[s];
    }
    const double n = static_cast<double>(test.size());
    p.mean_iou /= n;
    p.mean_bde /= n;
    p.seconds /= n;
  }
  return curve;
}

std::string to_string(SweepKind kind) {
  switch (kind) {
    case SweepKind::kFerns: return "ferns";
    case SweepKind::kPrimitive: return "primitive";
    default: return "init";
  }
}

SweepKind parse_sweep_kind(std::string_view text) {
  if (text == "ferns") return SweepKind::kFerns;
  if (text == "primitive") return SweepKind::kPrimitive;
  if (text == "init") return SweepKind::kInitialCrop;
  throw ConfigError("unknown sweep '" + std::string(text) + "' (expected ferns, primitive or init)");
}

std::vector<SweepCell> make_grid(SweepKind kind, const CascadeParams& base) {
  std::vector<SweepCell> grid;
  switch (kind) {
    case SweepKind::kFerns:
      for (int m : {1, 5, 10, 20}) {
        CascadeParams p = base;
        p.boost.iterations = m;
        grid.push_back({"M=" + std::to_string(m), p});
      }
      break;
    case SweepKind::kPrimitive: {
      CascadeParams ccr = base;
      CascadeParams single = base;
      single.boost.iterations = 1;
      grid.push_back({"CCR", ccr});
      grid.push_back({"CCR-", single});
      break;
    }
    case SweepKind::kInitialCrop:
      for (InitialCrop ic : {InitialCrop::kFullFrame, InitialCrop::kHalf, InitialCrop::kQuarter}) {
        CascadeParams p = base;
        p.initial_crop = ic;
        grid.push_back({"init=" + to_string(ic), p});
      }
      break;
  }
  return grid;
}

SweepResult run_sweep(std::string_view sweep, const std::vector<SweepCell>& grid, std::span<const LabeledImage> train,
                      std::span<const LabeledImage> test, const ExtractorConfig& extractor,
                      const std::function<void(const std::string&)>& log) {
  if (grid.empty()) throw ConfigError("sweep grid is empty");
  SweepResult result{std::string(sweep), {}};
  std::vector<TrainSample> samples;
  for (const LabeledImage& l : train) samples.push_back({l.image, l.truth});
  for (const SweepCell& cell : grid) {
    if (log) log("training cell " + cell.name);
    CellResult r{cell, {}, {}};
    r.model = ccr_train(samples, cell.params, extractor, [&](const StageStats& s) {
      if (!log) return;
      char buf[128];
      std::snprintf(buf, sizeof buf, "  %s stage %d train_iou=%.4f val_iou=%.4f", cell.name.c_str(), s.stage, s.train_iou,
                    s.validation_iou);
      log(buf);
    });
    r.curve = run_curve(r.model, test, cell.params.stages);
    result.cells.push_back(std::move(r));
  }
  return result;
}

std::string curve_csv(const SweepResult& result, bool include_timing) {
  std::string out = "sweep,cell,stage,mean_iou,mean_bde,seconds\n";
  char buf[256];
  for (const CellResult& c : result.cells)
    for (const CurvePoint& p : c.curve) {
      std::snprintf(buf, sizeof buf, "%s,%s,%d,%.6f,%.6f,%.3f\n", result.sweep.c_str(), c.cell.name.c_str(), p.stage,
                    p.mean_iou, p.mean_bde, include_timing ? p.seconds : 0.0);
      out += buf;
    }
  return out;
}

std::string config_hash(std::string_view sweep, const std::vector<SweepCell>& grid, const ExtractorConfig& extractor,
                        std::size_t train_count, std::size_t test_count) {
  nlohmann::json j;
  j["sweep"] = sweep;
  j["train"] = train_count;
  j["test"] = test_count;
  j["cap"] = extractor.cap;
  j["weight_seed"] = extractor.weight_seed ? nlohmann::json(*extractor.weight_seed) : nlohmann::json(nullptr);
  if (!extractor.weight_seed) j["weights"] = fnv1a64(weights_to_json(extractor));
  for (const SweepCell& c : grid) {
    const CascadeParams& p = c.params;
    j["cells"].push_back({{"name", c.name},
                          {"T", p.stages},
                          {"M", p.boost.iterations},
                          {"S", p.boost.depth},
                          {"Q", p.boost.candidates},
                          {"beta", p.boost.beta},
                          {"lambda", p.shrinkage},
                          {"seed", p.seed},
                          {"init", to_string(p.initial_crop)}});
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a64(j.dump()));
  return buf;
}

Image draw_overlay(const Image& img, const PixelRect& rect, std::array<float, 3> color, int thickness) {
  Image out = img;
  auto paint = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= out.width() || y >= out.height()) return;
    for (int c = 0; c < kImageChannels; ++c) out.at(x, y, c) = color[c];
  };
  for (int t = 0; t < thickness; ++t) {
    for (int x = rect.x1; x < rect.x2; ++x) {
      paint(x, rect.y1 + t);
      paint(x, rect.y2 - 1 - t);
    }
    for (int y = rect.y1; y < rect.y2; ++y) {
      paint(rect.x1 + t, y);
      paint(rect.x2 - 1 - t, y);
    }
  }
  return out;
}

std::vector<std::filesystem::path> write_crop_sequence(const Prediction& prediction, const Image& img,
                                                       std::span<const int> stages, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (int t : stages) {
    if (t < 0 || prediction.trajectory.empty()) continue;
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(t), prediction.trajectory.size() - 1);
    const PixelRect r = denormalize(clamp_to_image(prediction.trajectory[k], img.dims()), img.dims());
    char name[32];
    std::snprintf(name, sizeof name, "stage_%02d.ppm", t);
    save_ppm(draw_overlay(img, r), dir / name);
    written.push_back(dir / name);
  }
  return written;
}

}  // namespace autocrop
