// Copyright (c) 2026 skyfuse contributors
// SPDX-License-Identifier: Apache-2.0

#include "skyfuse/io.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "skyfuse/geometry.hpp"
#include "skyfuse/parallel.hpp"

namespace skyfuse {

namespace {

using Json = nlohmann::ordered_json;

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError(std::string("JSON parse error: ") + e.what());
  }
}

void check_keys(const Json& obj, std::initializer_list<const char*> allowed,
                const std::string& ctx) {
  if (!obj.is_object()) {
    throw SchemaError(ctx + ": expected an object");
  }
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw SchemaError(ctx + ": unknown key '" + key + "'");
    }
  }
}

const Json& require_key(const Json& obj, const char* key,
                        const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw SchemaError(ctx + ": missing key '" + key + "'");
  }
  return *it;
}

double require_number(const Json& v, const std::string& ctx) {
  if (!v.is_number()) {
    throw SchemaError(ctx + ": expected a number");
  }
  return v.get<double>();
}

long require_integer(const Json& v, const std::string& ctx) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    throw SchemaError(ctx + ": expected an integer");
  }
  return v.get<long>();
}

BoundingBox parse_bbox(const Json& v, int image_width, int image_height,
                       const std::string& ctx) {
  if (!v.is_array() || v.size() != 4) {
    throw SchemaError(ctx + ".bbox: expected [x1, y1, x2, y2]");
  }
  double c[4];
  for (std::size_t i = 0; i < 4; ++i) {
    c[i] = require_number(v[i], ctx + ".bbox[" + std::to_string(i) + "]");
  }
  try {
    const BoundingBox raw(c[0], c[1], c[2], c[3]);
    return clamp_to_image(raw, image_width, image_height);
  } catch (const ValidationError& e) {
    throw ValidationError(ctx + ".bbox: " + e.what());
  }
}

GeoCoordinate parse_world_position(const Json& v, const std::string& ctx) {
  if (!v.is_array() || v.size() != 3) {
    throw SchemaError(ctx + ".world_position: expected [lat, lon, alt]");
  }
  GeoCoordinate geo;
  geo.latitude = require_number(v[0], ctx + ".world_position[0]");
  geo.longitude = require_number(v[1], ctx + ".world_position[1]");
  geo.altitude = require_number(v[2], ctx + ".world_position[2]");
  if (std::abs(geo.latitude) > 90.0) {
    throw ValidationError(ctx + ".world_position: latitude out of [-90, 90]");
  }
  geo.longitude = normalize_longitude(geo.longitude);
  return geo;
}

// Shared frame-level walk; the item callback fills the typed set.
template <typename Item, typename ItemParser>
FrameSet<Item> parse_frameset_impl(const std::string& text,
                                   ItemParser&& parse_item) {
  const Json root = parse_json(text);
  check_keys(root, {"image_width", "image_height", "frames"}, "top level");
  FrameSet<Item> set;
  set.image_width = static_cast<int>(
      require_integer(require_key(root, "image_width", "top level"), "image_width"));
  set.image_height = static_cast<int>(require_integer(
      require_key(root, "image_height", "top level"), "image_height"));
  if (set.image_width <= 0 || set.image_height <= 0) {
    throw ValidationError("image dimensions must be positive");
  }
  const Json& frames = require_key(root, "frames", "top level");
  if (!frames.is_array()) {
    throw SchemaError("frames: expected an array");
  }
  long previous_frame_id = 0;
  bool first = true;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const std::string fctx = "frames[" + std::to_string(f) + "]";
    const Json& jframe = frames[f];
    check_keys(jframe, {"frame_id", "items"}, fctx);
    Frame<Item> frame;
    frame.frame_id = static_cast<int>(
        require_integer(require_key(jframe, "frame_id", fctx), fctx + ".frame_id"));
    if (!first && frame.frame_id <= previous_frame_id) {
      throw ValidationError(fctx + ": frame_id must be strictly increasing");
    }
    first = false;
    previous_frame_id = frame.frame_id;
    const Json& items = require_key(jframe, "items", fctx);
    if (!items.is_array()) {
      throw SchemaError(fctx + ".items: expected an array");
    }
    std::set<long> seen_ids;
    for (std::size_t i = 0; i < items.size(); ++i) {
      const std::string ictx = fctx + ".items[" + std::to_string(i) + "]";
      Item item = parse_item(items[i], set.image_width, set.image_height, ictx);
      long id;
      if constexpr (std::is_same_v<Item, Detection>) {
        id = item.det_id;
      } else {
        id = item.gt_id;
      }
      if (!seen_ids.insert(id).second) {
        throw ValidationError(ictx + ": duplicate det_id " + std::to_string(id));
      }
      frame.items.push_back(std::move(item));
    }
    set.frames.push_back(std::move(frame));
  }
  return set;
}

Json bbox_json(const BoundingBox& b) {
  return Json::array({b.x_min, b.y_min, b.x_max, b.y_max});
}

Json geo_json(const GeoCoordinate& g) {
  return Json::array({g.latitude, g.longitude, g.altitude});
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

DetectionSet parse_detection_frameset(const std::string& text,
                                      const std::string& model_id,
                                      const ClassRegistry& registry) {
  return parse_frameset_impl<Detection>(
      text, [&](const Json& j, int w, int h, const std::string& ctx) {
        check_keys(j, {"bbox", "class_id", "score", "det_id"}, ctx);
        const int class_id = static_cast<int>(
            require_integer(require_key(j, "class_id", ctx), ctx + ".class_id"));
        if (!registry.contains(class_id)) {
          throw ValidationError(ctx + ": class id " + std::to_string(class_id) +
                                " not in registry");
        }
        auto score_it = j.find("score");
        if (score_it == j.end()) {
          throw SchemaError(ctx +
                            ": missing 'score' (is this a ground-truth file?)");
        }
        const double score = require_number(*score_it, ctx + ".score");
        if (!(score >= 0.0 && score <= 1.0)) {
          throw ValidationError(ctx + ": score out of [0, 1]");
        }
        const long det_id =
            require_integer(require_key(j, "det_id", ctx), ctx + ".det_id");
        if (det_id < 0) {
          throw ValidationError(ctx + ": det_id must be non-negative");
        }
        return Detection{parse_bbox(require_key(j, "bbox", ctx), w, h, ctx),
                         class_id, score, model_id, static_cast<int>(det_id)};
      });
}

GroundTruthSet parse_ground_truth_frameset(const std::string& text,
                                           const ClassRegistry& registry) {
  return parse_frameset_impl<GroundTruthAnnotation>(
      text, [&](const Json& j, int w, int h, const std::string& ctx) {
        check_keys(j, {"bbox", "class_id", "det_id", "world_position"}, ctx);
        if (j.find("score") != j.end()) {
          throw SchemaError(ctx + ": ground truth must not carry 'score'");
        }
        const int class_id = static_cast<int>(
            require_integer(require_key(j, "class_id", ctx), ctx + ".class_id"));
        if (!registry.contains(class_id)) {
          throw ValidationError(ctx + ": class id " + std::to_string(class_id) +
                                " not in registry");
        }
        const long gt_id =
            require_integer(require_key(j, "det_id", ctx), ctx + ".det_id");
        if (gt_id < 0) {
          throw ValidationError(ctx + ": det_id must be non-negative");
        }
        GroundTruthAnnotation gt{parse_bbox(require_key(j, "bbox", ctx), w, h, ctx),
                                 class_id, static_cast<int>(gt_id), std::nullopt};
        auto wp = j.find("world_position");
        if (wp != j.end()) {
          gt.world_position = parse_world_position(*wp, ctx);
        }
        return gt;
      });
}

std::string emit_frameset(const DetectionSet& set) {
  Json root;
  root["image_width"] = set.image_width;
  root["image_height"] = set.image_height;
  root["frames"] = Json::array();
  for (const auto& frame : set.frames) {
    Json jframe;
    jframe["frame_id"] = frame.frame_id;
    jframe["items"] = Json::array();
    for (const auto& det : frame.items) {
      Json item;
      item["bbox"] = bbox_json(det.bbox);
      item["class_id"] = det.class_id;
      item["score"] = det.score;
      item["det_id"] = det.det_id;
      jframe["items"].push_back(std::move(item));
    }
    root["frames"].push_back(std::move(jframe));
  }
  return dump(root);
}

std::string emit_frameset(const GroundTruthSet& set) {
  Json root;
  root["image_width"] = set.image_width;
  root["image_height"] = set.image_height;
  root["frames"] = Json::array();
  for (const auto& frame : set.frames) {
    Json jframe;
    jframe["frame_id"] = frame.frame_id;
    jframe["items"] = Json::array();
    for (const auto& gt : frame.items) {
      Json item;
      item["bbox"] = bbox_json(gt.bbox);
      item["class_id"] = gt.class_id;
      item["det_id"] = gt.gt_id;
      if (gt.world_position) {
        item["world_position"] = geo_json(*gt.world_position);
      }
      jframe["items"].push_back(std::move(item));
    }
    root["frames"].push_back(std::move(jframe));
  }
  return dump(root);
}

CameraModel parse_camera(const std::string& text) {
  const Json root = parse_json(text);
  check_keys(root,
             {"fx", "fy", "cx", "cy", "width", "height", "latitude",
              "longitude", "altitude", "yaw", "pitch", "roll"},
             "camera");
  auto num = [&](const char* key) {
    return require_number(require_key(root, key, "camera"),
                          std::string("camera.") + key);
  };
  auto integer = [&](const char* key) {
    return static_cast<int>(require_integer(require_key(root, key, "camera"),
                                            std::string("camera.") + key));
  };
  return CameraModel::make(
      num("fx"), num("fy"), num("cx"), num("cy"), integer("width"),
      integer("height"),
      GeoCoordinate{num("latitude"), num("longitude"), num("altitude")},
      num("yaw"), num("pitch"), num("roll"));
}

std::string emit_camera(const CameraModel& camera) {
  Json root;
  root["fx"] = camera.fx;
  root["fy"] = camera.fy;
  root["cx"] = camera.cx;
  root["cy"] = camera.cy;
  root["width"] = camera.width;
  root["height"] = camera.height;
  root["latitude"] = camera.position.latitude;
  root["longitude"] = camera.position.longitude;
  root["altitude"] = camera.position.altitude;
  root["yaw"] = camera.yaw_deg;
  root["pitch"] = camera.pitch_deg;
  root["roll"] = camera.roll_deg;
  return dump(root);
}

std::map<std::string, double> parse_weights(const std::string& text) {
  const Json root = parse_json(text);
  check_keys(root, {"weights", "ap"}, "weights file");
  const Json& jweights = require_key(root, "weights", "weights file");
  if (!jweights.is_object() || jweights.empty()) {
    throw SchemaError("weights: expected a non-empty object");
  }
  std::map<std::string, double> weights;
  for (const auto& [model, value] : jweights.items()) {
    weights[model] = require_number(value, "weights." + model);
  }
  return weights;
}

std::string emit_weights(const std::map<std::string, double>& weights,
                         const std::map<std::string, double>& ap_per_model) {
  Json root;
  root["weights"] = Json::object();
  for (const auto& [model, w] : weights) {
    root["weights"][model] = w;
  }
  if (!ap_per_model.empty()) {
    root["ap"] = Json::object();
    for (const auto& [model, ap] : ap_per_model) {
      root["ap"][model] = ap;
    }
  }
  return dump(root);
}

std::string emit_eval_report(const EvalReport& report,
                             const ClassRegistry& registry) {
  Json root;
  root["iou_threshold"] = report.iou_threshold;
  root["aggregate_ap"] = report.aggregate_ap;
  if (report.mean_iou) {
    root["mean_iou"] = *report.mean_iou;
  } else {
    root["mean_iou"] = nullptr;
  }
  root["counts"] = Json{{"tp", report.tp}, {"fp", report.fp}, {"fn", report.fn}};
  root["classes"] = Json::array();
  for (const auto& ce : report.per_class) {
    Json jc;
    jc["class_id"] = ce.class_id;
    jc["class_name"] =
        registry.contains(ce.class_id) ? registry.name(ce.class_id) : "";
    jc["gt_count"] = ce.gt_count;
    jc["ap"] = ce.ap;
    root["classes"].push_back(std::move(jc));
  }
  return dump(root);
}

std::string emit_pr_csv(const EvalReport& report) {
  std::string csv = "class,threshold,tp,fp,precision,recall\n";
  for (const auto& ce : report.per_class) {
    for (const auto& p : ce.curve) {
      csv += std::to_string(ce.class_id);
      csv += ',';
      csv += format_double(p.score_threshold);
      csv += ',';
      csv += std::to_string(p.tp);
      csv += ',';
      csv += std::to_string(p.fp);
      csv += ',';
      csv += format_double(p.precision);
      csv += ',';
      csv += format_double(p.recall);
      csv += '\n';
    }
  }
  return csv;
}

std::string emit_verdicts(
    const std::vector<std::pair<int, std::vector<IdentifiedDetection>>>& frames,
    double decision_threshold) {
  Json root;
  root["decision_threshold"] = decision_threshold;
  root["frames"] = Json::array();
  for (const auto& [frame_id, items] : frames) {
    Json jframe;
    jframe["frame_id"] = frame_id;
    jframe["items"] = Json::array();
    int det_id = 0;
    for (const auto& idet : items) {
      Json item;
      item["det_id"] = det_id++;
      item["class_id"] = idet.detection.class_id;
      item["class_name"] = idet.class_name;
      item["score"] = idet.detection.score;
      item["verdict"] =
          idet.verdict == Verdict::kMalicious ? "malicious" : "uncertain";
      item["bbox"] = bbox_json(idet.detection.bbox);
      item["contributors"] = Json::array();
      for (const auto& c : idet.detection.contributors) {
        item["contributors"].push_back(
            Json{{"model_id", c.model_id}, {"det_id", c.det_id}});
      }
      jframe["items"].push_back(std::move(item));
    }
    root["frames"].push_back(std::move(jframe));
  }
  return dump(root);
}

std::string emit_localizations(
    const std::vector<std::pair<int, std::vector<LocalizationResult>>>& frames,
    double target_altitude_m) {
  Json root;
  root["target_altitude"] = target_altitude_m;
  root["frames"] = Json::array();
  for (const auto& [frame_id, items] : frames) {
    Json jframe;
    jframe["frame_id"] = frame_id;
    jframe["items"] = Json::array();
    int det_id = 0;
    for (const auto& loc : items) {
      Json item;
      item["det_id"] = det_id++;
      item["latitude"] = loc.position.latitude;
      item["longitude"] = loc.position.longitude;
      item["altitude"] = loc.position.altitude;
      jframe["items"].push_back(std::move(item));
    }
    root["frames"].push_back(std::move(jframe));
  }
  return dump(root);
}

DetectionSet fused_to_detection_set(
    const std::vector<std::pair<int, std::vector<FusedDetection>>>& frames,
    int image_width, int image_height) {
  DetectionSet set;
  set.image_width = image_width;
  set.image_height = image_height;
  for (const auto& [frame_id, fused] : frames) {
    Frame<Detection> frame;
    frame.frame_id = frame_id;
    int det_id = 0;
    for (const auto& f : fused) {
      frame.items.push_back(
          Detection{f.bbox, f.class_id, f.score, "ensemble", det_id++});
    }
    set.frames.push_back(std::move(frame));
  }
  return set;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) {
    throw IoError("failed reading file: " + path);
  }
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open file for writing: " + path);
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw IoError("failed writing file: " + path);
  }
}

namespace {

struct SummaryLine {
  std::string label;
  double ap;
  std::optional<double> miou;
};

void print_summary(std::ostream& out, const SummaryLine& line) {
  out << line.label << ": AP=" << format_double(line.ap)
      << " mIoU=" << (line.miou ? format_double(*line.miou) : "n/a") << "\n";
}

}  // namespace

int run_pipeline(const PipelineConfig& config, std::ostream& out,
                 std::ostream& diag) {
  try {
    if (config.detection_files.empty()) {
      throw ValidationError("at least one detection file is required");
    }
    if (config.output_dir.empty()) {
      throw ValidationError("output directory is required");
    }
    const ClassRegistry registry = config.class_names.empty()
                                       ? ClassRegistry::defaults()
                                       : ClassRegistry(config.class_names);
    const GroundTruthSet ground_truth = parse_ground_truth_frameset(
        read_file(config.ground_truth_file), registry);
    const CameraModel camera = parse_camera(read_file(config.camera_file));

    std::map<std::string, DetectionSet> detections;
    for (const auto& [model, path] : config.detection_files) {
      DetectionSet set = parse_detection_frameset(read_file(path), model, registry);
      if (set.image_width != ground_truth.image_width ||
          set.image_height != ground_truth.image_height) {
        throw ValidationError("image dimensions of '" + model +
                              "' differ from the ground truth");
      }
      detections.emplace(model, std::move(set));
    }

    // Per-model evaluation; also the calibration source when no explicit
    // weights were supplied.
    std::map<std::string, EvalReport> model_reports;
    for (const auto& [model, set] : detections) {
      model_reports.emplace(
          model, evaluate(set, ground_truth, config.match_iou_threshold,
                          config.threads));
    }

    std::map<std::string, double> weights;
    if (!config.manual_weights.empty()) {
      weights = config.manual_weights;
    } else if (!config.weights_file.empty()) {
      weights = parse_weights(read_file(config.weights_file));
    } else {
      std::map<std::string, double> ap;
      for (const auto& [model, report] : model_reports) {
        ap[model] = report.aggregate_ap;
      }
      weights = calibrate_weights(ap);
    }

    const std::string fallback = config.fallback_model_id.empty()
                                     ? detections.begin()->first
                                     : config.fallback_model_id;
    const FusionConfig fusion_config = FusionConfig::make(
        weights, fallback, config.cluster_iou_threshold,
        config.nms_iou_threshold, config.low_confidence_threshold,
        config.score_floor);

    const auto fused_frames = fuse_sets(detections, fusion_config, config.threads);

    std::vector<std::pair<int, std::vector<IdentifiedDetection>>> verdict_frames;
    std::vector<std::pair<int, std::vector<LocalizationResult>>> location_frames;
    for (const auto& [frame_id, dets] : fused_frames) {
      verdict_frames.emplace_back(
          frame_id, identify(dets, registry, config.decision_threshold));
      std::vector<LocalizationResult> locations;
      locations.reserve(dets.size());
      for (const auto& det : dets) {
        locations.push_back(localize(camera, det.bbox, config.target_altitude_m));
      }
      location_frames.emplace_back(frame_id, std::move(locations));
    }

    const DetectionSet fused_set = fused_to_detection_set(
        fused_frames, ground_truth.image_width, ground_truth.image_height);
    const EvalReport ensemble_report =
        evaluate(fused_set, ground_truth, config.match_iou_threshold,
                 config.threads);

    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    if (ec) {
      throw IoError("cannot create output directory: " + config.output_dir);
    }
    const std::filesystem::path dir(config.output_dir);
    write_file((dir / "fused_detections.json").string(), emit_frameset(fused_set));
    write_file((dir / "verdicts.json").string(),
               emit_verdicts(verdict_frames, config.decision_threshold));
    write_file((dir / "localizations.json").string(),
               emit_localizations(location_frames, config.target_altitude_m));
    write_file((dir / "eval_report.json").string(),
               emit_eval_report(ensemble_report, registry));
    write_file((dir / "pr_curve.csv").string(), emit_pr_csv(ensemble_report));

    for (const auto& [model, report] : model_reports) {
      print_summary(out, {"model " + model, report.aggregate_ap, report.mean_iou});
    }
    print_summary(out,
                  {"ensemble", ensemble_report.aggregate_ap, ensemble_report.mean_iou});
    return 0;
  } catch (const IoError& e) {
    diag << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    diag << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    diag << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace skyfuse
