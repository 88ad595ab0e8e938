#include "detgeom/run_config.hpp"

#include <set>

#include "detgeom/csv.hpp"
#include "detgeom/error.hpp"
#include "json.hpp"

namespace detgeom {

namespace {

using nlohmann::json;

class Section {
 public:
  Section(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    for (const auto& [key, _] : j_.items()) {
      if (!allowed.count(key)) throw ConfigError("unknown config key '" + qualified(key) + "'");
    }
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  const json& raw(const std::string& key) const { return j_.at(key); }
  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <class T>
  void read(const std::string& key, T& out) const {
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key '" + qualified(key) + "' has the wrong type");
    }
  }

  void read_size(const std::string& key, std::size_t& out) const {
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw ConfigError("config key '" + qualified(key) + "' must be a non-negative integer");
    }
    out = v.get<std::size_t>();
  }

 private:
  const json& j_;
  std::string path_;
};

LossSpec loss_from(const json& j, const std::string& path) {
  Section s(j, path, {"kind", "ratio", "theta", "epsilon", "shape_sign"});
  LossSpec spec;
  std::string kind = std::string(to_string(spec.kind));
  std::string sign = std::string(to_string(spec.shape_sign));
  s.read("kind", kind);
  s.read("ratio", spec.ratio);
  s.read("theta", spec.theta);
  s.read("epsilon", spec.epsilon);
  s.read("shape_sign", sign);
  try {
    spec.kind = parse_loss_kind(kind);
    spec.shape_sign = parse_shape_sign(sign);
    spec.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return spec;
}

json loss_to(const LossSpec& s) {
  return json{{"kind", to_string(s.kind)},
              {"ratio", s.ratio},
              {"theta", s.theta},
              {"epsilon", s.epsilon},
              {"shape_sign", to_string(s.shape_sign)}};
}

}  // namespace

void RunConfig::validate() const {
  loss.validate();
  sim.validate();
  layout.validate();
  if (!(gradcheck.tolerance > 0.0)) throw ConfigError("gradcheck.tolerance must be > 0");
  if (!(gradcheck.step > 0.0)) throw ConfigError("gradcheck.step must be > 0");
  if (metrics.iou_thresholds.empty()) throw ConfigError("metrics.iou_thresholds must not be empty");
  auto unit = [](double v, const char* key) {
    if (!(v > 0.0 && v < 1.0)) throw ConfigError(std::string(key) + " must be in (0, 1)");
  };
  for (double t : metrics.iou_thresholds) unit(t, "metrics.iou_thresholds");
  unit(metrics.curve_iou, "metrics.curve_iou");
  unit(metrics.confusion_iou, "metrics.confusion_iou");
  unit(metrics.conf_threshold, "metrics.conf_threshold");
  unit(metrics.nms_iou, "metrics.nms_iou");
}

RunConfig RunConfig::from_json_text(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": invalid JSON: " + e.what());
  }
  RunConfig cfg;
  Section top(root, "", {"seed", "loss", "sim", "gradcheck", "layout", "metrics", "paths"});
  top.read("seed", cfg.seed);

  if (top.has("loss")) cfg.loss = loss_from(top.raw("loss"), "loss");

  if (top.has("sim")) {
    Section s(top.raw("sim"), "sim",
              {"n_pairs", "scenario", "steps", "lr", "lr_decay", "stop_loss", "optimizer", "adam_beta1", "adam_beta2",
               "adam_epsilon", "require_overlap", "max_attempts", "losses"});
    s.read_size("n_pairs", cfg.sim.n_pairs);
    s.read_size("steps", cfg.sim.steps);
    s.read_size("max_attempts", cfg.sim.max_attempts);
    s.read("lr", cfg.sim.lr);
    s.read("lr_decay", cfg.sim.lr_decay);
    s.read("stop_loss", cfg.sim.stop_loss);
    s.read("adam_beta1", cfg.sim.adam_beta1);
    s.read("adam_beta2", cfg.sim.adam_beta2);
    s.read("adam_epsilon", cfg.sim.adam_epsilon);
    s.read("require_overlap", cfg.sim.require_overlap);
    try {
      if (s.has("scenario")) cfg.sim.scenario = parse_scenario(s.raw("scenario").get<std::string>());
      if (s.has("optimizer")) cfg.sim.optimizer = parse_optimizer(s.raw("optimizer").get<std::string>());
    } catch (const json::exception&) {
      throw ConfigError("sim.scenario and sim.optimizer must be strings");
    } catch (const ValidationError& e) {
      throw ConfigError(std::string("sim: ") + e.what());
    }
    if (s.has("losses")) {
      const json& arr = s.raw("losses");
      if (!arr.is_array()) throw ConfigError("sim.losses must be an array");
      cfg.sim.losses.clear();
      for (std::size_t i = 0; i < arr.size(); ++i) {
        cfg.sim.losses.push_back(loss_from(arr[i], "sim.losses[" + std::to_string(i) + "]"));
      }
    }
  }

  if (top.has("gradcheck")) {
    Section s(top.raw("gradcheck"), "gradcheck", {"samples", "tolerance", "step"});
    s.read_size("samples", cfg.gradcheck.samples);
    s.read("tolerance", cfg.gradcheck.tolerance);
    s.read("step", cfg.gradcheck.step);
  }

  if (top.has("layout")) {
    Section s(top.raw("layout"), "layout", {"input_size", "heads"});
    s.read_size("input_size", cfg.layout.input_size);
    if (s.has("heads")) {
      const json& arr = s.raw("heads");
      if (!arr.is_array()) throw ConfigError("layout.heads must be an array");
      cfg.layout.heads.clear();
      for (std::size_t i = 0; i < arr.size(); ++i) {
        Section h(arr[i], "layout.heads[" + std::to_string(i) + "]", {"name", "grid_h", "grid_w", "stride"});
        HeadSpec spec;
        h.read("name", spec.name);
        h.read_size("grid_h", spec.grid_h);
        h.read_size("grid_w", spec.grid_w);
        h.read_size("stride", spec.stride);
        cfg.layout.heads.push_back(spec);
      }
    }
  }

  if (top.has("metrics")) {
    Section s(top.raw("metrics"), "metrics",
              {"iou_thresholds", "interpolation", "curve_iou", "confusion_iou", "conf_threshold", "nms_iou"});
    s.read("iou_thresholds", cfg.metrics.iou_thresholds);
    s.read("curve_iou", cfg.metrics.curve_iou);
    s.read("confusion_iou", cfg.metrics.confusion_iou);
    s.read("conf_threshold", cfg.metrics.conf_threshold);
    s.read("nms_iou", cfg.metrics.nms_iou);
    std::string interp = std::string(to_string(cfg.metrics.interpolation));
    s.read("interpolation", interp);
    try {
      cfg.metrics.interpolation = parse_interpolation(interp);
    } catch (const ValidationError& e) {
      throw ConfigError(std::string("metrics.interpolation: ") + e.what());
    }
  }

  if (top.has("paths")) {
    Section s(top.raw("paths"), "paths", {"gt_dir", "pred_file", "names_file", "out_dir"});
    s.read("gt_dir", cfg.paths.gt_dir);
    s.read("pred_file", cfg.paths.pred_file);
    s.read("names_file", cfg.paths.names_file);
    s.read("out_dir", cfg.paths.out_dir);
  }

  cfg.sim.seed = cfg.seed;
  try {
    cfg.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  return from_json_text(read_file(path), path.string());
}

std::string RunConfig::to_json_text() const {
  json losses = json::array();
  for (const LossSpec& s : sim.losses) losses.push_back(loss_to(s));
  json heads = json::array();
  for (const HeadSpec& h : layout.heads) {
    heads.push_back({{"name", h.name}, {"grid_h", h.grid_h}, {"grid_w", h.grid_w}, {"stride", h.stride}});
  }
  json root{
      {"seed", seed},
      {"loss", loss_to(loss)},
      {"sim",
       {{"n_pairs", sim.n_pairs},
        {"scenario", to_string(sim.scenario)},
        {"steps", sim.steps},
        {"lr", sim.lr},
        {"lr_decay", sim.lr_decay},
        {"stop_loss", sim.stop_loss},
        {"optimizer", to_string(sim.optimizer)},
        {"adam_beta1", sim.adam_beta1},
        {"adam_beta2", sim.adam_beta2},
        {"adam_epsilon", sim.adam_epsilon},
        {"require_overlap", sim.require_overlap},
        {"max_attempts", sim.max_attempts},
        {"losses", losses}}},
      {"gradcheck", {{"samples", gradcheck.samples}, {"tolerance", gradcheck.tolerance}, {"step", gradcheck.step}}},
      {"layout", {{"input_size", layout.input_size}, {"heads", heads}}},
      {"metrics",
       {{"iou_thresholds", metrics.iou_thresholds},
        {"interpolation", to_string(metrics.interpolation)},
        {"curve_iou", metrics.curve_iou},
        {"confusion_iou", metrics.confusion_iou},
        {"conf_threshold", metrics.conf_threshold},
        {"nms_iou", metrics.nms_iou}}},
      {"paths",
       {{"gt_dir", paths.gt_dir},
        {"pred_file", paths.pred_file},
        {"names_file", paths.names_file},
        {"out_dir", paths.out_dir}}},
  };
  return root.dump(2) + "\n";
}

}  // namespace detgeom
