#include "resfault/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "resfault/error.hpp"

namespace resfault {

using nlohmann::json;

namespace {

/// Walks one JSON object, rejecting keys nobody asked for.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw Error(Errc::ConfigType, where() + " must be an object");
  }
  Section(const Section&) = delete;
  Section& operator=(const Section&) = delete;

  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw Error(Errc::UnknownKey, "unknown key '" + key_path(it.key()) + "'");
    }
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void get(const std::string& key, int& out) {
    if (const auto* v = find(key)) {
      if (!v->is_number_integer()) type_error(key, "an integer");
      out = v->get<int>();
    }
  }
  void get(const std::string& key, std::uint64_t& out) {
    if (const auto* v = find(key)) {
      if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0)) {
        type_error(key, "a non-negative integer");
      }
      out = v->get<std::uint64_t>();
    }
  }
  void get(const std::string& key, double& out) {
    if (const auto* v = find(key)) {
      if (!v->is_number()) type_error(key, "a number");
      out = v->get<double>();
    }
  }
  void get(const std::string& key, bool& out) {
    if (const auto* v = find(key)) {
      if (!v->is_boolean()) type_error(key, "a boolean");
      out = v->get<bool>();
    }
  }
  void get(const std::string& key, std::string& out) {
    if (const auto* v = find(key)) {
      if (!v->is_string()) type_error(key, "a string");
      out = v->get<std::string>();
    }
  }
  template <typename T>
  void get_list(const std::string& key, std::vector<T>& out) {
    if (const auto* v = find(key)) {
      if (!v->is_array()) type_error(key, "a list of integers");
      std::vector<T> items;
      for (const auto& e : *v) {
        if (!e.is_number_integer()) type_error(key, "a list of integers");
        items.push_back(e.get<T>());
      }
      out = std::move(items);
    }
  }

  [[noreturn]] void type_error(const std::string& key, const char* expected) const {
    throw Error(Errc::ConfigType, "'" + key_path(key) + "' must be " + expected);
  }

 private:
  std::string where() const { return path_.empty() ? "configuration" : "'" + path_ + "'"; }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Fn>
void with_section(Section& parent, const std::string& key, Fn&& fn) {
  if (const auto* v = parent.find(key)) {
    Section child(*v, parent.key_path(key));
    fn(child);
  }
}

std::vector<FaultFamily> parse_families(const json& list, const std::string& path) {
  if (!list.is_array()) throw Error(Errc::ConfigType, "'" + path + "' must be a list");
  std::vector<FaultFamily> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    Section fam(list[i], path + "[" + std::to_string(i) + "]");
    FaultFamily f;
    fam.get("name", f.name);
    if (const auto* sensors = fam.find("sensors")) {
      if (!sensors->is_array()) fam.type_error("sensors", "a list");
      for (std::size_t k = 0; k < sensors->size(); ++k) {
        Section s((*sensors)[k], fam.key_path("sensors") + "[" + std::to_string(k) + "]");
        FaultSensor fs;
        s.get("sensor", fs.sensor);
        s.get("weight", fs.weight);
        s.get("onset_delay", fs.onset_delay);
        f.sensors.push_back(std::move(fs));
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(Errc::ConfigInvalid, msg); };
  if (preprocess.downsample_factor < 1) fail("preprocess.downsample_factor must be >= 1");
  if (!(preprocess.cruise_threshold >= 0.0 && preprocess.cruise_threshold < 1.0)) {
    fail("preprocess.cruise_threshold must lie in [0, 1)");
  }
  if (!(preprocess.epsilon > 0.0)) fail("preprocess.epsilon must be > 0");
  split.validate();
  train.validate();
  for (const auto* dims : {&models.ae_hidden, &models.oc_hidden}) {
    if (dims->empty()) fail("hidden layer lists must be non-empty");
    for (Index d : *dims) {
      if (d < 1) fail("hidden layer widths must be >= 1");
    }
  }
  if (detect.n_wait < 1) fail("detect.n_wait must be >= 1");
  if (segment.snapshot_offset < 0) fail("segment.snapshot_offset must be >= 0");
  if (segment.k_min < 0 || segment.k_max < segment.k_min) fail("segment needs 0 <= k_min <= k_max");
  if (segment.checkpoints.empty()) fail("segment.checkpoints must be non-empty");
  for (int c : segment.checkpoints) {
    if (c < 0) fail("segment.checkpoints must be >= 0");
  }
  if (experiment.realisations < 1) fail("experiment.realisations must be >= 1");
  synth.validate();
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    cfg.validate();
    return cfg;
  }
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigInvalid, std::string("configuration is not valid JSON: ") + e.what());
  }
  {
    Section top(root, "");
    with_section(top, "preprocess", [&](Section& s) {
      s.get("downsample_factor", cfg.preprocess.downsample_factor);
      s.get("cruise_threshold", cfg.preprocess.cruise_threshold);
      s.get("epsilon", cfg.preprocess.epsilon);
      std::string order = cfg.preprocess.order == PreprocessOrder::DownsampleFirst ? "downsample_first"
                                                                                   : "cruise_first";
      s.get("order", order);
      if (order == "downsample_first") {
        cfg.preprocess.order = PreprocessOrder::DownsampleFirst;
      } else if (order == "cruise_first") {
        cfg.preprocess.order = PreprocessOrder::CruiseFirst;
      } else {
        throw Error(Errc::ConfigInvalid, "preprocess.order must be downsample_first or cruise_first");
      }
    });
    with_section(top, "split", [&](Section& s) {
      s.get("healthy_cycles_per_unit", cfg.split.healthy_cycles_per_unit);
      s.get("validation_fraction", cfg.split.validation_fraction);
    });
    with_section(top, "train", [&](Section& s) {
      s.get("epochs", cfg.train.epochs);
      s.get("batch_size", cfg.train.batch_size);
      s.get("patience", cfg.train.patience);
      s.get("shuffle", cfg.train.shuffle);
      with_section(s, "adam", [&](Section& a) {
        a.get("lr", cfg.train.adam.lr);
        a.get("beta1", cfg.train.adam.beta1);
        a.get("beta2", cfg.train.adam.beta2);
        a.get("eps", cfg.train.adam.eps);
      });
    });
    with_section(top, "models", [&](Section& s) {
      s.get_list("ae_hidden", cfg.models.ae_hidden);
      s.get_list("oc_hidden", cfg.models.oc_hidden);
    });
    with_section(top, "detect", [&](Section& s) {
      s.get("n_wait", cfg.detect.n_wait);
      std::string source = cfg.detect.stats_source == StatsSource::Validation ? "validation" : "train_validation";
      s.get("stats_source", source);
      if (source == "validation") {
        cfg.detect.stats_source = StatsSource::Validation;
      } else if (source == "train_validation") {
        cfg.detect.stats_source = StatsSource::TrainAndValidation;
      } else {
        throw Error(Errc::ConfigInvalid, "detect.stats_source must be validation or train_validation");
      }
    });
    with_section(top, "segment", [&](Section& s) {
      s.get("snapshot_offset", cfg.segment.snapshot_offset);
      s.get("k_min", cfg.segment.k_min);
      s.get("k_max", cfg.segment.k_max);
      s.get_list("checkpoints", cfg.segment.checkpoints);
      std::string norm(to_string(cfg.segment.normalization));
      s.get("normalization", norm);
      cfg.segment.normalization = parse_signature_norm(norm);
    });
    with_section(top, "experiment", [&](Section& s) {
      s.get("realisations", cfg.experiment.realisations);
      s.get("seed", cfg.experiment.seed);
    });
    with_section(top, "synth", [&](Section& s) {
      auto& y = cfg.synth;
      s.get("n_units_per_family", y.n_units_per_family);
      s.get("n_families", y.n_families);
      s.get("n_healthy_units", y.n_healthy_units);
      s.get("cycles_per_unit", y.cycles_per_unit);
      s.get("rows_per_cycle", y.rows_per_cycle);
      s.get("cruise_fraction", y.cruise_fraction);
      s.get("fault_start_min", y.fault_start_min);
      s.get("fault_start_max", y.fault_start_max);
      s.get("severity_exponent", y.severity_exponent);
      if (const auto* v = s.find("severity_scale")) {
        if (v->is_null()) {
          y.severity_scale.reset();
        } else if (v->is_number()) {
          y.severity_scale = v->get<double>();
        } else {
          s.type_error("severity_scale", "a number or null");
        }
      }
      s.get("noise_std", y.noise_std);
      s.get("weight_jitter", y.weight_jitter);
      s.get("map_seed", y.map_seed);
      if (const auto* fams = s.find("families")) y.families = parse_families(*fams, s.key_path("families"));
    });
  }
  cfg.synth.healthy_cycles_per_unit = cfg.split.healthy_cycles_per_unit;
  cfg.synth.seed = cfg.experiment.seed;
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::ConfigInvalid, "cannot open configuration " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const RunConfig& c) {
  json fams = json::array();
  for (const auto& f : c.synth.families) {
    json sensors = json::array();
    for (const auto& s : f.sensors) {
      sensors.push_back({{"sensor", s.sensor}, {"weight", s.weight}, {"onset_delay", s.onset_delay}});
    }
    fams.push_back({{"name", f.name}, {"sensors", sensors}});
  }
  json j = {
      {"preprocess",
       {{"downsample_factor", c.preprocess.downsample_factor},
        {"cruise_threshold", c.preprocess.cruise_threshold},
        {"epsilon", c.preprocess.epsilon},
        {"order", c.preprocess.order == PreprocessOrder::DownsampleFirst ? "downsample_first" : "cruise_first"}}},
      {"split",
       {{"healthy_cycles_per_unit", c.split.healthy_cycles_per_unit},
        {"validation_fraction", c.split.validation_fraction}}},
      {"train",
       {{"epochs", c.train.epochs},
        {"batch_size", c.train.batch_size},
        {"patience", c.train.patience},
        {"shuffle", c.train.shuffle},
        {"adam",
         {{"lr", c.train.adam.lr}, {"beta1", c.train.adam.beta1}, {"beta2", c.train.adam.beta2}, {"eps", c.train.adam.eps}}}}},
      {"models", {{"ae_hidden", c.models.ae_hidden}, {"oc_hidden", c.models.oc_hidden}}},
      {"detect",
       {{"n_wait", c.detect.n_wait},
        {"stats_source", c.detect.stats_source == StatsSource::Validation ? "validation" : "train_validation"}}},
      {"segment",
       {{"snapshot_offset", c.segment.snapshot_offset},
        {"k_min", c.segment.k_min},
        {"k_max", c.segment.k_max},
        {"checkpoints", c.segment.checkpoints},
        {"normalization", std::string(to_string(c.segment.normalization))}}},
      {"experiment", {{"realisations", c.experiment.realisations}, {"seed", c.experiment.seed}}},
      {"synth",
       {{"n_units_per_family", c.synth.n_units_per_family},
        {"n_families", c.synth.n_families},
        {"n_healthy_units", c.synth.n_healthy_units},
        {"cycles_per_unit", c.synth.cycles_per_unit},
        {"rows_per_cycle", c.synth.rows_per_cycle},
        {"cruise_fraction", c.synth.cruise_fraction},
        {"fault_start_min", c.synth.fault_start_min},
        {"fault_start_max", c.synth.fault_start_max},
        {"severity_exponent", c.synth.severity_exponent},
        {"severity_scale", c.synth.severity_scale ? json(*c.synth.severity_scale) : json(nullptr)},
        {"noise_std", c.synth.noise_std},
        {"weight_jitter", c.synth.weight_jitter},
        {"map_seed", c.synth.map_seed},
        {"families", fams}}},
  };
  return j.dump(2);
}

}  // namespace resfault
