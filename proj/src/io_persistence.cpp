#include "resfault/io_persistence.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "resfault/error.hpp"

namespace resfault {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string_view> split_cells(std::string_view line, char sep = ',') {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    cells.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Non-empty lines with any trailing '\r' removed.
std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  return out;
}

int parse_int_cell(std::string_view cell, std::size_t line, const std::string& column) {
  const auto v = parse_double(cell);
  if (!v || *v != std::floor(*v) || std::abs(*v) > 2e9) {
    throw Error(Errc::NonNumericCell, "line " + std::to_string(line) + ", column '" + column +
                                          "': expected an integer, got '" + std::string(cell) + "'");
  }
  return static_cast<int>(*v);
}

}  // namespace

void DataSchema::validate() const {
  std::set<std::string> seen;
  for (const auto& name : header()) {
    if (!seen.insert(name).second) {
      throw Error(Errc::ConfigInvalid, "schema binds column '" + name + "' to two roles");
    }
  }
  if (descriptors.empty() || sensors.empty()) {
    throw Error(Errc::ConfigInvalid, "schema needs at least one descriptor and one sensor");
  }
}

std::vector<std::string> DataSchema::header() const {
  std::vector<std::string> h{unit, cycle};
  h.insert(h.end(), descriptors.begin(), descriptors.end());
  h.insert(h.end(), sensors.begin(), sensors.end());
  return h;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_double(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

std::vector<UnitSeries> load_csv(const fs::path& path, const DataSchema& schema) {
  schema.validate();
  const std::string text = read_file(path);
  const auto lines = lines_of(text);
  if (lines.empty()) throw Error(Errc::EmptyFile, path.string() + " is empty");

  const auto header = split_cells(lines[0]);
  std::map<std::string, std::size_t, std::less<>> column;
  for (std::size_t i = 0; i < header.size(); ++i) column.emplace(std::string(header[i]), i);
  auto locate = [&](const std::string& name) {
    const auto it = column.find(name);
    if (it == column.end()) {
      throw Error(Errc::MissingColumn, path.string() + ": missing column '" + name + "'");
    }
    return it->second;
  };
  const auto unit_col = locate(schema.unit);
  const auto cycle_col = locate(schema.cycle);
  std::vector<std::size_t> w_cols, x_cols;
  for (const auto& n : schema.descriptors) w_cols.push_back(locate(n));
  for (const auto& n : schema.sensors) x_cols.push_back(locate(n));
  if (lines.size() < 2) throw Error(Errc::EmptyFile, path.string() + " has no data rows");

  struct Row {
    int cycle;
    std::size_t order;
    std::vector<double> values;
  };
  std::map<int, std::vector<Row>> by_unit;
  const std::size_t nw = w_cols.size();
  const std::size_t nx = x_cols.size();
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto cells = split_cells(lines[li]);
    if (cells.size() != header.size()) {
      throw Error(Errc::NonNumericCell, "line " + std::to_string(li + 1) + ": expected " +
                                            std::to_string(header.size()) + " cells, got " +
                                            std::to_string(cells.size()));
    }
    Row row;
    const int unit = parse_int_cell(cells[unit_col], li + 1, schema.unit);
    row.cycle = parse_int_cell(cells[cycle_col], li + 1, schema.cycle);
    row.order = li;
    row.values.reserve(nw + nx);
    auto take = [&](std::size_t col) {
      const auto v = parse_double(cells[col]);
      if (!v) {
        throw Error(Errc::NonNumericCell, "line " + std::to_string(li + 1) + ", column '" +
                                              std::string(header[col]) + "': '" +
                                              std::string(cells[col]) + "'");
      }
      row.values.push_back(*v);
    };
    for (auto c : w_cols) take(c);
    for (auto c : x_cols) take(c);
    by_unit[unit].push_back(std::move(row));
  }

  std::vector<UnitSeries> fleet;
  for (auto& [unit, rows] : by_unit) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.cycle < b.cycle; });
    const auto T = static_cast<Index>(rows.size());
    MatrixXd w(T, static_cast<Index>(nw));
    MatrixXd x(T, static_cast<Index>(nx));
    std::vector<int> cyc(rows.size());
    for (Index t = 0; t < T; ++t) {
      const auto& r = rows[static_cast<std::size_t>(t)];
      cyc[static_cast<std::size_t>(t)] = r.cycle;
      for (std::size_t j = 0; j < nw; ++j) w(t, static_cast<Index>(j)) = r.values[j];
      for (std::size_t j = 0; j < nx; ++j) x(t, static_cast<Index>(j)) = r.values[nw + j];
    }
    fleet.emplace_back(unit, "", std::move(w), std::move(x), std::move(cyc), schema.descriptors,
                       schema.sensors);
  }
  return fleet;
}

void save_csv(const fs::path& path, const std::vector<UnitSeries>& fleet, const DataSchema& schema) {
  schema.validate();
  auto out = open_out(path);
  const auto header = schema.header();
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  std::string line;
  for (const auto& unit : fleet) {
    if (static_cast<std::size_t>(unit.n_w()) != schema.descriptors.size() ||
        static_cast<std::size_t>(unit.n_x()) != schema.sensors.size()) {
      throw Error(Errc::ShapeMismatch, "unit channel counts do not match the schema");
    }
    for (Index t = 0; t < unit.rows(); ++t) {
      line = std::to_string(unit.unit_id());
      line += ',';
      line += std::to_string(unit.cycle_of()[static_cast<std::size_t>(t)]);
      for (Index j = 0; j < unit.n_w(); ++j) (line += ',') += format_double(unit.w()(t, j));
      for (Index j = 0; j < unit.n_x(); ++j) (line += ',') += format_double(unit.x()(t, j));
      line += '\n';
      out << line;
    }
  }
  if (!out) throw Error(Errc::Io, "write failed: " + path.string());
}

std::vector<GroundTruth> load_ground_truth(const fs::path& path) {
  const std::string text = read_file(path);
  const auto lines = lines_of(text);
  if (lines.empty()) throw Error(Errc::EmptyFile, path.string() + " is empty");
  const std::vector<std::string> expected{"unit", "family", "fault_cycle", "faulty_sensors"};
  const auto header = split_cells(lines[0]);
  for (const auto& name : expected) {
    if (std::find(header.begin(), header.end(), name) == header.end()) {
      throw Error(Errc::MissingColumn, path.string() + ": missing column '" + name + "'");
    }
  }
  auto col = [&](std::string_view name) {
    return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
  };
  std::vector<GroundTruth> out;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto cells = split_cells(lines[li]);
    if (cells.size() != header.size()) {
      throw Error(Errc::NonNumericCell, "line " + std::to_string(li + 1) + " has the wrong cell count");
    }
    GroundTruth g;
    g.unit_id = parse_int_cell(cells[col("unit")], li + 1, "unit");
    g.family = std::string(cells[col("family")]);
    if (!cells[col("fault_cycle")].empty()) {
      g.fault_cycle = parse_int_cell(cells[col("fault_cycle")], li + 1, "fault_cycle");
    }
    const auto sensors = cells[col("faulty_sensors")];
    if (!sensors.empty()) {
      for (auto s : split_cells(sensors, ';')) g.faulty_sensors.emplace_back(s);
    }
    out.push_back(std::move(g));
  }
  return out;
}

void save_ground_truth(const fs::path& path, const std::vector<GroundTruth>& truth) {
  auto out = open_out(path);
  out << "unit,family,fault_cycle,faulty_sensors\n";
  for (const auto& g : truth) {
    out << g.unit_id << ',' << g.family << ',';
    if (g.fault_cycle) out << *g.fault_cycle;
    out << ',';
    for (std::size_t i = 0; i < g.faulty_sensors.size(); ++i) {
      out << (i ? ";" : "") << g.faulty_sensors[i];
    }
    out << '\n';
  }
}

AeModel Checkpoint::ae() const {
  if (kind != ModelKind::AE) throw Error(Errc::KindMismatch, "checkpoint holds an OC model, AE expected");
  return {net, standardizer};
}

OcModel Checkpoint::oc() const {
  if (kind != ModelKind::OC) throw Error(Errc::KindMismatch, "checkpoint holds an AE model, OC expected");
  return {net, standardizer};
}

namespace {

json vector_json(const VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

VectorXd vector_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const fs::path& path) {
  ck.net.validate();
  json j;
  j["format"] = "resfault-checkpoint";
  j["format_version"] = kCheckpointVersion;
  j["kind"] = std::string(to_string(ck.kind));
  json dims = json::array();
  for (Index d : ck.net.layer_dims()) dims.push_back(d);
  j["layer_dims"] = dims;
  json acts = json::array();
  json layers = json::array();
  for (const auto& layer : ck.net.layers) {
    acts.push_back(layer.activation == Activation::Relu ? "relu" : "linear");
    json rows = json::array();
    for (Index r = 0; r < layer.weight.rows(); ++r) rows.push_back(vector_json(layer.weight.row(r).transpose()));
    layers.push_back({{"weight", rows}, {"bias", vector_json(layer.bias)}});
  }
  j["activations"] = acts;
  j["layers"] = layers;
  j["standardizer"] = {{"mean", vector_json(ck.standardizer.mean)},
                       {"std", vector_json(ck.standardizer.std)},
                       {"epsilon", ck.standardizer.epsilon}};
  j["channels"] = {{"w", ck.w_names}, {"x", ck.x_names}};
  const auto& m = ck.meta;
  j["training"] = {{"master_seed", m.master_seed},
                   {"realisation", m.realisation},
                   {"split_seed", m.split_seed},
                   {"init_seed", m.init_seed},
                   {"healthy_cycles_per_unit", m.healthy_cycles_per_unit},
                   {"validation_fraction", m.validation_fraction},
                   {"epochs_run", m.epochs_run},
                   {"best_epoch", m.best_epoch},
                   {"final_train_loss", m.final_train_loss},
                   {"final_val_loss", m.final_val_loss},
                   {"best_val_loss", m.best_val_loss}};
  auto out = open_out(path);
  out << j.dump(1) << '\n';
  if (!out) throw Error(Errc::Io, "write failed: " + path.string());
}

Checkpoint load_checkpoint(const fs::path& path, std::optional<ModelKind> expected) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(Errc::CorruptCheckpoint, path.string() + ": " + e.what());
  }
  Checkpoint ck;
  try {
    if (j.at("format").get<std::string>() != "resfault-checkpoint") {
      throw Error(Errc::CorruptCheckpoint, path.string() + " is not a checkpoint");
    }
    const int version = j.at("format_version").get<int>();
    if (version != kCheckpointVersion) {
      throw Error(Errc::VersionMismatch, path.string() + ": format_version " + std::to_string(version) +
                                            ", expected " + std::to_string(kCheckpointVersion));
    }
    const auto kind_text = j.at("kind").get<std::string>();
    if (kind_text != "ae" && kind_text != "oc") {
      throw Error(Errc::CorruptCheckpoint, "unknown model kind '" + kind_text + "'");
    }
    ck.kind = parse_model_kind(kind_text);
    if (expected && *expected != ck.kind) {
      throw Error(Errc::KindMismatch, path.string() + " holds a " + kind_text + " model, expected " +
                                          std::string(to_string(*expected)));
    }
    const auto dims = j.at("layer_dims").get<std::vector<Index>>();
    const auto acts = j.at("activations").get<std::vector<std::string>>();
    const auto& layers = j.at("layers");
    if (dims.size() < 2 || acts.size() + 1 != dims.size() || layers.size() + 1 != dims.size()) {
      throw Error(Errc::CorruptCheckpoint, "layer count inconsistent");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
      DenseLayer layer;
      if (acts[l] == "relu") {
        layer.activation = Activation::Relu;
      } else if (acts[l] == "linear") {
        layer.activation = Activation::Linear;
      } else {
        throw Error(Errc::CorruptCheckpoint, "unknown activation '" + acts[l] + "'");
      }
      const auto& rows = layers[l].at("weight");
      layer.weight.resize(dims[l + 1], dims[l]);
      if (static_cast<Index>(rows.size()) != dims[l + 1]) {
        throw Error(Errc::CorruptCheckpoint, "weight rows do not match layer_dims");
      }
      for (Index r = 0; r < dims[l + 1]; ++r) {
        const VectorXd row = vector_from(rows[static_cast<std::size_t>(r)]);
        if (row.size() != dims[l]) throw Error(Errc::CorruptCheckpoint, "weight row width mismatch");
        layer.weight.row(r) = row.transpose();
      }
      layer.bias = vector_from(layers[l].at("bias"));
      ck.net.layers.push_back(std::move(layer));
    }
    ck.net.validate();
    const auto& st = j.at("standardizer");
    ck.standardizer.mean = vector_from(st.at("mean"));
    ck.standardizer.std = vector_from(st.at("std"));
    ck.standardizer.epsilon = st.at("epsilon").get<double>();
    ck.w_names = j.at("channels").at("w").get<std::vector<std::string>>();
    ck.x_names = j.at("channels").at("x").get<std::vector<std::string>>();
    const auto nz = static_cast<Index>(ck.w_names.size() + ck.x_names.size());
    if (ck.standardizer.mean.size() != nz || ck.standardizer.std.size() != nz) {
      throw Error(Errc::CorruptCheckpoint, "standardizer width does not match channel names");
    }
    const bool io_ok = ck.kind == ModelKind::AE
                           ? ck.net.input_dim() == nz && ck.net.output_dim() == nz
                           : ck.net.input_dim() == static_cast<Index>(ck.w_names.size()) &&
                                 ck.net.output_dim() == static_cast<Index>(ck.x_names.size());
    if (!io_ok) throw Error(Errc::CorruptCheckpoint, "network width does not match channels");
    const auto& t = j.at("training");
    auto& m = ck.meta;
    m.master_seed = t.at("master_seed").get<std::uint64_t>();
    m.realisation = t.at("realisation").get<int>();
    m.split_seed = t.at("split_seed").get<std::uint64_t>();
    m.init_seed = t.at("init_seed").get<std::uint64_t>();
    m.healthy_cycles_per_unit = t.at("healthy_cycles_per_unit").get<int>();
    m.validation_fraction = t.at("validation_fraction").get<double>();
    m.epochs_run = t.at("epochs_run").get<int>();
    m.best_epoch = t.at("best_epoch").get<int>();
    m.final_train_loss = t.at("final_train_loss").get<double>();
    m.final_val_loss = t.at("final_val_loss").get<double>();
    m.best_val_loss = t.at("best_val_loss").get<double>();
  } catch (const json::exception& e) {
    throw Error(Errc::CorruptCheckpoint, path.string() + ": " + e.what());
  }
  return ck;
}

}  // namespace resfault
