#include "resfault/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "resfault/error.hpp"
#include "resfault/seeding.hpp"

namespace resfault {

namespace {

constexpr std::string_view kUnknownFamily = "unknown";

std::vector<std::string> split_on(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(text);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

MatrixXd standardized_z(const Checkpoint& ck, const UnitSeries& series) {
  return apply_standardizer(ck.standardizer, series.z());
}

MatrixXd rows_of(const MatrixXd& m, Index begin, Index end) { return m.middleRows(begin, end - begin); }

}  // namespace

PreparedData prepare_data(const std::vector<UnitSeries>& raw,
                          const std::optional<std::vector<GroundTruth>>& truth,
                          const PreprocessConfig& config) {
  if (raw.empty()) throw Error(Errc::EmptyDataset, "no units in the data set");
  PreparedData out;
  out.has_truth = truth.has_value();
  std::map<int, GroundTruth> by_unit;
  if (truth) {
    for (const auto& t : *truth) by_unit[t.unit_id] = t;
  }
  for (const auto& unit : raw) {
    GroundTruth t;
    if (truth) {
      const auto it = by_unit.find(unit.unit_id());
      if (it == by_unit.end()) {
        throw Error(Errc::MissingGroundTruth, "no ground truth for unit " + std::to_string(unit.unit_id()));
      }
      t = it->second;
    } else {
      t.unit_id = unit.unit_id();
      t.family = std::string(kUnknownFamily);
    }
    out.units.push_back(select_analysis_rows(unit, config).with_dataset_id(t.family));
    out.truth.push_back(std::move(t));
  }
  return out;
}

PreparedData load_data_dir(const std::filesystem::path& data_dir, const PreprocessConfig& config) {
  const auto data_path = data_dir / kDataFile;
  if (!std::filesystem::exists(data_path)) {
    throw Error(Errc::Io, "missing " + data_path.string());
  }
  const auto raw = load_csv(data_path);
  std::optional<std::vector<GroundTruth>> truth;
  if (std::filesystem::exists(data_dir / kTruthFile)) truth = load_ground_truth(data_dir / kTruthFile);
  return prepare_data(raw, truth, config);
}

RealisationSeeds realisation_seeds(std::uint64_t master_seed, int realisation) {
  const auto r = static_cast<std::uint64_t>(realisation);
  return {derive_seed(master_seed, 2, r), derive_seed(master_seed, 3, r), derive_seed(master_seed, 4, r)};
}

PreparedSplit prepare_split(const PreparedData& data, int healthy_cycles, double validation_fraction,
                            std::uint64_t split_seed, double epsilon) {
  PreparedSplit out;
  out.split = split(data.units, SplitSpec{healthy_cycles, validation_fraction, split_seed});
  out.standardizer = fit_standardizer(gather(data.units, out.split.train, Channels::Z), epsilon);
  return out;
}

TrainedModel train_model(const PreparedData& data, const RunConfig& config, ModelKind kind,
                         int realisation) {
  config.validate();
  const auto seeds = realisation_seeds(config.experiment.seed, realisation);
  const auto prep = prepare_split(data, config.split.healthy_cycles_per_unit,
                                  config.split.validation_fraction, seeds.split, config.preprocess.epsilon);
  const MatrixXd train_z = apply_standardizer(prep.standardizer, gather(data.units, prep.split.train, Channels::Z));
  const MatrixXd val_z =
      apply_standardizer(prep.standardizer, gather(data.units, prep.split.validation, Channels::Z));
  const auto& first = data.units.front();
  const Index nx = first.n_x();
  const Index nw = first.n_w();

  TrainConfig tc = config.train;
  tc.seed = kind == ModelKind::AE ? seeds.ae : seeds.oc;

  TrainedModel out;
  auto& ck = out.checkpoint;
  ck.kind = kind;
  ck.standardizer = prep.standardizer;
  ck.w_names = first.w_names();
  ck.x_names = first.x_names();
  const TrainResult* log = nullptr;
  AeTraining ae;
  OcTraining oc;
  if (kind == ModelKind::AE) {
    ae = train_ae(train_z, val_z, tc, prep.standardizer, config.models.ae_hidden);
    ck.net = ae.model.net;
    log = &ae.log;
  } else {
    oc = train_oc(train_z.rightCols(nw), train_z.leftCols(nx), val_z.rightCols(nw), val_z.leftCols(nx), tc,
                  prep.standardizer, config.models.oc_hidden);
    ck.net = oc.model.net;
    log = &oc.log;
  }
  out.history = log->history;

  auto& m = ck.meta;
  m.master_seed = config.experiment.seed;
  m.realisation = realisation;
  m.split_seed = seeds.split;
  m.init_seed = tc.seed;
  m.healthy_cycles_per_unit = config.split.healthy_cycles_per_unit;
  m.validation_fraction = config.split.validation_fraction;
  m.epochs_run = static_cast<int>(log->history.size());
  m.best_epoch = log->best_epoch;
  if (!log->history.empty()) {
    m.final_train_loss = log->history.back().train_loss;
    m.final_val_loss = log->history.back().val_loss;
    m.best_val_loss = log->history[static_cast<std::size_t>(log->best_epoch - 1)].val_loss;
  }
  return out;
}

MatrixXd unit_residuals(const Checkpoint& checkpoint, const UnitSeries& series) {
  if (series.w_names() != checkpoint.w_names || series.x_names() != checkpoint.x_names) {
    throw Error(Errc::ShapeMismatch, "data channels do not match the checkpoint");
  }
  const MatrixXd z = standardized_z(checkpoint, series);
  if (checkpoint.kind == ModelKind::AE) return residual_ae(checkpoint.ae(), z);
  const Index nx = series.n_x();
  return residual_oc(checkpoint.oc(), z.rightCols(series.n_w()), z.leftCols(nx));
}

std::vector<std::string> residual_channels(const Checkpoint& checkpoint) {
  if (checkpoint.kind == ModelKind::OC) return checkpoint.x_names;
  auto names = checkpoint.x_names;
  names.insert(names.end(), checkpoint.w_names.begin(), checkpoint.w_names.end());
  return names;
}

DetectionRun run_detection(const PreparedData& data, const Checkpoint& checkpoint, HiKind hi,
                           const RunConfig& config) {
  const auto& meta = checkpoint.meta;
  const Split sp =
      split(data.units, SplitSpec{meta.healthy_cycles_per_unit, meta.validation_fraction, meta.split_seed});

  DetectionRun run;
  run.model = checkpoint.kind;
  run.hi = hi;
  run.realisation = meta.realisation;
  run.channel_names = hi == HiKind::Aggregated ? std::vector<std::string>{"aggregated"} : residual_channels(checkpoint);

  std::vector<HiSeries> his;
  his.reserve(data.units.size());
  for (const auto& unit : data.units) {
    his.push_back(make_hi(unit_residuals(checkpoint, unit), hi, checkpoint.kind, run.channel_names, unit.cycle_of()));
  }

  SampleSet healthy = sp.validation;
  if (config.detect.stats_source == StatsSource::TrainAndValidation) {
    healthy.insert(healthy.end(), sp.train.begin(), sp.train.end());
    std::sort(healthy.begin(), healthy.end());
  }
  if (healthy.empty()) throw Error(Errc::InsufficientData, "no healthy rows to fit thresholds on");
  MatrixXd healthy_values(static_cast<Index>(healthy.size()), his.front().channels());
  for (std::size_t i = 0; i < healthy.size(); ++i) {
    healthy_values.row(static_cast<Index>(i)) = his[healthy[i].unit].values.row(healthy[i].row);
  }
  run.stats = fit_stats(healthy_values);

  for (std::size_t u = 0; u < data.units.size(); ++u) {
    const auto& unit = data.units[u];
    const int first_test_cycle = unit.cycle_of()[static_cast<std::size_t>(sp.first_test_row[u])];
    CycleHi chi = cycle_average(his[u]).from_cycle(first_test_cycle);
    const auto det = detect(chi, run.stats, config.detect.n_wait);
    run.reports.push_back(make_report(unit.unit_id(), unit.dataset_id(), data.truth[u].fault_cycle, chi, det));
    run.cycle_hi.push_back(std::move(chi));
    run.labels.push_back(data.truth[u].family);
  }
  return run;
}

SegmentationResult run_segmentation(const PreparedData& data, const Checkpoint& checkpoint,
                                    const DetectionRun& sensorwise, const RunConfig& config) {
  if (sensorwise.hi != HiKind::Sensorwise) {
    throw Error(Errc::ConfigInvalid, "segmentation needs a sensor-wise detection run");
  }
  if (sensorwise.reports.size() != data.units.size()) {
    throw Error(Errc::ShapeMismatch, "detection run does not match the data set");
  }
  const auto& seg = config.segment;
  SegmentationResult out;
  out.model = sensorwise.model;
  out.realisation = sensorwise.realisation;
  out.channel_names = sensorwise.channel_names;

  std::vector<SegmentationUnit> fleet;
  for (std::size_t u = 0; u < data.units.size(); ++u) {
    const auto& rep = sensorwise.reports[u];
    if (!rep.n_true || !rep.alarm_cycle) continue;
    fleet.push_back({rep, sensorwise.cycle_hi[u], sensorwise.labels[u]});
  }
  out.curve = silhouette_curve(fleet, seg.k_min, seg.k_max, seg.normalization);

  std::vector<int> ids;
  std::vector<std::string> labels;
  for (const auto& f : fleet) {
    out.timelines.push_back(
        {f.report.unit_id, f.fault_label, trigger_timeline(f.report, sensorwise.stats, f.cycle_hi, seg.checkpoints)});
    if (!f.cycle_hi.position_of(*f.report.alarm_cycle + seg.snapshot_offset)) continue;
    out.signatures.push_back(snapshot(f.report, f.cycle_hi, seg.snapshot_offset, seg.normalization, f.fault_label));
    labels.push_back(f.fault_label);
  }
  ids = encode_labels(labels);
  if (out.signatures.size() >= 3) out.pca = pca_2d(out.signatures);
  if (std::set<int>(ids.begin(), ids.end()).size() >= 2) {
    out.snapshot_silhouette = silhouette(stack_signatures(out.signatures), ids);
  }

  if (checkpoint.kind == ModelKind::AE) {
    const AeModel ae = checkpoint.ae();
    std::map<int, std::size_t> index_of;
    for (std::size_t u = 0; u < data.units.size(); ++u) index_of[data.units[u].unit_id()] = u;
    for (const auto& sig : out.signatures) {
      const auto& unit = data.units[index_of.at(sig.unit_id)];
      const int target = *sensorwise.reports[index_of.at(sig.unit_id)].alarm_cycle + seg.snapshot_offset;
      for (const auto& view : cycles(unit)) {
        if (view.cycle_index != target) continue;
        const MatrixXd z = rows_of(standardized_z(checkpoint, unit), view.begin, view.end);
        out.embedding.push_back({sig.unit_id, sig.fault_label, embedding_ae(ae, z).colwise().mean().transpose()});
      }
    }
    if (out.embedding.size() >= 3) {
      MatrixXd pts(static_cast<Index>(out.embedding.size()), out.embedding.front().embedding.size());
      for (std::size_t i = 0; i < out.embedding.size(); ++i) {
        pts.row(static_cast<Index>(i)) = out.embedding[i].embedding.transpose();
      }
      if (pts.cols() >= 2) out.embedding_pca = pca_2d(pts);
      if (std::set<int>(ids.begin(), ids.end()).size() >= 2) out.embedding_silhouette = silhouette(pts, ids);
    }
  }
  return out;
}

std::vector<ReportRow> report_rows(const DetectionRun& run) {
  std::vector<ReportRow> rows;
  for (const auto& r : run.reports) {
    ReportRow row;
    row.unit_id = r.unit_id;
    row.dataset_id = r.dataset_id;
    row.model = run.model;
    row.hi = run.hi;
    row.realisation = run.realisation;
    row.n_true = r.n_true;
    row.alarm_cycle = r.alarm_cycle;
    row.delay = r.delay;
    row.false_positive = r.false_positive();
    for (Index c : r.triggered_first) row.triggered_first.push_back(run.channel_names[static_cast<std::size_t>(c)]);
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

const std::vector<std::string> kReportHeader{"unit", "dataset", "model", "hi", "realisation", "n_true",
                                             "n0", "d_u", "false_positive", "triggered_first"};

std::string opt_int(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }

int parse_int_cell(const std::string& text, const std::filesystem::path& path, std::size_t line) {
  const auto v = parse_double(text);
  if (!v || *v != std::floor(*v) || std::abs(*v) > 1e9) {
    throw Error(Errc::NonNumericCell, path.string() + ":" + std::to_string(line) + ": expected an integer, got '" +
                                          text + "'");
  }
  return static_cast<int>(*v);
}

std::optional<int> parse_opt_int(const std::string& text, const std::filesystem::path& path, std::size_t line) {
  if (text.empty() || text == "-") return std::nullopt;
  return parse_int_cell(text, path, line);
}

}  // namespace

void save_reports(const std::filesystem::path& path, std::span<const ReportRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << join(kReportHeader, ',') << '\n';
  for (const auto& r : rows) {
    out << r.unit_id << ',' << r.dataset_id << ',' << to_string(r.model) << ',' << to_string(r.hi) << ','
        << r.realisation << ',' << opt_int(r.n_true) << ',' << opt_int(r.alarm_cycle) << ',' << opt_int(r.delay)
        << ',' << (r.false_positive ? 1 : 0) << ',' << join(r.triggered_first, ';') << '\n';
  }
  if (!out) throw Error(Errc::Io, "failed writing " + path.string());
}

std::vector<ReportRow> load_reports(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::EmptyFile, path.string() + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_on(line, ',');
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const auto& name : kReportHeader) {
    if (!col.count(name)) throw Error(Errc::MissingColumn, path.string() + " lacks column '" + name + "'");
  }
  std::vector<ReportRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_on(line, ',');
    if (f.size() != header.size()) {
      throw Error(Errc::NonNumericCell, path.string() + ":" + std::to_string(lineno) + ": expected " +
                                            std::to_string(header.size()) + " fields");
    }
    auto cell = [&](const std::string& name) -> const std::string& { return f[col.at(name)]; };
    ReportRow r;
    r.unit_id = parse_int_cell(cell("unit"), path, lineno);
    r.dataset_id = cell("dataset");
    try {
      r.model = parse_model_kind(cell("model"));
      r.hi = parse_hi_kind(cell("hi"));
    } catch (const Error& e) {
      throw Error(Errc::NonNumericCell, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    r.realisation = parse_int_cell(cell("realisation"), path, lineno);
    r.n_true = parse_opt_int(cell("n_true"), path, lineno);
    r.alarm_cycle = parse_opt_int(cell("n0"), path, lineno);
    r.delay = parse_opt_int(cell("d_u"), path, lineno);
    r.false_positive = parse_int_cell(cell("false_positive"), path, lineno) != 0;
    if (!cell("triggered_first").empty()) r.triggered_first = split_on(cell("triggered_first"), ';');
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw Error(Errc::EmptyFile, path.string() + " has no report rows");
  return rows;
}

const MethodSummary* EvaluationSummary::find(ModelKind model, HiKind hi) const {
  for (const auto& m : methods) {
    if (m.model == model && m.hi == hi) return &m;
  }
  return nullptr;
}

EvaluationSummary evaluate_reports(std::span<const ReportRow> rows) {
  if (rows.empty()) throw Error(Errc::EmptyFleet, "no report rows to evaluate");
  using MethodKey = std::pair<ModelKind, HiKind>;
  std::map<MethodKey, std::map<int, std::vector<const ReportRow*>>> by_method;
  for (const auto& r : rows) by_method[{r.model, r.hi}][r.realisation].push_back(&r);

  EvaluationSummary out;
  for (const auto& [key, by_real] : by_method) {
    MethodSummary m;
    m.model = key.first;
    m.hi = key.second;
    m.realisations = static_cast<int>(by_real.size());
    double delay_sum = 0.0;
    int delay_n = 0;
    double fpr_sum = 0.0;
    std::map<int, UnitSummary> units;
    std::map<int, double> unit_delay_sum;
    for (const auto& [real, reps] : by_real) {
      double s = 0.0;
      int n = 0;
      int fp = 0;
      for (const auto* r : reps) {
        if (r->delay) {
          s += *r->delay;
          ++n;
        }
        if (r->false_positive) ++fp;
        auto& u = units[r->unit_id];
        u.unit_id = r->unit_id;
        u.dataset_id = r->dataset_id;
        u.model = key.first;
        u.hi = key.second;
        u.n_true = r->n_true;
        ++u.realisations;
        if (r->delay) {
          ++u.detected;
          unit_delay_sum[r->unit_id] += *r->delay;
        }
      }
      std::optional<double> d;
      if (n > 0) d = s / n;
      m.per_realisation_delay.push_back(d);
      if (d) {
        delay_sum += *d;
        ++delay_n;
      }
      const double fpr = static_cast<double>(fp) / static_cast<double>(reps.size());
      m.per_realisation_fpr.push_back(fpr);
      fpr_sum += fpr;
    }
    if (delay_n > 0) m.mean_delay = delay_sum / delay_n;
    m.fpr = fpr_sum / m.realisations;
    out.methods.push_back(std::move(m));
    for (auto& [id, u] : units) {
      if (u.detected > 0) u.mean_delay = unit_delay_sum[id] / u.detected;
      out.units.push_back(std::move(u));
    }
  }
  return out;
}

std::string format_optional(const std::optional<double>& value) {
  return value ? format_double(*value) : std::string("-");
}

const DetectionRun& ExperimentResult::run(int realisation, ModelKind model, HiKind hi) const {
  for (const auto& rr : realisations) {
    if (rr.realisation != realisation) continue;
    for (const auto& run : rr.runs) {
      if (run.model == model && run.hi == hi) return run;
    }
  }
  throw Error(Errc::EmptyDataset, "no detection run for the requested realisation");
}

ExperimentResult run_experiment(const PreparedData& data, const RunConfig& config) {
  config.validate();
  ExperimentResult out;
  std::vector<ReportRow> all_rows;
  for (int r = 0; r < config.experiment.realisations; ++r) {
    RealisationResult rr;
    rr.realisation = r;
    for (ModelKind kind : {ModelKind::AE, ModelKind::OC}) {
      rr.models.push_back(train_model(data, config, kind, r));
      const auto& ck = rr.models.back().checkpoint;
      for (HiKind hi : {HiKind::Aggregated, HiKind::Sensorwise}) {
        rr.runs.push_back(run_detection(data, ck, hi, config));
        const auto rows = report_rows(rr.runs.back());
        all_rows.insert(all_rows.end(), rows.begin(), rows.end());
      }
      rr.segmentation.push_back(run_segmentation(data, ck, rr.runs.back(), config));
    }
    out.realisations.push_back(std::move(rr));
  }
  out.summary = evaluate_reports(all_rows);

  for (std::size_t m = 0; m < 2; ++m) {
    std::vector<SilhouettePoint> mean = out.realisations.front().segmentation[m].curve;
    for (std::size_t i = 0; i < mean.size(); ++i) {
      double s = 0.0;
      std::size_t units = 0;
      for (const auto& rr : out.realisations) {
        s += rr.segmentation[m].curve[i].score;
        units += rr.segmentation[m].curve[i].units;
      }
      mean[i].score = s / static_cast<double>(out.realisations.size());
      mean[i].units = units / out.realisations.size();
    }
    out.mean_curve.push_back(std::move(mean));
  }
  return out;
}

}  // namespace resfault
