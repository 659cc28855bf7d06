#include <CLI11.hpp>
#include <Eigen/Core>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "resfault/config.hpp"
#include "resfault/error.hpp"
#include "resfault/experiment.hpp"
#include "resfault/io_persistence.hpp"
#include "resfault/synth.hpp"

namespace fs = std::filesystem;
using namespace resfault;

namespace {

constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitCompute = 4;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON configuration file");
  cmd->add_option("--seed", c.seed, "Master seed, overrides the configuration");
  cmd->add_option("--out", c.out, "Output directory");
}

RunConfig resolve_config(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? parse_config("") : load_config(c.config_path);
  if (c.seed) {
    cfg.experiment.seed = *c.seed;
    cfg.synth.seed = *c.seed;
  }
  return cfg;
}

fs::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::Io, "cannot create directory " + dir + ": " + ec.message());
  return fs::path(dir);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
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

std::string opt_text(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string("-"); }

std::string run_tag(ModelKind model, int realisation) {
  return std::string(to_string(model)) + "_r" + std::to_string(realisation);
}

std::string run_tag(ModelKind model, HiKind hi, int realisation) {
  return std::string(to_string(model)) + "_" + std::string(to_string(hi)) + "_r" + std::to_string(realisation);
}

class Manifest {
 public:
  Manifest(std::string command, const RunConfig& cfg) : command_(std::move(command)), config_(dump_config(cfg)) {
    seed_ = cfg.experiment.seed;
  }
  void note(const std::string& key, const std::string& value) { notes_.emplace_back(key, value); }
  void output(const fs::path& p) { outputs_.push_back(p.filename().string()); }

  void write(const fs::path& dir) {
    auto out = open_out(dir / "manifest.txt");
    out << "command: " << command_ << '\n';
    out << "resfault: " << RESFAULT_VERSION << '\n';
    out << "eigen: " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << '\n';
    out << "master_seed: " << seed_ << '\n';
    for (const auto& [k, v] : notes_) out << k << ": " << v << '\n';
    out << "outputs:\n";
    for (const auto& o : outputs_) out << "  " << o << '\n';
    out << "config:\n" << config_ << '\n';
  }

 private:
  std::string command_;
  std::string config_;
  std::uint64_t seed_ = 0;
  std::vector<std::pair<std::string, std::string>> notes_;
  std::vector<std::string> outputs_;
};

void write_history(const fs::path& path, const std::vector<EpochRecord>& history) {
  auto out = open_out(path);
  out << "epoch,train_loss,val_loss\n";
  for (const auto& e : history) {
    out << e.epoch << ',' << format_double(e.train_loss) << ',' << format_double(e.val_loss) << '\n';
  }
}

void write_stats(const fs::path& path, const DetectionRun& run) {
  auto out = open_out(path);
  out << "channel,mu,sigma,tau,fitted_on\n";
  for (Index k = 0; k < run.stats.channels(); ++k) {
    out << run.channel_names[static_cast<std::size_t>(k)] << ',' << format_double(run.stats.mu(k)) << ','
        << format_double(run.stats.sigma(k)) << ',' << format_double(run.stats.tau(k)) << ','
        << run.stats.fitted_on << '\n';
  }
}

void write_exceedance(const fs::path& path, const DetectionRun& run) {
  auto out = open_out(path);
  out << "unit,cycle," << join(run.channel_names, ',') << ",exceeding\n";
  for (std::size_t u = 0; u < run.reports.size(); ++u) {
    const auto& chi = run.cycle_hi[u];
    for (std::size_t i = 0; i < chi.cycles.size(); ++i) {
      out << run.reports[u].unit_id << ',' << chi.cycles[i];
      for (Index k = 0; k < chi.values.cols(); ++k) out << ',' << format_double(chi.values(static_cast<Index>(i), k));
      std::vector<std::string> names;
      for (Index c : run.reports[u].per_cycle_exceedance[i]) names.push_back(run.channel_names[static_cast<std::size_t>(c)]);
      out << ',' << join(names, ';') << '\n';
    }
  }
}

std::vector<fs::path> write_detection(const fs::path& dir, const DetectionRun& run) {
  const auto tag = run_tag(run.model, run.hi, run.realisation);
  std::vector<fs::path> written{dir / ("reports_" + tag + ".csv"), dir / ("stats_" + tag + ".csv"),
                                dir / ("exceedance_" + tag + ".csv")};
  save_reports(written[0], report_rows(run));
  write_stats(written[1], run);
  write_exceedance(written[2], run);
  return written;
}

void write_pca(const fs::path& path, const Pca2d& pca, const std::vector<int>& units,
               const std::vector<std::string>& labels) {
  auto out = open_out(path);
  out << "unit,label,pc1,pc2\n";
  for (std::size_t i = 0; i < units.size(); ++i) {
    const auto r = static_cast<Index>(i);
    out << units[i] << ',' << labels[i] << ',' << format_double(pca.coords(r, 0)) << ','
        << format_double(pca.coords(r, 1)) << '\n';
  }
}

std::vector<fs::path> write_segmentation(const fs::path& dir, const SegmentationResult& seg) {
  const auto tag = run_tag(seg.model, seg.realisation);
  std::vector<fs::path> written;
  {
    written.push_back(dir / ("signatures_" + tag + ".csv"));
    auto out = open_out(written.back());
    out << "unit,label," << join(seg.channel_names, ',') << '\n';
    for (const auto& s : seg.signatures) {
      out << s.unit_id << ',' << s.fault_label;
      for (Index k = 0; k < s.vector.size(); ++k) out << ',' << format_double(s.vector(k));
      out << '\n';
    }
  }
  std::vector<int> units;
  std::vector<std::string> labels;
  for (const auto& s : seg.signatures) {
    units.push_back(s.unit_id);
    labels.push_back(s.fault_label);
  }
  if (seg.pca) {
    written.push_back(dir / ("pca_" + tag + ".csv"));
    write_pca(written.back(), *seg.pca, units, labels);
  }
  {
    written.push_back(dir / ("silhouette_" + tag + ".csv"));
    auto out = open_out(written.back());
    out << "k,silhouette,units\n";
    for (const auto& p : seg.curve) {
      out << p.k << ',' << (std::isnan(p.score) ? std::string("-") : format_double(p.score)) << ',' << p.units << '\n';
    }
  }
  {
    written.push_back(dir / ("timeline_" + tag + ".csv"));
    auto out = open_out(written.back());
    out << "unit,label,channel,first_checkpoint\n";
    for (const auto& t : seg.timelines) {
      for (std::size_t k = 0; k < t.first_checkpoint.size(); ++k) {
        out << t.unit_id << ',' << t.fault_label << ',' << seg.channel_names[k] << ','
            << opt_text(t.first_checkpoint[k]) << '\n';
      }
    }
  }
  if (!seg.embedding.empty()) {
    written.push_back(dir / ("embedding_" + tag + ".csv"));
    auto out = open_out(written.back());
    out << "unit,label";
    for (Index k = 0; k < seg.embedding.front().embedding.size(); ++k) out << ",e" << k + 1;
    out << (seg.embedding_pca ? ",pc1,pc2\n" : "\n");
    for (std::size_t i = 0; i < seg.embedding.size(); ++i) {
      const auto& e = seg.embedding[i];
      out << e.unit_id << ',' << e.fault_label;
      for (Index k = 0; k < e.embedding.size(); ++k) out << ',' << format_double(e.embedding(k));
      if (seg.embedding_pca) {
        const auto r = static_cast<Index>(i);
        out << ',' << format_double(seg.embedding_pca->coords(r, 0)) << ','
            << format_double(seg.embedding_pca->coords(r, 1));
      }
      out << '\n';
    }
  }
  return written;
}

std::vector<fs::path> write_summary(const fs::path& dir, const EvaluationSummary& summary, std::ostream& console) {
  std::vector<fs::path> written{dir / "summary.csv", dir / "units.csv"};
  {
    auto out = open_out(written[0]);
    out << "model,hi,realisations,mean_delay,fpr\n";
    for (const auto& m : summary.methods) {
      out << to_string(m.model) << ',' << to_string(m.hi) << ',' << m.realisations << ','
          << format_optional(m.mean_delay) << ',' << format_double(m.fpr) << '\n';
    }
  }
  {
    auto out = open_out(written[1]);
    out << "unit,dataset,model,hi,n_true,mean_delay,detected,realisations\n";
    for (const auto& u : summary.units) {
      out << u.unit_id << ',' << u.dataset_id << ',' << to_string(u.model) << ',' << to_string(u.hi) << ','
          << opt_text(u.n_true) << ',' << format_optional(u.mean_delay) << ',' << u.detected << ','
          << u.realisations << '\n';
    }
  }
  console << "model hi          realisations mean_delay fpr\n";
  for (const auto& m : summary.methods) {
    char line[128];
    std::snprintf(line, sizeof line, "%-5s %-11s %12d %10s %.4f\n", std::string(to_string(m.model)).c_str(),
                  std::string(to_string(m.hi)).c_str(), m.realisations,
                  m.mean_delay ? std::to_string(*m.mean_delay).substr(0, 8).c_str() : "-", m.fpr);
    console << line;
  }
  return written;
}

std::vector<HiKind> parse_hi_choice(const std::string& text) {
  if (text == "both") return {HiKind::Aggregated, HiKind::Sensorwise};
  return {parse_hi_kind(text)};
}

int cmd_synth(const Common& c) {
  const auto cfg = resolve_config(c);
  const auto dir = ensure_dir(c.out);
  const auto fleet = gen_fleet(cfg.synth);
  std::vector<UnitSeries> series;
  std::vector<GroundTruth> truth;
  for (const auto& u : fleet) {
    series.push_back(u.series);
    truth.push_back(u.truth);
  }
  Manifest manifest("synth", cfg);
  save_csv(dir / kDataFile, series);
  save_ground_truth(dir / kTruthFile, truth);
  manifest.output(dir / kDataFile);
  manifest.output(dir / kTruthFile);
  manifest.note("units", std::to_string(series.size()));
  manifest.write(dir);
  std::cout << "wrote " << series.size() << " units to " << dir.string() << '\n';
  return 0;
}

int cmd_train(const Common& c, const std::string& data_dir, const std::string& model, int realisation) {
  const auto cfg = resolve_config(c);
  const auto kind = parse_model_kind(model);
  const auto data = load_data_dir(data_dir, cfg.preprocess);
  const auto dir = ensure_dir(c.out);
  const auto trained = train_model(data, cfg, kind, realisation);
  const auto tag = run_tag(kind, realisation);
  Manifest manifest("train " + std::string(to_string(kind)), cfg);
  save_checkpoint(trained.checkpoint, dir / (tag + ".json"));
  write_history(dir / (tag + "_history.csv"), trained.history);
  manifest.output(dir / (tag + ".json"));
  manifest.output(dir / (tag + "_history.csv"));
  manifest.note("realisation", std::to_string(realisation));
  manifest.note("split_seed", std::to_string(trained.checkpoint.meta.split_seed));
  manifest.note("init_seed", std::to_string(trained.checkpoint.meta.init_seed));
  manifest.write(dir);
  std::cout << tag << ": " << trained.checkpoint.meta.epochs_run << " epochs, best val loss "
            << format_double(trained.checkpoint.meta.best_val_loss) << '\n';
  return 0;
}

int cmd_detect(const Common& c, const std::string& data_dir, const std::string& checkpoint, const std::string& hi) {
  const auto cfg = resolve_config(c);
  const auto kinds = parse_hi_choice(hi);
  const auto data = load_data_dir(data_dir, cfg.preprocess);
  const auto ck = load_checkpoint(checkpoint);
  const auto dir = ensure_dir(c.out);
  Manifest manifest("detect", cfg);
  manifest.note("checkpoint", fs::path(checkpoint).filename().string());
  for (HiKind k : kinds) {
    const auto run = run_detection(data, ck, k, cfg);
    for (const auto& p : write_detection(dir, run)) manifest.output(p);
    const auto d = mean_detection_delay(run.reports);
    std::cout << run_tag(run.model, run.hi, run.realisation) << ": mean delay " << (d ? format_double(*d) : "-")
              << ", fpr " << format_double(false_positive_rate(run.reports)) << '\n';
  }
  manifest.write(dir);
  return 0;
}

int cmd_evaluate(const Common& c, const std::vector<std::string>& reports) {
  const auto cfg = resolve_config(c);
  std::vector<ReportRow> rows;
  for (const auto& p : reports) {
    auto part = load_reports(p);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  const auto dir = ensure_dir(c.out);
  Manifest manifest("evaluate", cfg);
  for (const auto& p : reports) manifest.note("input", fs::path(p).filename().string());
  for (const auto& p : write_summary(dir, evaluate_reports(rows), std::cout)) manifest.output(p);
  manifest.write(dir);
  return 0;
}

int cmd_segment(const Common& c, const std::string& data_dir, const std::string& checkpoint,
                const std::vector<std::string>& reports) {
  const auto cfg = resolve_config(c);
  const auto data = load_data_dir(data_dir, cfg.preprocess);
  const auto ck = load_checkpoint(checkpoint);
  const auto dir = ensure_dir(c.out);
  auto run = run_detection(data, ck, HiKind::Sensorwise, cfg);
  if (!reports.empty()) {
    std::map<int, std::optional<int>> alarm;
    for (const auto& p : reports) {
      for (const auto& r : load_reports(p)) {
        if (r.model == ck.kind && r.hi == HiKind::Sensorwise && r.realisation == ck.meta.realisation) {
          alarm[r.unit_id] = r.alarm_cycle;
        }
      }
    }
    if (alarm.empty()) throw Error(Errc::MissingColumn, "reports hold no sensor-wise rows for this checkpoint");
    for (auto& rep : run.reports) {
      const auto it = alarm.find(rep.unit_id);
      rep.alarm_cycle = it == alarm.end() ? std::nullopt : it->second;
    }
  }
  const auto seg = run_segmentation(data, ck, run, cfg);
  Manifest manifest("segment", cfg);
  manifest.note("checkpoint", fs::path(checkpoint).filename().string());
  for (const auto& p : write_segmentation(dir, seg)) manifest.output(p);
  manifest.write(dir);
  if (seg.snapshot_silhouette) {
    std::cout << run_tag(seg.model, seg.realisation) << ": silhouette at n0+" << cfg.segment.snapshot_offset << " = "
              << format_double(*seg.snapshot_silhouette) << '\n';
  }
  return 0;
}

int cmd_run(const Common& c, const std::string& data_dir) {
  const auto cfg = resolve_config(c);
  const auto data = load_data_dir(data_dir, cfg.preprocess);
  const auto dir = ensure_dir(c.out);
  const auto result = run_experiment(data, cfg);
  Manifest manifest("run", cfg);
  for (const auto& rr : result.realisations) {
    const auto seeds = realisation_seeds(cfg.experiment.seed, rr.realisation);
    manifest.note("realisation " + std::to_string(rr.realisation),
                  "split " + std::to_string(seeds.split) + ", ae " + std::to_string(seeds.ae) + ", oc " +
                      std::to_string(seeds.oc));
    for (const auto& m : rr.models) {
      const auto tag = run_tag(m.checkpoint.kind, rr.realisation);
      save_checkpoint(m.checkpoint, dir / (tag + ".json"));
      write_history(dir / (tag + "_history.csv"), m.history);
      manifest.output(dir / (tag + ".json"));
      manifest.output(dir / (tag + "_history.csv"));
    }
    for (const auto& run : rr.runs) {
      for (const auto& p : write_detection(dir, run)) manifest.output(p);
    }
    for (const auto& seg : rr.segmentation) {
      for (const auto& p : write_segmentation(dir, seg)) manifest.output(p);
    }
  }
  for (const auto& p : write_summary(dir, result.summary, std::cout)) manifest.output(p);
  manifest.write(dir);
  return 0;
}

int exit_code_for(const Error& e) {
  switch (e.category()) {
    case ErrorCategory::Config: return kExitConfig;
    case ErrorCategory::Data: return kExitData;
    case ErrorCategory::Computation: return kExitCompute;
  }
  return kExitOther;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Residual-based fault detection and segmentation"};
  app.require_subcommand(1);
  Common common;
  std::string data_dir;
  std::string model;
  std::string checkpoint;
  std::string hi = "both";
  int realisation = 0;
  std::vector<std::string> reports;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic fleet with ground truth");
  add_common(synth, common);

  auto* train = app.add_subcommand("train", "Train an autoencoder or operating-condition model");
  add_common(train, common);
  train->add_option("--data", data_dir, "Directory with data.csv")->required();
  train->add_option("--model", model, "ae or oc")->required();
  train->add_option("--realisation", realisation, "Realisation index")->check(CLI::NonNegativeNumber);

  auto* det = app.add_subcommand("detect", "Detect faults with a trained model");
  add_common(det, common);
  det->add_option("--data", data_dir, "Directory with data.csv")->required();
  det->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  det->add_option("--hi", hi, "aggregated, sensorwise or both");

  auto* eval = app.add_subcommand("evaluate", "Average detection reports over realisations");
  add_common(eval, common);
  eval->add_option("--reports", reports, "Report CSV files")->required();

  auto* seg = app.add_subcommand("segment", "Fault segmentation from sensor-wise signatures");
  add_common(seg, common);
  seg->add_option("--data", data_dir, "Directory with data.csv")->required();
  seg->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  seg->add_option("--reports", reports, "Report CSV files supplying the alarm cycles");

  auto* run = app.add_subcommand("run", "Train, detect and segment for every realisation, then evaluate");
  add_common(run, common);
  run->add_option("--data", data_dir, "Directory with data.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*synth) return cmd_synth(common);
    if (*train) return cmd_train(common, data_dir, model, realisation);
    if (*det) return cmd_detect(common, data_dir, checkpoint, hi);
    if (*eval) return cmd_evaluate(common, reports);
    if (*seg) return cmd_segment(common, data_dir, checkpoint, reports);
    if (*run) return cmd_run(common, data_dir);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitOther;
  }
  return kExitOther;
}
