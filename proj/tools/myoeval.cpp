// myoeval command-line front end: generate, train, run, inspect, report.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "myoeval/classify.hpp"
#include "myoeval/config.hpp"
#include "myoeval/error.hpp"
#include "myoeval/pipeline.hpp"
#include "myoeval/report.hpp"

namespace fs = std::filesystem;
using namespace myoeval;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

// Usage errors raised after argument parsing (bad config, bad flag values).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::optional<fs::path> env_out_dir() {
  if (const char* v = std::getenv("MYOEVAL_OUT_DIR"); v && *v) return fs::path(v);
  return std::nullopt;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// ---------------------------------------------------------------------------

struct GenerateOpts {
  std::size_t subjects = 10;
  std::uint64_t seed = 1;
  std::string out;
  std::size_t channels = 8;
  int training_sets = 4;
  int test_sets = 3;
  double prompt_duration = 3.0;
  double rep_duration = 3.0;
  double sample_rate = 1000.0;
};

int cmd_generate(const GenerateOpts& o) {
  fs::path out;
  if (!o.out.empty()) {
    out = o.out;
  } else if (auto env = env_out_dir()) {
    out = *env / "data";
  } else {
    throw UsageError("generate needs --out (or MYOEVAL_OUT_DIR)");
  }
  ExperimentConfig cfg;
  cfg.subjects = o.subjects;
  cfg.seed = o.seed;
  cfg.channels = o.channels;
  cfg.training_sets = o.training_sets;
  cfg.test_sets = o.test_sets;
  cfg.prompt_duration_s = o.prompt_duration;
  cfg.rep_duration_s = o.rep_duration;
  cfg.sample_rate_hz = o.sample_rate;
  cfg.validate();
  std::vector<SubjectData> subjects;
  std::size_t files = 1;
  for (std::size_t p = 1; p <= o.subjects; ++p) {
    subjects.push_back(synthesize_subject(cfg, static_cast<int>(p)));
    files += subjects.back().training.size() + subjects.back().tests.size();
  }
  try {
    write_dataset(out, subjects, o.seed);
  } catch (const fs::filesystem_error& e) {
    throw FormatError(e.what());
  }
  std::cerr << "wrote " << o.subjects << " subjects (" << files << " files) to " << out.string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct RunOpts {
  std::string config;
  std::string out;
  std::string metric_mode;
  std::string classifiers;
  std::string data;
  std::optional<std::size_t> subjects;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
};

ExperimentConfig config_from(const std::string& path) {
  if (path.empty()) return {};
  try {
    return load_config(path);
  } catch (const FormatError& e) {
    throw UsageError(e.what());
  } catch (const ParameterError& e) {
    throw UsageError(e.what());
  }
}

int cmd_run(const RunOpts& o) {
  ExperimentConfig cfg = config_from(o.config);
  try {
    if (!o.metric_mode.empty()) cfg.metric_mode = parse_metric_mode(o.metric_mode);
    if (!o.classifiers.empty()) {
      cfg.classifiers.clear();
      for (const auto& name : split_list(o.classifiers)) cfg.classifiers.push_back(parse_classifier_kind(name));
    }
  } catch (const ParameterError& e) {
    throw UsageError(e.what());
  }
  if (o.subjects) cfg.subjects = *o.subjects;
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (!o.data.empty()) cfg.data_dir = o.data;
  if (!o.out.empty()) {
    cfg.output_dir = o.out;
  } else if (auto env = env_out_dir()) {
    cfg.output_dir = *env;
  }
  try {
    cfg.validate();
  } catch (const ParameterError& e) {
    throw UsageError(e.what());
  }
  const auto result = run_experiment(cfg);
  const auto rendered = render_report(result_to_json(result));
  write_files(cfg.output_dir, rendered.files);
  std::cout << rendered.summary;
  std::cerr << "report written to " << cfg.output_dir.string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct TrainOpts {
  std::string config;
  std::string classifier = "LDA";
  std::string data;
  int subject = 1;
  std::optional<std::uint64_t> seed;
  std::string model;
};

int cmd_train(const TrainOpts& o) {
  ExperimentConfig cfg = config_from(o.config);
  if (o.seed) cfg.seed = *o.seed;
  ClassifierKind kind;
  try {
    kind = parse_classifier_kind(o.classifier);
  } catch (const ParameterError& e) {
    throw UsageError(e.what());
  }
  if (!is_implemented(kind)) throw NotImplementedError("classifier " + o.classifier + " is not implemented");
  if (o.subject < 1) throw UsageError("--subject is 1-based");
  SubjectData subject;
  if (!o.data.empty()) {
    auto all = load_dataset(o.data);
    auto it = std::find_if(all.begin(), all.end(), [&](const SubjectData& s) { return s.participant == o.subject; });
    if (it == all.end()) throw FormatError("dataset has no participant " + std::to_string(o.subject));
    subject = std::move(*it);
  } else {
    subject = synthesize_subject(cfg, o.subject);
  }
  const auto model = train(build_training_dataset(subject.training, cfg), cfg.trainer(kind));
  std::ostringstream text;
  save_model(model, text);
  write_files(fs::path(o.model).parent_path().empty() ? fs::path(".") : fs::path(o.model).parent_path(),
              {{fs::path(o.model).filename().string(), text.str()}});
  std::cerr << "trained " << o.classifier << " for participant " << o.subject << " -> " << o.model << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct InspectOpts {
  std::string config;
  std::string recording;
  std::string model;
  std::vector<double> slice;
  std::optional<std::size_t> transition;
  std::size_t margin = 25;
  std::string out;
};

int cmd_inspect(const InspectOpts& o) {
  ExperimentConfig cfg = config_from(o.config);
  if (!fs::exists(o.recording)) throw FormatError("no such recording: " + o.recording);
  if (!fs::exists(o.model)) throw FormatError("no such model: " + o.model);
  const auto rec = read_recording(fs::path(o.recording));
  const auto model = load_model(fs::path(o.model));
  TestEvaluation ev;
  try {
    ev = evaluate_test_set(model, rec, cfg);
  } catch (const ParameterError& e) {
    throw FormatError(e.what());
  }
  std::size_t first = 0, last = ev.raw.size();
  if (!o.slice.empty()) {
    if (o.slice.size() != 2) throw UsageError("--slice takes BEGIN END in seconds");
    try {
      std::tie(first, last) = frames_in_slice(ev.raw, o.slice[0], o.slice[1]);
    } catch (const ParameterError& e) {
      throw UsageError(e.what());
    }
  }
  if (o.transition) {
    const auto& spans = ev.labeling.transitions;
    if (*o.transition >= spans.size()) {
      throw UsageError("--transition " + std::to_string(*o.transition) + " out of range (recording has " +
                       std::to_string(spans.size()) + ")");
    }
    const auto& t = spans[*o.transition];
    first = std::max(first, t.start_frame >= o.margin ? t.start_frame - o.margin : 0);
    last = std::min(last, t.end_frame + o.margin);
    if (last < first) last = first;
  }
  const auto csv = frame_trace_csv(ev.raw, ev.smoothed, ev.labeling, rec.timeline, first, last);
  if (o.out.empty()) {
    std::cout << csv;
  } else {
    const fs::path p(o.out);
    write_files(p.parent_path().empty() ? fs::path(".") : p.parent_path(), {{p.filename().string(), csv}});
  }
  std::cerr << "frames " << first << ".." << last << " of " << ev.raw.size() << "; " << ev.labeling.steady.size()
            << " steady spans, " << ev.labeling.transitions.size() << " transitions\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct ReportOpts {
  std::string input;
  std::string out;
};

int cmd_report(const ReportOpts& o) {
  if (!fs::exists(o.input)) throw FormatError("no such report: " + o.input);
  const auto rendered = render_report(load_report(o.input));
  fs::path out;
  if (!o.out.empty()) {
    out = o.out;
  } else {
    out = fs::path(o.input).parent_path();
    if (out.empty()) out = ".";
  }
  write_files(out, rendered.files);
  std::cout << rendered.summary;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evaluation toolkit for myoelectric pattern recognition: steady-state and transition metrics"};
  app.require_subcommand(1);

  GenerateOpts gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic dataset (recordings + manifest.json)");
  g->add_option("--subjects", gen.subjects, "Number of subjects")->capture_default_str();
  g->add_option("--seed", gen.seed, "Base random seed")->capture_default_str();
  g->add_option("--out", gen.out, "Output directory (default: $MYOEVAL_OUT_DIR/data)");
  g->add_option("--channels", gen.channels, "Electrode channels")->capture_default_str();
  g->add_option("--training-sets", gen.training_sets, "Training repetition sets")->capture_default_str();
  g->add_option("--test-sets", gen.test_sets, "Continuous test trials")->capture_default_str();
  g->add_option("--prompt-duration", gen.prompt_duration, "Seconds per test prompt")->capture_default_str();
  g->add_option("--rep-duration", gen.rep_duration, "Seconds per training repetition")->capture_default_str();
  g->add_option("--sample-rate", gen.sample_rate, "Sampling rate in Hz")->capture_default_str();

  TrainOpts tr;
  auto* t = app.add_subcommand("train", "Train one classifier on one subject and save the model");
  t->add_option("--config", tr.config, "YAML config (feature and classifier settings)");
  t->add_option("--classifier", tr.classifier, "LDA, QDA or KNN")->capture_default_str();
  t->add_option("--data", tr.data, "Dataset directory (default: synthesize)");
  t->add_option("--subject", tr.subject, "Participant number (1-based)")->capture_default_str();
  t->add_option("--seed", tr.seed, "Base seed for synthesis");
  t->add_option("--model", tr.model, "Output model file")->required();

  RunOpts run;
  auto* r = app.add_subcommand("run", "Run the full experiment and write report.json plus CSV tables");
  r->add_option("--config", run.config, "YAML config file (every key optional)");
  r->add_option("--out", run.out, "Report directory (default: $MYOEVAL_OUT_DIR, then the config)");
  r->add_option("--metric-mode", run.metric_mode, "raw or smoothed");
  r->add_option("--classifiers", run.classifiers, "Comma-separated list, e.g. LDA,QDA,KNN");
  r->add_option("--data", run.data, "Dataset directory written by generate");
  r->add_option("--subjects", run.subjects, "Number of synthetic subjects");
  r->add_option("--seed", run.seed, "Base random seed");
  r->add_option("--threads", run.threads, "Worker threads (0: all cores)");

  InspectOpts ins;
  auto* i = app.add_subcommand("inspect", "Per-frame decision trace of one recording as CSV");
  i->add_option("--config", ins.config, "YAML config (filter, frame and stream settings)");
  i->add_option("--recording", ins.recording, "Recording file")->required();
  i->add_option("--model", ins.model, "Model file written by train")->required();
  i->add_option("--slice", ins.slice, "BEGIN END in seconds")->expected(2);
  i->add_option("--transition", ins.transition, "Only this transition span (0-based) plus margin");
  i->add_option("--margin", ins.margin, "Context frames around --transition")->capture_default_str();
  i->add_option("--out", ins.out, "Output CSV (default: stdout)");

  ReportOpts rep;
  auto* p = app.add_subcommand("report", "Re-render tables and CSVs from a saved report.json");
  p->add_option("--input", rep.input, "report.json")->required();
  p->add_option("--out", rep.out, "Output directory (default: next to the input)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*g) return cmd_generate(gen);
    if (*t) return cmd_train(tr);
    if (*r) return cmd_run(run);
    if (*i) return cmd_inspect(ins);
    if (*p) return cmd_report(rep);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NotImplementedError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const FormatError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const EvaluationError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
