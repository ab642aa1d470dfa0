#include "myoeval/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "myoeval/error.hpp"
#include "myoeval/features.hpp"
#include "text_util.hpp"

namespace myoeval {

namespace {

// Re-raises the same exception type with the failing stage prepended.
template <typename F>
auto staged(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const NumericalError& e) {
    throw NumericalError(stage + ": " + e.what());
  } catch (const NotImplementedError& e) {
    throw NotImplementedError(stage + ": " + e.what());
  } catch (const ParameterError& e) {
    throw ParameterError(stage + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(stage + ": " + e.what());
  } catch (const EvaluationError& e) {
    throw EvaluationError(stage + ": " + e.what());
  }
}

std::string participant_tag(int p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "participant %d", p);
  return buf;
}

}  // namespace

std::uint64_t subject_seed(std::uint64_t base_seed, int participant) {
  // splitmix64 finalizer over (seed, participant)
  std::uint64_t z = base_seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(participant + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SubjectData synthesize_subject(const ExperimentConfig& cfg, int participant) {
  auto profile = SyntheticSubjectProfile::make_default(subject_seed(cfg.seed, participant), cfg.channels);
  profile.sample_rate_hz = cfg.sample_rate_hz;
  SubjectData s;
  s.participant = participant;
  s.training = generate_training_set(profile, cfg.training_sets, cfg.rep_duration_s);
  for (int t = 0; t < cfg.test_sets; ++t) s.tests.push_back(generate_continuous_test(profile, cfg.prompt_duration_s, t));
  return s;
}

LabeledDataset build_training_dataset(const std::vector<Recording>& training, const ExperimentConfig& cfg) {
  LabeledDataset data;
  for (const auto& rec : training) {
    if (rec.timeline.entries.empty()) throw ParameterError("training recording has no prompt");
    const auto filtered = apply_notch_bank(rec, cfg.notch_centers_hz, cfg.notch);
    data.append(extract_features(filtered, cfg.frames, cfg.thresholds), rec.timeline.entries.front().cls, rec.set_id);
  }
  return data;
}

std::uint64_t recording_hash(const Recording& rec) {
  auto bytes = [](const auto& v) {
    return std::string_view(reinterpret_cast<const char*>(&v), sizeof v);
  };
  std::uint64_t h = fnv1a(bytes(rec.sample_rate));
  h = fnv1a(bytes(rec.set_id), h);
  for (const auto& e : rec.timeline.entries) {
    h = fnv1a(bytes(e.start_s), h);
    h = fnv1a(bytes(e.cls), h);
  }
  for (const auto& ch : rec.channels) {
    h = fnv1a(std::string_view(reinterpret_cast<const char*>(ch.data()), ch.size() * sizeof(double)), h);
  }
  return h;
}

TestEvaluation evaluate_test_set(const ClassifierModel& model, const Recording& recording,
                                 const ExperimentConfig& cfg) {
  recording.validate();
  if (recording.channel_count() * kFeaturesPerChannel != model.dimension) {
    throw ParameterError("model expects " + std::to_string(model.dimension / kFeaturesPerChannel) +
                         " channels, recording has " + std::to_string(recording.channel_count()));
  }
  if (recording.sample_count() < cfg.frames.length) {
    throw EvaluationError("recording is shorter than one frame");
  }
  TestEvaluation ev;
  ev.input_hash = recording_hash(recording);
  const auto filtered = apply_notch_bank(recording, cfg.notch_centers_hz, cfg.notch);
  const auto series = extract_features(filtered, cfg.frames, cfg.thresholds);
  ev.raw = predict_stream(model, series);
  ev.smoothed = majority_vote(ev.raw, cfg.majority_window);
  ev.labeling = find_steady_states(ev.smoothed, recording.timeline, cfg.mv_delay_frames);
  if (ev.labeling.steady.empty()) throw EvaluationError("every prompt was discarded");
  const auto delays = compute_delays(ev.labeling, recording.timeline);
  const DecisionStream& measured = cfg.metric_mode == MetricMode::raw ? ev.raw : ev.smoothed;
  for (const auto& s : ev.labeling.steady) ev.steady.push_back(steady_metrics(measured, s));
  for (std::size_t i = 0; i < ev.labeling.transitions.size(); ++i) {
    ev.transitions.push_back(transition_metrics(measured, ev.labeling.transitions[i], delays[i]));
  }
  return ev;
}

namespace {

struct SubjectOutcome {
  std::vector<OfflineRecord> offline;
  std::vector<SteadyRecord> steady;
  std::vector<TransitionRecord> transitions;
  std::vector<EvaluationRecord> evaluations;
  double prompt_seconds = 0.0;
  double recorded_seconds = 0.0;
};

SubjectOutcome process_subject(const ExperimentConfig& cfg, const SubjectData& data) {
  SubjectOutcome out;
  const std::string who = participant_tag(data.participant);
  const auto dataset = staged(who + ", training features", [&] { return build_training_dataset(data.training, cfg); });
  for (const auto& test : data.tests) {
    out.prompt_seconds += static_cast<double>(test.timeline.size() - 1) * test.timeline.prompt_duration_s;
    out.recorded_seconds += test.duration_s();
  }
  for (ClassifierKind kind : cfg.classifiers) {
    const std::string name(classifier_name(kind));
    const auto spec = cfg.trainer(kind);
    const std::string stage = who + ", classifier " + name;
    const auto cv = staged(stage + ", offline cross-validation", [&] {
      return leave_one_set_out(dataset, [&](const LabeledDataset& d) { return train(d, spec); });
    });
    OfflineRecord off;
    off.classifier = name;
    off.participant = data.participant;
    for (const auto& f : cv.folds) off.fold_errors.push_back(100.0 * f.error);
    off.ter = 100.0 * cv.mean_error;
    off.warnings = cv.warnings;
    out.offline.push_back(std::move(off));

    const auto model = staged(stage + ", training", [&] { return train(dataset, spec); });
    for (const auto& test : data.tests) {
      EvaluationRecord er;
      er.classifier = name;
      er.participant = data.participant;
      er.trial = test.set_id;
      er.prompts = test.timeline.size();
      er.input_hash = recording_hash(test);
      try {
        const auto ev = staged(stage + ", trial " + std::to_string(test.set_id),
                               [&] { return evaluate_test_set(model, test, cfg); });
        er.input_hash = ev.input_hash;
        er.steady_spans = ev.labeling.steady.size();
        er.transitions = ev.labeling.transitions.size();
        er.dropped_transitions = ev.labeling.dropped_transitions;
        er.discarded_prompts = ev.labeling.discarded_prompts;
        for (const auto& m : ev.steady) out.steady.push_back({name, data.participant, test.set_id, m});
        for (const auto& m : ev.transitions) out.transitions.push_back({name, data.participant, test.set_id, m});
      } catch (const EvaluationError& e) {
        er.ok = false;
        er.error = e.what();
      }
      out.evaluations.push_back(std::move(er));
    }
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  result.config = cfg;
  result.config_hash = hex64(fnv1a(config_to_json(cfg).dump()));
  for (auto k : cfg.classifiers) result.classifiers.emplace_back(classifier_name(k));

  std::vector<SubjectData> loaded;
  std::size_t subject_count = cfg.subjects;
  if (cfg.data_dir) {
    loaded = staged("loading dataset", [&] { return load_dataset(*cfg.data_dir); });
    subject_count = loaded.size();
  } else {
    for (std::size_t i = 0; i < subject_count; ++i) {
      result.subject_seeds.push_back(subject_seed(cfg.seed, static_cast<int>(i + 1)));
    }
  }

  std::vector<SubjectOutcome> outcomes(subject_count);
  std::vector<std::exception_ptr> errors(subject_count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < subject_count; i = next++) {
      try {
        if (cfg.data_dir) {
          outcomes[i] = process_subject(cfg, loaded[i]);
        } else {
          const auto data = staged(participant_tag(static_cast<int>(i + 1)) + ", synthesis",
                                   [&] { return synthesize_subject(cfg, static_cast<int>(i + 1)); });
          outcomes[i] = process_subject(cfg, data);
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::size_t threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, subject_count);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<SteadyRecord> steady;
  std::vector<TransitionRecord> transitions;
  for (auto& o : outcomes) {
    result.offline.insert(result.offline.end(), o.offline.begin(), o.offline.end());
    steady.insert(steady.end(), o.steady.begin(), o.steady.end());
    transitions.insert(transitions.end(), o.transitions.begin(), o.transitions.end());
    result.evaluations.insert(result.evaluations.end(), o.evaluations.begin(), o.evaluations.end());
    result.test_prompt_seconds += o.prompt_seconds;
    result.test_recorded_seconds += o.recorded_seconds;
  }
  if (steady.empty()) throw EvaluationError("no test recording could be evaluated");
  result.aggregate = group_and_aggregate(transitions, steady, result.classifiers);

  result.offline_table.name = "offline";
  result.offline_table.columns = {"TER"};
  for (const auto& c : result.classifiers) {
    std::vector<double> v;
    for (const auto& o : result.offline) {
      if (o.classifier == c) v.push_back(o.ter);
    }
    result.offline_table.rows.push_back(c);
    result.offline_table.cells.push_back({summarize(v)});
  }
  result.statistics = compute_statistics(result.aggregate, result.offline, cfg.alpha);
  return result;
}

// ---------------------------------------------------------------------------

namespace {

std::optional<MetricComparison> compare(std::string table, std::string metric, std::string scope,
                                        std::vector<std::string> labels, const std::vector<std::vector<double>>& groups,
                                        double alpha) {
  std::vector<std::vector<double>> kept;
  std::vector<std::string> kept_labels;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (!groups[i].empty()) {
      kept.push_back(groups[i]);
      kept_labels.push_back(labels[i]);
    }
  }
  if (kept.size() < 2) return std::nullopt;
  MetricComparison c;
  c.table = std::move(table);
  c.metric = std::move(metric);
  c.scope = std::move(scope);
  c.labels = std::move(kept_labels);
  c.kruskal = kruskal_wallis(kept);
  if (c.kruskal.p_value < alpha) c.posthoc = dunn_sidak(kept, alpha);
  return c;
}

CorrelationEntry correlate(std::string table, std::string metric, const std::vector<double>& x,
                           const std::vector<double>& y, double alpha) {
  CorrelationEntry e;
  e.table = std::move(table);
  e.metric = std::move(metric);
  try {
    e.result = pearson(x, y);
    e.significant = e.result->p_value < alpha;
  } catch (const ParameterError& err) {
    e.note = err.what();
  } catch (const NumericalError& err) {
    e.note = err.what();
  }
  return e;
}

}  // namespace

StatisticsBlock compute_statistics(const AggregateReport& agg, const std::vector<OfflineRecord>& offline,
                                   double alpha) {
  StatisticsBlock s;
  s.alpha = alpha;
  const auto& cls = agg.classifiers;
  auto push = [&](std::vector<MetricComparison>& into, std::optional<MetricComparison> c) {
    if (c) into.push_back(std::move(*c));
  };

  {
    std::vector<std::vector<double>> groups;
    for (const auto& c : cls) {
      std::vector<double> v;
      for (const auto& o : offline) {
        if (o.classifier == c) v.push_back(o.ter);
      }
      groups.push_back(v);
    }
    push(s.classifier_comparisons, compare("offline", "TER", "all", cls, groups, alpha));
  }
  for (std::size_t m = 0; m < kSteadyMetricNames.size(); ++m) {
    std::vector<std::vector<double>> groups;
    for (const auto& c : cls) groups.push_back(agg.steady_values(c, m));
    push(s.classifier_comparisons, compare("steady", std::string(kSteadyMetricNames[m]), "all", cls, groups, alpha));
  }
  for (TransitionGroup g : kAllGroups) {
    for (std::size_t m = 0; m < kTransitionMetricNames.size(); ++m) {
      std::vector<std::vector<double>> groups;
      for (const auto& c : cls) groups.push_back(agg.transition_values(c, g, m));
      push(s.classifier_comparisons, compare(std::string(group_name(g)), std::string(kTransitionMetricNames[m]),
                                             "all", cls, groups, alpha));
    }
  }

  const std::vector<std::string> group_labels = {"R2A", "A2R", "A2A"};
  for (std::size_t m = 0; m < kTransitionMetricNames.size(); ++m) {
    std::vector<std::vector<double>> pooled(3);
    for (const auto& c : cls) {
      std::vector<std::vector<double>> per(3);
      for (TransitionGroup g : kAllGroups) {
        per[static_cast<std::size_t>(g)] = agg.transition_values(c, g, m);
        auto& dst = pooled[static_cast<std::size_t>(g)];
        dst.insert(dst.end(), per[static_cast<std::size_t>(g)].begin(), per[static_cast<std::size_t>(g)].end());
      }
      push(s.group_comparisons, compare("groups", std::string(kTransitionMetricNames[m]), c, group_labels, per, alpha));
    }
    push(s.group_comparisons, compare("groups", std::string(kTransitionMetricNames[m]), "all", group_labels, pooled, alpha));
  }

  // Offline TER against each test metric over (classifier, participant) pairs.
  auto pairs = [&](std::optional<TransitionGroup> g, std::size_t m, std::vector<double>& x, std::vector<double>& y) {
    for (const auto& c : cls) {
      const auto means = agg.participant_means(c, g, m);
      for (std::size_t i = 0; i < agg.participants.size(); ++i) {
        if (!means[i]) continue;
        for (const auto& o : offline) {
          if (o.classifier == c && o.participant == agg.participants[i]) {
            x.push_back(o.ter);
            y.push_back(*means[i]);
          }
        }
      }
    }
  };
  for (std::size_t m = 0; m < kSteadyMetricNames.size(); ++m) {
    std::vector<double> x, y;
    pairs(std::nullopt, m, x, y);
    s.correlations.push_back(correlate("steady", std::string(kSteadyMetricNames[m]), x, y, alpha));
  }
  for (TransitionGroup g : kAllGroups) {
    for (std::size_t m = 0; m < kTransitionMetricNames.size(); ++m) {
      std::vector<double> x, y;
      pairs(g, m, x, y);
      s.correlations.push_back(correlate(std::string(group_name(g)), std::string(kTransitionMetricNames[m]), x, y, alpha));
    }
  }
  return s;
}

// ---------------------------------------------------------------------------

void write_dataset(const std::filesystem::path& dir, const std::vector<SubjectData>& subjects, std::uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = "myoeval-dataset";
  manifest["version"] = 1;
  manifest["seed"] = seed;
  manifest["subjects"] = nlohmann::json::array();
  for (const auto& s : subjects) {
    char folder[32];
    std::snprintf(folder, sizeof folder, "subject%02d", s.participant);
    fs::create_directories(dir / folder);
    nlohmann::json entry;
    entry["participant"] = s.participant;
    entry["training"] = nlohmann::json::array();
    entry["tests"] = nlohmann::json::array();
    for (const auto& r : s.training) {
      const auto cls = r.timeline.entries.at(0).cls;
      const std::string file = std::string(folder) + "/train_set" + std::to_string(r.set_id + 1) + "_" +
                               std::string(class_name(cls)) + ".csv";
      write_recording(r, dir / file);
      entry["training"].push_back({{"file", file}, {"set", r.set_id}, {"class", class_name(cls)}});
    }
    for (const auto& r : s.tests) {
      const std::string file = std::string(folder) + "/test_trial" + std::to_string(r.set_id + 1) + ".csv";
      write_recording(r, dir / file);
      entry["tests"].push_back({{"file", file}, {"trial", r.set_id}});
    }
    manifest["subjects"].push_back(entry);
  }
  write_file_atomically(dir / "manifest.json", [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });
}

std::vector<SubjectData> load_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw FormatError("cannot open " + (dir / "manifest.json").string());
  nlohmann::json manifest;
  try {
    in >> manifest;
    if (manifest.at("format") != "myoeval-dataset" || manifest.at("version") != 1) {
      throw FormatError("manifest is not a version 1 myoeval dataset");
    }
    std::vector<SubjectData> out;
    for (const auto& s : manifest.at("subjects")) {
      SubjectData d;
      d.participant = s.at("participant").get<int>();
      for (const auto& t : s.at("training")) {
        auto rec = read_recording(dir / t.at("file").get<std::string>());
        if (rec.kind != RecordingKind::training_repetition || rec.timeline.entries.size() != 1) {
          throw FormatError(t.at("file").get<std::string>() + ": not a training repetition");
        }
        d.training.push_back(std::move(rec));
      }
      for (const auto& t : s.at("tests")) {
        auto rec = read_recording(dir / t.at("file").get<std::string>());
        if (rec.kind != RecordingKind::continuous_test) {
          throw FormatError(t.at("file").get<std::string>() + ": not a continuous test");
        }
        d.tests.push_back(std::move(rec));
      }
      out.push_back(std::move(d));
    }
    if (out.empty()) throw FormatError("manifest lists no subjects");
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
}

}  // namespace myoeval
