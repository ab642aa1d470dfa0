#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "myoeval/classify.hpp"
#include "myoeval/config.hpp"
#include "myoeval/dataset.hpp"
#include "myoeval/dsp.hpp"
#include "myoeval/error.hpp"
#include "myoeval/features.hpp"
#include "myoeval/metrics.hpp"
#include "myoeval/pipeline.hpp"
#include "myoeval/report.hpp"
#include "myoeval/stats.hpp"
#include "myoeval/stream.hpp"

namespace py = pybind11;
using namespace myoeval;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw ParameterError("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

std::vector<std::vector<double>> to_rows(const Array& a) {
  if (a.ndim() != 2) throw ParameterError("expected a 2-D array");
  std::vector<std::vector<double>> rows(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].assign(a.data(i, 0), a.data(i, 0) + cols);
  return rows;
}

Array from_rows(const std::vector<std::vector<double>>& rows, std::size_t cols) {
  Array out({rows.size(), cols});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  return out;
}

std::vector<MotionClass> to_classes(const std::vector<std::string>& names) {
  std::vector<MotionClass> out;
  for (const auto& n : names) out.push_back(class_from_name(n));
  return out;
}

std::vector<std::string> to_names(const DecisionStream& s) {
  std::vector<std::string> out;
  for (const auto& d : s.decisions) out.emplace_back(class_name(d.cls));
  return out;
}

DecisionStream stream_of(const std::vector<std::string>& names, std::size_t length, std::size_t increment,
                         double sample_rate) {
  DecisionStream s;
  s.spec = {length, increment};
  s.sample_rate = sample_rate;
  for (auto c : to_classes(names)) {
    Decision d;
    d.cls = c;
    d.confidence = 1.0;
    d.scores[ordinal(c)] = 1.0;
    s.decisions.push_back(d);
  }
  return s;
}

Recording recording_of(const Array& channels, double sample_rate) {
  Recording rec;
  rec.channels = to_rows(channels);
  rec.sample_rate = sample_rate;
  return rec;
}

py::object parse_json(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json dump_json(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::dict recording_dict(const Recording& rec) {
  py::dict d;
  Array channels({rec.channel_count(), rec.sample_count()});
  auto m = channels.mutable_unchecked<2>();
  for (std::size_t c = 0; c < rec.channel_count(); ++c)
    for (std::size_t i = 0; i < rec.sample_count(); ++i) m(c, i) = rec.channels[c][i];
  py::list timeline;
  for (const auto& e : rec.timeline.entries) timeline.append(py::make_tuple(e.start_s, std::string(class_name(e.cls))));
  d["channels"] = channels;
  d["sample_rate"] = rec.sample_rate;
  d["timeline"] = timeline;
  d["set_id"] = rec.set_id;
  return d;
}

// Trained classifier as seen from Python.
struct PyModel {
  ClassifierModel model;

  py::tuple predict(const Array& x) const {
    const auto rows = to_rows(x);
    std::vector<std::string> labels;
    Array conf(static_cast<py::ssize_t>(rows.size()));
    auto c = conf.mutable_unchecked<1>();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto d = myoeval::predict(model, rows[i]);
      labels.emplace_back(class_name(d.cls));
      c(i) = d.confidence;
    }
    return py::make_tuple(labels, conf);
  }

  std::vector<std::string> classes() const {
    std::vector<std::string> out;
    for (auto c : model.classes) out.emplace_back(class_name(c));
    return out;
  }
};

LabeledDataset labeled(const Array& x, const std::vector<std::string>& labels, const std::vector<int>& set_ids) {
  const auto rows = to_rows(x);
  if (rows.size() != labels.size()) throw ParameterError("features and labels differ in length");
  if (!set_ids.empty() && set_ids.size() != rows.size()) throw ParameterError("set_ids and labels differ in length");
  LabeledDataset d;
  const auto classes = to_classes(labels);
  for (std::size_t i = 0; i < rows.size(); ++i) d.samples.push_back({rows[i], classes[i], set_ids.empty() ? 0 : set_ids[i]});
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Continuous myoelectric classifier evaluation";

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<NotImplementedError>(m, "NotImplementedError", PyExc_NotImplementedError);
  py::register_exception<EvaluationError>(m, "EvaluationError", PyExc_RuntimeError);

  m.attr("CLASSES") = [] {
    std::vector<std::string> out;
    for (auto c : kAllClasses) out.emplace_back(class_name(c));
    return out;
  }();

  m.def("frame_count", [](std::size_t n, std::size_t length, std::size_t increment) {
    return frame_count(n, FrameSpec{length, increment});
  }, py::arg("samples"), py::arg("length") = 160, py::arg("increment") = 16);

  m.def("bandstop_filter", [](const Array& signal, double sample_rate, double center_hz, int order, double half_width_hz) {
    const auto y = bandstop_filter(to_vector(signal), sample_rate, center_hz, {order, half_width_hz});
    return Array(static_cast<py::ssize_t>(y.size()), y.data());
  }, py::arg("signal"), py::arg("sample_rate"), py::arg("center_hz"), py::arg("order") = 3,
     py::arg("half_width_hz") = 2.0);

  m.def("mav", [](const Array& f) { return mav(to_vector(f)); });
  m.def("wl", [](const Array& f) { return wl(to_vector(f)); });
  m.def("zc", [](const Array& f, double t) { return zc(to_vector(f), t); }, py::arg("frame"), py::arg("threshold") = 0.0);
  m.def("ssc", [](const Array& f, double t) { return ssc(to_vector(f), t); }, py::arg("frame"), py::arg("threshold") = 0.0);

  m.def("extract_features", [](const Array& channels, double sample_rate, std::size_t length, std::size_t increment,
                               double zc_threshold, double ssc_threshold) {
    const auto series = extract_features(recording_of(channels, sample_rate), {length, increment},
                                         {zc_threshold, ssc_threshold});
    std::vector<std::vector<double>> rows;
    for (const auto& f : series.frames) rows.push_back(f.values);
    return from_rows(rows, series.dimension());
  }, "Channels x samples in, frames x (4 * channels) out.", py::arg("channels"), py::arg("sample_rate") = 1000.0,
     py::arg("length") = 160, py::arg("increment") = 16, py::arg("zc_threshold") = 0.0, py::arg("ssc_threshold") = 0.0);

  py::class_<PyModel>(m, "Model")
      .def_property_readonly("kind", [](const PyModel& p) { return std::string(classifier_name(p.model.kind)); })
      .def_property_readonly("classes", &PyModel::classes)
      .def_property_readonly("dimension", [](const PyModel& p) { return p.model.dimension; })
      .def("predict", &PyModel::predict, "Labels and confidences for each row.")
      .def("discriminants", [](const PyModel& p, const Array& x) { return discriminants(p.model, to_vector(x)); });

  m.def("train", [](const std::string& kind, const Array& x, const std::vector<std::string>& labels,
                    double regularization, std::size_t k) {
    return PyModel{train(labeled(x, labels, {}), {parse_classifier_kind(kind), regularization, k})};
  }, py::arg("kind"), py::arg("features"), py::arg("labels"), py::arg("regularization") = kDefaultRegularization,
     py::arg("k") = kDefaultNeighbors);

  m.def("leave_one_set_out", [](const std::string& kind, const Array& x, const std::vector<std::string>& labels,
                                const std::vector<int>& set_ids) {
    const TrainerSpec spec{parse_classifier_kind(kind), kDefaultRegularization, kDefaultNeighbors};
    const auto cv = leave_one_set_out(labeled(x, labels, set_ids), [&](const LabeledDataset& d) { return train(d, spec); });
    std::vector<double> errors;
    for (const auto& f : cv.folds) errors.push_back(f.error);
    py::dict d;
    d["mean_error"] = cv.mean_error;
    d["fold_errors"] = errors;
    d["warnings"] = cv.warnings;
    return d;
  }, py::arg("kind"), py::arg("features"), py::arg("labels"), py::arg("set_ids"));

  m.def("majority_vote", [](const std::vector<std::string>& labels, std::size_t window) {
    return to_names(majority_vote(stream_of(labels, 160, 16, 1000.0), window));
  }, py::arg("labels"), py::arg("window") = kDefaultMajorityWindow);

  m.def("steady_metrics", [](const std::vector<std::string>& labels, const std::string& cls) {
    const auto s = stream_of(labels, 160, 16, 1000.0);
    const auto r = steady_metrics(s, {class_from_name(cls), 0, s.size(), 0});
    py::dict d;
    d["TER"] = r.ter;
    d["AER"] = r.aer;
    d["INS"] = r.ins;
    return d;
  }, py::arg("labels"), py::arg("cls"));

  m.def("transition_metrics", [](const std::vector<std::string>& labels, const std::string& from, const std::string& to) {
    const auto s = stream_of(labels, 160, 16, 1000.0);
    const auto f = class_from_name(from), t = class_from_name(to);
    const auto r = transition_metrics(s, {f, t, 0, s.size(), transition_group(f, t), 0, 1}, {});
    py::dict d;
    d["group"] = std::string(group_name(r.group));
    d["INS"] = r.ins;
    d["TCE"] = r.tce;
    d["PNM"] = r.pnm;
    return d;
  }, py::arg("labels"), py::arg("from_cls"), py::arg("to_cls"));

  m.def("segment", [](const std::vector<std::string>& smoothed, const std::vector<std::pair<double, std::string>>& timeline,
                      std::size_t mv_delay_frames, std::size_t length, std::size_t increment, double sample_rate) {
    PromptTimeline t;
    for (const auto& [start, cls] : timeline) t.entries.push_back({start, class_from_name(cls)});
    const auto lab = find_steady_states(stream_of(smoothed, length, increment, sample_rate), t, mv_delay_frames);
    const auto delays = compute_delays(lab, t);
    py::list steady, transitions;
    for (const auto& s : lab.steady)
      steady.append(py::make_tuple(std::string(class_name(s.cls)), s.start_frame, s.end_frame, s.prompt_index));
    for (std::size_t i = 0; i < lab.transitions.size(); ++i) {
      const auto& s = lab.transitions[i];
      py::dict d;
      d["from"] = std::string(class_name(s.from));
      d["to"] = std::string(class_name(s.to));
      d["start_frame"] = s.start_frame;
      d["end_frame"] = s.end_frame;
      d["group"] = std::string(group_name(s.group));
      d["T_OFFSET"] = delays[i].t_offset_ms;
      d["T_ONSET"] = delays[i].t_onset_ms;
      d["T_TRANSITION"] = delays[i].t_transition_ms;
      transitions.append(d);
    }
    py::dict d;
    d["steady"] = steady;
    d["transitions"] = transitions;
    d["discarded_prompts"] = lab.discarded_prompts;
    d["dropped_transitions"] = lab.dropped_transitions;
    return d;
  }, "Steady-state and transition spans of a smoothed label stream.", py::arg("smoothed"), py::arg("timeline"),
     py::arg("mv_delay_frames") = kDefaultMajorityDelay, py::arg("length") = 160, py::arg("increment") = 16,
     py::arg("sample_rate") = 1000.0);

  m.def("kruskal_wallis", [](const std::vector<std::vector<double>>& groups) {
    const auto r = kruskal_wallis(groups);
    py::dict d;
    d["h"] = r.h;
    d["df"] = r.df;
    d["p_value"] = r.p_value;
    d["p_chi_square"] = r.p_chi_square;
    d["p_exact"] = r.p_exact ? py::cast(*r.p_exact) : py::none();
    d["mean_ranks"] = r.mean_ranks;
    return d;
  });

  m.def("dunn_sidak", [](const std::vector<std::vector<double>>& groups, double alpha) {
    const auto r = dunn_sidak(groups, alpha);
    py::list out;
    for (const auto& p : r.pairs) {
      py::dict d;
      d["a"] = p.a;
      d["b"] = p.b;
      d["p"] = p.p;
      d["adjusted_p"] = p.adjusted_p;
      d["significant"] = p.significant;
      out.append(d);
    }
    return out;
  }, py::arg("groups"), py::arg("alpha") = kDefaultAlpha);

  m.def("sidak_adjust", &sidak_adjust, py::arg("p"), py::arg("m"));

  m.def("pearson", [](const std::vector<double>& x, const std::vector<double>& y) {
    const auto r = pearson(x, y);
    return py::make_tuple(r.r, r.p_value);
  });

  m.def("generate_subject", [](const py::object& config, int participant) {
    ExperimentConfig cfg = config.is_none() ? ExperimentConfig{} : parse_config(config.cast<std::string>());
    const auto s = synthesize_subject(cfg, participant);
    py::list training, tests;
    for (const auto& r : s.training) training.append(recording_dict(r));
    for (const auto& r : s.tests) tests.append(recording_dict(r));
    py::dict d;
    d["participant"] = s.participant;
    d["training"] = training;
    d["tests"] = tests;
    return d;
  }, "Synthetic recordings of one subject under a YAML config.", py::arg("config") = py::none(),
     py::arg("participant") = 1);

  m.def("run_experiment", [](const std::string& config_yaml) {
    ExperimentConfig cfg = parse_config(config_yaml);
    cfg.validate();
    ExperimentResult r;
    {
      py::gil_scoped_release release;
      r = run_experiment(cfg);
    }
    return parse_json(result_to_json(r));
  }, "Full experiment from YAML text; returns the report document.", py::arg("config_yaml") = "");

  m.def("render_report", [](const py::object& report) {
    const auto rendered = render_report(dump_json(report));
    py::dict files;
    for (const auto& [name, text] : rendered.files) files[py::str(name)] = text;
    return py::make_tuple(files, rendered.summary);
  });
}
