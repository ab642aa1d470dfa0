#include "myoeval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "myoeval/error.hpp"

namespace myoeval {

namespace {

std::vector<MotionClass> classes_in(const DecisionStream& stream, std::size_t begin, std::size_t end) {
  if (end > stream.size() || begin > end) throw ParameterError("span lies outside the decision stream");
  std::vector<MotionClass> out;
  out.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) out.push_back(stream.cls(i));
  return out;
}

double percent(std::size_t count, std::size_t total) {
  return 100.0 * static_cast<double>(count) / static_cast<double>(total);
}

}  // namespace

double instability_percent(std::span<const MotionClass> d) {
  if (d.empty()) return 0.0;
  std::size_t changes = 0;
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (is_active(d[i - 1]) && is_active(d[i]) && d[i - 1] != d[i]) ++changes;
  }
  return percent(changes, d.size());
}

SteadyStateMetrics steady_metrics(const DecisionStream& stream, const SteadyStateSpan& span) {
  if (span.start_frame >= span.end_frame) throw ParameterError("steady-state span is empty");
  const auto d = classes_in(stream, span.start_frame, span.end_frame);
  std::size_t wrong = 0, wrong_active = 0;
  for (MotionClass c : d) {
    if (c != span.cls) {
      ++wrong;
      if (is_active(c)) ++wrong_active;
    }
  }
  SteadyStateMetrics m;
  m.ter = percent(wrong, d.size());
  m.aer = percent(wrong_active, d.size());
  m.ins = instability_percent(d);
  m.decision_count = d.size();
  m.cls = span.cls;
  m.prompt_index = span.prompt_index;
  return m;
}

TransitionMetrics transition_metrics(const DecisionStream& stream, const TransitionSpan& span,
                                     const TransitionDelays& delays) {
  TransitionMetrics m;
  m.t_offset = delays.t_offset_ms;
  m.t_onset = delays.t_onset_ms;
  m.t_transition = delays.t_transition_ms;
  m.group = span.group;
  m.from = span.from;
  m.to = span.to;
  const auto d = classes_in(stream, span.start_frame, span.end_frame);
  m.decision_count = d.size();
  if (d.empty()) return m;
  std::size_t tertiary = 0, rest = 0;
  for (MotionClass c : d) {
    if (is_rest(c)) {
      ++rest;
    } else if (c != span.from && c != span.to) {
      ++tertiary;
    }
  }
  m.ins = instability_percent(d);
  m.tce = percent(tertiary, d.size());
  m.pnm = percent(rest, d.size());
  return m;
}

// ---------------------------------------------------------------------------

std::optional<Summary> summarize(std::span<const double> values) {
  if (values.empty()) return std::nullopt;
  Summary s;
  s.n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

namespace {

std::vector<double> transition_fields(const TransitionMetrics& m) {
  return {m.t_offset, m.t_onset, m.t_transition, m.ins, m.tce, m.pnm};
}

std::vector<double> steady_fields(const SteadyStateMetrics& m) { return {m.aer, m.ter, m.ins}; }

// Metrics that only exist for nonempty spans.
bool needs_decisions(std::size_t metric) { return metric >= 3; }

std::size_t group_slot(TransitionGroup g) { return static_cast<std::size_t>(g); }

struct Accumulator {
  std::vector<double> sum;
  std::vector<std::size_t> count;
  explicit Accumulator(std::size_t n) : sum(n, 0.0), count(n, 0) {}
  void add(std::size_t i, double v) {
    sum[i] += v;
    ++count[i];
  }
  std::vector<std::optional<double>> means() const {
    std::vector<std::optional<double>> out(sum.size());
    for (std::size_t i = 0; i < sum.size(); ++i) {
      if (count[i]) out[i] = sum[i] / static_cast<double>(count[i]);
    }
    return out;
  }
};

std::vector<std::optional<Summary>> summarize_units(const std::vector<const Unit*>& units, std::size_t metrics) {
  std::vector<std::optional<Summary>> cells(metrics);
  for (std::size_t m = 0; m < metrics; ++m) {
    std::vector<double> v;
    for (const Unit* u : units) {
      if (u->values[m]) v.push_back(*u->values[m]);
    }
    cells[m] = summarize(v);
  }
  return cells;
}

}  // namespace

std::vector<double> AggregateReport::steady_values(std::string_view classifier, std::size_t metric) const {
  std::vector<double> out;
  for (const auto& u : steady_units) {
    if (u.classifier == classifier && u.values.at(metric)) out.push_back(*u.values[metric]);
  }
  return out;
}

std::vector<double> AggregateReport::transition_values(std::string_view classifier, TransitionGroup group,
                                                       std::size_t metric) const {
  std::vector<double> out;
  for (const auto& u : transition_units) {
    if (u.classifier == classifier && u.group == group && u.values.at(metric)) out.push_back(*u.values[metric]);
  }
  return out;
}

std::vector<std::optional<double>> AggregateReport::participant_means(std::string_view classifier,
                                                                      std::optional<TransitionGroup> group,
                                                                      std::size_t metric) const {
  const auto& units = group ? transition_units : steady_units;
  std::vector<std::optional<double>> out;
  for (int p : participants) {
    std::vector<double> v;
    for (const auto& u : units) {
      if (u.classifier == classifier && u.participant == p && u.group == group && u.values.at(metric)) {
        v.push_back(*u.values[metric]);
      }
    }
    const auto s = summarize(v);
    out.push_back(s ? std::optional<double>(s->mean) : std::nullopt);
  }
  return out;
}

AggregateReport group_and_aggregate(std::span<const TransitionRecord> transitions,
                                    std::span<const SteadyRecord> steady,
                                    std::span<const std::string> classifier_order) {
  if (transitions.empty() && steady.empty()) throw ParameterError("nothing to aggregate");
  AggregateReport r;
  r.classifiers.assign(classifier_order.begin(), classifier_order.end());
  auto note_classifier = [&](const std::string& c) {
    if (std::find(r.classifiers.begin(), r.classifiers.end(), c) == r.classifiers.end()) r.classifiers.push_back(c);
  };
  auto classifier_rank = [&](const std::string& c) {
    return static_cast<std::size_t>(std::find(r.classifiers.begin(), r.classifiers.end(), c) - r.classifiers.begin());
  };
  std::vector<int> participants;
  for (const auto& t : transitions) {
    note_classifier(t.classifier);
    participants.push_back(t.participant);
  }
  for (const auto& s : steady) {
    note_classifier(s.classifier);
    participants.push_back(s.participant);
  }
  std::sort(participants.begin(), participants.end());
  participants.erase(std::unique(participants.begin(), participants.end()), participants.end());
  r.participants = participants;

  // Average over trials; keys sort by (classifier rank, participant, from, to).
  using Key = std::tuple<std::size_t, int, std::size_t, std::size_t>;
  std::map<Key, Accumulator> steady_acc, trans_acc;
  for (const auto& s : steady) {
    const Key k{classifier_rank(s.classifier), s.participant, ordinal(s.metrics.cls), 0};
    auto [it, _] = steady_acc.try_emplace(k, kSteadyMetricNames.size());
    const auto f = steady_fields(s.metrics);
    for (std::size_t m = 0; m < f.size(); ++m) it->second.add(m, f[m]);
    ++r.steady_span_count;
  }
  for (const auto& t : transitions) {
    if (std::abs(t.metrics.t_transition - (t.metrics.t_onset - t.metrics.t_offset)) > 0.0) {
      throw ParameterError("transition record violates t_transition = t_onset - t_offset");
    }
    const Key k{classifier_rank(t.classifier), t.participant, ordinal(t.metrics.from), ordinal(t.metrics.to)};
    auto [it, _] = trans_acc.try_emplace(k, kTransitionMetricNames.size());
    const auto f = transition_fields(t.metrics);
    for (std::size_t m = 0; m < f.size(); ++m) {
      if (needs_decisions(m) && t.metrics.decision_count == 0) continue;
      it->second.add(m, f[m]);
    }
    ++r.transition_span_count;
    ++r.transition_spans_per_group[group_slot(t.metrics.group)];
  }
  for (const auto& [k, acc] : steady_acc) {
    Unit u;
    u.classifier = r.classifiers[std::get<0>(k)];
    u.participant = std::get<1>(k);
    u.from = u.to = kAllClasses[std::get<2>(k)];
    u.values = acc.means();
    r.steady_units.push_back(std::move(u));
  }
  for (const auto& [k, acc] : trans_acc) {
    Unit u;
    u.classifier = r.classifiers[std::get<0>(k)];
    u.participant = std::get<1>(k);
    u.from = kAllClasses[std::get<2>(k)];
    u.to = kAllClasses[std::get<3>(k)];
    u.group = transition_group(u.from, u.to);
    u.values = acc.means();
    r.transition_units.push_back(std::move(u));
  }

  auto make_table = [&](std::string name, std::span<const std::string_view> columns,
                        std::optional<TransitionGroup> group) {
    MetricTable t;
    t.name = std::move(name);
    t.columns.assign(columns.begin(), columns.end());
    const auto& units = group ? r.transition_units : r.steady_units;
    for (const auto& c : r.classifiers) {
      std::vector<const Unit*> sel;
      for (const auto& u : units) {
        if (u.classifier == c && u.group == group) sel.push_back(&u);
      }
      t.rows.push_back(c);
      t.cells.push_back(summarize_units(sel, columns.size()));
    }
    return t;
  };
  r.steady = make_table("steady", kSteadyMetricNames, std::nullopt);
  for (TransitionGroup g : kAllGroups) {
    r.transitions[group_slot(g)] = make_table(std::string(group_name(g)), kTransitionMetricNames, g);
  }

  for (const auto& c : r.classifiers) {
    for (int p : r.participants) {
      auto add_row = [&](const std::string& table, const std::vector<Unit>& units,
                         std::optional<TransitionGroup> group, std::size_t metrics) {
        std::vector<const Unit*> sel;
        for (const auto& u : units) {
          if (u.classifier == c && u.participant == p && u.group == group) sel.push_back(&u);
        }
        if (sel.empty()) return;
        r.per_participant.push_back({c, p, table, summarize_units(sel, metrics)});
      };
      add_row("steady", r.steady_units, std::nullopt, kSteadyMetricNames.size());
      for (TransitionGroup g : kAllGroups) {
        add_row(std::string(group_name(g)), r.transition_units, g, kTransitionMetricNames.size());
      }
    }
  }
  return r;
}

}  // namespace myoeval
