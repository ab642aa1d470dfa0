#include "myoeval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "myoeval/error.hpp"
#include "text_util.hpp"

namespace myoeval {

namespace {

using nlohmann::json;

const char* direction(std::string_view metric) { return metric == "PNM" ? "higher" : "lower"; }

json summary_json(const std::optional<Summary>& s) {
  if (!s) return nullptr;
  return {{"mean", s->mean}, {"sd", s->sd}, {"n", s->n}};
}

json table_json(const MetricTable& t, std::string title) {
  json j;
  j["title"] = std::move(title);
  j["columns"] = t.columns;
  json dirs = json::array();
  for (const auto& c : t.columns) dirs.push_back(direction(c));
  j["better"] = dirs;
  j["rows"] = json::array();
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    json cells = json::array();
    for (const auto& c : t.cells[r]) cells.push_back(summary_json(c));
    j["rows"].push_back({{"classifier", t.rows[r]}, {"cells", cells}});
  }
  return j;
}

json kw_json(const MetricComparison& c) {
  json j = {{"table", c.table},
            {"metric", c.metric},
            {"scope", c.scope},
            {"labels", c.labels},
            {"h", c.kruskal.h},
            {"df", c.kruskal.df},
            {"p_value", c.kruskal.p_value},
            {"p_chi_square", c.kruskal.p_chi_square},
            {"p_exact", c.kruskal.p_exact ? json(*c.kruskal.p_exact) : json(nullptr)},
            {"sizes", c.kruskal.sizes},
            {"mean_ranks", c.kruskal.mean_ranks}};
  if (c.posthoc) {
    json pairs = json::array();
    for (const auto& p : c.posthoc->pairs) {
      pairs.push_back({{"a", c.labels[p.a]},
                       {"b", c.labels[p.b]},
                       {"z", p.z},
                       {"p", p.p},
                       {"adjusted_p", p.adjusted_p},
                       {"significant", p.significant}});
    }
    j["posthoc"] = {{"method", "dunn-sidak"}, {"comparisons", c.posthoc->comparisons}, {"pairs", pairs}};
  } else {
    j["posthoc"] = nullptr;
  }
  return j;
}

json statistics_json(const StatisticsBlock& s) {
  json j;
  j["alpha"] = s.alpha;
  j["classifier_comparisons"] = json::array();
  for (const auto& c : s.classifier_comparisons) j["classifier_comparisons"].push_back(kw_json(c));
  j["group_comparisons"] = json::array();
  for (const auto& c : s.group_comparisons) j["group_comparisons"].push_back(kw_json(c));
  j["correlations"] = json::array();
  for (const auto& c : s.correlations) {
    json e = {{"table", c.table}, {"metric", c.metric}, {"significant", c.significant}};
    if (c.result) {
      e["r"] = c.result->r;
      e["p_value"] = c.result->p_value;
      e["n"] = c.result->n;
    } else {
      e["r"] = nullptr;
      e["p_value"] = nullptr;
      e["note"] = c.note;
    }
    j["correlations"].push_back(e);
  }
  return j;
}

}  // namespace

nlohmann::json result_to_json(const ExperimentResult& r) {
  json j;
  j["format"] = "myoeval-report";
  j["version"] = kReportVersion;

  json prov;
  prov["config"] = config_to_json(r.config);
  prov["config_hash"] = r.config_hash;
  prov["metric_mode"] = metric_mode_name(r.config.metric_mode);
  prov["seed"] = r.config.seed;
  json seeds = json::array();
  for (auto s : r.subject_seeds) seeds.push_back(hex64(s));
  prov["subject_seeds"] = seeds;
  prov["data_source"] = r.config.data_dir ? "directory" : "synthetic";
  j["provenance"] = prov;

  json tables;
  tables["offline"] = table_json(r.offline_table, "Offline training error (%)");
  tables["steady"] = table_json(r.aggregate.steady, "Steady-state performance (%)");
  for (TransitionGroup g : kAllGroups) {
    const std::string name(group_name(g));
    tables[name] = table_json(r.aggregate.transitions[static_cast<std::size_t>(g)],
                              name + " transition performance (ms, %)");
  }
  j["tables"] = tables;

  json pp = json::array();
  for (const auto& row : r.aggregate.per_participant) {
    json cells = json::array();
    for (const auto& c : row.cells) cells.push_back(summary_json(c));
    pp.push_back({{"classifier", row.classifier}, {"participant", row.participant}, {"table", row.table},
                  {"cells", cells}});
  }
  j["per_participant"] = pp;

  json off = json::array();
  for (const auto& o : r.offline) {
    off.push_back({{"classifier", o.classifier},
                   {"participant", o.participant},
                   {"ter", o.ter},
                   {"fold_errors", o.fold_errors},
                   {"warnings", o.warnings}});
  }
  j["offline"] = off;
  j["statistics"] = statistics_json(r.statistics);

  json evals = json::array();
  std::size_t failed = 0;
  for (const auto& e : r.evaluations) {
    if (!e.ok) ++failed;
    json ej = {{"classifier", e.classifier},
               {"participant", e.participant},
               {"trial", e.trial},
               {"input_hash", hex64(e.input_hash)},
               {"ok", e.ok},
               {"prompts", e.prompts},
               {"steady_spans", e.steady_spans},
               {"transitions", e.transitions},
               {"dropped_transitions", e.dropped_transitions},
               {"discarded_prompts", e.discarded_prompts}};
    if (!e.ok) ej["error"] = e.error;
    evals.push_back(ej);
  }
  const auto& spans = r.aggregate.transition_spans_per_group;
  j["bookkeeping"] = {{"test_prompt_seconds", r.test_prompt_seconds},
                      {"test_recorded_seconds", r.test_recorded_seconds},
                      {"steady_spans", r.aggregate.steady_span_count},
                      {"transition_spans", r.aggregate.transition_span_count},
                      {"transition_spans_per_group", {{"R2A", spans[0]}, {"A2R", spans[1]}, {"A2A", spans[2]}}},
                      {"failed_evaluations", failed},
                      {"evaluations", evals}};
  return j;
}

// ---------------------------------------------------------------------------

namespace {

constexpr const char* kTableOrder[] = {"offline", "steady", "R2A", "A2R", "A2A"};

std::string csv_table(const json& t) {
  std::ostringstream out;
  out << "classifier";
  for (const auto& c : t.at("columns")) {
    const auto name = c.get<std::string>();
    out << ',' << name << "_mean," << name << "_sd";
  }
  out << '\n';
  for (const auto& row : t.at("rows")) {
    out << row.at("classifier").get<std::string>();
    for (const auto& cell : row.at("cells")) {
      if (cell.is_null()) {
        out << ",,";
      } else {
        out << ',' << format_double(cell.at("mean").get<double>()) << ','
            << format_double(cell.at("sd").get<double>());
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string text_table(const json& t) {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header{"classifier"};
  for (const auto& c : t.at("columns")) header.push_back(c.get<std::string>());
  grid.push_back(header);
  for (const auto& row : t.at("rows")) {
    std::vector<std::string> line{row.at("classifier").get<std::string>()};
    for (const auto& cell : row.at("cells")) {
      if (cell.is_null()) {
        line.emplace_back("-");
      } else {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.1f +/- %.1f", cell.at("mean").get<double>(), cell.at("sd").get<double>());
        line.emplace_back(buf);
      }
    }
    grid.push_back(line);
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : grid) {
    for (std::size_t i = 0; i < line.size() && i < width.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  std::ostringstream out;
  out << t.at("title").get<std::string>() << '\n';
  for (const auto& line : grid) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      out << line[i];
      if (i + 1 < line.size()) out << std::string(width[i] - line[i].size() + 2, ' ');
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace

RenderedReport render_report(const nlohmann::json& report) {
  RenderedReport out;
  try {
    if (report.at("format") != "myoeval-report") throw FormatError("not a myoeval report");
    if (report.at("version") != kReportVersion) {
      throw FormatError("unsupported report version " + report.at("version").dump());
    }
    out.files.emplace_back("report.json", report.dump(2) + "\n");
    const auto& tables = report.at("tables");
    const auto& prov = report.at("provenance");
    std::ostringstream summary;
    summary << "metric mode: " << prov.at("metric_mode").get<std::string>()
            << ", config hash: " << prov.at("config_hash").get<std::string>() << "\n\n";
    for (const char* name : kTableOrder) {
      const auto& t = tables.at(name);
      out.files.emplace_back(std::string(name) + ".csv", csv_table(t));
      summary << text_table(t) << '\n';
    }
    const auto& book = report.at("bookkeeping");
    summary << "test prompts: " << format_double(book.at("test_prompt_seconds").get<double>())
            << " s; failed evaluations: " << book.at("failed_evaluations").get<std::size_t>() << '\n';
    out.summary = summary.str();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("report: ") + e.what());
  }
  return out;
}

nlohmann::json load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_files(const std::filesystem::path& dir,
                 const std::vector<std::pair<std::string, std::string>>& files) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FormatError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<fs::path> temps;
  auto cleanup = [&] {
    for (const auto& t : temps) fs::remove(t, ec);
  };
  for (const auto& [name, contents] : files) {
    const fs::path tmp = dir / ("." + name + ".tmp");
    temps.push_back(tmp);
    std::ofstream out(tmp, std::ios::binary);
    out << contents;
    out.close();
    if (!out) {
      cleanup();
      throw FormatError("cannot write " + (dir / name).string());
    }
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    fs::rename(temps[i], dir / files[i].first, ec);
    if (ec) {
      cleanup();
      throw FormatError("cannot rename into " + (dir / files[i].first).string() + ": " + ec.message());
    }
  }
}

// ---------------------------------------------------------------------------

std::pair<std::size_t, std::size_t> frames_in_slice(const DecisionStream& stream, double begin_s,
                                                    double end_s) {
  if (!(end_s > begin_s) || begin_s < 0.0) throw ParameterError("slice needs 0 <= begin < end");
  const double rate = stream.sample_rate;
  const auto inc = stream.spec.increment, len = stream.spec.length;
  const auto first_sample = static_cast<std::size_t>(std::ceil(begin_s * rate - 1e-9));
  const auto end_sample = static_cast<std::size_t>(std::floor(end_s * rate + 1e-9));
  const std::size_t first = (first_sample + inc - 1) / inc;
  std::size_t last = end_sample >= len ? (end_sample - len) / inc + 1 : 0;
  last = std::min(last, stream.size());
  if (first >= last) return {first, first};
  return {first, last};
}

std::string frame_trace_csv(const DecisionStream& raw, const DecisionStream& smoothed,
                            const SegmentLabeling& labeling, const PromptTimeline& timeline,
                            std::size_t first, std::size_t last) {
  last = std::min(last, raw.size());
  std::vector<const char*> kind(raw.size(), "none");
  for (const auto& s : labeling.steady) {
    for (std::size_t f = s.start_frame; f < s.end_frame && f < kind.size(); ++f) kind[f] = "steady";
  }
  for (const auto& t : labeling.transitions) {
    for (std::size_t f = t.start_frame; f < t.end_frame && f < kind.size(); ++f) kind[f] = "transition";
  }
  std::ostringstream out;
  out << "frame,time_ms,decision,confidence,smoothed,prompt,span_kind\n";
  std::size_t prompt = 0;
  for (std::size_t f = first; f < last; ++f) {
    const double t = raw.time_ms(f);
    while (prompt + 1 < timeline.size() && timeline.entries[prompt + 1].start_s * 1000.0 <= t) ++prompt;
    out << f << ',' << format_double(t) << ',' << class_name(raw.cls(f)) << ','
        << format_double(raw[f].confidence) << ',' << class_name(smoothed.cls(f)) << ','
        << (timeline.size() ? class_name(timeline.entries[prompt].cls) : std::string_view("")) << ','
        << kind[f] << '\n';
  }
  return out.str();
}

}  // namespace myoeval
