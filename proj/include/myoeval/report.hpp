#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "myoeval/dataset.hpp"
#include "myoeval/decision.hpp"
#include "myoeval/pipeline.hpp"
#include "myoeval/stream.hpp"

namespace myoeval {

inline constexpr int kReportVersion = 1;

// Complete, timestamp-free JSON form of a run. Tables keep their column
// order in a "columns" array with cells aligned to it.
nlohmann::json result_to_json(const ExperimentResult& result);

struct RenderedReport {
  // (file name, contents): report.json, offline.csv, steady.csv, R2A.csv,
  // A2R.csv, A2A.csv.
  std::vector<std::pair<std::string, std::string>> files;
  std::string summary;  // plain-text tables for the terminal
};

// Renders from the JSON form so a saved report re-renders identically.
// FormatError when the document is not a report of a supported version.
RenderedReport render_report(const nlohmann::json& report);
nlohmann::json load_report(const std::filesystem::path& path);

// Writes every file through a temp name first and renames only after all
// writes succeeded; on failure the temp files are removed.
void write_files(const std::filesystem::path& dir,
                 const std::vector<std::pair<std::string, std::string>>& files);

// Frames [first, last) of an evaluated stream, one CSV row per frame:
// frame,time_ms,decision,confidence,smoothed,prompt,span_kind.
// span_kind is "steady", "transition" or "none".
std::string frame_trace_csv(const DecisionStream& raw, const DecisionStream& smoothed,
                            const SegmentLabeling& labeling, const PromptTimeline& timeline,
                            std::size_t first, std::size_t last);

// Frames lying entirely inside [begin_s, end_s).
std::pair<std::size_t, std::size_t> frames_in_slice(const DecisionStream& stream, double begin_s,
                                                    double end_s);

}  // namespace myoeval
