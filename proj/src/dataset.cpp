#include "myoeval/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "myoeval/error.hpp"
#include "text_util.hpp"

namespace myoeval {

namespace {

// Purpose tags keep the random streams of different generators disjoint.
constexpr std::uint64_t kTagTraining = 0x7472;
constexpr std::uint64_t kTagSequence = 0x7365;
constexpr std::uint64_t kTagTest = 0x7465;

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t tag, std::uint64_t a = 0,
                         std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(a),
                    static_cast<std::uint32_t>(b)};
  return std::mt19937_64(seq);
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Positive draw from a normal, kept inside [0.25 * mean, cap].
double draw_duration_ms(std::mt19937_64& rng, double mean, double spread, double cap) {
  std::normal_distribution<double> dist(mean, spread);
  return std::clamp(dist(rng), 0.25 * mean, std::max(0.25 * mean, cap));
}

// Amplitude envelope for one channel between two gain levels. `u` in [0, 1].
double blend(double from, double to, double rest, double u, double dip_depth) {
  double g = (1.0 - u) * from + u * to;
  if (dip_depth > 0.0) {
    const double pull = dip_depth * std::sin(M_PI * u);
    g = rest + (g - rest) * (1.0 - pull);
  }
  return g;
}

// One prompted contraction as realised by the subject: per-channel gains
// after intensity and pattern variability.
std::vector<double> realise(const SyntheticSubjectProfile& p, MotionClass c, std::mt19937_64& rng) {
  const auto& base = p.gains[ordinal(c)];
  const auto& rest = p.gains[ordinal(MotionClass::NM)];
  if (is_rest(c)) return base;
  std::normal_distribution<double> unit(0.0, 1.0);
  const double intensity = std::exp(p.intensity_spread * unit(rng));
  std::vector<double> g(base.size());
  for (std::size_t e = 0; e < base.size(); ++e) {
    const double shape = std::exp(p.pattern_spread * unit(rng));
    g[e] = rest[e] + std::max(0.0, base[e] - rest[e]) * intensity * shape;
  }
  return g;
}

struct Segment {
  std::size_t begin = 0;  // first sample of the segment
  bool dip = false;       // active-to-active change
  double dip_depth = 0.0;
  std::vector<double> from_gain, to_gain;
  double from_floor = 1.0, to_floor = 1.0;
  std::size_t ramp_begin = 0;  // absolute sample index
  std::size_t ramp_end = 0;
};

Segment make_segment(const SyntheticSubjectProfile& p, MotionClass from, MotionClass to,
                     const std::vector<double>& from_gain, std::vector<double> to_gain) {
  Segment s;
  s.dip = is_active(from) && is_active(to) && from != to;
  s.dip_depth = s.dip ? p.release_dip_depth : 0.0;
  s.from_gain = from_gain;
  s.to_gain = std::move(to_gain);
  s.from_floor = p.noise_floor[ordinal(from)];
  s.to_floor = p.noise_floor[ordinal(to)];
  return s;
}

// Slow multiplicative wobble of the contraction level: a few low-frequency
// sinusoids with random phases, normalised to unit peak.
struct Fluctuation {
  std::array<double, 3> freq{}, phase{};
  double depth = 0.0;

  Fluctuation(const SyntheticSubjectProfile& p, std::mt19937_64& rng) : depth(p.fluctuation_depth) {
    std::uniform_real_distribution<double> f(0.3, 2.0), ph(0.0, 2.0 * M_PI);
    for (std::size_t i = 0; i < freq.size(); ++i) {
      freq[i] = f(rng);
      phase[i] = ph(rng);
    }
  }
  double operator()(double t_s) const {
    double m = 0.0;
    for (std::size_t i = 0; i < freq.size(); ++i) m += std::sin(2.0 * M_PI * freq[i] * t_s + phase[i]);
    return 1.0 + depth * m / static_cast<double>(freq.size());
  }
};

// Fills channels given piecewise segments (ordered by begin, covering [0, n)).
void render(const SyntheticSubjectProfile& p, const std::vector<Segment>& segments, std::size_t n,
            std::mt19937_64& rng, std::vector<std::vector<double>>& channels) {
  const std::size_t ch = p.channel_count();
  channels.assign(ch, std::vector<double>(n, 0.0));
  const Fluctuation wobble(p, rng);
  std::normal_distribution<double> unit(0.0, 1.0);
  const auto& rest = p.gains[ordinal(MotionClass::NM)];
  std::size_t seg = 0;
  for (std::size_t t = 0; t < n; ++t) {
    while (seg + 1 < segments.size() && segments[seg + 1].begin <= t) ++seg;
    const Segment& s = segments[seg];
    double u;
    if (t < s.ramp_begin) {
      u = 0.0;
    } else if (t >= s.ramp_end) {
      u = 1.0;
    } else {
      u = static_cast<double>(t - s.ramp_begin) / static_cast<double>(s.ramp_end - s.ramp_begin);
    }
    const double level = wobble(static_cast<double>(t) / p.sample_rate_hz);
    const double floor = (1.0 - u) * s.from_floor + u * s.to_floor;
    for (std::size_t c = 0; c < ch; ++c) {
      const double g = blend(s.from_gain[c], s.to_gain[c], rest[c], u, s.dip_depth);
      const double sd = rest[c] + std::max(0.0, g - rest[c]) * level + floor;
      double x = unit(rng) * sd;
      if (p.quantize) x = std::clamp(std::round(x), -2047.0, 2047.0);
      channels[c][t] = x;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------

void PromptTimeline::validate(double duration_s) const {
  if (prompt_duration_s <= 0.0) throw ParameterError("prompt_duration must be positive");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (!(e.start_s >= 0.0) || e.start_s > duration_s) {
      throw ParameterError("timeline entry " + std::to_string(i) + " starts outside the recording");
    }
    if (i > 0) {
      if (!(e.start_s > entries[i - 1].start_s)) {
        throw ParameterError("timeline entry " + std::to_string(i) + " is not strictly increasing");
      }
      if (e.cls == entries[i - 1].cls) {
        throw ParameterError("timeline entry " + std::to_string(i) + " repeats the previous class");
      }
    }
  }
}

bool PromptTimeline::covers_all_transitions() const {
  std::array<std::array<int, kClassCount>, kClassCount> seen{};
  for (std::size_t i = 1; i < entries.size(); ++i) {
    ++seen[ordinal(entries[i - 1].cls)][ordinal(entries[i].cls)];
  }
  for (std::size_t a = 0; a < kClassCount; ++a) {
    for (std::size_t b = 0; b < kClassCount; ++b) {
      if (seen[a][b] != (a == b ? 0 : 1)) return false;
    }
  }
  return true;
}

std::string_view kind_name(RecordingKind kind) {
  return kind == RecordingKind::training_repetition ? "training-repetition" : "continuous-test";
}

void Recording::validate() const {
  if (channels.empty()) throw ParameterError("recording has no channels");
  if (!(sample_rate > 0.0)) throw ParameterError("sample_rate must be positive");
  const std::size_t n = channels.front().size();
  for (std::size_t c = 1; c < channels.size(); ++c) {
    if (channels[c].size() != n) {
      throw ParameterError("channel " + std::to_string(c) + " has " +
                           std::to_string(channels[c].size()) + " samples, expected " +
                           std::to_string(n));
    }
  }
  timeline.validate(duration_s());
}

void SyntheticSubjectProfile::validate() const {
  const std::size_t ch = gains.front().size();
  if (ch == 0) throw ParameterError("profile needs at least one channel");
  for (std::size_t k = 0; k < kClassCount; ++k) {
    if (gains[k].size() != ch) throw ParameterError("profile gain vectors differ in length");
    for (double g : gains[k]) {
      if (!(g >= 0.0)) throw ParameterError("profile gains must be non-negative");
    }
    if (!(noise_floor[k] >= 0.0)) throw ParameterError("noise floor must be non-negative");
  }
  const double rest = norm2(gains[ordinal(MotionClass::NM)]);
  for (MotionClass c : kAllClasses) {
    if (is_active(c) && !(rest < norm2(gains[ordinal(c)]))) {
      throw ParameterError("NM gain must be smaller in norm than the " +
                           std::string(class_name(c)) + " gain");
    }
  }
  if (!(reaction_delay_mean_ms > 0.0) || !(reaction_delay_spread_ms > 0.0) || !(ramp_mean_ms > 0.0) ||
      !(ramp_spread_ms > 0.0)) {
    throw ParameterError("delay and ramp parameters must be positive");
  }
  if (!(release_dip_depth >= 0.0 && release_dip_depth < 1.0)) {
    throw ParameterError("release_dip_depth must lie in [0, 1)");
  }
  if (!(dip_depth_spread >= 0.0 && dip_depth_spread <= 1.0)) {
    throw ParameterError("dip_depth_spread must lie in [0, 1]");
  }
  if (!(intensity_spread >= 0.0) || !(pattern_spread >= 0.0) || !(fluctuation_depth >= 0.0 && fluctuation_depth < 1.0)) {
    throw ParameterError("variability parameters must be non-negative (fluctuation below 1)");
  }
  if (!(sample_rate_hz > 0.0)) throw ParameterError("sample_rate must be positive");
}

SyntheticSubjectProfile SyntheticSubjectProfile::make_default(std::uint64_t seed,
                                                              std::size_t channels) {
  if (channels == 0) throw ParameterError("profile needs at least one channel");
  SyntheticSubjectProfile p;
  p.seed = seed;
  auto rng = make_rng(seed, 0x7072);
  // Electrodes sit evenly around the forearm; each motion activates a
  // localized muscle group, seen as a bump of gain centred at some angle.
  std::uniform_real_distribution<double> rest(2.0, 4.0);
  std::uniform_real_distribution<double> level(120.0, 240.0);
  std::uniform_real_distribution<double> spread(0.85, 1.15);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> jitter(0.8, 1.2);
  constexpr double kBaseline = 0.15;
  constexpr double kConcentration = 2.0;
  // Every motion is held at a similar moderate effort, so the per-class
  // RMS gains stay near one subject-specific level.
  const double subject_level = level(rng);
  for (MotionClass c : kAllClasses) {
    auto& g = p.gains[ordinal(c)];
    g.resize(channels);
    p.noise_floor[ordinal(c)] = 1.0;
    if (is_rest(c)) {
      for (double& x : g) x = rest(rng);
      continue;
    }
    const double target = subject_level * spread(rng), centre = angle(rng);
    for (std::size_t e = 0; e < channels; ++e) {
      const double phi = 2.0 * M_PI * static_cast<double>(e) / static_cast<double>(channels);
      const double bump = std::exp(kConcentration * (std::cos(phi - centre) - 1.0));
      g[e] = (kBaseline + (1.0 - kBaseline) * bump) * jitter(rng);
    }
    const double rms = norm2(g) / std::sqrt(static_cast<double>(channels));
    for (double& x : g) x *= target / rms;
  }
  return p;
}

std::vector<MotionClass> random_transition_sequence(std::uint64_t seed) {
  auto rng = make_rng(seed, kTagSequence);
  std::array<std::vector<MotionClass>, kClassCount> out_edges;
  for (MotionClass a : kAllClasses) {
    for (MotionClass b : kAllClasses) {
      if (a != b) out_edges[ordinal(a)].push_back(b);
    }
    std::shuffle(out_edges[ordinal(a)].begin(), out_edges[ordinal(a)].end(), rng);
  }
  // Hierholzer; the graph is balanced so the circuit uses every edge.
  std::vector<MotionClass> stack{MotionClass::NM};
  std::vector<MotionClass> circuit;
  while (!stack.empty()) {
    auto& edges = out_edges[ordinal(stack.back())];
    if (!edges.empty()) {
      stack.push_back(edges.back());
      edges.pop_back();
    } else {
      circuit.push_back(stack.back());
      stack.pop_back();
    }
  }
  std::reverse(circuit.begin(), circuit.end());
  return circuit;
}

std::vector<Recording> generate_training_set(const SyntheticSubjectProfile& profile, int reps,
                                             double rep_duration_s) {
  profile.validate();
  if (reps < 1) throw ParameterError("reps must be at least 1");
  if (!(rep_duration_s > 0.0)) throw ParameterError("rep_duration must be positive");
  const double fs = profile.sample_rate_hz;
  const auto n = static_cast<std::size_t>(std::llround(rep_duration_s * fs));
  const double cap_ms = 0.4 * rep_duration_s * 1000.0;

  std::vector<Recording> out;
  out.reserve(static_cast<std::size_t>(reps) * kClassCount);
  for (int rep = 0; rep < reps; ++rep) {
    for (MotionClass c : kAllClasses) {
      auto rng = make_rng(profile.seed, kTagTraining, static_cast<std::uint64_t>(rep), ordinal(c));
      const double delay = draw_duration_ms(rng, profile.reaction_delay_mean_ms,
                                            profile.reaction_delay_spread_ms, cap_ms);
      const double ramp = draw_duration_ms(rng, profile.ramp_mean_ms, profile.ramp_spread_ms, cap_ms);
      const auto& rest = profile.gains[ordinal(MotionClass::NM)];
      Segment s = make_segment(profile, MotionClass::NM, c, rest, realise(profile, c, rng));
      s.ramp_begin = std::min(n, static_cast<std::size_t>(delay * fs / 1000.0));
      s.ramp_end = std::min(n, s.ramp_begin + std::max<std::size_t>(1, static_cast<std::size_t>(ramp * fs / 1000.0)));
      Recording rec;
      rec.sample_rate = fs;
      rec.kind = RecordingKind::training_repetition;
      rec.set_id = rep;
      rec.timeline.prompt_duration_s = rep_duration_s;
      rec.timeline.entries = {{0.0, c}};
      render(profile, {s}, n, rng, rec.channels);
      out.push_back(std::move(rec));
    }
  }
  return out;
}

Recording generate_continuous_test(const SyntheticSubjectProfile& profile, double prompt_duration_s,
                                   int trial) {
  profile.validate();
  if (!(prompt_duration_s > 0.0)) throw ParameterError("prompt_duration must be positive");
  const auto trial_key = static_cast<std::uint64_t>(trial);
  const auto sequence = random_transition_sequence(profile.seed * 1000003ULL + trial_key);
  const double fs = profile.sample_rate_hz;
  const auto per_prompt = static_cast<std::size_t>(std::llround(prompt_duration_s * fs));
  const std::size_t n = per_prompt * sequence.size();
  const double cap_ms = 0.4 * prompt_duration_s * 1000.0;

  auto rng = make_rng(profile.seed, kTagTest, trial_key);
  Recording rec;
  rec.sample_rate = fs;
  rec.kind = RecordingKind::continuous_test;
  rec.set_id = trial;
  rec.timeline.prompt_duration_s = prompt_duration_s;

  std::vector<Segment> segments;
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    const std::size_t begin = i * per_prompt;
    rec.timeline.entries.push_back({static_cast<double>(begin) / fs, sequence[i]});
    const MotionClass from = i == 0 ? sequence[i] : sequence[i - 1];
    auto gain = realise(profile, sequence[i], rng);
    Segment s = make_segment(profile, from, sequence[i], segments.empty() ? gain : segments.back().to_gain, gain);
    s.begin = begin;
    if (s.dip) s.dip_depth *= 1.0 - profile.dip_depth_spread * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double delay = draw_duration_ms(rng, profile.reaction_delay_mean_ms,
                                          profile.reaction_delay_spread_ms, cap_ms);
    const double ramp = draw_duration_ms(rng, profile.ramp_mean_ms, profile.ramp_spread_ms, cap_ms);
    s.ramp_begin = begin + static_cast<std::size_t>(delay * fs / 1000.0);
    s.ramp_end = s.ramp_begin + std::max<std::size_t>(1, static_cast<std::size_t>(ramp * fs / 1000.0));
    segments.push_back(s);
  }
  render(profile, segments, n, rng, rec.channels);
  return rec;
}

// ---------------------------------------------------------------------------
// Text container:
//   myoeval-recording
//   [header]     key=value lines: version, kind, sample_rate, channel_count, set, prompt_duration
//   [timeline]   start_time_s,class_name
//   [data]       one comma-separated row of channel values per sample

void write_recording(const Recording& rec, std::ostream& out) {
  rec.validate();
  out << "myoeval-recording\n[header]\n";
  out << "version=1\n";
  out << "kind=" << kind_name(rec.kind) << '\n';
  out << "sample_rate=" << format_double(rec.sample_rate) << '\n';
  out << "channel_count=" << rec.channel_count() << '\n';
  out << "set=" << rec.set_id << '\n';
  out << "prompt_duration=" << format_double(rec.timeline.prompt_duration_s) << '\n';
  out << "[timeline]\n";
  for (const auto& e : rec.timeline.entries) {
    out << format_double(e.start_s) << ',' << class_name(e.cls) << '\n';
  }
  out << "[data]\n";
  std::string row;
  const std::size_t n = rec.sample_count();
  for (std::size_t t = 0; t < n; ++t) {
    row.clear();
    for (std::size_t c = 0; c < rec.channel_count(); ++c) {
      if (c) row.push_back(',');
      row += format_double(rec.channels[c][t]);
    }
    row.push_back('\n');
    out << row;
  }
}

void write_recording(const Recording& rec, const std::filesystem::path& path) {
  write_file_atomically(path, [&](std::ostream& out) { write_recording(rec, out); });
}

Recording read_recording(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) -> FormatError {
    return FormatError("line " + std::to_string(line_no) + ": " + what);
  };
  auto next = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next() || line != "myoeval-recording") throw fail("missing 'myoeval-recording' magic line");
  if (!next() || line != "[header]") throw fail("expected [header]");

  Recording rec;
  std::size_t channel_count = 0;
  bool have_version = false, have_rate = false, have_channels = false, have_kind = false;
  while (true) {
    if (!next()) throw fail("unexpected end of file in header");
    if (line == "[timeline]") break;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw fail("expected key=value in header");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "version") {
      if (value != "1") throw fail("unsupported version '" + value + "'");
      have_version = true;
    } else if (key == "kind") {
      if (value == "training-repetition") {
        rec.kind = RecordingKind::training_repetition;
      } else if (value == "continuous-test") {
        rec.kind = RecordingKind::continuous_test;
      } else {
        throw fail("field 'kind': unknown value '" + value + "'");
      }
      have_kind = true;
    } else if (key == "sample_rate") {
      rec.sample_rate = parse_double(value, "sample_rate", line_no);
      if (!(rec.sample_rate > 0.0)) throw fail("field 'sample_rate' must be positive");
      have_rate = true;
    } else if (key == "channel_count") {
      channel_count = static_cast<std::size_t>(parse_int(value, "channel_count", line_no));
      if (channel_count == 0) throw fail("field 'channel_count' must be at least 1");
      have_channels = true;
    } else if (key == "set") {
      rec.set_id = static_cast<int>(parse_int(value, "set", line_no));
    } else if (key == "prompt_duration") {
      rec.timeline.prompt_duration_s = parse_double(value, "prompt_duration", line_no);
    } else {
      throw fail("unknown header field '" + key + "'");
    }
  }
  if (!have_version) throw fail("header is missing field 'version'");
  if (!have_kind) throw fail("header is missing field 'kind'");
  if (!have_rate) throw fail("header is missing field 'sample_rate'");
  if (!have_channels) throw fail("header is missing field 'channel_count'");

  while (true) {
    if (!next()) throw fail("unexpected end of file in timeline");
    if (line == "[data]") break;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw fail("timeline row must be 'start_time_s,class_name'");
    PromptEntry e;
    e.start_s = parse_double(std::string_view(line).substr(0, comma), "timeline start", line_no);
    const auto cls = parse_class(std::string_view(line).substr(comma + 1));
    if (!cls) throw fail("timeline class '" + line.substr(comma + 1) + "' is not a motion class");
    e.cls = *cls;
    if (!rec.timeline.entries.empty()) {
      const auto& prev = rec.timeline.entries.back();
      if (!(e.start_s > prev.start_s)) throw fail("timeline is not strictly increasing");
      if (e.cls == prev.cls) throw fail("timeline repeats class " + std::string(class_name(e.cls)));
    }
    rec.timeline.entries.push_back(e);
  }

  rec.channels.assign(channel_count, {});
  std::vector<std::string_view> fields;
  while (next()) {
    if (line.empty()) continue;
    split_csv(line, fields);
    if (fields.size() != channel_count) {
      throw fail("data row has " + std::to_string(fields.size()) + " values, expected " +
                 std::to_string(channel_count));
    }
    for (std::size_t c = 0; c < channel_count; ++c) {
      rec.channels[c].push_back(parse_double(fields[c], "sample", line_no));
    }
  }
  try {
    rec.validate();
  } catch (const ParameterError& e) {
    throw FormatError(e.what());
  }
  return rec;
}

Recording read_recording(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open recording '" + path.string() + "'");
  try {
    return read_recording(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace myoeval
