#include "myoeval/classify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "myoeval/error.hpp"
#include "text_util.hpp"

namespace myoeval {

namespace {

constexpr std::array<std::string_view, 6> kKindNames = {"LDA", "QDA", "KNN", "SVM", "MLP", "RF"};
constexpr double kMaxCondition = 1e12;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

Eigen::Map<const Vector> as_vector(std::span<const double> x) {
  return Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
}

void check_dimension(const ClassifierModel& model, std::span<const double> x) {
  if (x.size() != model.dimension) {
    throw ParameterError("feature vector has " + std::to_string(x.size()) +
                         " values, model expects " + std::to_string(model.dimension));
  }
}

struct ClassMoments {
  std::vector<MotionClass> classes;
  std::vector<Vector> means;
  std::vector<Matrix> scatters;
  std::vector<std::size_t> counts;
};

ClassMoments class_moments(const LabeledDataset& data) {
  ClassMoments m;
  m.classes = data.classes();
  const auto d = static_cast<Eigen::Index>(data.dimension());
  std::array<int, kClassCount> slot{};
  slot.fill(-1);
  for (std::size_t i = 0; i < m.classes.size(); ++i) slot[ordinal(m.classes[i])] = static_cast<int>(i);
  m.means.assign(m.classes.size(), Vector::Zero(d));
  m.scatters.assign(m.classes.size(), Matrix::Zero(d, d));
  m.counts.assign(m.classes.size(), 0);
  for (const auto& s : data.samples) {
    const auto j = static_cast<std::size_t>(slot[ordinal(s.label)]);
    m.means[j] += as_vector(s.x);
    ++m.counts[j];
  }
  for (std::size_t j = 0; j < m.classes.size(); ++j) m.means[j] /= static_cast<double>(m.counts[j]);
  for (const auto& s : data.samples) {
    const auto j = static_cast<std::size_t>(slot[ordinal(s.label)]);
    const Vector r = as_vector(s.x) - m.means[j];
    m.scatters[j].selfadjointView<Eigen::Lower>().rankUpdate(r);
  }
  for (auto& s : m.scatters) s = s.selfadjointView<Eigen::Lower>();
  return m;
}

// Ridge, eigen-decompose, invert. Reports the condition number on failure.
void invert_covariance(Matrix cov, double regularization, const std::string& what,
                       Matrix& precision, double& log_det) {
  const auto d = cov.rows();
  const double ridge = regularization * cov.trace() / static_cast<double>(d);
  cov.diagonal().array() += ridge;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericalError(what + ": eigen-decomposition failed");
  const Vector& lambda = eig.eigenvalues();
  const double lo = lambda.minCoeff();
  const double hi = lambda.maxCoeff();
  if (!(hi > 0.0) || !(lo > hi / kMaxCondition)) {
    const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    std::ostringstream msg;
    msg << what << " is singular after regularization (smallest eigenvalue " << lo
        << ", largest " << hi << ", condition number " << cond << ", limit " << kMaxCondition << ")";
    throw NumericalError(msg.str());
  }
  precision = eig.eigenvectors() * lambda.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  log_det = lambda.array().log().sum();
}

ClassifierModel make_gaussian(ClassifierKind kind, const LabeledDataset& data, double regularization) {
  data.validate();
  if (regularization < 0.0) throw ParameterError("regularization must be non-negative");
  auto m = class_moments(data);
  ClassifierModel model;
  model.kind = kind;
  model.classes = m.classes;
  model.dimension = data.dimension();
  GaussianParams g;
  g.means = m.means;
  g.log_priors.assign(m.classes.size(), -std::log(static_cast<double>(m.classes.size())));
  const auto d = static_cast<Eigen::Index>(model.dimension);

  if (kind == ClassifierKind::LDA) {
    Matrix pooled = Matrix::Zero(d, d);
    for (const auto& s : m.scatters) pooled += s;
    const auto dof = static_cast<double>(data.size()) - static_cast<double>(m.classes.size());
    if (dof > 0.0) {
      pooled /= dof;
    } else {
      pooled.setZero();
    }
    g.precisions.emplace_back();
    g.log_dets.emplace_back();
    invert_covariance(pooled, regularization, "pooled covariance", g.precisions.back(), g.log_dets.back());
  } else {
    for (std::size_t j = 0; j < m.classes.size(); ++j) {
      Matrix cov = m.counts[j] > 1 ? Matrix(m.scatters[j] / static_cast<double>(m.counts[j] - 1))
                                   : Matrix(Matrix::Zero(d, d));
      g.precisions.emplace_back();
      g.log_dets.emplace_back();
      invert_covariance(cov, regularization,
                        "covariance of class " + std::string(class_name(m.classes[j])),
                        g.precisions.back(), g.log_dets.back());
    }
  }
  model.params = std::move(g);
  return model;
}

}  // namespace

std::string_view classifier_name(ClassifierKind kind) {
  return kKindNames.at(static_cast<std::size_t>(kind));
}

ClassifierKind parse_classifier_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<ClassifierKind>(i);
  }
  throw ParameterError("unknown classifier kind '" + std::string(name) + "'");
}

bool is_implemented(ClassifierKind kind) {
  return kind == ClassifierKind::LDA || kind == ClassifierKind::QDA || kind == ClassifierKind::KNN;
}

std::vector<MotionClass> LabeledDataset::classes() const {
  std::array<bool, kClassCount> seen{};
  for (const auto& s : samples) seen[ordinal(s.label)] = true;
  std::vector<MotionClass> out;
  for (MotionClass c : kAllClasses) {
    if (seen[ordinal(c)]) out.push_back(c);
  }
  return out;
}

std::vector<int> LabeledDataset::set_ids() const {
  std::set<int> ids;
  for (const auto& s : samples) ids.insert(s.set_id);
  return {ids.begin(), ids.end()};
}

void LabeledDataset::append(const FeatureFrameSeries& series, MotionClass label, int set_id) {
  for (const auto& f : series.frames) samples.push_back({f.values, label, set_id});
}

void LabeledDataset::validate() const {
  if (samples.empty()) throw ParameterError("labeled dataset is empty");
  const std::size_t d = dimension();
  if (d == 0) throw ParameterError("feature vectors are empty");
  for (const auto& s : samples) {
    if (s.x.size() != d) throw ParameterError("feature vectors differ in length");
  }
  if (classes().size() < 2) throw ParameterError("training needs at least two classes");
}

ClassifierModel train_lda(const LabeledDataset& data, double regularization) {
  return make_gaussian(ClassifierKind::LDA, data, regularization);
}

ClassifierModel train_qda(const LabeledDataset& data, double regularization) {
  return make_gaussian(ClassifierKind::QDA, data, regularization);
}

ClassifierModel train_knn(const LabeledDataset& data, std::size_t k) {
  data.validate();
  if (k < 1 || k > data.size()) {
    throw ParameterError("k = " + std::to_string(k) + " must lie in [1, " +
                         std::to_string(data.size()) + "]");
  }
  ClassifierModel model;
  model.kind = ClassifierKind::KNN;
  model.classes = data.classes();
  model.dimension = data.dimension();
  KnnParams p;
  p.k = k;
  p.points.resize(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(model.dimension));
  p.labels.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    p.points.row(static_cast<Eigen::Index>(i)) = as_vector(data.samples[i].x).transpose();
    p.labels.push_back(data.samples[i].label);
  }
  model.params = std::move(p);
  return model;
}

ClassifierModel train(const LabeledDataset& data, const TrainerSpec& spec) {
  switch (spec.kind) {
    case ClassifierKind::LDA: return train_lda(data, spec.regularization);
    case ClassifierKind::QDA: return train_qda(data, spec.regularization);
    case ClassifierKind::KNN: return train_knn(data, spec.k);
    default: break;
  }
  throw NotImplementedError("classifier " + std::string(classifier_name(spec.kind)) +
                            " is not implemented (available: LDA, QDA, KNN)");
}

std::vector<double> discriminants(const ClassifierModel& model, std::span<const double> x) {
  check_dimension(model, x);
  const auto* g = std::get_if<GaussianParams>(&model.params);
  if (!g) throw ParameterError("discriminants are defined for LDA and QDA models only");
  const auto v = as_vector(x);
  const double log_2pi = static_cast<double>(model.dimension) * std::log(2.0 * M_PI);
  std::vector<double> out(model.classes.size());
  const bool shared = g->precisions.size() == 1;
  for (std::size_t j = 0; j < out.size(); ++j) {
    const std::size_t p = shared ? 0 : j;
    const Vector r = v - g->means[j];
    const double quad = r.dot(g->precisions[p] * r);
    out[j] = g->log_priors[j] - 0.5 * (log_2pi + g->log_dets[p] + quad);
  }
  return out;
}

Decision predict(const ClassifierModel& model, std::span<const double> x) {
  check_dimension(model, x);
  Decision d;
  if (std::holds_alternative<GaussianParams>(model.params)) {
    const auto g = discriminants(model, x);
    const double top = *std::max_element(g.begin(), g.end());
    double total = 0.0;
    std::vector<double> e(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) total += e[j] = std::exp(g[j] - top);
    std::size_t best = 0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      d.scores[ordinal(model.classes[j])] = e[j] / total;
      if (g[j] > g[best]) best = j;
    }
    d.cls = model.classes[best];
    d.confidence = d.scores[ordinal(d.cls)];
    return d;
  }

  const auto& p = std::get<KnnParams>(model.params);
  const auto q = as_vector(x).transpose();
  const Eigen::VectorXd dist = (p.points.rowwise() - q).rowwise().squaredNorm();
  std::vector<std::size_t> order(p.labels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto closer = [&](std::size_t a, std::size_t b) {
    const double da = dist[static_cast<Eigen::Index>(a)], db = dist[static_cast<Eigen::Index>(b)];
    return da < db || (da == db && a < b);
  };
  const auto k = static_cast<std::ptrdiff_t>(p.k);
  std::nth_element(order.begin(), order.begin() + (k - 1), order.end(), closer);
  std::sort(order.begin(), order.begin() + k, closer);

  std::array<std::size_t, kClassCount> votes{};
  for (std::ptrdiff_t i = 0; i < k; ++i) ++votes[ordinal(p.labels[order[static_cast<std::size_t>(i)]])];
  const std::size_t top = *std::max_element(votes.begin(), votes.end());
  std::optional<MotionClass> winner;
  for (std::ptrdiff_t i = 0; i < k && !winner; ++i) {
    const MotionClass c = p.labels[order[static_cast<std::size_t>(i)]];
    if (votes[ordinal(c)] == top) winner = c;
  }
  d.cls = *winner;
  for (MotionClass c : kAllClasses) {
    d.scores[ordinal(c)] = static_cast<double>(votes[ordinal(c)]) / static_cast<double>(p.k);
  }
  d.confidence = d.scores[ordinal(d.cls)];
  return d;
}

DecisionStream predict_stream(const ClassifierModel& model, const FeatureFrameSeries& series) {
  if (series.empty()) throw ParameterError("cannot classify an empty feature series");
  DecisionStream out;
  out.spec = series.spec;
  out.sample_rate = series.sample_rate;
  out.decisions.reserve(series.size());
  for (const auto& f : series.frames) out.decisions.push_back(predict(model, f.values));
  return out;
}

CrossValidationResult leave_one_set_out(const LabeledDataset& data, const Trainer& trainer) {
  const auto ids = data.set_ids();
  if (ids.size() < 2) throw ParameterError("leave-one-set-out needs at least two sets");
  const auto all_classes = data.classes();
  CrossValidationResult result;
  double total = 0.0;
  for (int held : ids) {
    LabeledDataset train_part, test_part;
    for (const auto& s : data.samples) (s.set_id == held ? test_part : train_part).samples.push_back(s);
    const auto test_classes = test_part.classes();
    const auto train_classes = train_part.classes();
    for (MotionClass c : all_classes) {
      if (std::find(test_classes.begin(), test_classes.end(), c) == test_classes.end() ||
          std::find(train_classes.begin(), train_classes.end(), c) == train_classes.end()) {
        result.warnings.push_back("fold " + std::to_string(held) + ": class " +
                                  std::string(class_name(c)) + " missing from one side");
      }
    }
    const auto model = trainer(train_part);
    FoldResult fold;
    fold.held_out_set = held;
    fold.tested = test_part.size();
    for (const auto& s : test_part.samples) {
      if (predict(model, s.x).cls != s.label) ++fold.misclassified;
    }
    fold.error = static_cast<double>(fold.misclassified) / static_cast<double>(fold.tested);
    total += fold.error;
    result.folds.push_back(fold);
  }
  result.mean_error = total / static_cast<double>(result.folds.size());
  return result;
}

// ---------------------------------------------------------------------------
// Model file:
//   myoeval-model
//   version=1 / kind=... / dimension=... / classes=NM,WF,...
//   gaussian: log_prior,<j>,v | mean,<j>,v... | log_det,<p>,v | precision,<p>,<row>,v...
//   knn:      k=<k> | point,<class>,v...

namespace {

void write_row(std::ostream& out, std::string_view tag, const std::string& key, const double* v,
               Eigen::Index n) {
  out << tag << ',' << key;
  for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_double(v[i]);
  out << '\n';
}

}  // namespace

void save_model(const ClassifierModel& model, std::ostream& out) {
  out << "myoeval-model\nversion=1\n";
  out << "kind=" << classifier_name(model.kind) << '\n';
  out << "dimension=" << model.dimension << '\n';
  out << "classes=";
  for (std::size_t i = 0; i < model.classes.size(); ++i) out << (i ? "," : "") << class_name(model.classes[i]);
  out << '\n';
  const auto d = static_cast<Eigen::Index>(model.dimension);
  if (const auto* g = std::get_if<GaussianParams>(&model.params)) {
    for (std::size_t j = 0; j < model.classes.size(); ++j) {
      write_row(out, "log_prior", std::to_string(j), &g->log_priors[j], 1);
      write_row(out, "mean", std::to_string(j), g->means[j].data(), d);
    }
    for (std::size_t p = 0; p < g->precisions.size(); ++p) {
      write_row(out, "log_det", std::to_string(p), &g->log_dets[p], 1);
      for (Eigen::Index r = 0; r < d; ++r) {
        const Eigen::VectorXd row = g->precisions[p].row(r).transpose();
        write_row(out, "precision", std::to_string(p) + "," + std::to_string(r), row.data(), d);
      }
    }
  } else {
    const auto& p = std::get<KnnParams>(model.params);
    out << "k=" << p.k << '\n';
    for (Eigen::Index i = 0; i < p.points.rows(); ++i) {
      const Eigen::VectorXd row = p.points.row(i).transpose();
      write_row(out, "point", std::string(class_name(p.labels[static_cast<std::size_t>(i)])), row.data(), d);
    }
  }
}

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
  write_file_atomically(path, [&](std::ostream& out) { save_model(model, out); });
}

ClassifierModel load_model(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    return FormatError("line " + std::to_string(line_no) + ": " + what);
  };
  auto next = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  auto expect_key = [&](std::string_view key) -> std::string {
    if (!next()) throw fail("unexpected end of file, expected '" + std::string(key) + "'");
    const auto eq = line.find('=');
    if (eq == std::string::npos || std::string_view(line).substr(0, eq) != key) {
      throw fail("expected field '" + std::string(key) + "'");
    }
    return line.substr(eq + 1);
  };

  if (!next() || line != "myoeval-model") throw fail("missing 'myoeval-model' magic line");
  if (expect_key("version") != "1") throw fail("unsupported model version");
  ClassifierModel model;
  try {
    model.kind = parse_classifier_kind(expect_key("kind"));
  } catch (const ParameterError& e) {
    throw fail(e.what());
  }
  if (!is_implemented(model.kind)) throw fail("model kind is not implemented");
  model.dimension = static_cast<std::size_t>(parse_int(expect_key("dimension"), "dimension", line_no));
  if (model.dimension == 0) throw fail("field 'dimension' must be positive");
  {
    const std::string names = expect_key("classes");
    std::vector<std::string_view> parts;
    split_csv(names, parts);
    for (auto p : parts) {
      const auto c = parse_class(p);
      if (!c) throw fail("unknown class '" + std::string(p) + "'");
      model.classes.push_back(*c);
    }
    if (model.classes.size() < 2) throw fail("model needs at least two classes");
  }
  const auto d = static_cast<Eigen::Index>(model.dimension);
  const std::size_t nc = model.classes.size();
  std::vector<std::string_view> f;
  auto values = [&](std::size_t offset, Eigen::Index expected) {
    if (f.size() != offset + static_cast<std::size_t>(expected)) {
      throw fail("expected " + std::to_string(expected) + " values");
    }
    Eigen::VectorXd v(expected);
    for (Eigen::Index i = 0; i < expected; ++i) {
      v[i] = parse_double(f[offset + static_cast<std::size_t>(i)], f[0], line_no);
    }
    return v;
  };
  auto index = [&](std::size_t pos, std::size_t limit) {
    if (f.size() <= pos) throw fail("missing index");
    const auto i = parse_int(f[pos], f[0], line_no);
    if (i < 0 || static_cast<std::size_t>(i) >= limit) throw fail("index out of range");
    return static_cast<std::size_t>(i);
  };

  if (model.kind == ClassifierKind::KNN) {
    KnnParams p;
    p.k = static_cast<std::size_t>(parse_int(expect_key("k"), "k", line_no));
    std::vector<Eigen::VectorXd> rows;
    while (next()) {
      if (line.empty()) continue;
      split_csv(line, f);
      if (f[0] != "point" || f.size() < 2) throw fail("expected a 'point' row");
      const auto c = parse_class(f[1]);
      if (!c) throw fail("unknown class '" + std::string(f[1]) + "'");
      p.labels.push_back(*c);
      rows.push_back(values(2, d));
    }
    if (p.k < 1 || p.k > rows.size()) throw fail("k is outside [1, number of points]");
    p.points.resize(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t i = 0; i < rows.size(); ++i) p.points.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    model.params = std::move(p);
    return model;
  }

  const std::size_t np = model.kind == ClassifierKind::LDA ? 1 : nc;
  GaussianParams g;
  g.means.assign(nc, Eigen::VectorXd());
  g.log_priors.assign(nc, std::numeric_limits<double>::quiet_NaN());
  g.precisions.assign(np, Eigen::MatrixXd::Constant(d, d, std::numeric_limits<double>::quiet_NaN()));
  g.log_dets.assign(np, std::numeric_limits<double>::quiet_NaN());
  while (next()) {
    if (line.empty()) continue;
    split_csv(line, f);
    if (f[0] == "log_prior") {
      g.log_priors[index(1, nc)] = values(2, 1)[0];
    } else if (f[0] == "mean") {
      const auto j = index(1, nc);
      g.means[j] = values(2, d);
    } else if (f[0] == "log_det") {
      g.log_dets[index(1, np)] = values(2, 1)[0];
    } else if (f[0] == "precision") {
      const auto p = index(1, np);
      const auto r = index(2, model.dimension);
      g.precisions[p].row(static_cast<Eigen::Index>(r)) = values(3, d).transpose();
    } else {
      throw fail("unknown row type '" + std::string(f[0]) + "'");
    }
  }
  for (std::size_t j = 0; j < nc; ++j) {
    if (g.means[j].size() != d || std::isnan(g.log_priors[j])) throw fail("incomplete class parameters");
  }
  for (std::size_t p = 0; p < np; ++p) {
    if (std::isnan(g.log_dets[p]) || g.precisions[p].hasNaN()) throw fail("incomplete precision matrix");
  }
  model.params = std::move(g);
  return model;
}

ClassifierModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open model '" + path.string() + "'");
  try {
    return load_model(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace myoeval
