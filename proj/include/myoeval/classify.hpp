#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "myoeval/decision.hpp"
#include "myoeval/features.hpp"
#include "myoeval/motion_class.hpp"

namespace myoeval {

// SVM, MLP and RF are recognised names without an implementation; training
// them throws NotImplementedError.
enum class ClassifierKind { LDA, QDA, KNN, SVM, MLP, RF };

std::string_view classifier_name(ClassifierKind kind);
ClassifierKind parse_classifier_kind(std::string_view name);  // ParameterError if unknown
bool is_implemented(ClassifierKind kind);

struct LabeledSample {
  FeatureVector x;
  MotionClass label = MotionClass::NM;
  int set_id = 0;
};

struct LabeledDataset {
  std::vector<LabeledSample> samples;

  std::size_t size() const { return samples.size(); }
  std::size_t dimension() const { return samples.empty() ? 0 : samples.front().x.size(); }
  // Present classes in ordinal order.
  std::vector<MotionClass> classes() const;
  std::vector<int> set_ids() const;  // ascending, unique

  void append(const FeatureFrameSeries& series, MotionClass label, int set_id);

  // Nonempty, equal dimensions, at least two classes. Throws ParameterError.
  void validate() const;
};

inline constexpr double kDefaultRegularization = 1e-6;
inline constexpr std::size_t kDefaultNeighbors = 5;

// Gaussian class-conditional models. LDA holds one shared precision matrix,
// QDA one per class.
struct GaussianParams {
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> precisions;
  std::vector<double> log_dets;
  std::vector<double> log_priors;
};

struct KnnParams {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> points;
  std::vector<MotionClass> labels;
  std::size_t k = kDefaultNeighbors;
};

struct ClassifierModel {
  ClassifierKind kind = ClassifierKind::LDA;
  std::vector<MotionClass> classes;
  std::size_t dimension = 0;
  std::variant<GaussianParams, KnnParams> params;
};

// Pooled within-class covariance (sum of class scatters over N - C) plus a
// ridge of regularization * trace / dim on the diagonal. Equal priors.
// Throws NumericalError if the result is singular or ill-conditioned.
ClassifierModel train_lda(const LabeledDataset& data, double regularization = kDefaultRegularization);

// Per-class unbiased covariances with the same ridge rule as LDA.
ClassifierModel train_qda(const LabeledDataset& data, double regularization = kDefaultRegularization);

// Stores the data verbatim. Throws ParameterError unless 1 <= k <= size.
ClassifierModel train_knn(const LabeledDataset& data, std::size_t k = kDefaultNeighbors);

struct TrainerSpec {
  ClassifierKind kind = ClassifierKind::LDA;
  double regularization = kDefaultRegularization;
  std::size_t k = kDefaultNeighbors;
};

ClassifierModel train(const LabeledDataset& data, const TrainerSpec& spec);

// LDA/QDA only: log prior plus Gaussian log density for each model class,
// in `model.classes` order.
std::vector<double> discriminants(const ClassifierModel& model, std::span<const double> x);

// LDA/QDA scores are the softmax of the discriminants; ties resolve to the
// lowest class ordinal. KNN scores are vote fractions; a tied vote goes to
// the class of the nearest neighbour among the tied classes.
Decision predict(const ClassifierModel& model, std::span<const double> x);

DecisionStream predict_stream(const ClassifierModel& model, const FeatureFrameSeries& series);

using Trainer = std::function<ClassifierModel(const LabeledDataset&)>;

struct FoldResult {
  int held_out_set = 0;
  std::size_t tested = 0;
  std::size_t misclassified = 0;
  double error = 0.0;  // fraction
};

struct CrossValidationResult {
  std::vector<FoldResult> folds;
  double mean_error = 0.0;  // fraction, averaged over folds
  std::vector<std::string> warnings;
};

// Trains on all sets but one and tests on the held-out set, for every set.
CrossValidationResult leave_one_set_out(const LabeledDataset& data, const Trainer& trainer);

// Versioned text format; doubles are written in shortest round-trip form.
void save_model(const ClassifierModel& model, std::ostream& out);
void save_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_model(std::istream& in);
ClassifierModel load_model(const std::filesystem::path& path);

}  // namespace myoeval
