#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "palmfit/core.hpp"
#include "palmfit/fit.hpp"
#include "palmfit/rng.hpp"

namespace palmfit {

struct ImageData {
  std::string id;
  PointPattern tumour;
  PointPattern stroma;
};

struct PatientData {
  std::string id;
  int outcome = 0;  // 1 = died, 0 = survived
  std::vector<ImageData> images;
};

struct CohortDataset {
  std::vector<PatientData> patients;
};

struct BootstrapSummary {
  std::string statistic;
  double median = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
  int replicates = 0;
};

// Two-level bootstrap respecting the patient/image hierarchy: each replicate
// resamples patients with replacement, then images within each sampled
// patient with replacement; the replicate statistic is the mean over all
// resampled image values. Summary is the median and the 2.5% / 97.5%
// empirical quantiles across replicates.
BootstrapSummary hierarchical_bootstrap(const std::vector<std::vector<double>>& values,
                                        int replicates, RngStream& rng,
                                        const std::string& statistic_name = "");

// Replicate draws themselves, for distributional checks.
std::vector<double> hierarchical_bootstrap_draws(
    const std::vector<std::vector<double>>& values, int replicates, RngStream& rng);

struct LogisticFit {
  double intercept = 0.0;
  double slope = 0.0;
  bool converged = false;
  bool separated = false;  // coefficients hit the iteration cap diverging
};

// Two-parameter logistic regression by Newton-Raphson, gradient norm < 1e-8.
// Throws on a single-class response or a constant ("degenerate") predictor.
LogisticFit logistic_fit(std::span<const double> x, std::span<const int> y);

double logistic_predict(const LogisticFit& fit, double x);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // (0,0) .. (1,1), both coordinates nondecreasing
  double auroc = 0.5;
};

// Threshold sweep over unique scores, higher score predicts y = 1. Tied
// scores collapse into one step; the trapezoid area then equals the
// Mann-Whitney statistic with the tie correction.
RocCurve roc_curve(std::span<const double> scores, std::span<const int> y);

enum class CvCost {
  brier,             // mean squared error of the predicted probability
  misclassification  // error rate at the 0.5 threshold
};

// Leave-one-out cross-validated cost of the univariate logistic model.
// Folds whose training outcomes are single-class are skipped with a warning
// entry; throws when every fold is degenerate.
double loocv_score(std::span<const double> x, std::span<const int> y,
                   std::vector<std::string>* warnings = nullptr,
                   CvCost cost = CvCost::brier);

struct ClassifierReport {
  std::string predictor;
  std::vector<std::string> patient_ids;
  std::vector<double> patient_means;
  std::vector<int> outcomes;
  LogisticFit coefficients;
  RocCurve roc;
  double cv = 0.0;
};

struct PipelineConfig {
  std::vector<ModelKind> models{ModelKind::thomas, ModelKind::void_process};
  int bootstrap_replicates = 1000;
  std::uint64_t seed = 1;
  double cccd_quantile = 0.9;
  OptimizerConfig optimizer;
};

struct PipelineResult {
  // statistic name -> per-outcome-group bootstrap summary (key "alive"/"died")
  std::vector<BootstrapSummary> tables;
  std::vector<ClassifierReport> reports;
  std::vector<std::string> warnings;
};

// Per-image Palm-likelihood fits (Thomas predictors D, delta = D nu, sigma;
// void predictors D and R, each for tumour and stroma), per-patient means,
// group bootstrap tables and per-predictor ROC / LOOCV reports.
PipelineResult run_pipeline(const CohortDataset& cohort, const PipelineConfig& cfg);

}  // namespace palmfit
