#include "palmfit/inference.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "palmfit/cccd.hpp"
#include "palmfit/parallel.hpp"

namespace palmfit {

std::vector<double> hierarchical_bootstrap_draws(
    const std::vector<std::vector<double>>& values, int replicates, RngStream& rng) {
  if (values.empty()) throw std::invalid_argument("hierarchical_bootstrap: no patients");
  for (const auto& images : values)
    if (images.empty())
      throw std::invalid_argument("hierarchical_bootstrap: patient without values");
  if (replicates < 1)
    throw std::invalid_argument("hierarchical_bootstrap: need at least one replicate");

  const std::size_t n_patients = values.size();
  std::vector<double> draws(replicates);
  // One substream per replicate: the draw sequence is fixed by the replicate
  // index, not by the parallel schedule.
  parallel_for(static_cast<std::size_t>(replicates), [&](std::size_t b) {
    RngStream local = rng.substream(b);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < n_patients; ++k) {
      const auto& images = values[local.uniform_index(n_patients)];
      const std::size_t m = images.size();
      for (std::size_t i = 0; i < m; ++i) {
        sum += images[local.uniform_index(m)];
        ++count;
      }
    }
    draws[b] = sum / static_cast<double>(count);
  });
  return draws;
}

BootstrapSummary hierarchical_bootstrap(const std::vector<std::vector<double>>& values,
                                        int replicates, RngStream& rng,
                                        const std::string& statistic_name) {
  const std::vector<double> draws = hierarchical_bootstrap_draws(values, replicates, rng);
  BootstrapSummary summary;
  summary.statistic = statistic_name;
  summary.replicates = replicates;
  summary.median = sample_quantile(draws, 0.5);
  summary.q025 = sample_quantile(draws, 0.025);
  summary.q975 = sample_quantile(draws, 0.975);
  return summary;
}

namespace {

void check_binary_response(std::span<const int> y) {
  bool saw0 = false, saw1 = false;
  for (int v : y) {
    if (v == 0) saw0 = true;
    else if (v == 1) saw1 = true;
    else throw std::invalid_argument("outcome values must be 0 or 1");
  }
  if (!saw0 || !saw1)
    throw std::invalid_argument("both outcome classes must be present");
}

}  // namespace

LogisticFit logistic_fit(std::span<const double> x, std::span<const int> y) {
  if (x.size() != y.size() || x.empty())
    throw std::invalid_argument("logistic_fit: size mismatch or empty input");
  check_binary_response(y);
  double mean = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("logistic_fit: non-finite predictor");
    mean += v;
  }
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(x.size());
  if (!(var > 0.0)) throw std::invalid_argument("logistic_fit: degenerate predictor");
  const double sd = std::sqrt(var);

  // Newton-Raphson on the standardised predictor. A standardised slope past
  // 15 means the logits are saturated (separation); such runs are not
  // treated as interior optima even when the gradient vanishes, and iterate
  // to the cap.
  constexpr double kSaturatedSlope = 15.0;
  double b0 = 0.0, b1 = 0.0;
  bool converged = false;
  constexpr int kMaxIter = 100;
  for (int it = 0; it < kMaxIter; ++it) {
    double g0 = 0.0, g1 = 0.0, h00 = 0.0, h01 = 0.0, h11 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double z = (x[i] - mean) / sd;
      const double p = 1.0 / (1.0 + std::exp(-(b0 + b1 * z)));
      const double resid = static_cast<double>(y[i]) - p;
      const double w = p * (1.0 - p);
      g0 += resid;
      g1 += z * resid;
      h00 += w;
      h01 += z * w;
      h11 += z * z * w;
    }
    if (std::max(std::fabs(g0), std::fabs(g1)) < 1e-8 &&
        std::fabs(b1) <= kSaturatedSlope) {
      converged = true;
      break;
    }
    const double det = h00 * h11 - h01 * h01;
    if (!(std::fabs(det) > 1e-300)) break;  // flat Hessian
    b0 += (h11 * g0 - h01 * g1) / det;
    b1 += (-h01 * g0 + h00 * g1) / det;
  }

  LogisticFit fit;
  fit.slope = b1 / sd;
  fit.intercept = b0 - b1 * mean / sd;
  fit.converged = converged;
  fit.separated = !converged;
  return fit;
}

double logistic_predict(const LogisticFit& fit, double x) {
  return 1.0 / (1.0 + std::exp(-(fit.intercept + fit.slope * x)));
}

RocCurve roc_curve(std::span<const double> scores, std::span<const int> y) {
  if (scores.size() != y.size() || scores.empty())
    throw std::invalid_argument("roc_curve: size mismatch or empty input");
  check_binary_response(y);

  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  double n_pos = 0.0, n_neg = 0.0;
  for (int v : y) (v == 1 ? n_pos : n_neg) += 1.0;

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  double tp = 0.0, fp = 0.0, area = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    // One step per group of tied scores.
    std::size_t j = i;
    double dtp = 0.0, dfp = 0.0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (y[order[j]] == 1 ? dtp : dfp) += 1.0;
      ++j;
    }
    const double prev_tpr = tp / n_pos;
    tp += dtp;
    fp += dfp;
    area += (dfp / n_neg) * 0.5 * (prev_tpr + tp / n_pos);
    curve.points.push_back({fp / n_neg, tp / n_pos});
    i = j;
  }
  curve.auroc = area;
  return curve;
}

double loocv_score(std::span<const double> x, std::span<const int> y,
                   std::vector<std::string>* warnings, CvCost cost) {
  if (x.size() != y.size() || x.size() < 3)
    throw std::invalid_argument("loocv_score: need at least 3 observations");
  check_binary_response(y);

  double total = 0.0;
  std::size_t folds = 0;
  for (std::size_t hold = 0; hold < x.size(); ++hold) {
    std::vector<double> xt;
    std::vector<int> yt;
    bool saw0 = false, saw1 = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i == hold) continue;
      xt.push_back(x[i]);
      yt.push_back(y[i]);
      (y[i] == 1 ? saw1 : saw0) = true;
    }
    if (!saw0 || !saw1) {
      if (warnings)
        warnings->push_back("loocv: fold " + std::to_string(hold) +
                            " skipped (single-class training set)");
      continue;
    }
    LogisticFit fit;
    try {
      fit = logistic_fit(xt, yt);
    } catch (const std::exception& e) {
      if (warnings)
        warnings->push_back("loocv: fold " + std::to_string(hold) + " skipped (" +
                            e.what() + ")");
      continue;
    }
    const double p = logistic_predict(fit, x[hold]);
    if (cost == CvCost::brier) {
      total += (static_cast<double>(y[hold]) - p) * (static_cast<double>(y[hold]) - p);
    } else {
      total += (p >= 0.5 ? 1 : 0) != y[hold] ? 1.0 : 0.0;
    }
    ++folds;
  }
  if (folds == 0) throw std::runtime_error("loocv_score: every fold was degenerate");
  return total / static_cast<double>(folds);
}

namespace {

struct PredictorSpec {
  ModelKind model;
  bool tumour;      // which class the fit runs on
  int param_index;  // index into params_to_vector
  const char* name;
};

// Thomas predictors D, delta = D nu, sigma and void predictors D, R, for each
// of the tumour (subscript t) and stroma (subscript s) patterns.
const PredictorSpec kThomasPredictors[] = {
    {ModelKind::thomas, true, 0, "D_t"},   {ModelKind::thomas, false, 0, "D_s"},
    {ModelKind::thomas, true, -1, "delta_t"}, {ModelKind::thomas, false, -1, "delta_s"},
    {ModelKind::thomas, true, 2, "sigma_t"},  {ModelKind::thomas, false, 2, "sigma_s"},
};
const PredictorSpec kVoidPredictors[] = {
    {ModelKind::void_process, true, 0, "Dv_t"},
    {ModelKind::void_process, false, 0, "Dv_s"},
    {ModelKind::void_process, true, 1, "R_t"},
    {ModelKind::void_process, false, 1, "R_s"},
};

}  // namespace

PipelineResult run_pipeline(const CohortDataset& cohort, const PipelineConfig& cfg) {
  if (cohort.patients.empty()) throw std::invalid_argument("run_pipeline: empty cohort");
  for (const auto& patient : cohort.patients)
    if (patient.images.empty())
      throw std::invalid_argument("run_pipeline: patient " + patient.id + " has no images");

  const bool with_thomas =
      std::find(cfg.models.begin(), cfg.models.end(), ModelKind::thomas) != cfg.models.end();
  const bool with_void =
      std::find(cfg.models.begin(), cfg.models.end(), ModelKind::void_process) !=
      cfg.models.end();
  if (!with_thomas && !with_void)
    throw std::invalid_argument("run_pipeline: no supported model requested");

  std::vector<PredictorSpec> predictors;
  if (with_thomas)
    predictors.insert(predictors.end(), std::begin(kThomasPredictors),
                      std::end(kThomasPredictors));
  if (with_void)
    predictors.insert(predictors.end(), std::begin(kVoidPredictors),
                      std::end(kVoidPredictors));

  struct ImageRef {
    std::size_t patient;
    std::size_t image;
  };
  std::vector<ImageRef> refs;
  for (std::size_t p = 0; p < cohort.patients.size(); ++p)
    for (std::size_t i = 0; i < cohort.patients[p].images.size(); ++i)
      refs.push_back({p, i});

  struct ImageFits {
    std::optional<FitResult> thomas_tumour, thomas_stroma, void_tumour, void_stroma;
    std::vector<std::string> warnings;
  };
  std::vector<ImageFits> fits(refs.size());

  parallel_for(refs.size(), [&](std::size_t k) {
    const auto& patient = cohort.patients[refs[k].patient];
    const auto& image = patient.images[refs[k].image];
    auto& slot = fits[k];
    const auto tag = [&](const char* what) {
      return "patient " + patient.id + " image " + image.id + " " + what;
    };

    double trunc = 0.0;
    try {
      trunc = cccd_radii(image.tumour, image.stroma, cfg.cccd_quantile).suggested_t;
    } catch (const std::exception& e) {
      slot.warnings.push_back(tag("cccd failed: ") + e.what());
      return;
    }

    const auto fit_one = [&](ModelKind model, const PointPattern& pattern,
                             const char* label) -> std::optional<FitResult> {
      try {
        FitConfig fc;
        fc.model = model;
        fc.optimizer = cfg.optimizer;
        if (model == ModelKind::void_process) return fit_void_auto(pattern, fc);
        fc.truncation = trunc;
        return fit_model(pattern, fc);
      } catch (const std::exception& e) {
        slot.warnings.push_back(tag(label) + " fit failed: " + e.what());
        return std::nullopt;
      }
    };

    if (with_thomas) {
      slot.thomas_tumour = fit_one(ModelKind::thomas, image.tumour, "thomas tumour");
      slot.thomas_stroma = fit_one(ModelKind::thomas, image.stroma, "thomas stroma");
    }
    if (with_void) {
      slot.void_tumour = fit_one(ModelKind::void_process, image.tumour, "void tumour");
      slot.void_stroma = fit_one(ModelKind::void_process, image.stroma, "void stroma");
    }
  });

  PipelineResult result;
  for (const auto& slot : fits)
    result.warnings.insert(result.warnings.end(), slot.warnings.begin(),
                           slot.warnings.end());

  const auto predictor_value = [](const PredictorSpec& spec,
                                  const ImageFits& slot) -> std::optional<double> {
    const std::optional<FitResult>* fit = nullptr;
    if (spec.model == ModelKind::thomas)
      fit = spec.tumour ? &slot.thomas_tumour : &slot.thomas_stroma;
    else
      fit = spec.tumour ? &slot.void_tumour : &slot.void_stroma;
    if (!fit->has_value()) return std::nullopt;
    if (spec.param_index < 0) return (*fit)->daughter_density;
    return params_to_vector((*fit)->params)[spec.param_index];
  };

  // Per-patient per-image predictor values, then per-patient means.
  RngStream master(cfg.seed);
  for (std::size_t s = 0; s < predictors.size(); ++s) {
    const auto& spec = predictors[s];

    std::vector<std::vector<double>> per_patient(cohort.patients.size());
    for (std::size_t k = 0; k < refs.size(); ++k)
      if (auto v = predictor_value(spec, fits[k])) per_patient[refs[k].patient].push_back(*v);

    ClassifierReport report;
    report.predictor = spec.name;
    std::vector<std::vector<double>> group_values[2];
    for (std::size_t p = 0; p < cohort.patients.size(); ++p) {
      if (per_patient[p].empty()) {
        result.warnings.push_back("patient " + cohort.patients[p].id +
                                  " dropped for predictor " + spec.name +
                                  " (no successful fits)");
        continue;
      }
      double mean = 0.0;
      for (double v : per_patient[p]) mean += v;
      mean /= static_cast<double>(per_patient[p].size());
      report.patient_ids.push_back(cohort.patients[p].id);
      report.patient_means.push_back(mean);
      report.outcomes.push_back(cohort.patients[p].outcome);
      group_values[cohort.patients[p].outcome == 1 ? 1 : 0].push_back(per_patient[p]);
    }

    for (int g = 0; g < 2; ++g) {
      const char* label = g == 1 ? "died" : "alive";
      if (group_values[g].empty()) {
        result.warnings.push_back(std::string("no patients in group ") + label +
                                  " for predictor " + spec.name);
        continue;
      }
      RngStream stream = master.substream(2 * s + g);
      BootstrapSummary summary =
          hierarchical_bootstrap(group_values[g], cfg.bootstrap_replicates, stream,
                                 std::string(spec.name) + ":" + label);
      result.tables.push_back(std::move(summary));
    }

    try {
      report.coefficients = logistic_fit(report.patient_means, report.outcomes);
      // The ROC scores are the per-patient logistic predictions, so a
      // predictor that is low in the died group still discriminates with
      // AUROC above one half.
      std::vector<double> scores(report.patient_means.size());
      for (std::size_t i = 0; i < scores.size(); ++i)
        scores[i] = logistic_predict(report.coefficients, report.patient_means[i]);
      report.roc = roc_curve(scores, report.outcomes);
      report.cv = loocv_score(report.patient_means, report.outcomes, &result.warnings);
      result.reports.push_back(std::move(report));
    } catch (const std::exception& e) {
      result.warnings.push_back("classification skipped for predictor " +
                                std::string(spec.name) + ": " + e.what());
    }
  }
  return result;
}

}  // namespace palmfit
