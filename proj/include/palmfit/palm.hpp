#pragma once

#include <vector>

#include "palmfit/core.hpp"

namespace palmfit {

// Palm intensity as a function of distance, on a shared radius grid.
struct PalmCurve {
  enum class Kind { empirical, fitted };
  std::vector<double> radii;
  std::vector<double> intensity;
  Kind kind = Kind::empirical;
};

// Volume of the intersection of two d-balls of common radius R whose centers
// are distance r apart: v^d(R) * I(1 - (r/2R)^2; (d+1)/2, 1/2), zero once
// r >= 2R.
double intersection_volume(double r, double radius, int d);

// Void-process Palm intensity. lambda at r = 0, decaying to
// lambda * exp(-D v^d(R)) which it reaches exactly at r = 2R.
double palm_void(double r, const VoidParams& params, int d = 2);

// Thomas-process Palm intensity (2D): D nu + nu/(4 pi sigma^2) exp(-r^2/(4 sigma^2)).
double palm_thomas(double r, const ThomasParams& params);

// PDF of the distance between two independent points uniform in a d-ball of
// radius R (sibling distance of a Matern cluster). Supported on [0, 2R].
double matern_sibling_pdf(double r, double radius, int d = 2);

// CDF of the sibling distance; closed incomplete-beta form for d = 2,
// polynomial for d = 3, quadrature of the PDF otherwise.
double matern_sibling_cdf(double t, double radius, int d = 2);

// Matern-process Palm intensity in the analytically cancelled form (the
// r^(d-1) factors of the PDF and of the sphere surface cancel, so r -> 0 is
// finite). Exactly D nu for r >= 2R.
double palm_matern(double r, const MaternParams& params, int d = 2);

enum class EmpiricalCenters {
  all,       // every point acts as a center; no edge correction
  interior,  // only points >= t from the boundary act as centers
};

// Histogram estimate of the Palm intensity on (0, t]: each ordered pair is
// counted once (unordered pairs twice), bin k is normalised by
// (#centers) * annulus volume, which makes a homogeneous Poisson pattern
// flat at its intensity. No edge correction in the default mode; interior
// centers remove the boundary bias at the cost of discarding centers.
PalmCurve empirical_palm(const PointPattern& p, double t, int bins,
                         EmpiricalCenters centers = EmpiricalCenters::all);

// The model Palm intensity evaluated on a radius grid.
PalmCurve fitted_palm_curve(const ProcessParams& params,
                            const std::vector<double>& radii, int d = 2);

}  // namespace palmfit
