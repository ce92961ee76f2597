#pragma once

#include <functional>
#include <vector>

namespace palmfit {

// Regularised incomplete beta I(z; a, b), z in [0, 1]. Continued fraction
// with the symmetry switch at z = (a+1)/(a+b+2); this is the accuracy
// workhorse behind the void Palm intensity.
double reg_inc_beta(double z, double a, double b);

// Regularised lower incomplete gamma P(s, x), s > 0, x >= 0. Series for
// x < s+1, continued fraction otherwise.
double reg_lower_gamma(double s, double x);

// Gauss hypergeometric 2F1(1/2, b, 3/2, z) for z in [0, 1], the only family
// the uniform-in-ball sibling distance PDF needs (b = 1/2 - d/2). Power
// series for z < 1; the z = 1 value comes from the Gauss summation formula
// Gamma(c)Gamma(c-a-b) / (Gamma(c-a)Gamma(c-b)). For odd dimension the
// series terminates (b is a nonpositive integer).
double hyp2f1_matern(double b, double z);

// Euler beta function B(a, b).
double beta_fn(double a, double b);

// Volume of the d-ball of radius R: pi^(d/2) R^d / Gamma(d/2 + 1).
double sphere_volume(int d, double radius);

// Gauss-Legendre rule on [-1, 1]; nodes ascending, weights summing to 2.
// Exact for polynomials of degree <= 2*order - 1.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int order = 0;

  static QuadratureRule make(int order);
  // Shared immutable rules for the likelihood integrals. 64 is the
  // production order; 128 doubles it to estimate quadrature error.
  static const QuadratureRule& gauss64();
  static const QuadratureRule& gauss128();
};

double integrate(const QuadratureRule& rule, const std::function<double(double)>& f,
                 double lo, double hi);

double gauss_legendre(const std::function<double(double)>& f, double lo, double hi,
                      int order);

}  // namespace palmfit
