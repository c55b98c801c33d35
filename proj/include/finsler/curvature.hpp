#pragma once

#include <limits>

#include <json.hpp>

#include "finsler/density.hpp"
#include "finsler/geodesy.hpp"
#include "finsler/spray.hpp"

namespace finsler {

/// Berwald form of the Jacobi endomorphism R^i_k(x, y):
///   2 d_k G^i - y^j d_j d_{y^k} G^i + 2 G^j d_{y^j} d_{y^k} G^i - d_{y^j} G^i d_{y^k} G^j.
Matrix jacobi_endomorphism(const FinslerMetricModel& metric, const ChartPoint& x, const Vector& y);

/// K(V, W) = g_V(R_V W, W) / (g_V(V,V) g_V(W,W) - g_V(V,W)^2).
double flag_curvature(const FinslerMetricModel& metric, const ChartPoint& x, const Vector& V, const Vector& W);

/// Ricci scalar: trace of R_V divided by F(V)^2.
double ricci(const FinslerMetricModel& metric, const ChartPoint& x, const Vector& V);

/// g_V-orthonormal basis of the g_V-complement of V, by Gram-Schmidt on `seed`
/// (columns; must span a complement of V).
std::vector<Vector> transverse_frame(const FinslerMetricModel& metric, const ChartPoint& x, const Vector& V,
                                     const Matrix& seed);

/// Sum of K(V, e_a) over the frame built from `seed`.
double ricci_from_frame(const FinslerMetricModel& metric, const ChartPoint& x, const Vector& V, const Matrix& seed);

/// tau = ln(sqrt(det g(x, y)) / sigma(x)).
double distortion(const FinslerMetricModel& metric, const VolumeDensity& sigma, const ChartPoint& x, const Vector& y);

struct SOptions {
  double step = 1e-3;      ///< geodesic time step for S
  double dot_step = 1e-2;  ///< time step of the 5-point stencil for S-dot
};

/// S(x, y), 1-homogeneous in y: central difference of tau along the geodesic.
double s_curvature(const FinslerMetricModel& metric, const VolumeDensity& sigma, const ChartPoint& x, const Vector& y,
                   const SOptions& options = {});

/// S-dot(x, y) = F^{-2} d/dt S(gamma'(t)) at t = 0 (0-homogeneous).
double s_dot(const FinslerMetricModel& metric, const VolumeDensity& sigma, const ChartPoint& x, const Vector& y,
             const SOptions& options = {});

inline constexpr double kMinusInfinity = -std::numeric_limits<double>::infinity();
inline constexpr double kSZeroTol = 1e-5;

/// Ric_N for N in [n, inf]; N = +inf selects the unweighted limit. Returns
/// kMinusInfinity on the N = n branch when |S| exceeds s_zero_tol.
double weighted_ricci(const FinslerMetricModel& metric, const VolumeDensity& sigma, const ChartPoint& x,
                      const Vector& V, double N, double s_zero_tol = kSZeroTol);

struct CurvatureReport {
  ChartPoint flag_base;
  Vector flagpole;
  Vector transverse;
  double K = 0.0;
  double Ric = 0.0;
  double S = 0.0;
  double S_dot = 0.0;
  double Ric_N = 0.0;
  double N_param = 0.0;

  nlohmann::json to_json() const;
};

CurvatureReport curvature_report(const FinslerMetricModel& metric, const VolumeDensity& sigma, const ChartPoint& x,
                                 const Vector& V, const Vector& W, double N);

/// Independent flag curvature: sectional curvature, in the plane (V, W), of
/// the osculating Riemannian metric g_Y of the unit geodesic field Y emanating
/// from gamma(-back) through x, with Christoffel symbols and their derivatives
/// taken by 4th-order finite differences of g_Y (step h).
double flag_curvature_osculating(const FinslerMetricModel& metric, const ChartPoint& x, const Vector& V,
                                 const Vector& W, double back = 0.5, double h = 2.5e-3);

}  // namespace finsler
