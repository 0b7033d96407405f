#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hmlab/flow.hpp"
#include "hmlab/map_field.hpp"
#include "hmlab/spectrum.hpp"

namespace hmlab {

// ---- exponent hypotheses ---------------------------------------------------

enum class InequalityVariant { Wk, L2 };

std::string to_string(InequalityVariant v);
/// Accepts "Wk", "wk", "L2", "l2". Throws ConfigParse otherwise.
InequalityVariant parse_variant(const std::string& text);

struct ExponentCheck {
  bool admissible = false;
  std::string reason;   // names the clause that decided the outcome
};

/// Hypotheses of the gradient inequalities on (dimension d, order k, exponent p).
/// Wk: d >= 2, k >= 1, p in (1, inf), kp > d, and p > 1 when k = 2.
/// L2 additionally: (d = 2, k = 1, p > 2), (d = 3, k = 1, 3 < p <= 6) or
/// (k >= 2, p >= 2, kp > d); k = 1 with d >= 4 is excluded.
ExponentCheck validate_exponents(int d, int k, double p, InequalityVariant variant);

// ---- norms of the gradient ---------------------------------------------------

/// Norm family used for |M(f)|: L2, or the discrete W^{k-2,p} family.
struct GradientNorm {
  enum class Kind { L2, WkMinus2p } kind = Kind::L2;
  int k = 1;
  double p = 2.0;

  std::string describe() const;
};

/// Discrete W^{-1,p} norm of a field: sup of <m, v> over band-limited ambient
/// test fields v (8 modes per component) with |v|_{W^{1,p'}} = 1.
double dual_sobolev_norm(const SourceMesh& mesh, const Field& m, double p);

/// |m| in the requested family.
double gradient_norm(const SourceMesh& mesh, const Field& m, const GradientNorm& norm);

// ---- sampling and verification ---------------------------------------------

/// Seeded maps chart_push(f_limit, u) with band-limited tangent u scaled so
/// |u|_{W^{k,p}} is uniform in (0, sigma); each returned map obeys
/// |f - f_limit|_{W^{k,p}} < sigma.
std::vector<MapField> sample_neighborhood(const MapField& f_limit, double sigma, int count, int k,
                                          double p, std::uint64_t seed);

struct InequalityRow {
  double energy_gap = 0.0;  // |E(f) - E(f_limit)|
  double grad_norm = 0.0;
  double ratio = 0.0;       // grad_norm / energy_gap^theta, 0 when both vanish
};

struct InequalityReport {
  std::vector<InequalityRow> rows;
  double min_margin = 0.0;  // min of grad_norm - z energy_gap^theta
  double min_ratio = 0.0;   // over rows with a positive gap
  double theta = 0.5;
  double z = 1.0;
  GradientNorm norm;

  std::string to_csv() const;   // energy_gap,grad_norm,ratio
  std::string to_json() const;
};

InequalityReport verify_inequality(const std::vector<MapField>& samples, const MapField& f_limit,
                                   double theta, double z, const GradientNorm& norm);

// ---- exponent fit -------------------------------------------------------------

struct FitPoint {
  double energy_gap = 0.0;
  double grad_norm = 0.0;
};

struct FitWindow {
  double lower = 0.0;
  double upper = 0.0;
};

struct LojasiewiczFit {
  double theta_hat = 0.0;
  double z_hat = 0.0;
  FitWindow window;
  double r_squared = 0.0;
  int point_count = 0;
  GradientNorm norm_used;

  std::string to_json() const;
};

/// Default window [10 e_floor, e_max / 10], e_floor = max(|M(f_limit)|^2, 1e-13 |E_limit|).
FitWindow default_window(const std::vector<FitPoint>& points, double limit_grad_norm,
                         double limit_energy);

/// Least squares of log grad_norm on log energy_gap inside the window.
/// Throws DegenerateWindow with fewer than 8 points and InsufficientDecades
/// when the retained gaps span less than two decades.
LojasiewiczFit fit_exponent(const std::vector<FitPoint>& points, const FitWindow& window,
                            const GradientNorm& norm = {});

/// Trace form: the final iterate is the limit, gaps are E(t) - E_final.
LojasiewiczFit fit_exponent(const FlowTrace& trace, std::optional<FitWindow> window = {});

std::vector<FitPoint> trace_points(const FlowTrace& trace);

// ---- Morse-Bott structure -----------------------------------------------------

enum class Verdict { MorseBott, Degenerate, Inconclusive };
std::string to_string(Verdict v);

struct MorseBottReport {
  int kernel_dim = 0;
  std::optional<int> expected_critical_dim;
  double gap_ratio = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  std::optional<double> predicted_theta;
  HessianSpectrum spectrum;
  double hessian_asymmetry = 0.0;

  std::string to_json() const;
};

/// Throws NotCritical when |M(f_limit)|_{L^2} > 10 grad_tol.
MorseBottReport morse_bott_report(const MapField& f_limit, std::optional<int> expected_critical_dim,
                                  const SpectrumOptions& options = {}, double grad_tol = 1e-9);

/// Verdict from the kernel bookkeeping alone.
Verdict morse_bott_verdict(int kernel_dim, std::optional<int> expected, double gap_ratio);

// ---- convergence rate -------------------------------------------------------------

enum class ConvergenceKind { Exponential, PowerLaw, Undetermined };
std::string to_string(ConvergenceKind k);

struct ConvergenceReport {
  ConvergenceKind kind = ConvergenceKind::Undetermined;
  double rate = 0.0;        // |M| ~ exp(-rate t)
  double exponent = 0.0;    // |M| ~ t^exponent
  double r2_exponential = 0.0;
  double r2_power = 0.0;
  int tail_count = 0;

  std::string to_json() const;
};

/// Fits the tail (|M| < 1e-3, t > 0) against both models.
/// Throws InsufficientTail with fewer than 20 tail samples.
ConvergenceReport convergence_classifier(const FlowTrace& trace);

/// Ordinary least squares y = a + b x.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
};
LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hmlab
