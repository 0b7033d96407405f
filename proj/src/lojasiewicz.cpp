#include "hmlab/lojasiewicz.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/Cholesky>
#include <json.hpp>

#include "hmlab/charts.hpp"
#include "hmlab/energy.hpp"
#include "hmlab/error.hpp"

namespace hmlab {
namespace {

constexpr int kTestModes = 8;
constexpr int kMinFitPoints = 8;
constexpr double kMinDecades = 2.0;
constexpr double kTailThreshold = 1e-3;
constexpr int kMinTail = 20;
constexpr double kDeterminedR2 = 0.95;
constexpr double kTieR2 = 1e-3;

ExponentCheck admissible(std::string reason) { return {true, std::move(reason)}; }
ExponentCheck rejected(std::string reason) { return {false, std::move(reason)}; }

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// |B c|_{W^{1,q}} for the coefficient matrix c (modes x components).
double test_norm(const SourceMesh& mesh, const Field& basis, const Mat& coeffs, double q) {
  return sobolev_norm(mesh, Field(basis * coeffs), 1, q);
}

}  // namespace

std::string to_string(InequalityVariant v) { return v == InequalityVariant::Wk ? "Wk" : "L2"; }

InequalityVariant parse_variant(const std::string& text) {
  if (text == "Wk" || text == "wk" || text == "WK") return InequalityVariant::Wk;
  if (text == "L2" || text == "l2") return InequalityVariant::L2;
  throw LabError(ErrorCode::ConfigParse, "unknown inequality variant '" + text + "'");
}

ExponentCheck validate_exponents(int d, int k, double p, InequalityVariant variant) {
  if (d < 2) return rejected("dimension d >= 2 required");
  if (k < 1) return rejected("order k >= 1 required");
  if (!(p >= 1.0) || !std::isfinite(p)) return rejected("exponent p must be finite and >= 1");
  if (k == 2 && !(p > 1.0)) return rejected("k = 2 requires p > 1");
  if (!(p > 1.0)) return rejected("p in (1, inf) required");
  if (!(k * p > d)) return rejected("kp > d fails");
  if (variant == InequalityVariant::Wk) return admissible("W^{k-2,p} inequality: kp > d, p > 1");

  if (k == 1) {
    if (d >= 4) {
      return rejected("L2 inequality excludes k = 1 with d >= 4: p <= 2d/(d-2) is incompatible with p > d");
    }
    if (d == 2) {
      return p > 2.0 ? admissible("L2 inequality: d = 2, k = 1, 2 < p < inf")
                     : rejected("L2 inequality with d = 2, k = 1 requires 2 < p < inf");
    }
    return p > 3.0 && p <= 6.0 ? admissible("L2 inequality: d = 3, k = 1, 3 < p <= 6")
                               : rejected("L2 inequality with d = 3, k = 1 requires 3 < p <= 6");
  }
  return p >= 2.0 ? admissible("L2 inequality: k >= 2, 2 <= p < inf, kp > d")
                  : rejected("L2 inequality with k >= 2 requires 2 <= p < inf");
}

std::string GradientNorm::describe() const {
  if (kind == Kind::L2) return "L2";
  return "W^{" + std::to_string(k - 2) + "," + fmt17(p) + "}";
}

double dual_sobolev_norm(const SourceMesh& mesh, const Field& m, double p) {
  if (!(p > 1.0)) throw LabError(ErrorCode::InvalidExponents, "dual norm needs p > 1");
  const double q = p / (p - 1.0);
  const Field basis = mesh.band_limited_modes(kTestModes);
  const int modes = static_cast<int>(basis.cols());
  const int comps = static_cast<int>(m.cols());

  // <m, B c> = sum_c b_c . c_c with b = B^T A m.
  const Mat b = basis.transpose() * mesh.vertex_areas().asDiagonal() * m;
  // W^{1,2} Gram matrix of the test space: B^T (A + L) B.
  const Mat gram = basis.transpose() * mesh.vertex_areas().asDiagonal() * basis +
                   basis.transpose() * (mesh.stiffness() * basis);
  Eigen::LDLT<Mat> ldlt(gram);
  Mat c = ldlt.solve(b);
  if (b.norm() == 0.0) return 0.0;
  auto objective = [&](const Mat& coeffs) {
    const double denom = test_norm(mesh, basis, coeffs, q);
    if (!(denom > 0.0)) return 0.0;
    return (b.cwiseProduct(coeffs)).sum() / denom;
  };
  double best = objective(c);
  if (q == 2.0) return best;

  // Normalized gradient ascent from the q = 2 maximizer, central differences.
  c /= c.norm();
  double step = 0.1;
  for (int iter = 0; iter < 200 && step > 1e-10; ++iter) {
    Mat grad(modes, comps);
    const double h = 1e-6;
    for (int i = 0; i < modes; ++i) {
      for (int j = 0; j < comps; ++j) {
        Mat cp = c, cm = c;
        cp(i, j) += h;
        cm(i, j) -= h;
        grad(i, j) = (objective(cp) - objective(cm)) / (2.0 * h);
      }
    }
    const double gnorm = grad.norm();
    if (!(gnorm > 0.0)) break;
    bool improved = false;
    while (step > 1e-10) {
      Mat trial = c + step * grad / gnorm;
      trial /= trial.norm();
      const double value = objective(trial);
      if (value > best) {
        best = value;
        c = trial;
        improved = true;
        step *= 1.5;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  return best;
}

double gradient_norm(const SourceMesh& mesh, const Field& m, const GradientNorm& norm) {
  if (norm.kind == GradientNorm::Kind::L2) return l2_norm(mesh, m);
  const int order = norm.k - 2;
  if (order == -1) return dual_sobolev_norm(mesh, m, norm.p);
  if (order < -1) throw LabError(ErrorCode::UnsupportedOrder, "gradient norm needs k >= 1");
  return sobolev_norm(mesh, m, order, norm.p);
}

std::vector<MapField> sample_neighborhood(const MapField& f_limit, double sigma, int count, int k,
                                          double p, std::uint64_t seed) {
  if (count < 0) throw LabError(ErrorCode::InvalidSpec, "sample count must be >= 0");
  if (!(sigma > 0.0)) throw LabError(ErrorCode::InvalidSpec, "sigma must be positive");
  std::vector<MapField> out;
  out.reserve(count);
  const SourceMesh& mesh = f_limit.mesh();
  const Rng root(seed, "neighborhood");
  for (int s = 0; s < count; ++s) {
    Rng rng = root.substream(static_cast<std::uint64_t>(s));
    TangentField u = random_tangent_field(f_limit, rng);
    const double norm = sobolev_norm(mesh, u.values, k, p);
    if (!(norm > 0.0)) continue;
    u.values *= sigma * rng.uniform() / norm;
    // The chart can stretch distances slightly; shrink until inside the ball.
    for (int attempt = 0;; ++attempt) {
      MapField f = chart_push(f_limit, u);
      if (sobolev_norm(mesh, f.values() - f_limit.values(), k, p) < sigma) {
        out.push_back(std::move(f));
        break;
      }
      if (attempt >= 50) {
        throw LabError(ErrorCode::ChartRadiusExceeded, "could not place sample inside sigma");
      }
      u.values *= 0.5;
    }
  }
  return out;
}

InequalityReport verify_inequality(const std::vector<MapField>& samples, const MapField& f_limit,
                                   double theta, double z, const GradientNorm& norm) {
  InequalityReport report;
  report.theta = theta;
  report.z = z;
  report.norm = norm;
  const double e_limit = energy(f_limit);
  report.min_margin = std::numeric_limits<double>::infinity();
  report.min_ratio = std::numeric_limits<double>::infinity();
  for (const MapField& f : samples) {
    InequalityRow row;
    row.energy_gap = std::abs(energy(f) - e_limit);
    row.grad_norm = gradient_norm(f.mesh(), tension(f).values, norm);
    const double bound = z * std::pow(row.energy_gap, theta);
    if (row.energy_gap > 0.0) {
      row.ratio = row.grad_norm / std::pow(row.energy_gap, theta);
      report.min_ratio = std::min(report.min_ratio, row.ratio);
    } else {
      row.ratio = row.grad_norm > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    report.min_margin = std::min(report.min_margin, row.grad_norm - bound);
    report.rows.push_back(row);
  }
  if (report.rows.empty()) report.min_margin = 0.0;
  if (!std::isfinite(report.min_ratio)) report.min_ratio = 0.0;
  return report;
}

std::string InequalityReport::to_csv() const {
  std::string out = "energy_gap,grad_norm,ratio\n";
  for (const InequalityRow& r : rows) {
    out += fmt17(r.energy_gap) + "," + fmt17(r.grad_norm) + "," + fmt17(r.ratio) + "\n";
  }
  return out;
}

std::string InequalityReport::to_json() const {
  nlohmann::ordered_json j;
  j["theta"] = theta;
  j["z"] = z;
  j["norm"] = norm.describe();
  j["sample_count"] = rows.size();
  j["min_margin"] = min_margin;
  j["min_ratio"] = min_ratio;
  j["holds"] = min_margin >= 0.0;
  return j.dump(2);
}

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw LabError(ErrorCode::InsufficientSamples, "line fit needs 2 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw LabError(ErrorCode::DegenerateWindow, "abscissae are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : (ss_res == 0.0 ? 1.0 : 0.0);
  return fit;
}

FitWindow default_window(const std::vector<FitPoint>& points, double limit_grad_norm,
                         double limit_energy) {
  const double floor = std::max(limit_grad_norm * limit_grad_norm, 1e-13 * std::abs(limit_energy));
  double e_max = 0.0;
  for (const FitPoint& pt : points) e_max = std::max(e_max, pt.energy_gap);
  return {10.0 * floor, e_max / 10.0};
}

LojasiewiczFit fit_exponent(const std::vector<FitPoint>& points, const FitWindow& window,
                            const GradientNorm& norm) {
  if (!(window.upper > 0.0) ||
      (window.lower > 0.0 && std::log10(window.upper / window.lower) < kMinDecades)) {
    throw LabError(ErrorCode::InsufficientDecades, "fit window spans fewer than two decades");
  }
  std::vector<double> x, y;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const FitPoint& pt : points) {
    if (!(pt.energy_gap > 0.0) || !(pt.grad_norm > 0.0)) continue;
    if (pt.energy_gap < window.lower || pt.energy_gap > window.upper) continue;
    x.push_back(std::log(pt.energy_gap));
    y.push_back(std::log(pt.grad_norm));
    lo = std::min(lo, pt.energy_gap);
    hi = std::max(hi, pt.energy_gap);
  }
  if (static_cast<int>(x.size()) < kMinFitPoints) {
    throw LabError(ErrorCode::DegenerateWindow,
                   "only " + std::to_string(x.size()) + " points inside the fit window");
  }
  if (std::log10(hi / lo) < kMinDecades) {
    throw LabError(ErrorCode::InsufficientDecades, "fitted gaps span fewer than two decades");
  }
  const LineFit line = least_squares(x, y);
  LojasiewiczFit fit;
  fit.theta_hat = line.slope;
  fit.z_hat = std::exp(line.intercept);
  fit.window = window;
  fit.r_squared = line.r_squared;
  fit.point_count = static_cast<int>(x.size());
  fit.norm_used = norm;
  return fit;
}

std::vector<FitPoint> trace_points(const FlowTrace& trace) {
  if (trace.samples.empty()) throw LabError(ErrorCode::EmptyTrace, "trace has no samples");
  const double e_final = trace.samples.back().energy;
  std::vector<FitPoint> out;
  out.reserve(trace.samples.size());
  for (const FlowSample& s : trace.samples) out.push_back({s.energy - e_final, s.grad_norm});
  return out;
}

LojasiewiczFit fit_exponent(const FlowTrace& trace, std::optional<FitWindow> window) {
  const std::vector<FitPoint> points = trace_points(trace);
  const FlowSample& last = trace.samples.back();
  const FitWindow w = window ? *window : default_window(points, last.grad_norm, last.energy);
  return fit_exponent(points, w);
}

std::string LojasiewiczFit::to_json() const {
  nlohmann::ordered_json j;
  j["theta_hat"] = theta_hat;
  j["z_hat"] = z_hat;
  j["window"] = {window.lower, window.upper};
  j["r_squared"] = r_squared;
  j["point_count"] = point_count;
  j["norm_used"] = norm_used.kind == GradientNorm::Kind::L2 ? "L2" : "Wk_minus_2_p";
  return j.dump(2);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::MorseBott: return "MorseBott";
    case Verdict::Degenerate: return "Degenerate";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "Unknown";
}

Verdict morse_bott_verdict(int kernel_dim, std::optional<int> expected, double gap_ratio) {
  if (!expected || !(gap_ratio >= 10.0)) return Verdict::Inconclusive;
  return kernel_dim == *expected ? Verdict::MorseBott : Verdict::Degenerate;
}

MorseBottReport morse_bott_report(const MapField& f_limit, std::optional<int> expected_critical_dim,
                                  const SpectrumOptions& options, double grad_tol) {
  const double g = l2_norm(f_limit.mesh(), tension(f_limit).values);
  if (!(g <= 10.0 * grad_tol)) {
    throw LabError(ErrorCode::NotCritical, "tension norm " + fmt17(g) + " exceeds 10 grad_tol");
  }
  const HessianMatrix hessian = hessian_matrix(f_limit);
  MorseBottReport report;
  report.spectrum = hessian_spectrum(hessian.matrix, options);
  report.hessian_asymmetry = hessian.asymmetry;
  report.kernel_dim = report.spectrum.kernel_dim;
  report.expected_critical_dim = expected_critical_dim;
  report.gap_ratio = report.spectrum.gap_ratio;
  report.verdict = morse_bott_verdict(report.kernel_dim, expected_critical_dim, report.gap_ratio);
  if (report.verdict == Verdict::MorseBott) report.predicted_theta = 0.5;
  return report;
}

std::string MorseBottReport::to_json() const {
  nlohmann::ordered_json j;
  j["kernel_dim"] = kernel_dim;
  j["expected_critical_dim"] = expected_critical_dim ? nlohmann::ordered_json(*expected_critical_dim)
                                                     : nlohmann::ordered_json(nullptr);
  j["gap_ratio"] = gap_ratio;
  j["kernel_tol"] = spectrum.kernel_tol;
  j["verdict"] = to_string(verdict);
  j["predicted_theta"] =
      predicted_theta ? nlohmann::ordered_json(*predicted_theta) : nlohmann::ordered_json(nullptr);
  j["hessian_asymmetry"] = hessian_asymmetry;
  return j.dump(2);
}

std::string to_string(ConvergenceKind k) {
  switch (k) {
    case ConvergenceKind::Exponential: return "Exponential";
    case ConvergenceKind::PowerLaw: return "PowerLaw";
    case ConvergenceKind::Undetermined: return "Undetermined";
  }
  return "Unknown";
}

ConvergenceReport convergence_classifier(const FlowTrace& trace) {
  std::vector<double> t, log_t, log_g;
  for (const FlowSample& s : trace.samples) {
    if (s.t > 0.0 && s.grad_norm > 0.0 && s.grad_norm < kTailThreshold) {
      t.push_back(s.t);
      log_t.push_back(std::log(s.t));
      log_g.push_back(std::log(s.grad_norm));
    }
  }
  if (static_cast<int>(t.size()) < kMinTail) {
    throw LabError(ErrorCode::InsufficientTail,
                   "tail has " + std::to_string(t.size()) + " samples below 1e-3");
  }
  const LineFit expo = least_squares(t, log_g);
  const LineFit power = least_squares(log_t, log_g);
  ConvergenceReport report;
  report.tail_count = static_cast<int>(t.size());
  report.rate = -expo.slope;
  report.exponent = power.slope;
  report.r2_exponential = expo.r_squared;
  report.r2_power = power.r_squared;
  if (expo.r_squared < kDeterminedR2 && power.r_squared < kDeterminedR2) {
    report.kind = ConvergenceKind::Undetermined;
  } else if (expo.r_squared >= power.r_squared - kTieR2) {
    report.kind = ConvergenceKind::Exponential;
  } else {
    report.kind = ConvergenceKind::PowerLaw;
  }
  return report;
}

std::string ConvergenceReport::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = to_string(kind);
  j["rate"] = rate;
  j["exponent"] = exponent;
  j["r2_exponential"] = r2_exponential;
  j["r2_power"] = r2_power;
  j["tail_count"] = tail_count;
  return j.dump(2);
}

}  // namespace hmlab
