#include "hmlab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>
#include <json.hpp>

#include "hmlab/error.hpp"
#include "hmlab/rng.hpp"

namespace hmlab {
namespace {

constexpr double kRelativeKernelTol = 1e-6;

Mat orthonormal_columns(const Mat& z) {
  Eigen::HouseholderQR<Mat> qr(z);
  return qr.householderQ() * Mat::Identity(z.rows(), z.cols());
}

HessianSpectrum dense_spectrum(const SparseMat& matrix) {
  const Mat dense(matrix);
  Eigen::SelfAdjointEigenSolver<Mat> solver(dense, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw LabError(ErrorCode::EigensolveFailure, "dense symmetric eigensolve failed");
  }
  HessianSpectrum out;
  out.eigenvalues = solver.eigenvalues();
  out.lambda_max = out.eigenvalues.size() > 0 ? out.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  out.dense = true;
  return out;
}

HessianSpectrum iterative_spectrum(const SparseMat& matrix, const SpectrumOptions& options) {
  const int n = static_cast<int>(matrix.rows());
  const int nev = std::min(options.eigen_count, n);
  const int block = std::min(n, nev + std::max(8, nev / 2));
  const double lambda_max = largest_magnitude_eigenvalue(matrix);

  SparseMat shifted = matrix;
  for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) -= options.shift;
  Eigen::SimplicialLDLT<SparseMat> solver(shifted);
  if (solver.info() != Eigen::Success) {
    throw LabError(ErrorCode::EigensolveFailure, "shifted factorization failed");
  }

  Rng rng(0, "subspace-start");
  Mat q(n, block);
  for (int j = 0; j < block; ++j) {
    for (int i = 0; i < n; ++i) q(i, j) = rng.normal();
  }
  q = orthonormal_columns(q);

  const double tol = 1e-10 * std::max(lambda_max, 1.0);
  Vec theta;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    Mat z = solver.solve(q);
    if (solver.info() != Eigen::Success) {
      throw LabError(ErrorCode::EigensolveFailure, "shifted solve failed");
    }
    q = orthonormal_columns(z);
    const Mat sq = matrix * q;
    const Mat t = q.transpose() * sq;
    Eigen::SelfAdjointEigenSolver<Mat> ritz(0.5 * (t + t.transpose()));
    if (ritz.info() != Eigen::Success) {
      throw LabError(ErrorCode::EigensolveFailure, "Rayleigh-Ritz eigensolve failed");
    }
    // Order Ritz pairs by distance to the shift; the nearest converge first.
    std::vector<int> order(block);
    std::iota(order.begin(), order.end(), 0);
    const Vec vals = ritz.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(vals(a) - options.shift) < std::abs(vals(b) - options.shift);
    });
    Mat vecs(block, block);
    theta.resize(block);
    for (int j = 0; j < block; ++j) {
      vecs.col(j) = ritz.eigenvectors().col(order[j]);
      theta(j) = vals(order[j]);
    }
    q = q * vecs;
    const Mat residual = sq * vecs - q * theta.asDiagonal();
    double worst = 0.0;
    for (int j = 0; j < nev; ++j) worst = std::max(worst, residual.col(j).norm());
    if (worst <= tol) {
      HessianSpectrum out;
      Vec low = theta.head(nev);
      std::sort(low.data(), low.data() + low.size());
      out.eigenvalues = low;
      out.lambda_max = std::max(lambda_max, low.cwiseAbs().maxCoeff());
      out.dense = false;
      return out;
    }
  }
  throw LabError(ErrorCode::EigensolveFailure, "subspace iteration did not converge");
}

}  // namespace

double largest_magnitude_eigenvalue(const SparseMat& matrix, int iterations) {
  const int n = static_cast<int>(matrix.rows());
  if (n == 0) return 0.0;
  Vec x(n);
  // A random start avoids being orthogonal to symmetric top modes.
  Rng rng(0, "power-start");
  for (int i = 0; i < n; ++i) x(i) = rng.normal();
  x.normalize();
  for (int it = 0; it < iterations; ++it) {
    Vec y = matrix * x;
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    x = y / norm;
  }
  // The Rayleigh quotient converges twice as fast as the iterate norm.
  return std::abs(x.dot(matrix * x));
}

void assign_kernel(HessianSpectrum& spectrum, const SpectrumOptions& options) {
  Vec mags = spectrum.eigenvalues.cwiseAbs();
  std::sort(mags.data(), mags.data() + mags.size());
  const double floor = kRelativeKernelTol * spectrum.lambda_max;
  double tol = floor;
  if (options.kernel_tol) {
    tol = *options.kernel_tol;
  } else if (options.mode == KernelTolMode::Gap && mags.size() >= 2) {
    double best = 0.0;
    int best_k = -1;
    for (int k = 1; k < mags.size(); ++k) {
      const double lo = std::max(mags(k - 1), floor);
      const double hi = std::max(mags(k), floor);
      const double ratio = lo > 0.0 ? hi / lo : 0.0;
      if (ratio > best) {
        best = ratio;
        best_k = k;
      }
    }
    if (best_k > 0) {
      tol = std::sqrt(std::max(mags(best_k - 1), floor) * std::max(mags(best_k), floor));
    }
  }
  spectrum.kernel_tol = tol;
  spectrum.kernel_dim = 0;
  double next = 0.0;
  for (int i = 0; i < mags.size(); ++i) {
    if (mags(i) <= tol) {
      ++spectrum.kernel_dim;
    } else {
      next = mags(i);
      break;
    }
  }
  spectrum.gap_ratio = (next > 0.0 && tol > 0.0) ? next / tol : 0.0;
}

HessianSpectrum hessian_spectrum(const SparseMat& matrix, const SpectrumOptions& options) {
  if (matrix.rows() != matrix.cols()) {
    throw LabError(ErrorCode::ShapeMismatch, "spectrum needs a square matrix");
  }
  HessianSpectrum out = matrix.rows() < options.dense_limit ? dense_spectrum(matrix)
                                                            : iterative_spectrum(matrix, options);
  out.basis_dim = static_cast<int>(matrix.rows());
  assign_kernel(out, options);
  return out;
}

std::string HessianSpectrum::to_json() const {
  nlohmann::ordered_json j;
  j["eigenvalues"] = std::vector<double>(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
  j["kernel_dim"] = kernel_dim;
  j["kernel_tol"] = kernel_tol;
  j["gap_ratio"] = gap_ratio;
  j["lambda_max"] = lambda_max;
  j["basis_dim"] = basis_dim;
  j["solver"] = dense ? "dense" : "shift_invert";
  return j.dump(2);
}

}  // namespace hmlab
