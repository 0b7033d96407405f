#pragma once

#include <optional>
#include <string>

#include "hmlab/types.hpp"

namespace hmlab {

enum class KernelTolMode {
  Relative,  // kernel_tol = 1e-6 * largest |eigenvalue|
  Gap,       // placed geometrically inside the widest gap of the low spectrum
};

struct SpectrumOptions {
  std::optional<double> kernel_tol;   // explicit value overrides the mode
  KernelTolMode mode = KernelTolMode::Relative;
  int dense_limit = 3000;             // dense solve below this many unknowns
  int eigen_count = 32;               // eigenvalues computed by the iterative path
  int max_iterations = 500;
  double shift = -1e-2;               // shift-invert centre, kept off the kernel
};

/// Low end of the spectrum of a symmetric matrix with kernel bookkeeping.
struct HessianSpectrum {
  Vec eigenvalues;            // ascending; all of them on the dense path
  int kernel_dim = 0;         // #{|lambda| <= kernel_tol}
  double kernel_tol = 0.0;
  double gap_ratio = 0.0;     // smallest |lambda| above kernel_tol, over kernel_tol
  double lambda_max = 0.0;    // largest |eigenvalue|
  int basis_dim = 0;
  bool dense = true;

  std::string to_json() const;
};

/// Eigenvalues of a symmetric sparse matrix. Dense Eigen solve for small
/// problems; otherwise block shift-invert subspace iteration with
/// Rayleigh-Ritz, which resolves repeated eigenvalues.
/// Throws EigensolveFailure on factorization failure or non-convergence.
HessianSpectrum hessian_spectrum(const SparseMat& matrix, const SpectrumOptions& options = {});

/// Kernel bookkeeping on precomputed eigenvalues (ascending or not).
void assign_kernel(HessianSpectrum& spectrum, const SpectrumOptions& options);

/// Largest |eigenvalue| by power iteration.
double largest_magnitude_eigenvalue(const SparseMat& matrix, int iterations = 300);

}  // namespace hmlab
