#include <cmath>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "hmlab/energy.hpp"
#include "hmlab/spectrum.hpp"
#include "oracles.hpp"
#include "support.hpp"

using hmlab::HessianSpectrum;
using hmlab::KernelTolMode;
using hmlab::MapField;
using hmlab::SparseMat;
using hmlab::SpectrumOptions;
using hmlab::Vec;

namespace {

SparseMat diagonal(const std::vector<double>& values) {
  SparseMat m(static_cast<int>(values.size()), static_cast<int>(values.size()));
  for (int i = 0; i < static_cast<int>(values.size()); ++i) m.insert(i, i) = values[i];
  m.makeCompressed();
  return m;
}

HessianSpectrum synthetic(const std::vector<double>& eigenvalues) {
  HessianSpectrum s;
  s.eigenvalues = Eigen::Map<const Vec>(eigenvalues.data(), static_cast<int>(eigenvalues.size()));
  s.lambda_max = s.eigenvalues.cwiseAbs().maxCoeff();
  return s;
}

}  // namespace

TEST(Spectrum, DiagonalMatrixEigenvaluesComeBackSorted) {
  const auto s = hmlab::hessian_spectrum(diagonal({3.0, 0.0, -1.0, 7.0, 1e-9}));
  ASSERT_EQ(s.eigenvalues.size(), 5);
  EXPECT_DOUBLE_EQ(s.eigenvalues(0), -1.0);
  EXPECT_DOUBLE_EQ(s.eigenvalues(4), 7.0);
  EXPECT_DOUBLE_EQ(s.lambda_max, 7.0);
  EXPECT_EQ(s.kernel_dim, 2);
  EXPECT_EQ(s.basis_dim, 5);
  EXPECT_TRUE(s.dense);
  EXPECT_LE(s.kernel_dim, s.basis_dim);
}

TEST(Spectrum, ExplicitToleranceOverridesTheMode) {
  SpectrumOptions opts;
  opts.kernel_tol = 1.5;
  const auto s = hmlab::hessian_spectrum(diagonal({3.0, 0.0, -1.0, 7.0}), opts);
  EXPECT_EQ(s.kernel_dim, 2);
  EXPECT_DOUBLE_EQ(s.kernel_tol, 1.5);
  EXPECT_DOUBLE_EQ(s.gap_ratio, 2.0);
}

TEST(Spectrum, GapModeCountsSmallNegativeModesAsKernel) {
  HessianSpectrum s = synthetic({-3e-3, -3e-3, -3e-3, 1e-12, 2e-12, -1e-12, 4.0, 4.0, 4.0, 10.0, 1000.0});
  SpectrumOptions relative;
  hmlab::assign_kernel(s, relative);
  EXPECT_EQ(s.kernel_dim, 3);
  SpectrumOptions gap;
  gap.mode = KernelTolMode::Gap;
  hmlab::assign_kernel(s, gap);
  EXPECT_EQ(s.kernel_dim, 6);
  EXPECT_NEAR(s.kernel_tol, std::sqrt(3e-3 * 4.0), 1e-15);
  EXPECT_NEAR(s.gap_ratio, 4.0 / std::sqrt(3e-3 * 4.0), 1e-9);
}

TEST(Spectrum, IterativePathMatchesTheDenseSolve) {
  const MapField f = [] {
    hmlab::Rng rng(3, "near-identity");
    return hmlab::perturbed_map(
        hmlab::identity_map(support::sphere_mesh(3), support::sphere()), 0.2, rng);
  }();
  const hmlab::HessianMatrix H = hmlab::hessian_matrix(f);
  const auto dense = hmlab::hessian_spectrum(H.matrix);
  SpectrumOptions opts;
  opts.dense_limit = 0;
  opts.eigen_count = 16;
  const auto iterative = hmlab::hessian_spectrum(H.matrix, opts);
  EXPECT_TRUE(dense.dense);
  EXPECT_FALSE(iterative.dense);
  ASSERT_GE(iterative.eigenvalues.size(), 16);
  for (int i = 0; i < 16; ++i) {
    EXPECT_NEAR(iterative.eigenvalues(i), dense.eigenvalues(i), 1e-8 * dense.lambda_max) << i;
  }
  // Power iteration on a clustered top spectrum; only the tolerance scale depends on it.
  EXPECT_NEAR(iterative.lambda_max, dense.lambda_max, 1e-2 * dense.lambda_max);
  EXPECT_LE(iterative.lambda_max, dense.lambda_max * (1 + 1e-12));
}

TEST(Spectrum, PowerIterationFindsTheLargestMagnitude) {
  const SparseMat m = diagonal({1.0, -9.0, 4.0, 8.0});
  EXPECT_NEAR(hmlab::largest_magnitude_eigenvalue(m), 9.0, 1e-6);
}

TEST(Spectrum, JsonCarriesTheKernelBookkeeping) {
  const auto s = hmlab::hessian_spectrum(diagonal({0.0, 2.0, 5.0}));
  const auto j = nlohmann::json::parse(s.to_json());
  EXPECT_EQ(j["kernel_dim"], 1);
  EXPECT_EQ(j["basis_dim"], 3);
  EXPECT_EQ(j["solver"], "dense");
  EXPECT_EQ(j["eigenvalues"].size(), 3u);
  EXPECT_DOUBLE_EQ(j["lambda_max"].get<double>(), 5.0);
}

TEST(Spectrum, ConstantSphereMapHasTwoDimensionalKernel) {
  const MapField c =
      hmlab::constant_map(support::sphere_mesh(3), support::sphere(), support::north());
  const auto s = hmlab::hessian_spectrum(hmlab::hessian_matrix(c).matrix);
  EXPECT_EQ(s.kernel_dim, 2);
  EXPECT_GE(s.gap_ratio, 10.0);
  // Above the kernel: the first nonzero Laplacian eigenvalue, twice per frame direction.
  EXPECT_NEAR(s.eigenvalues(2), 2.0, 2e-2);
  EXPECT_NEAR(s.eigenvalues(7), 2.0, 2e-2);
}

TEST(Spectrum, ConstantCircleMapHasOneDimensionalKernel) {
  const auto mesh = support::circle_mesh(128);
  hmlab::Vec p(2);
  p << 0.6, 0.8;
  const auto s = hmlab::hessian_spectrum(
      hmlab::hessian_matrix(hmlab::constant_map(mesh, support::sphere(2), p)).matrix);
  EXPECT_EQ(s.kernel_dim, 1);
  EXPECT_NEAR(s.eigenvalues(1), 1.0, 1e-6);
}

TEST(Spectrum, DegreeOneCircleMapHasTheRotationKernel) {
  const auto mesh = support::circle_mesh(128);
  const auto s = hmlab::hessian_spectrum(
      hmlab::hessian_matrix(hmlab::degree_circle_map(mesh, support::sphere(2), 1)).matrix);
  EXPECT_EQ(s.kernel_dim, 1);
  EXPECT_GE(s.gap_ratio, 10.0);
}

TEST(Spectrum, HessianOfARotatedMapHasTheSameSpectrum) {
  hmlab::Rng rng(4, "near-identity");
  const MapField f = hmlab::perturbed_map(
      hmlab::identity_map(support::sphere_mesh(2), support::sphere()), 0.2, rng);
  const Eigen::Matrix3d R = oracle::rotation(Eigen::Vector3d(1.0, 2.0, -0.5), 0.7);
  const MapField g = f.with_values(hmlab::Field(f.values() * R.transpose()));
  const auto a = hmlab::hessian_spectrum(hmlab::hessian_matrix(f).matrix);
  const auto b = hmlab::hessian_spectrum(hmlab::hessian_matrix(g).matrix);
  EXPECT_LT((a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff(), 1e-9 * a.lambda_max);
}
