#include <doctest.h>

#include <random>

#include "cerebra/kinematics.hpp"
#include "cerebra/synthetic.hpp"
#include "test_util.hpp"

using namespace cerebra;

TEST_CASE("atrophy_tensor: grey shrinks isotropically") {
  const Mat3 Fa = atrophy_tensor(0.729, std::nullopt, Tissue::Grey);
  CHECK((Fa - 0.9 * Mat3::Identity()).norm() <= 1e-14);
  CHECK(Fa.determinant() == doctest::Approx(0.729).epsilon(1e-14));
}

TEST_CASE("atrophy_tensor: white thins transverse to the fibre") {
  const Vec3 a(1, 0, 0);
  const Mat3 Fa = atrophy_tensor(0.81, a, Tissue::White);
  Mat3 expected = Mat3::Zero();
  expected.diagonal() << 1.0, 0.9, 0.9;
  CHECK((Fa - expected).norm() <= 1e-14);
  CHECK(Fa.determinant() == doctest::Approx(0.81).epsilon(1e-14));
  // Unit stretch along the fibre.
  CHECK(((Fa * a) - a).norm() <= 1e-14);
}

TEST_CASE("atrophy_tensor: healthy state is the identity") {
  CHECK((atrophy_tensor(1.0, std::nullopt, Tissue::Grey) - Mat3::Identity()).norm() == 0.0);
  CHECK((atrophy_tensor(1.0, Vec3(0, 0, 1), Tissue::White) - Mat3::Identity()).norm() <= 1e-15);
}

TEST_CASE("atrophy_tensor: determinant equals theta for both branches") {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int k = 0; k < 200; ++k) {
    const double theta = u(rng);
    CHECK(atrophy_tensor(theta, std::nullopt, Tissue::Grey).determinant() ==
          doctest::Approx(theta).epsilon(1e-12));
    const Vec3 a = testutil::random_unit(rng);
    CHECK(atrophy_tensor(theta, a, Tissue::White).determinant() ==
          doctest::Approx(theta).epsilon(1e-12));
  }
}

TEST_CASE("atrophy_tensor: error paths") {
  CHECK_THROWS_AS(atrophy_tensor(0.5, std::nullopt, Tissue::White), ValidationError);
  CHECK_THROWS_AS(atrophy_tensor(0.0, std::nullopt, Tissue::Grey), ValidationError);
  CHECK_THROWS_AS(atrophy_tensor(1.5, std::nullopt, Tissue::Grey), ValidationError);
  CHECK_THROWS_AS(atrophy_tensor(0.5, Vec3(2, 0, 0), Tissue::White), ValidationError);
}

TEST_CASE("elastic_part: compatible growth is stress-free kinematics") {
  const Mat3 Fa = atrophy_tensor(0.64, Vec3(0, 1, 0), Tissue::White);
  const ElasticPart ep = elastic_part(Fa, Fa);
  CHECK((ep.Fe - Mat3::Identity()).norm() <= 1e-12);
  CHECK(ep.Je == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("elastic_part: constrained shrinkage") {
  const Mat3 Fa = atrophy_tensor(0.729, std::nullopt, Tissue::Grey);
  const ElasticPart ep = elastic_part(Mat3::Identity(), Fa);
  CHECK((ep.Fe - (1.0 / 0.9) * Mat3::Identity()).norm() <= 1e-12);
  CHECK(ep.Je == doctest::Approx(1.0 / 0.729).epsilon(1e-12));
}

TEST_CASE("elastic_part: round-trip reassembly identity") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.3, 1.0);
  for (int k = 0; k < 100; ++k) {
    const double theta = u(rng);
    const Mat3 Fa = (k % 2 == 0) ? atrophy_tensor(theta, std::nullopt, Tissue::Grey)
                                 : atrophy_tensor(theta, testutil::random_unit(rng), Tissue::White);
    const Mat3 Fe = testutil::random_deformation(rng);
    const Mat3 F = Fe * Fa;
    const ElasticPart ep = elastic_part(F, Fa);
    CHECK((ep.Fe * Fa - F).lpNorm<Eigen::Infinity>() <= 1e-12 * F.norm());
    CHECK((ep.Fe - Fe).lpNorm<Eigen::Infinity>() <= 1e-11 * Fe.norm());
  }
}

TEST_CASE("make_deformation_state: multiplicative split invariants") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  for (int k = 0; k < 100; ++k) {
    const double theta = u(rng);
    const bool white = (k % 2 == 1);
    const std::optional<Vec3> a =
        white ? std::optional<Vec3>(testutil::random_unit(rng)) : std::nullopt;
    const Mat3 F = testutil::random_deformation(rng, 0.3);
    const DeformationState d =
        make_deformation_state(F, theta, a, white ? Tissue::White : Tissue::Grey);
    CHECK((d.Fe * d.Fa - d.F).lpNorm<Eigen::Infinity>() <= 1e-12 * d.F.norm());
    CHECK(d.J == doctest::Approx(d.Je * d.Ja).epsilon(1e-10));
    CHECK(d.Ja == doctest::Approx(theta).epsilon(1e-12));
  }
}

TEST_CASE("tau_diffusion: published diffusivities in white matter") {
  const BioParams bio;
  const Vec3 a(1, 0, 0);
  Mat3 expected = Mat3::Zero();
  expected.diagonal() << 88.0, 8.0, 8.0;

  const Mat3 d1 = tau_diffusion(Mat3::Identity(), a, bio, Tissue::White);
  CHECK((d1 - expected).norm() <= 1e-12);

  // Isotropic stretch cancels through the lambda_a^2 normalization.
  const Mat3 d2 = tau_diffusion(2.0 * Mat3::Identity(), a, bio, Tissue::White);
  CHECK((d2 - expected).norm() <= 1e-12);
}

TEST_CASE("tau_diffusion: grey matter is extracellular only") {
  const BioParams bio;
  const Mat3 d = tau_diffusion(Mat3::Identity(), std::nullopt, bio, Tissue::Grey);
  CHECK((d - 8.0 * Mat3::Identity()).norm() == 0.0);
}

TEST_CASE("tau_diffusion: trace, symmetry and eigenvalue structure") {
  const BioParams bio;
  std::mt19937 rng(31);
  for (int k = 0; k < 100; ++k) {
    const Mat3 F = testutil::random_deformation(rng, 0.4);
    const Vec3 a = testutil::random_unit(rng);
    const Mat3 d = tau_diffusion(F, a, bio, Tissue::White);
    CHECK((d - d.transpose()).norm() <= 1e-12 * d.norm());
    CHECK(d.trace() == doctest::Approx(3 * bio.d_ext + bio.d_axn).epsilon(1e-13));
    Eigen::SelfAdjointEigenSolver<Mat3> es(d);
    CHECK(es.eigenvalues().minCoeff() >= bio.d_ext - 1e-9);
  }
  // At F = I the spectrum is exactly {d_ext, d_ext, d_ext + d_axn}.
  Eigen::SelfAdjointEigenSolver<Mat3> es(
      tau_diffusion(Mat3::Identity(), Vec3(0, 0, 1), bio, Tissue::White));
  CHECK(es.eigenvalues()[0] == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(es.eigenvalues()[2] == doctest::Approx(88.0).epsilon(1e-12));
}

TEST_CASE("tau_diffusion: collapsed fibre stretch is an error naming the element") {
  const BioParams bio;
  Mat3 F = Mat3::Identity();
  F(0, 0) = 0.0;  // F maps e1 to zero
  CHECK_THROWS_WITH_AS(tau_diffusion(F, Vec3(1, 0, 0), bio, Tissue::White, 17),
                       doctest::Contains("element 17"), SolverError);
}

TEST_CASE("abeta_diffusion: isotropic, deformation-independent") {
  const BioParams bio;
  const Mat3 d = abeta_diffusion(bio);
  CHECK((d - 8.0 * Mat3::Identity()).norm() == 0.0);
  CHECK(d.trace() == doctest::Approx(3 * bio.d_ext));
}

TEST_CASE("isotropized_tau_diffusion preserves the anisotropic trace") {
  const BioParams bio;
  const Mat3 d = isotropized_tau_diffusion(bio);
  CHECK(d(0, 0) == doctest::Approx(8.0 + 80.0 / 3.0).epsilon(1e-14));
  CHECK(d(0, 1) == 0.0);
  CHECK(d.trace() == doctest::Approx(104.0).epsilon(1e-14));
  const Mat3 aniso = tau_diffusion(Mat3::Identity(), Vec3(1, 0, 0), bio, Tissue::White);
  CHECK(d.trace() == doctest::Approx(aniso.trace()).epsilon(1e-14));

  BioParams no_axn = bio;
  no_axn.d_axn = 0.0;
  CHECK((isotropized_tau_diffusion(no_axn) - abeta_diffusion(no_axn)).norm() == 0.0);
}

TEST_CASE("element_axonal_direction: constant and sign-ambiguous nodal fields") {
  const RegionSet regions = RegionSet::standard_brain();
  const LabeledMesh mesh = make_box_mesh(1, 1, 1, 1.0, 11);

  SUBCASE("constant field averages to itself") {
    const AxonalField field = constant_axonal_field(mesh, regions, Vec3(0, 1, 0));
    const auto dirs = element_axonal_directions(mesh, field, regions);
    for (const auto& d : dirs) {
      REQUIRE(d.has_value());
      CHECK((*d - Vec3(0, 1, 0)).norm() <= 1e-14);
    }
  }

  SUBCASE("antipodal nodal vectors are sign-aligned before averaging") {
    AxonalField field = constant_axonal_field(mesh, regions, Vec3(1, 0, 0));
    for (int i = 0; i < mesh.num_nodes(); i += 2) field.node_dir[i] = Vec3(-1, 0, 0);
    const auto dirs = element_axonal_directions(mesh, field, regions);
    for (const auto& d : dirs) {
      REQUIRE(d.has_value());
      CHECK(std::abs(std::abs(d->x()) - 1.0) <= 1e-14);  // +x or -x, never cancelled
    }
  }

  SUBCASE("grey elements carry no direction") {
    const LabeledMesh grey = make_box_mesh(1, 1, 1, 1.0, 7);
    const AxonalField field = constant_axonal_field(grey, regions, Vec3(1, 0, 0));
    const auto dirs = element_axonal_directions(grey, field, regions);
    for (const auto& d : dirs) CHECK(!d.has_value());
  }
}
