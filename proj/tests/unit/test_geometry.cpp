#include "oracles.hpp"
#include "rcd/errors.hpp"
#include "rcd/geometry.hpp"

#include <doctest.h>

#include <random>
#include <vector>

using rcd::Position3;

namespace {

Position3 random_point(std::mt19937_64& rng, double scale = 10.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

}  // namespace

TEST_CASE("rank of small simplices") {
  const std::vector<Position3> tri{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  const std::vector<Position3> line{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  const std::vector<Position3> tet{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  CHECK(rcd::rank_simplex(tri, 2) == 2);
  CHECK(rcd::rank_simplex(line, 2) == 1);
  CHECK(rcd::rank_simplex(tet, 3) == 3);
  CHECK_THROWS_AS(rcd::rank_simplex(tri, 3), rcd::ArgumentError);
}

TEST_CASE("plane normal orientation") {
  CHECK(rcd::plane_normal({0, 0, 0}, {1, 0, 0}, {0, 1, 0}).isApprox(Position3(0, 0, -1)));
  CHECK(rcd::plane_normal({0, 0, 0}, {0, 1, 0}, {1, 0, 0}).isApprox(Position3(0, 0, 1)));
  CHECK(rcd::plane_normal({0, 0, 1}, {1, 0, 1}, {0, 1, 1}).isApprox(Position3(0, 0, -1)));
  CHECK_THROWS_AS(rcd::plane_normal({0, 0, 0}, {1, 1, 1}, {2, 2, 2}), rcd::DegeneracyError);
}

TEST_CASE("virtual fourth point leaves the plane") {
  CHECK(rcd::virtual_fourth_point({0, 0, 0}, {1, 0, 0}, {0, 1, 0}).isApprox(Position3(0, 0, -1)));
  CHECK(rcd::virtual_fourth_point({0, 0, 0}, {1, 0, 0}, {0, 1, 0}, -2.0).isApprox(Position3(0, 0, 2)));
  CHECK_THROWS_AS(rcd::virtual_fourth_point({0, 0, 0}, {1, 0, 0}, {0, 1, 0}, 0.0), rcd::DegeneracyError);

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Position3 a = random_point(rng), b = random_point(rng), c = random_point(rng);
    const std::vector<Position3> tet{a, b, c, rcd::virtual_fourth_point(a, b, c)};
    CHECK(rcd::rank_simplex(tet, 3) == 3);
  }
}

TEST_CASE("projection onto the triangle plane") {
  CHECK(rcd::project_to_plane({3, 4, 5}, {0, 0, 0}, {1, 0, 0}, {0, 1, 0}).isApprox(Position3(3, 4, 0)));
  CHECK(rcd::project_to_plane({3, 4, 0}, {0, 0, 0}, {1, 0, 0}, {0, 1, 0}).isApprox(Position3(3, 4, 0)));

  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 500; ++trial) {
    const Position3 a = random_point(rng), b = random_point(rng), c = random_point(rng);
    const Position3 q = random_point(rng, 30.0);
    const Position3 p = rcd::project_to_plane(q, a, b, c);
    const Position3 n = (b - a).cross(c - a).normalized();
    CHECK(std::abs((p - a).dot(n)) <= 1e-12 * std::max(1.0, q.norm()));
    CHECK((q - p).cross(n).norm() <= 1e-9 * std::max(1.0, q.norm()));
  }
}

TEST_CASE("barycentric weights of a tetrahedron") {
  const Position3 p1(0, 0, 0), p2(1, 0, 0), p3(0, 1, 0), p4(0, 0, 1);
  const auto w = rcd::barycentric_lambda(p1, p2, p3, p4, {0.25, 0.25, 0.25});
  for (int k = 0; k < 4; ++k) CHECK(w[k] == doctest::Approx(0.25).epsilon(1e-14));
  const auto v = rcd::barycentric_lambda(p1, p2, p3, p4, p1);
  CHECK(v.values.isApprox(Eigen::Vector4d(1, 0, 0, 0)));
  CHECK_THROWS_AS(rcd::barycentric_lambda(p1, p2, p3, {1, 1, 0}, p1), rcd::DegeneracyError);

  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 1000; ++trial) {
    const Position3 a = random_point(rng), b = random_point(rng), c = random_point(rng),
                    d = random_point(rng), q = random_point(rng);
    if (std::abs(oracle::orient3(a, b, c, d)) < 1.0) continue;
    const auto lam = rcd::barycentric_lambda(a, b, c, d, q);
    const auto ref = oracle::tet_barycentric(a, b, c, d, q);
    CHECK(lam.sum() == doctest::Approx(1.0).epsilon(1e-9));
    for (int k = 0; k < 4; ++k) CHECK(std::abs(lam[k] - ref[k]) <= 1e-9 * std::max(1.0, std::abs(ref[k])));
    const Position3 rebuilt = lam[0] * a + lam[1] * b + lam[2] * c + lam[3] * d;
    CHECK((rebuilt - q).norm() <= 1e-9 * std::max(1.0, q.norm()));
    CHECK(lam.strictly_inside() == oracle::tet_contains(a, b, c, d, q));
  }
}

TEST_CASE("planar Lambda operator") {
  const std::vector<Position3> tri{{0, 0, 0}, {4, 0, 0}, {0, 4, 0}};
  const auto w = rcd::lambda_nd(tri, {1, 1, 0}, 2);
  CHECK(w[0] == doctest::Approx(0.5));
  CHECK(w[1] == doctest::Approx(0.25));
  CHECK(w[2] == doctest::Approx(0.25));
  CHECK(std::abs(w[3]) <= 1e-12);

  const auto centroid = rcd::lambda_nd(tri, Position3(4.0 / 3, 4.0 / 3, 0), 2);
  for (int k = 0; k < 3; ++k) CHECK(centroid[k] == doctest::Approx(1.0 / 3));

  const auto above = rcd::lambda_nd(tri, {1, 1, 7}, 2);
  CHECK((above.values - w.values).norm() <= 1e-12);

  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 500; ++trial) {
    const std::vector<Position3> t{random_point(rng), random_point(rng), random_point(rng)};
    const Position3 q = random_point(rng, 20.0);
    if (rcd::simplex_measure(t, 2) < 1.0) continue;
    const auto ref = oracle::tri_barycentric(t[0], t[1], t[2], q);
    for (double xi : {0.5, 1.0, -3.0}) {
      const auto lam = rcd::lambda_nd(t, q, 2, xi);
      CHECK(std::abs(lam[3]) <= 1e-9);
      CHECK(lam.sum() == doctest::Approx(1.0).epsilon(1e-9));
      for (int k = 0; k < 3; ++k) CHECK(std::abs(lam[k] - ref[k]) <= 1e-9 * std::max(1.0, std::abs(ref[k])));
    }
  }
}

TEST_CASE("simplex measure") {
  const std::vector<Position3> tri{{0, 0, 0}, {4, 0, 0}, {0, 4, 0}};
  const std::vector<Position3> tet{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  CHECK(rcd::simplex_measure(tri, 2) == doctest::Approx(8.0));
  CHECK(rcd::simplex_measure(tet, 3) == doctest::Approx(1.0 / 6));
}
