#include <doctest.h>

#include <cmath>

#include "elemstruct/sampling.hpp"

using namespace es;

TEST_CASE("grid sampling of n=4 gives the 2x2 corner lattice") {
  auto cloud = sample_unit_square(4, SquareSampling::kGrid, 0);
  REQUIRE(cloud.size() == 4);
  CHECK(cloud.at(0, 0) == 0.0);
  CHECK(cloud.at(0, 1) == 0.0);
  CHECK(cloud.at(1, 0) == 1.0);
  CHECK(cloud.at(1, 1) == 0.0);
  CHECK(cloud.at(2, 0) == 0.0);
  CHECK(cloud.at(2, 1) == 1.0);
  CHECK(cloud.at(3, 0) == 1.0);
  CHECK(cloud.at(3, 1) == 1.0);
}

TEST_CASE("grid sampling rejects non-square counts") {
  CHECK_THROWS_AS(sample_unit_square(5, SquareSampling::kGrid, 0), DataError);
  CHECK_THROWS_AS(sample_unit_square(0, SquareSampling::kRandom, 0), DataError);
}

TEST_CASE("random square sampling stays in bounds with the right mean") {
  auto cloud = sample_unit_square(1000, SquareSampling::kRandom, 9);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(cloud.at(i, 0) >= 0.0);
    CHECK(cloud.at(i, 0) <= 1.0);
    CHECK(cloud.at(i, 1) >= 0.0);
    CHECK(cloud.at(i, 1) <= 1.0);
    mx += cloud.at(i, 0);
    my += cloud.at(i, 1);
  }
  CHECK(std::abs(mx / 1000 - 0.5) < 0.05);
  CHECK(std::abs(my / 1000 - 0.5) < 0.05);
}

TEST_CASE("same seed gives identical sample clouds") {
  auto a = sample_unit_square(100, SquareSampling::kRandom, 42);
  auto b = sample_unit_square(100, SquareSampling::kRandom, 42);
  CHECK(a.coords == b.coords);
  auto c = sample_unit_square(100, SquareSampling::kRandom, 43);
  CHECK(a.coords != c.coords);
}

TEST_CASE("surface samples of one triangle average to its centroid") {
  TriangleMesh mesh;
  mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  mesh.faces = {{0, 1, 2}};
  auto cloud = sample_mesh_surface(mesh, 10000, 5);
  double c[3] = {0, 0, 0};
  for (std::size_t i = 0; i < cloud.size(); ++i)
    for (int j = 0; j < 3; ++j) c[j] += cloud.at(i, j);
  for (int j = 0; j < 3; ++j) c[j] /= 10000.0;
  CHECK(std::abs(c[0] - 1.0 / 3) < 0.02);
  CHECK(std::abs(c[1] - 1.0 / 3) < 0.02);
  CHECK(std::abs(c[2]) < 1e-12);
}

TEST_CASE("face hit counts follow the 9:1 area ratio within 3 sigma") {
  TriangleMesh mesh;
  // right triangles with legs 3 and 1: areas 4.5 and 0.5
  mesh.vertices = {{0, 0, 0}, {3, 0, 0}, {0, 3, 0}, {10, 0, 0}, {11, 0, 0}, {10, 1, 0}};
  mesh.faces = {{0, 1, 2}, {3, 4, 5}};
  const std::size_t n = 20000;
  auto cloud = sample_mesh_surface(mesh, n, 17);
  std::size_t hits_small = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (cloud.at(i, 0) >= 9.0) ++hits_small;
  const double p = 0.1;
  const double sigma = std::sqrt(n * p * (1 - p));
  CHECK(std::abs(static_cast<double>(hits_small) - n * p) < 3 * sigma);
}

TEST_CASE("zero-area meshes cannot be sampled") {
  TriangleMesh mesh;
  mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  mesh.faces = {{0, 1, 2}};
  CHECK_THROWS_AS(sample_mesh_surface(mesh, 10, 0), DataError);
}

TEST_CASE("grid mesh sizes follow the lattice formulas") {
  auto m2 = grid_mesh_2d(2);
  CHECK(m2.vertices.size() == 4);
  CHECK(m2.faces.size() == 2);
  auto m3 = grid_mesh_2d(3);
  CHECK(m3.vertices.size() == 9);
  CHECK(m3.faces.size() == 8);
  CHECK_THROWS_AS(grid_mesh_2d(1), DataError);
}

TEST_CASE("flat grid mesh covers the unit square") {
  auto mesh = grid_mesh_2d(10);
  CHECK(mesh.total_area() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("grid mesh vertex order matches grid sampling") {
  auto mesh = grid_mesh_2d(4);
  auto cloud = sample_unit_square(16, SquareSampling::kGrid, 0);
  REQUIRE(mesh.vertices.size() == cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(mesh.vertices[i][0] == cloud.at(i, 0));
    CHECK(mesh.vertices[i][1] == cloud.at(i, 1));
  }
}
