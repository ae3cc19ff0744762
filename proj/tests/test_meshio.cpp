#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "elemstruct/meshio.hpp"

using namespace es;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("meshio_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("xyz round trip is lossless at 9 significant digits") {
  TempDir dir;
  Rng rng(71);
  PointCloud cloud(3, 50);
  for (auto& v : cloud.coords) v = rng.uniform(-10, 10);
  save_xyz(dir.file("a.xyz"), cloud);
  auto back = load_xyz(dir.file("a.xyz"));
  REQUIRE(back.size() == cloud.size());
  REQUIRE(back.dim == 3);
  for (std::size_t i = 0; i < cloud.coords.size(); ++i)
    CHECK(back.coords[i] == doctest::Approx(cloud.coords[i]).epsilon(1e-8));
}

TEST_CASE("xyz supports arbitrary column counts") {
  TempDir dir;
  PointCloud cloud(10, 4);
  for (std::size_t i = 0; i < cloud.coords.size(); ++i) cloud.coords[i] = 0.125 * i;
  save_xyz(dir.file("b.xyz"), cloud);
  auto back = load_xyz(dir.file("b.xyz"));
  CHECK(back.dim == 10);
  CHECK(back.coords == cloud.coords);  // dyadic values survive exactly
}

TEST_CASE("xyz loader reports file and line for corrupt input") {
  TempDir dir;
  {
    std::ofstream out(dir.file("bad.xyz"));
    out << "0 0 0\n1 1 bogus\n";
  }
  CHECK_THROWS_WITH_AS(load_xyz(dir.file("bad.xyz")), doctest::Contains("bad.xyz:2"), DataError);
  {
    std::ofstream out(dir.file("ragged.xyz"));
    out << "0 0 0\n1 1\n";
  }
  CHECK_THROWS_WITH_AS(load_xyz(dir.file("ragged.xyz")), doctest::Contains(":2"), DataError);
  CHECK_THROWS_AS(load_xyz(dir.file("missing.xyz")), DataError);
}

TEST_CASE("obj round trip preserves vertices and faces") {
  TempDir dir;
  TriangleMesh mesh;
  mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0.25, 0.25, 1.5}};
  mesh.faces = {{0, 1, 2}, {0, 1, 3}};
  save_obj(dir.file("m.obj"), mesh);
  auto back = load_obj(dir.file("m.obj"));
  REQUIRE(back.vertices.size() == 4);
  REQUIRE(back.faces == mesh.faces);
  for (std::size_t i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(back.vertices[i][j] == doctest::Approx(mesh.vertices[i][j]).epsilon(1e-8));
}

TEST_CASE("obj loader fan-triangulates polygons and tolerates v/vt/vn tokens") {
  TempDir dir;
  {
    std::ofstream out(dir.file("quad.obj"));
    out << "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n";
    out << "f 1/1/1 2/2/2 3/3/3 4/4/4\n";
  }
  auto mesh = load_obj(dir.file("quad.obj"));
  REQUIRE(mesh.faces.size() == 2);
  CHECK(mesh.faces[0] == std::array<int, 3>{0, 1, 2});
  CHECK(mesh.faces[1] == std::array<int, 3>{0, 2, 3});
}

TEST_CASE("ply round trip with colors and faces") {
  TempDir dir;
  PlyData data;
  data.points = PointCloud(3, 3);
  data.points.at(1, 0) = 1.0;
  data.points.at(2, 1) = 1.0;
  data.faces = {{0, 1, 2}};
  data.colors = {{255, 0, 0}, {0, 255, 0}, {0, 0, 255}};
  save_ply(dir.file("p.ply"), data);
  auto back = load_ply(dir.file("p.ply"));
  CHECK(back.points.coords == data.points.coords);
  CHECK(back.faces == data.faces);
  REQUIRE(back.colors.size() == 3);
  CHECK(back.colors[0] == data.colors[0]);
  CHECK(back.colors[2] == data.colors[2]);
}

TEST_CASE("ply round trip without color or faces") {
  TempDir dir;
  PlyData data;
  data.points = PointCloud(3, 2);
  data.points.at(0, 2) = -0.5;
  save_ply(dir.file("q.ply"), data);
  auto back = load_ply(dir.file("q.ply"));
  CHECK(back.points.coords == data.points.coords);
  CHECK(back.faces.empty());
  CHECK(back.colors.empty());
}

TEST_CASE("ply loader rejects non-ply input") {
  TempDir dir;
  {
    std::ofstream out(dir.file("x.ply"));
    out << "not a ply\n";
  }
  CHECK_THROWS_AS(load_ply(dir.file("x.ply")), DataError);
}
