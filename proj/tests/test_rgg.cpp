#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "cprgg/random.hpp"
#include "cprgg/rgg.hpp"
#include "oracles.hpp"

using namespace cprgg;

namespace {

PointCloud cloud_of(std::size_t dim, double extent, std::vector<double> coords) {
  PointCloud c;
  c.dim = dim;
  c.extent = extent;
  c.coords = std::move(coords);
  return c;
}

}  // namespace

TEST_CASE("rgg edges on a hand-made cloud") {
  auto c = cloud_of(2, 3.0, {0, 0, 0, 1, 0, 2.5});
  auto g = build_rgg(c, 1.0);
  CHECK(g.edges() == std::vector<Edge>{{0, 1}});
}

TEST_CASE("rgg edge condition is inclusive") {
  auto c = cloud_of(2, 4.0, {0.5, 0.5, 3.5, 0.5});
  CHECK(build_rgg(c, 3.0).edge_count() == 1);
  CHECK(build_rgg(c, std::nextafter(3.0, 0.0)).edge_count() == 0);
  auto line = cloud_of(1, 2.0, {0.25, 1.25});
  CHECK(build_rgg(line, 1.0).edge_count() == 1);
}

TEST_CASE("rgg equals brute force") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const std::size_t dim = 1 + seed % 3;
    const double n = 20.0 + double(seed % 7) * 25.0;
    const double radius = 0.4 + 0.15 * double(seed % 9);
    GeometryConfig geo{n, radius, dim, Intensity::constant(1.5)};
    auto cloud = sample_poisson_points(geo, seed);
    REQUIRE(cloud.size() <= 300);
    CHECK(build_rgg(cloud, radius).edges() == oracle::brute_force_rgg(cloud, radius));
  }
}

TEST_CASE("rgg is invariant under relabelling points") {
  GeometryConfig geo{150.0, 1.7, 2, Intensity::constant(1.0)};
  auto cloud = sample_poisson_points(geo, 9);
  std::vector<std::size_t> perm(cloud.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(3));
  PointCloud shuffled = cloud;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    for (std::size_t k = 0; k < 2; ++k) shuffled.coords[i * 2 + k] = cloud.coords[perm[i] * 2 + k];
  }
  auto g = build_rgg(cloud, 1.7);
  auto h = build_rgg(shuffled, 1.7);
  std::vector<Edge> mapped;
  for (auto [a, b] : h.edges()) {
    Vertex x = Vertex(perm[a]), y = Vertex(perm[b]);
    mapped.emplace_back(std::min(x, y), std::max(x, y));
  }
  std::sort(mapped.begin(), mapped.end());
  CHECK(mapped == g.edges());
}

TEST_CASE("poisson counts") {
  GeometryConfig geo{400.0, 1.0, 2, Intensity::constant(1.0)};
  double sum = 0.0, sum2 = 0.0;
  const int seeds = 1000;
  for (int s = 0; s < seeds; ++s) {
    auto c = sample_poisson_points(geo, std::uint64_t(s));
    CHECK(c.within_domain());
    sum += double(c.size());
    sum2 += double(c.size()) * double(c.size());
  }
  const double mean = sum / seeds;
  const double var = (sum2 - seeds * mean * mean) / (seeds - 1);
  CHECK(std::fabs(mean - 400.0) <= 3.0 * std::sqrt(400.0 / seeds));
  // variance of a Poisson sample variance is about 2 mean^2 / seeds
  CHECK(std::fabs(var - 400.0) <= 4.0 * std::sqrt(2.0 * 400.0 * 400.0 / seeds));
}

TEST_CASE("poisson with intensity at its upper bound keeps every proposal") {
  GeometryConfig geo{100.0, 1.0, 2, Intensity::constant(2.0)};
  auto a = sample_poisson_points(geo, 5);
  auto b = sample_poisson_points(geo, 5);
  CHECK(a.coords == b.coords);
  Rng rng(5);
  CHECK(a.size() == rng.poisson(200.0));
}

TEST_CASE("gradient intensity stays within bounds and thins") {
  auto g = Intensity::parse("gradient:0.5,2", 10.0);
  CHECK(g.lower() == 0.5);
  CHECK(g.upper() == 2.0);
  GeometryConfig geo{100.0, 1.0, 2, g};
  double left = 0, right = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    auto c = sample_poisson_points(geo, s);
    for (std::size_t i = 0; i < c.size(); ++i) (c.point(i)[0] < 5.0 ? left : right) += 1;
  }
  CHECK(right > 1.5 * left);
  CHECK_THROWS(Intensity::parse("gradient:2", 10.0));
  CHECK_THROWS(Intensity::parse("wobble:1", 10.0));
}

TEST_CASE("intensity outside its declared bounds aborts sampling") {
  Intensity liar([](std::span<const double>) { return 5.0; }, 1.0, 2.0, "liar");
  GeometryConfig geo{50.0, 1.0, 2, liar};
  CHECK_THROWS_AS(sample_poisson_points(geo, 1), std::domain_error);
}

TEST_CASE("binomial points") {
  auto u = Intensity::constant(1.0);
  CHECK(sample_binomial_points(50, u, 2, 1).size() == 50);
  CHECK(sample_binomial_points(0, u, 2, 1).size() == 0);
  auto c1 = sample_binomial_points(3, u, 1, 4);
  for (double x : c1.coords) CHECK((x >= 0.0 && x <= 1.0));

  // chi-square over quadrants, 3 degrees of freedom; 11.34 is the 1% point
  int rejections = 0;
  for (std::uint64_t s = 0; s < 500; ++s) {
    auto c = sample_binomial_points(50, u, 2, s);
    double counts[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < 50; ++i) {
      counts[(c.point(i)[0] >= 0.5 ? 1 : 0) + (c.point(i)[1] >= 0.5 ? 2 : 0)] += 1;
    }
    double chi = 0;
    for (double k : counts) chi += (k - 12.5) * (k - 12.5) / 12.5;
    rejections += chi > 11.34;
  }
  CHECK(rejections <= 15);
}

TEST_CASE("box discretization") {
  auto origin = cloud_of(2, 3.0, {0.0, 0.0});
  auto boxes = discretize_boxes(origin, 1.0, 1.0);
  CHECK(std::count(boxes.counts.begin(), boxes.counts.end(), 1u) == 1);
  CHECK(boxes.counts[0] == 1);

  GeometryConfig geo{400.0, 1.0, 2, Intensity::constant(1.0)};
  auto cloud = sample_poisson_points(geo, 2);
  auto all_open = discretize_boxes(cloud, 2.0, 0.0);
  CHECK(std::all_of(all_open.open.begin(), all_open.open.end(), [](auto o) { return o == 1; }));
  CHECK(std::accumulate(all_open.counts.begin(), all_open.counts.end(), std::size_t{0}) == cloud.size());
  CHECK(all_open.members.size() == cloud.size());

  // interior boxes of side s hold s^d points on average
  double total = 0;
  std::size_t boxes_seen = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    auto c = sample_poisson_points(geo, s);
    auto b = discretize_boxes(c, 2.5, 1.0);
    for (std::size_t k = 0; k < b.box_count(); ++k) {
      total += b.counts[k];
      ++boxes_seen;
    }
  }
  CHECK(total / double(boxes_seen) == doctest::Approx(6.25).epsilon(0.03));
}

TEST_CASE("embedding degenerate and empty cases") {
  GeometryConfig geo{4.0, 3.0, 2, Intensity::constant(1.0)};
  auto cloud = sample_poisson_points(geo, 11);
  REQUIRE(cloud.size() > 1);
  auto emb = find_caterpillar_embedding(cloud, geo);
  REQUIRE(emb);
  CHECK(emb->spine_length() == 0);
  CHECK(emb->spine.size() + emb->clique_size() == cloud.size());
  CHECK(verify_embedding(build_rgg(cloud, 3.0), *emb));

  PointCloud empty;
  empty.dim = 2;
  empty.extent = 2.0;
  CHECK_FALSE(find_caterpillar_embedding(empty, geo));
}

TEST_CASE("embedding blocks are cliques joined in sequence") {
  std::size_t ok = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    GeometryConfig geo{10000.0, 10.0, 2, Intensity::constant(1.0)};
    auto cloud = sample_poisson_points(geo, s);
    auto emb = find_caterpillar_embedding(cloud, geo);
    REQUIRE(emb);
    auto g = build_rgg(cloud, 10.0);
    CHECK(verify_embedding(g, *emb));
    CHECK(emb->clique_size() == std::size_t(std::ceil(emb->mu / 2.0)));
    ok += emb->spine_length() >= 0.2 * 10000.0 / 100.0;
  }
  CHECK(ok >= 18);
}

TEST_CASE("verify_embedding rejects a broken copy") {
  GeometryConfig geo{2500.0, 8.0, 2, Intensity::constant(1.0)};
  auto cloud = sample_poisson_points(geo, 4);
  auto emb = find_caterpillar_embedding(cloud, geo);
  REQUIRE(emb);
  REQUIRE(emb->spine_length() >= 2);
  auto g = build_rgg(cloud, 8.0);
  auto broken = *emb;
  std::swap(broken.spine[0], broken.spine.back());
  CHECK_FALSE(verify_embedding(g, broken));
  auto dup = *emb;
  dup.blocks[1][0] = dup.blocks[0][0];
  CHECK_FALSE(verify_embedding(g, dup));
}

TEST_CASE("point cloud text round trip") {
  GeometryConfig geo{30.0, 1.0, 3, Intensity::constant(1.0)};
  auto cloud = sample_poisson_points(geo, 8);
  std::stringstream io;
  write_point_cloud(io, cloud);
  auto back = read_point_cloud(io, cloud.extent);
  CHECK(back.coords == cloud.coords);
  std::istringstream ragged("1 2\n3\n");
  CHECK_THROWS(read_point_cloud(ragged, 5.0));
  std::istringstream outside("1 9\n");
  CHECK_THROWS(read_point_cloud(outside, 5.0));
}
