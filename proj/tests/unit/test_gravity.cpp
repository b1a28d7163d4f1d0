#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include "examini/gravity/driver.hpp"
#include "examini/gravity/force.hpp"
#include "examini/gravity/hilbert.hpp"
#include "examini/gravity/sph.hpp"
#include "examini/gravity/tree.hpp"

using namespace examini;
using namespace examini::gravity;

namespace {

std::vector<Body> random_bodies(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0), m(0.5, 1.5);
  std::vector<Body> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    b[i].pos = {u(rng), u(rng), u(rng)};
    b[i].mass = m(rng) / double(n);
    b[i].id = i;
  }
  return b;
}

double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + std::ptrdiff_t(v.size() / 2), v.end());
  return v[v.size() / 2];
}

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

std::vector<Body> lattice(int n, double d) {
  std::vector<Body> b;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        Body x;
        x.pos = d * Eigen::Vector3d(i, j, k);
        x.mass = 1.0;
        x.id = b.size();
        b.push_back(x);
      }
  return b;
}

}  // namespace

TEST_CASE("Hilbert keys") {
  const Domain unit{Eigen::Vector3d::Zero(), 1.0};

  SUBCASE("order 1 is a bijection onto 0..7") {
    std::set<std::uint64_t> keys;
    for (std::uint32_t c = 0; c < 8; ++c)
      keys.insert(hilbert_index({c & 1u, (c >> 1) & 1u, (c >> 2) & 1u}, 1));
    CHECK(keys == std::set<std::uint64_t>{0, 1, 2, 3, 4, 5, 6, 7});
  }

  SUBCASE("consecutive keys are face neighbours") {
    for (int order : {2, 3}) {
      const std::uint32_t n = 1u << order;
      std::vector<std::array<std::uint32_t, 3>> cell_of(std::size_t(n) * n * n);
      std::vector<int> hit(cell_of.size(), 0);
      for (std::uint32_t k = 0; k < n; ++k)
        for (std::uint32_t j = 0; j < n; ++j)
          for (std::uint32_t i = 0; i < n; ++i) {
            const auto key = hilbert_index({i, j, k}, order);
            REQUIRE(key < cell_of.size());
            cell_of[key] = {i, j, k};
            ++hit[key];
          }
      CHECK(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; }));
      for (std::size_t key = 0; key + 1 < cell_of.size(); ++key) {
        int dist = 0;
        for (int a = 0; a < 3; ++a)
          dist += std::abs(int(cell_of[key][a]) - int(cell_of[key + 1][a]));
        REQUIRE(dist == 1);
      }
    }
  }

  SUBCASE("points in one cell share the key") {
    CHECK(hilbert_key({0.26, 0.51, 0.99}, unit, 2) == hilbert_key({0.49, 0.74, 0.76}, unit, 2));
    CHECK(hilbert_key({1.0, 1.0, 1.0}, unit, 3) == hilbert_key({0.99, 0.99, 0.99}, unit, 3));
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(hilbert_key({1.5, 0.0, 0.0}, unit, 4), OutOfDomain);
    CHECK_THROWS_AS(hilbert_key({0.5, 0.5, 0.5}, unit, 22), InvalidArgument);
  }
}

TEST_CASE("octree") {
  SUBCASE("single body") {
    std::vector<Body> b(1);
    b[0].pos = {0.3, 0.2, 0.1};
    b[0].mass = 2.0;
    auto t = build_tree(b, {Eigen::Vector3d::Zero(), 1.0});
    CHECK(t.nodes.size() == 1);
    CHECK(t.root().leaf);
    CHECK((t.root().com - b[0].pos).norm() == 0.0);
  }

  SUBCASE("symmetric pair") {
    std::vector<Body> b(2);
    b[0].pos = {-0.25, 0.1, 0.0};
    b[1].pos = {0.25, -0.1, 0.0};
    auto t = build_tree(b, {Eigen::Vector3d::Constant(-1.0), 2.0}, 1);
    CHECK(t.root().mass == 2.0);
    CHECK(t.root().com.norm() <= 1e-16);
    CHECK_FALSE(t.root().leaf);
  }

  SUBCASE("audit of 1000 random bodies") {
    auto b = random_bodies(1000, 3);
    const double total = std::accumulate(b.begin(), b.end(), 0.0,
                                         [](double s, const Body& x) { return s + x.mass; });
    auto t = build_tree(b, bounding_cube(b));
    CHECK(audit_tree(t, b).empty());
    double leaves = 0.0;
    for (const auto& n : t.nodes)
      if (n.leaf) {
        leaves += n.mass;
        CHECK(int(n.count) <= t.leaf_capacity);
      }
    CHECK(std::abs(leaves - total) <= 1e-12 * total);
    for (std::size_t i = 0; i + 1 < b.size(); ++i) REQUIRE(b[i].key <= b[i + 1].key);
    for (std::size_t i = 0; i < b.size(); ++i) {
      const auto leaf = t.find_leaf(b[i].pos);
      REQUIRE(leaf >= 0);
      REQUIRE(leaf == t.leaf_of(i));
    }
  }

  SUBCASE("Hilbert order keeps consecutive bodies together") {
    auto b = random_bodies(4000, 8);
    auto t = build_tree(b, bounding_cube(b));
    auto ancestor = [&](const Body& x) {
      return cell_coords(x.pos, t.domain, 3);
    };
    std::size_t sorted_same = 0, random_same = 0;
    for (std::size_t i = 0; i + 1 < b.size(); ++i)
      sorted_same += ancestor(b[i]) == ancestor(b[i + 1]);
    auto shuffled = b;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(1));
    for (std::size_t i = 0; i + 1 < shuffled.size(); ++i)
      random_same += ancestor(shuffled[i]) == ancestor(shuffled[i + 1]);
    CHECK(sorted_same > 10 * random_same);
  }

  SUBCASE("degenerate domain") {
    auto b = random_bodies(4, 1);
    CHECK_THROWS_AS(build_tree(b, {Eigen::Vector3d::Zero(), 0.0}), DegenerateDomain);
  }
}

TEST_CASE("direct summation") {
  SUBCASE("Newton pair") {
    std::vector<Body> b(2);
    b[1].pos = {1.0, 0.0, 0.0};
    auto a = direct_sum(b, 0.0);
    CHECK(a[0][0] == doctest::Approx(1.0));
    CHECK(a[1][0] == doctest::Approx(-1.0));
  }

  SUBCASE("square has zero net force") {
    std::vector<Body> b(4);
    b[0].pos = {0, 0, 0};
    b[1].pos = {1, 0, 0};
    b[2].pos = {1, 1, 0};
    b[3].pos = {0, 1, 0};
    auto a = direct_sum(b, 0.01);
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < 4; ++i) p += b[i].mass * a[i];
    CHECK(p.norm() <= 1e-13);
  }

  SUBCASE("three bodies by hand") {
    std::vector<Body> b(3);
    b[1].pos = {1, 0, 0};
    b[2].pos = {0, 1, 0};
    auto a = direct_sum(b, 0.0);
    CHECK((a[0] - Eigen::Vector3d(1, 1, 0)).norm() <= 1e-15);
    const double c = 1.0 / (2.0 * std::sqrt(2.0));
    CHECK((a[1] - Eigen::Vector3d(-1 - c, c, 0)).norm() <= 1e-15);
    CHECK((a[2] - Eigen::Vector3d(c, -1 - c, 0)).norm() <= 1e-15);
  }
}

TEST_CASE("Barnes-Hut walks") {
  const WalkParams base{0.5, 1e-2, 32, 0.0};

  SUBCASE("theta = 0 reproduces direct summation") {
    auto b = random_bodies(600, 4);
    auto t = build_tree(b, bounding_cube(b));
    WalkParams p = base;
    p.theta = 0.0;
    CHECK(max_of(relative_errors(bh_force(t, b, p), direct_sum(b, p.softening))) <= 1e-12);
  }

  SUBCASE("distant cluster acts as its monopole") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.0, 0.003);
    std::vector<Body> b(21);
    Eigen::Vector3d mx = Eigen::Vector3d::Zero();
    double mt = 0.0;
    for (std::size_t i = 1; i < b.size(); ++i) {
      b[i].pos = Eigen::Vector3d(10.0 + n(rng), n(rng), n(rng));
      b[i].mass = 0.5 + 0.05 * double(i);
      b[i].id = i;
      mx += b[i].mass * b[i].pos;
      mt += b[i].mass;
    }
    auto t = build_tree(b, bounding_cube(b));
    WalkParams p = base;
    p.softening = 1e-6;
    auto a = bh_force(t, b, p);
    const std::size_t probe = std::size_t(
        std::find_if(b.begin(), b.end(), [](const Body& x) { return x.id == 0; }) - b.begin());
    const Eigen::Vector3d com = mx / mt;
    const double r2 = com.squaredNorm() + 1e-12;
    const Eigen::Vector3d mono = mt * com / (r2 * std::sqrt(r2));
    CHECK((a[probe] - mono).norm() <= 1e-12 * mono.norm());
    const auto d = direct_sum(b, p.softening);
    // Quadrupole correction scales as (cluster size / distance)^2.
    CHECK((a[probe] - d[probe]).norm() <= 1e-5 * d[probe].norm());
  }

  SUBCASE("theta = 0.5 median error below 1%") {
    auto b = random_bodies(1000, 5);
    auto t = build_tree(b, bounding_cube(b));
    const auto e = relative_errors(bh_force(t, b, base), direct_sum(b, base.softening));
    CHECK(median(e) < 0.01);
  }

  SUBCASE("error shrinks with the opening angle") {
    for (std::uint64_t seed : {11, 12, 13}) {
      auto b = random_bodies(1000, seed);
      auto t = build_tree(b, bounding_cube(b));
      const auto d = direct_sum(b, base.softening);
      double prev = 1e300;
      for (double th : {0.8, 0.5, 0.3}) {
        WalkParams p = base;
        p.theta = th;
        const double m = median(relative_errors(bh_force(t, b, p), d));
        CHECK(m <= prev);
        prev = m;
      }
    }
  }

  SUBCASE("grouped walk with single-body groups equals the classic walk") {
    auto b = random_bodies(800, 6);
    auto t = build_tree(b, bounding_cube(b));
    WalkParams p = base;
    p.group_size = 1;
    const auto g = grouped_walk_force(t, b, p);
    const auto c = bh_force(t, b, p);
    CHECK(max_of(relative_errors(g, c)) <= 1e-12);
  }

  SUBCASE("conservative grouping is at least as accurate and shares work") {
    auto b = random_bodies(1000, 7);
    auto t = build_tree(b, bounding_cube(b));
    WalkParams p = base;
    p.group_size = 32;
    const auto d = direct_sum(b, p.softening);
    GroupedWalkStats st;
    st.count_classic = true;
    const double eg = max_of(relative_errors(grouped_walk_force(t, b, p, &st), d));
    const double ec = max_of(relative_errors(bh_force(t, b, p), d));
    CHECK(eg <= ec + 1e-12);
    REQUIRE(st.groups.size() == 32);
    for (const auto& g : st.groups) CHECK(g.list_length <= g.member_classic_sum);
    MESSAGE("max rel error grouped " << eg << " classic " << ec);
  }

  SUBCASE("direct radius covering the domain gives direct summation") {
    auto b = random_bodies(300, 9);
    auto t = build_tree(b, bounding_cube(b));
    WalkParams p = base;
    p.theta = 0.9;
    p.direct_radius = 10.0;
    CHECK(max_of(relative_errors(grouped_walk_force(t, b, p), direct_sum(b, p.softening))) <=
          1e-12);
  }

  SUBCASE("inactive bodies receive nothing but still attract") {
    auto b = random_bodies(500, 10);
    auto t = build_tree(b, bounding_cube(b));
    const auto full = bh_force(t, b, base);
    for (std::size_t i = 0; i < b.size(); i += 2) b[i].active = false;
    const auto part = bh_force(t, b, base);
    const auto grp = grouped_walk_force(t, b, base);
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (i % 2 == 0) {
        REQUIRE(part[i].norm() == 0.0);
        REQUIRE(grp[i].norm() == 0.0);
      } else {
        REQUIRE((part[i] - full[i]).norm() == 0.0);
        REQUIRE(grp[i].norm() > 0.0);
      }
    }
  }

  SUBCASE("invalid parameters") {
    WalkParams p = base;
    p.softening = 0.0;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p = base;
    p.group_size = 0;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
  }
}

TEST_CASE("SPH smoothing length and density") {
  SUBCASE("kernel integrates to one") {
    const double h = 0.7;
    const int n = 4000;
    const double dr = 2.0 * h / n;
    double s = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double r = k * dr;
      const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      s += w * 4.0 * std::numbers::pi * r * r * kernel_w(r, h);
    }
    CHECK(std::abs(s * dr / 3.0 - 1.0) <= 1e-6);
  }

  SUBCASE("uniform lattice") {
    auto b = lattice(14, 1.0);
    auto t = build_tree(b, bounding_cube(b));
    SphParams sp;
    const auto h = find_hsml(t, b, sp);
    const auto rho = sph_density(t, b, h);
    const double h_ref = std::cbrt(3.0 * 32.0 / (4.0 * std::numbers::pi));
    int interior = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      if ((b[i].pos.array() < 5.0).any() || (b[i].pos.array() > 8.0).any()) continue;
      ++interior;
      CHECK(std::abs(h[i] / h_ref - 1.0) < 0.10);
      CHECK(std::abs(rho[i] - 1.0) < 0.05);
    }
    CHECK(interior == 64);
  }

  SUBCASE("scaling the coordinates scales h") {
    auto b = random_bodies(300, 21);
    auto t = build_tree(b, bounding_cube(b));
    SphParams sp;
    const auto h = find_hsml(t, b, sp);
    auto b2 = b;
    for (auto& x : b2) x.pos *= 2.0;
    auto t2 = build_tree(b2, bounding_cube(b2));
    const auto h2 = find_hsml(t2, b2, sp);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(h2[i] / h[i] == doctest::Approx(2.0).epsilon(1e-5));
  }

  SUBCASE("isolated cluster of n_ngb + 1 points") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SphParams sp;
    std::vector<Body> b;
    for (int k = 0; k <= sp.n_ngb; ++k) {
      Body x;
      x.pos = 0.01 * Eigen::Vector3d(u(rng), u(rng), u(rng));
      x.id = b.size();
      b.push_back(x);
    }
    for (int k = 0; k < 200; ++k) {
      Body x;
      Eigen::Vector3d dir(g(rng), g(rng), g(rng));
      x.pos = (5.0 + 5.0 * u(rng)) * dir.normalized();
      x.id = b.size();
      b.push_back(x);
    }
    auto t = build_tree(b, bounding_cube(b));
    const auto h = find_hsml(t, b, sp);
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (b[i].id > std::uint64_t(sp.n_ngb)) continue;
      for (std::size_t j = 0; j < b.size(); ++j) {
        const double r = (b[j].pos - b[i].pos).norm();
        if (b[j].id <= std::uint64_t(sp.n_ngb))
          CHECK(r < 2.0 * h[i]);
        else
          CHECK(r > 2.0 * h[i]);
      }
    }
  }

  SUBCASE("single isolated particle") {
    std::vector<Body> b(1);
    b[0].mass = 3.0;
    auto t = build_tree(b, {Eigen::Vector3d::Constant(-1), 2.0});
    const double h = 0.4;
    CHECK(sph_density(t, b, std::vector<double>{h})[0] == doctest::Approx(3.0 * kernel_w(0.0, h)));
  }

  SUBCASE("bisection limit reports the body") {
    auto b = random_bodies(100, 1);
    auto t = build_tree(b, bounding_cube(b));
    SphParams sp;
    sp.max_bisections = 2;
    try {
      find_hsml(t, b, sp);
      FAIL("expected NoConvergence");
    } catch (const NoConvergence& e) {
      CHECK(e.body() == b[0].id);
    }
  }
}

TEST_CASE("gravity driver") {
  GravityConfig cfg;
  cfg.bodies = 1500;
  cfg.params.softening = 0.01;
  cfg.check_direct = true;

  SUBCASE("classic walk does not depend on the rank count") {
    cfg.walk = Walk::Classic;
    auto a = run_gravity(cfg, 1);
    auto b = run_gravity(cfg, 3);
    REQUIRE(a.accel.size() == b.accel.size());
    for (std::size_t i = 0; i < a.accel.size(); ++i) REQUIRE(a.accel[i] == b.accel[i]);
    CHECK(a.interactions == b.interactions);
    CHECK(median(a.rel_error) < 0.01);
    std::set<std::string> regions;
    for (const auto& [r, s] : b.timing.region_seconds) regions.insert(r);
    CHECK(regions.count("TreeBuild") == 1);
    CHECK(regions.count("ForceWalk") == 1);
  }

  SUBCASE("grouped walk with SPH") {
    cfg.bodies = 600;
    cfg.sph = true;
    auto r = run_gravity(cfg, 2);
    CHECK(r.hsml.size() == 600);
    CHECK(std::all_of(r.density.begin(), r.density.end(), [](double x) { return x > 0; }));
    CHECK(median(r.rel_error) < 0.01);
    CHECK(r.timing.region_seconds.count("Density") == 1);
  }

  SUBCASE("snapshot and force CSV") {
    const auto dir = std::filesystem::temp_directory_path() / "examini_gravity_test";
    std::filesystem::create_directories(dir);
    auto bodies = make_bodies(cfg);
    bodies[3].active = false;
    write_snapshot(bodies, dir / "snap");
    const auto back = read_snapshot(dir / "snap");
    REQUIRE(back.size() == bodies.size());
    CHECK(back[3].active == false);
    CHECK(back[7].pos == bodies[7].pos);
    CHECK(back[7].id == 7);

    cfg.bodies = 50;
    auto r = run_gravity(cfg, 1);
    write_force_csv(r.bodies, r.accel, r.direct, dir / "forces.csv");
    std::ifstream is(dir / "forces.csv");
    std::string line;
    std::getline(is, line);
    CHECK(line == "id,a_tree,a_direct,rel_error");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 50);
    std::filesystem::remove_all(dir);
  }

  SUBCASE("config validation") {
    cfg.distribution = "disk";
    CHECK_THROWS_AS(cfg.validate(1), InvalidArgument);
    cfg.distribution = "uniform";
    cfg.active_fraction = 0.0;
    CHECK_THROWS_AS(cfg.validate(1), InvalidArgument);
  }
}
