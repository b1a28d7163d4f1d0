#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "examini/core/comm.hpp"
#include "examini/core/exact_sum.hpp"

using namespace examini;

TEST_CASE("World: point-to-point messages match by (peer, tag) in order") {
  World world({.ranks = 3});
  std::vector<std::vector<double>> got(3);
  world.run([&](Communicator& c) {
    const int right = (c.rank() + 1) % c.size();
    const int left = (c.rank() + c.size() - 1) % c.size();
    const std::vector<double> a{double(c.rank()), 1.0};
    const std::vector<double> b{double(c.rank()), 2.0};
    c.send_values<double>(right, 5, b);
    c.send_values<double>(right, 4, a);
    auto first = c.recv_values<double>(left, 4);
    auto second = c.recv_values<double>(left, 5);
    got[c.rank()] = {first[0], first[1], second[0], second[1]};
  });
  for (int r = 0; r < 3; ++r) {
    const double left = (r + 2) % 3;
    CHECK(got[r] == std::vector<double>{left, 1.0, left, 2.0});
  }
}

TEST_CASE("World: reductions are identical on every rank") {
  World world({.ranks = 5, .workers = 2});
  std::vector<double> mins(5), sums(5);
  world.run([&](Communicator& c) {
    mins[c.rank()] = c.allreduce_min(10.0 - c.rank());
    sums[c.rank()] = c.allreduce_sum(0.1 * (c.rank() + 1));
    c.barrier();
  });
  for (int r = 0; r < 5; ++r) {
    CHECK(mins[r] == 6.0);
    CHECK(sums[r] == sums[0]);
  }
  // Fixed combination order: ((((0.1 + 0.2) + 0.3) + 0.4) + 0.5)
  double ref = 0.0;
  for (int r = 0; r < 5; ++r) ref += 0.1 * (r + 1);
  CHECK(sums[0] == ref);
}

TEST_CASE("World: a silent peer trips the watchdog") {
  World world({.ranks = 2, .watchdog = std::chrono::milliseconds(50)});
  CHECK_THROWS_AS(world.run([](Communicator& c) {
    if (c.rank() == 0) c.recv(1, 0);
  }),
                  NeighborTimeout);
}

TEST_CASE("World: a failing rank does not hang its peers") {
  World world({.ranks = 2});
  CHECK_THROWS_AS(world.run([](Communicator& c) {
    if (c.rank() == 1) throw InvalidArgument("boom");
    c.recv(1, 0);
  }),
                  InvalidArgument);
}

TEST_CASE("World: traces cover communication and regions") {
  World world({.ranks = 2});
  world.run([](Communicator& c) {
    c.set_region("Exchange");
    const std::vector<double> v(16, 1.0);
    c.send_values<double>(1 - c.rank(), 0, v);
    c.recv(1 - c.rank(), 0);
    c.set_region("Reduce");
    c.allreduce_sum(1.0);
  });
  const auto& tl = world.timeline();
  REQUIRE(tl.ranks() == 2);
  tl.validate();
  for (int r = 0; r < 2; ++r) {
    bool send = false, wait = false, coll = false;
    for (const auto& e : tl.stream(r, 0)) {
      if (e.state == trace::State::Send) {
        send = true;
        CHECK(e.bytes == 128);
        CHECK(e.region == "Exchange");
      }
      wait |= e.state == trace::State::Wait;
      if (e.state == trace::State::Collective) {
        coll = true;
        CHECK(e.region == "Reduce");
      }
    }
    CHECK(send);
    CHECK(wait);
    CHECK(coll);
  }
}

TEST_CASE("factor_ranks") {
  CHECK(factor_ranks(8).size() == 8);
  CHECK(factor_ranks(8).px == 2);
  CHECK(factor_ranks(8).pz == 2);
  CHECK(factor_ranks(12).px * factor_ranks(12).py * factor_ranks(12).pz == 12);
  CHECK(factor_ranks(1).px == 1);
  const RankLayout3 l{2, 2, 2};
  CHECK(l.neighbor(0, {-1, 0, 0}, {true, true, true}) == 1);
  CHECK_FALSE(l.neighbor(0, {-1, 0, 0}, {false, true, true}).has_value());
  CHECK(l.coords_of(l.rank_of(1, 0, 1)) == std::array<int, 3>{1, 0, 1});
}

TEST_CASE("exact sum") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v;
  for (int i = 0; i < 5000; ++i) v.push_back(std::ldexp(u(rng), int(rng() % 80) - 40));
  v.push_back(1e300);
  v.push_back(-1e300);
  v.push_back(4.9e-324);
  ExactSum a;
  for (double x : v) a.add(x);
  const double ref = a.value();
  std::shuffle(v.begin(), v.end(), rng);
  // Split into uneven parts and merge through the packed form.
  ExactSum p1, p2;
  for (std::size_t i = 0; i < v.size(); ++i) (i % 3 ? p1 : p2).add(v[i]);
  auto x = p1.pack();
  const auto y = p2.pack();
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += y[i];
  CHECK(ExactSum::unpack(x).value() == ref);

  ExactSum tiny;
  tiny.add(1.0);
  tiny.add(1e-30);
  tiny.add(-1.0);
  CHECK(tiny.value() == 1e-30);
  ExactSum inf;
  inf.add(1.0);
  inf.add(std::numeric_limits<double>::infinity());
  CHECK(std::isinf(inf.value()));
}
