#include "rcd/automaton.hpp"
#include "rcd/errors.hpp"

#include <doctest.h>

#include <vector>

using rcd::Mode;
using rcd::Position3;

TEST_CASE("nominal containment position") {
  const std::vector<Position3> pts{{0, 0, 0}, {2, 0, 0}};
  CHECK(rcd::nominal_containment_position(pts).isApprox(Position3(1, 0, 0)));
  const std::vector<double> first{1.0, 0.0};
  CHECK(rcd::nominal_containment_position(pts, first) == Position3(0, 0, 0));
  const std::vector<double> bad{0.7, 0.7};
  CHECK_THROWS_AS(rcd::nominal_containment_position(pts, bad), rcd::ArgumentError);
  const std::vector<double> negative{1.5, -0.5};
  CHECK_THROWS_AS(rcd::nominal_containment_position(pts, negative), rcd::ArgumentError);
}

TEST_CASE("containment box membership") {
  const Position3 c(5, -3, 2);
  CHECK(rcd::containment_contains(c + Position3(40, 0, 0), c, 40));
  CHECK_FALSE(rcd::containment_contains(c + Position3(40.1, 0, 0), c, 40));
  CHECK(rcd::containment_contains(c + Position3(20, 20, 0), c, 40));
  CHECK_FALSE(rcd::containment_contains(c + Position3(20, 20, 0.5), c, 40));
  CHECK(rcd::containment_contains(c + Position3(20, 20, 0.5), c, 40, rcd::NormKind::L2));
  CHECK_THROWS_AS(rcd::containment_contains(c, c, 0.0), rcd::ArgumentError);
}

TEST_CASE("mode transitions") {
  rcd::ModeState hdm;
  const rcd::PositionMap actual{{1, {0, 0, 0}}, {11, {3, 0, 0}}, {12, {41, 0, 0}}};

  auto t = rcd::transition(hdm, {}, actual, 1.0);
  CHECK(t.next.mode == Mode::HDM);
  CHECK(t.events.empty());
  CHECK_FALSE(t.reference_reset);

  t = rcd::transition(hdm, {12}, actual, 1.0);
  CHECK(t.next.mode == Mode::HDM);  // flagged but outside the box

  t = rcd::transition(hdm, {11}, actual, 100.34);
  CHECK(t.next.mode == Mode::CEM);
  CHECK(t.next.entered_at == 100.34);
  REQUIRE(t.events.size() == 1);
  CHECK(t.events[0].kind == "hdm_to_cem");
  CHECK(t.events[0].payload.find("11") != std::string::npos);

  rcd::ModeState cem = t.next;
  t = rcd::transition(cem, {11}, actual, 110.0);
  CHECK(t.next.mode == Mode::CEM);
  CHECK(t.events.empty());

  const rcd::PositionMap left{{1, {0, 0, 0}}, {11, {20, 21, 0}}};
  t = rcd::transition(cem, {11}, left, 118.0);
  CHECK(t.next.mode == Mode::HDM);
  CHECK(t.reference_reset);
  REQUIRE(t.events.size() == 2);
  CHECK(t.events[0].kind == "cem_to_hdm");
  CHECK(t.events[1].kind == "reference_reset");
  CHECK(t.next.containment_half_size == cem.containment_half_size);

  CHECK_THROWS_AS(rcd::transition(hdm, {99}, actual, 0.0), rcd::ArgumentError);
}

TEST_CASE("transitions are a function of their inputs") {
  rcd::ModeState s;
  s.containment_center = Position3(1, 2, 0);
  const rcd::PositionMap actual{{4, {30, 5, 0}}};
  const auto a = rcd::transition(s, {4}, actual, 3.0);
  const auto b = rcd::transition(s, {4}, actual, 3.0);
  CHECK(a.next.mode == b.next.mode);
  CHECK(a.events.size() == b.events.size());
  CHECK(a.events[0].payload == b.events[0].payload);
}
