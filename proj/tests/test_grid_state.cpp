#include <doctest.h>

#include <cstring>

#include "colphys/sources.hpp"
#include "colphys/state.hpp"

using namespace colphys;

TEST_CASE("build_grid sizes") {
  const Grid g = build_grid(100, 200, 60, 100.0);
  CHECK(g.columns() == 20000);
  CHECK(g.points() == 1200000);
  CHECK(g.column_index(3, 7) == 3 * 200 + 7);

  const Grid one = build_grid(1, 1, 1, 100.0);
  CHECK(one.columns() == 1);
  CHECK(one.points() == 1);

  CHECK_THROWS_AS(build_grid(0, 10, 60, 100.0), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(4, 4, 60, 0.0), std::invalid_argument);
}

TEST_CASE("roster cardinality and composition") {
  CHECK(roster_size(MoistureMode::Warm) == 5);
  CHECK(roster_size(MoistureMode::Cold) == 18);

  int mass = 0, number = 0, shape = 0;
  for (FieldId id : roster(MoistureMode::Cold)) {
    switch (field_kind(id)) {
      case FieldKind::Mass: ++mass; break;
      case FieldKind::Number: ++number; break;
      case FieldKind::Shape: ++shape; break;
    }
  }
  CHECK(mass == 10);  // six water categories plus four aerosol
  CHECK(number == 5);
  CHECK(shape == 3);

  CHECK(carries(MoistureMode::Warm, FieldId::RainNumber));
  CHECK_FALSE(carries(MoistureMode::Warm, FieldId::IceMass));
  CHECK(slot_of(MoistureMode::Warm, FieldId::IceMass) == -1);
  CHECK(parse_mode("COLD") == MoistureMode::Cold);
  CHECK_FALSE(parse_mode("tepid").has_value());
}

TEST_CASE("init_state cloud fraction extremes") {
  const Grid g = build_grid(6, 5, 40, 100.0);
  Scenario s;
  s.cloudy_fraction = 0.0;
  const auto clear = init_state(g, MoistureMode::Warm, s);
  CHECK(clear.field(FieldId::CloudMass).abs().maxCoeff() == 0.0);

  s.cloudy_fraction = 1.0;
  const auto cloudy = init_state(g, MoistureMode::Warm, s);
  const auto& qc = cloudy.field(FieldId::CloudMass);
  for (Index c = 0; c < g.columns(); ++c) CHECK(qc.col(c).maxCoeff() > 0.0);
}

TEST_CASE("init_state is a pure function of its arguments") {
  const Grid g = build_grid(8, 8, 30, 100.0);
  Scenario s;
  s.seed = 99;
  for (auto mode : {MoistureMode::Warm, MoistureMode::Cold}) {
    const auto a = init_state(g, mode, s);
    const auto b = init_state(g, mode, s);
    CHECK(bitwise_equal(a, b));
    CHECK(a.q.size() == roster_size(mode));
  }
  s.seed = 100;
  CHECK_FALSE(bitwise_equal(init_state(g, MoistureMode::Warm, Scenario{}), init_state(g, MoistureMode::Warm, s)));
}

TEST_CASE("init_state deck layout clouds a contiguous band of rows") {
  const Grid g = build_grid(20, 10, 30, 100.0);
  Scenario s;
  s.layout = CloudLayout::Deck;
  s.cloudy_fraction = 0.3;
  const auto st = init_state(g, MoistureMode::Warm, s);
  const auto& qc = st.field(FieldId::CloudMass);
  std::vector<int> cloudy_rows;
  for (Index i = 0; i < g.nx; ++i) {
    int cloudy = 0;
    for (Index j = 0; j < g.ny; ++j) cloudy += qc.col(g.column_index(i, j)).maxCoeff() > 0.0;
    CHECK((cloudy == 0 || cloudy == g.ny));
    if (cloudy) cloudy_rows.push_back(static_cast<int>(i));
  }
  REQUIRE(cloudy_rows.size() == 6);
  // Contiguous modulo nx.
  int gaps = 0;
  for (std::size_t k = 0; k < cloudy_rows.size(); ++k) {
    const int next = cloudy_rows[(k + 1) % cloudy_rows.size()];
    if ((cloudy_rows[k] + 1) % g.nx != next) ++gaps;
  }
  CHECK(gaps == 1);
}

TEST_CASE("init_state rejects a fraction outside [0,1]") {
  Scenario s;
  s.cloudy_fraction = 1.5;
  CHECK_THROWS(init_state(build_grid(2, 2, 10, 100.0), MoistureMode::Warm, s));
}

TEST_CASE("field access outside the roster throws") {
  const auto st = init_state(build_grid(2, 2, 10, 100.0), MoistureMode::Warm, Scenario{});
  CHECK_THROWS_AS(st.field(FieldId::IceMass), std::out_of_range);
}

namespace {

SourceBuffer<double> filled(int index, const Grid& g, double value) {
  auto b = SourceBuffer<double>::zeros(index, g, MoistureMode::Warm);
  for (auto& f : b.q) f.setConstant(value);
  b.theta.setConstant(value);
  b.surface_precip.setConstant(value);
  return b;
}

bool same_bits(const SourceBuffer<double>& a, const SourceBuffer<double>& b) {
  auto eq = [](const auto& x, const auto& y) {
    return x.size() == y.size() && std::memcmp(x.data(), y.data(), sizeof(double) * x.size()) == 0;
  };
  for (std::size_t f = 0; f < a.q.size(); ++f) {
    if (!eq(a.q[f], b.q[f])) return false;
  }
  return eq(a.theta, b.theta) && eq(a.surface_precip, b.surface_precip);
}

}  // namespace

TEST_CASE("accumulate_sources") {
  const Grid g = build_grid(3, 4, 10, 100.0);

  SUBCASE("single buffer is the identity") {
    const auto a = filled(0, g, 0.125);
    CHECK(same_bits(accumulate_sources(std::vector{a}), a));
  }
  SUBCASE("two all-ones buffers sum to twos") {
    const auto sum = accumulate_sources(std::vector{filled(0, g, 1.0), filled(1, g, 1.0)});
    for (const auto& f : sum.q) CHECK((f == 2.0).all());
    CHECK((sum.theta == 2.0).all());
  }
  SUBCASE("supply order does not matter") {
    auto a = filled(0, g, 0.1);
    auto b = filled(1, g, 0.2);
    auto c = filled(2, g, 0.3);
    a.q[1](0, 0) = 1e-17;
    b.q[1](0, 0) = 1.0;
    c.q[1](0, 0) = -1.0;
    const auto abc = accumulate_sources(std::vector{a, b, c});
    CHECK(same_bits(abc, accumulate_sources(std::vector{c, a, b})));
    CHECK(same_bits(abc, accumulate_sources(std::vector{b, c, a})));
    CHECK(abc.component_index == 0);
  }
  SUBCASE("duplicate indices and mismatched extents are rejected") {
    CHECK_THROWS(accumulate_sources(std::vector{filled(1, g, 0.0), filled(1, g, 0.0)}));
    CHECK_THROWS(accumulate_sources(std::vector{filled(0, g, 0.0), filled(1, build_grid(2, 2, 10, 100.0), 0.0)}));
    CHECK_THROWS(accumulate_sources(std::vector<SourceBuffer<double>>{}));
  }
}

TEST_CASE("integrate") {
  const Grid g = build_grid(1, 1, 1, 100.0);
  auto state = init_state(g, MoistureMode::Warm, Scenario{});
  auto sources = SourceBuffer<double>::zeros(0, g, MoistureMode::Warm);

  SUBCASE("zero sources leave the fields untouched") {
    const auto before = state;
    integrate(state, sources, 1.0);
    for (std::size_t f = 0; f < state.q.size(); ++f) {
      CHECK(std::memcmp(state.q[f].data(), before.q[f].data(), sizeof(double) * state.q[f].size()) == 0);
    }
    CHECK(state.time == 1.0);
  }
  SUBCASE("linear update") {
    state.field(FieldId::CloudMass).setConstant(1e-3);
    sources.q[1].setConstant(1e-6);
    integrate(state, sources, 1.0);
    CHECK(state.field(FieldId::CloudMass)(0, 0) == doctest::Approx(1.001e-3).epsilon(1e-14));
  }
  SUBCASE("clip records the removed amount") {
    state.field(FieldId::CloudMass).setConstant(1e-6);
    sources.q[1].setConstant(-1e-5);
    const ClipReport r = integrate(state, sources, 1.0);
    CHECK(state.field(FieldId::CloudMass)(0, 0) == 0.0);
    // Oracle: the overshoot below zero is 1e-5 - 1e-6.
    CHECK(r.clipped[1] == doctest::Approx(9e-6).epsilon(1e-12));
    CHECK(r.total() == doctest::Approx(9e-6).epsilon(1e-12));
  }
  SUBCASE("bad dt and mismatched layouts throw") {
    CHECK_THROWS(integrate(state, sources, 0.0));
    auto other = SourceBuffer<double>::zeros(0, g, MoistureMode::Cold);
    CHECK_THROWS(integrate(state, other, 1.0));
  }
}

TEST_CASE("templated on scalar") {
  const auto s = init_state<float>(build_grid(3, 3, 12, 100.0), MoistureMode::Cold, Scenario{});
  CHECK(s.q.size() == 18);
  CHECK(s.theta.rows() == 12);
  CHECK((s.field(FieldId::VapourMass) >= 0.0f).all());
}
