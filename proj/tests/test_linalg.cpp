#include "doctest.h"
#include "pyrafem/linalg.hpp"

using namespace pyrafem;

TEST_CASE("rank and nullspace of small rational matrices") {
  RatMatrix m(2, 2);
  m(0, 0) = 1;
  m(0, 1) = 2;
  m(1, 0) = 2;
  m(1, 1) = 4;
  CHECK(m.rank() == 1);
  auto ns = m.nullspace();
  REQUIRE(ns.size() == 1);
  CHECK(m(0, 0) * ns[0][0] + m(0, 1) * ns[0][1] == 0);
  CHECK(m(1, 0) * ns[0][0] + m(1, 1) * ns[0][1] == 0);

  RatMatrix id(3, 3);
  for (int i = 0; i < 3; ++i) id(i, i) = rat(1, 2);
  CHECK(id.rank() == 3);
  CHECK(id.nullspace().empty());
}

TEST_CASE("nullspace of a rectangular system") {
  // x + y + z = 0, x - z = 0
  RatMatrix m(2, 3);
  m(0, 0) = 1;
  m(0, 1) = 1;
  m(0, 2) = 1;
  m(1, 0) = 1;
  m(1, 2) = -1;
  auto ns = m.nullspace();
  REQUIRE(ns.size() == 1);
  for (std::size_t r = 0; r < 2; ++r) {
    Rational acc(0);
    for (std::size_t c = 0; c < 3; ++c) acc += m(r, c) * ns[0][c];
    CHECK(acc == 0);
  }
}

TEST_CASE("span builder accepts only independent vectors") {
  SpanBuilder sb(3);
  CHECK(sb.accept({rat(1), rat(0), rat(1)}));
  CHECK(sb.accept({rat(0), rat(1), rat(0)}));
  CHECK_FALSE(sb.accept({rat(2), rat(3), rat(2)}));
  CHECK(sb.rank() == 2);
  CHECK(sb.contains({rat(1), rat(1), rat(1)}));
  CHECK_FALSE(sb.contains({rat(1), rat(0), rat(0)}));
  CHECK(sb.accept({rat(0), rat(0), rat(1)}));
  CHECK(sb.rank() == 3);
}
