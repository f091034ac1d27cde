#include <catch2/catch_amalgamated.hpp>

#include "mlft/core.hpp"

using namespace mlft;

TEST_CASE("grid geometry", "[core]") {
    Grid g1{1, 8};
    CHECK(g1.size() == 8);
    CHECK(g1.h() == Catch::Approx(0.125).epsilon(0));
    Grid g2{2, 4};
    CHECK(g2.size() == 16);
    CHECK(g2.h() == Catch::Approx(0.25).epsilon(0));
}

TEST_CASE("field indexing is row-major", "[core]") {
    Field f(Grid{2, 3});
    f.at(1, 2) = 7.0;
    CHECK(f.a[1 * 3 + 2] == 7.0);
    f.at(2, 0) = -1.0;
    CHECK(f.a[6] == -1.0);
}

TEST_CASE("norms and mean", "[core]") {
    Field f(Grid{1, 2});
    f.a = {3.0, 4.0};
    CHECK(vec2(f) == Catch::Approx(5.0).margin(1e-15));
    // L2 weighting: sqrt(h) in 1-D, h in 2-D
    CHECK(grid_l2(f) == Catch::Approx(5.0 / std::sqrt(2.0)).margin(1e-15));
    CHECK(field_mean(f) == Catch::Approx(3.5).margin(1e-15));

    Field g(Grid{2, 2}, 2.0);
    CHECK(grid_l2(g) == Catch::Approx(2.0).margin(1e-15));  // constant 2 has L2 norm 2
}

TEST_CASE("field arithmetic", "[core]") {
    Field f(Grid{1, 3});
    f.a = {1.0, 2.0, 3.0};
    Field g(Grid{1, 3}, 1.0);
    CHECK((f + g).a == std::vector<double>{2.0, 3.0, 4.0});
    CHECK((f - g).a == std::vector<double>{0.0, 1.0, 2.0});
    CHECK((2.0 * f).a == std::vector<double>{2.0, 4.0, 6.0});
    g += f;
    CHECK(g.a == std::vector<double>{2.0, 3.0, 4.0});
}

TEST_CASE("finiteness probe", "[core]") {
    Field f(Grid{1, 4}, 1.0);
    CHECK(finite(f));
    f.a[2] = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(finite(f));
}

TEST_CASE("error hierarchy carries messages", "[core]") {
    CHECK_THROWS_AS(throw ConfigError("bad key"), Error);
    CHECK_THROWS_WITH(throw SolverError("blew up"), "blew up");
    CHECK_THROWS_AS(throw TrainingError("x"), Error);
    CHECK_THROWS_AS(throw KernelError("x"), Error);
    CHECK_THROWS_AS(throw BudgetError("x"), Error);
}
