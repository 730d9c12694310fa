#include <doctest.h>

#include <random>

#include "beb/error.hpp"
#include "beb/model.hpp"

using namespace beb;

TEST_CASE("from_traces sign conventions")
{
    auto nf2 = from_traces(TraceParams2D{0.0, 1.0, -1.0}, 0.0);
    CHECK(nf2.a == Vector{0.0, 1.0});
    CHECK(nf2.d() == Vector{-1.0, -1.0});

    auto nf3 = from_traces(TraceParams3D{-0.5, 4.0, 2.0, 0.275, 1.0}, 1.0);
    CHECK(nf3.a == Vector{0.5, 4.0, -2.0});
    CHECK(nf3.d() == Vector{-1.0, 0.275, -1.0});
    CHECK(nf3.mu == 1.0);

    auto nf3b = from_traces(TraceParams3D{-0.3, 0.4, -0.1, -0.2, 1.0}, 0.0);
    CHECK(nf3b.a == Vector{0.3, 0.4, 0.1});
    CHECK(nf3b.d() == Vector{-1.0, -0.2, -1.0});
}

TEST_CASE("trace round trip is exact")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 500; ++i) {
        TraceParams2D p2{u(rng), u(rng), u(rng)};
        CHECK(to_traces_2d(from_traces(p2, u(rng))) == p2);
        TraceParams3D p3{u(rng), u(rng), u(rng), u(rng), u(rng)};
        CHECK(to_traces_3d(from_traces(p3, u(rng))) == p3);
    }
    CHECK_THROWS_AS(to_traces_3d(from_traces(TraceParams2D{1, 1, 1}, 0)), beb::error);
}

TEST_CASE("embed")
{
    SUBCASE("2D")
    {
        auto s = embed(NormalFormParams({0.5, 2.0}, {-1.0, -1.0}, 0.0));
        CHECK(s.A == Matrix{{-0.5, 1}, {-2, 0}});
        CHECK(s.b == Vector{0, 1});
        CHECK(s.c == Vector{-1, -1});
    }
    SUBCASE("d1 = +1")
    {
        auto s = embed(NormalFormParams({0.0, 1.0}, {1.0, 0.0}, 0.0));
        CHECK(s.A == Matrix{{0, 1}, {-1, 0}});
        CHECK(s.c == Vector{1, 0});
    }
    SUBCASE("3D")
    {
        auto s = embed(from_traces(TraceParams3D{-0.5, 4.0, 2.0, 0.275, 1.0}, 1.0));
        CHECK(s.A == Matrix{{-0.5, 1, 0}, {-4, 0, 1}, {2, 0, 0}});
        CHECK(s.b == Vector{0, 0, 1});
    }
    SUBCASE("characteristic polynomial")
    {
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        for (std::size_t n = 1; n <= 6; ++n) {
            Vector a(n), d(n);
            for (std::size_t i = 0; i < n; ++i) {
                a[i] = u(rng);
                d[i] = u(rng);
            }
            d[0] = -1.0;
            const auto fl = faddeev_leverrier(embed(NormalFormParams(a, d, 0.0)).A);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(fl.poly.coeffs[i] == doctest::Approx(a[i]).epsilon(1e-12).scale(1.0));
            }
        }
    }
}

TEST_CASE("NormalFormParams validation")
{
    CHECK_THROWS_AS(NormalFormParams({1.0, 2.0}, {-0.5, 1.0}, 0.0), beb::error);
    CHECK_THROWS_AS(NormalFormParams({1.0, 2.0}, {-1.0}, 0.0), beb::error);
    CHECK_NOTHROW(NormalFormParams({1.0, 2.0}, {1.0, 3.0}, 0.0));
}

TEST_CASE("parse_system")
{
    SUBCASE("normal form")
    {
        auto doc = parse_system(R"({"normal_form": {"a": [0.5, 4, -2], "d": [-1, 0.275, -1], "mu": 1.0}})");
        REQUIRE(doc.is_normal_form());
        const auto& nf = std::get<NormalFormParams>(doc.model);
        CHECK(nf.a == Vector{0.5, 4, -2});
        CHECK(nf.d1 == -1);
        CHECK(nf.mu == 1.0);
        CHECK(doc.mu == 1.0);
    }
    SUBCASE("1D system")
    {
        auto doc = parse_system(R"({"system": {"A": [[1]], "b": [1], "c": [1]}})");
        REQUIRE_FALSE(doc.is_normal_form());
        CHECK(doc.system().dim() == 1);
        CHECK(doc.mu == 0.0);
    }
    SUBCASE("traces with a run object")
    {
        auto doc = parse_system(R"({"traces": {"tau_L": 1, "delta_L": 5, "d2": -1, "mu": -1},
                                    "run": {"samples": 10}})");
        REQUIRE(doc.run.has_value());
        CHECK((*doc.run)["samples"] == 10);
        CHECK(to_traces_2d(std::get<NormalFormParams>(doc.model)) == TraceParams2D{1, 5, -1});
    }
    SUBCASE("errors")
    {
        auto code = [](std::string_view text) {
            try {
                parse_system(text);
            } catch (const beb::error& e) {
                return e.code();
            }
            return errc::internal_inconsistency;
        };
        CHECK(code(R"({"system": {"A": [[1, 0]], "b": [1], "c": [1]}})") == errc::dimension_mismatch);
        CHECK(code(R"({"system": {"A": [[1]], "b": [1, 2], "c": [1]}})") == errc::dimension_mismatch);
        CHECK(code(R"({"normal_form": {"a": [1], "d": [2]}})") == errc::non_unit_d1);
        CHECK(code(R"({"system": {"A": [[1]], "b": [1], "c": [1]}, "traces": {}})") == errc::schema_error);
        CHECK(code("{not json") == errc::schema_error);
        CHECK(code(R"({"system": {"A": [["x"]], "b": [1], "c": [1]}})") == errc::schema_error);
        CHECK(code(R"({})") == errc::schema_error);
    }
}

TEST_CASE("json round trip")
{
    auto nf = from_traces(TraceParams3D{-0.5, 4.0, 2.0, 0.275, 1.0}, 1.0);
    auto back = parse_system(to_json(nf));
    const auto& got = std::get<NormalFormParams>(back.model);
    CHECK(got.a == nf.a);
    CHECK(got.d() == nf.d());
    CHECK(got.mu == nf.mu);

    auto sys = embed(nf);
    auto back2 = parse_system(to_json(sys, 0.5));
    CHECK(back2.system().A == sys.A);
    CHECK(back2.mu == 0.5);
}
