#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "swdo/benchmarks.hpp"
#include "swdo/optimizers.hpp"

using namespace swdo;

namespace {

Array<double> arr(std::initializer_list<double> v)
{
    Array<double> a(static_cast<Eigen::Index>(v.size()));
    std::copy(v.begin(), v.end(), a.begin());
    return a;
}

bool near(const Array<double>& a, const Array<double>& b, double tol = 1e-12)
{
    return a.size() == b.size() && (a - b).abs().maxCoeff() <= tol;
}

const Objective<double> sphere_obj([](const Position<double>& x) { return sphere(x); });

} // namespace

TEST_CASE("fox sound distance")
{
    const auto a = fox_sound_distance<double>(arr({2, 4}), arr({0.5, 0.5}));
    CHECK(near(a.sp_s, arr({4, 8})));
    CHECK(near(a.dist_s_t, arr({2, 4})));
    CHECK(near(a.dist_fox_prey, arr({1, 2})));

    const auto z = fox_sound_distance<double>(arr({0, 0}), arr({0.3, 0.9}));
    CHECK(z.sp_s.isZero());
    CHECK(z.dist_s_t.isZero());
    CHECK(z.dist_fox_prey.isZero());

    const auto u = fox_sound_distance<double>(arr({1}), arr({1}));
    CHECK(near(u.dist_fox_prey, arr({0.5})));

    CHECK_THROWS_AS(fox_sound_distance<double>(arr({1, 1}), arr({0.5, 0.0})), ContractError);
    CHECK_THROWS_AS(fox_sound_distance<double>(arr({1, 1}), arr({0.5, -1.0})), ContractError);
}

TEST_CASE("fox jump and exploitation")
{
    CHECK(fox_jump<double>(arr({0.4, 0.6})) == doctest::Approx(0.3065625).epsilon(1e-14));
    CHECK(fox_jump<double>(arr({0, 0})) == 0.0);
    CHECK(fox_jump<double>(arr({1, 1, 1, 1})) == doctest::Approx(1.22625).epsilon(1e-14));
    CHECK_THROWS_AS(fox_jump<double>(Array<double>()), ContractError);

    CHECK(near(fox_exploit_position<double>(arr({1, 2}), 0.3065625, 0.18), arr({0.05518125, 0.1103625})));
    CHECK(near(fox_exploit_position<double>(arr({1, 2}), 0.3065625, 0.82), arr({0.25138125, 0.5027625})));
    CHECK(fox_exploit_position<double>(arr({3, -7, 1}), 0.0, 0.5).isZero());
}

TEST_CASE("fox exploration")
{
    CHECK(fox_exploration_control(1, 500) == doctest::Approx(1.996).epsilon(1e-14));
    CHECK(fox_exploration_control(500, 500) == 0.0);
    CHECK(fox_exploration_control(250, 500) == 1.0);
    CHECK_THROWS(fox_exploration_control(501, 500));

    CHECK(near(fox_explore_position<double>(arr({1, 1}), 0.2, 1.0, arr({0.5, 0.5})), arr({0.1, 0.1})));
    RngStream rng(3, 3);
    CHECK(fox_explore_position<double>(arr({4, -2}), 0.3, 0.0, rng).isZero());
    CHECK(fox_explore_position<double>(arr({0, 0}), 0.3, 1.7, rng).isZero());
}

TEST_CASE("igwo and gwo schedules")
{
    const IgwoParams p;
    const auto s0 = igwo_a_schedule(0, 100, p);
    CHECK(s0.a_alpha == 2.2);
    CHECK(s0.a_beta == 2.2);
    CHECK(s0.a_delta == 2.2);
    const auto s1 = igwo_a_schedule(100, 100, p);
    CHECK(s1.a_alpha == doctest::Approx(0.02).epsilon(1e-14));
    // Closed form evaluated independently.
    CHECK(s1.a_delta == doctest::Approx(2.2 * std::pow(0.02 / 2.2, 0.5)).epsilon(1e-14));
    CHECK(s1.a_delta == doctest::Approx(0.2098).epsilon(1e-3));
    CHECK(s1.a_beta == doctest::Approx(0.5 * (s1.a_alpha + s1.a_delta)));
    for (std::size_t i = 1; i <= 100; ++i) {
        const auto prev = igwo_a_schedule(i - 1, 100, p), cur = igwo_a_schedule(i, 100, p);
        REQUIRE(cur.a_alpha < prev.a_alpha);
        REQUIRE(cur.a_delta < prev.a_delta);
        REQUIRE(cur.a_alpha <= cur.a_delta);
    }
    CHECK_THROWS_AS(igwo_a_schedule(101, 100, p), ContractError);

    CHECK(gwo_linear_schedule(0, 50).a_alpha == 2.0);
    CHECK(gwo_linear_schedule(50, 50).a_delta == 0.0);
}

TEST_CASE("gwo encircling")
{
    const auto leader = arr({1.5, -2.0});
    const auto x = arr({0.3, 0.7});
    CHECK(near(gwo_encircle<double>(leader, x, 1.3, arr({0.5, 0.5}), arr({0.1, 0.9})), leader));
    CHECK(near(gwo_encircle<double>(leader, x, 0.0, arr({0.9, 0.2}), arr({0.4, 0.4})), leader));
    // D = |2 * 0.5 * 1 - 0| = 1, A = 2 * 1 * 1 - 1 = 1, so the candidate is 1 - 1 = 0.
    CHECK(near(gwo_encircle<double>(arr({1}), arr({0}), 1.0, arr({1}), arr({0.5})), arr({0})));
}

TEST_CASE("cauchy draws from the inverse cdf")
{
    CHECK(cauchy_from_uniform(0.5, 0.0, 1.0) == 0.0);
    CHECK(cauchy_from_uniform(0.75, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(cauchy_from_uniform(0.25, 2.0, 3.0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(std::abs(cauchy_from_uniform(0.0, 0.0, 1.0, 50.0)) <= 50.0);
    CHECK_THROWS_AS(cauchy_from_uniform(0.5, 0.0, 0.0), ContractError);
}

TEST_CASE("elite opposition")
{
    const auto box = SearchSpace<double>::box(1, 0.0, 10.0);
    RngStream rng(2, 2);
    CHECK(eobl_opposite<double>(arr({3}), arr({0}), arr({10}), box, 1.0, rng)[0] == 7.0);
    CHECK(eobl_opposite<double>(arr({5}), arr({0}), arr({10}), box, 1.0, rng)[0] == 5.0);
    for (int i = 0; i < 200; ++i) {
        const auto y = eobl_opposite<double>(arr({1}), arr({2}), arr({4}), box, rng);
        REQUIRE(y[0] >= 2.0);
        REQUIRE(y[0] <= 4.0);
    }
    CHECK_THROWS_AS(eobl_opposite<double>(arr({1}), arr({3}), arr({2}), box, rng), ContractError);
}

TEST_CASE("mgto control and moves")
{
    CHECK(mgto_control(10, 10, 0.3, 1.0).C == 0.0);
    const double r4 = std::numbers::pi / 2.0; // cos(2 r4) = -1
    const auto ctl = mgto_control(1, 10, r4, -1.0);
    CHECK(std::abs(ctl.C) < 1e-15);
    CHECK(std::abs(ctl.L) < 1e-15);

    const MgtoParams mp;
    const auto x = arr({0.3, -1.2});
    const auto sb = arr({1.5, 2.0});
    const auto mean = arr({0.4, 0.1});
    const MgtoExploitDraws<double> q0{0.7, 0.5, arr({0.2, 0.6})};
    CHECK(near(mgto_exploit(x, sb, mean, MgtoControl{0.2, 0.2}, mp, q0), sb));
    CHECK(near(mgto_exploit(sb, sb, mean, MgtoControl{1.2, 1.2}, mp, q0), sb));
    const auto origin = arr({0, 0});
    CHECK(mgto_exploit(origin, origin, origin, MgtoControl{1.2, -1.2}, mp, q0).isZero());

    MgtoParams always_restart;
    always_restart.pp = 1.0;
    const auto space = SearchSpace<double>(arr({-1, 5}), arr({1, 6}));
    RngStream rng(4, 4);
    for (int i = 0; i < 50; ++i) {
        const auto y = mgto_explore(arr({0, 5.5}), arr({0.5, 5.2}), MgtoControl{1.0, 1.0}, space, always_restart, rng);
        REQUIRE((y >= space.lower()).all());
        REQUIRE((y <= space.upper()).all());
    }
}

TEST_CASE("optimizers converge on small problems")
{
    const auto s2 = benchmark_space<double>("sphere", 2);
    CHECK(fox_optimize(sphere_obj, s2, FoxParams{}, Budget{10, 100}, 42).best_fitness < 1e-3);
    const auto s10 = benchmark_space<double>("sphere", 10);
    CHECK(igwo_optimize(sphere_obj, s10, IgwoParams{}, Budget{30, 500}, 1).best_fitness < 1e-2);
    CHECK(gwo_optimize(sphere_obj, s10, Budget{30, 500}, 1).best_fitness < 1e-2);
    CHECK(mgto_optimize(sphere_obj, s10, MgtoParams{}, Budget{30, 500}, 1).best_fitness < 1e-2);
}

TEST_CASE("budget accounting and single-step runs")
{
    const auto s = benchmark_space<double>("rastrigin", 3);
    const Objective<double> obj([](const Position<double>& x) { return rastrigin(x); });
    for (auto algo : all_algorithms) {
        CAPTURE(to_string(algo));
        const auto r = optimize(algo, obj, s, Budget{6, 4}, 9);
        CHECK(r.history.size() == 4);
        const std::size_t expected = algo == Algorithm::mgto ? 6 * 5 + 6 * 4 : 6 * 5;
        CHECK(r.evaluations == expected);
        for (std::size_t i = 1; i < r.history.size(); ++i)
            CHECK(r.history[i].best <= r.history[i - 1].best);
        CHECK(r.best_fitness == r.history.back().best);
        CHECK(obj(r.best_position) == r.best_fitness);
    }

    // With one iteration the best-so-far is the minimum of everything evaluated.
    std::vector<double> seen;
    std::mutex m;
    const Objective<double> logging([&](const Position<double>& x) {
        const double v = sphere(x);
        std::lock_guard lock(m);
        seen.push_back(v);
        return v;
    });
    const auto one = fox_optimize(logging, s, FoxParams{}, Budget{8, 1}, 5);
    REQUIRE(one.history.size() == 1);
    CHECK(one.history[0].best == *std::min_element(seen.begin(), seen.end()));
}

TEST_CASE("optimizers are deterministic for any worker count")
{
    const auto s = benchmark_space<double>("ackley", 5);
    const Objective<double> obj([](const Position<double>& x) { return ackley(x); });
    for (auto algo : all_algorithms) {
        CAPTURE(to_string(algo));
        const auto a = optimize(algo, obj, s, Budget{12, 40}, 77);
        const auto b = optimize(algo, obj, s, Budget{12, 40}, 77);
        const auto c = optimize(algo, obj, s, Budget{12, 40}, 77, {}, RunOptions{3});
        CHECK(a == b);
        CHECK(a == c);
        std::ostringstream ha, hc;
        write_history_csv(ha, a.history);
        write_history_csv(hc, c.history);
        CHECK(ha.str() == hc.str());
        CHECK_FALSE(a == optimize(algo, obj, s, Budget{12, 40}, 78));
    }
}

TEST_CASE("configuration errors")
{
    const auto s = benchmark_space<double>("sphere", 2);
    CHECK_THROWS_AS(igwo_optimize(sphere_obj, s, IgwoParams{}, Budget{2, 5}, 1), ConfigError);
    IgwoParams bad;
    bad.a_min = 3.0;
    CHECK_THROWS_AS(igwo_optimize(sphere_obj, s, bad, Budget{5, 5}, 1), ConfigError);
    FoxParams fp;
    fp.c1 = 1.5;
    CHECK_THROWS_AS(fox_optimize(sphere_obj, s, fp, Budget{5, 5}, 1), ConfigError);
    CHECK_THROWS_AS(parse_algorithm("pso"), ConfigError);
    CHECK(parse_algorithm("mgto") == Algorithm::mgto);
}

TEST_CASE("history csv")
{
    std::ostringstream out;
    write_history_csv(out, {{1.5, 2.0}, {0.25, 1.0 / 3.0}});
    CHECK(out.str() == "iteration,best,mean\n1,1.5,2\n2,0.25,0.3333333333333333\n");
}
