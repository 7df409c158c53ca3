#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "swdo/evalstats.hpp"
#include "swdo/fixtures.hpp"
#include "swdo/rng.hpp"

using namespace swdo;

namespace {

struct Oracle {
    double statistic, p;
};

// Two-sample t with Boost's t distribution for the p-value.
Oracle oracle_ttest(const std::vector<double>& a, const std::vector<double>& b, bool welch)
{
    const auto mean_var = [](const std::vector<double>& x) {
        double m = 0;
        for (double v : x)
            m += v;
        m /= static_cast<double>(x.size());
        double s = 0;
        for (double v : x)
            s += (v - m) * (v - m);
        return std::pair{m, s / static_cast<double>(x.size() - 1)};
    };
    const auto [m1, v1] = mean_var(a);
    const auto [m2, v2] = mean_var(b);
    const double n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size());
    const double se2 = v1 / n1 + v2 / n2;
    const double t = (m1 - m2) / std::sqrt(se2);
    const double df = welch ? se2 * se2 / ((v1 / n1) * (v1 / n1) / (n1 - 1) + (v2 / n2) * (v2 / n2) / (n2 - 1))
                            : n1 + n2 - 2;
    const boost::math::students_t dist(df);
    return {t, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)))};
}

std::vector<double> row_of(const FoldTable& t, const std::string& model) { return t.folds[t.index_of(model)]; }

} // namespace

TEST_CASE("confusion counts")
{
    const std::vector<double> p{0.9, 0.1};
    const std::vector<int> y{1, 0};
    CHECK(confusion(p, y) == ConfusionCounts{1, 1, 0, 0});
    const std::vector<double> p1{0.9};
    const std::vector<int> y0{0};
    CHECK(confusion(p1, y0).fp == 1);
    const std::vector<double> tie{0.5};
    const std::vector<int> y1{1};
    CHECK(confusion(tie, y1).tp == 1);
    CHECK_THROWS(confusion(std::vector<double>{}, std::vector<int>{}));
    CHECK_THROWS(confusion(p, y1));
}

TEST_CASE("classification metrics")
{
    const auto m = classification_metrics({50, 40, 5, 5});
    CHECK(m.accuracy.value == 0.9);
    CHECK(m.precision.value == 10.0 / 11.0);
    CHECK(m.recall.value == 10.0 / 11.0);
    CHECK(m.f_measure.value == doctest::Approx(10.0 / 11.0).epsilon(1e-15));

    const auto one = classification_metrics({1, 0, 0, 0});
    CHECK(one.accuracy.value == 1.0);
    CHECK(one.precision.value == 1.0);
    CHECK(one.recall.value == 1.0);
    CHECK(one.f_measure.value == 1.0);

    const auto none = classification_metrics({0, 3, 0, 4});
    CHECK(none.precision.value == 0.0);
    CHECK(none.precision.degenerate);
    CHECK_FALSE(none.recall.degenerate);
    CHECK(none.f_measure.degenerate);
    CHECK(accuracy({}).degenerate);
}

TEST_CASE("student t cdf against boost")
{
    CHECK(student_t_cdf(0.0, 3.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(student_t_cdf(std::numeric_limits<double>::infinity(), 4.0) == 1.0);
    CHECK(student_t_cdf(-std::numeric_limits<double>::infinity(), 4.0) == 0.0);
    CHECK_THROWS(student_t_cdf(1.0, 0.0));
    RngStream rng(4, 4);
    for (int i = 0; i < 200; ++i) {
        const double df = rng.uniform(0.5, 60.0), t = rng.uniform(-12.0, 12.0);
        const double want = boost::math::cdf(boost::math::students_t(df), t);
        REQUIRE(student_t_cdf(t, df) == doctest::Approx(want).epsilon(1e-10));
    }
    CHECK(2.0 * (1.0 - student_t_cdf(4.1328, 8.0)) == doctest::Approx(0.0032).epsilon(0.05));
}

TEST_CASE("incomplete beta against boost")
{
    RngStream rng(5, 5);
    for (int i = 0; i < 200; ++i) {
        const double a = rng.uniform(0.1, 30.0), b = rng.uniform(0.1, 30.0), x = rng.uniform();
        REQUIRE(incomplete_beta(a, b, x) == doctest::Approx(boost::math::ibeta(a, b, x)).epsilon(1e-10));
    }
    CHECK(incomplete_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(incomplete_beta(2.0, 3.0, 1.0) == 1.0);
}

TEST_CASE("t-test against an independent oracle")
{
    RngStream rng(6, 6);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> a(static_cast<std::size_t>(rng.uniform_int(2, 9))),
            b(static_cast<std::size_t>(rng.uniform_int(2, 9)));
        for (auto& v : a)
            v = rng.uniform(0.9, 1.0);
        for (auto& v : b)
            v = rng.uniform(0.85, 1.0);
        for (bool welch : {false, true}) {
            const auto got = ttest(a, b, welch ? DfRule::welch : DfRule::pooled);
            const auto want = oracle_ttest(a, b, welch);
            REQUIRE(got.statistic == doctest::Approx(want.statistic).epsilon(1e-12));
            REQUIRE(got.p_value == doctest::Approx(want.p).epsilon(1e-9));
        }
    }
    const std::vector<double> same{0.5, 0.7, 0.6};
    const auto z = ttest(same, same);
    CHECK(z.statistic == 0.0);
    CHECK(z.p_value == 1.0);
    const std::vector<double> flat{0.5, 0.5};
    CHECK(ttest(flat, flat).p_value == 1.0);
    CHECK_THROWS(ttest(std::vector<double>{1.0}, same));
}

TEST_CASE("published pairs from the bundled folds")
{
    const auto t = fixtures::load("isic2016");
    const auto check = [&](const std::string& a, const std::string& b, double stat, double p) {
        CAPTURE(a);
        const auto r = ttest(row_of(t, a), row_of(t, b));
        CHECK(std::abs(r.statistic - stat) <= 1e-3);
        CHECK(std::abs(r.p_value - p) <= 5e-4);
    };
    check("Xception", "Xception+Wavelet", -4.1328, 0.0032);
    check("Inception", "Inception+Wavelet", -1.9801, 0.0830);
    check("DenseNet", "DenseNet+Wavelet", -0.0705, 0.9454);
    check("MobileNet", "MobileNet+Wavelet", -0.2828, 0.7844);
}

TEST_CASE("comparison matrix")
{
    const auto t = fixtures::load("isic2017");
    const auto m = comparison_matrix(t);
    REQUIRE(m.models == t.models);
    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(m.at(i, i).statistic == 0.0);
        CHECK(m.at(i, i).p_value == 1.0);
        for (std::size_t j = 0; j < t.size(); ++j)
            CHECK(m.at(i, j).statistic == doctest::Approx(-m.at(j, i).statistic).epsilon(1e-14));
    }
    std::ostringstream csv;
    write_comparison_csv(csv, m);
    const auto text = csv.str();
    CHECK(text.rfind("model_a,model_b,statistic,p_value\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(1 + t.size() * t.size()));
}

TEST_CASE("fold table parsing")
{
    std::istringstream good("model,f1,f2\nA,0.9,0.8\nB,0.7,0.75\n");
    const auto t = read_fold_table(good);
    CHECK(t.models == std::vector<std::string>{"A", "B"});
    CHECK(t.fold_count() == 2);
    std::ostringstream out;
    write_fold_table(out, t);
    std::istringstream again(out.str());
    CHECK(read_fold_table(again).folds == t.folds);

    std::istringstream bad_number("model,f1,f2\nA,0.9,x\n");
    CHECK_THROWS_WITH_AS(read_fold_table(bad_number), doctest::Contains("line 2"), DataError);
    std::istringstream ragged("model,f1,f2\nA,0.9\n");
    CHECK_THROWS_AS(read_fold_table(ragged), DataError);
    std::istringstream range("model,f1,f2\nA,0.9,1.5\n");
    CHECK_THROWS_AS(read_fold_table(range), DataError);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_fold_table(empty), DataError);
    CHECK_THROWS_AS(t.index_of("C"), DataError);
}

TEST_CASE("bundled fixtures")
{
    for (auto name : fixtures::names) {
        const auto t = fixtures::load(name);
        CHECK(t.size() == 20);
        CHECK(t.fold_count() == 5);
        CHECK(t.folds == fixtures::builtin(name).folds);
    }
    CHECK_THROWS_AS(fixtures::builtin("isic2020"), DataError);

    const auto dir = std::filesystem::temp_directory_path() / "swdo_fixture_test";
    std::filesystem::create_directories(dir);
    std::filesystem::copy_file(fixtures::path_of("isic2016"), fixtures::path_of("isic2016", dir),
                               std::filesystem::copy_options::overwrite_existing);
    CHECK_NOTHROW(fixtures::load("isic2016", dir));
    std::ofstream(fixtures::path_of("isic2016", dir), std::ios::app) << "Extra,0.5,0.5,0.5,0.5,0.5\n";
    CHECK_THROWS_WITH_AS(fixtures::load("isic2016", dir), doctest::Contains("isic2016"), DataError);
    std::filesystem::remove_all(dir);
}
