#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ousynth/errors.hpp"
#include "ousynth/timeseries.hpp"

using namespace ousynth;

namespace {

PriceSeries series(const std::string& id, std::vector<int64_t> dates, std::vector<double> values) {
    return PriceSeries{id, std::move(dates), std::move(values)};
}

ReturnSeries rets(const std::string& id, std::vector<int64_t> dates, std::vector<double> values) {
    return ReturnSeries{id, std::move(dates), std::move(values)};
}

}  // namespace

TEST_CASE("returns_from_prices") {
    SUBCASE("constant series has zero returns") {
        const auto r = returns_from_prices(series("X", {0, 1, 2}, {1, 1, 1}));
        REQUIRE(r.values.size() == 2);
        CHECK(r.values[0] == 0.0);
        CHECK(r.values[1] == 0.0);
        CHECK(r.dates == std::vector<int64_t>{1, 2});
    }
    SUBCASE("direct ratio oracle") {
        const std::vector<double> p{1.0, 1.1, 0.99};
        const auto r = returns_from_prices(series("X", {0, 1, 2}, p));
        for (size_t t = 0; t < r.values.size(); ++t)
            CHECK(r.values[t] == p[t + 1] / p[t] - 1.0);  // oracle: p_{t+1}/p_t - 1
        CHECK(r.values[0] == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(r.values[1] == doctest::Approx(-0.1).epsilon(1e-12));
    }
    SUBCASE("non-positive price names the date") {
        CHECK_THROWS_WITH_AS(returns_from_prices(series("X", {5, 6, 7}, {1.0, -2.0, 1.0})),
                             doctest::Contains("date 6"), DomainError);
    }
}

TEST_CASE("prices_from_returns") {
    SUBCASE("empty propagation") {
        const auto p = prices_from_returns(rets("X", {}, {}), 1.0);
        REQUIRE(p.values.size() == 1);
        CHECK(p.values[0] == 1.0);
    }
    SUBCASE("cumulative-product oracle") {
        const std::vector<double> r{0.1, -0.1};
        const auto p = prices_from_returns(rets("X", {1, 2}, r), 1.0);
        double level = 1.0;
        REQUIRE(p.values.size() == 3);
        CHECK(p.values[0] == 1.0);
        for (size_t t = 0; t < r.size(); ++t) {
            level *= 1.0 + r[t];
            CHECK(p.values[t + 1] == level);
        }
        CHECK(p.values[1] == doctest::Approx(1.1).epsilon(1e-12));
        CHECK(p.values[2] == doctest::Approx(0.99).epsilon(1e-12));
    }
    SUBCASE("all-zero returns keep the start level") {
        const auto p = prices_from_returns(rets("X", {1, 2, 3}, {0, 0, 0}), 2.0);
        for (double v : p.values) CHECK(v == 2.0);
    }
    SUBCASE("return at -1 rejected") {
        CHECK_THROWS_AS(prices_from_returns(rets("X", {1}, {-1.0}), 1.0), DomainError);
    }
}

TEST_CASE("relative and recombined returns") {
    const auto market = rets("SPY", {1, 2, 3}, {0.005, -0.002, 0.01});

    SUBCASE("sector equal to market is all zeros") {
        const auto rel = relative_returns(market, market);
        for (double v : rel.values) CHECK(v == 0.0);
    }
    SUBCASE("elementwise subtraction oracle") {
        const auto rel = relative_returns(rets("XLK", {1}, {0.02}), rets("SPY", {1}, {0.005}));
        CHECK(rel.values[0] == doctest::Approx(0.015).epsilon(1e-15));
    }
    SUBCASE("addition oracle") {
        const auto sec = recombine_returns(rets("XLK", {1}, {0.015}), rets("SPY", {1}, {0.005}));
        CHECK(sec.values[0] == doctest::Approx(0.02).epsilon(1e-15));
    }
    SUBCASE("zero relative returns give back the market") {
        const auto sec = recombine_returns(rets("XLK", {1, 2, 3}, {0, 0, 0}), market);
        CHECK(sec.values == market.values);
    }
    SUBCASE("date axis mismatch") {
        CHECK_THROWS_AS(relative_returns(rets("A", {1, 2}, {0, 0}), rets("B", {1, 3}, {0, 0})),
                        AlignmentError);
    }
}

TEST_CASE("align_panel") {
    SUBCASE("single series") {
        const auto p = align_panel({series("A", {1, 2, 3}, {1, 2, 3})});
        CHECK(p.cols() == 1);
        CHECK(p.dates == std::vector<int64_t>{1, 2, 3});
        CHECK(p.values(2, 0) == 3.0);
    }
    SUBCASE("set-intersection oracle") {
        const auto p = align_panel({series("A", {1, 2, 3}, {1, 2, 3}),
                                    series("B", {2, 3, 4}, {20, 30, 40})});
        CHECK(p.dates == std::vector<int64_t>{2, 3});
        CHECK(p.columns == std::vector<std::string>{"A", "B"});
        CHECK(p.values(0, 0) == 2.0);
        CHECK(p.values(0, 1) == 20.0);
        CHECK(p.values(1, 1) == 30.0);
    }
    SUBCASE("disjoint dates") {
        CHECK_THROWS_AS(
            align_panel({series("A", {1, 2}, {1, 1}), series("B", {3, 4}, {1, 1})}),
            AlignmentError);
    }
}

TEST_CASE("round-trip and inverse-pair properties") {
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> level(0.2, 5.0);
    std::uniform_real_distribution<double> ret(-0.05, 0.05);
    std::uniform_int_distribution<int> len(2, 400);

    for (int trial = 0; trial < 200; ++trial) {
        const int n = len(gen);
        PriceSeries p;
        p.id = "T";
        double v = level(gen);
        for (int t = 0; t < n; ++t) {
            p.dates.push_back(t);
            p.values.push_back(v);
            v *= 1.0 + ret(gen);
        }
        const auto back = prices_from_returns(returns_from_prices(p), p.values[0], p.dates[0]);
        REQUIRE(back.values.size() == p.values.size());
        for (size_t t = 0; t < p.values.size(); ++t)
            CHECK(std::abs(back.values[t] - p.values[t]) <= 1e-12 * std::abs(p.values[t]));
        CHECK(back.dates == p.dates);

        // relative/recombine exact inverses against a shared market
        ReturnSeries sector = returns_from_prices(p);
        ReturnSeries market = sector;
        for (auto& x : market.values) x = ret(gen);
        const auto rel = relative_returns(sector, market);
        const auto rec = recombine_returns(rel, market);
        for (size_t t = 0; t < sector.values.size(); ++t)
            CHECK(std::abs(rec.values[t] - sector.values[t]) <= 1e-15);
    }
}

TEST_CASE("aligned dates are a strictly increasing subset of every input") {
    std::mt19937 gen(11);
    std::uniform_real_distribution<double> level(0.5, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<PriceSeries> inputs;
        for (int k = 0; k < 3; ++k) {
            PriceSeries s;
            s.id = "S" + std::to_string(k);
            for (int d = 0; d < 40; ++d) {
                if (gen() % 4 != 0) {  // drop ~25% of days
                    s.dates.push_back(d);
                    s.values.push_back(level(gen));
                }
            }
            if (s.dates.size() < 2) s = series("S" + std::to_string(k), {0, 1}, {1, 1});
            inputs.push_back(std::move(s));
        }
        PricePanel panel;
        try {
            panel = align_panel(inputs);
        } catch (const AlignmentError&) {
            continue;  // legitimately empty intersection
        }
        for (size_t t = 0; t + 1 < panel.dates.size(); ++t)
            CHECK(panel.dates[t] < panel.dates[t + 1]);
        for (const auto& s : inputs)
            for (int64_t d : panel.dates)
                CHECK(std::find(s.dates.begin(), s.dates.end(), d) != s.dates.end());
    }
}

TEST_CASE("panel utilities") {
    const auto p = align_panel({series("A", {1, 2, 3}, {1, 2, 4}), series("B", {1, 2, 3}, {2, 2, 2})});
    const auto r = column_returns(p, 0);
    CHECK(r == std::vector<double>{1.0, 1.0});
    const auto sub = select_columns(p, {"B"});
    CHECK(sub.cols() == 1);
    CHECK(sub.values(0, 0) == 2.0);
    CHECK_THROWS_AS(select_columns(p, {"C"}), DomainError);
}

TEST_CASE("iso dates") {
    CHECK(parse_iso_date("1970-01-01") == 0);
    CHECK(parse_iso_date("2020-04-01") == 18353);
    CHECK(format_iso_date(18353) == "2020-04-01");
    CHECK(format_iso_date(parse_iso_date("1999-12-31")) == "1999-12-31");
    CHECK_THROWS_AS(parse_iso_date("2020-13-01"), ParseError);
    CHECK_THROWS_AS(parse_iso_date("2020-02-30"), ParseError);
    CHECK_THROWS_AS(parse_iso_date("20200401"), ParseError);
}
