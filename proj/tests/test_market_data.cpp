#include <cmath>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "sectorfolio/market_data.hpp"

using namespace sectorfolio;

namespace {

const std::string kHeader = "date,open,high,low,close,volume,adj_close\n";

ReturnSeries returns_of(std::vector<double> closes) {
    std::vector<Date> dates;
    for (std::size_t i = 0; i < closes.size(); ++i)
        dates.push_back(Date(2020, 1, 1).shifted(static_cast<int>(i)));
    return daily_returns(fixtures::make_series("X", dates, closes));
}

} // namespace

TEST(Date, ParsesAndFormatsIso) {
    auto d = Date::parse("2021-06-01");
    EXPECT_EQ(d, Date(2021, 6, 1));
    EXPECT_EQ(d.to_string(), "2021-06-01");
    EXPECT_THROW(Date::parse("2021-02-30"), ParseError);
    EXPECT_THROW(Date::parse("2021/06/01"), ParseError);
    EXPECT_THROW(Date::parse("21-06-01"), ParseError);
}

TEST(ParseCsv, SingleRow) {
    auto s = parse_csv(kHeader + "2016-01-04,10,11,9,10.5,100,10.4\n", "ABC");
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s.symbol, "ABC");
    EXPECT_EQ(s.bars[0].date, Date(2016, 1, 4));
    EXPECT_DOUBLE_EQ(s.bars[0].close, 10.5);
    EXPECT_DOUBLE_EQ(s.bars[0].adj_close, 10.4);
}

TEST(ParseCsv, LowAboveHighNamesTheRow) {
    const std::string text = kHeader + "2016-01-04,10,11,9,10.5,100,10.4\n2016-01-05,10,9,11,10,100,10\n";
    try {
        parse_csv(text, "ABC");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_NE(std::string(e.what()).find("low > high"), std::string::npos);
    }
}

TEST(ParseCsv, LenientDropsInvalidBarsWithWarning) {
    const std::string text = kHeader + "2016-01-04,10,11,9,10.5,100,10.4\n2016-01-05,10,9,11,10,100,10\n";
    std::vector<std::string> warnings;
    ParseOptions opt{Validation::lenient, [&](const std::string& w) { warnings.push_back(w); }};
    auto s = parse_csv(text, "ABC", opt);
    EXPECT_EQ(s.size(), 1u);
    ASSERT_EQ(warnings.size(), 1u);
    EXPECT_NE(warnings[0].find("line 3"), std::string::npos);
}

TEST(ParseCsv, RejectsMalformedRows) {
    EXPECT_THROW(parse_csv(kHeader + "2016-01-04,10,11,9\n", "A"), ParseError);
    EXPECT_THROW(parse_csv(kHeader + "2016-01-04,10,11,9,abc,100,10\n", "A"), ParseError);
    EXPECT_THROW(parse_csv("date,close\n2016-01-04,10\n", "A"), ParseError);
    EXPECT_THROW(parse_csv("", "A"), ParseError);
    EXPECT_THROW(parse_csv(kHeader, "A"), ParseError);
    EXPECT_THROW(parse_csv(kHeader + "2016-01-04,10,11,9,0,100,10\n", "A"), ParseError);
    EXPECT_THROW(parse_csv(kHeader + "2016-01-04,10,11,9,10,-1,10\n", "A"), ParseError);
}

TEST(ParseCsv, SortsRowsAndRejectsDuplicateDates) {
    auto s = parse_csv(kHeader + "2016-01-05,1,2,1,2,1,2\n2016-01-04,1,2,1,1,1,1\n", "A");
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s.bars[0].date, Date(2016, 1, 4));
    EXPECT_DOUBLE_EQ(s.bars[1].close, 2.0);
    try {
        parse_csv(kHeader + "2016-01-04,1,2,1,1,1,1\n2016-01-05,1,2,1,1,1,1\n2016-01-04,1,2,1,1,1,1\n", "A");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 4u);
    }
}

TEST(ParseCsv, FiveYearFixtureHas1258Bars) {
    auto dates = fixtures::trading_dates(Date(2016, 1, 1), Date(2020, 12, 31), 1258);
    auto series = fixtures::make_series("NSE", dates, fixtures::random_walk(1258, 7));
    auto parsed = parse_csv(serialize_csv(series), "NSE");
    EXPECT_EQ(parsed.size(), 1258u);
    EXPECT_EQ(parsed.bars.front().date, Date(2016, 1, 1));
    EXPECT_EQ(parsed.bars.back().date, Date(2020, 12, 31));
}

TEST(ParseCsv, SerializeRoundTripIsIdentity) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + rng() % 200;
        auto dates = fixtures::weekdays(Date(2019, 1, 1), Date(2021, 1, 1));
        dates.resize(n);
        auto series = fixtures::make_series("RT", dates, fixtures::random_walk(n, rng()));
        auto back = parse_csv(serialize_csv(series), "RT");
        ASSERT_EQ(back.size(), series.size());
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_EQ(back.bars[i].date, series.bars[i].date);
            EXPECT_EQ(back.bars[i].open, series.bars[i].open);
            EXPECT_EQ(back.bars[i].high, series.bars[i].high);
            EXPECT_EQ(back.bars[i].low, series.bars[i].low);
            EXPECT_EQ(back.bars[i].close, series.bars[i].close);
            EXPECT_EQ(back.bars[i].volume, series.bars[i].volume);
            EXPECT_EQ(back.bars[i].adj_close, series.bars[i].adj_close);
        }
        EXPECT_EQ(serialize_csv(back), serialize_csv(series));
    }
}

TEST(DailyReturns, HandArithmetic) {
    auto r = returns_of({100, 110, 99});
    ASSERT_EQ(r.returns.size(), 2u);
    EXPECT_NEAR(r.returns[0], 0.10, 1e-15);
    EXPECT_NEAR(r.returns[1], -0.10, 1e-15);
    EXPECT_EQ(r.dates.front(), Date(2020, 1, 2));

    auto flat = returns_of({5, 5, 5});
    EXPECT_EQ(flat.returns, (std::vector<double>{0, 0}));

    auto r2 = returns_of({2, 4, 3});
    EXPECT_DOUBLE_EQ(r2.returns[0], 1.0);
    EXPECT_DOUBLE_EQ(r2.returns[1], -0.25);

    EXPECT_THROW(returns_of({1}), std::invalid_argument);
}

TEST(DailyReturns, CompoundingRecoversTotalReturn) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 25; ++trial) {
        auto closes = fixtures::random_walk(2 + rng() % 1000, rng());
        auto r = returns_of(closes);
        double growth = 1.0;
        for (double x : r.returns) {
            EXPECT_GT(x, -1.0);
            growth *= 1.0 + x;
        }
        const double expected = closes.back() / closes.front();
        EXPECT_NEAR(growth / expected, 1.0, 1e-10);
        EXPECT_EQ(r.returns.size(), closes.size() - 1);
    }
}

TEST(DailyReturns, ScaleFree) {
    auto closes = fixtures::random_walk(300, 5);
    auto scaled = closes;
    for (auto& c : scaled)
        c *= 37.5;
    auto a = returns_of(closes), b = returns_of(scaled);
    for (std::size_t i = 0; i < a.returns.size(); ++i)
        EXPECT_NEAR(a.returns[i], b.returns[i], 1e-14);
}

TEST(AssetStats, ZeroReturns) {
    auto s = asset_stats(returns_of({5, 5, 5, 5}));
    EXPECT_EQ(s.daily_volatility, 0.0);
    EXPECT_EQ(s.annual_volatility, 0.0);
}

TEST(AssetStats, TwoPointSampleStd) {
    // sample std of {+0.01, -0.01}: sqrt((0.01^2 + 0.01^2) / 1) = 0.0141421356...
    ReturnSeries r{"X", {0.01, -0.01}, {}};
    auto s = asset_stats(r);
    EXPECT_NEAR(s.daily_volatility, 0.01414213562373095, 1e-15);
    EXPECT_NEAR(s.annual_volatility, 0.22360679774997896, 1e-14);
    EXPECT_NEAR(s.mean_daily_return, 0.0, 1e-18);
}

TEST(AssetStats, AnnualOverDailyIsSqrt250) {
    auto s = asset_stats(returns_of(fixtures::random_walk(500, 9)));
    EXPECT_NEAR(s.annual_volatility / s.daily_volatility, std::sqrt(250.0), 1e-12);
    EXPECT_NEAR(std::sqrt(250.0), 15.8114, 1e-4);
}

TEST(AssetStats, TooFewObservations) {
    EXPECT_THROW(asset_stats(ReturnSeries{"X", {0.1}, {}}), std::invalid_argument);
}

TEST(AssetStats, InvariantUnderDateShift) {
    auto closes = fixtures::random_walk(120, 21);
    auto dates = fixtures::weekdays(Date(2018, 1, 1), Date(2019, 1, 1));
    dates.resize(closes.size());
    auto shifted = dates;
    for (auto& d : shifted)
        d = d.shifted(400);
    auto a = asset_stats(daily_returns(fixtures::make_series("A", dates, closes)));
    auto b = asset_stats(daily_returns(fixtures::make_series("A", shifted, closes)));
    EXPECT_EQ(a.daily_volatility, b.daily_volatility);
    EXPECT_EQ(a.mean_daily_return, b.mean_daily_return);
}

TEST(Align, IdenticalDatesKeepEverything) {
    auto dates = fixtures::weekdays(Date(2020, 1, 1), Date(2020, 2, 1));
    auto a = fixtures::make_series("A", dates, fixtures::random_walk(dates.size(), 1));
    auto b = fixtures::make_series("B", dates, fixtures::random_walk(dates.size(), 2));
    auto m = align({a, b});
    EXPECT_EQ(m.dates, dates);
    EXPECT_EQ(m.symbols, (std::vector<std::string>{"A", "B"}));
    EXPECT_EQ(m.closes(3, 1), b.bars[3].close);
}

TEST(Align, IntersectsDates) {
    Date a(2020, 1, 1), b(2020, 1, 2), c(2020, 1, 3), d(2020, 1, 4);
    auto s1 = fixtures::make_series("S1", {a, b, c}, {1, 2, 3});
    auto s2 = fixtures::make_series("S2", {b, c, d}, {20, 30, 40});
    auto m = align({s1, s2});
    ASSERT_EQ(m.dates, (std::vector<Date>{b, c}));
    EXPECT_EQ(m.closes(0, 0), 2);
    EXPECT_EQ(m.closes(1, 1), 30);

    auto s3 = fixtures::make_series("S3", {d}, {1});
    EXPECT_THROW(align({s1, s3}), std::invalid_argument);
    EXPECT_THROW(align({}), std::invalid_argument);
}

TEST(Align, OutputIsSortedSubsetOfEveryInput) {
    std::mt19937_64 rng(17);
    auto all = fixtures::weekdays(Date(2020, 1, 1), Date(2020, 12, 31));
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<PriceSeries> list;
        for (int s = 0; s < 4; ++s) {
            std::vector<Date> dates;
            for (const auto& d : all)
                if (rng() % 4 != 0)
                    dates.push_back(d);
            list.push_back(fixtures::make_series("S" + std::to_string(s), dates,
                                                 fixtures::random_walk(dates.size(), rng())));
        }
        auto m = align(list);
        EXPECT_TRUE(std::is_sorted(m.dates.begin(), m.dates.end()));
        EXPECT_TRUE(std::adjacent_find(m.dates.begin(), m.dates.end()) == m.dates.end());
        for (std::size_t s = 0; s < list.size(); ++s)
            for (std::size_t k = 0; k < m.dates.size(); ++k) {
                auto it = std::find_if(list[s].bars.begin(), list[s].bars.end(),
                                       [&](const PriceBar& b) { return b.date == m.dates[k]; });
                ASSERT_NE(it, list[s].bars.end());
                EXPECT_EQ(m.closes(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(s)), it->close);
            }
    }
}

TEST(SectorUniverse, Validation) {
    SectorUniverse ok{"it", {{"IFY", 25.10}, {"TCS", 24.76}}};
    EXPECT_NO_THROW(ok.validate());
    SectorUniverse dup{"it", {{"IFY", 25.10}, {"IFY", 24.76}}};
    EXPECT_THROW(dup.validate(), std::invalid_argument);
    SectorUniverse neg{"it", {{"IFY", -1.0}}};
    EXPECT_THROW(neg.validate(), std::invalid_argument);
    SectorUniverse unweighted{"auto", {{"BAJ", std::nullopt}}};
    EXPECT_NO_THROW(unweighted.validate());
}
