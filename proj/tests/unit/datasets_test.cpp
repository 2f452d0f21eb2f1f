// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include <doctest.h>

#include "helpers.hpp"
#include "stssl/datasets/io.hpp"
#include "stssl/datasets/synth.hpp"
#include "stssl/datasets/windows.hpp"
#include "stssl/error.hpp"

using namespace stssl;
using namespace stssl::data;
using num::Shape;
using num::Tensor;

namespace {

WeatherSeries tiny_series(std::size_t days, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    WeatherSeries s;
    s.regions = testing::lattice(n);
    s.start = parse_date("2021-03-01");
    s.values = Tensor(Shape{days, n, kVariables});
    s.valid.assign(s.values.size(), true);
    for (std::size_t t = 0; t < days; ++t)
        for (std::size_t i = 0; i < n; ++i) {
            double* v = &s.values.at(t, i, 0);
            v[0] = 10.0 + 8.0 * u(rng);
            v[1] = 6.0 * u(rng);
            v[2] = 359.999 * u(rng);
            v[3] = 1000.0 + 20.0 * u(rng);
            v[4] = 100.0 * u(rng);
            v[5] = v[0] - 3.0 * u(rng);
        }
    return s;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    double ma = 0.0, mb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        ma += a[k];
        mb += b[k];
    }
    ma /= double(a.size());
    mb /= double(b.size());
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        sab += (a[k] - ma) * (b[k] - mb);
        saa += (a[k] - ma) * (a[k] - ma);
        sbb += (b[k] - mb) * (b[k] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

std::string csv_text(const std::vector<std::string>& rows) {
    std::string out = "# regions: id,x_km,y_km\n0,0,0\n1,50,0\n";
    out += std::string(kColumnHeader) + "\n";
    for (const auto& r : rows) out += r + "\n";
    return out;
}

} // namespace

TEST_SUITE("series") {

TEST_CASE("variable catalogue") {
    CHECK(kVariableSpecs.size() == 6);
    CHECK(variable_from_name("dew_point") == Variable::DewPoint);
    CHECK_THROWS_AS(variable_from_name("humidity"), SchemaError);
    int circular = 0;
    for (const auto& v : kVariableSpecs) circular += v.circular;
    CHECK(circular == 1);
    CHECK(kVariableSpecs[index(Variable::WindAngle)].circular);
}

TEST_CASE("dates") {
    CHECK(format_date(parse_date("2020-02-29")) == "2020-02-29");
    CHECK_THROWS_AS(parse_date("2021-02-29"), SchemaError);
    CHECK_THROWS_AS(parse_date("21-2-1"), SchemaError);
}

TEST_CASE("wind angle encoding") {
    const auto [s0, c0] = encode_wind_angle(0.0);
    CHECK(s0 == 0.0);
    CHECK(c0 == 1.0);
    const auto [s90, c90] = encode_wind_angle(90.0);
    CHECK(s90 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(c90) < 1e-15);
    const auto [s, c] = encode_wind_angle(123.4);
    CHECK(std::abs(decode_wind_angle(s, c) - 123.4) <= 1e-9);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 360.0);
    for (int k = 0; k < 10000; ++k) {
        const double deg = u(rng);
        const auto [a, b] = encode_wind_angle(deg);
        CHECK(std::abs(a * a + b * b - 1.0) <= 1e-15);
        const double back = decode_wind_angle(a, b);
        CHECK(back >= 0.0);
        CHECK(back < 360.0);
        const double diff = std::abs(back - deg);
        CHECK(std::min(diff, 360.0 - diff) <= 1e-9);
    }
}

TEST_CASE("normalization round trip and statistics") {
    auto s = tiny_series(40, 3, 2);
    s.valid[17] = false;
    s.values[17] = 0.0;
    const auto stats = compute_stats(s, 40);
    const auto e = normalize(s, stats);
    CHECK(e.values.shape() == Shape{40, 3, 7});
    const auto back = denormalize(e, stats);
    double worst = 0.0;
    for (std::size_t k = 0; k < s.values.size(); ++k) {
        if (!s.valid[k]) {
            CHECK(!back.valid[k]);
            continue;
        }
        double d = std::abs(back.values[k] - s.values[k]);
        if (k % kVariables == index(Variable::WindAngle)) d = std::min(d, 360.0 - d);
        worst = std::max(worst, d);
    }
    CHECK(worst < 1e-10);
    // z-scored temperature over the statistics span has zero mean
    double mean = 0.0;
    for (std::size_t t = 0; t < 40; ++t)
        for (std::size_t i = 0; i < 3; ++i) mean += e.values.at(t, i, 0);
    CHECK(std::abs(mean / 120.0) < 1e-9);
}

TEST_CASE("constant column normalizes to zeros") {
    auto s = tiny_series(20, 2, 3);
    for (std::size_t t = 0; t < 20; ++t)
        for (std::size_t i = 0; i < 2; ++i) s.values.at(t, i, index(Variable::Pressure)) = 1010.0;
    const auto stats = compute_stats(s, 20);
    CHECK(stats.stddev[index(Variable::Pressure)] == kStdFloor);
    const auto e = normalize(s, stats);
    for (std::size_t t = 0; t < 20; ++t)
        for (std::size_t i = 0; i < 2; ++i) CHECK(e.values.at(t, i, kChannelOf[index(Variable::Pressure)]) == 0.0);
}

TEST_CASE("validation rejects inconsistent series") {
    auto s = tiny_series(20, 2, 4);
    s.values[3] = std::nan("");
    CHECK_THROWS_AS(validate(s), SchemaError);
    s.valid[3] = false;
    s.values[3] = 0.0;
    CHECK_NOTHROW(validate(s));
    s.valid.pop_back();
    CHECK_THROWS_AS(validate(s), SchemaError);
}

} // TEST_SUITE

TEST_SUITE("io") {

TEST_CASE("csv round trip is exact") {
    auto s = tiny_series(30, 4, 5);
    s.valid[11] = false;
    s.values[11] = 0.0;
    const auto text = to_csv(s);
    CHECK(text.rfind(std::string(kRegionHeader) + "\n", 0) == 0);
    CHECK(text.find(std::string(kColumnHeader) + "\n") != std::string::npos);
    CHECK(text.find('\r') == std::string::npos);
    CHECK(parse_csv(text) == s);
    CHECK(parse_json(to_json(s)) == s);
}

TEST_CASE("file round trip through both formats") {
    const auto dir = std::filesystem::temp_directory_path() / "stssl_io_test";
    std::filesystem::create_directories(dir);
    const auto s = synthesize(SynthSpec{3, 4, 40, 0.05});
    write_series(s, dir / "grid.csv");
    write_series(s, dir / "grid.json");
    CHECK(ingest(dir / "grid.csv") == s);
    CHECK(ingest(dir / "grid.json") == s);
    CHECK_THROWS_AS(ingest(dir / "absent.csv"), IoError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("small file shape and missing cells") {
    std::vector<std::string> rows;
    for (int d = 1; d <= 14; ++d) {
        char date[16];
        std::snprintf(date, sizeof date, "2020-01-%02d", d);
        for (int r = 0; r < 2; ++r) {
            const bool hole = d == 5 && r == 1;
            rows.push_back(std::string(date) + "," + std::to_string(r) + ",1.5,2," + (hole ? "" : "90") + ",1000,50,0.5");
        }
    }
    const auto s = parse_csv(csv_text(rows));
    CHECK(s.steps() == 14);
    CHECK(s.region_count() == 2);
    CHECK(s.missing_count() == 1);
    CHECK(!s.is_valid(4, 1, index(Variable::WindAngle)));
    CHECK(s.is_valid(4, 0, index(Variable::WindAngle)));

    std::mt19937_64 rng(6);
    auto shuffled = rows;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(parse_csv(csv_text(shuffled)) == s);
}

TEST_CASE("malformed input is reported") {
    const std::string good = "2020-01-01,0,1,2,3,4,5,6";
    try {
        parse_csv(csv_text({good, "2020-01-01,1,1,two,3,4,5,6"}));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 6);
    }
    CHECK_THROWS_AS(parse_csv(csv_text({good, "2020-01-01,1,1,2"})), ParseError);
    CHECK_THROWS_AS(parse_csv(csv_text({good, "2020-01-01,1,1,2,3,4,5,6", "2020-01-03,0,1,2,3,4,5,6",
                                        "2020-01-03,1,1,2,3,4,5,6"})),
                    SchemaError);
    CHECK_THROWS_AS(parse_csv(csv_text({good, good, "2020-01-01,1,1,2,3,4,5,6"})), SchemaError);
    std::string unknown = csv_text({good});
    unknown.replace(unknown.find("dew_point"), 9, "humidity");
    CHECK_THROWS_AS(parse_csv(unknown), SchemaError);
    CHECK_THROWS_AS(parse_csv("timestamp,region_id\n"), ParseError);
    try {
        parse_json("{\n  \"regions\": [\n  oops\n]}");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse_json("{}"), SchemaError);
}

} // TEST_SUITE

TEST_SUITE("windows") {

TEST_CASE("window counts") {
    for (std::size_t days : {14u, 15u, 20u, 100u}) {
        const auto e = normalize(tiny_series(days, 2, 7), compute_stats(tiny_series(days, 2, 7), days));
        CHECK(window_samples(e).size() == days - 13);
    }
    std::vector<std::string> warnings;
    const auto short_series = tiny_series(13, 2, 8);
    CHECK(window_samples(normalize(short_series, compute_stats(short_series, 13)), &warnings).empty());
    CHECK(warnings.size() == 1);
}

TEST_CASE("window contents mirror the series") {
    const auto raw = tiny_series(30, 3, 9);
    const auto e = normalize(raw, compute_stats(raw, 30));
    const auto w = window_samples(e);
    for (const auto& s : w) {
        CHECK(s.anchor_day == raw.day(s.anchor));
        CHECK(s.input.shape() == Shape{7, 3, 7});
        for (std::size_t h = 1; h <= 7; ++h)
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t c = 0; c < 7; ++c) {
                    CHECK(s.target.at(h - 1, i, c) == e.values.at(s.anchor + h, i, c));
                    CHECK(s.input.at(7 - h, i, c) == e.values.at(s.anchor + 1 - h, i, c));
                }
    }
}

TEST_CASE("split is chronological and leak free") {
    const auto raw = synthesize(SynthSpec{});
    const auto split = make_split(raw);
    CHECK(split.train.size() == 270);
    CHECK(split.validation.size() == 58);
    CHECK(split.test.size() == 59);
    CHECK(split.train.back().anchor < split.validation.front().anchor);
    CHECK(split.validation.back().anchor < split.test.front().anchor);
    CHECK(split.train.back().anchor + 7 < split.train_end_step + 1);
    CHECK(split.train_history().shape() == Shape{split.train_end_step, 9, 7});

    auto perturbed = raw;
    for (std::size_t t = split.train_end_step; t < raw.steps(); ++t)
        for (std::size_t i = 0; i < 9; ++i) perturbed.values.at(t, i, 0) += 50.0;
    CHECK(make_split(perturbed).stats == split.stats);

    const auto pinned = make_split(perturbed, {}, &split.stats);
    CHECK(pinned.stats == split.stats);
    CHECK_THROWS_AS(make_split(tiny_series(16, 2, 1)), ContractError);
}

} // TEST_SUITE

TEST_SUITE("synth") {

TEST_CASE("deterministic per seed") {
    const auto a = synthesize(SynthSpec{});
    const auto b = synthesize(SynthSpec{});
    CHECK(a == b);
    CHECK(to_csv(a) == to_csv(b));
    SynthSpec other;
    other.seed = 8;
    CHECK(!(synthesize(other) == a));
    CHECK(a.steps() == 400);
    CHECK(a.region_count() == 9);
}

TEST_CASE("ranges and missing entries") {
    SynthSpec spec;
    spec.missing_rate = 0.1;
    const auto s = synthesize(spec);
    const double rate = double(s.missing_count()) / double(s.values.size());
    CHECK(rate == doctest::Approx(0.1).epsilon(0.1));
    for (std::size_t t = 0; t < s.steps(); ++t)
        for (std::size_t i = 0; i < s.region_count(); ++i) {
            if (!s.is_valid(t, i, index(Variable::WindAngle))) continue;
            const double a = s.values.at(t, i, index(Variable::WindAngle));
            CHECK(a >= 0.0);
            CHECK(a < 360.0);
        }
    CHECK_NOTHROW(validate(s));
    // The complete series under the same seed differs only where masked.
    const auto full = synthesize(SynthSpec{});
    for (std::size_t k = 0; k < s.values.size(); ++k)
        if (s.valid[k]) CHECK(s.values[k] == full.values[k]);
}

TEST_CASE("nearby regions are more alike than distant ones") {
    const auto s = synthesize(SynthSpec{});
    auto temperature = [&](std::size_t i) {
        std::vector<double> v;
        for (std::size_t t = 0; t < s.steps(); ++t) {
            // Day-to-day change strips the shared seasonal cycle.
            v.push_back(s.values.at(t, i, 0) - (t ? s.values.at(t - 1, i, 0) : s.values.at(t, i, 0)));
        }
        return v;
    };
    const auto corner = temperature(0);
    CHECK(pearson(corner, temperature(1)) > pearson(corner, temperature(8)));
    CHECK(pearson(temperature(4), temperature(5)) > pearson(temperature(3), temperature(5)));
}

TEST_CASE("preconditions") {
    SynthSpec spec;
    spec.regions = 1;
    CHECK_THROWS_AS(synthesize(spec), ContractError);
    spec = SynthSpec{};
    spec.days = 27;
    CHECK_THROWS_AS(synthesize(spec), ContractError);
    spec = SynthSpec{};
    spec.missing_rate = 1.0;
    CHECK_THROWS_AS(synthesize(spec), ContractError);
}

} // TEST_SUITE
