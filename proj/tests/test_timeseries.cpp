#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "arrkit/regress.hpp"
#include "arrkit/timeseries.hpp"
#include "doctest.h"

using namespace arrkit;

namespace {

std::vector<double> sampled(double dt, double t_end, double (*f)(double)) {
    std::vector<double> out;
    for (double t = 0.0; t <= t_end + 1e-12; t += dt) out.push_back(f(t));
    return out;
}

Dataset two_column_dataset(std::size_t n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = g(rng);
        b[i] = g(rng);
    }
    return make_dataset({"a", "b"}, {a, b}, 0.5);
}

std::string temp_csv_path(const char* tag) {
    return (std::filesystem::temp_directory_path() / (std::string("arrkit_ts_") + tag + ".csv"))
        .string();
}

}  // namespace

// ============================================================================
// integrate
// ============================================================================

TEST_CASE("cumulative trapezoid is exact for constants") {
    const auto series = std::vector<double>(11, 1.0);  // 1.0 on [0, 1] at dt = 0.1
    const auto integral = integrate(series, 0.1);
    REQUIRE(integral.size() == series.size());
    CHECK(integral.front() == 0.0);
    CHECK(integral.back() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cumulative trapezoid is exact for ramps") {
    const auto series = sampled(0.01, 1.0, [](double t) { return t; });
    const auto integral = integrate(series, 0.01);
    CHECK(integral.back() == doctest::Approx(0.5).epsilon(1e-12));
    // Pointwise too: integral of t is t^2/2 and the trapezoid rule reproduces
    // piecewise-linear functions without truncation error.
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double t = 0.01 * static_cast<double>(i);
        CHECK(integral[i] == doctest::Approx(0.5 * t * t).epsilon(1e-10));
    }
}

TEST_CASE("cumulative trapezoid tracks the closed form of sin") {
    const double dt = 0.001;
    std::vector<double> series;
    std::size_t n = static_cast<std::size_t>(std::floor(std::numbers::pi / dt)) + 1;
    for (std::size_t i = 0; i < n; ++i) series.push_back(std::sin(dt * static_cast<double>(i)));
    const auto integral = integrate(series, dt);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = dt * static_cast<double>(i);
        CHECK(std::abs(integral[i] - (1.0 - std::cos(t))) < 1e-5);
    }
    CHECK(std::abs(integral.back() - (1.0 - std::cos(dt * static_cast<double>(n - 1)))) < 1e-5);
}

TEST_CASE("integrate rejects degenerate input") {
    CHECK_THROWS_AS(integrate({1.0}, 0.1), DegenerateDataError);
    CHECK_THROWS_AS(integrate({1.0, 2.0}, 0.0), ValidationError);
    CHECK_THROWS_AS(integrate({1.0, 2.0}, -1.0), ValidationError);
}

TEST_CASE("integrate is linear") {
    std::mt19937 rng(11);
    std::normal_distribution<double> g;
    std::vector<double> f(200), h(200);
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = g(rng);
        h[i] = g(rng);
    }
    std::vector<double> combo(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) combo[i] = 2.0 * f[i] + 3.0 * h[i];

    const auto lhs = integrate(combo, 0.1);
    const auto fi = integrate(f, 0.1);
    const auto hi = integrate(h, 0.1);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double rhs = 2.0 * fi[i] + 3.0 * hi[i];
        CHECK(std::abs(lhs[i] - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
    }
}

// ============================================================================
// add_integral_columns
// ============================================================================

TEST_CASE("integral columns are appended without touching the originals") {
    const Dataset ds = two_column_dataset(50, 3);
    const Dataset one = add_integral_columns(ds, {"a"});
    REQUIRE(one.names == std::vector<std::string>{"a", "b", "int_a"});
    CHECK(one.col("a") == ds.col("a"));
    CHECK(one.col("b") == ds.col("b"));
    CHECK(one.col("int_a") == integrate(ds.col("a"), ds.dt));

    const Dataset both = add_integral_columns(ds, {"a", "b"});
    CHECK(both.n_vars() == 4);
    CHECK(both.col("int_b") == integrate(ds.col("b"), ds.dt));

    const Dataset same = add_integral_columns(ds, {});
    CHECK(same.names == ds.names);
    CHECK(same.samples == ds.samples);
}

TEST_CASE("integral column errors") {
    const Dataset ds = two_column_dataset(50, 4);
    CHECK_THROWS_AS(add_integral_columns(ds, {"missing"}), SchemaError);
    const Dataset once = add_integral_columns(ds, {"a"});
    CHECK_THROWS_AS(add_integral_columns(once, {"a"}), SchemaError);  // int_a collision
}

// ============================================================================
// build_design_matrix
// ============================================================================

TEST_CASE("zero-lag design matrix echoes the column") {
    std::vector<double> x(10), y(10);
    for (std::size_t i = 0; i < 10; ++i) {
        x[i] = static_cast<double>(i);
        y[i] = 2.0 * static_cast<double>(i);
    }
    const Dataset ds = make_dataset({"x", "y"}, {x, y}, 1.0);
    const auto [X, t] = build_design_matrix(ds, {{"x", 0}}, "y");
    REQUIRE(X.rows() == 10);
    REQUIRE(X.cols() == 1);
    for (Eigen::Index i = 0; i < 10; ++i) {
        CHECK(X(i, 0) == x[static_cast<std::size_t>(i)]);
        CHECK(t(i) == y[static_cast<std::size_t>(i)]);
    }
}

TEST_CASE("lagged rows index the past") {
    const std::size_t n = 100;
    std::mt19937 rng(5);
    std::normal_distribution<double> g;
    std::vector<double> x(n), y(n), z(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = g(rng);
        y[i] = g(rng);
        z[i] = g(rng);
    }
    const Dataset ds = make_dataset({"x", "y", "z"}, {x, y, z}, 1.0);
    const auto [X, t] = build_design_matrix(ds, {{"x", 3}, {"y", 2}}, "z");
    REQUIRE(X.rows() == 97);
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        const std::size_t row_time = static_cast<std::size_t>(r) + 3;
        CHECK(X(r, 0) == x[row_time - 3]);
        CHECK(X(r, 1) == y[row_time - 2]);
        CHECK(t(r) == z[row_time]);
    }
}

TEST_CASE("a planted pure-delay relation fits exactly") {
    const std::size_t n = 400;
    std::mt19937 rng(7);
    std::normal_distribution<double> g;
    std::vector<double> x(n), z(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) x[i] = g(rng);
    for (std::size_t i = 2; i < n; ++i) z[i] = x[i - 2];
    const Dataset ds = make_dataset({"x", "z"}, {x, z}, 1.0);
    const auto [X, t] = build_design_matrix(ds, {{"x", 2}}, "z");
    const LinearModel m = fit_least_squares(X, t);
    CHECK(r2_score(t, predict(m, X)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("feature order permutes columns and nothing else") {
    const Dataset ds = two_column_dataset(60, 9);
    const auto [xab, ta] = build_design_matrix(ds, {{"a", 1}, {"b", 3}}, "a");
    const auto [xba, tb] = build_design_matrix(ds, {{"b", 3}, {"a", 1}}, "a");
    CHECK(xab.col(0) == xba.col(1));
    CHECK(xab.col(1) == xba.col(0));
    CHECK(ta == tb);
}

TEST_CASE("design matrix errors") {
    const Dataset ds = two_column_dataset(10, 2);
    CHECK_THROWS_AS(build_design_matrix(ds, {{"a", 10}}, "b"), InsufficientDataError);
    CHECK_THROWS_AS(build_design_matrix(ds, {{"missing", 0}}, "b"), SchemaError);
    CHECK_THROWS_AS(build_design_matrix(ds, {{"a", -1}}, "b"), ValidationError);
    FeatureRef bad{"a", 1, Transform::integral};  // integral transform requires lag 0
    CHECK_THROWS_AS(build_design_matrix(ds, {bad}, "b"), ValidationError);
}

TEST_CASE("integral transform features integrate on the fly") {
    const Dataset ds = two_column_dataset(80, 21);
    const auto [X, t] = build_design_matrix(ds, {{"a", 0, Transform::integral}}, "b");
    const auto ia = integrate(ds.col("a"), ds.dt);
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        CHECK(X(i, 0) == ia[static_cast<std::size_t>(i)]);
}

// ============================================================================
// chrono_split
// ============================================================================

TEST_CASE("chronological split is contiguous and exhaustive") {
    const Dataset ds = two_column_dataset(100, 12);
    const auto [train, valid] = chrono_split(ds, SplitSpec{0.7});
    CHECK(train.n_samples() == 70);
    CHECK(valid.n_samples() == 30);
    CHECK(train.t0 == ds.t0);
    CHECK(valid.t0 == doctest::Approx(ds.t0 + 70.0 * ds.dt));

    for (std::size_t j = 0; j < ds.n_vars(); ++j) {
        std::vector<double> joined = train.samples[j];
        joined.insert(joined.end(), valid.samples[j].begin(), valid.samples[j].end());
        CHECK(joined == ds.samples[j]);
    }
}

TEST_CASE("split boundaries reject tiny partitions") {
    const Dataset ds = two_column_dataset(100, 13);
    CHECK_THROWS_AS(chrono_split(ds, SplitSpec{0.999}), InsufficientDataError);
    CHECK_THROWS_AS(chrono_split(ds, SplitSpec{0.0}), ValidationError);
    CHECK_THROWS_AS(chrono_split(ds, SplitSpec{1.0}), ValidationError);
}

// ============================================================================
// dataset validation
// ============================================================================

TEST_CASE("dataset construction enforces the container invariants") {
    CHECK_THROWS_AS(make_dataset({"a", "a"}, {{1, 2}, {1, 2}}, 0.1), SchemaError);
    CHECK_THROWS_AS(make_dataset({""}, {{1, 2}}, 0.1), SchemaError);
    CHECK_THROWS_AS(make_dataset({"a"}, {{1}}, 0.1), InsufficientDataError);
    CHECK_THROWS_AS(make_dataset({"a", "b"}, {{1, 2}, {1}}, 0.1), SchemaError);
    CHECK_THROWS_AS(make_dataset({"a"}, {{1, 2}}, 0.0), ValidationError);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(make_dataset({"a"}, {{1, nan}}, 0.1), ValidationError);
    CHECK_THROWS_AS(two_column_dataset(10, 1).index_of("zzz"), SchemaError);
}

// ============================================================================
// CSV I/O
// ============================================================================

TEST_CASE("CSV round-trips bit-faithfully") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    std::vector<double> a(64), b(64);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = u(rng) / 3.0;
        b[i] = u(rng) * 1e-7;
    }
    a[0] = 1.0 / 3.0;
    b[0] = std::nextafter(2.0, 3.0);
    const Dataset ds = make_dataset({"a", "b"}, {a, b}, 0.1, 5.0);

    const std::string path = temp_csv_path("roundtrip");
    write_csv(ds, path);
    const Dataset back = read_csv(path);

    REQUIRE(back.names == ds.names);
    REQUIRE(back.n_samples() == ds.n_samples());
    CHECK(back.dt == doctest::Approx(ds.dt).epsilon(1e-12));
    for (std::size_t j = 0; j < ds.n_vars(); ++j)
        for (std::size_t i = 0; i < ds.n_samples(); ++i)
            CHECK(std::bit_cast<std::uint64_t>(back.samples[j][i]) ==
                  std::bit_cast<std::uint64_t>(ds.samples[j][i]));
    std::filesystem::remove(path);
}

TEST_CASE("CSV ingestion rejects malformed files") {
    const std::string path = temp_csv_path("bad");
    const auto write_text = [&](const char* text) {
        std::ofstream out(path, std::ios::binary);
        out << text;
    };

    write_text("x,y\n0,1\n1,2\n");  // first column must be `time`
    CHECK_THROWS_AS(read_csv(path), ValidationError);
    write_text("time,y\n0,1\n0,2\n");  // not strictly increasing
    CHECK_THROWS_AS(read_csv(path), ValidationError);
    write_text("time,y\n0,1\n1,2\n3,4\n");  // non-uniform step
    CHECK_THROWS_AS(read_csv(path), ValidationError);
    write_text("time,y\n0,1\n1,nan\n");  // non-finite value
    CHECK_THROWS_AS(read_csv(path), ValidationError);
    write_text("time,y\n0,1\n1,abc\n");  // unparsable token
    CHECK_THROWS_AS(read_csv(path), ValidationError);
    write_text("time,y\n0,1\n1\n");  // ragged row
    CHECK_THROWS_AS(read_csv(path), ValidationError);
    write_text("time,y\n0,1\n");  // single data row
    CHECK_THROWS_AS(read_csv(path), InsufficientDataError);
    CHECK_THROWS_AS(read_csv(path + ".does_not_exist"), ValidationError);
    std::filesystem::remove(path);
}
