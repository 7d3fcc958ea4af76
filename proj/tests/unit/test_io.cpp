#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "golearn/io.hpp"

using namespace golearn;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("golearn_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST(Csv, HeaderAndExactRoundTrip) {
    CsvTable t("demo", {"a", "b", "c"});
    const double x = 0.1 + 0.2;
    t.add_row({x, std::string("GO-r"), 7LL});
    t.add_row({std::numeric_limits<double>::quiet_NaN(), std::string("x"), -1LL});
    const std::string s = t.str();
    EXPECT_EQ(s.rfind("# golearn demo v1\na,b,c\n", 0), 0u);
    const fs::path p = temp_dir("csv") / "sub" / "t.csv";
    t.write(p);
    const CsvData d = read_csv(p);
    ASSERT_EQ(d.rows.size(), 2u);
    EXPECT_EQ(d.number(0, "a"), x);
    EXPECT_EQ(d.rows[0][d.column("b")], "GO-r");
    EXPECT_EQ(d.number(1, "c"), -1.0);
    EXPECT_TRUE(std::isnan(d.number(1, "a")));
    EXPECT_THROW(d.column("missing"), IoError);
}

TEST(Csv, RowWidthChecked) {
    CsvTable t("demo", {"a", "b"});
    EXPECT_THROW(t.add_row({1.0}), DimMismatch);
}

TEST(Csv, FormatDouble) {
    EXPECT_EQ(format_double(0.5), "0.5");
    EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
    EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
}

TEST(Csv, StatesRoundTrip) {
    StateSet s(2, {0.1, -0.2, 1.0 / 3.0, 5e-300});
    const fs::path p = temp_dir("states") / "s.csv";
    states_table(s, nullptr).write(p);
    const StateSet r = read_states_csv(p);
    EXPECT_EQ(r.dim, 2u);
    EXPECT_EQ(r.data, s.data);
}

TEST(Csv, StatesWithModelColumns) {
    StateSet s(1, {0.2, -0.7});
    const DoubleWellPotential v(0.5);
    const CsvTable t = states_table(s, &v);
    EXPECT_EQ(t.columns(), (std::vector<std::string>{"x_1", "V", "b_1"}));
}

TEST(Binary, StatesRoundTrip) {
    StateSet s(3, {1, 2, 3, 4, 5, 6});
    const fs::path p = temp_dir("bin") / "s.bin";
    write_states_binary(p, s);
    const StateSet r = read_states_binary(p);
    EXPECT_EQ(r.dim, 3u);
    EXPECT_EQ(r.data, s.data);
}

TEST(Binary, PathRoundTrip) {
    SdeSystem sys;
    sys.drift = [](std::span<const double> x, std::span<double> o) { o[0] = -x[0]; };
    sys.x0 = {0.5};
    const PathSample p = simulate_path(sys, nullptr, 0.1, 1e-2, RngStream{3, 0}, "tag");
    const fs::path f = temp_dir("path") / "p.bin";
    write_path_binary(f, p);
    const PathSample r = read_path_binary(f);
    EXPECT_EQ(r.states, p.states);
    EXPECT_EQ(r.noise, p.noise);
    EXPECT_EQ(r.stop_index, p.stop_index);
    EXPECT_EQ(r.capped, p.capped);
    EXPECT_EQ(r.dt, p.dt);
}

TEST(Binary, BadMagic) {
    const fs::path f = temp_dir("bad") / "x.bin";
    std::ofstream(f) << "not a cache";
    EXPECT_THROW(read_states_binary(f), IoError);
    EXPECT_THROW(read_path_binary(f), IoError);
    EXPECT_THROW(read_states_binary(f.parent_path() / "missing.bin"), IoError);
}

TEST(Json, RoundTripAndErrors) {
    const fs::path f = temp_dir("json") / "c.json";
    write_json(f, {{"a", 1.5}, {"b", {1, 2}}});
    EXPECT_EQ(read_json(f)["a"], 1.5);
    std::ofstream(f) << "{ broken";
    EXPECT_THROW(read_json(f), ConfigError);
}

TEST(Tables, SchemaColumns) {
    EXPECT_EQ(moments_table({}).columns(),
              (std::vector<std::string>{"iter", "mean", "second_moment", "variance", "se", "capped_fraction"}));
    EXPECT_EQ(grad_check_table({}).columns(),
              (std::vector<std::string>{"coordinate", "analytic", "fd", "rel_err", "mode"}));
    TrainTrace t;
    TrainRecord r;
    r.theta = {0.1, 0.2};
    t.records.push_back(r);
    const CsvTable tr = trace_table("GO-f", t);
    EXPECT_EQ(tr.columns().back(), "theta_2");
    EXPECT_EQ(loss_table("GO-f", t).columns().front(), "iter");
}
