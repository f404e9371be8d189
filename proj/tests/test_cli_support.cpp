#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include <stagpoly/cli_support.hpp>

using namespace stagpoly;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::validation;
}

fs::path scratch_dir(const std::string& name)
{
    const fs::path d = fs::temp_directory_path() / ("stagpoly_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

} // namespace

TEST(ExitCode, GroupsByCategory)
{
    EXPECT_EQ(exit_code(ErrorKind::config), 1);
    EXPECT_EQ(exit_code(ErrorKind::capability), 1);
    EXPECT_EQ(exit_code(ErrorKind::io), 1);
    EXPECT_EQ(exit_code(ErrorKind::orientation), 2);
    EXPECT_EQ(exit_code(ErrorKind::star_shape), 2);
    EXPECT_EQ(exit_code(ErrorKind::generation), 2);
    EXPECT_EQ(exit_code(ErrorKind::singular), 3);
    EXPECT_EQ(exit_code(ErrorKind::non_convergence), 3);
}

TEST(RunConfig, KeysOverrideDefaults)
{
    const auto doc = nlohmann::json::parse(R"({"problem": "example2", "family": "voronoi", "levels": [64, 256],
                                               "k": 1, "tol": 1e-12, "condense": false, "seed": 9})");
    const RunConfig cfg = load_run_config(doc);
    EXPECT_EQ(cfg.problem, "example2");
    EXPECT_EQ(cfg.family, "voronoi");
    EXPECT_EQ(cfg.levels, (std::vector<int>{64, 256}));
    EXPECT_EQ(cfg.k, 1);
    EXPECT_EQ(cfg.tol, 1e-12);
    EXPECT_FALSE(cfg.condense);
    EXPECT_EQ(cfg.seed, 9u);
    EXPECT_EQ(cfg.solver, "cg");
}

TEST(RunConfig, RejectsUnknownKeysAndWrongTypes)
{
    EXPECT_EQ(kind_of([] { load_run_config(nlohmann::json::parse(R"({"degree": 1})")); }), ErrorKind::config);
    EXPECT_EQ(kind_of([] { load_run_config(nlohmann::json::parse(R"({"k": "one"})")); }), ErrorKind::config);
    EXPECT_EQ(kind_of([] { load_run_config(nlohmann::json::parse("[1, 2]")); }), ErrorKind::config);
}

TEST(RunConfig, FileErrors)
{
    const fs::path d = scratch_dir("config");
    EXPECT_EQ(kind_of([&] { load_run_config_file((d / "missing.json").string()); }), ErrorKind::config);
    std::ofstream(d / "bad.json") << "{ not json";
    EXPECT_EQ(kind_of([&] { load_run_config_file((d / "bad.json").string()); }), ErrorKind::config);
    std::ofstream(d / "good.json") << R"({"n": 8})";
    EXPECT_EQ(load_run_config_file((d / "good.json").string()).n, 8);
}

TEST(Validate, CrossFieldRules)
{
    RunConfig cfg;
    EXPECT_NO_THROW(validate(cfg));
    cfg.problem = "example3";
    EXPECT_EQ(kind_of([&] { validate(cfg); }), ErrorKind::config);
    cfg.family = "squares";
    EXPECT_NO_THROW(validate(cfg));

    RunConfig bad;
    bad.k = -1;
    EXPECT_EQ(kind_of([&] { validate(bad); }), ErrorKind::config);
    bad = {};
    bad.solver = "gmres";
    EXPECT_EQ(kind_of([&] { validate(bad); }), ErrorKind::config);
    bad = {};
    bad.tol = 0.0;
    EXPECT_EQ(kind_of([&] { validate(bad); }), ErrorKind::config);
    bad = {};
    bad.family = "hexagons";
    EXPECT_EQ(kind_of([&] { validate(bad); }), ErrorKind::config);
    bad = {};
    bad.mesh_file = "/nonexistent/mesh.json";
    EXPECT_EQ(kind_of([&] { validate(bad); }), ErrorKind::config);
    bad = {};
    bad.quadrature = "gauss";
    EXPECT_EQ(kind_of([&] { validate(bad); }), ErrorKind::config);
}

TEST(Validate, TableProfile)
{
    RunConfig cfg;
    cfg.profile = "table";
    cfg.solver = "direct";
    const SolveOptions o = validate(cfg);
    EXPECT_EQ(o.star, StarPointRule::barycenter);
    EXPECT_EQ(o.load, LoadRule::centroid);
    EXPECT_EQ(o.dirichlet, DirichletData::midpoint);
    EXPECT_EQ(o.solver, LinearSolver::direct);
}

TEST(Columns, AutoSelection)
{
    RunConfig cfg;
    EXPECT_EQ(columns_of(cfg), triangle_table_columns());
    cfg.k = 1;
    EXPECT_EQ(columns_of(cfg), polygon_table_columns());
    cfg = {};
    cfg.family = "voronoi";
    EXPECT_EQ(columns_of(cfg), polygon_table_columns());
    cfg.columns = "triangle";
    EXPECT_EQ(columns_of(cfg), triangle_table_columns());
    cfg.columns = "everything";
    EXPECT_EQ(kind_of([&] { columns_of(cfg); }), ErrorKind::config);
}

TEST(StagedOutput, CommitRenamesAllFiles)
{
    const fs::path d = scratch_dir("staged_commit");
    {
        StagedOutput out;
        out.write(d / "a.txt", [](std::ostream& os) { os << "a\n"; });
        out.write(d / "b.txt", [](std::ostream& os) { os << "b\n"; });
        EXPECT_TRUE(fs::exists(d / "a.txt.tmp"));
        EXPECT_FALSE(fs::exists(d / "a.txt"));
        out.commit();
    }
    EXPECT_TRUE(fs::exists(d / "a.txt"));
    EXPECT_TRUE(fs::exists(d / "b.txt"));
    EXPECT_FALSE(fs::exists(d / "a.txt.tmp"));
}

TEST(StagedOutput, FailureLeavesNothingBehind)
{
    const fs::path d = scratch_dir("staged_fail");
    try {
        StagedOutput out;
        out.write(d / "a.txt", [](std::ostream& os) { os << "a\n"; });
        out.write(d / "b.txt", [](std::ostream&) { fail(ErrorKind::singular, "solve failed"); });
        out.commit();
    } catch (const Error&) {
    }
    EXPECT_TRUE(fs::is_empty(d));
}

TEST(StagedOutput, UnwritableDirectoryIsIoError)
{
    StagedOutput out;
    EXPECT_EQ(kind_of([&] { out.write("/nonexistent/dir/a.txt", [](std::ostream&) {}); }), ErrorKind::io);
}

TEST(Reports, ErrorReportLines)
{
    ErrorNorms e;
    e.energy = 0.5;
    std::ostringstream k0, k1;
    write_error_report(k0, e, 0);
    write_error_report(k1, e, 1);
    EXPECT_EQ(k0.str().rfind("e_1h 5.00000e-01\n", 0), 0u);
    EXPECT_NE(k0.str().find("e_u_cr"), std::string::npos);
    EXPECT_EQ(k1.str().find("e_u_cr"), std::string::npos);
}
