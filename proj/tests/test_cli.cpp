#include <doctest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "aniso/cli.hpp"
#include "aniso/errors.hpp"
#include "aniso/io.hpp"
#include "aniso/schema.hpp"

using namespace aniso;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("aniso_cli_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string sub(const std::string& s) const { return (path / s).string(); }
};

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "aniso");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

json read_json(const std::string& path) { return json::parse(read_file(path)); }

} // namespace

TEST_CASE("sweep parsing") {
    const auto ts = parse_sweep("t=-0.5:1.0:0.5");
    REQUIRE(ts.size() == 4);
    CHECK(ts[0] == -0.5);
    CHECK(ts[3] == doctest::Approx(1.0));
    CHECK(parse_sweep("0:0:1").size() == 1);
    CHECK(parse_sweep("t=0:1:0.1").size() == 11);
    CHECK_THROWS_AS(parse_sweep("t=0:1"), ValidationError);
    CHECK_THROWS_AS(parse_sweep("t=1:0:0.1"), ValidationError);
    CHECK_THROWS_AS(parse_sweep("t=0:1:0"), ValidationError);
    CHECK_THROWS_AS(parse_sweep("t=0:1:0.5x"), ValidationError);
}

TEST_CASE("run config schema") {
    const json ok = json::parse(R"({"command": "norm", "norm": {"kind": "axisymmetric", "a": 0.3}, "subdiv": 3})");
    const RunConfig c = RunConfig::from_json(ok);
    CHECK(c.subdiv == 3);
    CHECK(c.norm["a"] == 0.3);
    CHECK(RunConfig::from_json(c.to_json()).to_json() == c.to_json());
    CHECK(schema_errors(runconfig_schema(), c.to_json()).empty());
    for (const char* bad : {R"({"command": "norm", "bogus": 1})", R"({"command": "fly"})",
                            R"({"command": "norm", "subdiv": 9})", R"({"command": "norm", "norm": {"kind": "axisymmetric"}})",
                            R"({"command": "norm", "norm": {"kind": "isotropic", "a": 1}})",
                            R"({"command": "compare", "surfaces": [{"kind": "support"}]})",
                            R"({"command": "propagate", "propagate": {"t": [-1]}})",
                            R"({"command": "norm", "scale": 0})"})
        CHECK_THROWS_AS(RunConfig::from_json(json::parse(bad)), ValidationError);
    try {
        RunConfig::from_json(json::parse(R"({"command": "norm", "subdiv": 9})"));
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("/subdiv") != std::string::npos);
    }
}

TEST_CASE("exit code mapping") {
    CHECK(exit_code_for(ValidationError("x")) == kExitValidation);
    CHECK(exit_code_for(GridTooSmallError("x")) == kExitValidation);
    CHECK(exit_code_for(NonConvexInputError("x")) == kExitValidation);
    CHECK(exit_code_for(MeshMismatchError()) == kExitValidation);
    CHECK(exit_code_for(ConvexityError("x", -1)) == kExitConvexity);
    CHECK(exit_code_for(PositivityError("x", -1)) == kExitConvexity);
    CHECK(exit_code_for(SingularCurvatureError("x", {})) == kExitCurvature);
    CHECK(exit_code_for(DegenerateError("x")) == kExitCurvature);
    CHECK(exit_code_for(NotSpacelikeError("x", 0)) == kExitNotSpacelike);
    CHECK(exit_code_for(CFLViolationError("x", 1, 0.5)) == kExitCFL);
    CHECK(exit_code_for(SolverError("x", 1)) == kExitSolver);
    CHECK(exit_code_for(std::runtime_error("x")) == kExitOther);
}

TEST_CASE("norm command") {
    TempDir d("norm");
    CHECK(run({"norm", "--spec", R"({"kind":"axisymmetric","a":0.3})", "--subdiv", "3", "--out", d.sub("o")}) == 0);
    for (const char* f : {"wulff.obj", "kw.csv", "norm.json"}) CHECK(fs::exists(d.sub("o/") + f));
    const json j = read_json(d.sub("o/norm.json"));
    CHECK(j.is_object());
    // non-convex norm is rejected and nothing is written
    CHECK(run({"norm", "--spec", R"({"kind":"axisymmetric","a":0.6})", "--subdiv", "3", "--out", d.sub("bad")}) ==
          kExitConvexity);
    CHECK_FALSE(fs::exists(d.sub("bad")));
    CHECK(run({"norm", "--spec", R"({"kind":"cubic"})", "--out", d.sub("bad")}) == kExitValidation);
    CHECK(run({"norm", "--spec", "{not json", "--out", d.sub("bad")}) == kExitValidation);
    CHECK(run({"norm", "--subdiv", "0"}) == kExitValidation);
    CHECK(run({"fly"}) == kExitValidation);
    CHECK_FALSE(fs::exists(d.sub("bad")));
}

TEST_CASE("config file with flag overrides") {
    TempDir d("config");
    write_file_atomic(d.sub("run.json"),
                      R"({"command": "invariants", "subdiv": 2, "norm": {"kind": "axisymmetric", "a": 0.3},
                          "surface": {"kind": "harmonics", "base": "wulff", "coeffs": [[2, 0, 0.05]]}})");
    CHECK(run({"--config", d.sub("run.json"), "invariants", "--subdiv", "3", "--out", d.sub("o")}) == 0);
    const json j = read_json(d.sub("o/invariants.json"));
    CHECK(j.dump().find("\"subdivisions\":3") != std::string::npos);
    write_file_atomic(d.sub("bad.json"), R"({"subdiv": 3, "unknown": true})");
    CHECK(run({"--config", d.sub("bad.json"), "norm", "--out", d.sub("bad")}) == kExitValidation);
    CHECK(run({"--config", d.sub("missing.json"), "norm", "--out", d.sub("bad")}) != 0);
    CHECK_FALSE(fs::exists(d.sub("bad")));
}

TEST_CASE("outputs are byte identical across runs") {
    TempDir d("determinism");
    const std::vector<std::string> base = {"invariants", "--norm", R"({"kind":"axisymmetric","a":0.3})",
                                           "--sweep", "t=0:1:0.5", "--subdiv", "3", "--out"};
    // the report echoes the config, so both runs use the same out path
    auto args = base;
    args.push_back(d.sub("o"));
    REQUIRE(run(args) == 0);
    const std::string inv = read_file(d.sub("o/invariants.json")), sweep = read_file(d.sub("o/sweep.csv"));
    fs::remove_all(d.sub("o"));
    REQUIRE(run(args) == 0);
    CHECK(read_file(d.sub("o/invariants.json")) == inv);
    CHECK(read_file(d.sub("o/sweep.csv")) == sweep);
    const std::vector<std::string> ibp = {"ibp-check", "--subdiv", "3", "--seed", "7", "--out", d.sub("i")};
    REQUIRE(run(ibp) == 0);
    const std::string first = read_file(d.sub("i/ibp.json"));
    fs::remove_all(d.sub("i"));
    REQUIRE(run(ibp) == 0);
    CHECK(read_file(d.sub("i/ibp.json")) == first);
}

TEST_CASE("error exit codes leave no partial outputs") {
    TempDir d("errors");
    // D^2 q + q I singular
    CHECK(run({"surface", "--surface", R"({"kind":"harmonics","base":"none","coeffs":[[2,0,1]]})", "--subdiv", "3",
               "--out", d.sub("o4")}) == kExitCurvature);
    write_file_atomic(d.sub("canal.json"),
                      R"({"command": "canal", "subdiv": 3,
                          "canal": {"curve": {"kind": "line", "t": 0.5, "dt": 2.0}}})");
    CHECK(run({"--config", d.sub("canal.json"), "canal", "--out", d.sub("o5")}) == kExitNotSpacelike);
    write_file_atomic(d.sub("cfl.json"),
                      R"({"command": "propagate", "subdiv": 3,
                          "propagate": {"t": [0.4], "grid": {"n": 24}, "dt": 0.2}})");
    CHECK(run({"--config", d.sub("cfl.json"), "propagate", "--out", d.sub("o6")}) == kExitCFL);
    write_file_atomic(d.sub("solve.json"),
                      R"({"command": "solve", "subdiv": 3, "tolerances": {"solver_residual": 1e-300},
                          "solve": {"boundary": {"kind": "harmonics", "base": "wulff", "coeffs": [[3, 1, 0.02]]}}})");
    CHECK(run({"--config", d.sub("solve.json"), "solve", "--out", d.sub("o7")}) == kExitSolver);
    write_file_atomic(d.sub("small.json"),
                      R"({"command": "propagate", "subdiv": 3,
                          "propagate": {"t": [0.4], "grid": {"lo": -1.1, "hi": 1.1, "n": 24}}})");
    CHECK(run({"--config", d.sub("small.json"), "propagate", "--out", d.sub("o2")}) == kExitValidation);
    for (const char* o : {"o2", "o4", "o5", "o6", "o7"}) CHECK_FALSE(fs::exists(d.sub(o)));
}

TEST_CASE("compare, canal, solve and propagate commands") {
    TempDir d("commands");
    write_file_atomic(d.sub("cmp.json"),
                      R"({"command": "compare", "subdiv": 3, "norm": {"kind": "axisymmetric", "a": 0.3},
                          "surfaces": [{"kind": "harmonics", "base": "wulff", "coeffs": [[2, 0, 0.05]]},
                                       {"kind": "harmonics", "base": "wulff", "r": 1.5, "coeffs": [[2, 0, 0.075]]}]})");
    REQUIRE(run({"--config", d.sub("cmp.json"), "compare", "--out", d.sub("cmp")}) == 0);
    CHECK(read_json(d.sub("cmp/compare.json"))["verdict"]["distinct_source"] == true);

    REQUIRE(run({"canal", "--subdiv", "3", "--out", d.sub("canal")}) == 0);
    const json cj = read_json(d.sub("canal/canal.json"));
    CHECK(fs::exists(d.sub("canal/canal.obj")));
    CHECK(cj.is_object());

    REQUIRE(run({"solve", "--subdiv", "3", "--out", d.sub("solve")}) == 0);
    CHECK(read_json(d.sub("solve/solve.json"))["max_deviation_from_boundary_field"].get<double>() <= 1e-8);
    CHECK(fs::exists(d.sub("solve/solution.csv")));

    write_file_atomic(d.sub("prop.json"),
                      R"({"command": "propagate", "subdiv": 3, "norm": {"kind": "axisymmetric", "a": 0.3},
                          "propagate": {"t": [0.5, 0.25], "grid": {"n": 32}, "write_grid": true}})");
    REQUIRE(run({"--config", d.sub("prop.json"), "propagate", "--out", d.sub("prop")}) == 0);
    for (const char* f : {"front_t0.2500.obj", "front_t0.5000.obj", "parallel_t0.5000.obj", "grid_t0.5000.raw",
                          "propagate.json"})
        CHECK(fs::exists(d.sub("prop/") + f));
}

TEST_CASE("surface command writes helicoid patches") {
    TempDir d("surface");
    REQUIRE(run({"surface", "--norm", R"({"kind":"axisymmetric","a":0.3})", "--surface", R"({"kind":"helicoid"})",
                 "--subdiv", "3", "--out", d.sub("h")}) == 0);
    CHECK(fs::exists(d.sub("h/patch.obj")));
    CHECK(fs::exists(d.sub("h/patch_curvatures.csv")));
    REQUIRE(run({"surface", "--scale", "2", "--subdiv", "3", "--out", d.sub("s")}) == 0);
    for (const char* f : {"surface.obj", "support.csv", "curvatures.csv", "surface.json"}) CHECK(fs::exists(d.sub("s/") + f));
}
