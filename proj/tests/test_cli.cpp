#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("nmfvar_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

Result run(const std::string& args, const fs::path& dir, const std::string& env = "") {
    const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
    const std::string cmd = env + (env.empty() ? "" : " ") + "'" NMFVAR_CLI "' " + args + " >'" + out.string() +
                            "' 2>'" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

const std::string air = "--input '" NMFVAR_DATA_DIR "/airpassengers.csv'";

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

// Bivariate toy series, strictly positive.
void write_toy(const fs::path& p, int t) {
    std::ostringstream s;
    s << "time,a,b\n";
    double a = 1.0, b = 0.5;
    for (int i = 1; i <= t; ++i) {
        s << i << ',' << a << ',' << b << '\n';
        const double na = 0.2 + 0.5 * a + 0.1 * b + 0.05 * ((i * 7) % 5) / 5.0;
        b = 0.1 + 0.2 * a + 0.4 * b + 0.05 * ((i * 3) % 4) / 4.0;
        a = na;
    }
    write(p, s.str());
}

} // namespace

TEST(Cli, FitWritesArtifacts) {
    auto dir = scratch("fit");
    auto r = run("fit " + air + " --lags 12 --rank 1 --fix-basis scalar --transform log --max-iter 2000 --output-dir '" +
                     (dir / "out").string() + "'",
                 dir);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("R^2"), std::string::npos);
    EXPECT_NE(r.out.find("spectral radius"), std::string::npos);
    for (const char* f : {"model.json", "fitted.csv", "residuals.csv", "memberships_time.csv", "memberships_vars.csv",
                          "diagnostics.json"}) {
        EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
    }
    EXPECT_EQ(slurp(dir / "out" / "fitted.csv").rfind("time,passengers\n1950-01,", 0), 0u);
}

TEST(Cli, ExitCodes) {
    auto dir = scratch("codes");
    auto missing = run("fit --input '" + (dir / "nope.csv").string() + "' --output-dir '" + (dir / "o1").string() + "'",
                       dir);
    EXPECT_EQ(missing.code, 2);
    EXPECT_NE(missing.err.find("does not exist"), std::string::npos);
    EXPECT_FALSE(fs::exists(dir / "o1"));

    write(dir / "bad.csv", "time,a\n1,1\n2,oops\n3,2\n");
    auto bad = run("fit --input '" + (dir / "bad.csv").string() + "' --output-dir '" + (dir / "o2").string() + "'", dir);
    EXPECT_EQ(bad.code, 2);
    EXPECT_NE(bad.err.find("oops"), std::string::npos);
    EXPECT_FALSE(fs::exists(dir / "o2"));

    auto lags = run("fit " + air + " --lags 200 --output-dir '" + (dir / "o3").string() + "'", dir);
    EXPECT_EQ(lags.code, 3);
    EXPECT_FALSE(fs::exists(dir / "o3"));

    EXPECT_EQ(run("bogus", dir).code, 3);
    EXPECT_EQ(run("fit " + air + " --rank abc", dir).code, 3);
    EXPECT_EQ(run("fit " + air + " --rank 0", dir).code, 3);
    EXPECT_EQ(run("fit " + air + " --seed -1", dir).code, 3);
    EXPECT_EQ(run("fit --help", dir).code, 0);

    write(dir / "flat.csv", "time,a\n1,0\n2,0\n3,0\n4,0\n5,0\n");
    auto flat = run("fit --input '" + (dir / "flat.csv").string() + "' --fix-basis scalar --output-dir '" +
                        (dir / "o4").string() + "'",
                    dir);
    EXPECT_EQ(flat.code, 2) << flat.err;
    EXPECT_FALSE(fs::exists(dir / "o4"));

    // Squared residuals overflow.
    write(dir / "huge.csv", "time,a\n1,1e300\n2,2e300\n3,1e300\n4,3e300\n5,1e300\n");
    auto huge = run("fit --input '" + (dir / "huge.csv").string() + "' --fix-basis scalar --output-dir '" +
                        (dir / "o5").string() + "'",
                    dir);
    EXPECT_EQ(huge.code, 4) << huge.err;
    EXPECT_NE(huge.err.find("not finite"), std::string::npos);
    EXPECT_FALSE(fs::exists(dir / "o5"));
}

TEST(Cli, DeterministicModelJson) {
    auto dir = scratch("determinism");
    write_toy(dir / "toy.csv", 40);
    const std::string base = "fit --input '" + (dir / "toy.csv").string() + "' --rank 2 --lags 2 --max-iter 3000";
    ASSERT_EQ(run(base + " --output-dir '" + (dir / "a").string() + "'", dir).code, 0);
    ASSERT_EQ(run(base + " --output-dir '" + (dir / "b").string() + "'", dir).code, 0);
    EXPECT_EQ(slurp(dir / "a" / "model.json"), slurp(dir / "b" / "model.json"));
    EXPECT_EQ(slurp(dir / "a" / "diagnostics.json"), slurp(dir / "b" / "diagnostics.json"));
}

TEST(Cli, SeedFromEnvironment) {
    auto dir = scratch("seed");
    write_toy(dir / "toy.csv", 30);
    const std::string base =
        "fit --input '" + (dir / "toy.csv").string() + "' --rank 2 --init random --max-iter 50 --output-dir ";
    ASSERT_EQ(run(base + "'" + (dir / "env").string() + "'", dir, "NMFVAR_SEED=7").code, 0);
    ASSERT_EQ(run(base + "'" + (dir / "flag").string() + "' --seed 7", dir).code, 0);
    ASSERT_EQ(run(base + "'" + (dir / "both").string() + "' --seed 7", dir, "NMFVAR_SEED=99").code, 0);
    ASSERT_EQ(run(base + "'" + (dir / "default").string() + "'", dir).code, 0);
    const auto env = slurp(dir / "env" / "model.json");
    EXPECT_EQ(env, slurp(dir / "flag" / "model.json"));
    EXPECT_EQ(env, slurp(dir / "both" / "model.json"));
    EXPECT_NE(env, slurp(dir / "default" / "model.json"));
    EXPECT_NE(env.find("\"seed\": 7"), std::string::npos);
    EXPECT_EQ(run(base + "'" + (dir / "x").string() + "'", dir, "NMFVAR_SEED=abc").code, 3);
}

TEST(Cli, ForecastFromSavedModel) {
    auto dir = scratch("forecast");
    write_toy(dir / "toy.csv", 40);
    ASSERT_EQ(run("fit --input '" + (dir / "toy.csv").string() +
                      "' --rank 2 --lags 1 --transform log1p,ma3 --max-iter 500 --output-dir '" + dir.string() + "'",
                  dir)
                  .code,
              0);
    auto r = run("forecast --model '" + (dir / "model.json").string() + "' --horizon 4 --output-dir '" +
                     (dir / "fc").string() + "'",
                 dir);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("smoothed scale"), std::string::npos);
    const auto text = slurp(dir / "fc" / "forecast.csv");
    EXPECT_EQ(text.rfind("# smoothed-scale", 0), 0u);
    EXPECT_NE(text.find("variable,h1,h2,h3,h4\na,"), std::string::npos);

    EXPECT_EQ(run("forecast --model '" + (dir / "missing.json").string() + "'", dir).code, 2);
    write(dir / "broken.json", "{\"format_version\": 1}");
    EXPECT_EQ(run("forecast --model '" + (dir / "broken.json").string() + "'", dir).code, 2);
    EXPECT_EQ(run("forecast --model '" + (dir / "model.json").string() + "' --horizon 0", dir).code, 3);

    ASSERT_EQ(run("fit --input '" + (dir / "toy.csv").string() + "' --identity --max-iter 50 --output-dir '" +
                      (dir / "id").string() + "'",
                  dir)
                  .code,
              0);
    auto id = run("forecast --model '" + (dir / "id" / "model.json").string() + "'", dir);
    EXPECT_EQ(id.code, 3);
    EXPECT_NE(id.err.find("forecasting requires lag covariates"), std::string::npos);
}

TEST(Cli, CrossValidation) {
    auto dir = scratch("cv");
    write_toy(dir / "toy.csv", 40);
    const std::string in = "cv --input '" + (dir / "toy.csv").string() + "' --max-iter 200 --folds 4 ";
    auto single = run(in + "--q-candidates 1 --d-candidates 2 --output-dir '" + dir.string() + "'", dir);
    ASSERT_EQ(single.code, 0) << single.err;
    EXPECT_NE(single.out.find("chosen: Q=1 D=2"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "cv_report.json"));

    auto grid = run(in + "--q-candidates 1-2 --d-candidates 1,3 --threads 2 --output-dir '" + dir.string() + "'", dir);
    ASSERT_EQ(grid.code, 0) << grid.err;
    EXPECT_NE(grid.out.find("*"), std::string::npos);

    auto infeasible = run(in + "--q-candidates 1,3 --d-candidates 1", dir);
    EXPECT_EQ(infeasible.code, 3);
    EXPECT_NE(infeasible.err.find("Q=3, D=1"), std::string::npos);
    EXPECT_EQ(run(in + "--d-candidates 3-1", dir).code, 3);
    EXPECT_EQ(run(in + "--fold-mode sideways", dir).code, 3);
    EXPECT_EQ(run(in + "--identity", dir).code, 3);
}
