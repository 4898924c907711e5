#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

const fs::path& scratch() {
    static const fs::path dir = [] {
        const auto d = fs::temp_directory_path() / "drivepred_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

// Runs the CLI with `args`; stdout goes to `capture` when given.
int run(const std::string& args, const fs::path& capture = {}) {
    const std::string sink = capture.empty() ? "/dev/null" : capture.string();
    const std::string cmd = std::string("\"") + DRIVEPRED_CLI + "\" " + args + " >\"" + sink + "\" 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

// Two benchmark routes, generated once.
const fs::path& benchmark_dir() {
    static const fs::path dir = [] {
        const auto d = scratch() / "bench";
        REQUIRE(run("generate --seed 3 --routes 2 --out " + q(d)) == 0);
        return d;
    }();
    return dir;
}

const fs::path& single_class_file() {
    static const fs::path file = [] {
        const auto f = scratch() / "single.csv";
        std::ofstream out(f);
        out << "t,d_integrated_raw,velocity_kmh_raw,spd_lim,tfc_flw,traf_lig,tfc_sgn,toll_booth,curvature,slope\n";
        for (int i = 0; i < 40; ++i) out << i << "," << i * 14 << ",51," << 50 + (i % 3) * 10 << ",40,0,0,0,0.001,0\n";
        return f;
    }();
    return file;
}

}  // namespace

TEST_CASE("generate writes one recording per route plus a manifest, reproducibly") {
    const auto& dir = benchmark_dir();
    std::size_t csv = 0;
    for (const auto& e : fs::directory_iterator(dir)) csv += e.path().extension() == ".csv";
    CHECK(csv == 2u);
    CHECK(fs::exists(dir / "manifest.json"));
    const auto again = scratch() / "bench_again";
    REQUIRE(run("generate --seed 3 --routes 2 --out " + q(again)) == 0);
    for (const char* name : {"route_00.csv", "route_01.csv", "manifest.json"}) {
        CHECK(slurp(dir / name) == slurp(again / name));
    }
}

TEST_CASE("usage errors exit with 2") {
    CHECK(run("generate --seed 1 --routes 0 --out " + q(scratch() / "zero")) == 2);
    CHECK(run("generate --routes 1 --out " + q(scratch() / "noseed")) == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("train --seed 1 --data " + q(benchmark_dir()) + " --algorithm Perceptron --out " +
              q(scratch() / "m.json")) == 2);
    CHECK(run("compare --seed 1 --data " + q(scratch() / "nowhere") + " --out " + q(scratch() / "c")) == 2);
}

TEST_CASE("help exits with 0") { CHECK(run("--help") == 0); }

TEST_CASE("train and evaluate succeed on generated data") {
    const auto model = scratch() / "dt.json";
    REQUIRE(run("train --seed 1 --data " + q(benchmark_dir()) + " --algorithm DecisionTree --out " + q(model)) == 0);
    const auto out = scratch() / "eval";
    CHECK(run("evaluate --model " + q(model) + " --data " + q(benchmark_dir() / "route_01.csv") + " --out " + q(out)) == 0);
    CHECK(slurp(out / "evaluation.txt").find("Weighted AVG") != std::string::npos);
    CHECK(fs::exists(out / "evaluation.json"));
}

TEST_CASE("data errors exit with 3") {
    CHECK(run("train --seed 1 --data " + q(single_class_file()) + " --algorithm LogisticRegression --out " +
              q(scratch() / "lr.json")) == 3);
    CHECK(run("compare --seed 1 --data " + q(single_class_file()) + " --algorithms LogisticRegression --out " +
              q(scratch() / "lr_cmp")) == 3);

    const auto model = scratch() / "gnb.json";
    REQUIRE(run("train --seed 1 --data " + q(single_class_file()) + " --algorithm GaussianNB --out " + q(model)) == 0);
    const auto empty = scratch() / "empty.csv";
    std::ofstream(empty) << "t,d_integrated_raw,velocity_kmh_raw,spd_lim,tfc_flw,traf_lig,tfc_sgn,toll_booth,curvature,slope\n";
    CHECK(run("evaluate --model " + q(model) + " --data " + q(empty)) == 3);
    const auto garbage = scratch() / "garbage.csv";
    std::ofstream(garbage) << "t,velocity_kmh_raw\n1,fast\n";
    CHECK(run("evaluate --model " + q(model) + " --data " + q(garbage)) == 3);
}

TEST_CASE("the fidelity flag drops KNN from the validation table only") {
    const auto out = scratch() / "fidelity";
    REQUIRE(run("compare --seed 2 --data " + q(benchmark_dir()) +
                " --algorithms DecisionTree,KNNeighbors,GaussianNB --paper-fidelity --out " + q(out)) == 0);
    const auto text = slurp(out / "comparison.txt");
    const auto cv = text.substr(0, text.find("Holdout results"));
    const auto holdout = text.substr(text.find("Holdout results"));
    const auto cv_header = cv.substr(0, cv.find("Weighted Precision"));
    CHECK(cv_header.find("KNNeighbors") == std::string::npos);
    CHECK(cv_header.find("DecisionTree") != std::string::npos);
    CHECK(holdout.find("KNNeighbors") != std::string::npos);
    CHECK(fs::exists(out / "comparison.json"));
}

TEST_CASE("simulate prints three columns, or four with a model") {
    const auto three = scratch() / "sim3.tsv";
    REQUIRE(run("simulate --seed 4 --length 2000", three) == 0);
    CHECK(slurp(three).rfind("distance\trecorded\trule_based\n", 0) == 0);

    const auto model = scratch() / "sim_dt.json";
    REQUIRE(run("train --seed 1 --data " + q(benchmark_dir()) + " --algorithm DecisionTree --out " + q(model)) == 0);
    const auto four = scratch() / "sim4.tsv";
    REQUIRE(run("simulate --seed 4 --length 2000 --model " + q(model), four) == 0);
    CHECK(slurp(four).rfind("distance\trecorded\trule_based\tpredicted\n", 0) == 0);

    const auto recorded = scratch() / "sim_rec.tsv";
    REQUIRE(run("simulate --seed 4 --data " + q(benchmark_dir() / "route_01.csv") + " --model " + q(model), recorded) == 0);
    CHECK(slurp(recorded).find("# rmse recorded/predicted") != std::string::npos);

    CHECK(run("simulate --seed 4 --model " + q(scratch() / "absent.json")) == 2);
    CHECK(run("simulate --seed 4 --profile Desert") == 2);
}
