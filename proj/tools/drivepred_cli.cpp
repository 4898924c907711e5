#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "drivepred/pipeline.hpp"
#include "drivepred/synthgen.hpp"

namespace fs = std::filesystem;
using namespace drivepred;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("drivepred");
    logger->set_pattern("%^%l%$: %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* level = std::getenv("DRIVEPRED_LOG")) {
        const auto parsed = spdlog::level::from_str(level);
        // from_str maps unknown names to off; keep the default instead.
        if (parsed != spdlog::level::off || std::string(level) == "off") spdlog::set_level(parsed);
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path.string());
    out << content;
    out.flush();
    if (!out) throw UsageError("write failed for " + path.string());
}

// Output directories are created up front so bad paths fail before any work.
fs::path prepare_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw UsageError("cannot create output directory " + dir);
    const fs::path probe = fs::path(dir) / ".drivepred_probe";
    {
        std::ofstream out(probe);
        if (!out) throw UsageError("output directory is not writable: " + dir);
    }
    fs::remove(probe, ec);
    return fs::path(dir);
}

void prepare_parent(const std::string& file) {
    const auto parent = fs::path(file).parent_path();
    if (!parent.empty()) prepare_dir(parent.string());
}

domain::Algorithm algorithm_arg(const std::string& name) {
    try {
        return domain::parse_enum<domain::Algorithm>(name, "algorithm");
    } catch (const ParseError& e) {
        throw UsageError(e.what());
    }
}

std::vector<domain::Algorithm> algorithm_list(const std::vector<std::string>& names) {
    if (names.empty()) return domain::all_algorithms();
    std::vector<domain::Algorithm> out;
    for (const auto& n : names) out.push_back(algorithm_arg(n));
    return out;
}

struct GenerateArgs {
    std::uint64_t seed = 0;
    std::size_t routes = 6;
    std::string out;
    std::string jobs;
};

int cmd_generate(const GenerateArgs& a) {
    std::vector<synthgen::RouteJob> jobs;
    if (!a.jobs.empty()) {
        try {
            jobs = synthgen::deserialize_jobs(read_file(a.jobs));
        } catch (const ParseError& e) {
            throw UsageError(a.jobs + ": " + e.what());
        }
    } else {
        if (a.routes == 0) throw UsageError("--routes must be at least 1");
        jobs = synthgen::default_benchmark(a.routes);
    }
    const auto dir = prepare_dir(a.out);
    spdlog::info("generating {} routes with seed {}", jobs.size(), a.seed);
    const auto routes = synthgen::generate(jobs, a.seed);
    std::vector<std::string> files;
    std::size_t samples = 0;
    for (std::size_t i = 0; i < routes.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "route_%02zu.csv", i);
        files.emplace_back(name);
        synthgen::write_recording_file((dir / name).string(), routes[i].recording);
        samples += routes[i].recording.samples();
    }
    write_file(dir / "manifest.json", synthgen::manifest_document(routes, files, a.seed));
    std::cout << "wrote " << routes.size() << " recordings (" << samples << " samples) and manifest.json to " << a.out
              << "\n";
    return 0;
}

struct TrainArgs {
    std::uint64_t seed = 0;
    std::string data;
    std::string algorithm;
    std::string out;
};

int cmd_train(const TrainArgs& a) {
    const auto algorithm = algorithm_arg(a.algorithm);
    prepare_parent(a.out);
    const auto data = pipeline::load_dataset(a.data);
    if (data.size() == 0) throw DataError("no usable samples in " + a.data);
    spdlog::info("training {} on {} samples", a.algorithm, data.size());
    const auto bundle = pipeline::train_bundle(classifiers::TrainingConfig(algorithm, a.seed), data);
    write_file(a.out, bundle.serialize());
    const auto report = evaluation::evaluate(data.labels, bundle.predict(data.features));
    for (const auto& note : bundle.classifier.diagnostics()) spdlog::warn("{}", note);
    std::printf("trained %s on %zu samples, %zu classes; training accuracy %.4f; model written to %s\n",
                a.algorithm.c_str(), data.size(), bundle.classifier.classes().size(), report.accuracy, a.out.c_str());
    return 0;
}

struct CompareArgs {
    std::uint64_t seed = 0;
    std::string data;
    std::string out;
    std::vector<std::string> algorithms;
    double test_fraction = preprocess::kDefaultTestFraction;
    std::size_t folds = preprocess::kDefaultFolds;
    bool paper_fidelity = false;
    bool fit_on_all = false;
};

int cmd_compare(const CompareArgs& a) {
    pipeline::CompareOptions options;
    options.algorithms = algorithm_list(a.algorithms);
    options.test_fraction = a.test_fraction;
    options.folds = a.folds;
    options.exclude_knn_from_cv = a.paper_fidelity;
    options.fit_on_all = a.fit_on_all || a.paper_fidelity;
    const auto dir = prepare_dir(a.out);
    const auto data = pipeline::load_dataset(a.data);
    spdlog::info("comparing {} algorithms on {} samples", options.algorithms.size(), data.size());
    const auto result = pipeline::compare(data, a.seed, options);
    for (const auto& w : result.warnings) spdlog::warn("{}", w);
    const auto text = pipeline::render_comparison(result);
    write_file(dir / "comparison.txt", text);
    write_file(dir / "comparison.json", evaluation::comparison_document(result.cv, result.holdout, a.seed));
    std::cout << text;
    if (result.all_failed()) {
        std::cerr << "error: every algorithm failed to fit\n";
        return kExitData;
    }
    return 0;
}

struct EvaluateArgs {
    std::string model;
    std::string data;
    std::string out;
};

int cmd_evaluate(const EvaluateArgs& a) {
    std::optional<fs::path> dir;
    if (!a.out.empty()) dir = prepare_dir(a.out);
    const auto bundle = pipeline::ModelBundle::deserialize(read_file(a.model));
    const auto data = pipeline::load_dataset(a.data);
    if (data.size() == 0) throw DataError("no usable samples in " + a.data);
    pipeline::check_features(bundle, data);
    const auto report = evaluation::evaluate(data.labels, bundle.predict(data.features));
    const std::string title =
        "Evaluation of " + std::string(domain::to_string(bundle.classifier.algorithm())) + " on " + a.data;
    const auto text = evaluation::render_class_table(report, title);
    if (dir) {
        write_file(*dir / "evaluation.txt", text);
        write_file(*dir / "evaluation.json", evaluation::report_document(report));
    }
    std::cout << text;
    return 0;
}

struct SimulateArgs {
    std::uint64_t seed = 0;
    std::string data;
    std::string model;
    std::string profile = "Urban";
    double length = 5000.0;
    double noise = 2.0;
    double compliance = 0.95;
    std::string out;
};

int cmd_simulate(const SimulateArgs& a) {
    if (!a.model.empty() && !fs::is_regular_file(a.model)) throw UsageError("model file not found: " + a.model);
    if (!a.out.empty()) prepare_parent(a.out);
    synthgen::DriverParams params;
    params.compliance = a.compliance;
    params.noise_amplitude = a.noise;
    params.seed = mix_seed(a.seed, 2);

    pipeline::ProfileComparison cmp;
    ingestion::RecordingMatrix rec;
    if (!a.data.empty()) {
        rec = ingestion::load_recording_file(a.data);
        const auto route = pipeline::route_from_recording(rec);
        const auto trace = synthgen::simulate_trace(route, params);
        const auto d = rec.channel_row(ingestion::kDistanceChannel);
        cmp.distance.assign(d.begin(), d.end());
        cmp.recorded = ingestion::extract_target(rec);
        cmp.rule_based = pipeline::speed_at_distances(trace.distance, trace.speed, cmp.distance);
    } else {
        const auto profile = synthgen::default_profile(synthgen::parse_profile_kind(a.profile), a.length);
        const auto route = synthgen::generate_route(profile, mix_seed(a.seed, 1));
        const auto trace = synthgen::simulate_trace(route, params);
        cmp.recorded = synthgen::humanize(trace.speed, params, mix_seed(a.seed, 3));
        rec = synthgen::emit_recording(route, cmp.recorded, params.sample_rate, mix_seed(a.seed, 4));
        cmp.distance = trace.distance;
        cmp.rule_based = trace.speed;
    }
    if (!a.model.empty()) {
        const auto bundle = pipeline::ModelBundle::deserialize(read_file(a.model));
        const auto data = pipeline::labeled(rec);
        pipeline::check_features(bundle, data);
        if (data.size() != rec.samples()) throw DataError("recording has incomplete samples; cannot align predictions");
        for (Label c : bundle.predict(data.features)) cmp.predicted.push_back(pipeline::class_midpoint(c));
    }
    const auto text = pipeline::render_profiles(cmp);
    if (a.out.empty()) {
        std::cout << text;
    } else {
        write_file(a.out, text);
        std::cout << "wrote " << cmp.distance.size() << " rows to " << a.out << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Driver speed-class prediction toolkit"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Write synthetic recordings and a manifest");
    g->add_option("--seed", gen.seed, "Random seed")->required();
    g->add_option("--routes", gen.routes, "Number of benchmark routes")->capture_default_str();
    g->add_option("--jobs", gen.jobs, "Route/driver job list (drivepred.synth_jobs) instead of the benchmark");
    g->add_option("--out", gen.out, "Output directory")->required();

    TrainArgs train;
    auto* t = app.add_subcommand("train", "Fit one classifier on recordings and save it");
    t->add_option("--seed", train.seed, "Random seed")->required();
    t->add_option("--data", train.data, "Recording file or directory")->required();
    t->add_option("--algorithm,--algorithms", train.algorithm, "Classifier family")->required();
    t->add_option("--out", train.out, "Model file")->required();

    CompareArgs cmp;
    auto* c = app.add_subcommand("compare", "Cross-validate and hold out every requested classifier");
    c->add_option("--seed", cmp.seed, "Random seed")->required();
    c->add_option("--data", cmp.data, "Recording file or directory")->required();
    c->add_option("--out", cmp.out, "Report directory")->required();
    c->add_option("--algorithms", cmp.algorithms, "Comma-separated classifier families (default: all)")->delimiter(',');
    c->add_option("--test-fraction", cmp.test_fraction, "Held-out fraction")->capture_default_str();
    c->add_option("--folds", cmp.folds, "Cross-validation folds")->capture_default_str();
    c->add_flag("--paper-fidelity", cmp.paper_fidelity,
                "Standardize on all rows and leave KNN out of cross-validation");
    c->add_flag("--fit-on-all", cmp.fit_on_all, "Fit the standardizer on all rows, test rows included");

    EvaluateArgs ev;
    auto* e = app.add_subcommand("evaluate", "Per-class report of a saved model on recordings");
    e->add_option("--model", ev.model, "Model file")->required();
    e->add_option("--data", ev.data, "Recording file or directory")->required();
    e->add_option("--out", ev.out, "Directory for evaluation.txt and evaluation.json");

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Recorded vs rule-based (vs predicted) speed columns");
    s->add_option("--seed", sim.seed, "Random seed")->required();
    s->add_option("--data", sim.data, "Recording to compare against (default: a generated route)");
    s->add_option("--model", sim.model, "Model file for predicted speeds");
    s->add_option("--profile", sim.profile, "Route profile when no recording is given")->capture_default_str();
    s->add_option("--length", sim.length, "Route length in metres")->capture_default_str();
    s->add_option("--noise", sim.noise, "Noise amplitude in km/h")->capture_default_str();
    s->add_option("--compliance", sim.compliance, "Fraction of the limit targeted")->capture_default_str();
    s->add_option("--out", sim.out, "Output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        app.exit(ex);
        return kExitUsage;
    }

    try {
        if (*g) return cmd_generate(gen);
        if (*t) return cmd_train(train);
        if (*c) return cmd_compare(cmp);
        if (*e) return cmd_evaluate(ev);
        if (*s) return cmd_simulate(sim);
    } catch (const UsageError& ex) {
        spdlog::error("{}", ex.what());
        return kExitUsage;
    } catch (const Error& ex) {
        spdlog::error("{}", ex.what());
        return kExitData;
    } catch (const std::exception& ex) {
        spdlog::error("unexpected failure: {}", ex.what());
        return kExitData;
    }
    return kExitUsage;
}
