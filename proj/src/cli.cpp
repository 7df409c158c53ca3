#include "swdo/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "swdo/acceptance.hpp"
#include "swdo/benchmarks.hpp"
#include "swdo/dataset.hpp"
#include "swdo/evalstats.hpp"
#include "swdo/fixtures.hpp"
#include "swdo/format.hpp"
#include "swdo/image.hpp"
#include "swdo/minimodel.hpp"
#include "swdo/optimizers.hpp"
#include "swdo/tuner.hpp"
#include "swdo/wavelet.hpp"

namespace swdo::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text)
{
    std::vector<std::pair<std::string, std::string>> out;
    std::istringstream in(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        const auto body = trim(line.substr(0, line.find('#')));
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(n) + ": expected key = value");
        auto key = trim(body.substr(0, eq));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(n) + ": empty key");
        out.emplace_back(std::move(key), trim(body.substr(eq + 1)));
    }
    return out;
}

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(format_double(v)); }

std::uint64_t default_seed()
{
    const char* env = std::getenv("SWDO_SEED");
    if (!env || !*env)
        return 0;
    try {
        std::size_t used = 0;
        const auto v = std::stoull(env, &used);
        if (used == std::string_view(env).size())
            return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("SWDO_SEED is not an unsigned integer: '") + env + "'");
}

std::size_t default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// Options of one subcommand, remembered so the resolved values can be
// embedded in reports and written back as a replayable config file.
class Command {
public:
    Command(CLI::App& app, const std::string& name, const std::string& help)
        : sub_(app.add_subcommand(name, help)), name_(name)
    {
        sub_->add_option("--config", config_, "key = value file; flags on the command line win");
    }

    template <typename T>
    CLI::Option* option(const std::string& key, T& var, const std::string& help)
    {
        entries_.push_back({key, [&var] { return json(var); }});
        return sub_->add_option("--" + key, var, help)->capture_default_str();
    }

    CLI::Option* flag(const std::string& key, bool& var, const std::string& help)
    {
        entries_.push_back({key, [&var] { return json(var); }});
        return sub_->add_flag("--" + key, var, help);
    }

    CLI::Option* output(const std::string& help = "output directory")
    {
        out_ = "swdo-out/" + name_;
        return sub_->add_option("--out", out_, help)->capture_default_str();
    }

    CLI::App* app() const { return sub_; }
    const std::string& name() const { return name_; }
    const fs::path& out() const { return out_; }

    json resolved() const
    {
        json j = json::object();
        for (const auto& e : entries_)
            j[e.key] = e.get();
        return j;
    }

    std::string config_text() const
    {
        std::ostringstream s;
        for (const auto& e : entries_) {
            const auto v = e.get();
            if (v.is_string() && v.get<std::string>().empty())
                continue;
            s << e.key << " = " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
        }
        return s.str();
    }

    // Writes config.txt, report.json and the wall-clock sidecar.
    void write_outputs(const json& result, double seconds) const
    {
        fs::create_directories(out_);
        std::ofstream(out_ / "config.txt") << config_text();
        const json report = {{"command", name_}, {"config", resolved()}, {"result", result}};
        std::ofstream(out_ / "report.json") << report.dump(2) << '\n';
        std::ofstream(out_ / "timing.json") << json{{"command", name_}, {"seconds", seconds}}.dump(2) << '\n';
    }

private:
    struct Entry {
        std::string key;
        std::function<json()> get;
    };
    CLI::App* sub_;
    std::string name_;
    std::string config_;
    fs::path out_;
    std::vector<Entry> entries_;
};

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

void write_file(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

// ---- bench ----

struct BenchArgs {
    std::string algo, fn;
    int dims = 10;
    std::size_t pop = 30, iters = 500, workers = default_workers();
    std::uint64_t seed = 0;
};

int cmd_bench(const Command& cmd, const BenchArgs& a)
{
    const Stopwatch clock;
    const auto algo = parse_algorithm(a.algo);
    if (!is_benchmark(a.fn))
        throw ConfigError("unknown function '" + a.fn + "' (expected sphere, rastrigin, rosenbrock or ackley)");
    const auto space = benchmark_space<double>(a.fn, a.dims);
    const std::string fn = a.fn;
    const Objective<double> obj([fn](const Position<double>& x) { return benchmark(fn, x); });
    const auto res = optimize(algo, obj, space, Budget{a.pop, a.iters}, a.seed, {}, RunOptions{a.workers});

    fs::create_directories(cmd.out());
    std::ofstream hist(cmd.out() / "history.csv");
    write_history_csv(hist, res.history);
    json pos = json::array();
    for (auto v : res.best_position)
        pos.push_back(number(v));
    cmd.write_outputs({{"best_fitness", number(res.best_fitness)},
                       {"best_position", pos},
                       {"evaluations", res.evaluations},
                       {"nonfinite_evaluations", res.nonfinite_evaluations},
                       {"guarded_values", res.guarded_values},
                       {"iterations", res.history.size()}},
                      clock.seconds());
    std::cout << a.algo << " on " << a.fn << ": best " << format_double(res.best_fitness) << " after "
              << res.evaluations << " evaluations\n";
    return exit_ok;
}

// ---- dwt ----

struct DwtArgs {
    std::string input;
};

int cmd_dwt(const Command& cmd, const DwtArgs& a)
{
    const Stopwatch clock;
    const auto raw = read_pnm(a.input);
    if (raw.channels != 1)
        throw DataError(a.input + ": expected a single-channel (P5) image");
    const auto img = normalize(raw);
    const auto& plane = img.channels.front();
    require_even(plane, "dwt");
    const auto s = dwt2_forward(plane);

    fs::create_directories(cmd.out());
    json bands = json::object();
    const std::array<std::pair<const char*, const Plane<double>*>, 4> named{
        {{"ll", &s.ll}, {"lh", &s.lh}, {"hl", &s.hl}, {"hh", &s.hh}}};
    for (const auto& [name, band] : named) {
        const double lo = band->minCoeff(), hi = band->maxCoeff();
        const double scale = hi > lo ? 1.0 / (hi - lo) : 0.0;
        Image out;
        out.channels.push_back((band->array() - lo).matrix() * scale);
        write_pgm(cmd.out() / (std::string(name) + ".pgm"), to_raw(out));
        bands[name] = {{"energy", band->squaredNorm()}, {"offset", lo}, {"scale", scale}};
    }
    const json result = {{"input_energy", plane.squaredNorm()},
                         {"subband_energy", s.energy()},
                         {"detail_energy", s.detail_energy()},
                         {"bands", bands},
                         {"rows", plane.rows()},
                         {"cols", plane.cols()}};
    std::ofstream(cmd.out() / "energies.json") << result.dump(2) << '\n';
    cmd.write_outputs(result, clock.seconds());
    std::cout << "input energy " << format_double(plane.squaredNorm()) << ", detail energy "
              << format_double(s.detail_energy()) << '\n';
    return exit_ok;
}

// ---- data sources shared by train and tune ----

struct DataArgs {
    std::size_t synthetic = 0;
    std::string manifest;
    int size = 32;
};

std::vector<LabeledImage> load_data(const DataArgs& a, std::uint64_t seed)
{
    if ((a.synthetic > 0) == !a.manifest.empty())
        throw ConfigError("give exactly one of --synthetic N or --manifest FILE");
    if (a.size < 4 || a.size % 2)
        throw ConfigError("--size must be an even number >= 4");
    if (a.synthetic > 0)
        return generate_synthetic(a.synthetic, seed, a.size);
    auto data = load_manifest(a.manifest);
    for (auto& d : data)
        if (d.pixels.rows() != a.size || d.pixels.cols() != a.size)
            d.pixels = resize_bilinear(d.pixels, a.size, a.size);
    return data;
}

// ---- train ----

struct TrainArgs {
    DataArgs data;
    ModelConfig model;
    int attention_dim = 4;
    std::size_t kfold = 0, augment = 0;
    double val_frac = 0.15;
    bool desk = false;
    std::uint64_t seed = 0;
};

ConfusionCounts evaluate(const ModelConfig& c, const ModelWeights& w, const std::vector<LabeledImage>& set)
{
    std::vector<double> probs;
    std::vector<int> labels;
    for (const auto& s : set) {
        probs.push_back(predict(c, w, s.pixels));
        labels.push_back(s.label);
    }
    return confusion(probs, labels);
}

std::vector<LabeledImage> with_augmentation(std::vector<LabeledImage> set, std::size_t copies, std::uint64_t seed)
{
    constexpr std::array ops{AugmentOp::hflip,  AugmentOp::vflip,  AugmentOp::rot90, AugmentOp::rot180,
                             AugmentOp::rot270, AugmentOp::rotate, AugmentOp::zoom,  AugmentOp::translate};
    const auto n = set.size();
    for (std::size_t k = 0; k < copies; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            RngStream rng(seed, hash_combine({0xA06, k, i}));
            const auto op = ops[static_cast<std::size_t>(rng.uniform_int(0, ops.size() - 1))];
            LabeledImage copy = set[i];
            copy.pixels = augment(set[i].pixels, op, rng);
            set.push_back(std::move(copy));
        }
    }
    return set;
}

json metrics_json(const ClassificationMetrics& m)
{
    return {{"accuracy", m.accuracy.value},
            {"precision", m.precision.value},
            {"recall", m.recall.value},
            {"f_measure", m.f_measure.value}};
}

int cmd_train(const Command& cmd, const TrainArgs& a)
{
    const Stopwatch clock;
    const auto config = normalized(a.model);
    validate(config, a.desk);
    const auto data = load_data(a.data, a.seed);
    std::vector<std::size_t> all(data.size());
    std::iota(all.begin(), all.end(), std::size_t{0});

    struct Split {
        std::vector<std::size_t> fit, test;
    };
    std::vector<Split> splits;
    if (a.kfold > 0) {
        const auto plan = kfold_split(data.size(), a.kfold, a.seed);
        for (std::size_t f = 0; f < a.kfold; ++f)
            splits.push_back({plan.complement(f), plan.fold(f)});
    } else {
        splits.push_back({all, {}});
    }

    fs::create_directories(cmd.out());
    std::ofstream csv(cmd.out() / "metrics.csv");
    csv << "fold,accuracy,precision,recall,f_measure,best_epoch,best_val_accuracy\n";
    json folds = json::array();
    for (std::size_t f = 0; f < splits.size(); ++f) {
        const auto fold_seed = hash_combine({a.seed, f});
        const auto tv = train_val_split(splits[f].fit, fold_seed, a.val_frac);
        const auto train_set = with_augmentation(gather(data, tv.train), a.augment, fold_seed);
        const auto val_set = gather(data, tv.val);
        const auto result = train(config, train_set, val_set, fold_seed, a.attention_dim);
        // Without k-fold the validation split doubles as the reported test set.
        const auto test_set = splits[f].test.empty() ? val_set : gather(data, splits[f].test);
        const auto m = classification_metrics(evaluate(config, result.weights, test_set));
        csv << f << ',' << format_double(m.accuracy.value) << ',' << format_double(m.precision.value) << ','
            << format_double(m.recall.value) << ',' << format_double(m.f_measure.value) << ',' << result.best_epoch
            << ',' << format_double(result.best_val_accuracy) << '\n';
        json history = json::array();
        for (const auto& e : result.history)
            history.push_back({{"epoch", e.epoch},
                               {"lr", e.lr},
                               {"train_loss", number(e.train_loss)},
                               {"train_accuracy", e.train_accuracy},
                               {"val_loss", number(e.val_loss)},
                               {"val_accuracy", e.val_accuracy}});
        folds.push_back({{"fold", f},
                         {"seed", fold_seed},
                         {"metrics", metrics_json(m)},
                         {"best_epoch", result.best_epoch},
                         {"best_val_accuracy", result.best_val_accuracy},
                         {"history", history}});
        if (a.kfold == 0)
            save_weights(cmd.out() / "model", result.weights, config, shape_of(train_set, a.attention_dim),
                         fold_seed);
        std::cout << "fold " << f << ": accuracy " << format_double(m.accuracy.value) << '\n';
    }
    cmd.write_outputs({{"model", json::parse(config_json_text(config))}, {"folds", folds}}, clock.seconds());
    return exit_ok;
}

// ---- tune ----

struct TuneArgs {
    DataArgs data;
    std::string algo;
    std::size_t pop = 6, iters = 8, workers = default_workers();
    bool desk = false, surrogate = false;
    std::uint64_t seed = 0;
};

int cmd_tune(const Command& cmd, const TuneArgs& a)
{
    const Stopwatch clock;
    const auto algo = parse_algorithm(a.algo);
    TuneOptions opts;
    opts.budget = Budget{a.pop, a.iters};
    opts.seed = a.seed;
    opts.space = a.desk ? HyperSpace::desk() : HyperSpace::table();
    opts.workers = a.workers;

    TuneReport report;
    if (a.surrogate) {
        report = tune(algo, surrogate_fitness(), opts);
    } else {
        TrainingFitness fit(load_data(a.data, a.seed), a.seed, a.desk);
        report = tune(algo, [&](const ModelConfig& c, const Position<double>&) { return fit(c); }, opts);
    }
    fs::create_directories(cmd.out());
    std::ofstream log(cmd.out() / "tune_log.csv");
    write_tune_log_csv(log, report);
    cmd.write_outputs(json::parse(tune_report_json(report)), clock.seconds());
    std::cout << a.algo << ": best fitness " << format_double(report.best_fitness) << " with "
              << describe(report.best_config) << " (" << report.log.size() << " evaluations)\n";
    return exit_ok;
}

// ---- stats ----

struct StatsArgs {
    std::string fixture, folds, fixture_dir = fixtures::default_dir().string();
    bool welch = false;
};

int cmd_stats(const Command& cmd, const StatsArgs& a)
{
    const Stopwatch clock;
    if (a.fixture.empty() == a.folds.empty())
        throw ConfigError("give exactly one of --fixture NAME or --folds FILE");
    const auto table = a.fixture.empty() ? read_fold_table(fs::path(a.folds)) : fixtures::load(a.fixture, a.fixture_dir);
    const auto m = comparison_matrix(table, a.welch ? DfRule::welch : DfRule::pooled);
    std::ostringstream csv;
    write_comparison_csv(csv, m);
    fs::create_directories(cmd.out());
    write_file(cmd.out() / "comparison.csv", csv.str());
    cmd.write_outputs({{"models", table.models}, {"pairs", m.cells.size()}}, clock.seconds());
    std::cout << csv.str();
    return exit_ok;
}

// ---- reproduce ----

struct ReproduceArgs {
    bool json_out = false, full = false;
    std::vector<int> only;
    std::string fixture_dir = fixtures::default_dir().string();
    std::size_t workers = default_workers();
};

constexpr int slow_criterion = 7;

int cmd_reproduce(const ReproduceArgs& a)
{
    std::vector<int> ids = a.only;
    if (ids.empty())
        for (int i = 1; i <= acceptance::criterion_count; ++i)
            if (i != slow_criterion || a.full)
                ids.push_back(i);
    acceptance::Options opts;
    opts.fixture_dir = a.fixture_dir;
    opts.workers = a.workers;
    std::vector<acceptance::Result> results;
    for (int id : ids) {
        results.push_back(acceptance::run(id, opts));
        if (!a.json_out)
            std::cout << acceptance::format_line(results.back()) << std::endl;
    }
    const bool ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
    if (a.json_out) {
        std::cout << acceptance::to_json(results) << '\n';
    } else {
        if (a.only.empty() && !a.full)
            std::cout << "SKIP  " << slow_criterion << ". end-to-end desk pipeline (run with --full)\n";
        std::cout << (ok ? "all checks passed" : "some checks failed:");
        for (const auto& r : results)
            if (!r.passed)
                std::cout << ' ' << r.id;
        std::cout << '\n';
    }
    return ok ? exit_ok : exit_acceptance;
}

// Moves `key = value` lines from a --config file in front of the command-line
// arguments of the selected subcommand, so later flags override them.
std::vector<std::string> expand_config(const CLI::App& app, std::vector<std::string> args)
{
    if (args.empty())
        return args;
    std::string path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
    }
    if (path.empty())
        return args;
    const auto* sub = app.get_subcommand_no_throw(args[0]);
    if (!sub)
        return args;
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot read config file " + path);
    std::stringstream text;
    text << in.rdbuf();
    std::vector<std::string> out{args[0]};
    for (const auto& [key, value] : parse_config_text(text.str())) {
        const auto* opt = sub->get_option_no_throw("--" + key);
        if (!opt || key == "config")
            throw ConfigError(path + ": unknown key '" + key + "' for " + args[0]);
        out.push_back("--" + key + "=" + value);
    }
    out.insert(out.end(), args.begin() + 1, args.end());
    return out;
}

} // namespace

int run(const std::vector<std::string>& args)
{
    CLI::App app{"Swarm-tuned wavelet/attention classifier toolkit"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    const auto seed_help = "master seed (default: SWDO_SEED or 0)";

    BenchArgs bench;
    Command bench_cmd(app, "bench", "run an optimizer on a benchmark function");
    bench_cmd.option("algo", bench.algo, "fox, gwo, igwo or mgto")->required();
    bench_cmd.option("fn", bench.fn, "sphere, rastrigin, rosenbrock or ackley")->required();
    bench_cmd.option("dims", bench.dims, "dimensions")->check(CLI::PositiveNumber);
    bench_cmd.option("pop", bench.pop, "population size");
    bench_cmd.option("iters", bench.iters, "iterations");
    bench_cmd.option("seed", bench.seed, seed_help);
    bench_cmd.option("workers", bench.workers, "evaluation threads")->check(CLI::PositiveNumber);
    bench_cmd.output();

    DwtArgs dwt;
    Command dwt_cmd(app, "dwt", "one-level Haar transform of a PGM image");
    dwt_cmd.option("input", dwt.input, "8-bit PGM")->required();
    dwt_cmd.output();

    const auto add_data = [](Command& c, DataArgs& d) {
        c.option("synthetic", d.synthetic, "generate N synthetic samples");
        c.option("manifest", d.manifest, "filename,label CSV");
        c.option("size", d.size, "image side length");
    };

    TrainArgs tr;
    Command train_cmd(app, "train", "train the classifier");
    add_data(train_cmd, tr.data);
    train_cmd.option("filters", tr.model.filters_size, "convolution filters");
    train_cmd.option("kernel", tr.model.kernel_size, "kernel size (odd)");
    train_cmd.option("lr", tr.model.lr, "learning rate");
    train_cmd.option("l2", tr.model.l2_reg, "L2 weight");
    train_cmd.option("l1", tr.model.l1_reg, "L1 weight");
    train_cmd.option("batch", tr.model.batch_size, "batch size");
    train_cmd.option("epochs", tr.model.epochs, "epochs");
    train_cmd.option("att-reg", tr.model.att_reg_weight, "attention regularization weight");
    train_cmd.option("attention-dim", tr.attention_dim, "attention projection width");
    train_cmd.option("kfold", tr.kfold, "k-fold cross-validation (0 = single split)");
    train_cmd.option("val-frac", tr.val_frac, "validation fraction");
    train_cmd.option("augment", tr.augment, "augmented copies per training image");
    train_cmd.flag("desk", tr.desk, "allow configs below the tuning ranges");
    train_cmd.option("seed", tr.seed, seed_help);
    train_cmd.output();

    TuneArgs tu;
    Command tune_cmd(app, "tune", "tune the classifier with a swarm optimizer");
    add_data(tune_cmd, tu.data);
    tune_cmd.option("algo", tu.algo, "fox, gwo, igwo or mgto")->required();
    tune_cmd.option("pop", tu.pop, "population size");
    tune_cmd.option("iters", tu.iters, "iterations");
    tune_cmd.flag("desk", tu.desk, "search the reduced desk-scale box");
    tune_cmd.flag("surrogate", tu.surrogate, "quadratic bowl instead of training");
    tune_cmd.option("seed", tu.seed, seed_help);
    tune_cmd.option("workers", tu.workers, "evaluation threads")->check(CLI::PositiveNumber);
    tune_cmd.output();

    StatsArgs st;
    Command stats_cmd(app, "stats", "pairwise t-tests over fold accuracies");
    stats_cmd.option("fixture", st.fixture, "isic2016, isic2017 or isic2016_amended");
    stats_cmd.option("folds", st.folds, "model,fold1..foldk CSV");
    stats_cmd.option("fixture-dir", st.fixture_dir, "fixture directory");
    stats_cmd.flag("welch", st.welch, "Welch degrees of freedom");
    stats_cmd.output();

    ReproduceArgs rp;
    auto* rep = app.add_subcommand("reproduce", "run the acceptance checks");
    rep->add_flag("--json", rp.json_out, "machine-readable output");
    rep->add_flag("--full", rp.full, "include the slow end-to-end tuning check");
    rep->add_option("--only", rp.only, "criterion ids to run")->check(CLI::Range(1, acceptance::criterion_count));
    rep->add_option("--fixture-dir", rp.fixture_dir, "fixture directory")->capture_default_str();
    rep->add_option("--workers", rp.workers, "evaluation threads")->check(CLI::PositiveNumber);

    try {
        bench.seed = tr.seed = tu.seed = default_seed();
        auto argv = expand_config(app, args);
        std::reverse(argv.begin(), argv.end());
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? exit_ok : exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return dynamic_cast<const DataError*>(&e) ? exit_data : exit_usage;
    }

    try {
        if (bench_cmd.app()->parsed())
            return cmd_bench(bench_cmd, bench);
        if (dwt_cmd.app()->parsed())
            return cmd_dwt(dwt_cmd, dwt);
        if (train_cmd.app()->parsed())
            return cmd_train(train_cmd, tr);
        if (tune_cmd.app()->parsed())
            return cmd_tune(tune_cmd, tu);
        if (stats_cmd.app()->parsed())
            return cmd_stats(stats_cmd, st);
        return cmd_reproduce(rp);
    } catch (const ShapeError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_data;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_data;
    }
}

} // namespace swdo::cli
