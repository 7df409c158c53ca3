#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "swdo/cli.hpp"
#include "swdo/core.hpp"
#include "swdo/fixtures.hpp"
#include "swdo/image.hpp"

using namespace swdo;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name)
    {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& leaf) const { return (path / leaf).string(); }
};

// Runs the tool with stdout and stderr captured.
struct Captured {
    int code;
    std::string out, err;
};

Captured run_tool(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    auto* old_out = std::cout.rdbuf(out.rdbuf());
    auto* old_err = std::cerr.rdbuf(err.rdbuf());
    const int code = cli::run(args);
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

} // namespace

TEST_CASE("config text parsing")
{
    const auto kv = cli::parse_config_text("# comment\nalgo = fox\n\n pop=12  # trailing\n");
    REQUIRE(kv.size() == 2);
    CHECK(kv[0] == std::pair<std::string, std::string>{"algo", "fox"});
    CHECK(kv[1] == std::pair<std::string, std::string>{"pop", "12"});
    CHECK_THROWS_AS(cli::parse_config_text("novalue\n"), ConfigError);
}

TEST_CASE("bench writes a deterministic history")
{
    TempDir dir("swdo_cli_bench");
    const std::vector<std::string> args{"bench", "--algo", "fox", "--fn", "sphere", "--dims", "10", "--pop", "30",
                                        "--iters", "500", "--seed", "1", "--workers", "2"};
    auto a = args;
    a.insert(a.end(), {"--out", dir / "a"});
    auto b = args;
    b.insert(b.end(), {"--out", dir / "b", "--workers", "1"});
    REQUIRE(run_tool(a).code == 0);
    REQUIRE(run_tool(b).code == 0);
    const auto ha = slurp(dir.path / "a" / "history.csv");
    CHECK(lines(ha) == 501);
    CHECK(ha == slurp(dir.path / "b" / "history.csv"));
    const auto report = nlohmann::json::parse(slurp(dir.path / "a" / "report.json"));
    CHECK(report["config"]["algo"] == "fox");
    CHECK(report["config"]["seed"] == 1);
    CHECK(report["result"]["iterations"] == 500);
    CHECK(fs::exists(dir.path / "a" / "timing.json"));
    CHECK(slurp(dir.path / "a" / "report.json").find("seconds") == std::string::npos);
}

TEST_CASE("config files replay a run and flags override them")
{
    TempDir dir("swdo_cli_config");
    REQUIRE(run_tool({"bench", "--algo", "mgto", "--fn", "ackley", "--dims", "3", "--pop", "8", "--iters", "20",
                      "--seed", "4", "--out", dir / "first"})
                .code == 0);
    REQUIRE(run_tool({"bench", "--config", dir / "first/config.txt", "--out", dir / "replay"}).code == 0);
    CHECK(slurp(dir.path / "first" / "history.csv") == slurp(dir.path / "replay" / "history.csv"));
    CHECK(slurp(dir.path / "first" / "report.json") == slurp(dir.path / "replay" / "report.json"));

    REQUIRE(run_tool({"bench", "--config", dir / "first/config.txt", "--iters", "5", "--out", dir / "short"}).code ==
            0);
    CHECK(lines(slurp(dir.path / "short" / "history.csv")) == 6);

    std::ofstream(dir.path / "bad.txt") << "colour = red\n";
    CHECK(run_tool({"bench", "--config", dir / "bad.txt", "--algo", "fox", "--fn", "sphere"}).code == 1);
}

TEST_CASE("usage errors")
{
    TempDir dir("swdo_cli_usage");
    CHECK(run_tool({"bench", "--algo", "fox", "--fn", "cube", "--out", dir / "x"}).code == 1);
    CHECK(run_tool({"bench", "--algo", "pso", "--fn", "sphere", "--out", dir / "x"}).code == 1);
    CHECK(run_tool({"bench", "--fn", "sphere"}).code == 1);
    CHECK(run_tool({}).code == 1);
    CHECK(run_tool({"frobnicate"}).code == 1);
    CHECK(run_tool({"--help"}).code == 0);
}

TEST_CASE("dwt command")
{
    TempDir dir("swdo_cli_dwt");
    write_pgm(dir.path / "flat.pgm", RawImage{6, 4, 1, std::vector<std::uint8_t>(24, 90)});
    REQUIRE(run_tool({"dwt", "--input", dir / "flat.pgm", "--out", dir / "flat"}).code == 0);
    const auto e = nlohmann::json::parse(slurp(dir.path / "flat" / "energies.json"));
    CHECK(e["bands"]["lh"]["energy"] == 0.0);
    CHECK(e["bands"]["hl"]["energy"] == 0.0);
    CHECK(e["bands"]["hh"]["energy"] == 0.0);
    for (auto band : {"ll", "lh", "hl", "hh"})
        CHECK(fs::exists(dir.path / "flat" / (std::string(band) + ".pgm")));

    std::vector<std::uint8_t> noise(64);
    for (std::size_t i = 0; i < noise.size(); ++i)
        noise[i] = static_cast<std::uint8_t>((i * 37) % 251);
    write_pgm(dir.path / "noise.pgm", RawImage{8, 8, 1, noise});
    REQUIRE(run_tool({"dwt", "--input", dir / "noise.pgm", "--out", dir / "noise"}).code == 0);
    const auto n = nlohmann::json::parse(slurp(dir.path / "noise" / "energies.json"));
    CHECK(std::abs(n["subband_energy"].get<double>() - n["input_energy"].get<double>()) < 1e-9);
    const auto ll = read_pnm(dir.path / "noise" / "ll.pgm");
    CHECK(ll.width == 4);
    CHECK(ll.height == 4);

    write_pgm(dir.path / "odd.pgm", RawImage{5, 4, 1, std::vector<std::uint8_t>(20, 1)});
    const auto odd = run_tool({"dwt", "--input", dir / "odd.pgm", "--out", dir / "odd"});
    CHECK(odd.code == 2);
    CHECK(odd.err.find("width") != std::string::npos);
    CHECK(run_tool({"dwt", "--input", dir / "none.pgm", "--out", dir / "none"}).code == 2);
}

TEST_CASE("stats command")
{
    TempDir dir("swdo_cli_stats");
    const auto r = run_tool({"stats", "--fixture", "isic2016", "--out", dir / "s"});
    REQUIRE(r.code == 0);
    const auto csv = slurp(dir.path / "s" / "comparison.csv");
    CHECK(csv == r.out);
    CHECK(lines(csv) == 401);
    std::istringstream in(csv);
    std::string line;
    bool found = false;
    while (std::getline(in, line))
        if (line.rfind("Xception,Xception+Wavelet,", 0) == 0) {
            found = true;
            const auto rest = line.substr(26);
            const auto comma = rest.find(',');
            CHECK(std::abs(std::stod(rest.substr(0, comma)) + 4.1328) <= 1e-3);
            CHECK(std::abs(std::stod(rest.substr(comma + 1)) - 0.0032) <= 5e-4);
        }
    CHECK(found);
    CHECK(csv.find("Xception,Xception,0,1\n") != std::string::npos);

    CHECK(run_tool({"stats", "--fixture", "isic2017", "--out", dir / "t"}).code == 0);
    std::ofstream(dir.path / "bad.csv") << "model,f1,f2\nA,0.9,oops\n";
    CHECK(run_tool({"stats", "--folds", dir / "bad.csv", "--out", dir / "u"}).code == 2);
    CHECK(run_tool({"stats", "--out", dir / "v"}).code == 1);
}

TEST_CASE("train and tune commands")
{
    TempDir dir("swdo_cli_train");
    const std::vector<std::string> small{"--synthetic", "60", "--size", "16", "--filters", "3", "--kernel", "5",
                                         "--lr", "0.03", "--batch", "16", "--epochs", "2", "--desk"};
    auto kfold = small;
    kfold.insert(kfold.begin(), "train");
    kfold.insert(kfold.end(), {"--kfold", "5", "--seed", "2", "--out", dir / "k"});
    REQUIRE(run_tool(kfold).code == 0);
    CHECK(lines(slurp(dir.path / "k" / "metrics.csv")) == 6);

    auto single = small;
    single.insert(single.begin(), "train");
    single.insert(single.end(), {"--augment", "1", "--out", dir / "one"});
    REQUIRE(run_tool(single).code == 0);
    CHECK(fs::exists(dir.path / "one" / "model.json"));
    CHECK(fs::exists(dir.path / "one" / "model.bin"));
    REQUIRE(run_tool({"train", "--config", dir / "one/config.txt", "--out", dir / "again"}).code == 0);
    CHECK(slurp(dir.path / "one" / "metrics.csv") == slurp(dir.path / "again" / "metrics.csv"));

    CHECK(run_tool({"train", "--manifest", dir / "missing.csv", "--desk", "--out", dir / "m"}).code == 2);
    CHECK(run_tool({"train", "--synthetic", "40", "--filters", "2", "--out", dir / "n"}).code == 1);

    const auto t = run_tool({"tune", "--algo", "mgto", "--surrogate", "--pop", "6", "--iters", "8", "--seed", "7",
                             "--out", dir / "tune"});
    REQUIRE(t.code == 0);
    CHECK(lines(slurp(dir.path / "tune" / "tune_log.csv")) == 1 + 6 * 9 + 6 * 8);
    const auto rep = nlohmann::json::parse(slurp(dir.path / "tune" / "report.json"));
    CHECK(rep["result"]["evaluations"] == 6 * 9 + 6 * 8);
    CHECK(rep["config"]["seed"] == 7);
}

TEST_CASE("reproduce command")
{
    const auto ok = run_tool({"reproduce", "--only", "5", "--only", "8"});
    CHECK(ok.code == 0);
    CHECK(ok.out.find("PASS  5.") != std::string::npos);

    const auto js = run_tool({"reproduce", "--only", "3", "--json"});
    CHECK(js.code == 0);
    const auto j = nlohmann::json::parse(js.out);
    CHECK(j["passed"] == true);
    CHECK(j["criteria"][0]["id"] == 3);

    TempDir dir("swdo_cli_reproduce");
    for (auto name : fixtures::names)
        fs::copy_file(fixtures::path_of(name), fixtures::path_of(name, dir.path));
    const auto target = fixtures::path_of("isic2016", dir.path);
    std::string text;
    {
        std::ifstream in(target);
        text.assign(std::istreambuf_iterator<char>(in), {});
    }
    const auto at = text.find("0.9511");
    REQUIRE(at != std::string::npos);
    text.replace(at, 6, "0.9512");
    std::ofstream(target, std::ios::trunc) << text;
    const auto bad = run_tool({"reproduce", "--only", "1", "--fixture-dir", dir.path.string()});
    CHECK(bad.code == 3);
    CHECK(bad.out.find("isic2016") != std::string::npos);
    CHECK(bad.out.find("does not match") != std::string::npos);
}
