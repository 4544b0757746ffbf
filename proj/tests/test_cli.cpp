#include <array>
#include <cstdio>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

using nlohmann::json;
using testsupport::TempDir;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + BRONCHOMETER_CLI + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("carina and rll on a generated trachea") {
    TempDir dir("cli");
    const auto gen = run("phantom trachea --out " + q(dir / "scan") + " --frames 70 --split 40 --gap 5");
    REQUIRE(gen.code == 0);
    CHECK(json::parse(gen.out).at("split_frame") == 40);

    const auto car = run("carina " + q(dir / "scan") + " --out " + q(dir / "c"));
    REQUIRE(car.code == 0);
    const int frame = json::parse(car.out).at("carina_frame");
    CHECK(std::abs(frame - 40) <= 2);
    CHECK(std::filesystem::exists(dir / "c" / "carina.json"));

    REQUIRE(run("rll " + q(dir / "scan") + " --out " + q(dir / "r")).code == 0);
    int pngs = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir / "r" / "rll")) pngs += e.path().extension() == ".png";
    CHECK(pngs == 70 - frame - 1);

    REQUIRE(run("rll " + q(dir / "scan") + " --out " + q(dir / "r2")).code == 0);
    CHECK(testsupport::slurp(dir / "r" / "carina.json") == testsupport::slurp(dir / "r2" / "carina.json"));

    const auto pipe = run("pipeline " + q(dir / "scan") + " --out " + q(dir / "p") + " --frames 0 69");
    REQUIRE(pipe.code == 0);
    CHECK(json::parse(pipe.out).at("frame_range") == json::array({0, 69}));
  }

  TEST_CASE("raw16 scans need a window") {
    TempDir dir("cli");
    REQUIRE(run("phantom trachea --out " + q(dir / "raw") + " --frames 60 --split 40 --window raw").code == 0);
    CHECK(run("carina " + q(dir / "raw") + " --raw-window mediastinum").code == 0);
  }

  TEST_CASE("measure with and without a session") {
    TempDir dir("cli");
    const auto gen = run("phantom ba --out " + q(dir / "ba") + " --spacing 0.33");
    REQUIRE(gen.code == 0);
    const auto roi = json::parse(gen.out).at("roi");
    std::string rect;
    for (const auto& v : roi) rect += " " + std::to_string(v.get<int>());

    const auto m = run("measure " + q(dir / "ba") + " --frame 0 --rect" + rect + " --seed 3 --overlay");
    REQUIRE(m.code == 0);
    const auto mj = json::parse(m.out);
    CHECK(mj.at("bar").get<double>() >= 0.79);
    CHECK(mj.at("bar").get<double>() <= 0.88);
    CHECK(mj.at("wt_seed") == 3);
    CHECK(mj.contains("overlay"));

    const auto env = run("measure " + q(dir / "ba") + " --frame 0 --rect" + rect, "BRONCHOMETER_SEED=31");
    CHECK(json::parse(env.out).at("wt_seed") == 31);

    const auto s1 = run("measure " + q(dir / "ba") + " --frame 0 --rect" + rect + " --sessions " + q(dir / "sess"));
    REQUIRE(s1.code == 0);
    int files = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir / "sess")) files += e.path().extension() == ".json";
    CHECK(files == 1);

    CHECK(run("measure " + q(dir / "ba") + " --frame 0 --rect 0 0 9 9").code == 3);
    CHECK(run("measure " + q(dir / "ba") + " --frame 0 --rect 0 0 500 500").code == 2);
    CHECK(run("measure " + q(dir / "ba") + " --frame 4 --rect" + rect).code == 2);
  }

  TEST_CASE("exit codes") {
    TempDir dir("cli");
    CHECK(run("carina " + q(dir / "missing")).code == 2);
    CHECK(run("frobnicate").code == 2);
    CHECK(run("carina").code == 2);
    CHECK(run("measure " + q(dir.path) + " --frame 0 --rect 1 2 3").code == 2);
    REQUIRE(run("phantom trachea --out " + q(dir / "wide") + " --frames 60 --split 40 --gap 10").code == 0);
    CHECK(run("carina " + q(dir / "wide")).code == 3);
    CHECK(run("--help").code == 0);
  }
}
