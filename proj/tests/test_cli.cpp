#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "rdlens/io.hpp"
#include "rdlens/toy_process.hpp"

using namespace rdlens;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RDLENS_BIN) + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WEXITSTATUS(rc);
}

fs::path make_work_dir() {
  fs::path dir = fs::temp_directory_path() / "rdlens_cli_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::size_t count_lines(const fs::path& p) {
  std::string content = read_file(p);
  std::size_t n = 0;
  for (char c : content)
    if (c == '\n') ++n;
  return n;
}

const std::string kShortTrain =
    " --steps 300 --lr-decay-from 150 --log-every 50 --anneal 1.0:1.25:100:150";

}  // namespace

TEST_CASE("cli pipeline: calibrate, train, oracle, eval, rerun") {
  fs::path dir = make_work_dir();
  const std::string tp_path = (dir / "tp.json").string();

  SECTION("calibrate writes a valid process") {
    REQUIRE(run_cli("calibrate --target-mi 0.5 --out " + tp_path) == 0);
    ToyProcess tp = load_toy_process(tp_path);
    REQUIRE(std::abs(mutual_information(tp.joint) - 0.5) < 1e-6);
    json manifest = json::parse(read_file(tp_path + ".manifest.json"));
    REQUIRE(manifest["command"] == "calibrate");
    REQUIRE(manifest["outputs"]["process"] == tp_path);
  }

  SECTION("calibrate beyond the latent entropy exits 2") {
    REQUIRE(run_cli("calibrate --target-mi 0.7 --out " + tp_path) == 2);
  }

  SECTION("usage errors exit 1") {
    REQUIRE(run_cli("train --process missing.json") == 1);  // no --out-prefix
    REQUIRE(run_cli("calibrate --target-mi 0.5 --out " + tp_path + " --bogus-flag") == 1);
    REQUIRE(run_cli("frobnicate") == 1);
  }

  SECTION("train, oracle, eval, rerun round") {
    REQUIRE(run_cli("calibrate --target-mi 0.5 --out " + tp_path) == 0);
    const std::string prefix = (dir / "run").string();
    REQUIRE(run_cli("train --process " + tp_path + " --out-prefix " + prefix +
                    " --objective target-rate:0.5 --seed 3" + kShortTrain) == 0);

    REQUIRE(fs::exists(prefix + ".checkpoint.json"));
    REQUIRE(fs::exists(prefix + ".trace.csv"));
    REQUIRE(fs::exists(prefix + ".bounds.csv"));
    REQUIRE(fs::exists(prefix + ".manifest.json"));

    // trace: header + 300/50 records
    REQUIRE(count_lines(prefix + ".trace.csv") == 1 + 6);

    // bounds CSV header is the pinned schema
    std::string bounds = read_file(prefix + ".bounds.csv");
    REQUIRE(bounds.rfind("objective,beta_or_sigma,seed,H,D,R,elbo,I_rep,E,G,I_gen,U,S,"
                         "feasibility\n",
                         0) == 0);

    // oracle accepts the shipped checkpoint
    REQUIRE(run_cli("oracle --process " + tp_path + " --checkpoint " + prefix +
                    ".checkpoint.json") == 0);
    REQUIRE(run_cli("oracle --process " + tp_path + " --optimal-reference") == 0);

    // eval on the reference model
    const std::string eval_prefix = (dir / "ref").string();
    REQUIRE(run_cli("eval --process " + tp_path + " --optimal-reference --out-prefix " +
                    eval_prefix) == 0);
    json fig = json::parse(read_file(eval_prefix + ".fig2.json"));
    REQUIRE(std::abs(fig["kl_p_g"].get<double>()) < 1e-9);
    REQUIRE(count_lines(eval_prefix + ".encoder.csv") == 30);

    // rerun the train manifest: byte-identical outputs under a new prefix
    const std::string redo = (dir / "redo").string();
    REQUIRE(run_cli("rerun --manifest " + prefix + ".manifest.json --out-prefix " + redo) ==
            0);
    json m1 = json::parse(read_file(prefix + ".manifest.json"));
    json m2 = json::parse(read_file(redo + ".manifest.json"));
    for (auto& [key, path1] : m1["outputs"].items()) {
      const std::string p2 = m2["outputs"][key].get<std::string>();
      REQUIRE(read_file(path1.get<std::string>()) == read_file(p2));
    }
  }

  SECTION("schema mismatch exits 4") {
    REQUIRE(run_cli("calibrate --target-mi 0.5 --out " + tp_path) == 0);
    json j = json::parse(read_file(tp_path));
    j["schema"] = "toyprocess-v9";
    atomic_write_file(tp_path, j.dump());
    REQUIRE(run_cli("train --process " + tp_path + " --out-prefix " +
                    (dir / "x").string() + kShortTrain) == 4);
    REQUIRE(run_cli("train --process " + tp_path + " --out-prefix " +
                    (dir / "x").string()) == 4);
  }

  SECTION("single-step training leaves a one-record trace") {
    REQUIRE(run_cli("calibrate --target-mi 0.5 --out " + tp_path) == 0);
    const std::string prefix = (dir / "one").string();
    REQUIRE(run_cli("train --process " + tp_path + " --out-prefix " + prefix +
                    " --steps 1 --lr-decay-from 0 --no-anneal") == 0);
    REQUIRE(count_lines(prefix + ".trace.csv") == 2);  // header + one record
  }

  SECTION("sweep emits points and frontier with pinned headers") {
    REQUIRE(run_cli("calibrate --target-mi 0.5 --out " + tp_path) == 0);
    const std::string prefix = (dir / "sw").string();
    REQUIRE(run_cli("sweep --process " + tp_path + " --out-prefix " + prefix +
                    " --grid 0.5,2.0 --seeds 2 --jobs 2" + kShortTrain) == 0);
    std::string pts = read_file(prefix + ".points.csv");
    REQUIRE(pts.rfind("objective,beta_or_sigma,seed,H,D,R,elbo,I_rep,E,G,I_gen,U,S,"
                      "feasibility,grid_value,converged\n",
                      0) == 0);
    REQUIRE(count_lines(prefix + ".points.csv") == 1 + 4);
    std::string fr = read_file(prefix + ".frontier.csv");
    REQUIRE(fr.rfind("kind,grid_value,seed,R,D\n", 0) == 0);

    // sweeps rerun byte-identically too
    const std::string redo = (dir / "sw_redo").string();
    REQUIRE(run_cli("rerun --manifest " + prefix + ".manifest.json --out-prefix " + redo) ==
            0);
    REQUIRE(read_file(prefix + ".points.csv") == read_file(redo + ".points.csv"));
    REQUIRE(read_file(prefix + ".frontier.csv") == read_file(redo + ".frontier.csv"));
  }

  SECTION("seed defaults to RD_LENS_SEED") {
    REQUIRE(run_cli("calibrate --target-mi 0.5 --out " + tp_path) == 0);
    const std::string a = (dir / "env_a").string();
    const std::string b = (dir / "env_b").string();
    const std::string c = (dir / "env_c").string();
    setenv("RD_LENS_SEED", "17", 1);
    REQUIRE(run_cli("train --process " + tp_path + " --out-prefix " + a + kShortTrain) ==
            0);
    unsetenv("RD_LENS_SEED");
    REQUIRE(run_cli("train --process " + tp_path + " --out-prefix " + b + " --seed 17" +
                    kShortTrain) == 0);
    REQUIRE(run_cli("train --process " + tp_path + " --out-prefix " + c + " --seed 18" +
                    kShortTrain) == 0);
    REQUIRE(read_file(a + ".checkpoint.json") == read_file(b + ".checkpoint.json"));
    REQUIRE(read_file(a + ".checkpoint.json") != read_file(c + ".checkpoint.json"));
  }

  fs::remove_all(dir);
}
