#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "lobster/cli/commands.hpp"
#include "lobster/cli/config.hpp"
#include "lobster/common/error.hpp"
#include "lobster/common/io.hpp"

using namespace lobster;
using namespace lobster::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kFixtures = fs::path(LOBSTER_SOURCE_DIR) / "fixtures";

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("lobster_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Every object-key path in `node`, as a list of keys.
void key_paths(const json& node, std::vector<std::string> prefix, std::vector<std::vector<std::string>>& out) {
  if (!node.is_object()) return;
  for (const auto& [k, v] : node.items()) {
    auto p = prefix;
    p.push_back(k);
    out.push_back(p);
    key_paths(v, p, out);
  }
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("default config parses and echoes") {
  const auto cfg = parse_config(json::object());
  CHECK(cfg.mfcc_dims == std::vector<int>{40, 50, 60});
  CHECK(cfg.tasks.size() == 2);
  CHECK(run_id(cfg) == run_id(parse_config(to_json(cfg))));
  CHECK(run_id(cfg).size() == 16);
  json changed{{"seed", 7}};
  CHECK(run_id(cfg) != run_id(parse_config(changed)));
}

TEST_CASE("every misspelled known key is rejected by name") {
  const json defaults = default_config_json();
  std::vector<std::vector<std::string>> paths;
  key_paths(defaults, {}, paths);
  int mutated = 0;
  for (const auto& path : paths) {
    if (path.size() > 2) continue;  // nested grids are model-specific
    json overrides = json::object();
    json* cursor = &overrides;
    const json* source = &defaults;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      source = &source->at(path[i]);
      (*cursor)[path[i]] = *source;
      cursor = &(*cursor)[path[i]];
    }
    const std::string bad = path.back() + "_typo";
    (*cursor)[bad] = source->at(path.back());
    CAPTURE(bad);
    try {
      parse_config(overrides);
      FAIL("accepted " << bad);
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find(bad) != std::string::npos);
    }
    ++mutated;
  }
  CHECK(mutated > 20);
}

TEST_CASE("invalid values are validation errors") {
  CHECK_THROWS_AS(parse_config(json{{"mfcc_dims", {1}}}), ValidationError);
  CHECK_THROWS_AS(parse_config(json{{"tasks", {"color"}}}), ValidationError);
  CHECK_THROWS_AS(parse_config(json{{"positive_class", {{"age", "elder"}}}}), ValidationError);
}

TEST_CASE("shipped fixtures reproduce every rank table") {
  const auto r = reproduce_ranks(kFixtures);
  CHECK(r.tables.size() == 4);
  CHECK(r.mismatches.empty());
  const auto& ml = r.computed.at("ml_avj");
  CHECK(ml.size() == 6);
}

TEST_CASE("a perturbed metric cell is reported with coordinates") {
  const auto dir = scratch("perturb");
  for (const auto& e : fs::directory_iterator(kFixtures)) fs::copy(e.path(), dir / e.path().filename());
  auto text = read_text(dir / "ml_avj_metrics.csv");
  // Drop MLP's selected-row accuracy to last place.
  const auto sel = read_text(dir / "ml_avj_selection.csv");
  const auto lines = nonblank_lines(text);
  std::string out;
  for (const auto& line : lines) {
    auto f = split_csv_line(line);
    if (f[0] == "MLP" && sel.find("MLP," + f[1]) != std::string::npos) {
      f[2] = "50.00";
      std::string joined;
      for (std::size_t i = 0; i < f.size(); ++i) joined += (i ? "," : "") + f[i];
      out += joined + "\n";
    } else {
      out += line + "\n";
    }
  }
  atomic_write(dir / "ml_avj_metrics.csv", out);
  const auto r = reproduce_ranks(dir);
  REQUIRE_FALSE(r.mismatches.empty());
  CHECK(r.mismatches[0].find("ml_avj") != std::string::npos);
  CHECK(r.mismatches[0].find("MLP") != std::string::npos);
  CHECK(r.mismatches[0].find("Acc") != std::string::npos);
}

TEST_CASE("empty or missing fixtures are data errors") {
  const auto dir = scratch("empty");
  for (const auto& e : fs::directory_iterator(kFixtures)) fs::copy(e.path(), dir / e.path().filename());
  atomic_write(dir / "dl_mf_metrics.csv", std::string());
  CHECK_THROWS_AS(reproduce_ranks(dir), DataError);
  fs::remove(dir / "dl_mf_metrics.csv");
  CHECK_THROWS_AS(reproduce_ranks(dir), DataError);
}

TEST_CASE("synth writes one file per individual, deterministically") {
  const auto a = scratch("synth_a"), b = scratch("synth_b");
  json cfg{{"dataset", {{"synthetic", {{"n_per_class", 12}}}}}, {"out", a.string()}};
  Logger quiet(false);
  cmd_synth(parse_config(cfg), quiet);
  cfg["out"] = b.string();
  cmd_synth(parse_config(cfg), quiet);
  const auto manifest = read_text(a / "dataset" / "manifest.csv");
  CHECK(nonblank_lines(manifest).size() == 1 + 24);
  std::size_t wavs = 0;
  for (const auto& e : fs::directory_iterator(a / "dataset" / "wav")) {
    ++wavs;
    CHECK(read_bytes(e.path()) == read_bytes(b / "dataset" / "wav" / e.path().filename()));
  }
  CHECK(wavs == 24);
  CHECK(manifest == read_text(b / "dataset" / "manifest.csv"));
}

TEST_CASE("select_rows picks listed model rows") {
  std::vector<eval::MetricRow> rows(3);
  rows[0].model = "A";
  rows[0].mfcc = 40;
  rows[1].model = "A";
  rows[1].mfcc = 50;
  rows[2].model = "B";
  rows[2].mfcc = 40;
  const auto picked = select_rows(rows, "model,mfcc\nA,50\nB,40\n");
  REQUIRE(picked.size() == 2);
  CHECK(picked[0].mfcc == 50);
}

}
