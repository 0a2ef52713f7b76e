// Golden-fixture manager. `regen` runs a pinned set of CLI commands into a
// scratch directory and records content digests plus 10-row CSV heads under
// the fixture directory; `check` re-runs the same commands and fails on any
// digest drift. Both are one command, so every fixture is regenerable.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dif/fnv.hpp"

namespace fs = std::filesystem;

namespace {

struct Fixture {
  std::string name;
  std::string args;  // CLI arguments after the binary, with {out} placeholder
  std::vector<std::string> files;  // outputs relative to {out}
};

std::vector<Fixture> fixture_set() {
  return {
      {"illustrate-small",
       "illustrate --out {out} --set grid_points=401",
       {"grid.csv", "iterates.csv"}},
      {"example1d-small",
       "example1d --out {out} --set grid_points=101",
       {"landscape.csv", "iterates_iekf.csv", "iterates_diekf.csv",
        "iterates_lsdiekf.csv"}},
      {"track-sweep-tiny",
       "track-sweep --out {out} --seed 7 --mc-runs 3 --variants EKF,DIEKF "
       "--set q1_values=1e-3,1e-1 --set sigma_sq_values=1,1e2",
       {"track_sweep.csv", "track_sweep.json", "track_sweep_summary.md"}},
      {"tdoa-sweep-tiny",
       "tdoa-sweep --out {out} --seed 7 --mc-runs 2 --variants EKF,DIEKF "
       "--set q1_values=1e-4,1e-2 --set q2_values=1e-3 --set steps=40",
       {"tdoa_sweep.csv", "tdoa_sweep.json", "tdoa_sweep_summary.md"}},
  };
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read " + path.string());
  }
  std::ostringstream oss;
  oss << in.rdbuf();
  return oss.str();
}

std::string head_lines(const std::string& content, int count) {
  std::istringstream in(content);
  std::ostringstream out;
  std::string line;
  for (int i = 0; i < count && std::getline(in, line); ++i) {
    out << line << '\n';
  }
  return out.str();
}

std::string replace_out(const std::string& args, const std::string& out) {
  std::string s = args;
  const auto pos = s.find("{out}");
  if (pos != std::string::npos) {
    s.replace(pos, 5, out);
  }
  return s;
}

void run_fixture(const std::string& bin, const Fixture& fx,
                 const fs::path& work) {
  const std::string cmd =
      bin + " " + replace_out(fx.args, (work / fx.name).string()) +
      " > /dev/null";
  if (std::system(cmd.c_str()) != 0) {
    throw std::runtime_error("fixture command failed: " + cmd);
  }
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "0x%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

int regen(const std::string& bin, const fs::path& dir, const fs::path& work) {
  fs::create_directories(dir / "heads");
  fs::create_directories(work);
  nlohmann::ordered_json manifest;
  manifest["fixtures"] = nlohmann::ordered_json::array();
  for (const Fixture& fx : fixture_set()) {
    run_fixture(bin, fx, work);
    nlohmann::ordered_json entry;
    entry["name"] = fx.name;
    entry["command"] = "dif_cli " + fx.args;
    entry["files"] = nlohmann::ordered_json::array();
    for (const std::string& file : fx.files) {
      const std::string content = read_file(work / fx.name / file);
      nlohmann::ordered_json f;
      f["path"] = file;
      f["fnv64"] = hex64(dif::fnv1a64(content));
      entry["files"].push_back(std::move(f));
      std::ofstream head(dir / "heads" / (fx.name + "__" + file + ".head"));
      head << head_lines(content, 10);
    }
    manifest["fixtures"].push_back(std::move(entry));
  }
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << "\n";
  std::cout << "wrote " << (dir / "manifest.json").string() << "\n";
  return 0;
}

int check(const std::string& bin, const fs::path& dir, const fs::path& work) {
  const nlohmann::json manifest =
      nlohmann::json::parse(read_file(dir / "manifest.json"));
  fs::create_directories(work);
  int mismatches = 0;
  auto fixtures = fixture_set();
  for (const auto& entry : manifest.at("fixtures")) {
    const std::string name = entry.at("name").get<std::string>();
    const auto it =
        std::find_if(fixtures.begin(), fixtures.end(),
                     [&](const Fixture& f) { return f.name == name; });
    if (it == fixtures.end()) {
      std::cout << "UNKNOWN  " << name << " (not in the pinned set)\n";
      ++mismatches;
      continue;
    }
    run_fixture(bin, *it, work);
    for (const auto& f : entry.at("files")) {
      const std::string file = f.at("path").get<std::string>();
      const std::string expected = f.at("fnv64").get<std::string>();
      const std::string actual =
          hex64(dif::fnv1a64(read_file(work / name / file)));
      if (actual != expected) {
        std::cout << "MISMATCH " << name << "/" << file << " expected "
                  << expected << " got " << actual << "\n";
        ++mismatches;
      } else {
        std::cout << "OK       " << name << "/" << file << "\n";
      }
    }
  }
  if (mismatches > 0) {
    std::cout << mismatches << " fixture file(s) drifted\n";
    return 1;
  }
  std::cout << "all fixtures match\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"golden-fixture regen/check"};
  app.require_subcommand(1);
  std::string bin = "./dif_cli";
  std::string dir = "docs/fixtures";
  std::string work;
  app.add_option("--bin", bin, "path to the dif_cli binary")->required();
  app.add_option("--dir", dir, "fixture directory (manifest + heads)");
  app.add_option("--work", work, "scratch directory for command outputs");
  CLI::App* regen_cmd = app.add_subcommand("regen", "rebuild manifest and heads");
  CLI::App* check_cmd = app.add_subcommand("check", "verify digests match");
  CLI11_PARSE(app, argc, argv);

  try {
    const fs::path workdir =
        work.empty() ? fs::temp_directory_path() / "dif_fixture_work" : fs::path(work);
    fs::remove_all(workdir);
    if (regen_cmd->parsed()) {
      return regen(bin, dir, workdir);
    }
    if (check_cmd->parsed()) {
      return check(bin, dir, workdir);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
