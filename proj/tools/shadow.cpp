// shadow: run a scene through the pipeline, or browse the bundled catalog.
//
//   shadow run scenes/cp1_k3_symmetric.json --out out/theta
//   shadow catalog list
//   shadow catalog describe cp2_cubic_fermat

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "shadow/report.hpp"

namespace fs = std::filesystem;
using namespace shadow;

namespace {

fs::path scenes_dir() {
  if (const char* env = std::getenv("SHADOW_SCENES_DIR")) return env;
  return SHADOW_SCENES_DIR;
}

std::vector<fs::path> scene_files() {
  std::vector<fs::path> files;
  if (!fs::is_directory(scenes_dir())) return files;
  for (const auto& e : fs::directory_iterator(scenes_dir()))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

std::string verdict_text(const Expectation& e) {
  if (!e.nonempty) return "unspecified";
  std::string s = *e.nonempty ? "non-empty" : "empty";
  if (e.components) s += ", components " + std::to_string(*e.components);
  return s;
}

std::string list_text(const std::vector<int>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s + "]";
}

int cmd_run(const std::string& path, const std::string& out_dir, const RunOptions& opt, bool quiet) {
  Scene scene;
  try {
    scene = load_scene(path);
  } catch (const InvalidInput& e) {
    std::cerr << "scene error: " << e.what() << "\n";
    return 1;
  }
  const RunResult r = run_scene(scene, opt);
  fs::create_directories(out_dir);
  const json rep = make_report(r);
  write_file(fs::path(out_dir) / "report.json", rep.dump(2) + "\n");
  if (r.fates) write_file(fs::path(out_dir) / "fates.json", fates_json(r).dump(1) + "\n");
  if (scene.variety.dim() == 1) write_file(fs::path(out_dir) / "skeleton.svg", render_svg(r));

  if (!quiet) {
    std::cout << scene.name << " (" << scene.variety.name() << ")\n";
    if (r.critical) {
      const auto c = r.critical->counts_by_index(scene.variety.dim());
      std::cout << "  critical points by index:";
      for (int x : c) std::cout << " " << x;
      std::cout << "; Bott circles: " << r.critical->bott_circles.size();
      if (r.critical->degenerate_unresolved()) std::cout << "; degenerate components unresolved";
      std::cout << "\n";
    }
    if (r.skeleton)
      std::cout << "  skeleton: V=" << r.skeleton->vertices.size() << " E=" << r.skeleton->edges.size()
                << " Bott=" << r.skeleton->bott_cycles.size() << " shape=" << skeleton_shape(*r.skeleton) << "\n";
    if (r.bs) std::cout << "  Bohr-Sommerfeld: " << (r.bs->pass() ? "pass" : "FAIL") << "\n";
    if (r.oracle_homology) std::cout << "  oracle betti: " << list_text(r.oracle_homology->betti) << "\n";
    if (r.verdict)
      std::cout << "  verdict: " << (r.verdict->nonempty ? "non-empty" : "empty") << ", components "
                << r.verdict->components << " (" << to_string(r.verdict->source) << ")\n";
    for (const auto& e : r.errors) std::cout << "  error in " << e.stage << ": " << e.type << ": " << e.message << "\n";
    if (!r.expectation_met())
      for (const auto& m : r.expectation_mismatches) std::cout << "  expectation mismatch: " << m << "\n";
    std::cout << "  wrote " << out_dir << "\n";
  }
  return r.exit_code();
}

int cmd_list() {
  const auto files = scene_files();
  for (const auto& f : files) {
    try {
      const Scene s = load_scene(f.string());
      std::cout << s.name << "  " << s.variety.name() << "  expected: " << verdict_text(s.expected) << "\n";
    } catch (const Error& e) {
      std::cout << f.stem().string() << "  (invalid: " << e.what() << ")\n";
    }
  }
  std::cout << files.size() << " scenes in " << scenes_dir().string() << "\n";
  return 0;
}

int cmd_describe(const std::string& name) {
  const fs::path p = scenes_dir() / (name + ".json");
  if (!fs::exists(p)) {
    std::cerr << "unknown scene '" << name << "'; try 'catalog list'\n";
    return 1;
  }
  const Scene s = load_scene(p.string());
  std::cout << "name: " << s.name << "\n";
  if (!s.description.empty()) std::cout << "description: " << s.description << "\n";
  std::cout << "variety: " << s.variety.name() << " (n = " << s.variety.dim() << ")\n";
  std::cout << "expected verdict: " << verdict_text(s.expected) << "\n";
  if (s.expected.euler) std::cout << "expected skeleton chi = " << *s.expected.euler << "\n";
  if (!s.expected.betti.empty()) {
    std::cout << "expected betti: " << list_text(s.expected.betti);
    for (std::size_t k = 1; k < s.expected.betti.size(); ++k) std::cout << ", b" << k << " = " << s.expected.betti[k];
    std::cout << "\n";
  }
  try {
    const DivisorDescriptor d = analyze_divisor(s.section(), s.declared_type);
    const HomologyResult h = oracle_complement(d);
    std::cout << "divisor: " << to_string(d.type) << (d.verified ? "" : " (declared)") << "\n";
    std::cout << "oracle betti: " << list_text(h.betti) << "; b" << s.variety.dim() << " = "
              << h.rank(s.variety.dim()) << "; chi(X\\D) = " << h.euler() << "\n";
  } catch (const Error& e) {
    std::cout << "oracle: unavailable (" << e.what() << ")\n";
  }
  std::cout << "numeric mode = " << (s.variety.dim() == 1 ? "graph" : "critical-points-only") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lagrangian shadows of ample divisors via gradient flow"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a scene and write report.json, fates.json, skeleton.svg");
  std::string scene_path, out_dir = "shadow_out";
  RunOptions opt;
  std::uint64_t seed = 0;
  int grid = 0, starts = 0, faces = 0;
  bool quiet = false;
  run->add_option("scene", scene_path, "Scene JSON file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  auto* seed_opt = run->add_option("--seed", seed, "Random seed (overrides the scene)");
  auto* grid_opt = run->add_option("--grid", grid, "Fate grid resolution, 0 to skip")->check(CLI::NonNegativeNumber);
  auto* starts_opt =
      run->add_option("--starts", starts, "Newton starts per chart, 0 for the default")->check(CLI::NonNegativeNumber);
  auto* faces_opt = run->add_option("--faces", faces, "Face sampling cells per side")->check(CLI::PositiveNumber);
  run->add_flag("-q,--quiet", quiet, "Print nothing on success");

  auto* catalog = app.add_subcommand("catalog", "Bundled scenes");
  catalog->require_subcommand(1);
  catalog->add_subcommand("list", "List bundled scenes with expected verdicts");
  auto* describe = catalog->add_subcommand("describe", "Show one bundled scene");
  std::string name;
  describe->add_option("name", name, "Scene name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (*seed_opt) opt.seed = seed;
      if (*grid_opt) opt.grid = grid;
      if (*starts_opt) opt.starts_per_chart = starts;
      if (*faces_opt) opt.face_cells = faces;
      return cmd_run(scene_path, out_dir, opt, quiet);
    }
    if (catalog->got_subcommand("list")) return cmd_list();
    return cmd_describe(name);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
