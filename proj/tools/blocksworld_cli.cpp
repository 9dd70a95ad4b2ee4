// blocksworld: generate, inspect and validate self-occlusion datasets.
//
// Exit codes: 0 ok, 1 failure (validation violations, IO or generation
// errors), 2 usage error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "blocksworld/dataset.hpp"

namespace bw = blocksworld;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

void add_seed(CLI::App* cmd, std::uint64_t& seed) {
  cmd->add_option("--seed", seed, "Generator seed")->capture_default_str();
}

int run_generate(const bw::DatasetConfig& config) {
  const auto report = bw::cmd_generate(config);
  std::cout << "wrote " << report.objects << " objects, " << report.rows << " rows to " << config.out.string() << "\n";
  return kExitOk;
}

int run_stats(const std::string& dir, const std::string& out) {
  const auto report = bw::cmd_stats(dir, out.empty() ? std::nullopt : std::optional<std::filesystem::path>(out));
  const auto& s = report.summary.overall;
  std::cout << "rows " << s.count << "  mean " << bw::format_double(s.mean()) << "  min " << bw::format_double(s.min)
            << "  max " << bw::format_double(s.max) << "\n";
  for (const auto& f : report.files) std::cout << "wrote " << f.string() << "\n";
  return kExitOk;
}

int run_validate(const std::string& dir) {
  const auto violations = bw::cmd_validate(dir);
  for (const auto& v : violations) std::cout << v << "\n";
  if (!violations.empty()) {
    std::cout << violations.size() << " violation(s)\n";
    return kExitFailure;
  }
  std::cout << "ok\n";
  return kExitOk;
}

int run_so(const std::string& mesh_path, const std::vector<double>& camera, double max_edge) {
  if (camera.size() != 3) throw UsageError("--camera takes three numbers");
  const bw::TriMesh mesh = bw::read_stl(mesh_path);
  const double so = bw::self_occlusion(mesh, bw::look_at({camera[0], camera[1], camera[2]}), max_edge);
  std::cout << bw::format_double(so) << "\n";
  return kExitOk;
}

int run_views(int views, double radius, const std::string& out) {
  const std::string text = bw::viewpoints_to_json(bw::fibonacci_lattice(views, radius)).dump(2) + "\n";
  if (out.empty() || out == "-")
    std::cout << text;
  else
    bw::write_text(out, text);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block-world objects, view-sphere renders and self-occlusion annotations"};
  app.set_version_flag("--version", std::string(bw::kToolVersion));
  app.require_subcommand(1);

  bw::DatasetConfig config;
  std::string family = "both";
  std::string config_file;
  std::string out = "dataset";
  auto* generate = app.add_subcommand("generate", "Generate a dataset directory");
  add_seed(generate, config.seed);
  generate->add_option("--family", family, "L1, L2 or both")->capture_default_str();
  generate->add_option("--views", config.views, "Views per object")->capture_default_str()->check(CLI::PositiveNumber);
  generate->add_option("--radius-factor", config.radius_factor, "Camera distance / bounding radius")
      ->capture_default_str();
  generate->add_option("--max-edge", config.max_edge, "Subdivision edge limit (mm)")->capture_default_str();
  generate->add_option("--resolution", config.resolution, "Mask width and height (pixels)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  generate->add_option("--workers", config.workers, "Worker threads")->capture_default_str();
  generate->add_option("--config", config_file, "Flat JSON config; flags given on the command line win");
  generate->add_option("--out", out, "Output directory")->capture_default_str();

  std::string stats_dir, stats_out;
  auto* stats = app.add_subcommand("stats", "Write SO summary tables for a dataset");
  stats->add_option("dataset", stats_dir, "Dataset directory")->required();
  stats->add_option("--out", stats_out, "Directory for the CSV tables (default <dataset>/stats)");

  std::string validate_dir;
  auto* validate = app.add_subcommand("validate", "Check a dataset directory");
  validate->add_option("dataset", validate_dir, "Dataset directory")->required();

  std::string mesh_path;
  std::vector<double> camera;
  double so_edge = bw::kDatasetMaxEdge;
  auto* so = app.add_subcommand("so", "Self-occlusion of one mesh from one camera position");
  so->add_option("--mesh", mesh_path, "Binary STL")->required();
  so->add_option("--camera", camera, "Camera position x y z (looks at the origin)")->required()->expected(3);
  so->add_option("--max-edge", so_edge, "Subdivision edge limit (mm)")->capture_default_str();

  int view_count = bw::kDefaultViewCount;
  double view_radius = 1.0;
  std::string views_out;
  auto* views = app.add_subcommand("views", "Dump the view-sphere lattice as JSON");
  views->add_option("--views", view_count, "Number of views")->capture_default_str()->check(CLI::PositiveNumber);
  views->add_option("--radius", view_radius, "Sphere radius")->capture_default_str();
  views->add_option("--out", views_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*generate) {
      if (!config_file.empty()) {
        // Command-line flags override the file.
        bw::DatasetConfig from_file = bw::config_from_json(nlohmann::json::parse(bw::read_text(config_file)));
        auto given = [&](const char* flag) { return generate->count(flag) > 0; };
        if (!given("--seed")) config.seed = from_file.seed;
        if (!given("--family")) family = bw::to_string(from_file.family);
        if (!given("--views")) config.views = from_file.views;
        if (!given("--radius-factor")) config.radius_factor = from_file.radius_factor;
        if (!given("--max-edge")) config.max_edge = from_file.max_edge;
        if (!given("--resolution")) config.resolution = from_file.resolution;
        if (!given("--workers")) config.workers = from_file.workers;
        if (!given("--out")) out = from_file.out.string();
      }
      try {
        config.family = bw::parse_family(family);
        config.out = out;
        config.check();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      return run_generate(config);
    }
    if (*stats) return run_stats(stats_dir, stats_out);
    if (*validate) return run_validate(validate_dir);
    if (*so) return run_so(mesh_path, camera, so_edge);
    if (*views) return run_views(view_count, view_radius, views_out);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
