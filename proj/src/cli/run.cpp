#include <CLI11.hpp>

#include <optional>
#include <ostream>

#include "holo/cli/cli.hpp"
#include "holo/core/io.hpp"

namespace holo::cli {

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lensfree in-line holography toolkit"};
  app.fallthrough();
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  int threads = 1;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--seed", seed, "Random seed (overrides the config)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--threads", threads, "Worker threads for per-sample work")->check(CLI::PositiveNumber);
  app.add_option("--set", overrides, "Override a config key: --set key=value (repeatable)");

  const std::map<std::string, std::string> help = {
      {"simulate", "Write a synthetic dataset (ground truths, hologram stacks, manifests)"},
      {"reconstruct", "Reconstruct every sample (mhpr, zero-phase, rh-m, rh-md) and score it"},
      {"autofocus", "Estimate the sample-to-sensor distance of each sample"},
      {"superres", "Register and shift-and-add sub-pixel shifted frames"},
      {"train", "Train the toy recurrent generator on a dataset"},
      {"infer", "Apply a trained checkpoint to a dataset"},
      {"sweep-defocus", "RMSE over a grid of hologram defocus pairs"},
      {"metrics", "Compare reconstructed fields against references"},
  };
  for (const auto& name : command_names()) app.add_subcommand(name, help.at(name));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
    for (const auto& s : overrides) cfg.set_assignment(s);
    if (seed) cfg.set("seed", std::to_string(*seed));
    cfg.u64("seed");
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    write_text_atomic(dir / ("run_" + command + ".cfg"), cfg.to_text());
    run_command(command, cfg, dir, threads);
    out << command << ": done, outputs in " << dir.string() << "\n";
    return kOk;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const FormatError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace holo::cli
