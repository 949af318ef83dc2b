#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <sstream>

#include "holo/autofocus.hpp"
#include "holo/cli/cli.hpp"
#include "holo/core/htf.hpp"
#include "holo/core/io.hpp"
#include "holo/core/pgm.hpp"
#include "holo/metrics.hpp"
#include "holo/mhpr.hpp"
#include "holo/nn/train.hpp"
#include "holo/simulate.hpp"
#include "holo/superres.hpp"

namespace holo::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSamplesIndex = "samples.tsv";
constexpr const char* kTruthFile = "truth.htf";

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string sample_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sample_%03zu", i);
  return buf;
}

std::string config_file(const std::string& command) { return "run_" + command + ".cfg"; }

fs::path require_path(const RunConfig& c, const std::string& key) {
  const std::string& v = c.get(key);
  if (v.empty()) throw ConfigError("config key '" + key + "' is required for this command");
  return v;
}

int positive(const RunConfig& c, const std::string& key) {
  const int v = c.integer(key);
  if (v < 1) throw ConfigError("config key '" + key + "' must be >= 1");
  return v;
}

int non_negative(const RunConfig& c, const std::string& key) {
  const int v = c.integer(key);
  if (v < 0) throw ConfigError("config key '" + key + "' must be >= 0");
  return v;
}

template <class F>
auto as_config_error(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

SampleSpec sample_spec(const RunConfig& c) {
  SampleSpec s;
  s.kind = as_config_error("sample_kind", [&] { return parse_sample_kind(c.get("sample_kind")); });
  s.num_disks = c.integer("num_disks");
  s.disk_radius_min_px = c.number("disk_radius_min_px");
  s.disk_radius_max_px = c.number("disk_radius_max_px");
  s.disk_phase_min = c.number("disk_phase_min");
  s.disk_phase_max = c.number("disk_phase_max");
  s.bar_count = c.integer("bar_count");
  s.bar_width_px = c.number("bar_width_px");
  s.bar_amplitude = c.number("bar_amplitude");
  s.phase_std = c.number("phase_std");
  s.correlation_px = c.number("correlation_px");
  s.amplitude_depth = c.number("amplitude_depth");
  s.separation_px = c.number("separation_px");
  s.point_px = c.integer("point_px");
  s.point_amplitude = c.number("point_amplitude");
  return s;
}

NoiseSpec noise_spec(const RunConfig& c) {
  NoiseSpec n;
  n.gaussian_sigma = c.number("noise_sigma");
  n.quantization_bits = c.integer("quantization_bits");
  as_config_error("noise", [&] { n.validate(); return 0; });
  return n;
}

FocusSearch focus_search(const RunConfig& c) {
  FocusSearch f;
  f.z_min_um = c.number("focus_z_min_um");
  f.z_max_um = c.number("focus_z_max_um");
  f.coarse_step_um = c.number("focus_step_um");
  f.refine_tol_um = c.number("focus_tol_um");
  as_config_error("focus search", [&] { f.validate(); return 0; });
  return f;
}

MsssimParams msssim_params(const RunConfig& c) {
  MsssimParams p;
  p.scales = positive(c, "msssim_scales");
  if (!c.get("msssim_range").empty()) p.dynamic_range = c.number("msssim_range");
  return p;
}

// ---------------------------------------------------------------- datasets

struct DatasetSample {
  std::string name;
  ComplexField truth;
  HologramStack stack;
};

std::vector<std::string> dataset_names(const fs::path& dir) {
  std::istringstream in(read_text(dir / kSamplesIndex));
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) names.push_back(line);
  if (names.empty()) throw IoError("dataset " + dir.string() + " lists no samples");
  return names;
}

DatasetSample load_sample(const fs::path& dir, const std::string& name, double pitch_um) {
  DatasetSample s;
  s.name = name;
  s.stack = read_stack(dir / name);
  s.truth = field_from_tensor(read_tensor(dir / name / kTruthFile), pitch_um);
  return s;
}

RunConfig dataset_config(const fs::path& dir) { return RunConfig::load(dir / config_file("simulate")); }

// Reconstructions only make sense with the optics the data was simulated with.
void check_dataset_optics(const fs::path& dir, const RunConfig& c) {
  const RunConfig d = dataset_config(dir);
  for (const char* key : {"wavelength_um", "medium_index", "sr_pitch_um", "sensor_pitch_um"})
    if (d.number(key) != c.number(key))
      throw ConfigError(std::string("optics key '") + key + "' differs from the dataset (" +
                        d.get(key) + ")");
}

void write_previews(const fs::path& base, const ComplexField& field) {
  const RealImage amp = field.amplitude();
  write_pgm(fs::path(base).concat("_amp.pgm"), amp, 0.0, std::max(1.0, amp.max()));
  write_pgm(fs::path(base).concat("_phase.pgm"), field.phase(), -std::numbers::pi, std::numbers::pi);
}

// ---------------------------------------------------------------- networks

struct Model {
  std::string mode;
  nn::GeneratorConfig gen;
  nn::ParamStore params;
  double z_bar_um = 450.0;
};

Model load_model(const fs::path& dir) {
  std::map<std::string, std::string> header;
  Model m;
  m.params = nn::load_checkpoint(dir, &header);
  auto field = [&](const char* key) -> const std::string& {
    auto it = header.find(key);
    if (it == header.end()) throw IoError("checkpoint header lacks '" + std::string(key) + "'");
    return it->second;
  };
  try {
    m.mode = field("mode");
    m.gen.base = std::stoi(field("gen_base"));
    m.gen.scales = std::stoi(field("gen_scales"));
    m.gen.dilation = std::stoi(field("gen_dilation"));
    m.gen.m_train = std::stoi(field("m_train"));
    m.z_bar_um = std::stod(field("z_bar_um"));
  } catch (const std::logic_error&) {
    throw IoError("malformed checkpoint header in " + dir.string());
  }
  return m;
}

ComplexField infer(const Model& m, const std::vector<RealImage>& holograms, const OpticalConfig& optics) {
  std::vector<RealImage> seq(holograms.begin(),
                             holograms.begin() + std::min<std::size_t>(holograms.size(), m.gen.m_train));
  return m.mode == "rh-md" ? nn::infer_rh_md(m.gen, m.params, seq, optics)
                           : nn::infer_rh_m(m.gen, m.params, seq, m.z_bar_um, optics);
}

Model model_for(const RunConfig& c) {
  Model m = load_model(require_path(c, "checkpoint"));
  if (m.mode != "rh-m" && m.mode != "rh-md") throw IoError("checkpoint has unknown mode " + m.mode);
  return m;
}

std::vector<RealImage> intensities(const HologramStack& stack) {
  std::vector<RealImage> out;
  for (const auto& h : stack.holograms) out.push_back(h.intensity);
  return out;
}

// ---------------------------------------------------------------- commands

void cmd_simulate(const RunConfig& c, const fs::path& out, int threads) {
  const OpticalConfig optics = c.optics();
  const int n = positive(c, "samples"), size = positive(c, "size");
  const SampleSpec spec = sample_spec(c);
  const NoiseSpec noise = noise_spec(c);
  const std::string capture_mode = c.get("capture"), z2_mode = c.get("z2_mode");
  if (capture_mode != "multiheight" && capture_mode != "sr_grid")
    throw ConfigError("capture must be multiheight or sr_grid");
  if (z2_mode != "random" && z2_mode != "linear") throw ConfigError("z2_mode must be random or linear");
  const bool linear = z2_mode == "linear";
  const int heights = positive(c, "heights");
  const double z_min = c.number("z2_min_um"), z_max = c.number("z2_max_um"), step = c.number("z2_step_um");
  if (!(z_min > 0) || (!linear && !(z_max >= z_min)) || (linear && !(step > 0)))
    throw ConfigError("invalid distance range");
  const int factor = c.integer("sr_factor") > 0 ? c.integer("sr_factor") : optics.sr_factor();
  const double jitter = c.number("sr_jitter_um");
  const std::uint64_t seed = c.u64("seed");

  fs::create_directories(out);
  std::string index;
  for (int i = 0; i < n; ++i) index += sample_name(i) + "\n";

  parallel_for(n, threads, [&](std::size_t i) {
    Rng rng = Rng(seed).split(i);
    const SampleObject obj = synth_sample(spec, size, optics, rng);
    HologramStack stack;
    if (capture_mode == "multiheight") {
      CaptureGeometry geo;
      for (int k = 0; k < heights; ++k)
        geo.z2_list_um.push_back(linear ? z_min + k * step : rng.uniform(z_min, z_max));
      stack = capture_multiheight(obj, geo, optics, noise, rng);
    } else {
      const double z = linear ? z_min : rng.uniform(z_min, z_max);
      for (auto& f : capture_sr_grid(obj, z, optics, factor, noise, rng, jitter))
        stack.holograms.push_back({std::move(f.image), z, f.dx_um, f.dy_um});
    }
    const fs::path dir = out / sample_name(i);
    fs::create_directories(dir);
    write_stack(dir, stack, noise, seed);
    write_tensor(dir / kTruthFile, to_tensor(obj.transmittance));
  });
  write_text_atomic(out / kSamplesIndex, index);
}

Traversal traversal(const RunConfig& c) {
  const std::string& t = c.get("mhpr_traversal");
  if (t == "ascending") return Traversal::Ascending;
  if (t == "pingpong") return Traversal::PingPong;
  if (t == "as_given") return Traversal::AsGiven;
  throw ConfigError("mhpr_traversal must be ascending, pingpong or as_given");
}

void cmd_reconstruct(const RunConfig& c, const fs::path& out, int threads, bool with_metrics) {
  const OpticalConfig optics = c.optics();
  const fs::path dataset = require_path(c, "dataset");
  std::string method = c.get("method");
  std::optional<Model> model;
  if (!with_metrics) {  // infer: the checkpoint decides
    model = model_for(c);
    method = model->mode;
  } else if (method == "rh-m" || method == "rh-md") {
    model = model_for(c);
    if (model->mode != method)
      throw ConfigError("method " + method + " but the checkpoint holds a " + model->mode + " model");
  } else if (method != "mhpr" && method != "zero-phase") {
    throw ConfigError("unknown method '" + method + "' (mhpr, zero-phase, rh-m, rh-md)");
  }
  check_dataset_optics(dataset, c);
  MhprOptions mo;
  mo.max_iters = positive(c, "mhpr_max_iters");
  mo.min_iters = non_negative(c, "mhpr_min_iters");
  mo.rel_tol = c.number("mhpr_rel_tol");
  mo.traversal = traversal(c);
  mo.focus = focus_search(c);
  as_config_error("mhpr options", [&] { mo.validate(); return 0; });
  const int used = non_negative(c, "holograms_used");
  const bool known = c.flag("use_known_heights");

  const auto names = dataset_names(dataset);
  const fs::path dir = out / (with_metrics ? "recon" : "infer");
  fs::create_directories(dir);
  std::vector<FieldComparison> rows(names.size());
  std::vector<std::string> info(names.size());

  parallel_for(names.size(), threads, [&](std::size_t i) {
    DatasetSample s = load_sample(dataset, names[i], optics.sr_pitch_um);
    if (used > 0) {
      if (static_cast<std::size_t>(used) > s.stack.size())
        throw ConfigError("holograms_used exceeds the stack size of " + names[i]);
      s.stack.holograms.resize(used);
    }
    ComplexField field;
    const fs::path file = dir / (names[i] + ".htf");
    if (method == "mhpr") {
      std::vector<double> heights = known && s.stack.heights_known
                                        ? s.stack.z2_values()
                                        : estimate_heights(s.stack, mo.focus, optics);
      std::vector<std::size_t> order(heights.size());
      for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return heights[a] < heights[b]; });
      HologramStack sorted;
      std::vector<double> sorted_h;
      for (auto k : order) {
        sorted.holograms.push_back(s.stack.holograms[k]);
        sorted_h.push_back(heights[k]);
      }
      const ReconResult r = mhpr(sorted, sorted_h, sorted_h.front(), mo, optics);
      write_recon(file, r);
      field = r.field;
      info[i] = names[i] + "," + std::to_string(r.iterations_run) + "," + (r.converged ? "1" : "0") + "," +
                fmt(r.residual_history.front()) + "," + fmt(r.residual_history.back()) + "," +
                fmt(r.z2_used_um) + "\n";
    } else {
      if (method == "zero-phase") {
        const Hologram& h = s.stack.holograms.front();
        const double z = known && s.stack.heights_known ? h.z2_um : autofocus(h.intensity, mo.focus, optics);
        field = backpropagate_zero_phase(h.intensity, z, optics);
      } else {
        field = infer(*model, intensities(s.stack), optics);
      }
      write_tensor(file, to_tensor(field));
    }
    write_previews(dir / names[i], field);
    if (with_metrics) rows[i] = compare_fields(names[i], field, s.truth);
  });

  if (with_metrics) {
    write_text_atomic(out / "metrics.csv", comparisons_csv(rows));
    if (method == "mhpr") {
      std::string csv = "name,iterations,converged,initial_residual,final_residual,z2_used_um\n";
      for (const auto& l : info) csv += l;
      write_text_atomic(out / "mhpr_runs.csv", csv);
    }
  } else {
    std::string csv = "name,file\n";
    for (const auto& n : names) csv += n + "," + (fs::path("infer") / (n + ".htf")).string() + "\n";
    write_text_atomic(out / "infer.csv", csv);
  }
}

void cmd_autofocus(const RunConfig& c, const fs::path& out, int threads) {
  const OpticalConfig optics = c.optics();
  const fs::path dataset = require_path(c, "dataset");
  check_dataset_optics(dataset, c);
  const FocusSearch search = focus_search(c);
  const int index = non_negative(c, "focus_hologram");
  const auto names = dataset_names(dataset);
  std::vector<std::string> rows(names.size());
  parallel_for(names.size(), threads, [&](std::size_t i) {
    const HologramStack stack = read_stack(dataset / names[i]);
    if (static_cast<std::size_t>(index) >= stack.size())
      throw ConfigError("focus_hologram exceeds the stack size of " + names[i]);
    const Hologram& h = stack.holograms[index];
    const FocusResult r = autofocus_scan(h.intensity, search, optics);
    rows[i] = names[i] + "," + fmt(h.z2_um) + "," + fmt(r.z_um) + "," + fmt(r.z_um - h.z2_um) + "," +
              fmt(r.score) + "," + std::to_string(r.evaluations) + "\n";
  });
  fs::create_directories(out);
  std::string csv = "name,z_true_um,z_est_um,error_um,score,evaluations\n";
  for (const auto& r : rows) csv += r;
  write_text_atomic(out / "autofocus.csv", csv);
}

void cmd_superres(const RunConfig& c, const fs::path& out, int threads) {
  const OpticalConfig optics = c.optics();
  const fs::path dataset = require_path(c, "dataset");
  check_dataset_optics(dataset, c);
  const int factor = c.integer("sr_factor") > 0 ? c.integer("sr_factor") : optics.sr_factor();
  const auto names = dataset_names(dataset);
  const fs::path dir = out / "superres";
  fs::create_directories(dir);
  std::vector<std::string> rows(names.size());
  parallel_for(names.size(), threads, [&](std::size_t i) {
    const HologramStack stack = read_stack(dataset / names[i]);
    const auto frames = intensities(stack);
    const ShiftSet shifts = estimate_shifts(frames);
    ShiftAndAddStats stats;
    const RealImage hr = shift_and_add(frames, shifts, factor, &stats);
    write_tensor(dir / (names[i] + ".htf"), to_tensor(hr));
    write_pgm(dir / (names[i] + ".pgm"), hr, hr.min(), std::max(hr.max(), hr.min() + 1e-12));
    for (std::size_t k = 0; k < shifts.size(); ++k) {
      const Hologram& h = stack.holograms[k];
      rows[i] += names[i] + "," + std::to_string(k) + "," + fmt(shifts[k].dx) + "," + fmt(shifts[k].dy) +
                 "," + fmt(h.dx_um / optics.sensor_pitch_um) + "," + fmt(h.dy_um / optics.sensor_pitch_um) +
                 "\n";
    }
  });
  std::string csv = "name,frame,dx_px,dy_px,dx_true_px,dy_true_px\n";
  for (const auto& r : rows) csv += r;
  write_text_atomic(out / "shifts.csv", csv);
}

void cmd_train(const RunConfig& c, const fs::path& out, int threads) {
  const OpticalConfig optics = c.optics();
  const fs::path dataset = require_path(c, "dataset");
  check_dataset_optics(dataset, c);
  const std::string mode = c.get("mode");
  if (mode != "rh-m" && mode != "rh-md") throw ConfigError("mode must be rh-m or rh-md");
  nn::GeneratorConfig gen;
  gen.base = c.integer("gen_base");
  gen.scales = c.integer("gen_scales");
  gen.dilation = mode == "rh-md" ? 2 : 1;
  gen.m_train = c.integer("m_train");
  as_config_error("generator", [&] { gen.validate(); return 0; });

  nn::ToyDataSpec spec;
  spec.raw_inputs = mode == "rh-md";
  spec.z_bar_um = c.number("z_bar_um");
  const auto names = dataset_names(dataset);
  std::vector<nn::TrainSample> data(names.size());
  parallel_for(names.size(), threads, [&](std::size_t i) {
    DatasetSample s = load_sample(dataset, names[i], optics.sr_pitch_um);
    data[i] = nn::to_train_sample({std::move(s.truth), std::move(s.stack)}, spec, optics);
  });

  nn::DiscriminatorConfig disc;
  disc.base = c.integer("disc_base");
  disc.blocks = c.integer("disc_blocks");
  disc.hidden = c.integer("disc_hidden");
  disc.height = data[0].target.h();
  disc.width = data[0].target.w();
  as_config_error("discriminator", [&] { disc.validate(); return 0; });

  nn::TrainOptions o;
  o.epochs = non_negative(c, "epochs");
  o.weights = {c.number("loss_alpha"), c.number("loss_beta"), c.number("loss_gamma")};
  as_config_error("loss weights", [&] { o.weights.validate(); return 0; });
  o.msssim = msssim_params(c);
  o.gen_adam.lr = c.number("lr_g");
  o.disc_adam.lr = c.number("lr_d");
  o.gen_adam.decay = o.disc_adam.decay = c.number("lr_decay");
  o.seed = c.u64("seed");

  const nn::TrainResult r = nn::train_toy(data, gen, disc, o);
  fs::create_directories(out);
  nn::save_checkpoint(out / "checkpoint", r.generator,
                      {{"mode", mode},
                       {"gen_base", std::to_string(gen.base)},
                       {"gen_scales", std::to_string(gen.scales)},
                       {"gen_dilation", std::to_string(gen.dilation)},
                       {"m_train", std::to_string(gen.m_train)},
                       {"z_bar_um", c.get("z_bar_um")},
                       {"seed", c.get("seed")}});
  write_text_atomic(out / "loss_history.csv", nn::loss_history_csv(r.history));
  write_text_atomic(out / "train_summary.csv",
                    "initial_mae,final_mae,parameters\n" + fmt(r.initial_mae) + "," +
                        fmt(nn::dataset_mae(gen, r.generator, data)) + "," +
                        std::to_string(nn::count_parameters(gen)) + "\n");
}

ComplexField read_field(const fs::path& path, double pitch_um) {
  const HtfTensor t = read_tensor(path);
  return t.dtype == DType::Complex64 ? field_from_tensor(t, pitch_um)
                                     : ComplexField::from_real(image_from_tensor(t), pitch_um);
}

void cmd_metrics(const RunConfig& c, const fs::path& out, int threads) {
  const double pitch = c.optics().sr_pitch_um;
  const fs::path est = require_path(c, "estimate"), ref = require_path(c, "reference");
  std::vector<std::pair<fs::path, fs::path>> pairs;
  std::vector<std::string> names;
  if (fs::is_directory(est)) {
    if (!fs::is_directory(ref)) throw ConfigError("estimate is a directory but reference is not");
    const bool ref_dataset = fs::exists(ref / kSamplesIndex);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(est))
      if (e.path().extension() == ".htf") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("no .htf files in " + est.string());
    for (const auto& f : files) {
      const std::string stem = f.stem().string();
      pairs.emplace_back(f, ref_dataset ? ref / stem / kTruthFile : ref / f.filename());
      names.push_back(stem);
    }
  } else {
    pairs.emplace_back(est, ref);
    names.push_back(est.stem().string());
  }
  std::vector<FieldComparison> rows(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t i) {
    rows[i] = compare_fields(names[i], read_field(pairs[i].first, pitch), read_field(pairs[i].second, pitch));
  });
  fs::create_directories(out);
  write_text_atomic(out / "metrics.csv", comparisons_csv(rows));
}

void cmd_sweep_defocus(const RunConfig& c, const fs::path& out, int threads) {
  const OpticalConfig optics = c.optics();
  const fs::path dataset = require_path(c, "dataset");
  check_dataset_optics(dataset, c);
  const Model model = model_for(c);
  const NoiseSpec noise = noise_spec(c);

  const RunConfig d = dataset_config(dataset);
  if (d.get("capture") != "multiheight") throw ConfigError("sweep needs a multi-height dataset");
  const double lo = d.number("z2_min_um");
  const double hi = d.get("z2_mode") == "linear"
                        ? lo + (d.integer("heights") - 1) * d.number("z2_step_um")
                        : d.number("z2_max_um");
  const double center = c.get("sweep_center_um").empty() ? model.z_bar_um : c.number("sweep_center_um");
  const double range = c.number("sweep_range_um"), step = c.number("sweep_step_um");
  if (!(range > 0) || !(step > 0)) throw ConfigError("sweep range and step must be positive");
  const double cells_f = range / step;
  const int cells = static_cast<int>(std::lround(cells_f));
  if (cells < 1 || std::abs(cells_f - cells) > 1e-9 * std::max(1.0, cells_f))
    throw ConfigError("sweep_range_um must be a whole multiple of sweep_step_um");
  std::vector<double> dz(cells);
  for (int k = 0; k < cells; ++k) dz[k] = -range / 2 + (k + 0.5) * step;
  const double tol = 1e-9 * hi;
  if (center + dz.front() < lo - tol || center + dz.back() > hi + tol)
    throw ConfigError("sweep distances [" + fmt(center + dz.front()) + ", " + fmt(center + dz.back()) +
                      "] um fall outside the simulated range [" + fmt(lo) + ", " + fmt(hi) + "] um");

  auto names = dataset_names(dataset);
  if (const int limit = non_negative(c, "sweep_samples"); limit > 0 && static_cast<std::size_t>(limit) < names.size())
    names.resize(limit);
  const std::uint64_t seed = c.u64("seed");
  const std::size_t pairs = static_cast<std::size_t>(cells) * cells;
  // per_sample[s][pair] = (rmse_amp, rmse_phase, ssim_amp)
  std::vector<std::vector<std::array<double, 3>>> per_sample(names.size());
  parallel_for(names.size(), threads, [&](std::size_t s) {
    const SampleObject obj{field_from_tensor(read_tensor(dataset / names[s] / kTruthFile), optics.sr_pitch_um), {}};
    std::vector<RealImage> holo(cells);
    for (int k = 0; k < cells; ++k) {
      Rng rng = Rng(seed).split(s).split(k);
      holo[k] = capture(obj, center + dz[k], optics, noise, rng).intensity;
    }
    auto& res = per_sample[s];
    res.resize(pairs);
    for (int a = 0; a < cells; ++a)
      for (int b = 0; b < cells; ++b) {
        const ComplexField u = infer(model, {holo[a], holo[b]}, optics);
        const FieldComparison m = compare_fields(names[s], u, obj.transmittance);
        res[static_cast<std::size_t>(a) * cells + b] = {m.rmse_amp, m.rmse_phase, m.ssim_amp};
      }
  });

  std::string csv = "dz1_um,dz2_um,z2_1_um,z2_2_um,diagonal,rmse_amp,rmse_phase,ssim_amp\n";
  for (int a = 0; a < cells; ++a)
    for (int b = 0; b < cells; ++b) {
      std::array<double, 3> mean{};
      for (const auto& r : per_sample)
        for (int q = 0; q < 3; ++q) mean[q] += r[static_cast<std::size_t>(a) * cells + b][q];
      for (double& v : mean) v /= static_cast<double>(per_sample.size());
      csv += fmt(dz[a]) + "," + fmt(dz[b]) + "," + fmt(center + dz[a]) + "," + fmt(center + dz[b]) + "," +
             (a == b ? "1" : "0") + "," + fmt(mean[0]) + "," + fmt(mean[1]) + "," + fmt(mean[2]) + "\n";
    }
  fs::create_directories(out);
  write_text_atomic(out / "sweep.csv", csv);
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"simulate", "reconstruct", "autofocus", "superres",
                                                 "train",    "infer",       "sweep-defocus", "metrics"};
  return names;
}

void run_command(const std::string& command, const RunConfig& config, const fs::path& out, int threads) {
  if (command == "simulate") return cmd_simulate(config, out, threads);
  if (command == "reconstruct") return cmd_reconstruct(config, out, threads, true);
  if (command == "infer") return cmd_reconstruct(config, out, threads, false);
  if (command == "autofocus") return cmd_autofocus(config, out, threads);
  if (command == "superres") return cmd_superres(config, out, threads);
  if (command == "train") return cmd_train(config, out, threads);
  if (command == "metrics") return cmd_metrics(config, out, threads);
  if (command == "sweep-defocus") return cmd_sweep_defocus(config, out, threads);
  throw ConfigError("unknown command '" + command + "'");
}

}  // namespace holo::cli
