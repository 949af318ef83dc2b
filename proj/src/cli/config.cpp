#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "holo/cli/cli.hpp"
#include "holo/core/io.hpp"

namespace holo::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const std::map<std::string, std::string>& RunConfig::defaults() {
  static const std::map<std::string, std::string> table = {
      {"seed", "0"},
      // optics
      {"wavelength_um", "0.53"},
      {"medium_index", "1"},
      {"sr_pitch_um", exact(2.24 / 6.0)},
      {"sensor_pitch_um", "2.24"},
      // simulate
      {"capture", "multiheight"},
      {"samples", "10"},
      {"size", "256"},
      {"heights", "8"},
      {"z2_mode", "random"},
      {"z2_min_um", "350"},
      {"z2_max_um", "550"},
      {"z2_step_um", "15"},
      {"sr_factor", "0"},
      {"sr_jitter_um", "0"},
      {"sample_kind", "phase_disks"},
      {"num_disks", "6"},
      {"disk_radius_min_px", "5"},
      {"disk_radius_max_px", "14"},
      {"disk_phase_min", "0.3"},
      {"disk_phase_max", "1"},
      {"bar_count", "5"},
      {"bar_width_px", "4"},
      {"bar_amplitude", "0.3"},
      {"phase_std", "0.8"},
      {"correlation_px", "4"},
      {"amplitude_depth", "0"},
      {"separation_px", "8"},
      {"point_px", "1"},
      {"point_amplitude", "0"},
      {"noise_sigma", "0"},
      {"quantization_bits", "0"},
      // reconstruct / infer / autofocus / superres
      {"dataset", ""},
      {"method", "mhpr"},
      {"checkpoint", ""},
      {"z_bar_um", "450"},
      {"holograms_used", "0"},
      {"use_known_heights", "true"},
      {"mhpr_max_iters", "30"},
      {"mhpr_min_iters", "10"},
      {"mhpr_rel_tol", "1e-4"},
      {"mhpr_traversal", "ascending"},
      {"focus_z_min_um", "300"},
      {"focus_z_max_um", "600"},
      {"focus_step_um", "5"},
      {"focus_tol_um", "0.1"},
      {"focus_hologram", "0"},
      // train
      {"mode", "rh-m"},
      {"gen_base", "4"},
      {"gen_scales", "4"},
      {"m_train", "2"},
      {"disc_base", "20"},
      {"disc_blocks", "5"},
      {"disc_hidden", "64"},
      {"epochs", "1"},
      {"lr_g", "5e-5"},
      {"lr_d", "1e-6"},
      {"lr_decay", "0.97"},
      {"loss_alpha", "3"},
      {"loss_beta", "1"},
      {"loss_gamma", "0.5"},
      {"msssim_scales", "3"},
      {"msssim_range", ""},
      // metrics
      {"estimate", ""},
      {"reference", ""},
      // sweep-defocus
      {"sweep_center_um", ""},
      {"sweep_range_um", "220"},
      {"sweep_step_um", "20"},
      {"sweep_samples", "0"},
  };
  return table;
}

RunConfig::RunConfig() : values_(defaults()) {}

RunConfig RunConfig::parse(std::string_view text) {
  RunConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(number) + ": empty key");
    cfg.set(key, trim(std::string_view(body).substr(eq + 1)));
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) { return parse(read_text(path)); }

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = value;
}

void RunConfig::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
  set(trim(std::string_view(assignment).substr(0, eq)), trim(std::string_view(assignment).substr(eq + 1)));
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

double RunConfig::number(const std::string& key) const {
  const std::string& s = get(key);
  double v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
    throw ConfigError("config key '" + key + "': '" + s + "' is not a finite number");
  return v;
}

int RunConfig::integer(const std::string& key) const {
  const std::string& s = get(key);
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ConfigError("config key '" + key + "': '" + s + "' is not an integer");
  return v;
}

std::uint64_t RunConfig::u64(const std::string& key) const {
  const std::string& s = get(key);
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ConfigError("config key '" + key + "': '" + s + "' is not an unsigned integer");
  return v;
}

bool RunConfig::flag(const std::string& key) const {
  const std::string& s = get(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("config key '" + key + "': '" + s + "' is not a boolean");
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

OpticalConfig RunConfig::optics() const {
  OpticalConfig c;
  c.wavelength_um = number("wavelength_um");
  c.medium_index = number("medium_index");
  c.sr_pitch_um = number("sr_pitch_um");
  c.sensor_pitch_um = number("sensor_pitch_um");
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("optics: ") + e.what());
  }
  return c;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& job) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::mutex mu;
  std::size_t next = 0;
  std::size_t failed_at = n;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(mu);
        if (next >= n || failure) return;
        i = next++;
      }
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace holo::cli
