// Copyright 2026 The ilcrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. Talks to the library only through ilcrace.h.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>

#include "ilcrace/ilcrace.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;

int exit_code(ilc_status status) {
  switch (status) {
    case ILC_OK:
      return kExitOk;
    case ILC_ERR_DIVERGENCE:
      return kExitDivergence;
    case ILC_ERR_IO:
    case ILC_ERR_INTERNAL:
      return kExitIo;
    default:
      return kExitConfig;
  }
}

int report(ilc_status status) {
  if (status != ILC_OK) std::fprintf(stderr, "error: %s\n", ilc_last_error());
  return exit_code(status);
}

struct Range {
  double start = 0.0;
  double stop = 0.5;
  std::size_t count = 51;
};

std::optional<double> parse_number(std::string_view text) {
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

// start:stop:count
std::optional<Range> parse_range(const std::string& text) {
  const std::size_t a = text.find(':');
  const std::size_t b = a == std::string::npos ? a : text.find(':', a + 1);
  if (b == std::string::npos || text.find(':', b + 1) != std::string::npos) {
    return std::nullopt;
  }
  const std::string_view view(text);
  const auto start = parse_number(view.substr(0, a));
  const auto stop = parse_number(view.substr(a + 1, b - a - 1));
  const std::string_view count_text = view.substr(b + 1);
  std::size_t count = 0;
  const auto [end, ec] = std::from_chars(
      count_text.data(), count_text.data() + count_text.size(), count);
  if (!start || !stop || ec != std::errc() ||
      end != count_text.data() + count_text.size() || count == 0) {
    return std::nullopt;
  }
  return Range{*start, *stop, count};
}

// out.csv with several levels becomes out_a8.csv, out_a2.csv, ...
std::string level_path(const std::string& out, double level, std::size_t levels) {
  if (levels == 1) return out;
  char tag[32];
  std::snprintf(tag, sizeof(tag), "_a%g", level);
  const std::size_t slash = out.find_last_of('/');
  const std::size_t dot = out.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return out + tag;
  }
  return out.substr(0, dot) + tag + out.substr(dot);
}

class Config {
 public:
  ~Config() { ilc_config_free(handle_); }
  ilc_status load(const std::string& path) {
    return path.empty() ? ilc_config_default(&handle_)
                        : ilc_config_load(path.c_str(), &handle_);
  }
  ilc_config* get() const { return handle_; }

 private:
  ilc_config* handle_ = nullptr;
};

ilc_status print_config(ilc_config* config) {
  const char* json = nullptr;
  const ilc_status status = ilc_config_json(config, &json);
  if (status == ILC_OK) std::printf("resolved config:\n%s\n", json);
  return status;
}

struct SimulateArgs {
  std::string config;
  std::string out;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  std::optional<int> stop_after;
  std::string learned_out;
};

int run_simulate(const SimulateArgs& args) {
  Config config;
  ilc_status status = config.load(args.config);
  if (status != ILC_OK) return report(status);
  if (args.seed) ilc_config_set_seed(config.get(), *args.seed);
  if (args.stop_after) {
    status = ilc_config_set_stop_after(config.get(), *args.stop_after);
    if (status != ILC_OK) return report(status);
  }
  status = print_config(config.get());
  if (status != ILC_OK) return report(status);
  std::fflush(stdout);

  ilc_study* study = nullptr;
  status = ilc_study_run(config.get(), &study);
  if (status != ILC_OK) return report(status);

  const std::size_t levels = ilc_study_levels(study);
  for (std::size_t i = 0; i < levels && status == ILC_OK; ++i) {
    double accel = 0.0, gamma = 0.0, wall = 0.0;
    std::size_t laps = 0, samples = 0;
    ilc_study_level_info(study, i, &accel, &laps, &samples, &gamma, &wall);
    std::vector<double> rms(laps);
    ilc_study_rms(study, i, rms.data(), rms.size());
    std::printf("\naccel %g m/s^2, N = %zu, wall time %.2f s", accel, samples, wall);
    if (!std::isnan(gamma)) std::printf(", gamma = %.6g", gamma);
    std::printf("\n%5s  %14s\n", "lap", "rms_m");
    for (std::size_t j = 0; j < laps; ++j) std::printf("%5zu  %14.6e\n", j, rms[j]);
    if (!args.out.empty()) {
      const std::string path = level_path(args.out, accel, levels);
      status = ilc_study_export(study, i,  path.c_str(),
                                args.format == "json" ? ILC_FORMAT_JSON : ILC_FORMAT_CSV);
      if (status == ILC_OK) std::printf("wrote %s\n", path.c_str());
    }
    if (status == ILC_OK && !args.learned_out.empty()) {
      const std::string path = level_path(args.learned_out, accel, levels);
      status = ilc_study_export_learned(study, i, path.c_str());
      if (status == ILC_OK) std::printf("wrote %s\n", path.c_str());
    }
  }
  ilc_study_free(study);
  return report(status);
}

struct SweepArgs {
  std::string kp_range = "0:0.5:51";
  std::string kd_range = "0:0.5:51";
  std::string filter = "2";
  double speed = 20.0;
  double sample_time = 0.1;
  std::size_t window = 400;
  bool ltv = false;
  double accel = 8.0;
  std::string track = "synthetic";
  unsigned threads = 0;
  std::string out;
};

int run_sweep(const SweepArgs& args) {
  const auto kp = parse_range(args.kp_range);
  const auto kd = parse_range(args.kd_range);
  if (!kp || !kd) {
    std::fprintf(stderr, "error: malformed range '%s'; expected start:stop:count\n",
                 (!kp ? args.kp_range : args.kd_range).c_str());
    return kExitConfig;
  }
  ilc_sweep_params params;
  ilc_sweep_params_default(&params);
  params.kp_start = kp->start;
  params.kp_stop = kp->stop;
  params.kp_count = kp->count;
  params.kd_start = kd->start;
  params.kd_stop = kd->stop;
  params.kd_count = kd->count;
  if (args.filter == "off") {
    params.filter_enabled = 0;
  } else {
    const auto hz = parse_number(args.filter);
    if (!hz) {
      std::fprintf(stderr, "error: --filter-hz expects a frequency or 'off'\n");
      return kExitConfig;
    }
    params.filter_enabled = 1;
    params.filter_hz = *hz;
  }
  params.speed = args.speed;
  params.sample_time = args.sample_time;
  params.window = args.window;
  params.ltv = args.ltv ? 1 : 0;
  params.accel_level = args.accel;
  params.track_source = args.track.c_str();
  params.threads = args.threads;

  std::printf("resolved sweep:\n  kp: %.17g:%.17g:%zu\n  kd: %.17g:%.17g:%zu\n",
              params.kp_start, params.kp_stop, params.kp_count, params.kd_start,
              params.kd_stop, params.kd_count);
  std::printf("  filter_hz: %s\n  sample_time: %g\n  window: %zu\n",
              params.filter_enabled ? args.filter.c_str() : "off",
              params.sample_time, params.window);
  if (params.ltv) {
    std::printf("  model: ltv, track %s at %g m/s^2\n", args.track.c_str(),
                params.accel_level);
  } else {
    std::printf("  model: constant speed %g m/s\n", params.speed);
  }
  std::printf("  out: %s\n", args.out.c_str());
  std::fflush(stdout);

  ilc_sweep* sweep = nullptr;
  ilc_status status = ilc_sweep_run(&params, &sweep);
  if (status != ILC_OK) return report(status);
  std::size_t stable = 0;
  double best = INFINITY, best_kp = 0.0, best_kd = 0.0;
  for (std::size_t i = 0; i < ilc_sweep_cells(sweep); ++i) {
    double p = 0.0, d = 0.0, g = 0.0;
    int s = 0;
    ilc_sweep_cell(sweep, i, &p, &d, &g, &s);
    stable += s != 0;
    if (g < best) {
      best = g;
      best_kp = p;
      best_kd = d;
    }
  }
  std::printf("N = %zu, %zu of %zu cells with gamma < 1, min gamma %.6g at kp=%g kd=%g\n",
              ilc_sweep_samples(sweep), stable, ilc_sweep_cells(sweep), best,
              best_kp, best_kd);
  status = ilc_sweep_export(sweep, args.out.c_str());
  if (status == ILC_OK) std::printf("wrote %s\n", args.out.c_str());
  ilc_sweep_free(sweep);
  return report(status);
}

struct SynthesizeArgs {
  std::string config;
  std::optional<double> accel;
  std::string q_out;
  std::string l_out;
};

int run_synthesize(const SynthesizeArgs& args) {
  Config config;
  ilc_status status = config.load(args.config);
  if (status == ILC_OK) status = print_config(config.get());
  if (status != ILC_OK) return report(status);
  const double accel = args.accel.value_or(ilc_config_level(config.get(), 0));
  std::printf("accel: %g m/s^2\n", accel);
  std::fflush(stdout);
  std::size_t samples = 0;
  double gamma = 0.0;
  status = ilc_synthesize(config.get(), accel,
                          args.q_out.empty() ? nullptr : args.q_out.c_str(),
                          args.l_out.empty() ? nullptr : args.l_out.c_str(),
                          &samples, &gamma);
  if (status != ILC_OK) return report(status);
  std::printf("N = %zu\n", samples);
  if (std::isnan(gamma)) {
    std::printf("gamma: not computed (N above gamma_window)\n");
  } else {
    std::printf("gamma = %.9g (%s)\n", gamma,
                gamma < 1.0 ? "monotonic convergence guaranteed" : "no guarantee");
  }
  if (!args.q_out.empty()) std::printf("wrote %s\n", args.q_out.c_str());
  if (!args.l_out.empty()) std::printf("wrote %s\n", args.l_out.c_str());
  return kExitOk;
}

struct ExportLiftedArgs {
  std::string config;
  std::optional<double> accel;
  std::string out;
};

int run_export_lifted(const ExportLiftedArgs& args) {
  Config config;
  ilc_status status = config.load(args.config);
  if (status == ILC_OK) status = print_config(config.get());
  if (status != ILC_OK) return report(status);
  const double accel = args.accel.value_or(ilc_config_level(config.get(), 0));
  std::printf("accel: %g m/s^2\nout: %s\n", accel, args.out.c_str());
  std::fflush(stdout);
  std::size_t samples = 0;
  status = ilc_export_lifted(config.get(), accel, args.out.c_str(), &samples);
  if (status == ILC_OK) std::printf("N = %zu\nwrote %s\n", samples, args.out.c_str());
  return report(status);
}

int run_gen_track(const std::string& out) {
  std::printf("resolved options:\n  track: synthetic\n  out: %s\n", out.c_str());
  std::fflush(stdout);
  const ilc_status status = ilc_generate_track(out.c_str());
  if (status == ILC_OK) std::printf("wrote %s\n", out.c_str());
  return report(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterative learning control for race-car path tracking"};
  app.require_subcommand(1);

  SimulateArgs simulate;
  auto* sim = app.add_subcommand("simulate", "Run a multi-lap learning experiment");
  sim->add_option("--config", simulate.config, "Experiment config (JSON)")->required();
  sim->add_option("--out", simulate.out, "Result file; one per level when several");
  sim->add_option("--format", simulate.format, "Result format")
      ->check(CLI::IsMember({"csv", "json"}));
  sim->add_option("--seed", simulate.seed, "Noise seed (overrides the config)");
  sim->add_option("--stop-after", simulate.stop_after,
                  "Freeze the learned input from this lap on")
      ->check(CLI::NonNegativeNumber);
  sim->add_option("--learned-out", simulate.learned_out,
                  "Write the final learned input (k,s_m,delta_L_rad)");

  SweepArgs sweep;
  auto* sw = app.add_subcommand("sweep-gamma", "Grid of the convergence factor over PD gains");
  sw->add_option("--kp-range", sweep.kp_range, "start:stop:count")->capture_default_str();
  sw->add_option("--kd-range", sweep.kd_range, "start:stop:count")->capture_default_str();
  sw->add_option("--filter-hz", sweep.filter, "Zero-phase cutoff in Hz, or off")
      ->capture_default_str();
  sw->add_option("--speed", sweep.speed, "Constant speed, m/s")->capture_default_str();
  sw->add_option("--ts", sweep.sample_time, "Sample time, s")->capture_default_str();
  sw->add_option("--window", sweep.window, "Samples in the lifted window")
      ->capture_default_str();
  sw->add_flag("--ltv", sweep.ltv, "Use the lap grid of --track instead of constant speed");
  sw->add_option("--accel", sweep.accel, "Acceleration level for --ltv, m/s^2")
      ->capture_default_str();
  sw->add_option("--track", sweep.track, "Track CSV or 'synthetic' for --ltv")
      ->capture_default_str();
  sw->add_option("--threads", sweep.threads, "Worker threads, 0 = all cores")
      ->capture_default_str();
  sw->add_option("--out", sweep.out, "Output CSV (kp,kd,gamma,stable)")->required();

  SynthesizeArgs synth;
  auto* sy = app.add_subcommand("synthesize", "Build the Q and L matrices of a config");
  sy->add_option("--config", synth.config, "Experiment config (JSON); defaults if omitted");
  sy->add_option("--accel", synth.accel, "Acceleration level, m/s^2 (first level if omitted)");
  sy->add_option("--q-out", synth.q_out, "Write Q as CSV");
  sy->add_option("--l-out", synth.l_out, "Write L as CSV");

  ExportLiftedArgs lifted;
  auto* ex = app.add_subcommand("export-lifted", "Write the lifted matrix P and vector d");
  ex->add_option("--config", lifted.config, "Experiment config (JSON); defaults if omitted");
  ex->add_option("--accel", lifted.accel, "Acceleration level, m/s^2 (first level if omitted)");
  ex->add_option("--out", lifted.out, "Output CSV")->required();

  std::string track_out;
  auto* gen = app.add_subcommand("gen-track", "Write the synthetic track CSV");
  gen->add_option("--out", track_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (*sim) return run_simulate(simulate);
  if (*sw) return run_sweep(sweep);
  if (*sy) return run_synthesize(synth);
  if (*ex) return run_export_lifted(lifted);
  return run_gen_track(track_out);
}
