#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "sbm/baselines.hpp"
#include "sbm/bm3d.hpp"
#include "sbm/error.hpp"
#include "sbm/match_oracle.hpp"
#include "sbm/match_stream.hpp"
#include "sbm/matcher.hpp"
#include "sbm/parallel.hpp"
#include "sbm/perf_model.hpp"
#include "sbm/simd/kernels.hpp"
#include "sbm/table_io.hpp"

namespace sbm::cli {

namespace {

namespace fs = std::filesystem;

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

void require_input(const fs::path& path) {
  if (!fs::exists(path)) throw Error("input '" + path.string() + "' does not exist");
}

void require_output_dir(const fs::path& path) {
  const fs::path parent = path.parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw Error("output directory '" + parent.string() + "' does not exist");
  }
}

void add_match_options(CLI::App& cmd, MatchParams& p) {
  cmd.add_option("-k,--block", p.block_size, "Block size k")->capture_default_str();
  cmd.add_option("--window", p.window_size, "Search window wS (even)")->capture_default_str();
  cmd.add_option("-n,--matches", p.max_matches, "Matches kept per reference (N)")
      ->capture_default_str();
  cmd.add_option("--tau", p.tau, "Normalized distance threshold")->capture_default_str();
  cmd.add_option("--lambda2d", p.lambda2d, "Pixel pre-threshold multiplier")
      ->capture_default_str();
  cmd.add_option("--sigma", p.sigma, "Noise std-dev used by the pre-threshold")
      ->capture_default_str();
  cmd.add_option("--stride", p.stride, "Reference stride")->capture_default_str();
  cmd.add_option("--workers", p.n_workers, "Offset workers per pass")->capture_default_str();
}

// --- noise ------------------------------------------------------------------

struct NoiseArgs {
  fs::path in, out;
  double sigma = 20.0;
  std::uint64_t seed = 1;
};

int cmd_noise(const NoiseArgs& a, std::ostream& out) {
  require_input(a.in);
  require_output_dir(a.out);
  const ImagePlane clean = load_luma(a.in);
  const ImagePlane noisy = add_wagn(clean, a.sigma, a.seed);
  save_image(noisy, a.out);
  out << "psnr_db " << fmt("%.4f", psnr(clean, noisy)) << '\n';
  return kExitOk;
}

// --- match ------------------------------------------------------------------

struct MatchArgs {
  fs::path in, out, dump_sums;
  MatchParams params = Bm3dParams::defaults(0.0).hard;
  std::string backend = "stream";
  std::string region = "full";
};

int cmd_match(const MatchArgs& a, std::ostream& out) {
  require_input(a.in);
  require_output_dir(a.out);
  a.params.validate();
  const ImagePlane img = to_plane(quantize_8bit(load_luma(a.in)));
  const MatchBackend backend = parse_backend(a.backend);
  const int k = a.params.block_size;
  const auto t0 = std::chrono::steady_clock::now();
  MatchTable table;
  if (a.region == "overlap") {
    const ReferenceGrid grid = stride_grid(
        overlap_region(img.width(), img.height(), a.params.half_window(), k), a.params.stride);
    table = backend == MatchBackend::oracle ? find_matches_block(img, a.params, grid)
                                            : find_matches_stream(img, a.params, grid);
  } else {
    table = match_blocks(img, a.params, backend);
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_bmt1(a.out, table);
  if (!a.dump_sums.empty()) {
    fs::create_directories(a.dump_sums);
    const Gray8 g = prethreshold(quantize_8bit(img), a.params.lambda2d, a.params.sigma);
    for (Offset o : half_plane_offsets(a.params.half_window())) {
      write_sum1(a.dump_sums / ("sum_" + std::to_string(o.dr) + "_" + std::to_string(o.dc) + ".sum1"),
                 compute_sum_table(g, o, k), k);
    }
  }
  out << "references " << table.size() << '\n'
      << "backend " << backend_name(backend) << '\n'
      << "seconds " << fmt("%.3f", secs) << '\n';
  return kExitOk;
}

// --- denoise ----------------------------------------------------------------

struct DenoiseArgs {
  fs::path in, out, table_in, clean, basic_out;
  double sigma = 20.0;
  std::string backend = "stream";
  Bm3dParams params = Bm3dParams::defaults(20.0);
  std::optional<double> tau_hard, tau_wien;
};

int cmd_denoise(DenoiseArgs a, std::ostream& out) {
  require_input(a.in);
  require_output_dir(a.out);
  if (!a.clean.empty()) require_input(a.clean);
  const auto defaults = Bm3dParams::defaults(a.sigma);
  a.params.sigma = a.sigma;
  a.params.hard.sigma = a.params.wien.sigma = a.sigma;
  a.params.hard.tau = a.tau_hard.value_or(defaults.hard.tau);
  a.params.wien.tau = a.tau_wien.value_or(defaults.wien.tau);
  a.params.wien.block_size = a.params.hard.block_size;
  a.params.wien.window_size = a.params.hard.window_size;
  a.params.wien.stride = a.params.hard.stride;
  a.params.wien.n_workers = a.params.hard.n_workers;
  a.params.validate();

  const ImagePlane noisy = load_luma(a.in);
  std::optional<MatchTable> table;
  if (!a.table_in.empty()) {
    require_input(a.table_in);
    table = read_bmt1(a.table_in);
    if (table->width() != noisy.width() || table->height() != noisy.height() ||
        table->params().block_size != a.params.hard.block_size) {
      throw InvalidArgument("table incompatible: built for " + std::to_string(table->width()) +
                            "x" + std::to_string(table->height()) + " k=" +
                            std::to_string(table->params().block_size));
    }
  }
  const auto t0 = std::chrono::steady_clock::now();
  const DenoiseResult r =
      denoise_steps(noisy, a.params, parse_backend(a.backend), table ? &*table : nullptr);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  save_image(r.final_estimate, a.out);
  if (!a.basic_out.empty()) save_image(r.basic, a.basic_out);
  const ImagePlane reference = a.clean.empty() ? noisy : load_luma(a.clean);
  const char* against = a.clean.empty() ? "input" : "clean";
  if (!a.clean.empty()) out << "psnr_noisy_db " << fmt("%.4f", psnr(reference, noisy)) << '\n';
  out << "psnr_basic_db " << fmt("%.4f", psnr(reference, r.basic)) << " vs " << against << '\n'
      << "psnr_final_db " << fmt("%.4f", psnr(reference, r.final_estimate)) << " vs " << against
      << '\n'
      << "seconds " << fmt("%.3f", secs) << '\n';
  return kExitOk;
}

// --- verify -----------------------------------------------------------------

struct VerifyArgs {
  int width = 64;
  int height = 64;
  MatchParams params{3, 8, 8, std::numeric_limits<double>::infinity(), 0.0, 0.0, 1, 4};
  bool corrupt = false;
};

// The ramp I(i, j) = j, wrapped at 256 so frames wider than 8 bits still fit
// the engine's pixel format. Without a wrap inside a block every full sum is
// k^2 dc^2; the closed form below also covers blocks that straddle a wrap.
ImagePlane wrapped_ramp(int width, int height) {
  ImagePlane img = make_ramp_image(width, height);
  for (double& v : img.data()) v = std::fmod(v, 256.0);
  return img;
}

std::uint32_t ramp_column_diff(int col, int dc) {
  const int d = col % 256 - (col + dc) % 256;
  return static_cast<std::uint32_t>(d * d);
}

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  a.params.validate();
  const int k = a.params.block_size;
  const int hw = a.params.half_window();
  const ImagePlane ramp = wrapped_ramp(a.width, a.height);
  const Gray8 g = quantize_8bit(ramp);
  const Rect region = overlap_region(a.width, a.height, hw, k);
  bool all = true;
  auto report = [&](const char* name, bool ok, const std::string& detail) {
    out << (ok ? "PASS " : "FAIL ") << name << (detail.empty() ? "" : "  " + detail) << '\n';
    all = all && ok;
  };
  auto block_sum = [&](int base_col, int dc, int cols) {
    std::uint32_t s = 0;
    for (int x = std::max(0, base_col); x < base_col + cols; ++x) s += ramp_column_diff(x, dc);
    return s;
  };

  // Schedule completeness.
  {
    std::multiset<Offset> seen;
    for (const auto& group : plan_workers(a.params)) seen.insert(group.begin(), group.end());
    const auto expected = half_plane_offsets(hw);
    bool ok = seen.size() == expected.size();
    for (Offset o : expected) ok = ok && seen.count(o) == 1;
    report("schedule-covers-offsets-once", ok, std::to_string(expected.size()) + " offsets");
  }

  // Valid sums seen on the engine's own stream depend only on the offset
  // (and, past 256 columns, on where the wrap falls).
  std::mutex mu;
  std::size_t bad_sums = 0, checked = 0;
  bool corrupted = false;
  StreamOptions opts;
  opts.on_sums = [&](Offset o, int, int base_col0, std::span<std::uint32_t> sums) {
    std::lock_guard lock(mu);
    if (a.corrupt && !corrupted && o == Offset{0, 1}) {
      sums[0] += 1;
      corrupted = true;
    }
    for (std::size_t j = 0; j < sums.size(); ++j) {
      const int c = base_col0 + static_cast<int>(j);
      bad_sums += sums[j] != static_cast<std::uint32_t>(k) * block_sum(c, o.dc, k);
    }
    checked += sums.size();
  };
  const MatchTable streamed = find_matches_stream(ramp, a.params, opts);
  report("ramp-sum-constant-per-offset", bad_sums == 0,
         std::to_string(checked) + " sums, " + std::to_string(bad_sums) + " off");

  // Warm-up growth: zero-padded sums scale with the in-frame block area.
  {
    std::size_t bad = 0;
    for (Offset o : half_plane_offsets(hw)) {
      const Rect px = offset_pixel_region(a.width, a.height, o);
      const auto raw = sliding_block_sum_raw(diff_stream(g, o, px), px, k);
      for (int i = 0; i < px.rows(); ++i) {
        const auto height = static_cast<std::uint32_t>(std::min(i + 1, k));
        for (int j = 0; j < px.cols(); ++j) {
          const int c0 = px.col0 + std::max(0, j - k + 1);
          const std::uint32_t want = height * block_sum(c0, o.dc, px.col0 + j - c0 + 1);
          bad += raw[static_cast<std::size_t>(i * px.cols() + j)] != want;
        }
      }
    }
    report("ramp-warmup-growth", bad == 0, std::to_string(bad) + " off");
  }

  // Oracle equality on the overlap region.
  const MatchTable oracle = find_matches_block(ramp, a.params, stride_grid(region, a.params.stride));
  report("stream-equals-oracle", streamed == oracle,
         std::to_string(streamed.size()) + " references");
  return all ? kExitOk : kExitRuntime;
}

// --- model ------------------------------------------------------------------

struct ModelArgs {
  HwConfig cfg;
  bool csv = false;
};

int cmd_model(const ModelArgs& a, std::ostream& out) {
  a.cfg.validate();
  const double t = estimate_match_time(a.cfg);
  const BufferEstimate b = estimate_buffers(a.cfg);
  if (a.csv) {
    out << "width,height,window,block,channels,clock_hz,passes,time_s,fps,pixel_buffer,"
           "diff_buffer,sum_buffer,bytes_per_worker,bram18_per_worker\n"
        << a.cfg.width << ',' << a.cfg.height << ',' << a.cfg.window_size << ','
        << a.cfg.block_size << ',' << a.cfg.n_channels << ',' << fmt("%.0f", a.cfg.clock_hz)
        << ',' << match_passes(a.cfg) << ',' << fmt("%.6f", t) << ',' << fmt("%.3f", 1.0 / t)
        << ',' << b.pixel_elements << ',' << b.diff_elements << ',' << b.sum_elements << ','
        << b.bytes << ',' << b.bram18_slots << '\n';
    return kExitOk;
  }
  out << "frame            " << a.cfg.width << "x" << a.cfg.height << '\n'
      << "window / block   " << a.cfg.window_size << " / " << a.cfg.block_size << '\n'
      << "channels         " << a.cfg.n_channels << '\n'
      << "clock            " << fmt("%.1f", a.cfg.clock_hz / 1e6) << " MHz\n"
      << "passes           " << match_passes(a.cfg) << '\n'
      << "match time       " << fmt("%.4f", t) << " s\n"
      << "frame rate       " << fmt("%.2f", 1.0 / t) << " fps\n"
      << "pixel buffer     " << b.pixel_elements << " elements\n"
      << "diff row buffer  " << b.diff_elements << " elements\n"
      << "sum row buffer   " << b.sum_elements << " elements\n"
      << "bytes per worker " << b.bytes << '\n'
      << "BRAM18 / worker  " << b.bram18_slots << '\n';
  return kExitOk;
}

// --- baseline ---------------------------------------------------------------

struct BaselineArgs {
  fs::path in, out, clean;
  std::string filter;
  FilterParams params;
};

int cmd_baseline(const BaselineArgs& a, std::ostream& out) {
  require_input(a.in);
  require_output_dir(a.out);
  if (!a.clean.empty()) require_input(a.clean);
  a.params.validate();
  const ImagePlane img = load_luma(a.in);
  const ImagePlane result = a.filter == "gaussian"
                                ? gaussian_smooth(img, a.params.sigma_s, a.params.radius)
                                : bilateral_filter(img, a.params);
  save_image(result, a.out);
  if (!a.clean.empty()) {
    const ImagePlane clean = load_luma(a.clean);
    out << "psnr_input_db " << fmt("%.4f", psnr(clean, img)) << '\n'
        << "psnr_filtered_db " << fmt("%.4f", psnr(clean, result)) << '\n';
  } else {
    out << "psnr_filtered_db " << fmt("%.4f", psnr(img, result)) << " vs input\n";
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stream block-matching and BM3D denoising toolkit"};
  app.set_config("--config", "", "INI/TOML file of option defaults; flags take precedence");
  app.require_subcommand(1);
  int threads = 0;
  std::string simd_level;
  app.add_option("--threads", threads, "Worker threads (default: SBM_THREADS or all cores)");
  app.add_option("--simd", simd_level, "Kernel set: scalar, avx2 or neon")
      ->check(CLI::IsMember({"scalar", "avx2", "neon"}));

  NoiseArgs noise;
  auto* noise_cmd = app.add_subcommand("noise", "Add white Gaussian noise to an image");
  noise_cmd->add_option("-i,--in", noise.in, "Input image")->required();
  noise_cmd->add_option("-o,--out", noise.out, "Output image")->required();
  noise_cmd->add_option("--sigma", noise.sigma, "Noise std-dev")->capture_default_str();
  noise_cmd->add_option("--seed", noise.seed, "RNG seed")->capture_default_str();

  MatchArgs match;
  auto* match_cmd = app.add_subcommand("match", "Compute a BMT1 block-matching table");
  match_cmd->add_option("-i,--in", match.in, "Input image")->required();
  match_cmd->add_option("-o,--out", match.out, "Output BMT1 table")->required();
  add_match_options(*match_cmd, match.params);
  match_cmd->add_option("--backend", match.backend, "oracle or stream")
      ->check(CLI::IsMember({"oracle", "stream"}))
      ->capture_default_str();
  match_cmd->add_option("--region", match.region, "Reference set: full frame or overlap region")
      ->check(CLI::IsMember({"full", "overlap"}))
      ->capture_default_str();
  match_cmd->add_option("--dump-sums", match.dump_sums, "Directory for SUM1 per-offset dumps");

  DenoiseArgs den;
  auto* den_cmd = app.add_subcommand("denoise", "Two-step BM3D denoising");
  den_cmd->add_option("-i,--in", den.in, "Noisy input image")->required();
  den_cmd->add_option("-o,--out", den.out, "Denoised output image")->required();
  den_cmd->add_option("--sigma", den.sigma, "Noise std-dev")->capture_default_str();
  den_cmd->add_option("--backend", den.backend, "oracle or stream")
      ->check(CLI::IsMember({"oracle", "stream"}))
      ->capture_default_str();
  den_cmd->add_option("--table-in", den.table_in, "Precomputed BMT1 table for step one");
  den_cmd->add_option("--clean", den.clean, "Clean reference for PSNR");
  den_cmd->add_option("--basic-out", den.basic_out, "Also save the step-one estimate");
  den_cmd->add_option("-k,--block", den.params.hard.block_size, "Block size")
      ->capture_default_str();
  den_cmd->add_option("--window", den.params.hard.window_size, "Search window")
      ->capture_default_str();
  den_cmd->add_option("--stride", den.params.hard.stride, "Reference stride")
      ->capture_default_str();
  den_cmd->add_option("--workers", den.params.hard.n_workers, "Offset workers per pass")
      ->capture_default_str();
  den_cmd->add_option("--n-hard", den.params.hard.max_matches, "Group size, step one")
      ->capture_default_str();
  den_cmd->add_option("--n-wien", den.params.wien.max_matches, "Group size, step two")
      ->capture_default_str();
  den_cmd->add_option("--tau-hard", den.tau_hard, "Match threshold, step one");
  den_cmd->add_option("--tau-wien", den.tau_wien, "Match threshold, step two");
  den_cmd->add_option("--lambda2d", den.params.hard.lambda2d, "Pixel pre-threshold, step one")
      ->capture_default_str();
  den_cmd->add_option("--lambda3d", den.params.lambda3d, "3D hard threshold multiplier")
      ->capture_default_str();
  den_cmd->add_option("--kaiser-beta", den.params.kaiser_beta, "Kaiser window beta")
      ->capture_default_str();

  VerifyArgs ver;
  auto* ver_cmd = app.add_subcommand("verify", "Ramp-image self check of the stream engine");
  ver_cmd->add_option("--width", ver.width, "Ramp width")->capture_default_str();
  ver_cmd->add_option("--height", ver.height, "Ramp height")->capture_default_str();
  add_match_options(*ver_cmd, ver.params);
  ver_cmd->add_flag("--corrupt-sum", ver.corrupt, "Test hook: perturb one streamed sum")
      ->group("");

  ModelArgs model;
  auto* model_cmd = app.add_subcommand("model", "Throughput and buffer model");
  model_cmd->add_option("--clock", model.cfg.clock_hz, "Clock in Hz")->capture_default_str();
  model_cmd->add_option("--channels", model.cfg.n_channels, "Parallel channels")
      ->capture_default_str();
  model_cmd->add_option("--width", model.cfg.width, "Frame width")->capture_default_str();
  model_cmd->add_option("--height", model.cfg.height, "Frame height")->capture_default_str();
  model_cmd->add_option("--window", model.cfg.window_size, "Search window")->capture_default_str();
  model_cmd->add_option("-k,--block", model.cfg.block_size, "Block size")->capture_default_str();
  model_cmd->add_option("--stride", model.cfg.stride, "Stride")->capture_default_str();
  model_cmd->add_flag("--csv", model.csv, "CSV output");

  BaselineArgs base;
  auto* base_cmd = app.add_subcommand("baseline", "Gaussian or bilateral baseline filter");
  base_cmd->add_option("-i,--in", base.in, "Input image")->required();
  base_cmd->add_option("-o,--out", base.out, "Output image")->required();
  base_cmd->add_option("--filter", base.filter, "gaussian or bilateral")
      ->required()
      ->check(CLI::IsMember({"gaussian", "bilateral"}));
  base_cmd->add_option("--sigma-s", base.params.sigma_s, "Spatial std-dev")->capture_default_str();
  base_cmd->add_option("--sigma-r", base.params.sigma_r, "Range std-dev")->capture_default_str();
  base_cmd->add_option("--radius", base.params.radius, "Kernel half-width (0: ceil(3 sigma_s))")
      ->capture_default_str();
  base_cmd->add_option("--clean", base.clean, "Clean reference for PSNR");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (threads > 0) set_thread_count(threads);
    if (!simd_level.empty()) simd::select(simd::parse_isa(simd_level));
    if (*noise_cmd) return cmd_noise(noise, out);
    if (*match_cmd) return cmd_match(match, out);
    if (*den_cmd) return cmd_denoise(den, out);
    if (*ver_cmd) return cmd_verify(ver, out);
    if (*model_cmd) return cmd_model(model, out);
    if (*base_cmd) return cmd_baseline(base, out);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace sbm::cli
