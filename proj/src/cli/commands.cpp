#include "priorforge/cli/commands.hpp"

#include "priorforge/arch/upsampler.hpp"
#include "priorforge/cli/config.hpp"
#include "priorforge/data/io.hpp"
#include "priorforge/data/phantom.hpp"
#include "priorforge/data/sampling.hpp"
#include "priorforge/metrics/metrics.hpp"
#include "priorforge/recon/problem.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace priorforge::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::vector<std::string> split_list(std::string const &s)
{
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto const b = item.find_first_not_of(" \t");
    auto const e = item.find_last_not_of(" \t");
    if (b == std::string::npos) {
      throw ConfigError(fmt::format("empty element in list '{}'", s));
    }
    out.push_back(item.substr(b, e - b + 1));
  }
  if (out.empty()) {
    throw ConfigError("empty list");
  }
  return out;
}

template <typename T>
T parse_number(std::string const &s, char const *what)
{
  std::istringstream in(s);
  T v{};
  if (!(in >> v) || !in.eof()) {
    throw ConfigError(fmt::format("{}: '{}' is not a valid number", what, s));
  }
  return v;
}

void write_text_atomic(fs::path const &path, std::string const &text)
{
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) {
      throw data::IoError(data::IoError::Kind::Open, fmt::format("cannot write '{}'", tmp.string()));
    }
    f << text;
    if (!f.flush()) {
      throw data::IoError(data::IoError::Kind::Open, fmt::format("write to '{}' failed", tmp.string()));
    }
  }
  fs::rename(tmp, path);
}

ordered_json json_number(double v)
{
  if (std::isnan(v)) {
    return nullptr;
  }
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  return v;
}

std::string csv_number(double v)
{
  if (std::isnan(v)) {
    return {};
  }
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  return fmt::format("{:.6f}", v);
}

void ensure_dir(fs::path const &dir)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw data::IoError(data::IoError::Kind::Open, fmt::format("cannot create output directory '{}'", dir.string()));
  }
}

// Options shared by commands that need a dataset: either a directory written
// by `phantom`, or a phantom synthesized in memory.
struct DataOptions
{
  std::string dir;
  long size = 64;
  long coils = 4;
  double accel = 4.0;
  long center_lines = 5;
  double noise = recon::PhantomProblem{}.noise_sigma;
  std::uint64_t phantom_seed = 0;

  void add(CLI::App &app)
  {
    app.add_option("--data", dir, "Directory with kspace.cplx, csm.cplx, mask.mask [and image.cplx]");
    app.add_option("--size", size, "Phantom size when --data is absent");
    app.add_option("--coils", coils, "Coil count when --data is absent");
    app.add_option("--accel", accel, "Acceleration when --data is absent");
    app.add_option("--center-lines", center_lines, "Center lines when --data is absent");
    app.add_option("--noise", noise, "k-space noise sigma when --data is absent");
    app.add_option("--phantom-seed", phantom_seed, "Phantom seed when --data is absent");
  }

  recon::ReconData load() const
  {
    if (dir.empty()) {
      return recon::make_phantom_problem(
        {.size = size, .coils = coils, .accel = accel, .center_lines = center_lines, .noise_sigma = noise, .seed = phantom_seed});
    }
    fs::path const d(dir);
    recon::ReconData data;
    data.kspace.coils = data::read_cplx(d / "kspace.cplx").planes;
    data.csm.coils = data::read_cplx(d / "csm.cplx").planes;
    data.mask = data::read_mask(d / "mask.mask");
    if (fs::exists(d / "image.cplx")) {
      data.reference = data::read_cplx(d / "image.cplx").planes.at(0);
    }
    data.validate();
    return data;
  }
};

struct ModelOptions
{
  std::string arch = "A_2_full_64_3";
  std::string upsampler;
  int decoder_upsamples = 4;
  std::string input_filter = "off";
  double lipschitz = 0.0, tv = 0.0, l2 = 0.0;
  CLI::Option *lipschitz_opt = nullptr, *tv_opt = nullptr, *l2_opt = nullptr;
  int iters = 3000;
  double lr = 0.008;
  bool self_val = false;
  double holdout = 0.05;
  int window = 30;
  int log_every = 10;
  std::uint64_t seed = default_seed();

  void add(CLI::App &app)
  {
    app.add_option("--arch", arch, "Architecture label, e.g. A_2_full_64_3, ConvDecoder_256");
    app.add_option("--upsampler", upsampler, "nearest|bilinear|l100|transposed|none");
    app.add_option("--decoder-upsamples", decoder_upsamples, "Upsampling layers of the decoder families");
    app.add_option("--input-filter", input_filter, "off | gaussian[:SIZE:SIGMA[:HI]]");
    lipschitz_opt = app.add_option("--lipschitz", lipschitz, "Lipschitz penalty weight");
    tv_opt = app.add_option("--tv", tv, "TV penalty weight");
    l2_opt = app.add_option("--l2", l2, "L2 weight decay");
    app.add_option("--iters", iters, "Optimizer iterations");
    app.add_option("--lr", lr, "Adam learning rate");
    app.add_flag("--self-val", self_val, "Hold out measurements for early stopping");
    app.add_option("--holdout", holdout, "Self-validation holdout fraction");
    app.add_option("--window", window, "Self-validation window");
    app.add_option("--log-every", log_every, "Logging interval");
    app.add_option("--seed", seed, "Seed (default PRIORFORGE_SEED or 0)");
  }

  recon::ReconConfig build() const
  {
    recon::ReconConfig cfg;
    cfg.arch = arch::ArchSpec::parse(arch);
    if (!upsampler.empty()) {
      cfg.arch.upsampler = arch::parse_upsampler(upsampler);
    }
    cfg.arch.decoder_upsamples = decoder_upsamples;
    cfg.reg.input_filter = parse_input_filter(input_filter);
    if (lipschitz_opt->count()) {
      cfg.reg.lipschitz_lambda = lipschitz;
    }
    if (tv_opt->count()) {
      cfg.reg.tv_lambda = tv;
    }
    if (l2_opt->count()) {
      cfg.reg.l2_lambda = l2;
    }
    cfg.iterations = iters;
    cfg.learning_rate = lr;
    if (self_val) {
      cfg.self_val = recon::SelfValConfig{holdout, window};
    }
    cfg.log_every = log_every;
    cfg.seed = seed;
    cfg.validate();
    return cfg;
  }
};

void add_config_option(CLI::App &app)
{
  // Consumed before parsing; declared so that --help lists it.
  app.add_option("--config", "Config file of key = value lines (flags override it)");
}

int cmd_phantom(CLI::App &app, std::vector<std::string> args, std::ostream &out)
{
  long size = 64, coils = 4, center = 5;
  double accel = 4.0, noise = recon::PhantomProblem{}.noise_sigma;
  std::uint64_t seed = default_seed();
  std::string dir;
  app.add_option("--size", size, "Image size N");
  app.add_option("--coils", coils, "Coil count");
  app.add_option("--accel", accel, "Acceleration factor");
  app.add_option("--center-lines", center, "Fully sampled center lines");
  app.add_option("--noise", noise, "k-space noise sigma per component");
  app.add_option("--seed", seed, "Seed (default PRIORFORGE_SEED or 0)");
  app.add_option("--out", dir, "Output directory")->required();
  app.parse(std::move(args));

  if (coils < 1) {
    throw ConfigError(fmt::format("coils: must be >= 1, got {}", coils));
  }
  if (!(noise >= 0.0)) {
    throw ConfigError(fmt::format("noise: must be >= 0, got {}", noise));
  }
  auto const d = recon::make_phantom_problem(
    {.size = size, .coils = coils, .accel = accel, .center_lines = center, .noise_sigma = noise, .seed = seed});
  fs::path const o(dir);
  ensure_dir(o);
  data::write_cplx(o / "image.cplx", *d.reference);
  data::write_cplx(o / "csm.cplx", d.csm.coils);
  data::write_mask(o / "mask.mask", d.mask);
  data::write_cplx(o / "kspace.cplx", d.kspace.coils);
  out << fmt::format("wrote {}x{} phantom, {} coils, {} sampled columns to {}\n", size, size, coils,
                     d.mask.acquired_lines(), o.string());
  return 0;
}

int cmd_mask(CLI::App &app, std::vector<std::string> args, std::ostream &out)
{
  data::MaskSpec spec;
  spec.seed = default_seed();
  std::string path;
  app.add_option("--width", spec.width, "Columns");
  app.add_option("--height", spec.height, "Rows (0 = width)");
  app.add_option("--accel", spec.accel, "Acceleration factor");
  app.add_option("--center-lines", spec.center_lines, "Fully sampled center lines");
  app.add_option("--seed", spec.seed, "Seed (default PRIORFORGE_SEED or 0)");
  app.add_option("--out", path, "Output .mask file")->required();
  app.parse(std::move(args));
  auto const m = data::generate_cartesian_mask(spec);
  data::write_mask(path, m);
  out << fmt::format("wrote {}x{} mask with {} sampled columns to {}\n", m.rows, m.cols, m.acquired_lines(), path);
  return 0;
}

ordered_json summary_json(recon::ReconConfig const &cfg, recon::ReconResult const &r)
{
  ordered_json j;
  j["arch"] = cfg.arch.label();
  j["upsampler"] = std::string(arch::to_string(cfg.arch.upsampler));
  j["regularizer"] = cfg.reg.label();
  j["seed"] = cfg.seed;
  j["iterations"] = cfg.iterations;
  j["stop_iter"] = r.stop_iter;
  j["best_iter"] = r.best_iter ? ordered_json(*r.best_iter) : ordered_json(nullptr);
  j["sigma"] = r.sigma ? ordered_json(*r.sigma) : ordered_json(nullptr);
  j["params"] = r.params;
  j["psnr_final"] = json_number(r.psnr_final);
  j["psnr_best"] = json_number(r.psnr_best);
  j["ssim_final"] = json_number(r.ssim_final);
  j["psnr_masked_final"] = json_number(r.psnr_masked_final);
  j["psnr_best_image"] = json_number(r.psnr_best_image);
  j["psnr_masked_best_image"] = json_number(r.psnr_masked_best_image);
  j["penalty_final"] = json_number(r.penalty_final);
  auto &pen = j["penalty"] = ordered_json::array();
  for (auto const &row : r.log) {
    pen.push_back({{"iter", row.iter}, {"penalty", json_number(row.penalty)}});
  }
  j["wall_time"] = r.elapsed_seconds;
  return j;
}

int cmd_recon(CLI::App &app, std::vector<std::string> args, std::ostream &out, std::ostream &err)
{
  DataOptions dopt;
  ModelOptions mopt;
  std::string dir;
  dopt.add(app);
  mopt.add(app);
  app.add_option("--out", dir, "Output directory")->required();
  app.parse(std::move(args));

  auto const cfg = mopt.build();
  auto const data = dopt.load();
  fs::path const o(dir);
  ensure_dir(o);
  recon::ReconResult res;
  try {
    res = recon::run_reconstruction(cfg, data);
  } catch (recon::ReconAborted const &e) {
    std::ostringstream log;
    recon::write_log_csv(log, e.log());
    write_text_atomic(o / "log.csv", log.str());
    err << "error: " << e.what() << '\n';
    return 3;
  }
  data::write_cplx(o / "recon.cplx", res.final_complex);
  if (res.best_iter) {
    data::write_cplx(o / "best.cplx", res.best_complex);
  }
  std::ostringstream log;
  recon::write_log_csv(log, res.log);
  write_text_atomic(o / "log.csv", log.str());
  write_text_atomic(o / "summary.json", summary_json(cfg, res).dump(2) + "\n");
  out << fmt::format("{}: stop {} psnr {} ssim {} ({:.1f}s)\n", cfg.arch.label(), res.stop_iter,
                     csv_number(res.psnr_final), csv_number(res.ssim_final), res.elapsed_seconds);
  return 0;
}

std::string sanitize(std::string s)
{
  for (auto &c : s) {
    if (c == ',' || c == '\n' || c == '\r') {
      c = c == ',' ? ';' : ' ';
    }
  }
  return s;
}

int cmd_sweep(CLI::App &app, std::vector<std::string> args, std::ostream &out)
{
  DataOptions dopt;
  std::string archs, depths = "2", widths = "64", skips = "full", kernels = "3", upsamplers = "nearest",
                     regularizers = "none", seeds, dir;
  int iters = 3000, log_every = 10, window = 30;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  double lr = 0.008, holdout = 0.05;
  bool self_val = false;
  dopt.add(app);
  app.add_option("--archs", archs, "Explicit architecture labels (overrides the A_d_s_w_k axes)");
  app.add_option("--depths", depths, "Depth axis");
  app.add_option("--widths", widths, "Width axis");
  app.add_option("--skips", skips, "Skip-policy axis");
  app.add_option("--kernels", kernels, "Kernel axis");
  app.add_option("--upsamplers", upsamplers, "Upsampler axis");
  app.add_option("--regularizers", regularizers, "Regularizer axis, e.g. none,gaussian,gaussian+lipschitz");
  app.add_option("--seeds", seeds, "Seed axis (default PRIORFORGE_SEED or 0)");
  app.add_option("--iters", iters, "Optimizer iterations per cell");
  app.add_option("--lr", lr, "Adam learning rate");
  app.add_option("--log-every", log_every, "Logging interval");
  app.add_flag("--self-val", self_val, "Self-validation early stopping");
  app.add_option("--holdout", holdout, "Self-validation holdout fraction");
  app.add_option("--window", window, "Self-validation window");
  app.add_option("--jobs", jobs, "Concurrent cells");
  app.add_option("--out", dir, "Output directory")->required();
  app.parse(std::move(args));

  struct Cell
  {
    recon::ReconConfig cfg;
    SweepKey key;
  };
  std::vector<std::string> labels;
  if (!archs.empty()) {
    labels = split_list(archs);
  } else {
    for (auto const &d : split_list(depths)) {
      for (auto const &s : split_list(skips)) {
        for (auto const &w : split_list(widths)) {
          for (auto const &k : split_list(kernels)) {
            labels.push_back(fmt::format("A_{}_{}_{}_{}", d, s, w, k));
          }
        }
      }
    }
  }
  std::vector<std::uint64_t> seed_list;
  if (seeds.empty()) {
    seed_list.push_back(default_seed());
  } else {
    for (auto const &s : split_list(seeds)) {
      seed_list.push_back(parse_number<std::uint64_t>(s, "seeds"));
    }
  }
  if (jobs < 1) {
    throw ConfigError("jobs: must be >= 1");
  }
  std::vector<Cell> cells;
  for (auto const &label : labels) {
    for (auto const &up : split_list(upsamplers)) {
      for (auto const &rl : split_list(regularizers)) {
        for (auto const seed : seed_list) {
          Cell c;
          c.cfg.arch = arch::ArchSpec::parse(label);
          c.cfg.arch.upsampler = arch::parse_upsampler(up);
          c.cfg.reg = reg::RegConfig::from_label(rl);
          c.cfg.iterations = iters;
          c.cfg.learning_rate = lr;
          c.cfg.log_every = log_every;
          c.cfg.seed = seed;
          if (self_val) {
            c.cfg.self_val = recon::SelfValConfig{holdout, window};
          }
          c.cfg.validate();
          c.key = {c.cfg.arch.label(), std::string(arch::to_string(c.cfg.arch.upsampler)), c.cfg.reg.label(), seed};
          cells.push_back(std::move(c));
        }
      }
    }
  }
  auto const data = dopt.load();

  fs::path const o(dir);
  ensure_dir(o);
  auto const csv_path = o / "sweep.csv";
  auto const done = resume_sweep_csv(csv_path);
  std::vector<Cell const *> todo;
  for (auto const &c : cells) {
    if (!done.count(c.key)) {
      todo.push_back(&c);
    }
  }
  bool const fresh = !fs::exists(csv_path);
  std::ofstream csv(csv_path, std::ios::binary | std::ios::app);
  if (!csv) {
    throw data::IoError(data::IoError::Kind::Open, fmt::format("cannot open '{}'", csv_path.string()));
  }
  if (fresh) {
    csv << kSweepHeader << '\n' << std::flush;
  }

  std::mutex mu;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < todo.size(); i = next++) {
      auto const &c = *todo[i];
      auto const &[arch_label, up, rl, seed] = c.key;
      std::string row;
      try {
        auto const r = recon::run_reconstruction(c.cfg, data);
        row = fmt::format("{},{},{},{},{},{},{},{},{},", arch_label, up, rl, seed, csv_number(r.psnr_final),
                          csv_number(r.psnr_best), csv_number(r.ssim_final), r.stop_iter, r.params);
      } catch (std::exception const &e) {
        row = fmt::format("{},{},{},{},,,,,,{}", arch_label, up, rl, seed, sanitize(e.what()));
      }
      std::lock_guard lock(mu);
      csv << row << '\n' << std::flush;
    }
  };
  auto const n = std::min<std::size_t>(jobs, todo.size());
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < n; ++t) {
    pool.emplace_back(worker);
  }
  if (n > 0) {
    worker();
  }
  pool.clear();
  out << fmt::format("sweep: {} cells, {} already present, {} run\n", cells.size(), cells.size() - todo.size(),
                     todo.size());
  return 0;
}

int cmd_freq(CLI::App &app, std::vector<std::string> args, std::ostream &out)
{
  int points = 512;
  std::string path;
  app.add_option("--points", points, "Grid points on [0, pi]");
  app.add_option("--out", path, "Output CSV (stdout when absent)");
  app.parse(std::move(args));
  auto const w = metrics::frequency_grid(points);
  auto const nn = metrics::filter_frequency_response(arch::nearest_taps(), w);
  auto const bl = metrics::filter_frequency_response(arch::bilinear_taps(), w);
  auto const kl = metrics::filter_frequency_response(arch::l100_taps(), w);
  std::ostringstream s;
  s << kFreqHeader << '\n';
  for (std::size_t i = 0; i < w.size(); ++i) {
    s << fmt::format("{:.9g},{:.9g},{:.9g},{:.9g}\n", w[i], nn[i], bl[i], kl[i]);
  }
  if (path.empty()) {
    out << s.str();
  } else {
    write_text_atomic(path, s.str());
  }
  return 0;
}

int cmd_metrics(CLI::App &app, std::vector<std::string> args, std::ostream &out)
{
  std::string x_path, ref_path, mask_path, path;
  app.add_option("--x", x_path, "Reconstruction .cplx")->required();
  app.add_option("--ref", ref_path, "Reference .cplx")->required();
  app.add_option("--mask", mask_path, "Sampling .mask for the masked-region PSNR");
  app.add_option("--out", path, "Output JSON (stdout when absent)");
  app.parse(std::move(args));
  auto const x = data::read_cplx(x_path).planes.at(0);
  auto const ref = data::read_cplx(ref_path).planes.at(0);
  if (!x.same_extent(ref)) {
    throw ShapeError(fmt::format("metrics: extent mismatch {}x{} vs {}x{}", x.rows, x.cols, ref.rows, ref.cols));
  }
  auto const rep = metrics::evaluate(x.magnitude(), ref.magnitude());
  ordered_json j;
  j["psnr"] = json_number(rep.psnr);
  j["ssim"] = json_number(rep.ssim);
  if (!mask_path.empty()) {
    j["psnr_masked"] = json_number(metrics::masked_region_psnr(x, ref, data::read_mask(mask_path)));
  }
  j["range"] = rep.range;
  auto const text = j.dump(2) + "\n";
  if (path.empty()) {
    out << text;
  } else {
    write_text_atomic(path, text);
  }
  return 0;
}

void usage(std::ostream &os)
{
  os << "usage: priorforge <command> [options]\n"
        "commands:\n"
        "  phantom   synthesize phantom, coil maps, mask and k-space\n"
        "  mask      write a Cartesian sampling mask\n"
        "  recon     run one reconstruction\n"
        "  sweep     run a grid of reconstructions into sweep.csv\n"
        "  freq      frequency responses of the unlearnt upsamplers\n"
        "  metrics   PSNR/SSIM between two .cplx files\n"
        "every command accepts --config FILE and --help\n";
}

} // namespace

std::optional<reg::GaussianFilter> parse_input_filter(std::string const &text)
{
  if (text == "off" || text == "none") {
    return std::nullopt;
  }
  auto const parts = split_list([&] {
    auto t = text;
    std::replace(t.begin(), t.end(), ':', ',');
    return t;
  }());
  if (parts.front() != "gaussian") {
    throw ConfigError(fmt::format("input-filter: unknown kind '{}' (off|gaussian)", parts.front()));
  }
  reg::GaussianFilter f{3, 0.5, 2.0};
  if (parts.size() == 1) {
    return f;
  }
  if (parts.size() < 3 || parts.size() > 4) {
    throw ConfigError(fmt::format("input-filter: expected gaussian:SIZE:SIGMA[:HI], got '{}'", text));
  }
  f.size = parse_number<int>(parts[1], "input-filter size");
  f.sigma_lo = parse_number<double>(parts[2], "input-filter sigma");
  f.sigma_hi = parts.size() == 4 ? parse_number<double>(parts[3], "input-filter sigma") : f.sigma_lo;
  reg::RegConfig probe;
  probe.input_filter = f;
  probe.validate();
  return f;
}

std::uint64_t default_seed()
{
  if (char const *env = std::getenv("PRIORFORGE_SEED"); env && *env) {
    return parse_number<std::uint64_t>(env, "PRIORFORGE_SEED");
  }
  return 0;
}

std::set<SweepKey> resume_sweep_csv(fs::path const &path)
{
  std::set<SweepKey> keys;
  if (!fs::exists(path)) {
    return keys;
  }
  std::string text;
  {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    text = ss.str();
  }
  auto const complete = text.rfind('\n');
  auto const keep = complete == std::string::npos ? 0 : complete + 1;
  if (keep != text.size()) {
    fs::resize_file(path, keep);
    text.resize(keep);
  }
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    fs::remove(path);
    return keys;
  }
  if (line != kSweepHeader) {
    throw ConfigError(fmt::format("'{}' does not start with the sweep header", path.string()));
  }
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      f.push_back(cell);
    }
    if (f.size() < 4) {
      throw ConfigError(fmt::format("'{}': malformed row '{}'", path.string(), line));
    }
    keys.emplace(f[0], f[1], f[2], parse_number<std::uint64_t>(f[3], "sweep.csv seed"));
  }
  return keys;
}

int run(std::vector<std::string> const &args, std::ostream &out, std::ostream &err)
{
  if (args.empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
    usage(args.empty() ? err : out);
    return args.empty() ? 1 : 0;
  }
  auto const &cmd = args[0];
  CLI::App app{fmt::format("priorforge {}", cmd), fmt::format("priorforge {}", cmd)};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  try {
    // --config values go first so that explicit flags win.
    std::vector<std::string> rest, merged;
    for (std::size_t i = 1; i < args.size(); ++i) {
      if (args[i] == "--config") {
        if (i + 1 >= args.size()) {
          throw ConfigError("--config requires a file argument");
        }
        auto const extra = config_to_args(load_config(args[++i]));
        merged.insert(merged.end(), extra.begin(), extra.end());
      } else if (args[i].rfind("--config=", 0) == 0) {
        auto const extra = config_to_args(load_config(args[i].substr(9)));
        merged.insert(merged.end(), extra.begin(), extra.end());
      } else {
        rest.push_back(args[i]);
      }
    }
    merged.insert(merged.end(), rest.begin(), rest.end());
    std::reverse(merged.begin(), merged.end());
    add_config_option(app);
    if (cmd == "phantom") {
      return cmd_phantom(app, std::move(merged), out);
    }
    if (cmd == "mask") {
      return cmd_mask(app, std::move(merged), out);
    }
    if (cmd == "recon") {
      return cmd_recon(app, std::move(merged), out, err);
    }
    if (cmd == "sweep") {
      return cmd_sweep(app, std::move(merged), out);
    }
    if (cmd == "freq") {
      return cmd_freq(app, std::move(merged), out);
    }
    if (cmd == "metrics") {
      return cmd_metrics(app, std::move(merged), out);
    }
    err << fmt::format("error: unknown command '{}'\n", cmd);
    usage(err);
    return 1;
  } catch (CLI::ParseError const &e) {
    return app.exit(e, out, err);
  } catch (std::exception const &e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

} // namespace priorforge::cli
