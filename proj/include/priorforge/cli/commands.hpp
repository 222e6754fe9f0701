#pragma once

#include "priorforge/recon/engine.hpp"
#include "priorforge/reg/regularization.hpp"

#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace priorforge::cli {

inline constexpr char const *kSweepHeader =
  "arch,upsampler,regularizer,seed,psnr_final,psnr_best,ssim_final,stop_iter,params,error";
inline constexpr char const *kFreqHeader = "omega,nearest,bilinear,l100";

/// Runs one command: args[0] is the command name (phantom, mask, recon,
/// sweep, freq, metrics). Returns the process exit code.
int run(std::vector<std::string> const &args, std::ostream &out, std::ostream &err);

/// "off", "gaussian" (size 3, sigma in [0.5, 2]), "gaussian:SIZE:SIGMA" or
/// "gaussian:SIZE:LO:HI".
std::optional<reg::GaussianFilter> parse_input_filter(std::string const &text);

/// Seed default: PRIORFORGE_SEED if set, else 0.
std::uint64_t default_seed();

/// (arch, upsampler, regularizer, seed) of one sweep cell.
using SweepKey = std::tuple<std::string, std::string, std::string, std::uint64_t>;

/// Reads the keys of complete rows of an existing sweep.csv, dropping any
/// unterminated trailing line from the file. Missing file gives no keys.
std::set<SweepKey> resume_sweep_csv(std::filesystem::path const &path);

} // namespace priorforge::cli
