#include "priorforge/recon/problem.hpp"

#include "priorforge/data/phantom.hpp"
#include "priorforge/data/sampling.hpp"
#include "priorforge/rng.hpp"

namespace priorforge::recon {

ReconData make_phantom_problem(PhantomProblem const &p)
{
  ReconData d;
  auto const image = data::generate_phantom(data::PhantomSpec::head(p.size, p.seed));
  d.csm = data::generate_csm(p.coils, p.size);
  d.mask = data::generate_cartesian_mask({.width = p.size, .height = p.size, .accel = p.accel,
                                          .center_lines = p.center_lines, .seed = p.seed});
  d.kspace = data::simulate_kspace(image, d.csm, d.mask, {p.noise_sigma, derive_seed(p.seed, 4)});
  d.reference = image;
  return d;
}

} // namespace priorforge::recon
