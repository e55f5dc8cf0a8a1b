#include "magflow/presets.hpp"

#include "magflow/errors.hpp"

namespace magflow {

const std::vector<Preset>& preset_catalog() {
  static const std::vector<Preset> catalog{
      {"cylinder-case-a",
       "Unit cylinder, Z(v) = v x (x,y,0), phi0 = A cos s, z0 = B sin s (A = 1, B = 0.5). "
       "Converges to the magnetic geodesic ((A-B)/2) e^{-is}; compared against the Fourier oracle.",
       {{"model", "cylinder"},
        {"model.radius", "1"},
        {"force", "radial_cross"},
        {"initial", "case_a"},
        {"initial.A", "1"},
        {"initial.B", "0.5"},
        {"nodes", "128"},
        {"scheme", "spectral"},
        {"time", "rk4"},
        {"t_end", "5"},
        {"record_every", "200"}}},
      {"cylinder-case-b",
       "Unit cylinder, same force, phi0 = s, z0 = mu cos s (mu = 0.5). The loop climbs the "
       "cylinder at unit speed; no magnetic geodesic is reached.",
       {{"model", "cylinder"},
        {"model.radius", "1"},
        {"force", "radial_cross"},
        {"initial", "case_b"},
        {"initial.mu", "0.5"},
        {"nodes", "128"},
        {"scheme", "spectral"},
        {"time", "rk4"},
        {"dt", "2pi/10000"},
        {"t_end", "4pi"},
        {"record_every", "500"}}},
      {"flat-torus-3-constant-B",
       "FlatTorus(3) with the constant Lorentz force Z(v) = v x B, B = (0,0,1); a winding loop.",
       {{"model", "flat_torus"},
        {"model.dim", "3"},
        {"force", "constant_cross"},
        {"force.B", "0, 0, 1"},
        {"initial", "fourier"},
        {"initial.c0", "0, 0, 0.3, 0.2"},
        {"initial.c1", "pi, 0.6, 0, 0, 0.1"},
        {"initial.c2", "pi, 0, 0.4, 0.15"},
        {"initial.winding", "1, 0, 0"},
        {"nodes", "64"},
        {"t_end", "3"},
        {"record_every", "50"}}},
      {"flat-torus-2-rotation",
       "FlatTorus(2) with Z = cJ, c = 1: a circle of radius 0.5 with a mode-2 perturbation relaxes "
       "to a magnetic geodesic circle.",
       {{"model", "flat_torus"},
        {"model.dim", "2"},
        {"force", "parallel_rotation"},
        {"force.c", "1"},
        {"initial", "fourier"},
        {"initial.c0", "pi, 0.5, 0, 0.1"},
        {"initial.c1", "pi, 0, 0.5"},
        {"nodes", "64"},
        {"t_end", "5"},
        {"record_every", "100"}}},
      {"sphere-zero-force-geodesic",
       "Unit sphere, no force, a tilted great circle at unit speed: a stationary geodesic.",
       {{"model", "sphere"},
        {"model.radius", "1"},
        {"force", "none"},
        {"initial", "fourier"},
        {"initial.c0", "0, 1"},
        {"initial.c1", "0, 0, 0.6"},
        {"initial.c2", "0, 0, 0.8"},
        {"nodes", "64"},
        {"t_end", "2"},
        {"record_every", "100"}}},
      {"blow-up-line",
       "Real line with Z_s(v) = -s v on [-5, 5], Dirichlet data from u = s/(T - t), T = 1. "
       "The integrator must report blow-up before t = T.",
       {{"model", "line"},
        {"force", "linear_scalar"},
        {"initial", "witness"},
        {"dirichlet.half_length", "5"},
        {"dirichlet.T", "1"},
        {"nodes", "64"},
        {"dt", "1e-4"},
        {"t_end", "1"},
        {"record_every", "500"},
        {"monitors", "none"},
        {"expect", "blowup"}}},
      {"stability-pair",
       "Three run pairs on FlatTorus(2), Z = J: initial perturbation delta = 1e-3 in mode 2, force "
       "scaled by 1 + 1e-3, and identical inputs. Fits the Gronwall constant on [0.05, 1].",
       {{"experiment", "stability_pair"},
        {"model", "flat_torus"},
        {"model.dim", "2"},
        {"force", "parallel_rotation"},
        {"force.c", "1"},
        {"initial", "fourier"},
        {"initial.c0", "pi, 0.5, 0, 0.1"},
        {"initial.c1", "pi, 0, 0.5"},
        {"nodes", "64"},
        {"t_end", "1"},
        {"record_every", "10"},
        {"pair.delta", "1e-3"},
        {"pair.force_scale", "1.001"},
        {"pair.t0", "1"},
        {"pair.mode", "2"}}},
  };
  return catalog;
}

const Preset& find_preset(const std::string& name) {
  for (const Preset& p : preset_catalog())
    if (p.name == name) return p;
  throw Error(ErrorKind::ConfigError, "unknown preset '" + name + "'");
}

}  // namespace magflow
