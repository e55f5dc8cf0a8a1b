#pragma once

#include <complex>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "magflow/exterior.hpp"
#include "magflow/flow.hpp"

namespace magflow {

using Complex = std::complex<double>;

/// xi = phi + i z on the unit cylinder, written as
/// xi(s, t) = w s + sum_n c_n e^{i n s}; the drift i w t is folded into c_0.
struct CylinderFourierState {
  int winding = 0;
  std::map<int, Complex> modes;
  double t = 0.0;
};

/// Fourier decomposition of sampled initial data on N uniform nodes. The
/// winding is read from the unwrapped phi samples; n_max < 0 means N/2 - 1.
/// Throws AliasedInput if the energy above n_max exceeds `alias_tolerance`.
CylinderFourierState decompose(const Eigen::VectorXd& phi0, const Eigen::VectorXd& z0, int n_max = -1,
                               double alias_tolerance = 1e-8);

/// Advances by `duration`: c_n -> c_n e^{-(n^2 + n) duration}, c_0 += i w duration.
CylinderFourierState evolve(const CylinderFourierState& state, double duration);

Complex reconstruct(const CylinderFourierState& state, double s);
std::vector<Complex> reconstruct_samples(const CylinderFourierState& state, int nodes);

/// xi'' + i xi' of the state, sampled on N nodes.
std::vector<Complex> oracle_residual(const CylinderFourierState& state, int nodes);

/// Coefficients a_0, ..., a_{n_terms} of xi(s, t) = sum a_n(s) t^n generated by
/// a_n = (a''_{n-1} + i a'_{n-1}) / n, derivatives taken spectrally.
std::vector<std::vector<Complex>> series_coefficients(const std::vector<Complex>& a0, int n_terms);

/// (cos phi, sin phi, z) on N nodes; only the unit cylinder is supported.
LoopState embed_cylinder(const CylinderFourierState& state, int nodes, double radius = 1.0);

/// <v_j, e_phi> + i <v_j, e_z> for ambient vectors v_j attached to the nodes of a cylinder loop.
std::vector<Complex> complexify(const LoopState& state, const Eigen::MatrixXd& vectors);

/// max |u'' + u u' - u_t| for u(s, t) = s / (T - t) over the grid (t < T).
double blow_up_residual(double T, const std::vector<double>& s_grid, const std::vector<double>& t_grid);

/// Same identity with central differences in s and t (step h = 2L/(N-1) in
/// both) on [-L, L] at time t.
double blow_up_residual_fd(double T, double half_length, int nodes, double t);

/// sum over permutations of A_1(xi_s1) ^ ... ^ A_k(xi_sk), expanded with the
/// Leibniz formula for every coefficient. Reference for tilde_wedge.
MultiVector brute_force_tilde_wedge(const std::vector<Eigen::MatrixXd>& maps,
                                    const std::vector<Eigen::VectorXd>& vectors);

/// A(xi_1) ^ ... ^ A(xi_k) by the Leibniz formula. Reference for underlined_power.
MultiVector brute_force_power(const Eigen::MatrixXd& A, const std::vector<Eigen::VectorXd>& vectors);

}  // namespace magflow
