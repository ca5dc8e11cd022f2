#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dfskit/dynamics.hpp"
#include "dfskit/finder.hpp"

namespace dfskit {

/// How epsilon enters the added coefficient block: Rate gives eps * I,
/// Amplitude gives eps^2 * I.
enum class InjectionConvention { Rate, Amplitude };

std::string to_string(InjectionConvention c);
InjectionConvention parse_convention(const std::string& s);

struct PerturbationExperiment {
  LindbladModel base;
  std::vector<Operator> perturbing_ops;
  std::vector<double> epsilons;
  std::vector<double> times;
  DensityMatrix initial;
  std::uint64_t seed = 0xDF5;
  /// When set, the initial state must be supported on it.
  std::optional<Subspace> dfs;
  InjectionConvention convention = InjectionConvention::Rate;
  std::size_t fit_eps = 5;
  std::size_t fit_times = 5;
};

struct ScalingReport {
  std::vector<double> epsilons;
  std::vector<double> times;
  /// fidelity[i][j] at epsilons[i], times[j].
  std::vector<std::vector<double>> fidelity;
  std::vector<std::vector<double>> one_minus_f;
  /// f at eps = 0 for every time.
  std::vector<double> baseline;
  InjectionConvention convention = InjectionConvention::Rate;
  /// Joint fit log(1 - f) = log C + p_eps log eps + p_t log t.
  double p_eps = 0.0;
  double p_t = 0.0;
  double log_c = 0.0;
  double fit_residual = 0.0;
  std::size_t fit_points = 0;
  /// Slope in log eps for each time in the window, and in log t for each eps.
  std::vector<double> slope_eps_at_t;
  std::vector<double> slope_t_at_eps;
  bool monotone_in_eps = true;
};

/// Re tr(rho_a rho_b).
double fidelity(const DensityMatrix& a, const DensityMatrix& b);

/// `steps` RK4 steps span the largest listed time.
ScalingReport run_perturbation(const PerturbationExperiment& exp, std::size_t steps = 200);

std::vector<double> log_spaced(double lo, double hi, std::size_t n);
std::vector<double> lin_spaced(double lo, double hi, std::size_t n);

/// strong_collective(n) started in a random singlet-space state, perturbed by
/// single-site sigma^z on qubit 0.
PerturbationExperiment collective_singlet_experiment(std::size_t n, InjectionConvention c, std::uint64_t seed = 0xDF5);
/// One qubit in |+> with no base noise, perturbed by sigma^z.
PerturbationExperiment unencoded_plus_experiment(InjectionConvention c);

} // namespace dfskit
