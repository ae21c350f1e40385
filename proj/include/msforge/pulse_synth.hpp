#pragma once

#include "msforge/chain_model.hpp"
#include "msforge/waveform.hpp"

#include <Eigen/Dense>

#include <vector>

namespace msforge {

/// Pair of driven ions (0-based chain indices).
struct IonPair {
  int first = 0;
  int second = 1;
};

/// Linear constraints A x = 0 and quadratic angle form x^T M x = Xi over the
/// free amplitude variables. In robust mode the variables are the N_seg/2
/// half-amplitudes and x_full = expansion * x.
struct SynthesisProblem {
  Eigen::MatrixXd constraint_matrix; // A, complex rows split into (re, im)
  Eigen::MatrixXd angle_matrix;      // M, symmetric
  Eigen::MatrixXd nullspace_basis;   // orthonormal columns spanning ker(A)
  Eigen::MatrixXd expansion;         // N_seg x n_vars
  double gate_time = 0.0;
  double drive_detuning = 0.0;
  std::vector<double> detunings;
  bool robust = false;

  int variable_count() const { return static_cast<int>(constraint_matrix.cols()); }
};

struct SynthesisResult {
  Waveform waveform;
  double selected_eigenvalue = 0.0;
  Eigen::VectorXd selected_eigenvector; // in null-space coordinates
  Eigen::VectorXd reduced_eigenvalues;  // eigenvalues of ker^T M ker, ascending
};

/// Assembles A and M with closed-form segment integrals.
SynthesisProblem build_problem(const ModeSpectrum& modes, double gate_time, double drive_detuning,
                               int n_seg, bool robust, IonPair ions = {});

/// x = sqrt(Xi / lambda) ker(A) v_lambda for the eigenpair of ker^T M ker with
/// the largest |lambda| whose sign matches Xi.
SynthesisResult synthesize(const SynthesisProblem& problem, double target_angle);

/// Full-length angle matrix M (N_seg x N_seg) for the given pair.
Eigen::MatrixXd angle_matrix(const ModeSpectrum& modes, double gate_time, std::span<const double> detunings,
                             int n_seg, IonPair ions);

struct ModeResiduals {
  double alpha_end = 0.0;   // |alpha_m(tau)|
  double alpha_bar = 0.0;   // |int_0^tau alpha_m dt|
  double beta_end = 0.0;    // |beta_m(tau)|
  double dalpha_end = 0.0;  // |d alpha_m / d delta_m (tau)|
};

struct WaveformReport {
  std::vector<ModeResiduals> modes;
  double theta = 0.0;
  double peak_rabi = 0.0;
};

WaveformReport validate_waveform(const Waveform& w, const ModeSpectrum& modes, IonPair ions = {});

nlohmann::json to_json(const WaveformReport& r);

} // namespace msforge
