#pragma once

// TV-penalized inversion with the dual optimality certificate as stopping
// rule, silent-space analysis of edge supports, and certifiers/oracles for
// TV-minimality of magnetizations.

#include <cstdint>
#include <optional>
#include <string>

#include "loopfield/field.hpp"

namespace loopfield {

struct SolveOptions {
  double lambda = 1.0;
  int max_iters = 20000;
  double tol = 1e-8;   // certificate tolerance
  int restarts = 1;    // multi-start count (first start is the zero vector)
  std::uint64_t seed = 0;

  void validate() const;
};

// Both optimality conditions, normalized by lambda/2: passed requires
// max_offsupport <= 1 + tol and max_onsupport_gap <= tol.
struct CertReport {
  double max_offsupport = 0.0;
  double max_onsupport_gap = 0.0;
  bool passed = false;
  double tol = 0.0;
};

struct Solution {
  EdgeSupport support;
  Eigen::VectorXd weights;  // aligned with support.edges
  double objective = 0.0;
  Reading residual;  // f - A w, unscaled
  CertReport certificate;
  int iterations = 0;
  bool converged = false;

  EdgeMeasure as_measure() const;
};

CertReport optimality_certificate(const Eigen::VectorXd& w, const Reading& f,
                                  const MeasurementSetup& s, const EdgeSupport& support,
                                  double lambda, double tol);

// Minimizes |f - A w|^2_rho + lambda sum |w_e| by monotone accelerated
// proximal gradient; stops when the certificate passes at opts.tol.
Solution solve_ep2(const Reading& f, const MeasurementSetup& s, const EdgeSupport& support,
                   const SolveOptions& opts);
Solution solve_ep2_from(const Reading& f, const MeasurementSetup& s, const EdgeSupport& support,
                        const SolveOptions& opts, const Eigen::VectorXd& w0);

// Warm-started solves along a strictly decreasing lambda schedule; optional
// additive noise on f.
std::vector<Solution> lambda_path(const Reading& f, const MeasurementSetup& s,
                                  const EdgeSupport& support, const std::vector<double>& schedule,
                                  const Reading* noise, const SolveOptions& base);

// Fundamental cycles of a spanning forest of the support graph, as unit
// loop measures: a basis of the silent space, of dimension E - V + C.
std::vector<EdgeMeasure> silent_basis(const EdgeSupport& support);

// Same cycles as vertex loops (ccw-normalized).
std::vector<OrientedLoop> fundamental_cycles(const EdgeSupport& support);

bool treelike_check(const EdgeSupport& support);

struct KernelReport {
  std::vector<double> singular_values;
  int nullity = 0;      // columns minus singular values above threshold
  int cycle_count = 0;  // E - V + C
  bool sufficient = false;
  double max_basis_reading = 0.0;  // worst forward reading over basis loops
  double threshold = 0.0;
};

// SVD rank analysis of the assembled operator; numerically S-sufficient when
// the numerical nullity equals the cycle-space dimension.
KernelReport kernel_dimension_check(const MeasurementSetup& s, const EdgeSupport& support,
                                    double threshold);

enum class MinimalityVerdict { Strict, Minimal, Undetermined, Violated };

std::string to_string(MinimalityVerdict v);

struct MinimalityReport {
  MinimalityVerdict verdict = MinimalityVerdict::Undetermined;
  std::vector<EdgeId> witness;  // violating cycle when verdict == Violated
  std::size_t cycles_checked = 0;
};

enum class CertifyMode { Exhaustive, Sampled };

// Checks len(cycle in Z) <= len(cycle off Z) over simple cycles of the
// support graph, Z being the edge carrier of mu (dipoles ignored).
// Exhaustive mode enumerates all simple cycles (guard: 1e6); sampled mode
// tests fundamental cycles plus random cycle-space elements and answers
// Undetermined instead of Strict/Minimal.
MinimalityReport certify_tv_minimal(const Magnetization& mu, const EdgeSupport& support,
                                    CertifyMode mode, int samples = 200, std::uint64_t seed = 0);

struct Ep1Report {
  double min_tv = 0.0;
  double tv_mu0 = 0.0;
  std::vector<double> best_coeffs;
  bool unique_point = true;
  std::string argmin_kind;  // "point" or "interval/face"
};

// Brute-force minimization of TV over mu0 plus the cycle space (dimension
// <= 3), by grid scan plus exact coordinate refinement.
Ep1Report ep1_oracle(const EdgeMeasure& mu0, const EdgeSupport& support, int resolution);

struct VariationalReport {
  double min_pairing = 0.0;
  bool has_witness = false;
  EdgeMeasure witness;  // silent direction with negative pairing, when found
  int n_tested = 0;
};

// Evaluates the variational pairing against +-basis elements and random
// unit-TV cycle combinations; a negative minimum certifies non-minimality.
VariationalReport variational_certify(const Magnetization& mu, const EdgeSupport& support,
                                      int samples, std::uint64_t seed);

}  // namespace loopfield
