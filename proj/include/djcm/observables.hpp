// Observables of the atom-field state built from the closed-form amplitudes:
// reduced atomic density matrix, linear entropy, concurrence, photon-number
// moments and Mandel Q, field moments and normal quadrature squeezing,
// assembled into time series.

#pragma once

#include <Eigen/Dense>
#include <span>
#include <utility>
#include <vector>

#include "djcm/model.hpp"

namespace djcm {

// 4x4 atomic density matrix in the interaction-frame convention (the frame
// in which all reported quantities are independent of the absolute atomic
// and field frequencies).
struct ReducedDensityMatrix {
    Eigen::Matrix4cd rho;
    double t = 0.0;
};

struct ObservableRecord {
    double t = 0.0;          // scaled time lambda*t
    double entropy = 0.0;    // S = 1 - Tr(rho_A^2)
    double concurrence = 0.0;
    double mandel = 0.0;     // Q
    double mean_n = 0.0;
    double mean_n2 = 0.0;
    double sx = 0.0;         // 4 Var(x) - 1
    double sy = 0.0;         // 4 Var(y) - 1
};

struct TimeSeries {
    ModelConfig config;
    std::vector<ObservableRecord> records;
};

/// Aggregated per-point failures from evolve_series.
class SeriesError : public std::runtime_error {
  public:
    SeriesError(std::string message, std::vector<std::string> failures)
        : std::runtime_error(std::move(message)), failures_(std::move(failures)) {}
    const std::vector<std::string>& failures() const { return failures_; }

  private:
    std::vector<std::string> failures_;
};

/// rho_A at physical time t, from the closed-form amplitudes. Sums over the
/// Fock index run in ascending order with compensated accumulation.
ReducedDensityMatrix reduced_density(const ClosedFormEvaluator& amps, double t);

/// Validates Hermiticity (1e-12), unit trace (1e-10), positive
/// semidefiniteness (eigenvalues >= -1e-10) and the degenerate-solution
/// structure equalities (1e-10). Throws ConsistencyError on violation.
void check_density(const ReducedDensityMatrix& r);

/// S = 1 - Tr(rho^2). Also evaluates the expansion specialised to the
/// degenerate structure and insists both routes agree to 1e-10.
double linear_entropy(const ReducedDensityMatrix& r);

/// C = sqrt(2 sum_{i != j} (rho_ii rho_jj - rho_ij rho_ji)), inner sum
/// floored at zero so rounding can not leak a NaN into the series.
double concurrence(const ReducedDensityMatrix& r);

/// (<n>, <n^2>) at physical time t.
std::pair<double, double> photon_moments(const ClosedFormEvaluator& amps, double t);

/// Q = (<n^2> - <n>^2)/<n> - 1. Throws UndefinedStatisticError for <n> <= 0.
double mandel_q(double mean_n, double mean_n2);

/// <a^r> in the interaction frame (the common rotating phase is dropped).
Complex field_moment(const ClosedFormEvaluator& amps, double t, int r);

/// (S_x, S_y) at physical time t.
std::pair<double, double> squeezing(const ClosedFormEvaluator& amps, double t);

// Spec-shaped one-shot overloads; they build a fresh evaluator per call, so
// prefer the ClosedFormEvaluator forms inside loops.
ReducedDensityMatrix reduced_density(const ModelConfig& config, double t, int nmax);
std::pair<double, double> photon_moments(const ModelConfig& config, double t, int nmax);
Complex field_moment(const ModelConfig& config, double t, int r, int nmax);
std::pair<double, double> squeezing(const ModelConfig& config, double t, int nmax);

/// One fully-assembled record at physical time t (record.t is scaled).
ObservableRecord observables_at(const ClosedFormEvaluator& amps, double t);

/// Evaluates the full record at every point of a strictly increasing scaled
/// time grid starting at 0. Enforces the per-record invariants; failures are
/// collected and raised together as a SeriesError naming the offending t.
TimeSeries evolve_series(const ModelConfig& config, std::span<const double> scaled_grid);

/// steps equally spaced scaled times covering [0, tmax].
std::vector<double> uniform_grid(double tmax, int steps);

}  // namespace djcm
