// Brute-force verification path, independent of the closed form: the full
// Hamiltonian on a truncated Fock space evolved by Hermitian
// eigendecomposition, the unreduced four-amplitude ODE system integrated
// adaptively, and observable extraction straight from operator expectations.

#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <string>
#include <vector>

#include "djcm/dop853.hpp"
#include "djcm/model.hpp"
#include "djcm/observables.hpp"

namespace djcm {

// Unreduced parameters of the Hamiltonian: four atomic frequencies, the
// field frequency, four couplings. The closed form exists only under
// omega2 == omega3 and equal couplings; this struct does not assume either.
struct OracleParams {
    std::array<double, 4> omega{};   // omega_1 .. omega_4
    double field_omega = 0.0;        // Omega
    std::array<double, 4> lambda{};  // lambda_1 .. lambda_4
    double chi = 0.0;
    int k = 1;
    Nonlinearity deform;

    // Embeds the reduced model. The absolute frequencies are gauge choices
    // (every reported observable must come out independent of them); the
    // nontrivial defaults make that a live check rather than a tautology.
    static OracleParams from_model(const ModelConfig& config, double field_omega = 0.37,
                                   double omega1 = 1.0);

    double delta1() const { return omega[1] - omega[0] + k * field_omega; }
    double delta2() const { return omega[2] - omega[0] + k * field_omega; }
    double delta3() const { return omega[3] - omega[1] + k * field_omega; }
    double delta4() const { return omega[3] - omega[2] + k * field_omega; }
};

/// Basis layout of the full space: Fock-major, index = 4*m + (level-1) for
/// atomic level in 1..4 and photon number m in 0..nmax.
inline int basis_index(int level, int m) { return 4 * m + (level - 1); }

/// Deformed ladder A = a f(n) on {|0>..|nmax>}: A[n-1, n] = sqrt(n) f(n).
/// The creation operator is its transpose (entries are real).
Eigen::MatrixXd deformed_ladder(const Nonlinearity& f, int nmax);

/// Dense Hamiltonian on the 4*(nmax+1)-dimensional space.
Eigen::MatrixXcd build_hamiltonian(const OracleParams& p, int nmax);

// Diagonalises H once; evolution at any t is then two dense mat-vecs.
class ExactPropagator {
  public:
    ExactPropagator(OracleParams p, int nmax);

    const OracleParams& params() const { return p_; }
    int nmax() const { return nmax_; }
    int dim() const { return 4 * (nmax_ + 1); }
    const Eigen::MatrixXcd& hamiltonian() const { return h_; }

    /// psi(t) = exp(-i H t) psi0 (lab frame).
    Eigen::VectorXcd evolve(const Eigen::VectorXcd& psi0, double t) const;

    /// <psi0| H |psi0>, for conservation monitoring.
    double energy(const Eigen::VectorXcd& psi) const;

  private:
    OracleParams p_;
    int nmax_;
    Eigen::MatrixXcd h_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXcd eigenvectors_;
};

/// |1> (x) |alpha> with the coherent expansion cut at occupied_nmax; the
/// space extends to space_nmax >= occupied_nmax + 2k so no occupied sector
/// touches the truncation boundary.
Eigen::VectorXcd coherent_initial_state(Complex alpha, int occupied_nmax, int space_nmax);

/// Interaction-frame amplitudes (A, B, C, D) of sector n at time t, obtained
/// by evolving |1, n> with the exact propagator and stripping the free
/// phases exp(-i (omega_j + Omega m) t).
std::array<Complex, 4> sector_amplitudes(const ExactPropagator& prop, int n, double t);

/// Trajectories of the unreduced amplitude ODE system, integrated with
/// DOP853 in the interaction frame (no B = C assumption imposed).
struct AmplitudeTrajectory {
    int n = 0;
    std::vector<double> t;
    std::vector<std::array<Complex, 4>> amps;  // A, B, C, D
};
AmplitudeTrajectory integrate_amplitudes(const OracleParams& p, int n,
                                         std::span<const double> t_grid,
                                         const OdeOptions& opt = {});

/// rho_A by partial trace over the photon index, rotated into the
/// interaction-frame convention (conjugation by exp(i k Omega t diag(2,1,1,0))).
ReducedDensityMatrix reduced_density_from_state(const Eigen::VectorXcd& psi_lab,
                                                const OracleParams& p, double t);

/// Full record from a lab-frame state: S and C from the partial trace, <n>
/// and <n^2> from the number operator, quadratures from <a^r> with the field
/// operator rotated by exp(i Omega t).
ObservableRecord observables_from_state(const Eigen::VectorXcd& psi_lab,
                                        const OracleParams& p, double t);

/// End-to-end independent pipeline over a scaled time grid, mirroring
/// evolve_series.
TimeSeries oracle_series(const ModelConfig& config, std::span<const double> scaled_grid);

// Column-wise comparison of two series on identical grids.
struct ColumnDeviation {
    std::string column;
    double max_abs = 0.0;
    double at_t = 0.0;
};
struct ComparisonReport {
    std::vector<ColumnDeviation> columns;
    double tolerance = 0.0;
    bool pass = false;
    double worst() const;
    std::string to_string() const;
};
ComparisonReport compare(const TimeSeries& closed, const TimeSeries& oracle,
                         double tolerance);

}  // namespace djcm
