// Core model for a diamond-configuration four-level atom coupled to a
// single-mode cavity field: deformed coupling functions, per-Fock-sector
// interaction coefficients, the cubic characteristic equation of the
// degenerate (omega2 == omega3, equal couplings) case, and the closed-form
// probability amplitudes built from its roots.

#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace djcm {

using Complex = std::complex<double>;

/// Closed-form amplitudes are invalid when two characteristic roots collide;
/// callers can fall back to the brute-force oracle for that sector.
class DegenerateSpectrumError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A quantity left the representable double range (factorial ratios etc.).
class NumericRangeError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Statistic undefined for the given state (e.g. Mandel Q of the vacuum).
class UndefinedStatisticError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An internal cross-check failed; indicates a bug, not bad input.
class ConsistencyError : public std::logic_error {
    using std::logic_error::logic_error;
};

// ---------------------------------------------------------------------------
// Nonlinearity f(n)

enum class DeformKind { Constant, Harmonious, Tabulated };

// Deformation function f(n) of the intensity-dependent coupling A = a f(n).
//
// Constant   : f(n) = 1 (plain Jaynes-Cummings coupling).
// Harmonious : f(n) = 1/sqrt(n) for n >= 1, f(0) = 1. f(0) never enters the
//              physics (annihilation kills |0>), the value 1 just keeps the
//              function total.
// Tabulated  : user-supplied positive values, f(n) = table[n].
class Nonlinearity {
  public:
    Nonlinearity() = default;

    static Nonlinearity constant() { return Nonlinearity(DeformKind::Constant); }
    static Nonlinearity harmonious() { return Nonlinearity(DeformKind::Harmonious); }
    static Nonlinearity tabulated(std::vector<double> values);

    DeformKind kind() const { return kind_; }
    std::string_view name() const;

    /// f(n). Throws std::out_of_range for a Tabulated index past the table.
    double value(int n) const;

    /// [f(n)]! = f(n) f(n-1) ... f(1), with [f(0)]! = 1.
    /// Accumulated in log space; throws NumericRangeError if the product
    /// leaves the double range.
    double factorial(int n) const;

    /// log([f(n)]!)
    double log_factorial(int n) const;

    /// 0.5*log(n!) + log([f(n)]!). Differences of this weight give the
    /// coupling ratios sqrt(m!/n!)*[f(m)]!/[f(n)]! in one exp() call, and it
    /// vanishes identically for Harmonious, so the flattening f = g = lambda
    /// comes out bit-exact.
    double log_weight(int n) const;

    bool operator==(const Nonlinearity&) const = default;

  private:
    explicit Nonlinearity(DeformKind k, std::vector<double> table = {})
        : kind_(k), table_(std::move(table)) {}

    DeformKind kind_ = DeformKind::Constant;
    std::vector<double> table_;
};

// ---------------------------------------------------------------------------
// Configuration of the degenerate closed-form model

// All frequencies are in units of the coupling constant's scale; hbar = 1.
// Only the two detunings delta1 = omega2 - omega1 + k*Omega and
// delta3 = omega4 - omega2 + k*Omega enter the closed form (omega2 == omega3
// and equal couplings are built into this parametrisation). The individual
// atomic/field frequencies live in OracleParams.
struct ModelConfig {
    double lambda = 1.0;   // common atom-field coupling, > 0
    double chi = 0.0;      // Kerr strength, >= 0
    double delta1 = 0.0;   // detuning of the 1 <-> 2,3 transitions
    double delta3 = 0.0;   // detuning of the 2,3 <-> 4 transitions
    int k = 1;             // photons exchanged per transition, >= 1
    Complex alpha{3.16227766016837933, 0.0};  // initial coherent amplitude, |alpha|^2 = 10
    Nonlinearity deform;

    /// Throws std::invalid_argument on out-of-domain parameters.
    void validate() const;
};

// ---------------------------------------------------------------------------
// Per-sector data

// Effective couplings and Kerr shifts of Fock sector n:
//   f = lambda sqrt((n+k)!/n!)   [f(n+k)]!/[f(n)]!
//   g = lambda sqrt((n+2k)!/(n+k)!) [f(n+2k)]!/[f(n+k)]!
//   v1 = chi n(n-1), v2 = chi (n+k)(n+k-1), v3 = chi (n+2k)(n+2k-1)
struct InteractionCoefficients {
    double f = 0.0;
    double g = 0.0;
    double v1 = 0.0;
    double v2 = 0.0;
    double v3 = 0.0;
    int n = 0;
};

// mu^3 + x1 mu^2 + x2 mu + x3 = 0
struct CubicCoefficients {
    double x1 = 0.0;
    double x2 = 0.0;
    double x3 = 0.0;
};

// Real roots of the characteristic cubic, sorted mu[0] >= mu[1] >= mu[2],
// plus the auxiliary angle of the trigonometric formula.
struct RootTriple {
    std::array<double, 3> mu{};
    double phi = 0.0;
};

// Partial-fraction coefficients b_j = 2f / ((mu_j - mu_k)(mu_j - mu_l)).
// They satisfy sum b_j = 0 and sum mu_j b_j = 0, which is what makes the
// closed form meet the initial conditions.
struct BCoefficients {
    std::array<double, 3> b{};
};

// Closed-form amplitudes of one Fock sector at one time:
// a = A(n,t), b = B(n+k,t) (= C(n+k,t)), d = D(n+2k,t).
struct AmplitudeSet {
    Complex a;
    Complex b;
    Complex d;
    int n = 0;
    double t = 0.0;
};

/// | |a|^2 + 2|b|^2 + |d|^2 - 1 |, the per-sector norm defect.
double unitarity_defect(const AmplitudeSet& s);

// ---------------------------------------------------------------------------
// Operations

/// Coherent-state weight q_n = exp(-|alpha|^2/2) alpha^n / sqrt(n!),
/// evaluated in log space (safe for n up to several thousand).
Complex coherent_weight(Complex alpha, int n);

/// Smallest Nmax whose coherent tail sum_{n>Nmax} |q_n|^2 drops below
/// epsilon, by direct accumulation, but never less than the safety floor
/// ceil(|alpha|^2 + 10 sqrt(|alpha|^2+1) + 20).
int truncation_bound(Complex alpha, double epsilon);

InteractionCoefficients interaction_coeffs(const ModelConfig& config, int n);

CubicCoefficients cubic_coeffs(const InteractionCoefficients& ic, double delta1,
                               double delta3);

/// Trigonometric solution of the (three-real-root) cubic followed by two
/// Newton polish steps. Throws DegenerateSpectrumError in the triple/complex
/// root regime.
RootTriple solve_cubic(const CubicCoefficients& c);

/// Throws DegenerateSpectrumError when the smallest root separation is below
/// 1e-9 * max|mu_j|.
BCoefficients b_coeffs(const RootTriple& roots, double f);

/// Closed-form amplitudes of sector n at (physical) time t >= 0.
AmplitudeSet amplitudes_at(const ModelConfig& config, int n, double t);

// ---------------------------------------------------------------------------
// Cached evaluator

// Solves the characteristic problem once per sector n <= nmax and exposes
// cheap amplitude evaluation at arbitrary t. Immutable after construction;
// safe to share across threads.
class ClosedFormEvaluator {
  public:
    ClosedFormEvaluator(ModelConfig config, int nmax);

    const ModelConfig& config() const { return config_; }
    int nmax() const { return nmax_; }

    AmplitudeSet at(int n, double t) const;

    /// q_n of the initial coherent state (0 for n > nmax).
    Complex weight(int n) const;

    /// P_n = |q_n|^2.
    double pn(int n) const;

  private:
    struct Mode {
        std::array<double, 3> mu{};
        std::array<double, 3> ca{};  // A prefactors
        std::array<double, 3> cb{};  // B prefactors
        std::array<double, 3> cd{};  // D prefactors
    };

    ModelConfig config_;
    int nmax_;
    std::vector<Mode> modes_;
    std::vector<Complex> q_;
};

// ---------------------------------------------------------------------------
// Compensated accumulation

// Kahan summation; used wherever sums over the Fock index feed reported
// numbers, so results are bit-reproducible with a fixed accumulation order.
template <class T>
class KahanSum {
  public:
    void add(const T& x) {
        const T y = x - carry_;
        const T t = sum_ + y;
        carry_ = (t - sum_) - y;
        sum_ = t;
    }
    T value() const { return sum_; }

  private:
    T sum_{};
    T carry_{};
};

}  // namespace djcm
