#include "djcm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace djcm {

namespace {

// exp with an explicit range guard; the factorial ratios can leave the
// double range long before the physics becomes meaningful.
double checked_exp(double x, const char* what) {
    if (x > 709.0 || x < -745.0) {
        throw NumericRangeError(std::string(what) + ": exponent " + std::to_string(x) +
                                " outside double range");
    }
    return std::exp(x);
}

double log_factorial_int(int n) {
    return std::lgamma(static_cast<double>(n) + 1.0);
}

}  // namespace

// ---------------------------------------------------------------------------
// Nonlinearity

Nonlinearity Nonlinearity::tabulated(std::vector<double> values) {
    if (values.empty()) {
        throw std::invalid_argument("tabulated nonlinearity: empty table");
    }
    for (double v : values) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("tabulated nonlinearity: values must be positive and finite");
        }
    }
    return Nonlinearity(DeformKind::Tabulated, std::move(values));
}

std::string_view Nonlinearity::name() const {
    switch (kind_) {
        case DeformKind::Constant: return "constant";
        case DeformKind::Harmonious: return "harmonious";
        case DeformKind::Tabulated: return "tabulated";
    }
    return "?";
}

double Nonlinearity::value(int n) const {
    if (n < 0) throw std::out_of_range("f(n): n must be >= 0");
    switch (kind_) {
        case DeformKind::Constant:
            return 1.0;
        case DeformKind::Harmonious:
            return n == 0 ? 1.0 : 1.0 / std::sqrt(static_cast<double>(n));
        case DeformKind::Tabulated:
            if (static_cast<std::size_t>(n) >= table_.size()) {
                throw std::out_of_range("f(n): index " + std::to_string(n) +
                                        " past table of size " + std::to_string(table_.size()));
            }
            return table_[static_cast<std::size_t>(n)];
    }
    return 1.0;
}

double Nonlinearity::log_factorial(int n) const {
    if (n < 0) throw std::out_of_range("[f(n)]!: n must be >= 0");
    switch (kind_) {
        case DeformKind::Constant:
            return 0.0;
        case DeformKind::Harmonious:
            // product of 1/sqrt(m) = 1/sqrt(n!)
            return -0.5 * log_factorial_int(n);
        case DeformKind::Tabulated: {
            KahanSum<double> acc;
            for (int m = 1; m <= n; ++m) acc.add(std::log(value(m)));
            return acc.value();
        }
    }
    return 0.0;
}

double Nonlinearity::factorial(int n) const {
    return checked_exp(log_factorial(n), "[f(n)]!");
}

double Nonlinearity::log_weight(int n) const {
    // For Harmonious the two halves cancel exactly: 0.5*lg - 0.5*lg == 0.0.
    return 0.5 * log_factorial_int(n) + log_factorial(n);
}

// ---------------------------------------------------------------------------
// ModelConfig

void ModelConfig::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("lambda must be positive and finite");
    }
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (!(chi >= 0.0) || !std::isfinite(chi)) {
        throw std::invalid_argument("chi must be >= 0 and finite");
    }
    if (!std::isfinite(delta1) || !std::isfinite(delta3)) {
        throw std::invalid_argument("detunings must be finite");
    }
    if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag())) {
        throw std::invalid_argument("alpha must be finite");
    }
}

// ---------------------------------------------------------------------------
// Coherent state helpers

Complex coherent_weight(Complex alpha, int n) {
    if (n < 0) throw std::out_of_range("coherent_weight: n must be >= 0");
    const double a2 = std::norm(alpha);
    if (a2 == 0.0) return n == 0 ? Complex{1.0, 0.0} : Complex{0.0, 0.0};
    const double log_mag = -0.5 * a2 + 0.5 * n * std::log(a2) - 0.5 * log_factorial_int(n);
    const double mag = checked_exp(log_mag, "coherent_weight");
    return std::polar(mag, n * std::arg(alpha));
}

int truncation_bound(Complex alpha, double epsilon) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
        throw std::invalid_argument("truncation_bound: epsilon must lie in (0,1)");
    }
    const double a2 = std::norm(alpha);
    const int floor_n = static_cast<int>(std::ceil(a2 + 10.0 * std::sqrt(a2 + 1.0) + 20.0));

    KahanSum<double> acc;
    int n = 0;
    for (; n <= 1000000; ++n) {
        acc.add(std::norm(coherent_weight(alpha, n)));
        if (1.0 - acc.value() < epsilon) break;
    }
    return std::max(n, floor_n);
}

// ---------------------------------------------------------------------------
// Interaction coefficients, cubic, roots

InteractionCoefficients interaction_coeffs(const ModelConfig& config, int n) {
    if (n < 0) throw std::out_of_range("interaction_coeffs: n must be >= 0");
    const int k = config.k;
    const Nonlinearity& f = config.deform;

    InteractionCoefficients ic;
    ic.n = n;
    ic.f = config.lambda * checked_exp(f.log_weight(n + k) - f.log_weight(n), "coupling f");
    ic.g = config.lambda * checked_exp(f.log_weight(n + 2 * k) - f.log_weight(n + k), "coupling g");
    ic.v1 = config.chi * n * (n - 1.0);
    ic.v2 = config.chi * (n + k) * (n + k - 1.0);
    ic.v3 = config.chi * (n + 2.0 * k) * (n + 2.0 * k - 1.0);
    return ic;
}

CubicCoefficients cubic_coeffs(const InteractionCoefficients& ic, double delta1,
                               double delta3) {
    const double f2 = ic.f * ic.f;
    const double g2 = ic.g * ic.g;
    CubicCoefficients c;
    c.x1 = ic.v1 + ic.v2 + ic.v3 - delta1 - 2.0 * delta3;
    c.x2 = -2.0 * (f2 + g2) + ic.v1 * ic.v2 + ic.v1 * ic.v3 + ic.v2 * ic.v3 -
           delta3 * (ic.v1 + ic.v3) - (delta1 + delta3) * (ic.v2 + ic.v3 - delta3);
    c.x3 = -2.0 * ic.v3 * f2 +
           (delta1 + delta3 - ic.v1) * (2.0 * g2 + ic.v3 * delta3 - ic.v3 * ic.v2);
    return c;
}

namespace {

double cubic_value(const CubicCoefficients& c, double mu) {
    return ((mu + c.x1) * mu + c.x2) * mu + c.x3;
}

double cubic_residual_scale(const CubicCoefficients& c) {
    return std::max({1.0, std::abs(c.x1 * c.x1 * c.x1),
                     std::pow(std::abs(c.x2), 1.5), std::abs(c.x3)});
}

}  // namespace

RootTriple solve_cubic(const CubicCoefficients& c) {
    const double p = c.x1 * c.x1 - 3.0 * c.x2;
    if (!(p > 0.0)) {
        throw DegenerateSpectrumError("solve_cubic: x1^2 - 3 x2 <= 0 (triple/complex root regime)");
    }
    const double sqrt_p = std::sqrt(p);
    double arg = (9.0 * c.x1 * c.x2 - 2.0 * c.x1 * c.x1 * c.x1 - 27.0 * c.x3) /
                 (2.0 * p * sqrt_p);
    if (std::abs(arg) > 1.0) {
        // Rounding can push a valid argument marginally past the boundary.
        if (std::abs(arg) > 1.0 + 1e-12) {
            throw DegenerateSpectrumError("solve_cubic: arccos argument " + std::to_string(arg) +
                                          " outside [-1,1]");
        }
        arg = arg > 0.0 ? 1.0 : -1.0;
    }

    RootTriple r;
    r.phi = std::acos(arg) / 3.0;
    for (int j = 0; j < 3; ++j) {
        r.mu[static_cast<std::size_t>(j)] =
            -c.x1 / 3.0 +
            (2.0 / 3.0) * sqrt_p * std::cos(r.phi + 2.0 * std::numbers::pi * j / 3.0);
    }

    // Newton polish tightens residuals and stabilises the b_j downstream.
    for (double& mu : r.mu) {
        for (int it = 0; it < 2; ++it) {
            const double deriv = (3.0 * mu + 2.0 * c.x1) * mu + c.x2;
            if (deriv == 0.0) break;
            mu -= cubic_value(c, mu) / deriv;
        }
    }
    std::sort(r.mu.begin(), r.mu.end(), std::greater<>());

    const double tol = 1e-9 * cubic_residual_scale(c);
    for (double mu : r.mu) {
        if (std::abs(cubic_value(c, mu)) > tol) {
            throw ConsistencyError("solve_cubic: root residual above tolerance");
        }
    }
    if (std::abs(r.mu[0] + r.mu[1] + r.mu[2] + c.x1) > tol) {
        throw ConsistencyError("solve_cubic: root sum != -x1");
    }
    return r;
}

BCoefficients b_coeffs(const RootTriple& roots, double f) {
    const auto& mu = roots.mu;
    const double scale = std::max({std::abs(mu[0]), std::abs(mu[1]), std::abs(mu[2])});
    const double sep = std::min({std::abs(mu[0] - mu[1]), std::abs(mu[0] - mu[2]),
                                 std::abs(mu[1] - mu[2])});
    if (sep <= 1e-9 * scale) {
        throw DegenerateSpectrumError("b_coeffs: root separation " + std::to_string(sep) +
                                      " below degeneracy threshold");
    }
    BCoefficients b;
    for (std::size_t j = 0; j < 3; ++j) {
        const std::size_t k = (j + 1) % 3;
        const std::size_t l = (j + 2) % 3;
        b.b[j] = 2.0 * f / ((mu[j] - mu[k]) * (mu[j] - mu[l]));
    }
    return b;
}

double unitarity_defect(const AmplitudeSet& s) {
    return std::abs(std::norm(s.a) + 2.0 * std::norm(s.b) + std::norm(s.d) - 1.0);
}

// ---------------------------------------------------------------------------
// Closed-form evaluator

namespace {

struct ModeData {
    std::array<double, 3> mu{};
    std::array<double, 3> ca{};
    std::array<double, 3> cb{};
    std::array<double, 3> cd{};
};

ModeData solve_mode(const ModelConfig& config, int n) {
    const InteractionCoefficients ic = interaction_coeffs(config, n);
    const CubicCoefficients cc = cubic_coeffs(ic, config.delta1, config.delta3);
    const RootTriple roots = solve_cubic(cc);
    const BCoefficients b = b_coeffs(roots, ic.f);

    ModeData m;
    m.mu = roots.mu;
    for (std::size_t j = 0; j < 3; ++j) {
        const double mu = roots.mu[j];
        m.ca[j] = ((mu + ic.v3) * (mu + ic.v2 - config.delta3) - 2.0 * ic.g * ic.g) *
                  b.b[j] / (2.0 * ic.f);
        m.cb[j] = -0.5 * (mu + ic.v3) * b.b[j];
        m.cd[j] = ic.g * b.b[j];
    }
    return m;
}

AmplitudeSet evaluate_mode(const ModeData& m, const ModelConfig& config, int n, double t) {
    Complex a{}, b{}, d{};
    for (std::size_t j = 0; j < 3; ++j) {
        const Complex e = std::polar(1.0, m.mu[j] * t);
        a += m.ca[j] * e;
        b += m.cb[j] * e;
        d += m.cd[j] * e;
    }
    a *= std::polar(1.0, -(config.delta1 + config.delta3) * t);
    b *= std::polar(1.0, -config.delta3 * t);
    return AmplitudeSet{a, b, d, n, config.lambda * t};
}

}  // namespace

AmplitudeSet amplitudes_at(const ModelConfig& config, int n, double t) {
    config.validate();
    if (n < 0) throw std::out_of_range("amplitudes_at: n must be >= 0");
    return evaluate_mode(solve_mode(config, n), config, n, t);
}

ClosedFormEvaluator::ClosedFormEvaluator(ModelConfig config, int nmax)
    : config_(std::move(config)), nmax_(nmax) {
    config_.validate();
    if (nmax < 0) throw std::invalid_argument("ClosedFormEvaluator: nmax must be >= 0");
    modes_.reserve(static_cast<std::size_t>(nmax) + 1);
    q_.reserve(static_cast<std::size_t>(nmax) + 1);
    for (int n = 0; n <= nmax; ++n) {
        const ModeData m = solve_mode(config_, n);
        modes_.push_back(Mode{m.mu, m.ca, m.cb, m.cd});
        q_.push_back(coherent_weight(config_.alpha, n));
    }
}

AmplitudeSet ClosedFormEvaluator::at(int n, double t) const {
    if (n < 0 || n > nmax_) throw std::out_of_range("ClosedFormEvaluator::at: n out of range");
    const Mode& m = modes_[static_cast<std::size_t>(n)];
    Complex a{}, b{}, d{};
    for (std::size_t j = 0; j < 3; ++j) {
        const Complex e = std::polar(1.0, m.mu[j] * t);
        a += m.ca[j] * e;
        b += m.cb[j] * e;
        d += m.cd[j] * e;
    }
    a *= std::polar(1.0, -(config_.delta1 + config_.delta3) * t);
    b *= std::polar(1.0, -config_.delta3 * t);
    return AmplitudeSet{a, b, d, n, config_.lambda * t};
}

Complex ClosedFormEvaluator::weight(int n) const {
    if (n < 0) throw std::out_of_range("weight: n must be >= 0");
    if (n > nmax_) return {0.0, 0.0};
    return q_[static_cast<std::size_t>(n)];
}

double ClosedFormEvaluator::pn(int n) const { return std::norm(weight(n)); }

}  // namespace djcm
