#include "djcm/oracle.hpp"

#include <cmath>
#include <sstream>

namespace djcm {

OracleParams OracleParams::from_model(const ModelConfig& config, double field_omega,
                                      double omega1) {
    config.validate();
    OracleParams p;
    p.field_omega = field_omega;
    p.omega[0] = omega1;
    p.omega[1] = config.delta1 + omega1 - config.k * field_omega;
    p.omega[2] = p.omega[1];  // degenerate middle levels
    p.omega[3] = config.delta3 + p.omega[1] - config.k * field_omega;
    p.lambda = {config.lambda, config.lambda, config.lambda, config.lambda};
    p.chi = config.chi;
    p.k = config.k;
    p.deform = config.deform;
    return p;
}

Eigen::MatrixXd deformed_ladder(const Nonlinearity& f, int nmax) {
    if (nmax < 1) throw std::invalid_argument("deformed_ladder: nmax must be >= 1");
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nmax + 1, nmax + 1);
    for (int n = 1; n <= nmax; ++n) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n)) * f.value(n);
    }
    return a;
}

Eigen::MatrixXcd build_hamiltonian(const OracleParams& p, int nmax) {
    const int m_count = nmax + 1;
    const int dim = 4 * m_count;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);

    // free part + normal-ordered Kerr term chi n(n-1)
    for (int m = 0; m < m_count; ++m) {
        for (int level = 1; level <= 4; ++level) {
            h(basis_index(level, m), basis_index(level, m)) =
                p.omega[static_cast<std::size_t>(level - 1)] + p.field_omega * m +
                p.chi * m * (m - 1.0);
        }
    }

    // couplings lambda_j (A^k sigma_upper,lower + h.c.); the diamond selection
    // rules admit exactly these four transition pairs
    const Eigen::MatrixXd a = deformed_ladder(p.deform, nmax);
    Eigen::MatrixXd ak = a;
    for (int i = 1; i < p.k; ++i) ak = (ak * a).eval();
    struct Transition {
        int upper, lower;
        double coupling;
    };
    const std::array<Transition, 4> transitions{{{1, 2, p.lambda[0]},
                                                 {1, 3, p.lambda[1]},
                                                 {2, 4, p.lambda[2]},
                                                 {3, 4, p.lambda[3]}}};
    for (const auto& tr : transitions) {
        for (int m = 0; m < m_count; ++m) {
            const int mp = m + p.k;
            if (mp >= m_count) break;
            // <upper, m| H |lower, m+k> = lambda * <m| A^k |m+k>
            const double elem = tr.coupling * ak(m, mp);
            h(basis_index(tr.upper, m), basis_index(tr.lower, mp)) += elem;
            h(basis_index(tr.lower, mp), basis_index(tr.upper, m)) += elem;
        }
    }
    return h;
}

ExactPropagator::ExactPropagator(OracleParams p, int nmax)
    : p_(std::move(p)), nmax_(nmax), h_(build_hamiltonian(p_, nmax)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h_);
    if (solver.info() != Eigen::Success) {
        throw NumericRangeError("ExactPropagator: eigendecomposition failed");
    }
    eigenvalues_ = solver.eigenvalues();
    eigenvectors_ = solver.eigenvectors();
}

Eigen::VectorXcd ExactPropagator::evolve(const Eigen::VectorXcd& psi0, double t) const {
    Eigen::VectorXcd coeffs = eigenvectors_.adjoint() * psi0;
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
        coeffs(i) *= std::polar(1.0, -eigenvalues_(i) * t);
    }
    return eigenvectors_ * coeffs;
}

double ExactPropagator::energy(const Eigen::VectorXcd& psi) const {
    return (psi.adjoint() * h_ * psi)(0, 0).real();
}

Eigen::VectorXcd coherent_initial_state(Complex alpha, int occupied_nmax, int space_nmax) {
    if (space_nmax < occupied_nmax) {
        throw std::invalid_argument("coherent_initial_state: space smaller than occupation");
    }
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(4 * (space_nmax + 1));
    for (int n = 0; n <= occupied_nmax; ++n) {
        psi(basis_index(1, n)) = coherent_weight(alpha, n);
    }
    return psi;
}

std::array<Complex, 4> sector_amplitudes(const ExactPropagator& prop, int n, double t) {
    const OracleParams& p = prop.params();
    if (n < 0 || n + 2 * p.k > prop.nmax()) {
        throw std::out_of_range("sector_amplitudes: sector leaves the truncated space");
    }
    Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(prop.dim());
    psi0(basis_index(1, n)) = 1.0;
    const Eigen::VectorXcd psi = prop.evolve(psi0, t);

    // strip the free phases exp(-i (omega_j + Omega m) t)
    const auto pick = [&](int level, int m) {
        return psi(basis_index(level, m)) *
               std::polar(1.0, (p.omega[static_cast<std::size_t>(level - 1)] +
                                p.field_omega * m) *
                                   t);
    };
    return {pick(1, n), pick(2, n + p.k), pick(3, n + p.k), pick(4, n + 2 * p.k)};
}

AmplitudeTrajectory integrate_amplitudes(const OracleParams& p, int n,
                                         std::span<const double> t_grid,
                                         const OdeOptions& opt) {
    if (n < 0) throw std::out_of_range("integrate_amplitudes: n must be >= 0");
    const int k = p.k;
    const Nonlinearity& f = p.deform;

    // Eq.-of-motion coefficients of sector n; the four couplings stay
    // independent here (no degeneracy assumed).
    const double f1 = p.lambda[0] * std::exp(f.log_weight(n + k) - f.log_weight(n));
    const double f2 = p.lambda[1] * std::exp(f.log_weight(n + k) - f.log_weight(n));
    const double g1 = p.lambda[2] * std::exp(f.log_weight(n + 2 * k) - f.log_weight(n + k));
    const double g2 = p.lambda[3] * std::exp(f.log_weight(n + 2 * k) - f.log_weight(n + k));
    const double v1 = p.chi * n * (n - 1.0);
    const double v2 = p.chi * (n + k) * (n + k - 1.0);
    const double v3 = p.chi * (n + 2.0 * k) * (n + 2.0 * k - 1.0);
    const double d1 = p.delta1(), d2 = p.delta2(), d3 = p.delta3(), d4 = p.delta4();

    using State = std::array<Complex, 4>;
    const Complex mi{0.0, -1.0};
    const auto rhs = [&](double t, const State& y, State& dy) {
        const Complex e1 = std::polar(1.0, d1 * t);
        const Complex e2 = std::polar(1.0, d2 * t);
        const Complex e3 = std::polar(1.0, d3 * t);
        const Complex e4 = std::polar(1.0, d4 * t);
        const auto& [a, b, c, d] = y;
        dy[0] = mi * (v1 * a + f1 * std::conj(e1) * b + f2 * std::conj(e2) * c);
        dy[1] = mi * (v2 * b + f1 * e1 * a + g1 * std::conj(e3) * d);
        dy[2] = mi * (v2 * c + f2 * e2 * a + g2 * std::conj(e4) * d);
        dy[3] = mi * (v3 * d + g1 * e3 * b + g2 * e4 * c);
    };

    AmplitudeTrajectory traj;
    traj.n = n;
    traj.t.reserve(t_grid.size());
    traj.amps.reserve(t_grid.size());
    integrate_dop853<4>(
        rhs, State{Complex{1.0, 0.0}, {}, {}, {}}, 0.0, t_grid,
        [&](double t, const State& y) {
            traj.t.push_back(t);
            traj.amps.push_back(y);
        },
        opt);
    return traj;
}

namespace {

// Views the flat state as components psi(level, m).
struct StateView {
    const Eigen::VectorXcd& psi;
    int m_count;
    Complex operator()(int level, int m) const { return psi(basis_index(level, m)); }
};

}  // namespace

ReducedDensityMatrix reduced_density_from_state(const Eigen::VectorXcd& psi_lab,
                                                const OracleParams& p, double t) {
    const int m_count = static_cast<int>(psi_lab.size()) / 4;
    const StateView v{psi_lab, m_count};

    ReducedDensityMatrix r;
    r.t = p.lambda[0] * t;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            KahanSum<Complex> acc;
            for (int m = 0; m < m_count; ++m) {
                acc.add(v(i + 1, m) * std::conj(v(j + 1, m)));
            }
            r.rho(i, j) = acc.value();
        }
    }
    // Rotate into the interaction-frame convention; the rotation generator is
    // the atomic part 2k sigma11 + k (sigma22 + sigma33) of the conserved
    // excitation operator, which removes all Omega dependence.
    const std::array<double, 4> phase{2.0, 1.0, 1.0, 0.0};
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            r.rho(i, j) *= std::polar(1.0, p.k * p.field_omega * t * (phase[static_cast<std::size_t>(i)] -
                                                                      phase[static_cast<std::size_t>(j)]));
        }
    }
    return r;
}

ObservableRecord observables_from_state(const Eigen::VectorXcd& psi_lab,
                                        const OracleParams& p, double t) {
    const int m_count = static_cast<int>(psi_lab.size()) / 4;
    const StateView v{psi_lab, m_count};

    ObservableRecord rec;
    rec.t = p.lambda[0] * t;

    const ReducedDensityMatrix rho = reduced_density_from_state(psi_lab, p, t);
    rec.entropy = 1.0 - (rho.rho * rho.rho).trace().real();
    double csum = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            if (i != j) csum += (rho.rho(i, i) * rho.rho(j, j) - rho.rho(i, j) * rho.rho(j, i)).real();
        }
    }
    rec.concurrence = std::sqrt(std::max(2.0 * csum, 0.0));

    KahanSum<double> m1, m2;
    for (int m = 0; m < m_count; ++m) {
        double pm = 0.0;
        for (int level = 1; level <= 4; ++level) pm += std::norm(v(level, m));
        m1.add(static_cast<double>(m) * pm);
        m2.add(static_cast<double>(m) * m * pm);
    }
    rec.mean_n = m1.value();
    rec.mean_n2 = m2.value();
    rec.mandel = (rec.mean_n2 - rec.mean_n * rec.mean_n) / rec.mean_n - 1.0;

    // <a^r> with the co-rotating field operator a exp(i Omega t)
    const auto field_pow = [&](int r) {
        KahanSum<Complex> acc;
        for (int m = 0; m + r < m_count; ++m) {
            double fac = 1.0;
            for (int i = 1; i <= r; ++i) fac *= std::sqrt(static_cast<double>(m + i));
            Complex term{};
            for (int level = 1; level <= 4; ++level) {
                term += std::conj(v(level, m)) * v(level, m + r);
            }
            acc.add(fac * term);
        }
        return acc.value() * std::polar(1.0, p.field_omega * r * t);
    };
    const Complex a1 = field_pow(1);
    const Complex a2 = field_pow(2);
    rec.sx = 2.0 * rec.mean_n + 2.0 * a2.real() - 4.0 * a1.real() * a1.real();
    rec.sy = 2.0 * rec.mean_n - 2.0 * a2.real() - 4.0 * a1.imag() * a1.imag();
    return rec;
}

TimeSeries oracle_series(const ModelConfig& config, std::span<const double> scaled_grid) {
    config.validate();
    const OracleParams p = OracleParams::from_model(config);
    const int occupied = truncation_bound(config.alpha, 1e-12);
    // pad so the top occupied sector's |4, n+2k> row keeps its couplings
    const int space = occupied + 2 * config.k;
    const ExactPropagator prop(p, space);
    const Eigen::VectorXcd psi0 = coherent_initial_state(config.alpha, occupied, space);

    TimeSeries series;
    series.config = config;
    series.records.reserve(scaled_grid.size());
    for (const double st : scaled_grid) {
        const double t = st / config.lambda;
        series.records.push_back(observables_from_state(prop.evolve(psi0, t), p, t));
    }
    return series;
}

double ComparisonReport::worst() const {
    double w = 0.0;
    for (const auto& c : columns) w = std::max(w, c.max_abs);
    return w;
}

std::string ComparisonReport::to_string() const {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific;
    for (const auto& c : columns) {
        os << (c.max_abs <= tolerance ? "  ok  " : " FAIL ") << c.column
           << "  max|dev| = " << c.max_abs << "  at t = " << c.at_t << "\n";
    }
    os << (pass ? "PASS" : "FAIL") << " (tolerance " << tolerance << ")\n";
    return os.str();
}

ComparisonReport compare(const TimeSeries& closed, const TimeSeries& oracle,
                         double tolerance) {
    if (closed.records.size() != oracle.records.size()) {
        throw std::invalid_argument("compare: series lengths differ");
    }
    using Field = double ObservableRecord::*;
    const std::array<std::pair<const char*, Field>, 7> fields{{
        {"entropy", &ObservableRecord::entropy},
        {"concurrence", &ObservableRecord::concurrence},
        {"mandel_q", &ObservableRecord::mandel},
        {"mean_n", &ObservableRecord::mean_n},
        {"mean_n2", &ObservableRecord::mean_n2},
        {"sx", &ObservableRecord::sx},
        {"sy", &ObservableRecord::sy},
    }};

    ComparisonReport report;
    report.tolerance = tolerance;
    for (const auto& [name, field] : fields) {
        ColumnDeviation dev;
        dev.column = name;
        for (std::size_t i = 0; i < closed.records.size(); ++i) {
            const auto& a = closed.records[i];
            const auto& b = oracle.records[i];
            if (a.t != b.t) throw std::invalid_argument("compare: grids differ");
            const double d = std::abs(a.*field - b.*field);
            if (d > dev.max_abs) {
                dev.max_abs = d;
                dev.at_t = a.t;
            }
        }
        report.columns.push_back(dev);
    }
    report.pass = report.worst() <= tolerance;
    return report;
}

}  // namespace djcm
