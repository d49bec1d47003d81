#include "djcm/observables.hpp"

#include <cmath>
#include <sstream>

namespace djcm {

namespace {

// One sector's amplitudes for every n <= nmax at fixed t; the observable
// sums below walk these arrays in ascending n.
struct AmplitudeSlice {
    std::vector<Complex> a, b, d;
};

AmplitudeSlice slice_at(const ClosedFormEvaluator& amps, double t) {
    const int nmax = amps.nmax();
    AmplitudeSlice s;
    s.a.reserve(static_cast<std::size_t>(nmax) + 1);
    s.b.reserve(static_cast<std::size_t>(nmax) + 1);
    s.d.reserve(static_cast<std::size_t>(nmax) + 1);
    for (int n = 0; n <= nmax; ++n) {
        const AmplitudeSet set = amps.at(n, t);
        s.a.push_back(set.a);
        s.b.push_back(set.b);
        s.d.push_back(set.d);
    }
    return s;
}

Complex kahan_conj_product_sum(const ClosedFormEvaluator& amps,
                               const std::vector<Complex>& upper,
                               const std::vector<Complex>& lower, int shift) {
    // sum_n q_{n+shift} conj(q_n) upper[n+shift] conj(lower[n])
    const int nmax = amps.nmax();
    KahanSum<Complex> acc;
    for (int n = 0; n + shift <= nmax; ++n) {
        const Complex w = amps.weight(n + shift) * std::conj(amps.weight(n));
        acc.add(w * upper[static_cast<std::size_t>(n + shift)] *
                std::conj(lower[static_cast<std::size_t>(n)]));
    }
    return acc.value();
}

}  // namespace

ReducedDensityMatrix reduced_density(const ClosedFormEvaluator& amps, double t) {
    const ModelConfig& cfg = amps.config();
    const int nmax = amps.nmax();
    const int k = cfg.k;
    const AmplitudeSlice s = slice_at(amps, t);

    KahanSum<double> r11, r22, r44;
    for (int n = 0; n <= nmax; ++n) {
        const double p = amps.pn(n);
        r11.add(p * std::norm(s.a[static_cast<std::size_t>(n)]));
        r22.add(p * std::norm(s.b[static_cast<std::size_t>(n)]));
        r44.add(p * std::norm(s.d[static_cast<std::size_t>(n)]));
    }
    const Complex r12 = kahan_conj_product_sum(amps, s.a, s.b, k) *
                        std::polar(1.0, cfg.delta1 * t);
    const Complex r14 = kahan_conj_product_sum(amps, s.a, s.d, 2 * k) *
                        std::polar(1.0, (cfg.delta1 + cfg.delta3) * t);
    const Complex r24 = kahan_conj_product_sum(amps, s.b, s.d, k) *
                        std::polar(1.0, cfg.delta3 * t);

    // Remaining entries come from the degenerate-solution equalities
    // (rho33 = rho23 = rho22, rho13 = rho12, rho34 = rho24) and Hermiticity.
    ReducedDensityMatrix r;
    r.t = cfg.lambda * t;
    r.rho.setZero();
    r.rho(0, 0) = r11.value();
    r.rho(1, 1) = r22.value();
    r.rho(2, 2) = r22.value();
    r.rho(3, 3) = r44.value();
    r.rho(0, 1) = r12;
    r.rho(0, 2) = r12;
    r.rho(0, 3) = r14;
    r.rho(1, 2) = r22.value();
    r.rho(1, 3) = r24;
    r.rho(2, 3) = r24;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < i; ++j) {
            r.rho(i, j) = std::conj(r.rho(j, i));
        }
    }
    return r;
}

void check_density(const ReducedDensityMatrix& r) {
    const auto& rho = r.rho;
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
        throw ConsistencyError("density matrix not Hermitian");
    }
    if (std::abs(rho.trace().real() - 1.0) > 1e-10 || std::abs(rho.trace().imag()) > 1e-10) {
        throw ConsistencyError("density matrix trace != 1");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) {
        throw ConsistencyError("density matrix not positive semidefinite");
    }
    const double structure =
        std::max({std::abs(rho(1, 1) - rho(2, 2)), std::abs(rho(1, 2) - rho(1, 1)),
                  std::abs(rho(0, 1) - rho(0, 2)), std::abs(rho(1, 3) - rho(2, 3))});
    if (structure > 1e-10) {
        throw ConsistencyError("degenerate-solution structure equalities violated");
    }
}

double linear_entropy(const ReducedDensityMatrix& r) {
    const auto& rho = r.rho;
    const double generic = 1.0 - (rho * rho).trace().real();

    const double r11 = rho(0, 0).real();
    const double r22 = rho(1, 1).real();
    const double r44 = rho(3, 3).real();
    const double specialised =
        1.0 - (r11 * r11 + 4.0 * r22 * r22 + r44 * r44 +
               4.0 * (std::norm(rho(0, 1)) + std::norm(rho(1, 3))) +
               2.0 * std::norm(rho(0, 3)));
    if (std::abs(generic - specialised) > 1e-10) {
        throw ConsistencyError("linear_entropy: generic and structured routes disagree by " +
                               std::to_string(generic - specialised));
    }
    return generic;
}

double concurrence(const ReducedDensityMatrix& r) {
    const auto& rho = r.rho;
    double sum = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            if (i == j) continue;
            sum += (rho(i, i) * rho(j, j) - rho(i, j) * rho(j, i)).real();
        }
    }
    return std::sqrt(std::max(2.0 * sum, 0.0));
}

std::pair<double, double> photon_moments(const ClosedFormEvaluator& amps, double t) {
    const int nmax = amps.nmax();
    const int k = amps.config().k;
    KahanSum<double> m1, m2;
    for (int n = 0; n <= nmax; ++n) {
        const AmplitudeSet s = amps.at(n, t);
        const double pa = std::norm(s.a);
        const double pb = std::norm(s.b);
        const double pd = std::norm(s.d);
        const double p = amps.pn(n);
        m1.add(p * (n * pa + 2.0 * (n + k) * pb + (n + 2.0 * k) * pd));
        m2.add(p * (static_cast<double>(n) * n * pa +
                    2.0 * (n + k) * static_cast<double>(n + k) * pb +
                    (n + 2.0 * k) * (n + 2.0 * k) * pd));
    }
    return {m1.value(), m2.value()};
}

double mandel_q(double mean_n, double mean_n2) {
    if (!(mean_n > 0.0)) {
        throw UndefinedStatisticError("mandel_q: <n> must be positive");
    }
    return (mean_n2 - mean_n * mean_n) / mean_n - 1.0;
}

Complex field_moment(const ClosedFormEvaluator& amps, double t, int r) {
    if (r < 1) throw std::invalid_argument("field_moment: r must be >= 1");
    const int nmax = amps.nmax();
    const int k = amps.config().k;
    const AmplitudeSlice s = slice_at(amps, t);

    const auto rising_sqrt = [r](int base) {
        double prod = 1.0;
        for (int i = 1; i <= r; ++i) prod *= std::sqrt(static_cast<double>(base + i));
        return prod;
    };

    KahanSum<Complex> acc;
    for (int n = 0; n + r <= nmax; ++n) {
        const std::size_t u = static_cast<std::size_t>(n);
        const std::size_t v = static_cast<std::size_t>(n + r);
        const Complex w = std::conj(amps.weight(n)) * amps.weight(n + r);
        acc.add(w * (rising_sqrt(n) * std::conj(s.a[u]) * s.a[v] +
                     2.0 * rising_sqrt(n + k) * std::conj(s.b[u]) * s.b[v] +
                     rising_sqrt(n + 2 * k) * std::conj(s.d[u]) * s.d[v]));
    }
    return acc.value();
}

std::pair<double, double> squeezing(const ClosedFormEvaluator& amps, double t) {
    const double mean_n = photon_moments(amps, t).first;
    const Complex a1 = field_moment(amps, t, 1);
    const Complex a2 = field_moment(amps, t, 2);
    const double sx = 2.0 * mean_n + 2.0 * a2.real() - 4.0 * a1.real() * a1.real();
    const double sy = 2.0 * mean_n - 2.0 * a2.real() - 4.0 * a1.imag() * a1.imag();
    return {sx, sy};
}

ReducedDensityMatrix reduced_density(const ModelConfig& config, double t, int nmax) {
    return reduced_density(ClosedFormEvaluator(config, nmax), t);
}
std::pair<double, double> photon_moments(const ModelConfig& config, double t, int nmax) {
    return photon_moments(ClosedFormEvaluator(config, nmax), t);
}
Complex field_moment(const ModelConfig& config, double t, int r, int nmax) {
    return field_moment(ClosedFormEvaluator(config, nmax), t, r);
}
std::pair<double, double> squeezing(const ModelConfig& config, double t, int nmax) {
    return squeezing(ClosedFormEvaluator(config, nmax), t);
}

ObservableRecord observables_at(const ClosedFormEvaluator& amps, double t) {
    ObservableRecord rec;
    rec.t = amps.config().lambda * t;
    const ReducedDensityMatrix rho = reduced_density(amps, t);
    rec.entropy = linear_entropy(rho);
    rec.concurrence = concurrence(rho);
    std::tie(rec.mean_n, rec.mean_n2) = photon_moments(amps, t);
    rec.mandel = mandel_q(rec.mean_n, rec.mean_n2);
    std::tie(rec.sx, rec.sy) = squeezing(amps, t);
    return rec;
}

namespace {

// Guard for exact mathematical bounds evaluated in doubles.
constexpr double kBoundGuard = 1e-12;

void check_record(const ObservableRecord& rec, const ReducedDensityMatrix& rho,
                  std::vector<std::string>& failures) {
    const auto fail = [&](const std::string& what) {
        std::ostringstream os;
        os << "t=" << rec.t << ": " << what;
        failures.push_back(os.str());
    };
    try {
        check_density(rho);
    } catch (const ConsistencyError& e) {
        fail(e.what());
    }
    if (rec.entropy < -kBoundGuard || rec.entropy > 0.75 + kBoundGuard) {
        fail("entropy outside [0, 0.75]: " + std::to_string(rec.entropy));
    }
    if (rec.concurrence < 0.0) fail("negative concurrence");
    if (rec.mandel < -1.0 - kBoundGuard) fail("Mandel Q below -1");
    if (rec.sx < -1.0 - kBoundGuard) fail("S_x below -1");
    if (rec.sy < -1.0 - kBoundGuard) fail("S_y below -1");
    if (rec.mean_n2 + kBoundGuard < rec.mean_n * rec.mean_n) {
        fail("<n^2> < <n>^2");
    }
}

}  // namespace

TimeSeries evolve_series(const ModelConfig& config, std::span<const double> scaled_grid) {
    config.validate();
    if (scaled_grid.empty() || scaled_grid.front() != 0.0) {
        throw std::invalid_argument("evolve_series: grid must start at 0");
    }
    for (std::size_t i = 1; i < scaled_grid.size(); ++i) {
        if (!(scaled_grid[i] > scaled_grid[i - 1])) {
            throw std::invalid_argument("evolve_series: grid must be strictly increasing");
        }
    }

    const int nmax = truncation_bound(config.alpha, 1e-12);
    const ClosedFormEvaluator amps(config, nmax);

    TimeSeries series;
    series.config = config;
    series.records.reserve(scaled_grid.size());
    std::vector<std::string> failures;

    for (const double st : scaled_grid) {
        const double t = st / config.lambda;
        try {
            ObservableRecord rec = observables_at(amps, t);
            check_record(rec, reduced_density(amps, t), failures);
            series.records.push_back(rec);
        } catch (const std::exception& e) {
            std::ostringstream os;
            os << "t=" << st << ": " << e.what();
            failures.push_back(os.str());
        }
    }
    if (!failures.empty()) {
        std::ostringstream os;
        os << "evolve_series: " << failures.size() << " point(s) failed; first: "
           << failures.front();
        throw SeriesError(os.str(), std::move(failures));
    }
    return series;
}

std::vector<double> uniform_grid(double tmax, int steps) {
    if (steps < 2) throw std::invalid_argument("uniform_grid: steps must be >= 2");
    if (!(tmax > 0.0)) throw std::invalid_argument("uniform_grid: tmax must be positive");
    std::vector<double> grid(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        grid[static_cast<std::size_t>(i)] = tmax * i / (steps - 1);
    }
    return grid;
}

}  // namespace djcm
