#include <cmath>
#include <numbers>
#include <random>

#include "djcm/model.hpp"
#include "doctest.h"

using namespace djcm;

namespace {

// Independent route to the cubic coefficients: expand
// (mu+u)(mu+v)(mu+w) - 2g^2 (mu+u) - 2f^2 (mu+v) with u = v1-d1-d3, v = v3,
// w = v2-d3. Shares no code with cubic_coeffs.
CubicCoefficients cubic_by_expansion(const InteractionCoefficients& ic, double d1, double d3) {
    const double u = ic.v1 - d1 - d3;
    const double v = ic.v3;
    const double w = ic.v2 - d3;
    const double f2 = ic.f * ic.f, g2 = ic.g * ic.g;
    return CubicCoefficients{u + v + w,
                             u * v + u * w + v * w - 2.0 * (f2 + g2),
                             u * v * w - 2.0 * g2 * u - 2.0 * f2 * v};
}

ModelConfig resonant_config() {
    ModelConfig c;
    c.chi = 0.0;
    c.delta1 = 0.0;
    c.delta3 = 0.0;
    c.k = 1;
    return c;
}

}  // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("deformation function values") {
    CHECK(Nonlinearity::constant().value(5) == 1.0);
    CHECK(Nonlinearity::harmonious().value(4) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(Nonlinearity::harmonious().value(0) == 1.0);
    CHECK(Nonlinearity::constant().value(0) == 1.0);

    const auto tab = Nonlinearity::tabulated({1.0, 0.5, 2.0});
    CHECK(tab.value(2) == 2.0);
    CHECK_THROWS_AS((void)tab.value(3), std::out_of_range);
    CHECK_THROWS_AS((void)Nonlinearity::tabulated({1.0, -1.0}), std::invalid_argument);
    CHECK_THROWS_AS((void)Nonlinearity::tabulated({}), std::invalid_argument);
}

TEST_CASE("deformation factorial") {
    CHECK(Nonlinearity::constant().factorial(0) == 1.0);
    CHECK(Nonlinearity::harmonious().factorial(0) == 1.0);
    CHECK(Nonlinearity::constant().factorial(7) == 1.0);
    CHECK(Nonlinearity::harmonious().factorial(3) ==
          doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-14));

    // cross-check the log-space route against a direct product loop
    for (const auto& f : {Nonlinearity::harmonious(),
                          Nonlinearity::tabulated({1.0, 0.7, 1.3, 0.9, 2.1, 0.4})}) {
        for (int n = 0; n <= 5; ++n) {
            double direct = 1.0;
            for (int m = 1; m <= n; ++m) direct *= f.value(m);
            CHECK(f.factorial(n) == doctest::Approx(direct).epsilon(1e-14));
        }
    }
    // |log| beyond the double exponent range must raise, not overflow silently
    CHECK_THROWS_AS((void)Nonlinearity::harmonious().factorial(400), NumericRangeError);
}

TEST_CASE("coherent weights") {
    CHECK(coherent_weight({0.0, 0.0}, 0) == Complex{1.0, 0.0});
    CHECK(coherent_weight({0.0, 0.0}, 3) == Complex{0.0, 0.0});

    const Complex alpha{std::sqrt(10.0), 0.0};
    SUBCASE("Poissonian mode sits at floor(|alpha|^2)") {
        int argmax = 0;
        double best = 0.0;
        for (int n = 0; n <= 100; ++n) {
            const double p = std::norm(coherent_weight(alpha, n));
            if (p > best) {
                best = p;
                argmax = n;
            }
        }
        // |q_9|^2 == |q_10|^2 analytically for |alpha|^2 = 10; both are valid modes
        CHECK((argmax == 9 || argmax == 10));
    }
    SUBCASE("no overflow at large n") {
        CHECK(std::isfinite(std::abs(coherent_weight(alpha, 4096))));
        CHECK(std::norm(coherent_weight(alpha, 4096)) == 0.0);  // underflows to 0 gracefully
    }
    SUBCASE("complex alpha carries the phase n arg(alpha)") {
        const Complex a{1.0, 2.0};
        const Complex q3 = coherent_weight(a, 3);
        CHECK(std::arg(q3) == doctest::Approx(std::remainder(3 * std::arg(a), 2 * std::numbers::pi))
                                  .epsilon(1e-12));
    }
}

TEST_CASE("truncation bound") {
    const int n0 = truncation_bound({0.0, 0.0}, 1e-12);
    CHECK(n0 == 30);  // pure safety floor for the vacuum

    const Complex alpha{std::sqrt(10.0), 0.0};
    const int nmax = truncation_bound(alpha, 1e-12);
    CHECK(nmax >= 10);

    // recompute the tail directly
    KahanSum<double> head;
    for (int n = 0; n <= nmax; ++n) head.add(std::norm(coherent_weight(alpha, n)));
    CHECK(1.0 - head.value() < 1e-12);

    CHECK_THROWS_AS((void)truncation_bound(alpha, 2.0), std::invalid_argument);
}

TEST_CASE("interaction coefficients") {
    ModelConfig c = resonant_config();
    SUBCASE("constant coupling, k=1, n=0") {
        const auto ic = interaction_coeffs(c, 0);
        CHECK(ic.f == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(ic.g == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
        CHECK(ic.v1 == 0.0);
        CHECK(ic.v2 == 0.0);
        CHECK(ic.v3 == 0.0);
    }
    SUBCASE("Kerr shifts, k=2, n=1") {
        c.k = 2;
        c.chi = 0.4;
        const auto ic = interaction_coeffs(c, 1);
        CHECK(ic.v1 == 0.0);
        CHECK(ic.v2 == doctest::Approx(2.4).epsilon(1e-15));
        CHECK(ic.v3 == doctest::Approx(8.0).epsilon(1e-15));
    }
    SUBCASE("harmonious flattening is exact") {
        c.deform = Nonlinearity::harmonious();
        c.lambda = 0.7365;
        for (int k : {1, 2}) {
            c.k = k;
            for (int n = 0; n <= 50; ++n) {
                const auto ic = interaction_coeffs(c, n);
                CHECK(ic.f == c.lambda);
                CHECK(ic.g == c.lambda);
            }
        }
    }
    SUBCASE("constant coupling matches direct factorial ratio") {
        c.k = 2;
        for (int n = 0; n <= 20; ++n) {
            const auto ic = interaction_coeffs(c, n);
            const double direct_f = std::sqrt(std::tgamma(n + 3.0) / std::tgamma(n + 1.0));
            const double direct_g = std::sqrt(std::tgamma(n + 5.0) / std::tgamma(n + 3.0));
            CHECK(ic.f == doctest::Approx(direct_f).epsilon(1e-12));
            CHECK(ic.g == doctest::Approx(direct_g).epsilon(1e-12));
        }
    }
}

TEST_CASE("cubic coefficients") {
    SUBCASE("resonant constant case") {
        const auto cc = cubic_coeffs({1.0, std::sqrt(2.0), 0, 0, 0, 0}, 0.0, 0.0);
        CHECK(cc.x1 == 0.0);
        CHECK(cc.x2 == doctest::Approx(-6.0).epsilon(1e-15));
        CHECK(cc.x3 == 0.0);
    }
    SUBCASE("flattened case") {
        const auto cc = cubic_coeffs({1.0, 1.0, 0, 0, 0, 0}, 0.0, 0.0);
        CHECK(cc.x2 == doctest::Approx(-4.0).epsilon(1e-15));
    }
    SUBCASE("agrees with the independent expansion") {
        InteractionCoefficients ic{1.0, std::sqrt(2.0), 0.0, 0.0, 0.8, 0};
        auto check_pair = [](const CubicCoefficients& a, const CubicCoefficients& b) {
            CHECK(a.x1 == doctest::Approx(b.x1).epsilon(1e-12));
            CHECK(a.x2 == doctest::Approx(b.x2).epsilon(1e-12));
            CHECK(a.x3 == doctest::Approx(b.x3).epsilon(1e-12));
        };
        check_pair(cubic_coeffs(ic, 7.0, 15.0), cubic_by_expansion(ic, 7.0, 15.0));

        std::mt19937 rng(42);
        std::uniform_real_distribution<double> uni(-20.0, 20.0);
        std::uniform_real_distribution<double> pos(0.1, 10.0);
        for (int trial = 0; trial < 200; ++trial) {
            InteractionCoefficients r{pos(rng), pos(rng), std::abs(uni(rng)),
                                      std::abs(uni(rng)), std::abs(uni(rng)), 0};
            const double d1 = uni(rng), d3 = uni(rng);
            check_pair(cubic_coeffs(r, d1, d3), cubic_by_expansion(r, d1, d3));
        }
    }
}

TEST_CASE("cubic solver") {
    SUBCASE("mu^3 - mu") {
        const auto r = solve_cubic({0.0, -1.0, 0.0});
        CHECK(r.mu[0] == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(r.mu[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
        CHECK(r.mu[2] == doctest::Approx(-1.0).epsilon(1e-14));
    }
    SUBCASE("mu^3 - 6 mu") {
        const auto r = solve_cubic({0.0, -6.0, 0.0});
        CHECK(r.mu[0] == doctest::Approx(std::sqrt(6.0)).epsilon(1e-14));
        CHECK(std::abs(r.mu[1]) < 1e-14);
        CHECK(r.mu[2] == doctest::Approx(-std::sqrt(6.0)).epsilon(1e-14));
    }
    SUBCASE("known integer roots {2, -3, 5}") {
        const auto r = solve_cubic({-4.0, -11.0, 30.0});
        CHECK(r.mu[0] == doctest::Approx(5.0).epsilon(1e-10));
        CHECK(r.mu[1] == doctest::Approx(2.0).epsilon(1e-10));
        CHECK(r.mu[2] == doctest::Approx(-3.0).epsilon(1e-10));
    }
    SUBCASE("round-trips random well-separated roots") {
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> uni(-50.0, 50.0);
        for (int trial = 0; trial < 500; ++trial) {
            double a = uni(rng), b = uni(rng), c = uni(rng);
            if (std::abs(a - b) < 0.5 || std::abs(a - c) < 0.5 || std::abs(b - c) < 0.5) continue;
            const CubicCoefficients cc{-(a + b + c), a * b + a * c + b * c, -a * b * c};
            const auto r = solve_cubic(cc);
            std::array<double, 3> want{a, b, c};
            std::sort(want.begin(), want.end(), std::greater<>());
            for (int j = 0; j < 3; ++j) {
                CHECK(r.mu[j] == doctest::Approx(want[j]).epsilon(1e-10).scale(50.0));
            }
            CHECK(r.mu[0] + r.mu[1] + r.mu[2] == doctest::Approx(-cc.x1).epsilon(1e-10).scale(50.0));
        }
    }
    SUBCASE("degenerate regimes are rejected") {
        CHECK_THROWS_AS((void)solve_cubic({0.0, 0.0, 1.0}), DegenerateSpectrumError);
        CHECK_THROWS_AS((void)solve_cubic({0.0, 1.0, 0.0}), DegenerateSpectrumError);
    }
}

TEST_CASE("partial-fraction coefficients") {
    SUBCASE("roots {sqrt6, -sqrt6, 0} with f = 1") {
        RootTriple r;
        r.mu = {std::sqrt(6.0), 0.0, -std::sqrt(6.0)};
        std::sort(r.mu.begin(), r.mu.end(), std::greater<>());
        const auto b = b_coeffs(r, 1.0);
        // order follows the sorted roots: mu0 = sqrt6, mu1 = 0, mu2 = -sqrt6
        CHECK(b.b[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
        CHECK(b.b[1] == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
        CHECK(b.b[2] == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    }
    SUBCASE("sum identities hold for random roots") {
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> uni(-100.0, 100.0);
        for (int trial = 0; trial < 500; ++trial) {
            RootTriple r;
            r.mu = {uni(rng), uni(rng), uni(rng)};
            std::sort(r.mu.begin(), r.mu.end(), std::greater<>());
            if (r.mu[0] - r.mu[1] < 0.1 || r.mu[1] - r.mu[2] < 0.1) continue;
            const auto b = b_coeffs(r, 3.7);
            const double scale_b = std::max({std::abs(b.b[0]), std::abs(b.b[1]), std::abs(b.b[2])});
            double sum = 0.0, musum = 0.0, scale_mb = 0.0;
            for (int j = 0; j < 3; ++j) {
                sum += b.b[j];
                musum += r.mu[j] * b.b[j];
                scale_mb = std::max(scale_mb, std::abs(r.mu[j] * b.b[j]));
            }
            CHECK(std::abs(sum) <= 1e-10 * scale_b);
            CHECK(std::abs(musum) <= 1e-10 * scale_mb);
        }
    }
    SUBCASE("near-degenerate roots are rejected") {
        RootTriple r;
        r.mu = {1.0, 1.0 + 1e-12, -2.0};
        std::sort(r.mu.begin(), r.mu.end(), std::greater<>());
        CHECK_THROWS_AS((void)b_coeffs(r, 1.0), DegenerateSpectrumError);
    }
}

TEST_CASE("closed-form amplitudes") {
    SUBCASE("initial condition at t = 0") {
        ModelConfig c = resonant_config();
        c.chi = 0.4;
        c.delta1 = 7.0;
        c.delta3 = 15.0;
        for (int n : {0, 3, 17}) {
            const auto s = amplitudes_at(c, n, 0.0);
            CHECK(std::abs(s.a - 1.0) < 1e-10);
            CHECK(std::abs(s.b) < 1e-10);
            CHECK(std::abs(s.d) < 1e-10);
        }
    }
    SUBCASE("resonant constant-coupling n = 0 matches the hand reduction") {
        const ModelConfig c = resonant_config();
        const double s6 = std::sqrt(6.0);
        for (double t : {0.1, 0.5, 1.0, 2.0, 3.7, 10.0, 24.3}) {
            const auto s = amplitudes_at(c, 0, t);
            const Complex a_ref{2.0 / 3.0 + std::cos(s6 * t) / 3.0, 0.0};
            const Complex b_ref{0.0, -std::sin(s6 * t) / s6};
            const Complex d_ref{std::sqrt(2.0) / 3.0 * (std::cos(s6 * t) - 1.0), 0.0};
            CHECK(std::abs(s.a - a_ref) < 1e-12);
            CHECK(std::abs(s.b - b_ref) < 1e-12);
            CHECK(std::abs(s.d - d_ref) < 1e-12);
        }
    }
    SUBCASE("harmonious resonant dynamics are n-independent") {
        ModelConfig c = resonant_config();
        c.deform = Nonlinearity::harmonious();
        const auto ref = amplitudes_at(c, 0, 1.7);
        for (int n = 1; n <= 20; ++n) {
            const auto s = amplitudes_at(c, n, 1.7);
            CHECK(std::abs(s.a - ref.a) < 1e-12);
            CHECK(std::abs(s.b - ref.b) < 1e-12);
            CHECK(std::abs(s.d - ref.d) < 1e-12);
        }
    }
    SUBCASE("per-sector unitarity across random parameters") {
        std::mt19937 rng(23);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (int trial = 0; trial < 100; ++trial) {
            ModelConfig c;
            c.lambda = 0.2 + 2.0 * uni(rng);
            c.chi = 0.5 * uni(rng);
            c.delta1 = 10.0 * (uni(rng) - 0.5);
            c.delta3 = 20.0 * (uni(rng) - 0.5);
            c.k = 1 + (trial % 2);
            c.deform = (trial % 3 == 0) ? Nonlinearity::harmonious() : Nonlinearity::constant();
            const int n = trial % 30;
            const double t = 50.0 * uni(rng);
            CHECK(unitarity_defect(amplitudes_at(c, n, t)) < 1e-10);
        }
    }
    SUBCASE("periodicity pi/lambda in the flattened resonant case") {
        for (double lambda : {1.0, 2.0}) {
            ModelConfig c = resonant_config();
            c.lambda = lambda;
            c.deform = Nonlinearity::harmonious();
            const double period = std::numbers::pi / lambda;
            for (int n : {0, 4}) {
                for (double t : {0.3, 1.1, 2.9}) {
                    const auto s1 = amplitudes_at(c, n, t);
                    const auto s2 = amplitudes_at(c, n, t + period);
                    CHECK(std::abs(s1.a - s2.a) < 1e-9);
                    CHECK(std::abs(s1.b - s2.b) < 1e-9);
                    CHECK(std::abs(s1.d - s2.d) < 1e-9);
                }
            }
        }
    }
    SUBCASE("no branch discontinuity as chi -> 0") {
        ModelConfig c0 = resonant_config();
        ModelConfig c1 = c0;
        c1.chi = 1e-8;
        // n = 0 bound: the Kerr shifts are at most 2 chi, so amplitudes move O(chi t)
        for (double t = 0.0; t <= 10.0; t += 0.5) {
            const auto s0 = amplitudes_at(c0, 0, t);
            const auto s1 = amplitudes_at(c1, 0, t);
            CHECK(std::abs(s0.a - s1.a) < 1e-6);
            CHECK(std::abs(s0.b - s1.b) < 1e-6);
            CHECK(std::abs(s0.d - s1.d) < 1e-6);
        }
        // scaled bound for larger n
        for (int n : {5, 10, 20}) {
            const double bound = 20.0 * c1.chi * (n + 2) * (n + 2) * 10.0;
            for (double t = 0.0; t <= 10.0; t += 1.0) {
                const auto s0 = amplitudes_at(c0, n, t);
                const auto s1 = amplitudes_at(c1, n, t);
                CHECK(std::abs(s0.a - s1.a) < bound);
            }
        }
    }
    SUBCASE("evaluator agrees with the one-shot path") {
        ModelConfig c = resonant_config();
        c.chi = 0.4;
        c.delta1 = 7.0;
        c.delta3 = 15.0;
        c.k = 2;
        const ClosedFormEvaluator eval(c, 30);
        for (int n : {0, 7, 30}) {
            for (double t : {0.0, 2.5, 49.0}) {
                const auto a = eval.at(n, t);
                const auto b = amplitudes_at(c, n, t);
                CHECK(a.a == b.a);
                CHECK(a.b == b.b);
                CHECK(a.d == b.d);
            }
        }
    }
}

TEST_CASE("config validation") {
    ModelConfig c;
    c.lambda = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = ModelConfig{};
    c.k = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = ModelConfig{};
    c.chi = -0.1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_SUITE_END();
