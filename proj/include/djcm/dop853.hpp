// Adaptive explicit Runge-Kutta integrator of order 8(5,3) with the classic
// Dormand-Prince DOP853 coefficients, specialised to small fixed-size complex
// systems. Used by the ODE oracle; steps land exactly on requested output
// times (no interpolation), which keeps the two oracle paths methodologically
// disjoint.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>

namespace djcm {

struct OdeOptions {
    double rtol = 1e-12;
    double atol = 1e-14;
    double initial_step = 1e-6;
    long max_steps = 200000000;
};

namespace dop853_detail {

// Node, weight and error coefficients from Hairer, Norsett & Wanner.
inline constexpr double c2 = 0.526001519587677318785587544488e-01;
inline constexpr double c3 = 0.789002279381515978178381316732e-01;
inline constexpr double c4 = 0.118350341907227396726757197510e+00;
inline constexpr double c5 = 0.281649658092772603273242802490e+00;
inline constexpr double c6 = 0.333333333333333333333333333333e+00;
inline constexpr double c7 = 0.25e+00;
inline constexpr double c8 = 0.307692307692307692307692307692e+00;
inline constexpr double c9 = 0.651282051282051282051282051282e+00;
inline constexpr double c10 = 0.6e+00;
inline constexpr double c11 = 0.857142857142857142857142857142e+00;

inline constexpr double a21 = 5.26001519587677318785587544488e-2;
inline constexpr double a31 = 1.97250569845378994544595329183e-2;
inline constexpr double a32 = 5.91751709536136983633785987549e-2;
inline constexpr double a41 = 2.95875854768068491816892993775e-2;
inline constexpr double a43 = 8.87627564304205475450678981324e-2;
inline constexpr double a51 = 2.41365134159266685502369798665e-1;
inline constexpr double a53 = -8.84549479328286085344864962717e-1;
inline constexpr double a54 = 9.24834003261792003115737966543e-1;
inline constexpr double a61 = 3.7037037037037037037037037037e-2;
inline constexpr double a64 = 1.70828608729473871279604482173e-1;
inline constexpr double a65 = 1.25467687566822425016691814123e-1;
inline constexpr double a71 = 3.7109375e-2;
inline constexpr double a74 = 1.70252211019544039314978060272e-1;
inline constexpr double a75 = 6.02165389804559606850219397283e-2;
inline constexpr double a76 = -1.7578125e-2;
inline constexpr double a81 = 3.70920001185047927108779319836e-2;
inline constexpr double a84 = 1.70383925712239993810214054705e-1;
inline constexpr double a85 = 1.07262030446373284651809199168e-1;
inline constexpr double a86 = -1.53194377486244017527936158236e-2;
inline constexpr double a87 = 8.27378916381402288758473766002e-3;
inline constexpr double a91 = 6.24110958716075717114429577812e-1;
inline constexpr double a94 = -3.36089262944694129406857109825e0;
inline constexpr double a95 = -8.68219346841726006818189891453e-1;
inline constexpr double a96 = 2.75920996994467083049415600797e1;
inline constexpr double a97 = 2.01540675504778934086186788979e1;
inline constexpr double a98 = -4.34898841810699588477366255144e1;
inline constexpr double a101 = 4.77662536438264365890433908527e-1;
inline constexpr double a104 = -2.48811461997166764192642586468e0;
inline constexpr double a105 = -5.90290826836842996371446475743e-1;
inline constexpr double a106 = 2.12300514481811942347288949897e1;
inline constexpr double a107 = 1.52792336328824235832596922938e1;
inline constexpr double a108 = -3.32882109689848629194453265587e1;
inline constexpr double a109 = -2.03312017085086261358222928593e-2;
inline constexpr double a111 = -9.3714243008598732571704021658e-1;
inline constexpr double a114 = 5.18637242884406370830023853209e0;
inline constexpr double a115 = 1.09143734899672957818500254654e0;
inline constexpr double a116 = -8.14978701074692612513997267357e0;
inline constexpr double a117 = -1.85200656599969598641566180701e1;
inline constexpr double a118 = 2.27394870993505042818970056734e1;
inline constexpr double a119 = 2.49360555267965238987089396762e0;
inline constexpr double a1110 = -3.0467644718982195003823669022e0;
inline constexpr double a121 = 2.27331014751653820792359768449e0;
inline constexpr double a124 = -1.05344954667372501984066689879e1;
inline constexpr double a125 = -2.00087205822486249909675718444e0;
inline constexpr double a126 = -1.79589318631187989172765950534e1;
inline constexpr double a127 = 2.79488845294199600508499808837e1;
inline constexpr double a128 = -2.85899827713502369474065508674e0;
inline constexpr double a129 = -8.87285693353062954433549289258e0;
inline constexpr double a1210 = 1.23605671757943030647266201528e1;
inline constexpr double a1211 = 6.43392746015763530355970484046e-1;

inline constexpr double b1 = 5.42937341165687622380535766363e-2;
inline constexpr double b6 = 4.45031289275240888144113950566e0;
inline constexpr double b7 = 1.89151789931450038304281599044e0;
inline constexpr double b8 = -5.8012039600105847814672114227e0;
inline constexpr double b9 = 3.1116436695781989440891606237e-1;
inline constexpr double b10 = -1.52160949662516078556178806805e-1;
inline constexpr double b11 = 2.01365400804030348374776537501e-1;
inline constexpr double b12 = 4.47106157277725905176885569043e-2;

inline constexpr double bhh1 = 0.244094488188976377952755905512e+00;
inline constexpr double bhh2 = 0.733846688281611857341361741547e+00;
inline constexpr double bhh3 = 0.220588235294117647058823529412e-01;

inline constexpr double er1 = 0.1312004499419488073250102996e-01;
inline constexpr double er6 = -0.1225156446376204440720569753e+01;
inline constexpr double er7 = -0.4957589496572501915214079952e+00;
inline constexpr double er8 = 0.1664377182454986536961530415e+01;
inline constexpr double er9 = -0.3503288487499736816886487290e+00;
inline constexpr double er10 = 0.3341791187130174790297318841e+00;
inline constexpr double er11 = 0.8192320648511571246570742613e-01;
inline constexpr double er12 = -0.2235530786388629525884427845e-01;

}  // namespace dop853_detail

// Integrates y' = f(t, y) for y in C^N from t0 to t1, invoking
// on_output(t, y) at every requested output time. The RHS functor has
// signature f(double t, const State& y, State& dydt).
template <std::size_t N, class Rhs, class Output>
void integrate_dop853(Rhs&& rhs, std::array<std::complex<double>, N> y, double t0,
                      std::span<const double> output_times, Output&& on_output,
                      const OdeOptions& opt = {}) {
    namespace d = dop853_detail;
    using State = std::array<std::complex<double>, N>;

    const auto error_norm = [&](const State& ylow, const State& yhigh, const State& err5,
                                const State& err3, double h) {
        double sum5 = 0.0, sum3 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sci =
                opt.atol + opt.rtol * std::max(std::abs(ylow[i]), std::abs(yhigh[i]));
            sum5 += std::norm(err5[i]) / (sci * sci);
            sum3 += std::norm(err3[i]) / (sci * sci);
        }
        const double deno = sum5 + 0.01 * sum3;
        if (deno <= 0.0) return 0.0;
        return std::abs(h) * sum5 / std::sqrt(static_cast<double>(N) * deno);
    };

    double t = t0;
    double h_natural = opt.initial_step;  // controller's step, kept across output clips
    State k1;
    rhs(t, y, k1);
    long steps = 0;

    std::size_t out = 0;
    while (out < output_times.size() && output_times[out] <= t) {
        on_output(output_times[out], y);
        ++out;
    }

    while (out < output_times.size()) {
        const double t_target = output_times[out];
        const bool clipped = t + h_natural >= t_target;
        const double h = clipped ? t_target - t : h_natural;

        State k2, k3, k4, k5, k6, k7, k8, k9, k10, k11, k12, yw;
        const auto stage = [&](State& k, double c, auto&&... terms) {
            for (std::size_t i = 0; i < N; ++i) {
                std::complex<double> acc = 0.0;
                ((acc += terms.first * terms.second[i]), ...);
                yw[i] = y[i] + h * acc;
            }
            rhs(t + c * h, yw, k);
        };
        using P = std::pair<double, const State&>;
        stage(k2, d::c2, P{d::a21, k1});
        stage(k3, d::c3, P{d::a31, k1}, P{d::a32, k2});
        stage(k4, d::c4, P{d::a41, k1}, P{d::a43, k3});
        stage(k5, d::c5, P{d::a51, k1}, P{d::a53, k3}, P{d::a54, k4});
        stage(k6, d::c6, P{d::a61, k1}, P{d::a64, k4}, P{d::a65, k5});
        stage(k7, d::c7, P{d::a71, k1}, P{d::a74, k4}, P{d::a75, k5}, P{d::a76, k6});
        stage(k8, d::c8, P{d::a81, k1}, P{d::a84, k4}, P{d::a85, k5}, P{d::a86, k6},
              P{d::a87, k7});
        stage(k9, d::c9, P{d::a91, k1}, P{d::a94, k4}, P{d::a95, k5}, P{d::a96, k6},
              P{d::a97, k7}, P{d::a98, k8});
        stage(k10, d::c10, P{d::a101, k1}, P{d::a104, k4}, P{d::a105, k5}, P{d::a106, k6},
              P{d::a107, k7}, P{d::a108, k8}, P{d::a109, k9});
        stage(k11, d::c11, P{d::a111, k1}, P{d::a114, k4}, P{d::a115, k5}, P{d::a116, k6},
              P{d::a117, k7}, P{d::a118, k8}, P{d::a119, k9}, P{d::a1110, k10});
        stage(k12, 1.0, P{d::a121, k1}, P{d::a124, k4}, P{d::a125, k5}, P{d::a126, k6},
              P{d::a127, k7}, P{d::a128, k8}, P{d::a129, k9}, P{d::a1210, k10},
              P{d::a1211, k11});

        State ynew, err5, err3;
        for (std::size_t i = 0; i < N; ++i) {
            const std::complex<double> incr =
                d::b1 * k1[i] + d::b6 * k6[i] + d::b7 * k7[i] + d::b8 * k8[i] +
                d::b9 * k9[i] + d::b10 * k10[i] + d::b11 * k11[i] + d::b12 * k12[i];
            ynew[i] = y[i] + h * incr;
            err5[i] = d::er1 * k1[i] + d::er6 * k6[i] + d::er7 * k7[i] + d::er8 * k8[i] +
                      d::er9 * k9[i] + d::er10 * k10[i] + d::er11 * k11[i] +
                      d::er12 * k12[i];
            err3[i] = incr - d::bhh1 * k1[i] - d::bhh2 * k9[i] - d::bhh3 * k12[i];
        }
        const double err = error_norm(y, ynew, err5, err3, h);

        if (++steps > opt.max_steps) {
            throw std::runtime_error("dop853: step limit exceeded");
        }
        if (std::abs(h) < 1e3 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
            throw std::runtime_error("dop853: step size underflow (stiffness?)");
        }

        constexpr double safety = 0.9;
        constexpr double min_scale = 1.0 / 3.0;
        constexpr double max_scale = 6.0;
        const double scale = err == 0.0
                                 ? max_scale
                                 : std::clamp(safety * std::pow(err, -0.125), min_scale, max_scale);
        if (err <= 1.0) {
            t += h;
            y = ynew;
            rhs(t, y, k1);
            if (clipped) {
                t = t_target;  // land exactly, no rounding drift
                on_output(t_target, y);
                ++out;
                // a clipped step is shorter than the controller's choice; keep
                // h_natural instead of letting the clip shrink it
            } else {
                h_natural = h * scale;
            }
        } else {
            h_natural = h * std::min(scale, 1.0);
            if (clipped && h_natural >= t_target - t) {
                // force genuine shrinkage when the rejected step was clipped
                h_natural = (t_target - t) * std::min(scale, 0.9);
            }
        }
    }
}

}  // namespace djcm
