#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "aoi_tandem/errors.hpp"

namespace aoit {

struct QuadratureSettings {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    int max_subdivisions = 2000;
    double upper_gain_cutoff = 50.0;  // h_up for gain-domain transmission integrals
};

struct IntegralEstimate {
    double value = 0.0;
    double error = 0.0;
};

namespace detail {

// 15-point Kronrod nodes on [0,1] (abscissae of the positive half), the
// matching Kronrod weights, and the embedded 7-point Gauss weights.
inline constexpr double kGk15Nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kGk15KronrodW[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double kGk15GaussW[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
    double a = 0.0, b = 0.0;
    double integral = 0.0;
    double error = 0.0;
};

template <typename F>
Panel gk15(F&& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    const double fc = f(center);
    double result_kronrod = kGk15KronrodW[7] * fc;
    double result_gauss = kGk15GaussW[3] * fc;

    double fv_lo[7], fv_hi[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kGk15Nodes[j];
        fv_lo[j] = f(center - dx);
        fv_hi[j] = f(center + dx);
        result_kronrod += kGk15KronrodW[j] * (fv_lo[j] + fv_hi[j]);
    }
    for (int j = 1; j < 7; j += 2)
        result_gauss += kGk15GaussW[(j - 1) / 2] * (fv_lo[j] + fv_hi[j]);

    // Scaled error estimate in the style of QUADPACK's dqk15.
    const double mean = result_kronrod * 0.5;
    double resasc = kGk15KronrodW[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j)
        resasc += kGk15KronrodW[j] * (std::abs(fv_lo[j] - mean) + std::abs(fv_hi[j] - mean));
    resasc *= std::abs(half);

    double err = std::abs((result_kronrod - result_gauss) * half);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));

    return Panel{a, b, result_kronrod * half, err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod 15 integration of f over [lo, hi].
/// Repeatedly bisects the panel with the largest error estimate until the
/// summed error is below max(abs_tol, rel_tol * |value|). Throws
/// QuadratureNonConvergence once max_subdivisions panels exist.
template <typename F>
IntegralEstimate integrate_adaptive(F&& f, double lo, double hi, const QuadratureSettings& q = {}) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw std::invalid_argument("integrate_adaptive: need finite lo < hi");
    if (!(q.rel_tol > 0.0) || !(q.abs_tol > 0.0))
        throw std::invalid_argument("integrate_adaptive: tolerances must be positive");

    std::vector<detail::Panel> panels;
    panels.push_back(detail::gk15(f, lo, hi));

    for (;;) {
        double total = 0.0, total_err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            total += panels[i].integral;
            total_err += panels[i].error;
            if (panels[i].error > panels[worst].error) worst = i;
        }
        if (total_err <= std::max(q.abs_tol, q.rel_tol * std::abs(total)))
            return {total, total_err};
        if (static_cast<int>(panels.size()) >= q.max_subdivisions)
            throw QuadratureNonConvergence(total, total_err, static_cast<int>(panels.size()));

        const detail::Panel split = panels[worst];
        const double mid = 0.5 * (split.a + split.b);
        if (!(split.a < mid && mid < split.b))  // interval too small to bisect
            throw QuadratureNonConvergence(total, total_err, static_cast<int>(panels.size()));
        panels[worst] = detail::gk15(f, split.a, mid);
        panels.push_back(detail::gk15(f, mid, split.b));
    }
}

}  // namespace aoit
