#pragma once

// Extended Fourier Amplitude Sensitivity Test.
//
// For a factor of interest i, every input is driven along a periodic search
// curve x_h(s) = G_h(sin(w_h s + phi_h)), s in (-pi, pi). Factor i oscillates at
// a high frequency w_i and all other factors at low frequencies <= w_i / (2M).
// The Fourier spectrum of the model output along the curve then separates
// into a low band (variance explained by the complementary factors alone) and
// everything else (variance involving factor i). The total effect is
//
//     TE_i = 1 - D_c / D,
//
// with D the total spectral variance and D_c the variance in harmonics
// 1..floor(w_i / 2).

#include "safs/dataset.hpp"
#include "safs/error.hpp"
#include "safs/matrix.hpp"
#include "safs/parallel.hpp"
#include "safs/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace safs::efast {

// Independent uniform distribution per factor on [lo, hi].
struct InputSpace {
    std::vector<Range> ranges;

    std::size_t dims() const noexcept { return ranges.size(); }

    void validate() const {
        for (std::size_t h = 0; h < ranges.size(); ++h)
            if (!(ranges[h].lo <= ranges[h].hi))
                throw ConfigError("input range " + std::to_string(h) + " has lo > hi");
    }
};

struct EfastConfig {
    std::size_t samples_per_curve = 1025;  // Ns, odd
    std::size_t max_harmonic = 4;          // M
    std::size_t resamples = 2;             // independent phase draws averaged per factor
    std::uint64_t seed = 0;
    std::size_t workers = 1;               // results do not depend on this

    std::size_t omega_interest() const { return (samples_per_curve - 1) / (2 * max_harmonic); }

    void validate() const {
        if (samples_per_curve % 2 == 0) throw ConfigError("EFAST sample count must be odd");
        if (max_harmonic == 0) throw ConfigError("EFAST harmonic order must be at least 1");
        if (resamples == 0) throw ConfigError("EFAST needs at least one resample");
        // omega_i >= 1 is what Ns >= 2*M*omega_i + 1 leaves to check
        if (samples_per_curve < 2 * max_harmonic + 1)
            throw ConfigError("EFAST sample count " + std::to_string(samples_per_curve) + " is too small for " +
                              std::to_string(max_harmonic) + " harmonics (need at least " +
                              std::to_string(2 * max_harmonic + 1) + ")");
    }
};

struct EfastPlan {
    std::size_t factor_of_interest = 0;
    std::size_t omega_i = 0;
    std::vector<std::size_t> omega_complement;  // other factors in ascending index order
    std::vector<double> phases;                 // one per factor, [0, 2pi)
    std::vector<double> s_grid;

    std::size_t dims() const noexcept { return phases.size(); }

    std::size_t frequency(std::size_t h) const {
        if (h == factor_of_interest) return omega_i;
        return omega_complement[h < factor_of_interest ? h : h - 1];
    }
};

struct SensitivityEstimate {
    double total_effect = 0.0;
    double first_order = 0.0;
    double total_variance = 0.0;
    double complementary_variance = 0.0;
    bool zero_variance = false;
};

// H x outputs tables of resample-averaged indices.
struct SensitivityTable {
    Matrix total_effect;
    Matrix first_order;
    std::vector<bool> zero_variance;  // row-major H x outputs; set if any resample saw a constant output
};

inline std::vector<double> search_grid(std::size_t ns) {
    std::vector<double> s(ns);
    const double n = static_cast<double>(ns);
    for (std::size_t j = 1; j <= ns; ++j)
        s[j - 1] = std::numbers::pi * (2.0 * static_cast<double>(j) - n - 1.0) / n;
    return s;
}

// Frequency design for one factor of interest. Phases come from a stream
// derived from (seed, factor, resample), so any sweep can be rebuilt alone.
inline EfastPlan assign_frequencies(std::size_t H, const EfastConfig& cfg, std::size_t factor,
                                    std::size_t resample = 0) {
    cfg.validate();
    if (H == 0) throw ConfigError("EFAST needs at least one factor");
    if (factor >= H) throw ConfigError("factor of interest out of range");

    EfastPlan plan;
    plan.factor_of_interest = factor;
    plan.omega_i = cfg.omega_interest();

    // Complementary frequencies live in 1..cap, with cap low enough that the
    // first M+1 harmonics of each one stay below omega_i / 2. With room for
    // all of them they are spread evenly over that band (floor of a linear
    // grid from 1 to cap); otherwise they cycle through 1..cap.
    const std::size_t cap = std::max<std::size_t>(1, plan.omega_i / (2 * (cfg.max_harmonic + 1)));
    const std::size_t others = H - 1;
    if (others == 1) {
        plan.omega_complement.push_back(1);
    } else if (others > 1 && cap >= others) {
        for (std::size_t h = 0; h < others; ++h)
            plan.omega_complement.push_back(1 + h * (cap - 1) / (others - 1));
    } else {
        for (std::size_t h = 0; h < others; ++h) plan.omega_complement.push_back(h % cap + 1);
    }

    Rng rng(derive_seed(derive_seed(cfg.seed, factor), resample));
    plan.phases.resize(H);
    for (auto& phi : plan.phases) phi = 2.0 * std::numbers::pi * rng.uniform();
    plan.s_grid = search_grid(cfg.samples_per_curve);
    return plan;
}

// Ns x H sample matrix along the search curve:
//   u = 1/2 + asin(sin(w_h s_j + phi_h)) / pi,  x = lo + (hi - lo) u.
inline Matrix generate_samples(const EfastPlan& plan, const InputSpace& space) {
    const std::size_t H = plan.dims();
    if (space.dims() != H)
        throw ConfigError("input space has " + std::to_string(space.dims()) + " factors, plan has " +
                          std::to_string(H));
    Matrix x(plan.s_grid.size(), H);
    for (std::size_t h = 0; h < H; ++h) {
        const double w = static_cast<double>(plan.frequency(h));
        const auto [lo, hi] = space.ranges[h];
        for (std::size_t j = 0; j < plan.s_grid.size(); ++j) {
            const double u = 0.5 + std::asin(std::sin(w * plan.s_grid[j] + plan.phases[h])) / std::numbers::pi;
            x(j, h) = std::clamp(lo + (hi - lo) * u, lo, hi);
        }
    }
    return x;
}

namespace detail {

// cos and sin of p*s_j for the symmetric grid only take values at multiples of
// pi/Ns, so one table of 2Ns entries serves every (p, j) pair.
struct TrigTable {
    std::size_t ns = 0;
    std::vector<double> cos_v, sin_v;

    explicit TrigTable(std::size_t n) : ns(n), cos_v(2 * n), sin_v(2 * n) {
        for (std::size_t m = 0; m < 2 * n; ++m) {
            const double a = std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
            cos_v[m] = std::cos(a);
            sin_v[m] = std::sin(a);
        }
    }

    // p * s_j = pi * p * (2j - Ns - 1) / Ns, j 1-based
    std::size_t index(std::size_t p, std::size_t j) const {
        const auto n = static_cast<long long>(ns);
        long long m = static_cast<long long>(p) * (2 * static_cast<long long>(j) - n - 1);
        m %= 2 * n;
        if (m < 0) m += 2 * n;
        return static_cast<std::size_t>(m);
    }
};

// Lambda_p = 2 (A_p^2 + B_p^2) for p = 1..(Ns-1)/2; index 0 unused.
inline std::vector<double> partial_spectrum(std::span<const double> y, const TrigTable& trig) {
    const std::size_t ns = y.size();
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(ns);

    std::vector<double> centered(y.begin(), y.end());
    for (auto& v : centered) v -= mean;

    const std::size_t top = (ns - 1) / 2;
    std::vector<double> lambda(top + 1, 0.0);
    for (std::size_t p = 1; p <= top; ++p) {
        double a = 0.0, b = 0.0;
        const std::size_t period = 2 * ns;
        const std::size_t step = (2 * p) % period;
        std::size_t m = trig.index(p, 1);
        for (std::size_t j = 0; j < ns; ++j) {
            a += centered[j] * trig.cos_v[m];
            b += centered[j] * trig.sin_v[m];
            m += step;
            if (m >= period) m -= period;
        }
        a /= static_cast<double>(ns);
        b /= static_cast<double>(ns);
        lambda[p] = 2.0 * (a * a + b * b);
    }
    return lambda;
}

inline SensitivityEstimate estimate_from_spectrum(std::span<const double> y, const std::vector<double>& lambda,
                                                  std::size_t omega_i, std::size_t max_harmonic) {
    SensitivityEstimate est;
    const bool constant = std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); });
    double total = 0.0;
    for (std::size_t p = 1; p < lambda.size(); ++p) total += lambda[p];

    double scale = 0.0;
    for (double v : y) scale = std::max(scale, std::abs(v));
    if (constant || total <= 1e-28 * std::max(1.0, scale * scale)) {
        est.zero_variance = true;
        return est;
    }

    double low = 0.0;
    for (std::size_t p = 1; p <= omega_i / 2 && p < lambda.size(); ++p) low += lambda[p];
    double own = 0.0;
    for (std::size_t q = 1; q <= max_harmonic; ++q)
        if (q * omega_i < lambda.size()) own += lambda[q * omega_i];

    est.total_variance = total;
    est.complementary_variance = low;
    est.total_effect = std::clamp(1.0 - low / total, 0.0, 1.0);
    est.first_order = std::clamp(own / total, 0.0, 1.0);
    return est;
}

} // namespace detail

// Total and first-order index of the plan's factor of interest from model
// outputs evaluated at generate_samples(plan, ...). Both are clamped to [0, 1];
// a constant output gives zero indices and sets zero_variance.
inline SensitivityEstimate estimate_total_effect(std::span<const double> outputs, const EfastPlan& plan,
                                                 std::size_t max_harmonic) {
    if (outputs.size() % 2 == 0 || outputs.size() != plan.s_grid.size())
        throw ConfigError("EFAST outputs must match the (odd) grid size");
    for (double v : outputs)
        if (!std::isfinite(v)) throw ModelEvaluationError("non-finite model output");
    const detail::TrigTable trig(outputs.size());
    return detail::estimate_from_spectrum(outputs, detail::partial_spectrum(outputs, trig), plan.omega_i,
                                          max_harmonic);
}

namespace detail {

inline std::string describe_point(std::span<const double> x) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t h = 0; h < x.size(); ++h) os << (h ? ", " : "") << x[h];
    os << ')';
    return os.str();
}

} // namespace detail

// Indices for a model with several scalar outputs. `model(x, out)` fills
// out[0..outputs) for the input point x and must be safe to call from several
// threads at once. Each (factor, resample) sweep shares one set of model
// evaluations across all outputs.
template <class Model>
SensitivityTable sensitivity_table(Model&& model, std::size_t outputs, const InputSpace& space,
                                   const EfastConfig& cfg) {
    cfg.validate();
    space.validate();
    const std::size_t H = space.dims();
    if (H == 0) throw ConfigError("EFAST needs at least one factor");
    if (outputs == 0) throw ConfigError("model must have at least one output");

    const std::size_t R = cfg.resamples;
    const std::size_t ns = cfg.samples_per_curve;
    const detail::TrigTable trig(ns);

    // per sweep: outputs x (total, first, zero flag)
    std::vector<std::vector<SensitivityEstimate>> sweeps(H * R);
    parallel_for(H * R, cfg.workers, [&](std::size_t task) {
        const std::size_t h = task / R, r = task % R;
        const auto plan = assign_frequencies(H, cfg, h, r);
        const auto x = generate_samples(plan, space);

        Matrix y(ns, outputs);
        for (std::size_t j = 0; j < ns; ++j) {
            const auto row = y.row(j);
            model(x.row(j), row);
            for (double v : row)
                if (!std::isfinite(v))
                    throw ModelEvaluationError("model returned a non-finite value at " +
                                               detail::describe_point(x.row(j)));
        }

        std::vector<double> column(ns);
        auto& out = sweeps[task];
        out.resize(outputs);
        for (std::size_t k = 0; k < outputs; ++k) {
            for (std::size_t j = 0; j < ns; ++j) column[j] = y(j, k);
            out[k] = detail::estimate_from_spectrum(column, detail::partial_spectrum(column, trig), plan.omega_i,
                                                    cfg.max_harmonic);
        }
    });

    SensitivityTable table{Matrix(H, outputs), Matrix(H, outputs), std::vector<bool>(H * outputs, false)};
    for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t k = 0; k < outputs; ++k) {
            double te = 0.0, fo = 0.0;
            for (std::size_t r = 0; r < R; ++r) {
                const auto& e = sweeps[h * R + r][k];
                te += e.total_effect;
                fo += e.first_order;
                if (e.zero_variance) table.zero_variance[h * outputs + k] = true;
            }
            table.total_effect(h, k) = te / static_cast<double>(R);
            table.first_order(h, k) = fo / static_cast<double>(R);
        }
    }
    return table;
}

// Total effect of every factor on a scalar model `model(x) -> double`.
template <class Model>
std::vector<double> total_effects(Model&& model, const InputSpace& space, const EfastConfig& cfg) {
    auto wrapped = [&model](std::span<const double> x, std::span<double> out) { out[0] = model(x); };
    const auto table = sensitivity_table(wrapped, 1, space, cfg);
    std::vector<double> te(space.dims());
    for (std::size_t h = 0; h < te.size(); ++h) te[h] = table.total_effect(h, 0);
    return te;
}

} // namespace safs::efast
