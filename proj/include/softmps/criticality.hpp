// Localization transition analysis: coupling sweeps, critical-coupling
// bisection, finite-chain extrapolation, exponent fits and the closed-form
// polaron estimate of the critical coupling.

#pragma once

#include "softmps/model_params.hpp"
#include "softmps/observables.hpp"
#include "softmps/optimizer.hpp"
#include "softmps/rng.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace softmps {

// Variational polaron estimate sin(pi s) e^{-s/2} / (2 pi (1-s)) (Delta / w_c)^{1-s}.
inline double polaron_alpha_c(double s, double delta, double omega_c) {
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("polaron_alpha_c: s must lie in (0, 1)");
    const double pi = std::numbers::pi;
    return std::sin(pi * s) * std::exp(-0.5 * s) / (2.0 * pi * (1.0 - s)) * std::pow(delta / omega_c, 1.0 - s);
}

struct FitParameter {
    std::string name;
    double value{0.0};
    double stderr_{std::numeric_limits<double>::quiet_NaN()};
};

struct FitResult {
    std::vector<FitParameter> parameters;
    double residual{0.0};  // sum of squared residuals of the linearized fit
    int n_points{0};

    bool has_stderr() const { return n_points >= static_cast<int>(parameters.size()) + 1; }

    const FitParameter& at(const std::string& name) const {
        for (const auto& p : parameters)
            if (p.name == name) return p;
        throw std::out_of_range("FitResult: no parameter named " + name);
    }
    double value(const std::string& name) const { return at(name).value; }
    double stderr_of(const std::string& name) const { return at(name).stderr_; }
};

struct LineFit {
    double intercept{0.0};
    double slope{0.0};
    double se_intercept{std::numeric_limits<double>::quiet_NaN()};
    double se_slope{std::numeric_limits<double>::quiet_NaN()};
    double rss{0.0};
};

// Ordinary least squares y = intercept + slope x with textbook standard errors.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("fit_line: need at least two paired points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("fit_line: abscissae must not all coincide");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        f.rss += r * r;
    }
    if (n > 2) {
        const double sigma2 = f.rss / static_cast<double>(n - 2);
        f.se_slope = std::sqrt(sigma2 / sxx);
        f.se_intercept = std::sqrt(sigma2 * (1.0 / n + mx * mx / sxx));
    }
    return f;
}

// alpha_c(N) = a exp(b / N), fitted as ln alpha_c = ln a + b / N.
inline FitResult extrapolate_alpha_c(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw std::invalid_argument("extrapolate_alpha_c: need at least 3 points");
    std::vector<double> x, y;
    for (const auto& [n, ac] : points) {
        if (!(ac > 0.0)) throw std::invalid_argument("extrapolate_alpha_c: alpha_c values must be > 0");
        if (!(n > 0.0)) throw std::invalid_argument("extrapolate_alpha_c: chain lengths must be > 0");
        for (double seen : x)
            if (seen == 1.0 / n) throw std::invalid_argument("extrapolate_alpha_c: chain lengths must be distinct");
        x.push_back(1.0 / n);
        y.push_back(std::log(ac));
    }
    const LineFit lf = fit_line(x, y);
    FitResult out;
    const double a = std::exp(lf.intercept);
    out.parameters = {{"a", a, a * lf.se_intercept}, {"b", lf.slope, lf.se_slope}};
    out.residual = lf.rss;
    out.n_points = static_cast<int>(points.size());
    return out;
}

struct ExponentWindow {
    double lo{0.01};
    double hi{0.3};
};

// Slope of ln M against ln((alpha - alpha_c) / alpha_c) over points inside the window.
inline FitResult fit_critical_exponent(const std::vector<std::pair<double, double>>& points, double alpha_c,
                                       ExponentWindow window = {}) {
    if (!(alpha_c > 0.0)) throw std::invalid_argument("fit_critical_exponent: alpha_c must be > 0");
    std::vector<double> x, y;
    for (const auto& [alpha, m] : points) {
        const double rel = (alpha - alpha_c) / alpha_c;
        if (!(rel > 0.0) || rel < window.lo || rel > window.hi) continue;
        if (!(m > 0.0)) throw std::invalid_argument("fit_critical_exponent: magnetization must be > 0 in the window");
        x.push_back(std::log(rel));
        y.push_back(std::log(m));
    }
    if (x.size() < 3) throw std::invalid_argument("fit_critical_exponent: fewer than 3 points inside the window");
    const LineFit lf = fit_line(x, y);
    FitResult out;
    const double pref = std::exp(lf.intercept);
    out.parameters = {{"exponent", lf.slope, lf.se_slope}, {"prefactor", pref, pref * lf.se_intercept}};
    out.residual = lf.rss;
    out.n_points = static_cast<int>(x.size());
    return out;
}

// ---------------------------------------------------------------------------
// Sweeps and bisection

struct SweepSettings {
    SbmParams base;  // alpha is overridden per point
    ChainScheme scheme{ChainScheme::Linear};
    double lambda{1.5};
    int n_sites{10};
    int chi{2};
    bool warm_chain{true};
    ObservableOptions observables{};
};

template <class T>
struct SweepRecord {
    double alpha{0.0};
    bool ok{false};
    std::string error;
    ObservableSet observables;
    std::optional<GroundState<T>> ground;
};

template <class T>
struct SweepResult {
    SweepSettings settings;
    std::uint64_t seed{0};
    std::vector<SweepRecord<T>> records;

    bool complete() const {
        for (const auto& r : records)
            if (!r.ok) return false;
        return true;
    }
};

template <class T>
GroundState<T> solve_at(const SweepSettings& cfg, double alpha, OptimizerOptions<T> options,
                        const std::optional<MpsState<T>>& warm) {
    SbmParams p = cfg.base;
    p.alpha = alpha;
    const ChainCoefficients chain = make_chain(p, cfg.n_sites, cfg.scheme, cfg.lambda);
    options.warm_start = warm;
    return ground_state(p, chain, cfg.chi, options);
}

// One ground state per grid point. With warm_chain the previous point's state
// seeds the next solve next to the cold restarts, so points run in order.
template <class T>
SweepResult<T> sweep_alpha(const SweepSettings& cfg, const std::vector<double>& grid, const OptimizerOptions<T>& options) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0)) throw std::invalid_argument("sweep_alpha: alpha values must be >= 0");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw std::invalid_argument("sweep_alpha: grid must be strictly increasing");
    }
    SweepResult<T> out;
    out.settings = cfg;
    out.seed = options.seed;
    std::optional<MpsState<T>> warm = options.warm_start;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        SweepRecord<T> rec;
        rec.alpha = grid[i];
        OptimizerOptions<T> opt = options;
        opt.seed = derive_seed(options.seed, 1000 + i);
        try {
            auto gs = solve_at(cfg, grid[i], opt, cfg.warm_chain ? warm : std::nullopt);
            SbmParams p = cfg.base;
            p.alpha = grid[i];
            const auto chain = make_chain(p, cfg.n_sites, cfg.scheme, cfg.lambda);
            rec.observables = compute_observables(gs.state, chain, p.delta, cfg.observables);
            rec.ok = gs.converged;
            if (!gs.converged) rec.error = "not_converged";
            warm = gs.state;
            rec.ground = std::move(gs);
        } catch (const Error& e) {
            rec.error = e.code() + ": " + e.what();
        }
        out.records.push_back(std::move(rec));
    }
    return out;
}

struct DetectResult {
    double alpha_c{0.0};
    double lo{0.0};
    double hi{0.0};
    std::vector<std::pair<double, double>> probes;  // (alpha, M) in evaluation order
};

// Bisection on the predicate M(alpha) > threshold until hi - lo < tol.
inline DetectResult detect_alpha_c(const std::function<double(double)>& magnetization,
                                   std::pair<double, double> bracket, double threshold = 0.01, double tol = 2e-4) {
    auto [lo, hi] = bracket;
    if (!(lo < hi)) throw std::invalid_argument("detect_alpha_c: bracket must satisfy lo < hi");
    if (!(tol > 0.0)) throw std::invalid_argument("detect_alpha_c: tolerance must be > 0");
    DetectResult out;
    const double m_lo = magnetization(lo);
    out.probes.emplace_back(lo, m_lo);
    const double m_hi = magnetization(hi);
    out.probes.emplace_back(hi, m_hi);
    if (!(m_lo <= threshold && m_hi > threshold)) {
        std::ostringstream msg;
        msg << "detect_alpha_c: bracket does not enclose the transition: M(" << lo << ") = " << m_lo << ", M(" << hi
            << ") = " << m_hi << ", threshold " << threshold;
        throw Error("bracket_invalid", msg.str());
    }
    while (hi - lo >= tol) {
        const double mid = 0.5 * (lo + hi);
        const double m = magnetization(mid);
        out.probes.emplace_back(mid, m);
        (m > threshold ? hi : lo) = mid;
    }
    out.lo = lo;
    out.hi = hi;
    out.alpha_c = 0.5 * (lo + hi);
    return out;
}

// Physics bisection: every probe is a full multi-restart solve warm-started
// from the nearest coupling solved so far.
template <class T>
DetectResult detect_alpha_c(const SweepSettings& cfg, std::pair<double, double> bracket, double threshold, double tol,
                            const OptimizerOptions<T>& options) {
    std::map<double, MpsState<T>> solved;
    int probe = 0;
    auto magnetization = [&](double alpha) {
        std::optional<MpsState<T>> warm;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [a, st] : solved) {
            if (std::abs(a - alpha) < best) {
                best = std::abs(a - alpha);
                warm = st;
            }
        }
        OptimizerOptions<T> opt = options;
        opt.seed = derive_seed(options.seed, 2000 + probe++);
        auto gs = solve_at(cfg, alpha, opt, warm);
        solved.emplace(alpha, gs.state);
        return spin_block(gs.state).magnetization;
    };
    return detect_alpha_c(magnetization, bracket, threshold, tol);
}

}  // namespace softmps
