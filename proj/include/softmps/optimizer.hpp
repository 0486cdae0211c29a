// Ground-state search: a limited-memory BFGS minimizer with a strong Wolfe
// line search, and a multi-restart driver over the energy functional.

#pragma once

#include "softmps/energy.hpp"
#include "softmps/linalg.hpp"
#include "softmps/model_params.hpp"
#include "softmps/mps_state.hpp"
#include "softmps/rng.hpp"
#include "softmps/transfer.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace softmps {

struct MinimizeOptions {
    int max_iterations{50000};
    double gradient_tolerance{1e-8};
    double step_tolerance{1e-10};
    // Stopping on a failed line search or a vanishing step counts as
    // convergence only below this gradient norm (the objective's rounding
    // floor has been reached).
    double stall_tolerance{1e-6};
    // Stop once the value has dropped by less than progress_tolerance * max(1, |f|)
    // over the last progress_window iterations (0 disables).
    int progress_window{0};
    double progress_tolerance{1e-10};
    int memory{12};
    int max_linesearch{60};
    double armijo{1e-4};
    double curvature{0.9};
};

enum class MinimizeStatus { GradientTolerance, StepTolerance, Stalled, NoProgress, MaxIterations, LineSearchFailed };

inline std::string to_string(MinimizeStatus s) {
    switch (s) {
    case MinimizeStatus::GradientTolerance:
        return "gradient_tolerance";
    case MinimizeStatus::StepTolerance:
        return "step_tolerance";
    case MinimizeStatus::Stalled:
        return "stalled";
    case MinimizeStatus::NoProgress:
        return "no_progress";
    case MinimizeStatus::MaxIterations:
        return "max_iterations";
    default:
        return "line_search_failed";
    }
}

struct MinimizeResult {
    Eigen::VectorXd x;
    double value{0.0};
    Eigen::VectorXd gradient;
    int iterations{0};
    int evaluations{0};
    MinimizeStatus status{MinimizeStatus::MaxIterations};

    bool stationary{false};  // gradient tolerance met, or a stall with a gradient below stall_tolerance
    // Stationary, or the value settled to within the progress tolerance.
    bool settled{false};

    bool converged() const { return stationary || settled; }
};

// f(x, grad) returns the objective and fills grad. Throwing softmps::Error or
// returning a non-finite value marks the point as unusable.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

// Optional change of coordinates x -> L x applied after each accepted step,
// with L linear and the objective invariant under it. `primal` maps points
// and steps, `dual` applies L^{-T} to gradients and gradient differences, so
// the curvature memory carries over exactly.
struct Reparametrization {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> primal;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> dual;
};
using Reparametrize = std::function<std::optional<Reparametrization>(const Eigen::VectorXd&)>;

namespace detail {

struct Probe {
    double alpha{0.0};
    double f{0.0};
    double slope{0.0};
    Eigen::VectorXd g;
    bool finite{false};
};

class LineSearch {
public:
    LineSearch(const Objective& f, const MinimizeOptions& opt, int& evals) : f_(f), opt_(opt), evals_(evals) {}

    std::optional<Probe> run(const Eigen::VectorXd& x, double f0, double slope0, const Eigen::VectorXd& d,
                             double alpha0) {
        x_ = &x;
        d_ = &d;
        f0_ = f0;
        slope0_ = slope0;
        Probe prev;
        prev.alpha = 0.0;
        prev.f = f0;
        prev.slope = slope0;
        prev.finite = true;
        double alpha = alpha0;
        double upper = std::numeric_limits<double>::infinity();
        for (int it = 0; it < opt_.max_linesearch; ++it) {
            Probe p = probe(alpha);
            if (!p.finite) {
                upper = alpha;
                alpha = prev.alpha + 0.5 * (alpha - prev.alpha);
                if (alpha - prev.alpha < 1e-20) break;
                continue;
            }
            if (p.f > f0 + opt_.armijo * alpha * slope0 || (it > 0 && p.f >= prev.f)) return zoom(prev, p);
            if (std::abs(p.slope) <= -opt_.curvature * slope0) return p;
            if (p.slope >= 0.0) return zoom(p, prev);
            prev = std::move(p);
            alpha = std::isfinite(upper) ? 0.5 * (alpha + upper) : 2.0 * alpha;
        }
        if (prev.alpha > 0.0) return prev;
        return std::nullopt;
    }

private:
    Probe probe(double alpha) {
        Probe p;
        p.alpha = alpha;
        p.g.resize(x_->size());
        ++evals_;
        try {
            p.f = f_(*x_ + alpha * *d_, p.g);
            p.finite = std::isfinite(p.f) && p.g.allFinite();
        } catch (const Error&) {
            p.finite = false;
        }
        if (p.finite) p.slope = p.g.dot(*d_);
        return p;
    }

    // lo satisfies sufficient decrease and has the lowest value seen so far.
    std::optional<Probe> zoom(Probe lo, Probe hi) {
        for (int it = 0; it < opt_.max_linesearch; ++it) {
            const double width = hi.alpha - lo.alpha;
            double a = lo.alpha + 0.5 * width;
            if (hi.finite) {
                const double denom = 2.0 * (hi.f - lo.f - lo.slope * width);
                if (denom > 0.0) {
                    const double q = lo.alpha - lo.slope * width * width / denom;
                    const double a_min = std::min(lo.alpha, hi.alpha) + 0.1 * std::abs(width);
                    const double a_max = std::max(lo.alpha, hi.alpha) - 0.1 * std::abs(width);
                    if (std::isfinite(q)) a = std::clamp(q, a_min, a_max);
                }
            }
            if (std::abs(width) < 1e-16 * std::max(1.0, std::abs(lo.alpha))) break;
            Probe p = probe(a);
            if (!p.finite) {
                hi = std::move(p);
                continue;
            }
            if (p.f > f0_ + opt_.armijo * a * slope0_ || p.f >= lo.f) {
                hi = std::move(p);
            } else {
                if (std::abs(p.slope) <= -opt_.curvature * slope0_) return p;
                if (p.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
                lo = std::move(p);
            }
        }
        if (lo.alpha > 0.0 && lo.f < f0_) return lo;
        return std::nullopt;
    }

    const Objective& f_;
    const MinimizeOptions& opt_;
    int& evals_;
    const Eigen::VectorXd* x_{nullptr};
    const Eigen::VectorXd* d_{nullptr};
    double f0_{0.0};
    double slope0_{0.0};
};

}  // namespace detail

inline MinimizeResult minimize(const Objective& objective, Eigen::VectorXd x0, const MinimizeOptions& opt = {},
                               const Reparametrize& reparametrize = {}) {
    if (!(opt.gradient_tolerance > 0.0) || !(opt.step_tolerance > 0.0) || !(opt.stall_tolerance > 0.0))
        throw std::invalid_argument("minimize: tolerances must be > 0");
    if (opt.progress_window < 0) throw std::invalid_argument("minimize: progress_window must be >= 0");
    MinimizeResult res;
    res.x = std::move(x0);
    res.gradient.resize(res.x.size());
    res.evaluations = 1;
    try {
        res.value = objective(res.x, res.gradient);
    } catch (const Error& e) {
        throw Error("nonfinite_start", std::string("minimize: objective failed at the initial point: ") + e.what());
    }
    if (!std::isfinite(res.value) || !res.gradient.allFinite())
        throw Error("nonfinite_start", "minimize: objective is not finite at the initial point");

    std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> memory;  // (s, y)
    detail::LineSearch ls(objective, opt, res.evaluations);
    std::deque<double> history{res.value};

    while (true) {
        if (res.gradient.norm() < opt.gradient_tolerance) {
            res.status = MinimizeStatus::GradientTolerance;
            break;
        }
        if (res.iterations >= opt.max_iterations) {
            res.status = MinimizeStatus::MaxIterations;
            break;
        }

        // Two-loop recursion for d = -H g.
        Eigen::VectorXd q = res.gradient;
        std::vector<double> rho(memory.size()), a(memory.size());
        for (int i = static_cast<int>(memory.size()) - 1; i >= 0; --i) {
            rho[i] = 1.0 / memory[i].second.dot(memory[i].first);
            a[i] = rho[i] * memory[i].first.dot(q);
            q -= a[i] * memory[i].second;
        }
        if (!memory.empty()) q *= memory.back().first.dot(memory.back().second) / memory.back().second.squaredNorm();
        for (std::size_t i = 0; i < memory.size(); ++i) {
            const double b = rho[i] * memory[i].second.dot(q);
            q += (a[i] - b) * memory[i].first;
        }
        Eigen::VectorXd d = -q;
        double slope = d.dot(res.gradient);
        if (!(slope < 0.0)) {
            memory.clear();
            d = -res.gradient;
            slope = d.dot(res.gradient);
        }
        const double alpha0 = memory.empty() ? std::min(1.0, 1.0 / d.norm()) : 1.0;

        auto step = ls.run(res.x, res.value, slope, d, alpha0);
        if (!step && !memory.empty()) {
            memory.clear();
            d = -res.gradient;
            slope = d.dot(res.gradient);
            step = ls.run(res.x, res.value, slope, d, std::min(1.0, 1.0 / d.norm()));
        }
        if (!step) {
            res.status = res.gradient.norm() < opt.stall_tolerance ? MinimizeStatus::Stalled
                                                                   : MinimizeStatus::LineSearchFailed;
            break;
        }

        Eigen::VectorXd s = step->alpha * d;
        Eigen::VectorXd y = step->g - res.gradient;
        res.x += s;
        res.value = step->f;
        res.gradient = std::move(step->g);
        ++res.iterations;
        const double step_norm = s.norm();
        if (s.dot(y) > 1e-14 * s.norm() * y.norm()) {
            memory.emplace_back(std::move(s), std::move(y));
            if (static_cast<int>(memory.size()) > opt.memory) memory.pop_front();
        }

        if (reparametrize) {
            if (auto map = reparametrize(res.x)) {
                res.x = map->primal(res.x);
                res.gradient = map->dual(res.gradient);
                for (auto& [sm, ym] : memory) {
                    sm = map->primal(sm);
                    ym = map->dual(ym);
                }
            }
        }
        if (res.gradient.norm() < opt.gradient_tolerance) {
            res.status = MinimizeStatus::GradientTolerance;
            break;
        }
        if (step_norm < opt.step_tolerance) {
            res.status = MinimizeStatus::StepTolerance;
            break;
        }
        if (opt.progress_window > 0) {
            history.push_back(res.value);
            if (static_cast<int>(history.size()) > opt.progress_window + 1) history.pop_front();
            if (static_cast<int>(history.size()) == opt.progress_window + 1 &&
                history.front() - res.value < opt.progress_tolerance * std::max(1.0, std::abs(res.value))) {
                res.status = MinimizeStatus::NoProgress;
                break;
            }
        }
    }
    const double gnorm = res.gradient.norm();
    res.stationary = gnorm < opt.gradient_tolerance ||
                     ((res.status == MinimizeStatus::StepTolerance || res.status == MinimizeStatus::Stalled) &&
                      gnorm < opt.stall_tolerance);
    res.settled = res.status == MinimizeStatus::NoProgress;
    return res;
}

// ---------------------------------------------------------------------------
// Ground states

inline constexpr std::uint64_t kWarmJitterStream = 0xffffffffULL;

template <class T>
struct OptimizerOptions {
    int max_iterations{50000};
    double gradient_tolerance{1e-8};
    double step_tolerance{1e-10};
    int restarts{4};
    double init_scale{0.1};
    std::uint64_t seed{0};
    std::optional<MpsState<T>> warm_start;
    // Relative Gaussian jitter on the warm start. A symmetric (M = 0) warm start
    // otherwise stays on the symmetric manifold, where the gradient keeps it.
    double warm_jitter{1e-2};
    int jobs{1};
    int memory{12};
    int progress_window{0};
    double progress_tolerance{1e-10};

    void validate() const {
        if (!(gradient_tolerance > 0.0) || !(step_tolerance > 0.0))
            throw std::invalid_argument("OptimizerOptions: tolerances must be > 0");
        if (restarts < 1) throw std::invalid_argument("OptimizerOptions: restarts must be >= 1");
        if (max_iterations < 0) throw std::invalid_argument("OptimizerOptions: max_iterations must be >= 0");
        if (!(init_scale > 0.0)) throw std::invalid_argument("OptimizerOptions: init_scale must be > 0");
        if (jobs < 1) throw std::invalid_argument("OptimizerOptions: jobs must be >= 1");
        if (!(warm_jitter >= 0.0)) throw std::invalid_argument("OptimizerOptions: warm_jitter must be >= 0");
        if (progress_window < 0 || !(progress_tolerance >= 0.0))
            throw std::invalid_argument("OptimizerOptions: invalid progress criterion");
    }
};

struct RestartReport {
    int index{0};
    bool warm{false};
    bool failed{false};
    bool converged{false};
    double energy{std::numeric_limits<double>::quiet_NaN()};
    double gradient_norm{std::numeric_limits<double>::quiet_NaN()};
    int iterations{0};
    std::string status;
};

template <class T>
struct GroundState {
    MpsState<T> state;
    EnergyBreakdown energy;
    bool converged{false};
    int iterations{0};
    int restarts_used{0};
    int best_restart{0};
    std::uint64_t seed{0};
    std::vector<RestartReport> reports;
};

// Scales both spin matrices so that <psi|psi> = 1.
template <class T>
MpsState<T> normalized(MpsState<T> st) {
    const double n = norm_sq(st);
    if (!(n > kNormFloor)) throw NormUnderflow(n);
    const double f = 1.0 / std::sqrt(n);
    st.spin[0] *= f;
    st.spin[1] *= f;
    return st;
}

namespace detail {

// Hermitian positive G (with its inverse) bringing the tuple (S, X_1..X_N)
// towards the point of least total Frobenius norm on its similarity orbit.
// Every amplitude is a trace, so M -> G M G^{-1} changes nothing physical,
// but drifting along the orbit makes the matrices large and nearly
// cancelling, which ruins the precision of the energy and its gradient.
template <class T>
std::pair<Mat<T>, Mat<T>> balancing_gauge(const MpsState<T>& st, int max_iterations = 100) {
    std::vector<Mat<T>> a{st.spin[0], st.spin[1]};
    a.insert(a.end(), st.modes.begin(), st.modes.end());
    auto total = [](const std::vector<Mat<T>>& ms) {
        double t = 0.0;
        for (const auto& m : ms) t += m.squaredNorm();
        return t;
    };
    const Mat<T> id = Mat<T>::Identity(st.chi, st.chi);
    Mat<T> g = id, g_inv = id;
    double current = total(a);
    for (int it = 0; it < max_iterations && current > 0.0; ++it) {
        Mat<T> p = Mat<T>::Zero(st.chi, st.chi);
        for (const auto& m : a) p += m * m.adjoint() - m.adjoint() * m;
        if (p.norm() <= 1e-3 * current) break;
        Eigen::SelfAdjointEigenSolver<Mat<T>> es(p);
        double eps = 0.5 / current;
        bool accepted = false;
        for (int tries = 0; tries < 30 && !accepted; ++tries, eps *= 0.5) {
            const Eigen::VectorXd lam = es.eigenvalues();
            const Mat<T> e = es.eigenvectors() * (-eps * lam).array().exp().matrix().asDiagonal() *
                             es.eigenvectors().adjoint();
            const Mat<T> e_inv = es.eigenvectors() * (eps * lam).array().exp().matrix().asDiagonal() *
                                 es.eigenvectors().adjoint();
            std::vector<Mat<T>> trial;
            for (const auto& m : a) trial.push_back(e * m * e_inv);
            const double t = total(trial);
            if (std::isfinite(t) && t < current) {
                a = std::move(trial);
                g = e * g;
                g_inv = g_inv * e_inv;
                current = t;
                accepted = true;
            }
        }
        if (!accepted) break;
    }
    return {g, g_inv};
}

// Similarity gauge M -> G M G^{-1} on every matrix followed by spin scaling,
// as a linear map on the parameter vector together with its dual.
template <class T>
Reparametrization gauge_reparametrization(Mat<T> g, Mat<T> g_inv, double spin_factor, int chi, int n_sites) {
    Reparametrization r;
    r.primal = [=](const Eigen::VectorXd& v) {
        auto st = from_parameters<T>(v, chi, n_sites);
        for (auto& s : st.spin) s = spin_factor * (g * s * g_inv);
        for (auto& x : st.modes) x = g * x * g_inv;
        return to_parameters(st);
    };
    r.dual = [=](const Eigen::VectorXd& v) {
        auto st = from_parameters<T>(v, chi, n_sites);
        const Mat<T> left = g_inv.adjoint(), right = g.adjoint();
        for (auto& s : st.spin) s = (left * s * right) / spin_factor;
        for (auto& x : st.modes) x = left * x * right;
        return to_parameters(st);
    };
    return r;
}

template <class T>
struct RestartOutcome {
    RestartReport report;
    std::optional<MpsState<T>> state;
};

template <class T>
RestartOutcome<T> run_restart(const EnergyFunctional<T>& functional, const MpsState<T>& init, int chi,
                              const MinimizeOptions& mopt, int index, bool warm) {
    const int n = functional.n_sites();
    RestartOutcome<T> out;
    out.report.index = index;
    out.report.warm = warm;

    // The last evaluated point and its norm, reused by the rescaling hook.
    Eigen::VectorXd last_x;
    double last_norm = 0.0;
    Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        const auto st = from_parameters<T>(x, chi, n);
        EnergyValue v = functional.evaluate(st, true);
        g = std::move(v.gradient);
        last_x = x;
        last_norm = v.norm;
        return v.total;
    };
    Reparametrize reparametrize = [&](const Eigen::VectorXd& x) -> std::optional<Reparametrization> {
        double nrm = last_norm;
        if (last_x.size() != x.size() || last_x != x) nrm = norm_sq(from_parameters<T>(x, chi, n));
        if (!(nrm > kNormFloor) || !std::isfinite(nrm)) return std::nullopt;
        auto [g, g_inv] = balancing_gauge(from_parameters<T>(x, chi, n));
        if (!g.allFinite() || !g_inv.allFinite()) {
            g.setIdentity(chi, chi);
            g_inv.setIdentity(chi, chi);
        }
        return gauge_reparametrization<T>(std::move(g), std::move(g_inv), 1.0 / std::sqrt(nrm), chi, n);
    };

    try {
        MpsState<T> start = init;
        const double n0 = norm_sq(start);
        if (n0 > kNormFloor && std::isfinite(n0)) {
            start.spin[0] /= std::sqrt(n0);
            start.spin[1] /= std::sqrt(n0);
        }
        MinimizeResult r = minimize(objective, to_parameters(start), mopt, reparametrize);
        out.state = normalized(from_parameters<T>(r.x, chi, n));
        out.report.energy = r.value;
        out.report.gradient_norm = r.gradient.norm();
        out.report.iterations = r.iterations;
        out.report.converged = r.converged();
        out.report.status = to_string(r.status);
    } catch (const Error& e) {
        out.report.failed = true;
        out.report.status = e.code() + ": " + e.what();
    }
    return out;
}

}  // namespace detail

// Lowest-energy result over independent minimizations. The warm start, when
// given, runs first (index 0) in addition to `restarts` cold random starts.
template <class T>
GroundState<T> ground_state(const SbmParams& params, const ChainCoefficients& chain, int chi,
                            const OptimizerOptions<T>& options) {
    params.validate();
    chain.validate();
    options.validate();
    if (chi < 1) throw std::invalid_argument("ground_state: chi must be >= 1");
    const int n = chain.n_sites();
    const EnergyFunctional<T> functional(chain, params.delta);
    MinimizeOptions mopt;
    mopt.max_iterations = options.max_iterations;
    mopt.gradient_tolerance = options.gradient_tolerance;
    mopt.step_tolerance = options.step_tolerance;
    mopt.memory = options.memory;
    mopt.progress_window = options.progress_window;
    mopt.progress_tolerance = options.progress_tolerance;

    std::vector<MpsState<T>> starts;
    std::vector<bool> warm;
    if (options.warm_start) {
        const auto& ws = *options.warm_start;
        if (ws.n_sites != n) throw std::invalid_argument("ground_state: warm start has a different chain length");
        if (ws.chi > chi) throw std::invalid_argument("ground_state: warm start has a larger chi");
        MpsState<T> start = embed(ws, chi);
        if (options.warm_jitter > 0.0) {
            Rng rng(derive_seed(options.seed, kWarmJitterStream));
            auto jitter = [&](Mat<T>& m) {
                const double sd = options.warm_jitter * m.norm() / chi;
                if (sd > 0.0) m += random_matrix<T>(chi, sd, rng);
            };
            for (auto& m : start.spin) jitter(m);
            for (auto& m : start.modes) jitter(m);
        }
        starts.push_back(std::move(start));
        warm.push_back(true);
    }
    for (int r = 0; r < options.restarts; ++r) {
        Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(r)));
        starts.push_back(random_state<T>(chi, n, options.init_scale, rng));
        warm.push_back(false);
    }

    const int total = static_cast<int>(starts.size());
    std::vector<detail::RestartOutcome<T>> outcomes(total);
    const int jobs = std::min(options.jobs, total);
    if (jobs <= 1) {
        for (int i = 0; i < total; ++i) outcomes[i] = detail::run_restart(functional, starts[i], chi, mopt, i, warm[i]);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < jobs; ++w) {
            pool.emplace_back([&, w] {
                for (int i = w; i < total; i += jobs)
                    outcomes[i] = detail::run_restart(functional, starts[i], chi, mopt, i, warm[i]);
            });
        }
        for (auto& t : pool) t.join();
    }

    // Converged results win over unconverged ones; ties within 1e-12 go to the lower index.
    int best = -1;
    for (int i = 0; i < total; ++i) {
        const auto& r = outcomes[i].report;
        if (r.failed || !std::isfinite(r.energy)) continue;
        if (best < 0) {
            best = i;
            continue;
        }
        const auto& b = outcomes[best].report;
        if (r.converged != b.converged) {
            if (r.converged) best = i;
            continue;
        }
        if (r.energy < b.energy - 1e-12) best = i;
    }

    GroundState<T> gs;
    gs.seed = options.seed;
    gs.restarts_used = total;
    for (const auto& o : outcomes) gs.reports.push_back(o.report);
    if (best < 0) {
        std::ostringstream msg;
        msg << "all " << total << " restarts failed:";
        for (const auto& r : gs.reports) msg << " [" << r.index << "] " << r.status << ";";
        throw Error("all_restarts_failed", msg.str());
    }
    gs.best_restart = best;
    gs.state = *outcomes[best].state;
    gs.energy = energy(gs.state, chain, params.delta);
    gs.converged = outcomes[best].report.converged;
    gs.iterations = outcomes[best].report.iterations;
    return gs;
}

}  // namespace softmps
