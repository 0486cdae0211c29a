// Acceptance runner: one PASS/FAIL line per criterion.
//   acceptance [criteria...]   (default 1 2 3 4 5 6)

#include "softmps/criticality.hpp"
#include "softmps/energy.hpp"
#include "softmps/fock_oracle.hpp"
#include "softmps/optimizer.hpp"
#include "softmps/oracle_suite.hpp"
#include "softmps_cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace softmps;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass{false};
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

SbmParams model(double s, double alpha) {
    SbmParams p;
    p.s = s;
    p.alpha = alpha;
    p.delta = 0.1;
    p.omega_c = 1.0;
    return p;
}

Verdict polaron_table() {
    const std::map<double, double> table{{0.1, 0.0065}, {0.2, 0.0168}, {0.3, 0.0316}, {0.4, 0.0519}, {0.5, 0.0784}};
    const fs::path dir = fs::temp_directory_path() / "softmps_acceptance_polaron";
    double worst = 0.0;
    bool ok = true;
    for (const auto& [s, expected] : table) {
        const std::string s_arg = fmt("%.1f", s);
        const std::string out_arg = dir.string();
        const char* argv[] = {"softmps", "polaron", "--s", s_arg.c_str(), "--out", out_arg.c_str()};
        std::ostringstream out, err;
        const int code = cli::run(6, argv, out, err);
        const double printed = code == 0 ? std::stod(out.str()) : NAN;
        const double direct = polaron_alpha_c(s, 0.1, 1.0);
        for (double v : {printed, direct}) {
            const double dev = std::abs(v - expected);
            if (!(dev <= 1e-4 + 1e-12)) ok = false;
            worst = std::max(worst, std::isfinite(dev) ? dev : INFINITY);
        }
    }
    fs::remove_all(dir);
    return {ok, fmt("worst |alpha_c - table| = %.2e over 5 exponents (tolerance 1e-4)", worst)};
}

Verdict oracle_equivalence() {
    oracle::SuiteOptions so;
    const auto real = oracle::equivalence_suite<double>(so);
    const auto cplx = oracle::equivalence_suite<std::complex<double>>(so);
    double worst = 0.0;
    int passed = 0, total = 0;
    for (const auto* rep : {&real, &cplx})
        for (const auto& q : rep->quantities) {
            worst = std::max(worst, q.worst);
            passed += q.passed;
            total += q.total;
        }
    return {real.passed() && cplx.passed() && real.instances == 200 && cplx.instances == 200,
            fmt("%d/%d checks over 200 real + 200 complex instances, worst relative deviation %.2e (tolerance 1e-8)",
                passed, total, worst)};
}

Verdict trivial_limit() {
    bool ok = true;
    double worst_e = 0.0, worst_m = 0.0, worst_n = 0.0;
    for (int n : {5, 50}) {
        for (int chi : {1, 2, 3}) {
            const auto p = model(0.5, 0.0);
            OptimizerOptions<double> opt;
            opt.seed = 1;
            opt.restarts = 2;
            const auto gs = ground_state(p, linear_chain_coefficients(p, n), chi, opt);
            const auto sb = spin_block(gs.state);
            const auto occ = occupations(gs.state);
            const double de = std::abs(gs.energy.total + 0.05);
            const double nmax = *std::max_element(occ.begin(), occ.end());
            worst_e = std::max(worst_e, de);
            worst_m = std::max(worst_m, sb.magnetization);
            worst_n = std::max(worst_n, nmax);
            if (!(de <= 1e-6 && sb.magnetization < 1e-4 && nmax < 1e-6)) ok = false;
        }
    }
    return {ok, fmt("worst |E + Delta/2| = %.1e, max M = %.1e, max occupation = %.1e", worst_e, worst_m, worst_n)};
}

Verdict variational_bound() {
    bool ok = true;
    std::string detail;
    for (double alpha : {0.02, 0.05, 0.1}) {
        const auto p = model(0.2, alpha);
        const auto chain = linear_chain_coefficients(p, 2);
        const double exact = oracle::exact_ground_state(chain, p.delta, {12, 12}).energy;
        OptimizerOptions<double> opt;
        opt.seed = 3;
        opt.restarts = 8;
        const auto gs = ground_state(p, chain, 4, opt);
        const double gap = gs.energy.total - exact;
        if (!(gap >= -1e-9 && gap <= 1e-3)) ok = false;
        detail += fmt("%salpha=%.2f: E-E_exact=%.2e", detail.empty() ? "" : ", ", alpha, gap);
    }
    return {ok, detail + " (need -1e-9 <= gap <= 1e-3)"};
}

Verdict gradient_contract() {
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        Rng rng(derive_seed(555, i));
        const auto st = random_state<double>(2, 4, 0.4, rng);
        const auto p = model(0.1 + 0.04 * i, 0.02 + 0.01 * i);
        const auto chain = linear_chain_coefficients(p, 4);
        const EnergyFunctional<double> f(chain, p.delta);
        const Eigen::VectorXd g = f.evaluate(st, true).gradient;
        const Eigen::VectorXd v = to_parameters(st);
        Eigen::VectorXd fd(v.size());
        for (Eigen::Index k = 0; k < v.size(); ++k) {
            const double h = 1e-6 * std::max(1.0, std::abs(v[k]));
            Eigen::VectorXd a = v, b = v;
            a[k] += h;
            b[k] -= h;
            fd[k] = (f.value(from_parameters<double>(a, 2, 4)) - f.value(from_parameters<double>(b, 2, 4))) / (2 * h);
        }
        // Components far below the largest one are compared against 1e-3 of it.
        const double floor = 1e-3 * fd.cwiseAbs().maxCoeff();
        for (Eigen::Index k = 0; k < v.size(); ++k)
            worst = std::max(worst, std::abs(g[k] - fd[k]) / std::max(std::abs(fd[k]), floor));
    }
    return {worst < 1e-5, fmt("worst relative deviation %.2e over 20 states (tolerance 1e-5)", worst)};
}

Verdict fit_recovery() {
    // Exact synthetic data.
    std::vector<std::pair<double, double>> series;
    for (int n : {6, 8, 10, 14, 20, 30}) series.emplace_back(n, 0.0218 * std::exp(0.7 / n));
    const auto ex = extrapolate_alpha_c(series);
    std::vector<std::pair<double, double>> power;
    for (int k = 0; k < 20; ++k) {
        const double r = 0.01 * std::pow(30.0, k / 19.0);
        power.emplace_back(0.03 * (1 + r), 0.9 * std::pow(r, 0.5));
    }
    const auto pw = fit_critical_exponent(power, 0.03, {0.0099, 0.31});
    const double err_a = std::abs(ex.value("a") / 0.0218 - 1), err_b = std::abs(ex.value("b") - 0.7);
    const double err_e = std::abs(pw.value("exponent") - 0.5), err_p = std::abs(pw.value("prefactor") / 0.9 - 1);
    const bool exact_ok = err_a < 1e-12 && err_b < 1e-12 && err_e < 1e-12 && err_p < 1e-12;

    int hits_a = 0, hits_b = 0, hits_e = 0;
    for (int trial = 0; trial < 100; ++trial) {
        Rng rng(derive_seed(2024, trial));
        std::vector<std::pair<double, double>> pts, mag;
        for (int k = 0; k < 20; ++k) {
            const double n = 5 + 2 * k;
            pts.emplace_back(n, 0.0218 * std::exp(0.7 / n) * (1 + 0.01 * rng.normal()));
            const double r = 0.01 * std::pow(30.0, k / 19.0);
            mag.emplace_back(0.03 * (1 + r), 0.9 * std::pow(r, 0.5) * (1 + 0.01 * rng.normal()));
        }
        const auto fa = extrapolate_alpha_c(pts);
        const auto fe = fit_critical_exponent(mag, 0.03, {0.0099, 0.31});
        if (std::abs(fa.value("a") - 0.0218) <= 3 * fa.stderr_of("a")) ++hits_a;
        if (std::abs(fa.value("b") - 0.7) <= 3 * fa.stderr_of("b")) ++hits_b;
        if (std::abs(fe.value("exponent") - 0.5) <= 3 * fe.stderr_of("exponent")) ++hits_e;
    }
    const bool noisy_ok = hits_a >= 95 && hits_b >= 95 && hits_e >= 95;
    return {exact_ok && noisy_ok,
            fmt("exact max error %.1e; noisy within 3 stderr: a %d/100, b %d/100, exponent %d/100",
                std::max({err_a, err_b, err_e, err_p}), hits_a, hits_b, hits_e)};
}

OptimizerOptions<double> physics_options(std::uint64_t seed, int restarts = 2) {
    OptimizerOptions<double> opt;
    opt.seed = seed;
    opt.restarts = restarts;
    return opt;
}

SweepSettings sweep_settings(double s, int n) {
    SweepSettings cfg;
    cfg.base = model(s, 0.0);
    cfg.n_sites = n;
    cfg.chi = 2;
    cfg.observables.entropy_sites = 1;
    return cfg;
}

Verdict mean_field_exponent() {
    const auto cfg = sweep_settings(0.3, 20);
    // Clean minima converge in < 1000 iterations; trapped restarts are cut short.
    auto opt = physics_options(30, 10);
    opt.max_iterations = 3000;
    const auto det = detect_alpha_c<double>(cfg, {0.02, 0.2}, 0.01, 1e-5, opt);
    std::vector<double> grid;
    for (int k = 0; k < 10; ++k) grid.push_back(det.alpha_c * (1 + 0.012 * std::pow(0.29 / 0.012, k / 9.0)));
    auto sweep_opt = opt;
    sweep_opt.warm_start.reset();
    const auto sw = sweep_alpha(cfg, grid, sweep_opt);
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : sw.records)
        if (r.ground) pts.emplace_back(r.alpha, r.observables.magnetization);
    try {
        const auto fit = fit_critical_exponent(pts, det.alpha_c, {0.01, 0.3});
        const double beta = fit.value("exponent");
        return {std::abs(beta - 0.5) <= 0.1,
                fmt("alpha_c(N=20) = %.6f, M from %.3f to %.3f, exponent %.3f +- %.3f from %d points (need 0.5 +- 0.1)",
                    det.alpha_c, pts.front().second, pts.back().second, beta, fit.stderr_of("exponent"), fit.n_points)};
    } catch (const std::exception& e) {
        return {false, fmt("alpha_c(N=20) = %.6f, fit failed: %s", det.alpha_c, e.what())};
    }
}

Verdict critical_coupling() {
    std::vector<std::pair<double, double>> pts;
    std::string detail;
    for (int n : {6, 8, 10, 14, 20}) {
        const auto det = detect_alpha_c<double>(sweep_settings(0.2, n), {0.01, 0.12}, 0.01, 2e-4, physics_options(7));
        pts.emplace_back(n, det.alpha_c);
        detail += fmt("N=%d: %.4f, ", n, det.alpha_c);
    }
    const auto fit = extrapolate_alpha_c(pts);
    const double a = fit.value("a");
    return {std::abs(a / 0.0218 - 1) <= 0.2,
            detail + fmt("a = %.4f +- %.4f (need 0.0218 +- 20%%)", a, fit.stderr_of("a"))};
}

Verdict phase_structure() {
    const auto cfg = sweep_settings(0.2, 10);
    const auto det = detect_alpha_c<double>(cfg, {0.01, 0.12}, 0.01, 2e-4, physics_options(9));
    std::vector<double> grid;
    for (double a = 0.01; a < 0.1201; a += 0.005) grid.push_back(a);
    auto opt = physics_options(19);
    const auto sw = sweep_alpha(cfg, grid, opt);
    std::vector<double> m, ent, occ1;
    for (const auto& r : sw.records) {
        if (!r.ground) return {false, "sweep point failed at alpha=" + std::to_string(r.alpha) + ": " + r.error};
        m.push_back(r.observables.magnetization);
        ent.push_back(r.observables.spin_entropy);
        occ1.push_back(r.observables.occupations.at(0));
    }
    bool below_zero = true, above_monotone = true;
    double max_below = 0.0;
    int n_below = 0, n_above = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < det.lo) {
            ++n_below;
            max_below = std::max(max_below, m[i]);
            if (m[i] > 0.01) below_zero = false;
        } else if (grid[i] > det.hi) {
            ++n_above;
            if (i > 0 && grid[i - 1] > det.hi && m[i] < m[i - 1] - 1e-6) above_monotone = false;
        }
    }
    const auto peak = std::max_element(ent.begin(), ent.end()) - ent.begin();
    const bool interior = peak > 0 && peak + 1 < static_cast<long>(ent.size());
    const bool occ_up = occ1.back() > occ1.front();
    std::size_t first_above = 0;
    while (first_above < grid.size() && grid[first_above] <= det.hi) ++first_above;
    const bool jump_up = first_above > 0 && first_above < grid.size() && occ1[first_above] > occ1[first_above - 1];
    return {below_zero && above_monotone && interior && occ_up && jump_up && n_below > 0 && n_above > 1,
            fmt("alpha_c = %.4f; max M below %.1e (%d points); M monotone above: %s (%d points); entropy peak at "
                "alpha=%.3f (interior: %s); n_1 %.4f -> %.4f across the grid, up across alpha_c: %s",
                det.alpha_c, max_below, n_below, above_monotone ? "yes" : "no", n_above, grid[peak],
                interior ? "yes" : "no", occ1.front(), occ1.back(), jump_up ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
    const std::map<int, std::function<Verdict()>> criteria{
        {1, polaron_table},     {2, oracle_equivalence},  {3, trivial_limit},   {4, variational_bound},
        {5, gradient_contract}, {6, fit_recovery},        {7, mean_field_exponent}, {8, critical_coupling},
        {9, phase_structure}};
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        const int c = std::atoi(argv[i]);
        if (!criteria.count(c)) {
            std::cerr << "acceptance: unknown criterion '" << argv[i] << "'\n";
            return 2;
        }
        selected.push_back(c);
    }
    if (selected.empty()) selected = {1, 2, 3, 4, 5, 6};

    bool all = true;
    for (int c : selected) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria.at(c)();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << "criterion " << c << ": " << (v.pass ? "PASS" : "FAIL") << " " << v.detail
                  << fmt(" [%.1fs]", dt) << std::endl;
        all = all && v.pass;
    }
    return all ? 0 : 1;
}
