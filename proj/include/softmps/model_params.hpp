// Sub-ohmic spin-boson model parameters and the bosonic chain they map onto.

#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace softmps {

struct SbmParams {
    double s{0.5};        // spectral exponent, 0 < s < 1
    double alpha{0.0};    // coupling strength
    double delta{0.1};    // tunnelling amplitude
    double omega_c{1.0};  // cutoff frequency

    void validate() const {
        if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("SbmParams: s must lie in (0, 1)");
        if (!(alpha >= 0.0)) throw std::invalid_argument("SbmParams: alpha must be >= 0");
        if (!(delta > 0.0)) throw std::invalid_argument("SbmParams: delta must be > 0");
        if (!(omega_c > 0.0)) throw std::invalid_argument("SbmParams: omega_c must be > 0");
    }
};

enum class ChainScheme { Linear, Logarithmic };

inline std::string to_string(ChainScheme scheme) {
    return scheme == ChainScheme::Linear ? "linear" : "log";
}

struct ChainCoefficients {
    double c0{0.0};
    std::vector<double> omega;  // N site energies, site m at index m-1
    std::vector<double> t;      // N-1 hoppings between sites m and m+1
    ChainScheme scheme{ChainScheme::Linear};
    double lambda{0.0};  // discretization parameter, Logarithmic only

    int n_sites() const { return static_cast<int>(omega.size()); }

    void validate() const {
        if (omega.empty()) throw std::invalid_argument("ChainCoefficients: need at least one site");
        if (t.size() + 1 != omega.size())
            throw std::invalid_argument("ChainCoefficients: need exactly N-1 hoppings");
        if (scheme == ChainScheme::Linear) {
            for (double w : omega)
                if (!(w > 0.0)) throw std::invalid_argument("ChainCoefficients: omega must be > 0");
        }
    }
};

// J(w) = 2 pi alpha w_c^(1-s) w^s for 0 < w < w_c, zero otherwise (including w = w_c).
inline double spectral_density(const SbmParams& p, double omega) {
    if (!(omega >= 0.0)) throw std::invalid_argument("spectral_density: omega must be >= 0");
    if (omega == 0.0 || omega >= p.omega_c) return 0.0;
    return 2.0 * std::numbers::pi * p.alpha * std::pow(p.omega_c, 1.0 - p.s) * std::pow(omega, p.s);
}

inline double spin_chain_coupling(const SbmParams& p) {
    return std::sqrt(p.alpha / (2.0 * (p.s + 1.0))) * p.omega_c;
}

// Closed-form orthogonal-polynomial chain for the hard-cutoff power law.
// Chain mode n (0-based) sits on MPS site m = n + 1.
inline double linear_site_energy(double s, double omega_c, int n) {
    const double dn = n;
    return 0.5 * omega_c * (1.0 + s * s / ((s + 2.0 * dn) * (2.0 + s + 2.0 * dn)));
}

inline double linear_hopping(double s, double omega_c, int n) {
    const double dn = n;
    return omega_c * (1.0 + dn) * (1.0 + s + dn) / ((s + 2.0 + 2.0 * dn) * (3.0 + s + 2.0 * dn)) *
           std::sqrt((3.0 + s + 2.0 * dn) / (1.0 + s + 2.0 * dn));
}

inline ChainCoefficients linear_chain_coefficients(const SbmParams& p, int n_sites) {
    p.validate();
    if (n_sites < 1) throw std::invalid_argument("linear_chain_coefficients: N must be >= 1");
    ChainCoefficients c;
    c.scheme = ChainScheme::Linear;
    c.c0 = spin_chain_coupling(p);
    c.omega.reserve(n_sites);
    for (int n = 0; n < n_sites; ++n) c.omega.push_back(linear_site_energy(p.s, p.omega_c, n));
    for (int n = 0; n + 1 < n_sites; ++n) c.t.push_back(linear_hopping(p.s, p.omega_c, n));
    return c;
}

// Constants defining a logarithmically discretized chain:
//   omega_n = zeta (A_n + C_n),  t_n = -zeta (N_{n+1} / N_n) A_n.
struct LogCoefficients {
    double zeta{0.0};
    std::vector<double> A, C, N;  // indexed n = 0..max_n
};

class LogCoefficientProvider {
public:
    virtual ~LogCoefficientProvider() = default;
    // Must return A, C, N with at least max_n + 1 entries.
    virtual LogCoefficients coefficients(const SbmParams& p, double lambda, int max_n) const = 0;
};

// Little q-Jacobi recurrence with q = 1/Lambda, a = q^s, b = 1. The discrete
// measure has nodes zeta q^k and weights q^(k(1+s)), i.e. the Wilson star of the
// hard-cutoff power law with each interval [Lambda^-(k+1), Lambda^-k] w_c
// represented by its J-weighted mean frequency.
class QJacobiLogProvider final : public LogCoefficientProvider {
public:
    LogCoefficients coefficients(const SbmParams& p, double lambda, int max_n) const override {
        if (!(lambda > 1.0)) throw std::invalid_argument("log provider: lambda must be > 1");
        if (max_n < 0) throw std::invalid_argument("log provider: max_n must be >= 0");
        const double s = p.s;
        const double q = 1.0 / lambda;
        const double a = std::pow(q, s);
        auto qp = [q](double e) { return std::pow(q, e); };

        LogCoefficients out;
        out.zeta = (1.0 + s) / (2.0 + s) * (1.0 - qp(2.0 + s)) / (1.0 - qp(1.0 + s)) * p.omega_c;
        out.A.resize(max_n + 1);
        out.C.resize(max_n + 1);
        out.N.resize(max_n + 1);
        for (int n = 0; n <= max_n; ++n) {
            const double dn = n;
            const double up = 1.0 - a * qp(dn + 1.0);
            out.A[n] = qp(dn) * up * up / ((1.0 - a * qp(2.0 * dn + 1.0)) * (1.0 - a * qp(2.0 * dn + 2.0)));
            const double dq = 1.0 - qp(dn);
            out.C[n] = n == 0 ? 0.0
                              : a * qp(dn) * dq * dq /
                                    ((1.0 - a * qp(2.0 * dn)) * (1.0 - a * qp(2.0 * dn + 1.0)));
        }
        // h_n / h_0 = (aq)^n (1 - aq) / (1 - a q^(2n+1)) [(q;q)_n / (aq;q)_n]^2, N_n = sqrt(h_n / h_0).
        double ratio = 1.0;  // (q;q)_n / (aq;q)_n
        for (int n = 0; n <= max_n; ++n) {
            if (n > 0) ratio *= (1.0 - qp(n)) / (1.0 - a * qp(n));
            const double h = std::pow(a * q, n) * (1.0 - a * q) / (1.0 - a * qp(2.0 * n + 1.0)) * ratio * ratio;
            out.N[n] = std::sqrt(h);
        }
        return out;
    }
};

inline ChainCoefficients log_chain_coefficients(const SbmParams& p, int n_sites, double lambda,
                                                const LogCoefficientProvider& provider) {
    p.validate();
    if (n_sites < 1) throw std::invalid_argument("log_chain_coefficients: N must be >= 1");
    if (!(lambda > 1.0)) throw std::invalid_argument("log_chain_coefficients: lambda must be > 1");
    const LogCoefficients k = provider.coefficients(p, lambda, n_sites);
    const auto need = static_cast<std::size_t>(n_sites) + 1;
    if (k.A.size() < need || k.C.size() < need || k.N.size() < need)
        throw std::invalid_argument("log_chain_coefficients: provider returned too few coefficients");

    ChainCoefficients c;
    c.scheme = ChainScheme::Logarithmic;
    c.lambda = lambda;
    c.c0 = spin_chain_coupling(p);
    for (int n = 0; n < n_sites; ++n) c.omega.push_back(k.zeta * (k.A[n] + k.C[n]));
    for (int n = 0; n + 1 < n_sites; ++n) {
        if (k.N[n] == 0.0) throw std::invalid_argument("log_chain_coefficients: zero normalization N_n");
        c.t.push_back(-k.zeta * (k.N[n + 1] / k.N[n]) * k.A[n]);
    }
    return c;
}

inline ChainCoefficients log_chain_coefficients(const SbmParams& p, int n_sites, double lambda) {
    return log_chain_coefficients(p, n_sites, lambda, QJacobiLogProvider{});
}

inline ChainCoefficients make_chain(const SbmParams& p, int n_sites, ChainScheme scheme, double lambda = 1.5) {
    return scheme == ChainScheme::Linear ? linear_chain_coefficients(p, n_sites)
                                         : log_chain_coefficients(p, n_sites, lambda);
}

}  // namespace softmps
