#include "softmps/model_params.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace softmps;

namespace {

SbmParams params(double s, double alpha, double omega_c = 1.0) {
    SbmParams p;
    p.s = s;
    p.alpha = alpha;
    p.omega_c = omega_c;
    return p;
}

}  // namespace

TEST(SpectralDensity, VanishesAboveCutoff) { EXPECT_EQ(spectral_density(params(0.2, 0.0175), 2.0), 0.0); }

TEST(SpectralDensity, JustBelowCutoff) {
    EXPECT_NEAR(spectral_density(params(0.2, 0.0175), std::nextafter(1.0, 0.0)), 0.109956, 1e-6);
    EXPECT_NEAR(spectral_density(params(0.2, 0.0175), std::nextafter(1.0, 0.0)), 2 * std::numbers::pi * 0.0175, 1e-12);
}

TEST(SpectralDensity, ZeroAtOriginAndAtCutoff) {
    EXPECT_EQ(spectral_density(params(0.7, 0.3), 0.0), 0.0);
    EXPECT_EQ(spectral_density(params(0.7, 0.3), 1.0), 0.0);
}

TEST(SpectralDensity, RejectsNegativeFrequency) {
    EXPECT_THROW(spectral_density(params(0.2, 0.1), -1e-3), std::invalid_argument);
}

TEST(Params, Validation) {
    EXPECT_THROW(params(0.0, 0.1).validate(), std::invalid_argument);
    EXPECT_THROW(params(1.0, 0.1).validate(), std::invalid_argument);
    EXPECT_THROW(params(0.5, -0.1).validate(), std::invalid_argument);
    auto p = params(0.5, 0.1);
    p.delta = 0.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = params(0.5, 0.1, 0.0);
    EXPECT_THROW(p.validate(), std::invalid_argument);
    EXPECT_NO_THROW(params(0.5, 0.0).validate());
}

TEST(LinearChain, SpinCoupling) {
    const auto c = linear_chain_coefficients(params(0.2, 0.0175), 3);
    EXPECT_NEAR(c.c0, 0.0853912, 1e-7);
}

TEST(LinearChain, FirstSite) {
    const auto c = linear_chain_coefficients(params(0.2, 0.0175), 2);
    EXPECT_NEAR(c.omega[0], 0.545455, 1e-6);
    EXPECT_NEAR(c.t[0], 0.278352, 1.5e-6);
    EXPECT_NEAR(c.omega[0], 0.5 * (1 + 0.04 / (0.2 * 2.2)), 1e-15);
}

TEST(LinearChain, Lengths) {
    const auto c = linear_chain_coefficients(params(0.4, 0.1), 7);
    EXPECT_EQ(c.n_sites(), 7);
    EXPECT_EQ(c.omega.size(), 7u);
    EXPECT_EQ(c.t.size(), 6u);
    EXPECT_TRUE(linear_chain_coefficients(params(0.4, 0.1), 1).t.empty());
    EXPECT_THROW(linear_chain_coefficients(params(0.4, 0.1), 0), std::invalid_argument);
}

TEST(LinearChain, AsymptoticLimits) {
    for (double s : {0.1, 0.5, 0.9}) {
        EXPECT_NEAR(linear_site_energy(s, 1.0, 100000), 0.5, 1e-9);
        EXPECT_NEAR(linear_hopping(s, 1.0, 100000), 0.25, 1e-5);
    }
}

TEST(LinearChain, SiteEnergiesStrictlyDecreasingWithinBounds) {
    for (double s : {0.05, 0.2, 0.5, 0.75, 0.95}) {
        const double upper = 0.5 * (1.0 + s * s / (s * (2.0 + s)));
        double prev = linear_site_energy(s, 1.0, 0);
        EXPECT_LE(prev, upper * (1 + 1e-15));
        for (int n = 1; n < 10000; ++n) {
            const double w = linear_site_energy(s, 1.0, n);
            ASSERT_LT(w, prev) << "s=" << s << " n=" << n;
            ASSERT_GT(w, 0.5);
            prev = w;
        }
    }
}

TEST(LinearChain, HoppingsPositive) {
    for (double s : {0.05, 0.5, 0.95})
        for (int n = 0; n < 10000; ++n) ASSERT_GT(linear_hopping(s, 1.0, n), 0.0);
}

TEST(LinearChain, ScaleCovariance) {
    const auto a = linear_chain_coefficients(params(0.3, 0.05, 1.0), 8);
    const auto b = linear_chain_coefficients(params(0.3, 0.05, 4.0), 8);
    EXPECT_EQ(b.c0, 4.0 * a.c0);
    for (int m = 0; m < 8; ++m) EXPECT_EQ(b.omega[m], 4.0 * a.omega[m]);
    for (int m = 0; m < 7; ++m) EXPECT_EQ(b.t[m], 4.0 * a.t[m]);
}

TEST(LinearChain, Deterministic) {
    const auto a = linear_chain_coefficients(params(0.3, 0.05), 12);
    const auto b = linear_chain_coefficients(params(0.3, 0.05), 12);
    EXPECT_EQ(a.omega, b.omega);
    EXPECT_EQ(a.t, b.t);
}

// Orthogonal polynomials of w^s dw on [0, 1]: substituting u = w^(1+s) makes
// the measure uniform in u, so Gauss-Legendre in u followed by Lanczos gives
// the chain independently of the closed forms.
TEST(LinearChain, MatchesLanczosOnContinuousBath) {
    const auto [u, w] = softmps::testing::gauss_legendre01(1200);
    for (double s : {0.2, 0.5, 0.8}) {
        std::vector<double> nodes(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) nodes[i] = std::pow(u[i], 1.0 / (1.0 + s));
        const auto [diag, off] = softmps::testing::lanczos(nodes, w, 8);
        const auto c = linear_chain_coefficients(params(s, 0.1), 8);
        for (int n = 0; n < 8; ++n) EXPECT_NEAR(c.omega[n], diag[n], 1e-7) << "s=" << s << " n=" << n;
        for (int n = 0; n < 7; ++n) EXPECT_NEAR(c.t[n], off[n], 1e-7) << "s=" << s << " n=" << n;
    }
}

namespace {

struct LinearDisguise final : LogCoefficientProvider {
    LogCoefficients coefficients(const SbmParams& p, double, int max_n) const override {
        LogCoefficients k;
        k.zeta = 1.0;
        // A_n chosen so that -N_{n+1}/N_n A_n = t_n with N_n = (-1)^n.
        for (int n = 0; n <= max_n; ++n) {
            const double a = linear_hopping(p.s, p.omega_c, n);
            k.A.push_back(a);
            k.C.push_back(linear_site_energy(p.s, p.omega_c, n) - a);
            k.N.push_back(n % 2 == 0 ? 1.0 : -1.0);
        }
        return k;
    }
};

struct ZeroA final : LogCoefficientProvider {
    LogCoefficients coefficients(const SbmParams&, double, int max_n) const override {
        LogCoefficients k;
        k.zeta = 0.7;
        k.A.assign(max_n + 1, 0.0);
        k.C.assign(max_n + 1, 0.4);
        k.N.assign(max_n + 1, 1.0);
        return k;
    }
};

struct Short final : LogCoefficientProvider {
    LogCoefficients coefficients(const SbmParams&, double, int) const override {
        LogCoefficients k;
        k.zeta = 1.0;
        k.A = {1.0};
        k.C = {1.0};
        k.N = {1.0};
        return k;
    }
};

}  // namespace

TEST(LogChain, IdentityProviderRoundTrip) {
    const auto p = params(0.3, 0.04);
    const auto lin = linear_chain_coefficients(p, 9);
    const auto log = log_chain_coefficients(p, 9, 2.0, LinearDisguise{});
    EXPECT_EQ(log.c0, lin.c0);
    for (int n = 0; n < 9; ++n) EXPECT_NEAR(log.omega[n], lin.omega[n], 1e-15);
    for (int n = 0; n < 8; ++n) EXPECT_NEAR(log.t[n], lin.t[n], 1e-15);
    EXPECT_EQ(log.scheme, ChainScheme::Logarithmic);
}

TEST(LogChain, ZeroAGivesDecoupledChain) {
    const auto c = log_chain_coefficients(params(0.3, 0.04), 5, 1.5, ZeroA{});
    for (double t : c.t) EXPECT_EQ(t, 0.0);
    for (double w : c.omega) EXPECT_NEAR(w, 0.28, 1e-15);
}

TEST(LogChain, ProviderTooShort) {
    EXPECT_THROW(log_chain_coefficients(params(0.3, 0.04), 5, 1.5, Short{}), std::invalid_argument);
}

TEST(LogChain, RejectsLambdaAtMostOne) {
    EXPECT_THROW(log_chain_coefficients(params(0.3, 0.04), 5, 1.0), std::invalid_argument);
}

// Independent route: the Wilson star of the hard-cutoff power law, each
// interval [L^-(k+1), L^-k] w_c represented by its weight int J and its
// J-weighted mean frequency (both by numerical quadrature), tridiagonalized
// by Lanczos.
TEST(LogChain, DefaultProviderMatchesLanczosOnWilsonStar) {
    for (double s : {0.2, 0.5}) {
        for (double lambda : {1.5, 2.0}) {
            const auto p = params(s, 0.1);
            const auto [u, w] = softmps::testing::gauss_legendre01(40);
            std::vector<double> nodes, weights;
            for (int k = 0; k < 900; ++k) {
                const double hi = std::pow(lambda, -k);
                const double lo = hi / lambda;
                if (hi < 1e-100) break;
                double m0 = 0.0, m1 = 0.0;
                for (std::size_t i = 0; i < u.size(); ++i) {
                    const double x = lo + (hi - lo) * u[i];
                    const double j = std::pow(x, s) * w[i] * (hi - lo);
                    m0 += j;
                    m1 += j * x;
                }
                nodes.push_back(m1 / m0);
                weights.push_back(m0);
            }
            const int steps = 12;
            const auto [diag, off] = softmps::testing::lanczos(nodes, weights, steps);
            const auto c = log_chain_coefficients(p, steps, lambda);
            for (int n = 0; n < steps; ++n)
                EXPECT_NEAR(c.omega[n] / diag[n], 1.0, 1e-9) << "s=" << s << " L=" << lambda << " n=" << n;
            for (int n = 0; n + 1 < steps; ++n)
                EXPECT_NEAR(std::abs(c.t[n]) / off[n], 1.0, 1e-9) << "s=" << s << " L=" << lambda << " n=" << n;
        }
    }
}

TEST(LogChain, SpinCouplingSharedWithLinearScheme) {
    const auto p = params(0.5, 0.07);
    EXPECT_EQ(log_chain_coefficients(p, 4, 1.5).c0, linear_chain_coefficients(p, 4).c0);
}

TEST(LogChain, SiteEnergiesDecayGeometrically) {
    const auto c = log_chain_coefficients(params(0.5, 0.1), 30, 2.0);
    for (int n = 20; n < 29; ++n) EXPECT_NEAR(c.omega[n + 1] / c.omega[n], 0.5, 1e-3);
}

TEST(MakeChain, Dispatch) {
    const auto p = params(0.5, 0.1);
    EXPECT_EQ(make_chain(p, 4, ChainScheme::Linear).omega, linear_chain_coefficients(p, 4).omega);
    EXPECT_EQ(make_chain(p, 4, ChainScheme::Logarithmic, 1.7).omega, log_chain_coefficients(p, 4, 1.7).omega);
    EXPECT_EQ(to_string(ChainScheme::Linear), "linear");
    EXPECT_EQ(to_string(ChainScheme::Logarithmic), "log");
}
