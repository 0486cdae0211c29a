// Random-state equivalence suite: transfer calculus versus dense Fock-space
// reference on small instances.

#pragma once

#include "softmps/energy.hpp"
#include "softmps/fock_oracle.hpp"
#include "softmps/model_params.hpp"
#include "softmps/mps_state.hpp"
#include "softmps/observables.hpp"
#include "softmps/rng.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace softmps::oracle {

struct SuiteOptions {
    int instances{200};
    std::uint64_t seed{20240611};
    int cutoff{30};
    int max_chi{2};
    int max_sites{3};
    double max_norm{0.5};  // spectral norm bound on every X
    double tolerance{1e-8};
};

struct QuantityCheck {
    std::string name;
    int passed{0};
    int total{0};
    double worst{0.0};  // largest relative deviation seen
};

struct SuiteReport {
    std::vector<QuantityCheck> quantities;
    int instances{0};
    bool passed() const {
        return std::all_of(quantities.begin(), quantities.end(), [](const auto& q) { return q.passed == q.total; });
    }
};

// Relative deviation with an absolute floor for quantities that vanish by accident.
inline double relative_deviation(double a, double b, double floor = 1e-12) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

template <class T>
MpsState<T> random_small_state(int chi, int n_sites, double max_norm, Rng& rng) {
    auto st = random_state<T>(chi, n_sites, 1.0, rng);
    for (auto& x : st.modes) {
        Eigen::JacobiSVD<Mat<T>> svd(x);
        const double r = svd.singularValues()(0);
        const double target = max_norm * (0.1 + 0.9 * rng.uniform());
        if (r > 0.0) x *= target / r;
    }
    return st;
}

template <class T>
SuiteReport equivalence_suite(const SuiteOptions& opt) {
    SuiteReport rep;
    auto slot = [&](const std::string& name) -> QuantityCheck& {
        for (auto& q : rep.quantities)
            if (q.name == name) return q;
        rep.quantities.push_back({name});
        return rep.quantities.back();
    };
    for (const char* n : {"norm", "occupation", "sigma_x", "sigma_z", "energy"}) slot(n);
    auto record = [&](const std::string& name, double dev) {
        auto& q = slot(name);
        ++q.total;
        if (dev <= opt.tolerance) ++q.passed;
        q.worst = std::max(q.worst, dev);
    };

    for (int i = 0; i < opt.instances; ++i) {
        Rng rng(derive_seed(opt.seed, i));
        const int chi = 1 + i % opt.max_chi;
        const int n = 1 + (i / opt.max_chi) % opt.max_sites;
        const auto st = random_small_state<T>(chi, n, opt.max_norm, rng);
        SbmParams p;
        p.s = 0.1 + 0.8 * rng.uniform();
        p.alpha = 0.2 * rng.uniform();
        p.delta = 0.05 + 0.2 * rng.uniform();
        const auto chain = linear_chain_coefficients(p, n);

        const auto dense = dense_coefficients(st, std::vector<int>(n, opt.cutoff));
        const TransferCache<T> cache(st);
        const double norm = norm_sq(st, &cache);
        const double dense_norm = dense_expectation(dense, op::Norm{});
        // The dense sum misses at most tail_bound of the weight.
        const double excess = std::max(0.0, std::abs(norm - dense_norm) - dense.tail_bound);
        record("norm", excess / norm);

        const auto occ = occupations(st, &cache);
        for (int m = 1; m <= n; ++m) record("occupation", relative_deviation(occ[m - 1], dense_expectation(dense, op::Occupation{m})));
        const auto sb = spin_block(st, &cache);
        record("sigma_x", relative_deviation(sb.coherence, dense_expectation(dense, op::SigmaX{})));
        record("sigma_z", relative_deviation(sb.sz, dense_expectation(dense, op::SigmaZ{})));
        record("energy", relative_deviation(energy(st, chain, p.delta).total,
                                            dense_expectation(dense, op::Hamiltonian{chain, p.delta})));
        ++rep.instances;
    }
    return rep;
}

}  // namespace softmps::oracle
