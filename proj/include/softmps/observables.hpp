// Physical observables of a ground state: spin density matrix, magnetization,
// coherence, mode occupations, single-site reduced density matrices and
// von Neumann entropies (natural logarithm throughout).

#pragma once

#include "softmps/energy.hpp"
#include "softmps/linalg.hpp"
#include "softmps/mps_state.hpp"
#include "softmps/transfer.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <optional>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace softmps {

template <class T>
struct SpinBlock {
    Mat<T> rho;            // rho[k][k'] = <k|rho|k'>, k = 0 is spin up
    double sz{0.0};        // <sigma_z>
    double magnetization{0.0};  // |<sigma_z>|
    double coherence{0.0};      // <sigma_x>
};

template <class T>
SpinBlock<T> spin_block(const MpsState<T>& st, const TransferCache<T>* cache = nullptr) {
    std::optional<TransferCache<T>> own;
    if (cache == nullptr) cache = &own.emplace(st);
    const double norm = norm_sq(st, cache);
    if (!(norm > kNormFloor)) throw NormUnderflow(norm);
    const Mat<T>& gamma_all = cache->prefix(st.n_sites);
    SpinBlock<T> out;
    out.rho = Mat<T>::Zero(2, 2);
    for (int k = 0; k < 2; ++k)
        for (int kp = 0; kp < 2; ++kp)
            out.rho(k, kp) = (kron<T>(conj(st.spin[kp]), st.spin[k]) * gamma_all).trace() / norm;
    out.sz = real_part(out.rho(0, 0)) - real_part(out.rho(1, 1));
    out.magnetization = std::abs(out.sz);
    out.coherence = 2.0 * real_part(out.rho(0, 1));
    return out;
}

// <b_m^dag b_m> for every site; round-off negatives are clamped to zero.
template <class T>
std::vector<double> occupations(const MpsState<T>& st, const TransferCache<T>* cache = nullptr) {
    std::optional<TransferCache<T>> own;
    if (cache == nullptr) cache = &own.emplace(st);
    const double norm = norm_sq(st, cache);
    if (!(norm > kNormFloor)) throw NormUnderflow(norm);
    std::vector<double> out(st.n_sites);
    for (int m = 1; m <= st.n_sites; ++m) {
        const double v = real_part(matrix_element(st, SpinInsertion::identity(), {{m, insertion::Occupation{}}}, cache)) / norm;
        if (v < -1e-10) throw Error("negative_occupation", "occupation at site " + std::to_string(m) + " is negative");
        out[m - 1] = std::max(0.0, v);
    }
    return out;
}

struct SiteRdmOptions {
    double tail_tolerance{1e-10};
    int max_cutoff{200};
};

// Reduced density matrix of mode `site` in its Fock basis, truncated at the
// smallest d whose retained diagonal weight misses less than tail_tolerance.
template <class T>
Mat<T> site_rdm(const MpsState<T>& st, int site, const SiteRdmOptions& opt = {},
                const TransferCache<T>* cache = nullptr) {
    if (site < 1 || site > st.n_sites) throw std::invalid_argument("site_rdm: site out of range");
    if (!(opt.tail_tolerance > 0.0)) throw std::invalid_argument("site_rdm: tail_tolerance must be > 0");
    std::optional<TransferCache<T>> own;
    if (cache == nullptr) cache = &own.emplace(st);
    const double norm = norm_sq(st, cache);
    if (!(norm > kNormFloor)) throw NormUnderflow(norm);

    // rho[i][j] = tr[env (conj(X)^j (x) X^i)] / sqrt(i! j!) / norm
    const Mat<T> env = cache->suffix(site + 1) * xi(st, SpinInsertion::identity()) * cache->prefix(site - 1);
    const Mat<T>& x = st.X(site);
    std::vector<Mat<T>> powers{Mat<T>::Identity(st.chi, st.chi)};
    std::vector<Mat<T>> conj_powers{powers[0]};
    std::vector<double> diag;
    double kept = 0.0;
    while (true) {
        const int i = static_cast<int>(diag.size());
        if (i >= opt.max_cutoff) {
            std::ostringstream msg;
            msg << "site_rdm: Fock cutoff " << opt.max_cutoff << " reached at site " << site
                << " with trace deficit " << 1.0 - kept;
            throw Error("cutoff_limit", msg.str());
        }
        if (i > 0) {
            powers.push_back(powers.back() * x / std::sqrt(static_cast<double>(i)));
            conj_powers.push_back(conj(powers.back()));
        }
        const double d = real_part(kron_trace<T>(env, conj_powers[i], powers[i])) / norm;
        diag.push_back(d);
        kept += d;
        if (1.0 - kept < opt.tail_tolerance) break;
    }
    const int d = static_cast<int>(diag.size());
    Mat<T> rho(d, d);
    for (int i = 0; i < d; ++i) {
        rho(i, i) = diag[i];
        for (int j = i + 1; j < d; ++j) {
            rho(i, j) = kron_trace<T>(env, conj_powers[j], powers[i]) / norm;
            rho(j, i) = conj_value(rho(i, j));
        }
    }
    return rho;
}

// -tr[rho ln rho]; eigenvalues in (-1e-9, 0) count as zero.
template <class Derived>
double von_neumann_entropy(const Eigen::MatrixBase<Derived>& rho_in) {
    using T = typename Derived::Scalar;
    const Mat<T> rho = rho_in;
    if (rho.rows() != rho.cols() || rho.rows() == 0)
        throw std::invalid_argument("von_neumann_entropy: density matrix must be square");
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-8) throw std::invalid_argument("von_neumann_entropy: density matrix is not Hermitian");
    if (std::abs(real_part(T(rho.trace())) - 1.0) > 1e-6)
        throw std::invalid_argument("von_neumann_entropy: density matrix trace differs from 1");
    Eigen::SelfAdjointEigenSolver<Mat<T>> es(rho, Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double lam = es.eigenvalues()(i);
        if (lam < -1e-9) throw std::invalid_argument("von_neumann_entropy: density matrix is not positive");
        if (lam > 0.0) s -= lam * std::log(lam);
    }
    return std::max(0.0, s);
}

struct ObservableOptions {
    SiteRdmOptions rdm{};
    int entropy_sites{-1};  // first sites whose entropy is reported; -1 for all
};

struct ObservableSet {
    double magnetization{0.0};
    double sz{0.0};
    double coherence{0.0};
    std::vector<double> occupations;
    double spin_entropy{0.0};
    std::vector<double> site_entropies;
    std::vector<int> site_cutoffs;
    EnergyBreakdown energy;
};

template <class T>
ObservableSet compute_observables(const MpsState<T>& st, const ChainCoefficients& chain, double delta,
                                  const ObservableOptions& opt = {}) {
    const TransferCache<T> cache(st);
    ObservableSet out;
    const auto sb = spin_block(st, &cache);
    out.magnetization = sb.magnetization;
    out.sz = sb.sz;
    out.coherence = sb.coherence;
    out.spin_entropy = von_neumann_entropy(sb.rho);
    out.occupations = occupations(st, &cache);
    const int n_ent = opt.entropy_sites < 0 ? st.n_sites : std::min(opt.entropy_sites, st.n_sites);
    for (int m = 1; m <= n_ent; ++m) {
        Mat<T> rho = site_rdm(st, m, opt.rdm, &cache);
        out.site_cutoffs.push_back(static_cast<int>(rho.rows()));
        rho /= rho.trace();
        out.site_entropies.push_back(von_neumann_entropy(rho));
    }
    out.energy = energy(st, chain, delta);
    return out;
}

}  // namespace softmps
