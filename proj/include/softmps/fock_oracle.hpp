// Brute-force reference over a truncated Fock space. Reconstructs dense
// amplitudes of a state, evaluates expectations with textbook ladder-operator
// algebra, and diagonalizes small truncated chain Hamiltonians exactly.
// Validation only: cost grows as the product of the cutoffs.

#pragma once

#include "softmps/linalg.hpp"
#include "softmps/model_params.hpp"
#include "softmps/mps_state.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <variant>
#include <vector>

namespace softmps::oracle {

inline constexpr std::int64_t kDefaultAmplitudeBudget = 10'000'000;
inline constexpr std::int64_t kDiagonalizationBudget = 4096;

// Amplitudes c[k, i_1..i_N] with i_m < cutoffs[m]; spin index slowest, last mode fastest.
template <class T>
struct DenseState {
    std::vector<int> cutoffs;
    std::vector<T> amplitudes;
    double tail_bound{0.0};  // rigorous bound on the squared weight outside the cutoffs

    int n_modes() const { return static_cast<int>(cutoffs.size()); }
    std::int64_t mode_block() const {
        return std::accumulate(cutoffs.begin(), cutoffs.end(), std::int64_t{1}, std::multiplies<>());
    }
};

inline std::vector<std::int64_t> strides(const std::vector<int>& cutoffs) {
    std::vector<std::int64_t> st(cutoffs.size(), 1);
    for (int m = static_cast<int>(cutoffs.size()) - 2; m >= 0; --m) st[m] = st[m + 1] * cutoffs[m + 1];
    return st;
}

inline std::int64_t hilbert_dimension(const std::vector<int>& cutoffs) {
    std::int64_t d = 2;
    for (int c : cutoffs) {
        if (c < 1) throw std::invalid_argument("oracle: cutoffs must be >= 1");
        d *= c;
    }
    return d;
}

// Sum_k ||S_k||_F^2 * chi * [prod_m e^{r_m^2} - prod_m sum_{i<d_m} r_m^{2i}/i!],
// r_m the largest singular value of X_m.
template <class T>
double tail_bound(const MpsState<T>& st, const std::vector<int>& cutoffs) {
    double spin_weight = st.spin[0].squaredNorm() + st.spin[1].squaredNorm();
    double log_full = 0.0;
    double log_kept = 0.0;  // sum log1p(-tail_m / e^{r^2})
    for (int m = 0; m < st.n_sites; ++m) {
        Eigen::JacobiSVD<Mat<T>> svd(st.modes[m]);
        const double r2 = std::pow(svd.singularValues()(0), 2);
        // term_i = r^{2i} / i!, tail = sum_{i >= d} term_i
        double term = 1.0;
        for (int i = 1; i <= cutoffs[m]; ++i) term *= r2 / i;
        double tail = 0.0;
        for (int i = cutoffs[m]; i < cutoffs[m] + 400 && term > 0.0; ++i) {
            tail += term;
            term *= r2 / (i + 1);
            if (term < 1e-30 * tail) break;
        }
        log_full += r2;
        log_kept += std::log1p(-std::min(1.0, tail * std::exp(-r2)));
    }
    return spin_weight * st.chi * std::exp(log_full) * -std::expm1(log_kept);
}

template <class T>
DenseState<T> dense_coefficients(const MpsState<T>& st, const std::vector<int>& cutoffs,
                                 std::int64_t budget = kDefaultAmplitudeBudget) {
    st.validate();
    if (static_cast<int>(cutoffs.size()) != st.n_sites)
        throw std::invalid_argument("dense_coefficients: need one cutoff per mode");
    if (hilbert_dimension(cutoffs) > budget)
        throw Error("budget_exceeded", "dense_coefficients: amplitude budget exceeded");

    // powers[m][i] = X_m^i / sqrt(i!)
    std::vector<std::vector<Mat<T>>> powers(st.n_sites);
    for (int m = 0; m < st.n_sites; ++m) {
        Mat<T> p = Mat<T>::Identity(st.chi, st.chi);
        for (int i = 0; i < cutoffs[m]; ++i) {
            powers[m].push_back(p * std::exp(-0.5 * std::lgamma(i + 1.0)));
            p = p * st.modes[m];
        }
    }

    DenseState<T> out;
    out.cutoffs = cutoffs;
    const std::int64_t block = out.mode_block();
    out.amplitudes.assign(2 * block, T(0));
    const auto stride = strides(cutoffs);

    for (int k = 0; k < 2; ++k) {
        // Depth-first over the multi-index, carrying the partial product.
        std::vector<Mat<T>> partial(st.n_sites + 1);
        partial[0] = st.spin[k];
        std::vector<int> idx(st.n_sites, 0);
        int depth = 0;
        while (depth >= 0) {
            if (depth == st.n_sites) {
                std::int64_t flat = 0;
                for (int m = 0; m < st.n_sites; ++m) flat += idx[m] * stride[m];
                out.amplitudes[k * block + flat] = partial[depth].trace();
                --depth;
                if (depth >= 0) ++idx[depth];
                continue;
            }
            if (idx[depth] >= cutoffs[depth]) {
                idx[depth] = 0;
                --depth;
                if (depth >= 0) ++idx[depth];
                continue;
            }
            partial[depth + 1] = partial[depth] * powers[depth][idx[depth]];
            ++depth;
        }
    }
    out.tail_bound = tail_bound(st, cutoffs);
    return out;
}

namespace op {
struct Norm {};
struct Occupation { int site; };    // b^dag b
struct Displacement { int site; };  // b + b^dag
struct Hop { int site; };           // b^dag_{m+1} b_m + b^dag_m b_{m+1}
struct SigmaX {};
struct SigmaZ {};
struct SigmaZDisplacement { int site; };  // sigma_z (b + b^dag)
struct Hamiltonian {
    ChainCoefficients chain;
    double delta;
};
}  // namespace op

using OperatorSpec = std::variant<op::Norm, op::Occupation, op::Displacement, op::Hop, op::SigmaX, op::SigmaZ,
                                  op::SigmaZDisplacement, op::Hamiltonian>;

namespace detail {

// out += coef * b_m v (lower) or b_m^dag v (raise); states pushed past the cutoff are dropped.
template <class T>
void add_ladder(const std::vector<T>& v, std::vector<T>& out, const std::vector<int>& cutoffs, int site,
                bool raise, double coef) {
    const auto stride = strides(cutoffs);
    const std::int64_t total = static_cast<std::int64_t>(v.size());
    const std::int64_t s = stride[site - 1];
    const int d = cutoffs[site - 1];
    for (std::int64_t f = 0; f < total; ++f) {
        if (v[f] == T(0)) continue;
        const int i = static_cast<int>((f / s) % d);
        if (raise) {
            if (i + 1 < d) out[f + s] += coef * std::sqrt(static_cast<double>(i + 1)) * v[f];
        } else {
            if (i > 0) out[f - s] += coef * std::sqrt(static_cast<double>(i)) * v[f];
        }
    }
}

template <class T>
std::vector<T> lower(const std::vector<T>& v, const std::vector<int>& cutoffs, int site) {
    std::vector<T> out(v.size(), T(0));
    add_ladder(v, out, cutoffs, site, false, 1.0);
    return out;
}

template <class T>
std::vector<T> raise(const std::vector<T>& v, const std::vector<int>& cutoffs, int site) {
    std::vector<T> out(v.size(), T(0));
    add_ladder(v, out, cutoffs, site, true, 1.0);
    return out;
}

template <class T>
void add_scaled(std::vector<T>& out, const std::vector<T>& v, double coef) {
    for (std::size_t i = 0; i < v.size(); ++i) out[i] += coef * v[i];
}

template <class T>
std::vector<T> apply_sigma(const std::vector<T>& v, bool x) {
    const std::size_t half = v.size() / 2;
    std::vector<T> out(v.size());
    for (std::size_t i = 0; i < half; ++i) {
        if (x) {
            out[i] = v[half + i];
            out[half + i] = v[i];
        } else {
            out[i] = v[i];
            out[half + i] = -v[half + i];
        }
    }
    return out;
}

template <class T>
std::vector<T> apply_displacement(const std::vector<T>& v, const std::vector<int>& cutoffs, int site) {
    std::vector<T> out(v.size(), T(0));
    add_ladder(v, out, cutoffs, site, false, 1.0);
    add_ladder(v, out, cutoffs, site, true, 1.0);
    return out;
}

template <class T>
std::vector<T> apply_hop(const std::vector<T>& v, const std::vector<int>& cutoffs, int site) {
    std::vector<T> out = raise(lower(v, cutoffs, site), cutoffs, site + 1);
    add_scaled(out, raise(lower(v, cutoffs, site + 1), cutoffs, site), 1.0);
    return out;
}

}  // namespace detail

// H v for the chain Hamiltonian truncated at the given cutoffs.
template <class T>
std::vector<T> apply_hamiltonian(const ChainCoefficients& chain, double delta, const std::vector<int>& cutoffs,
                                 const std::vector<T>& v) {
    const int n = static_cast<int>(cutoffs.size());
    if (chain.n_sites() != n) throw std::invalid_argument("apply_hamiltonian: chain length mismatch");
    std::vector<T> out(v.size(), T(0));
    detail::add_scaled(out, detail::apply_sigma(v, true), -0.5 * delta);
    detail::add_scaled(out, detail::apply_sigma(detail::apply_displacement(v, cutoffs, 1), false), chain.c0);
    for (int m = 1; m <= n; ++m) {
        detail::add_scaled(out, detail::raise(detail::lower(v, cutoffs, m), cutoffs, m), chain.omega[m - 1]);
        if (m < n) detail::add_scaled(out, detail::apply_hop(v, cutoffs, m), chain.t[m - 1]);
    }
    return out;
}

template <class T>
T inner(const std::vector<T>& a, const std::vector<T>& b) {
    T acc(0);
    for (std::size_t i = 0; i < a.size(); ++i) acc += conj_value(a[i]) * b[i];
    return acc;
}

// Squared weight on amplitudes with any mode at its top retained level.
template <class T>
double boundary_weight(const DenseState<T>& dense) {
    const auto stride = strides(dense.cutoffs);
    const std::int64_t block = dense.mode_block();
    double w = 0.0;
    for (std::int64_t f = 0; f < 2 * block; ++f) {
        const std::int64_t r = f % block;
        bool edge = false;
        for (int m = 0; m < dense.n_modes() && !edge; ++m)
            edge = (r / stride[m]) % dense.cutoffs[m] == dense.cutoffs[m] - 1;
        if (edge) w += std::norm(std::complex<double>(dense.amplitudes[f]));
    }
    return w;
}

// Returns <psi|psi> for op::Norm and the normalized expectation otherwise.
template <class T>
double dense_expectation(const DenseState<T>& dense, const OperatorSpec& spec, double boundary_tolerance = 1e-12) {
    const auto& v = dense.amplitudes;
    const auto& cut = dense.cutoffs;
    const double norm = real_part(inner(v, v));
    if (std::holds_alternative<op::Norm>(spec)) return norm;
    if (boundary_weight(dense) > boundary_tolerance * norm)
        throw Error("boundary_weight", "dense_expectation: cutoffs too small for the requested tolerance");
    auto check_site = [&](int site, int span) {
        if (site < 1 || site + span > dense.n_modes())
            throw std::invalid_argument("dense_expectation: operator site out of range");
    };
    const std::vector<T> applied = std::visit(
        [&](const auto& o) -> std::vector<T> {
            using O = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<O, op::Occupation>) {
                check_site(o.site, 0);
                return detail::raise(detail::lower(v, cut, o.site), cut, o.site);
            } else if constexpr (std::is_same_v<O, op::Displacement>) {
                check_site(o.site, 0);
                return detail::apply_displacement(v, cut, o.site);
            } else if constexpr (std::is_same_v<O, op::Hop>) {
                check_site(o.site, 1);
                return detail::apply_hop(v, cut, o.site);
            } else if constexpr (std::is_same_v<O, op::SigmaX>) {
                return detail::apply_sigma(v, true);
            } else if constexpr (std::is_same_v<O, op::SigmaZ>) {
                return detail::apply_sigma(v, false);
            } else if constexpr (std::is_same_v<O, op::SigmaZDisplacement>) {
                check_site(o.site, 0);
                return detail::apply_sigma(detail::apply_displacement(v, cut, o.site), false);
            } else if constexpr (std::is_same_v<O, op::Hamiltonian>) {
                return apply_hamiltonian(o.chain, o.delta, cut, v);
            } else {
                return v;
            }
        },
        spec);
    return real_part(inner(v, applied)) / norm;
}

// Reduced density matrix of the spin, rho[k][k'] = sum_rest c_k conj(c_k').
template <class T>
Mat<T> dense_spin_rdm(const DenseState<T>& dense) {
    const std::int64_t block = dense.mode_block();
    Mat<T> rho = Mat<T>::Zero(2, 2);
    for (int k = 0; k < 2; ++k)
        for (int kp = 0; kp < 2; ++kp)
            for (std::int64_t r = 0; r < block; ++r)
                rho(k, kp) += dense.amplitudes[k * block + r] * conj_value(dense.amplitudes[kp * block + r]);
    return rho / rho.trace();
}

// Reduced density matrix of one mode (1-based site) within its cutoff.
template <class T>
Mat<T> dense_site_rdm(const DenseState<T>& dense, int site) {
    if (site < 1 || site > dense.n_modes()) throw std::invalid_argument("dense_site_rdm: site out of range");
    const auto stride = strides(dense.cutoffs);
    const int d = dense.cutoffs[site - 1];
    const std::int64_t s = stride[site - 1];
    const std::int64_t total = static_cast<std::int64_t>(dense.amplitudes.size());
    Mat<T> rho = Mat<T>::Zero(d, d);
    double norm = 0.0;
    for (std::int64_t f = 0; f < total; ++f) {
        const int i = static_cast<int>((f / s) % d);
        if (i != 0) continue;
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                rho(a, b) += dense.amplitudes[f + a * s] * conj_value(dense.amplitudes[f + b * s]);
    }
    for (int a = 0; a < d; ++a) norm += real_part(rho(a, a));
    return rho / norm;
}

struct ExactGroundState {
    double energy{0.0};
    Eigen::VectorXd vector;
    std::vector<int> cutoffs;
};

inline Eigen::MatrixXd hamiltonian_matrix(const ChainCoefficients& chain, double delta,
                                          const std::vector<int>& cutoffs) {
    const std::int64_t dim = hilbert_dimension(cutoffs);
    if (dim > kDiagonalizationBudget)
        throw Error("budget_exceeded", "hamiltonian_matrix: dimension exceeds dense diagonalization budget");
    Eigen::MatrixXd h(dim, dim);
    std::vector<double> unit(dim, 0.0);
    for (std::int64_t j = 0; j < dim; ++j) {
        unit[j] = 1.0;
        const auto col = apply_hamiltonian(chain, delta, cutoffs, unit);
        for (std::int64_t i = 0; i < dim; ++i) h(i, j) = col[i];
        unit[j] = 0.0;
    }
    return h;
}

inline ExactGroundState exact_ground_state(const ChainCoefficients& chain, double delta,
                                           const std::vector<int>& cutoffs) {
    chain.validate();
    if (static_cast<int>(cutoffs.size()) != chain.n_sites())
        throw std::invalid_argument("exact_ground_state: need one cutoff per site");
    const Eigen::MatrixXd h = hamiltonian_matrix(chain, delta, cutoffs);
    const double asym = (h - h.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(1.0, h.cwiseAbs().maxCoeff()))
        throw Error("hamiltonian_not_hermitian", "exact_ground_state: assembled Hamiltonian is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success) throw Error("diagonalization_failed", "exact_ground_state: eigensolver failed");
    ExactGroundState out;
    out.energy = es.eigenvalues()(0);
    out.vector = es.eigenvectors().col(0);
    out.cutoffs = cutoffs;
    return out;
}

}  // namespace softmps::oracle
