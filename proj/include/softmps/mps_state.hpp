// The truncation-free matrix product state: two spin matrices and one matrix
// per bosonic mode, all chi x chi. Mode m carries the Fock amplitude factor
// X_m^i / sqrt(i!) for occupation i.

#pragma once

#include "softmps/linalg.hpp"
#include "softmps/rng.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace softmps {

enum class ScalarField { Real, Complex };

inline std::string to_string(ScalarField f) { return f == ScalarField::Real ? "real" : "complex"; }

template <class T>
struct MpsState {
    using Scalar = T;
    static constexpr ScalarField field = is_complex_v<T> ? ScalarField::Complex : ScalarField::Real;

    int chi{1};
    int n_sites{1};
    std::array<Mat<T>, 2> spin;  // S^(1) (spin up), S^(2) (spin down)
    std::vector<Mat<T>> modes;   // X_1 .. X_N at indices 0 .. N-1

    const Mat<T>& X(int site) const { return modes.at(site - 1); }

    void validate() const {
        if (chi < 1) throw std::invalid_argument("MpsState: chi must be >= 1");
        if (n_sites < 1) throw std::invalid_argument("MpsState: need at least one mode");
        if (static_cast<int>(modes.size()) != n_sites)
            throw std::invalid_argument("MpsState: mode count does not match n_sites");
        for (const auto& s : spin)
            if (s.rows() != chi || s.cols() != chi)
                throw std::invalid_argument("MpsState: spin matrix has wrong shape");
        for (const auto& x : modes)
            if (x.rows() != chi || x.cols() != chi)
                throw std::invalid_argument("MpsState: mode matrix has wrong shape");
        if (spin[0].isZero(0.0) && spin[1].isZero(0.0))
            throw std::invalid_argument("MpsState: both spin matrices vanish");
    }

    static MpsState zeros(int chi, int n_sites) {
        MpsState st;
        st.chi = chi;
        st.n_sites = n_sites;
        st.spin = {Mat<T>::Zero(chi, chi), Mat<T>::Zero(chi, chi)};
        st.modes.assign(n_sites, Mat<T>::Zero(chi, chi));
        return st;
    }
};

using RealState = MpsState<double>;
using ComplexState = MpsState<std::complex<double>>;

// Free real parameters per matrix entry: 1 (Real) or 2 (Complex).
template <class T>
constexpr int reals_per_entry() {
    return is_complex_v<T> ? 2 : 1;
}

template <class T>
Eigen::Index parameter_count(int chi, int n_sites) {
    return static_cast<Eigen::Index>(n_sites + 2) * chi * chi * reals_per_entry<T>();
}

// Flat ordering: S^(1), S^(2), X_1, ..., X_N, each matrix row-major; in the
// Complex field every entry contributes (real, imaginary) consecutively.
template <class T>
Eigen::VectorXd to_parameters(const MpsState<T>& st) {
    Eigen::VectorXd v(parameter_count<T>(st.chi, st.n_sites));
    Eigen::Index k = 0;
    auto put = [&](const Mat<T>& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                v[k++] = real_part(m(i, j));
                if constexpr (is_complex_v<T>) v[k++] = imag_part(m(i, j));
            }
    };
    put(st.spin[0]);
    put(st.spin[1]);
    for (const auto& x : st.modes) put(x);
    return v;
}

template <class T>
MpsState<T> from_parameters(const Eigen::VectorXd& v, int chi, int n_sites) {
    if (v.size() != parameter_count<T>(chi, n_sites))
        throw std::invalid_argument("from_parameters: vector length does not match chi and N");
    auto st = MpsState<T>::zeros(chi, n_sites);
    Eigen::Index k = 0;
    auto get = [&](Mat<T>& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                if constexpr (is_complex_v<T>) {
                    m(i, j) = T(v[k], v[k + 1]);
                    k += 2;
                } else {
                    m(i, j) = v[k++];
                }
            }
    };
    get(st.spin[0]);
    get(st.spin[1]);
    for (auto& x : st.modes) get(x);
    return st;
}

// Same layout as to_parameters, for a per-matrix gradient.
template <class T>
Eigen::VectorXd flatten_gradient(const std::array<Mat<T>, 2>& gs, const std::vector<Mat<T>>& gx) {
    MpsState<T> tmp;
    tmp.chi = static_cast<int>(gs[0].rows());
    tmp.n_sites = static_cast<int>(gx.size());
    tmp.spin = gs;
    tmp.modes = gx;
    return to_parameters(tmp);
}

template <class T>
Mat<T> random_matrix(int chi, double scale, Rng& rng) {
    Mat<T> m(chi, chi);
    for (int i = 0; i < chi; ++i)
        for (int j = 0; j < chi; ++j) {
            if constexpr (is_complex_v<T>) {
                const double re = rng.normal();
                const double im = rng.normal();
                m(i, j) = T(scale * re, scale * im);
            } else {
                m(i, j) = scale * rng.normal();
            }
        }
    return m;
}

// Entries i.i.d. zero-mean normal with standard deviation `scale`.
template <class T>
MpsState<T> random_state(int chi, int n_sites, double scale, Rng& rng) {
    auto st = MpsState<T>::zeros(chi, n_sites);
    st.spin[0] = random_matrix<T>(chi, scale, rng);
    st.spin[1] = random_matrix<T>(chi, scale, rng);
    for (auto& x : st.modes) x = random_matrix<T>(chi, scale, rng);
    return st;
}

// Zero-pads every matrix to dimension new_chi. The padded block never reaches
// the trace, so every Fock amplitude is unchanged.
template <class T>
MpsState<T> embed(const MpsState<T>& st, int new_chi) {
    if (new_chi < st.chi) throw std::invalid_argument("embed: cannot shrink chi");
    auto out = MpsState<T>::zeros(new_chi, st.n_sites);
    for (int k = 0; k < 2; ++k) out.spin[k].topLeftCorner(st.chi, st.chi) = st.spin[k];
    for (int m = 0; m < st.n_sites; ++m) out.modes[m].topLeftCorner(st.chi, st.chi) = st.modes[m];
    return out;
}

}  // namespace softmps
