// Dense linear algebra helpers for the transfer calculus: Kronecker products,
// matrix exponentials with their Frechet derivative, and slot contractions.

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace softmps {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
using MatR = Mat<double>;
using MatC = Mat<std::complex<double>>;

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};
template <class T>
inline constexpr bool is_complex_v = is_complex<T>::value;

// Library errors carry a short machine-readable code next to the message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// A transfer product grew past the configured entry bound.
class ScaleOverflow : public Error {
public:
    ScaleOverflow(int site, double magnitude)
        : Error("scale_overflow",
                "transfer product exceeds overflow bound at site " + std::to_string(site) +
                    " (max |entry| = " + std::to_string(magnitude) + ")"),
          site_(site), magnitude_(magnitude) {}
    int site() const noexcept { return site_; }
    double magnitude() const noexcept { return magnitude_; }

private:
    int site_;
    double magnitude_;
};

class NormUnderflow : public Error {
public:
    explicit NormUnderflow(double norm)
        : Error("norm_underflow", "state norm " + std::to_string(norm) + " is numerically null") {}
};

inline constexpr double kDefaultOverflowBound = 1e150;
inline constexpr double kNormFloor = 1e-290;

template <class T>
inline T conj_value(const T& x) {
    if constexpr (is_complex_v<T>) {
        return std::conj(x);
    } else {
        return x;
    }
}

template <class T>
inline double real_part(const T& x) {
    if constexpr (is_complex_v<T>) {
        return x.real();
    } else {
        return x;
    }
}

template <class T>
inline double imag_part(const T& x) {
    if constexpr (is_complex_v<T>) {
        return x.imag();
    } else {
        return 0.0;
    }
}

template <class T>
inline Mat<T> conj(const Mat<T>& m) {
    if constexpr (is_complex_v<T>) {
        return m.conjugate();
    } else {
        return m;
    }
}

// (A (x) B)[(i,j),(k,l)] = A(i,k) B(j,l); row index i * rows(B) + j.
// The conjugated (bra) factor always goes in the left slot.
template <class T>
Mat<T> kron(const Mat<T>& a, const Mat<T>& b) {
    Mat<T> out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index k = 0; k < a.cols(); ++k) {
            out.block(i * b.rows(), k * b.cols(), b.rows(), b.cols()) = a(i, k) * b;
        }
    }
    return out;
}

template <class T>
double max_abs(const Mat<T>& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

template <class T>
void check_overflow(const Mat<T>& m, int site, double bound) {
    const double mag = max_abs(m);
    if (!(mag <= bound)) throw ScaleOverflow(site, mag);
}

// Scaling-and-squaring Pade exponential (Eigen's implementation).
template <class T>
Mat<T> expm(const Mat<T>& a) {
    return a.exp();
}

// Returns {exp(A), L(A, E)} where L is the Frechet derivative of exp at A in
// direction E, read off the upper-right block of exp([[A, E], [0, A]]).
template <class T>
std::pair<Mat<T>, Mat<T>> expm_frechet(const Mat<T>& a, const Mat<T>& e) {
    const Eigen::Index n = a.rows();
    Mat<T> big = Mat<T>::Zero(2 * n, 2 * n);
    big.topLeftCorner(n, n) = a;
    big.topRightCorner(n, n) = e;
    big.bottomRightCorner(n, n) = a;
    Mat<T> ex = big.exp();
    return {ex.topLeftCorner(n, n), ex.topRightCorner(n, n)};
}

// G(p,q) = d/dX(p,q) tr[W (A (x) X)] = sum_{i,k} W[(k,q),(i,p)] A(i,k).
template <class T>
Mat<T> right_slot_contract(const Mat<T>& w, const Mat<T>& a) {
    const Eigen::Index chi = a.rows();
    Mat<T> g = Mat<T>::Zero(chi, chi);
    for (Eigen::Index i = 0; i < chi; ++i) {
        for (Eigen::Index k = 0; k < chi; ++k) {
            const T aik = a(i, k);
            if (aik == T(0)) continue;
            for (Eigen::Index p = 0; p < chi; ++p) {
                for (Eigen::Index q = 0; q < chi; ++q) {
                    g(p, q) += w(k * chi + q, i * chi + p) * aik;
                }
            }
        }
    }
    return g;
}

// tr[W (A (x) B)] without forming the Kronecker product.
template <class T>
T kron_trace(const Mat<T>& w, const Mat<T>& a, const Mat<T>& b) {
    const Eigen::Index chi = a.rows();
    T acc(0);
    for (Eigen::Index i = 0; i < chi; ++i) {
        for (Eigen::Index k = 0; k < chi; ++k) {
            const T aik = a(i, k);
            if (aik == T(0)) continue;
            T inner(0);
            for (Eigen::Index j = 0; j < chi; ++j) {
                for (Eigen::Index l = 0; l < chi; ++l) {
                    inner += w(k * chi + l, i * chi + j) * b(j, l);
                }
            }
            acc += aik * inner;
        }
    }
    return acc;
}

}  // namespace softmps
