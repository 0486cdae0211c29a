// Transfer calculus over chi^2 x chi^2 factors. Every norm and expectation of
// the state is a trace tr[Xi F_1 ... F_N] where F_m = exp(conj(X_m) (x) X_m)
// unless an operator is inserted at site m.

#pragma once

#include "softmps/linalg.hpp"
#include "softmps/mps_state.hpp"

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

namespace softmps {

// Weights w[k'][k] of sum_{k',k} w conj(S^(k')) (x) S^(k). Index 0 is spin up.
struct SpinInsertion {
    std::array<std::array<double, 2>, 2> w{};

    static SpinInsertion identity() { return {{{{1.0, 0.0}, {0.0, 1.0}}}}; }
    static SpinInsertion sigma_x() { return {{{{0.0, 1.0}, {1.0, 0.0}}}}; }
    static SpinInsertion sigma_z() { return {{{{1.0, 0.0}, {0.0, -1.0}}}}; }
    // Projector |k><k'| read out as the density-matrix element rho[k][k'].
    static SpinInsertion element(int k, int kp) {
        SpinInsertion out;
        out.w[kp][k] = 1.0;
        return out;
    }
};

namespace insertion {
struct Transfer {};      // exp(Y), Y = conj(X) (x) X
struct Occupation {};    // b^dag b  -> Y exp(Y)
struct Displacement {};  // b + b^dag -> (1 (x) X + conj(X) (x) 1) exp(Y)
struct Lower {};         // b       -> (1 (x) X) exp(Y)
struct Raise {};         // b^dag   -> (conj(X) (x) 1) exp(Y)
struct FockPair {        // |i><j| -> conj(X)^j (x) X^i / sqrt(i! j!), replaces exp(Y)
    int i{0};
    int j{0};
};
}  // namespace insertion

using SiteInsertion = std::variant<insertion::Transfer, insertion::Occupation, insertion::Displacement,
                                   insertion::Lower, insertion::Raise, insertion::FockPair>;
using InsertionMap = std::map<int, SiteInsertion>;

inline void add_insertion(InsertionMap& map, int site, SiteInsertion ins) {
    if (!map.emplace(site, ins).second)
        throw std::invalid_argument("conflicting insertions at site " + std::to_string(site));
}

// Right: b^dag_{m+1} b_m.  Left: b^dag_m b_{m+1}.
enum class HopDirection { Right, Left };

inline void add_hop(InsertionMap& map, int m, HopDirection dir) {
    if (dir == HopDirection::Right) {
        add_insertion(map, m, insertion::Lower{});
        add_insertion(map, m + 1, insertion::Raise{});
    } else {
        add_insertion(map, m, insertion::Raise{});
        add_insertion(map, m + 1, insertion::Lower{});
    }
}

template <class T>
Mat<T> transfer_generator(const Mat<T>& x) {
    return kron<T>(conj(x), x);
}

template <class T>
Mat<T> transfer_factor(const Mat<T>& x) {
    return expm<T>(transfer_generator(x));
}

// X^n / sqrt(n!), accumulated as (X/sqrt 1)(X/sqrt 2)...(X/sqrt n).
template <class T>
std::vector<Mat<T>> scaled_powers(const Mat<T>& x, int max_power) {
    std::vector<Mat<T>> out;
    out.reserve(max_power + 1);
    out.push_back(Mat<T>::Identity(x.rows(), x.cols()));
    for (int n = 1; n <= max_power; ++n) out.push_back(out.back() * x / std::sqrt(static_cast<double>(n)));
    return out;
}

// Local factor for an insertion at a mode with matrix x and transfer factor e.
template <class T>
Mat<T> insertion_factor(const Mat<T>& x, const Mat<T>& e, const SiteInsertion& ins) {
    const Eigen::Index chi = x.rows();
    const Mat<T> id = Mat<T>::Identity(chi, chi);
    return std::visit(
        [&](const auto& op) -> Mat<T> {
            using Op = std::decay_t<decltype(op)>;
            if constexpr (std::is_same_v<Op, insertion::Transfer>) {
                return e;
            } else if constexpr (std::is_same_v<Op, insertion::Occupation>) {
                return transfer_generator(x) * e;
            } else if constexpr (std::is_same_v<Op, insertion::Displacement>) {
                return (kron<T>(id, x) + kron<T>(conj(x), id)) * e;
            } else if constexpr (std::is_same_v<Op, insertion::Lower>) {
                return kron<T>(id, x) * e;
            } else if constexpr (std::is_same_v<Op, insertion::Raise>) {
                return kron<T>(conj(x), id) * e;
            } else {
                if (op.i < 0 || op.j < 0) throw std::invalid_argument("FockPair indices must be >= 0");
                const auto pw = scaled_powers(x, std::max(op.i, op.j));
                return kron<T>(conj(pw[op.j]), pw[op.i]);
            }
        },
        ins);
}

template <class T>
Mat<T> xi(const MpsState<T>& st, const SpinInsertion& spin) {
    const Eigen::Index n = static_cast<Eigen::Index>(st.chi) * st.chi;
    Mat<T> out = Mat<T>::Zero(n, n);
    for (int kp = 0; kp < 2; ++kp)
        for (int k = 0; k < 2; ++k)
            if (spin.w[kp][k] != 0.0) out += spin.w[kp][k] * kron<T>(conj(st.spin[kp]), st.spin[k]);
    return out;
}

// Transfer factors and prefix/suffix products, reused across the many
// insertion terms of one evaluation. prefix[m] = Gamma_1^m, suffix[m] = Gamma_m^N.
template <class T>
class TransferCache {
public:
    TransferCache(const MpsState<T>& st, double overflow_bound = kDefaultOverflowBound) {
        st.validate();
        const int n = st.n_sites;
        const Eigen::Index dim = static_cast<Eigen::Index>(st.chi) * st.chi;
        factors_.reserve(n);
        for (int m = 1; m <= n; ++m) {
            factors_.push_back(transfer_factor<T>(st.X(m)));
            check_overflow(factors_.back(), m, overflow_bound);
        }
        prefix_.assign(n + 1, Mat<T>::Identity(dim, dim));
        for (int m = 1; m <= n; ++m) {
            prefix_[m] = prefix_[m - 1] * factors_[m - 1];
            check_overflow(prefix_[m], m, overflow_bound);
        }
        suffix_.assign(n + 2, Mat<T>::Identity(dim, dim));
        for (int m = n; m >= 1; --m) {
            suffix_[m] = factors_[m - 1] * suffix_[m + 1];
            check_overflow(suffix_[m], m, overflow_bound);
        }
    }

    const Mat<T>& factor(int site) const { return factors_.at(site - 1); }
    const Mat<T>& prefix(int m) const { return prefix_.at(m); }
    const Mat<T>& suffix(int m) const { return suffix_.at(m); }

private:
    std::vector<Mat<T>> factors_;
    std::vector<Mat<T>> prefix_;
    std::vector<Mat<T>> suffix_;
};

// Gamma_a^b = prod_{m=a}^{b} exp(conj(X_m) (x) X_m); identity when a > b.
template <class T>
Mat<T> gamma(const MpsState<T>& st, int a, int b, double overflow_bound = kDefaultOverflowBound) {
    if (a < 1 || b > st.n_sites) throw std::invalid_argument("gamma: site range out of bounds");
    const Eigen::Index dim = static_cast<Eigen::Index>(st.chi) * st.chi;
    Mat<T> out = Mat<T>::Identity(dim, dim);
    for (int m = a; m <= b; ++m) {
        out = out * transfer_factor<T>(st.X(m));
        check_overflow(out, m, overflow_bound);
    }
    return out;
}

namespace detail {

template <class T>
T product_trace(const MpsState<T>& st, const SpinInsertion& spin, const InsertionMap& ins,
                const TransferCache<T>* cache, double overflow_bound) {
    for (const auto& [site, op] : ins)
        if (site < 1 || site > st.n_sites)
            throw std::invalid_argument("matrix_element: insertion site " + std::to_string(site) +
                                        " out of range");
    Mat<T> acc = xi(st, spin);
    if (cache == nullptr) {
        for (int m = 1; m <= st.n_sites; ++m) {
            const Mat<T> e = transfer_factor<T>(st.X(m));
            auto it = ins.find(m);
            acc = acc * (it == ins.end() ? e : insertion_factor<T>(st.X(m), e, it->second));
            check_overflow(acc, m, overflow_bound);
        }
        return acc.trace();
    }
    if (ins.empty()) return (acc * cache->prefix(st.n_sites)).trace();
    int next = 1;
    for (const auto& [site, op] : ins) {
        if (next == 1) {
            acc = acc * cache->prefix(site - 1);
        } else {
            for (int m = next; m < site; ++m) acc = acc * cache->factor(m);
        }
        acc = acc * insertion_factor<T>(st.X(site), cache->factor(site), op);
        check_overflow(acc, site, overflow_bound);
        next = site + 1;
    }
    acc = acc * cache->suffix(next);
    check_overflow(acc, st.n_sites, overflow_bound);
    return acc.trace();
}

}  // namespace detail

// Unnormalized tr[Xi_w prod_m F_m] with F_m replaced per the insertion map.
template <class T>
T matrix_element(const MpsState<T>& st, const SpinInsertion& spin, const InsertionMap& ins,
                 const TransferCache<T>* cache = nullptr, double overflow_bound = kDefaultOverflowBound) {
    return detail::product_trace(st, spin, ins, cache, overflow_bound);
}

// <psi|psi> = tr[Xi Gamma_1^N], checked to be real.
template <class T>
double norm_sq(const MpsState<T>& st, const TransferCache<T>* cache = nullptr,
               double overflow_bound = kDefaultOverflowBound) {
    const T v = matrix_element(st, SpinInsertion::identity(), {}, cache, overflow_bound);
    const double re = real_part(v);
    if (std::abs(imag_part(v)) > 1e-10 * std::abs(re) + 1e-300)
        throw Error("complex_norm", "norm has a non-vanishing imaginary part");
    return re;
}

// Amplitude tr[S^(k) prod_m X_m^{i_m} / sqrt(i_m!)] of |k, i_1..i_N>; k is 0 (up) or 1 (down).
template <class T>
T coefficient(const MpsState<T>& st, int k, const std::vector<int>& occupations) {
    if (k < 0 || k > 1) throw std::invalid_argument("coefficient: spin index must be 0 or 1");
    if (static_cast<int>(occupations.size()) != st.n_sites)
        throw std::invalid_argument("coefficient: need one occupation per mode");
    Mat<T> acc = st.spin[k];
    for (int m = 0; m < st.n_sites; ++m) {
        const int i = occupations[m];
        if (i < 0) throw std::invalid_argument("coefficient: occupations must be >= 0");
        for (int p = 1; p <= i; ++p) acc = acc * st.modes[m] / std::sqrt(static_cast<double>(p));
    }
    return acc.trace();
}

}  // namespace softmps
