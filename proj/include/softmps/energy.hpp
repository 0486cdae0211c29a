// Chain energy functional and its Rayleigh quotient.
//
// H = -Delta/2 sigma_x + c0 sigma_z (b_1 + b_1^dag)
//     + sum_m omega_m b_m^dag b_m + sum_{m<N} t_m (b_{m+1}^dag b_m + b_m^dag b_{m+1})
//
// Two evaluation routes are provided. energy() assembles the breakdown from
// individual matrix elements. EnergyFunctional propagates a block row of
// transfer factors through a small operator automaton and returns the total
// together with its analytic gradient.

#pragma once

#include "softmps/linalg.hpp"
#include "softmps/model_params.hpp"
#include "softmps/mps_state.hpp"
#include "softmps/transfer.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace softmps {

struct EnergyBreakdown {
    double e_loc{0.0};
    double e_int{0.0};
    double e_chain{0.0};
    double total{0.0};
    double norm{0.0};
};

struct EnergyOptions {
    bool use_cache{true};
    double overflow_bound{kDefaultOverflowBound};
};

namespace detail {

inline void check_chain(int n_sites, const ChainCoefficients& chain) {
    chain.validate();
    if (chain.n_sites() != n_sites)
        throw std::invalid_argument("chain length " + std::to_string(chain.n_sites()) +
                                    " does not match state with " + std::to_string(n_sites) + " modes");
}

template <class T>
double real_checked(const T& v, double scale) {
    if (std::abs(imag_part(v)) > 1e-9 * scale + 1e-300)
        throw Error("complex_expectation", "expectation of a Hermitian operator is not real");
    return real_part(v);
}

}  // namespace detail

template <class T>
EnergyBreakdown energy(const MpsState<T>& st, const ChainCoefficients& chain, double delta,
                       const EnergyOptions& opt = {}) {
    st.validate();
    detail::check_chain(st.n_sites, chain);
    std::optional<TransferCache<T>> cache;
    if (opt.use_cache) cache.emplace(st, opt.overflow_bound);
    const TransferCache<T>* cp = cache ? &*cache : nullptr;
    auto me = [&](const SpinInsertion& sp, const InsertionMap& ins) {
        return matrix_element(st, sp, ins, cp, opt.overflow_bound);
    };

    const double norm = norm_sq(st, cp, opt.overflow_bound);
    if (!(norm > kNormFloor)) throw NormUnderflow(norm);

    EnergyBreakdown out;
    out.norm = norm;
    out.e_loc = -0.5 * delta * detail::real_checked(me(SpinInsertion::sigma_x(), {}), norm) / norm;
    out.e_int = chain.c0 *
                detail::real_checked(me(SpinInsertion::sigma_z(), {{1, insertion::Displacement{}}}), norm) /
                norm;
    double e_chain = 0.0;
    for (int m = 1; m <= st.n_sites; ++m) {
        e_chain += chain.omega[m - 1] *
                   detail::real_checked(me(SpinInsertion::identity(), {{m, insertion::Occupation{}}}), norm);
        if (m < st.n_sites) {
            InsertionMap right, left;
            add_hop(right, m, HopDirection::Right);
            add_hop(left, m, HopDirection::Left);
            e_chain += chain.t[m - 1] *
                       detail::real_checked(me(SpinInsertion::identity(), right) +
                                                me(SpinInsertion::identity(), left),
                                            norm);
        }
    }
    out.e_chain = e_chain / norm;
    out.total = out.e_loc + out.e_int + out.e_chain;
    return out;
}

struct EnergyValue {
    double total{0.0};
    double norm{0.0};
    Eigen::VectorXd gradient;  // empty unless requested
};

// Energy and gradient through the operator automaton. Automaton states:
// Start (no operator placed yet), SpinZ (sigma_z placed, b + b^dag due at site 1),
// HopB / HopBd (b or b^dag placed, partner due at the next site), Done.
// The norm is read off Start and the numerator off Done.
template <class T>
class EnergyFunctional {
public:
    EnergyFunctional(ChainCoefficients chain, double delta, double overflow_bound = kDefaultOverflowBound)
        : chain_(std::move(chain)), delta_(delta), bound_(overflow_bound) {
        chain_.validate();
    }

    const ChainCoefficients& chain() const { return chain_; }
    double delta() const { return delta_; }
    int n_sites() const { return chain_.n_sites(); }

    EnergyValue evaluate(const MpsState<T>& st, bool with_gradient) const {
        st.validate();
        detail::check_chain(st.n_sites, chain_);
        const int n = st.n_sites;
        const Eigen::Index dim = static_cast<Eigen::Index>(st.chi) * st.chi;
        const Mat<T> id = Mat<T>::Identity(dim, dim);
        const Mat<T> id_chi = Mat<T>::Identity(st.chi, st.chi);

        std::vector<SiteOps> ops(n);
        for (int m = 1; m <= n; ++m) {
            const Mat<T>& x = st.X(m);
            SiteOps& o = ops[m - 1];
            o.xbar = conj(x);
            o.y = kron<T>(o.xbar, x);
            o.lower = kron<T>(id_chi, x);
            o.raise = kron<T>(o.xbar, id_chi);
            o.e = expm<T>(o.y);
            check_overflow(o.e, m, bound_);
        }

        Row left = boundary(st);
        std::vector<Row> lefts;
        if (with_gradient) lefts.reserve(n);
        for (int m = 1; m <= n; ++m) {
            if (with_gradient) lefts.push_back(left);
            left = propagate_left(left, ops[m - 1], m);
            for (int a = 0; a < kStates; ++a)
                if (left.on[a]) check_overflow(left.mat[a], m, bound_);
        }

        EnergyValue out;
        const T norm_trace = left.mat[kStart].trace();
        out.norm = detail::real_checked(norm_trace, std::abs(real_part(norm_trace)));
        if (!(out.norm > kNormFloor)) throw NormUnderflow(out.norm);
        out.total = detail::real_checked(T(left.mat[kDone].trace()), out.norm) / out.norm;
        if (!with_gradient) return out;

        // d(numerator - E norm) through the ket slot; the bra slot contributes the conjugate.
        Row right;
        right.mat[kDone] = id;
        right.on[kDone] = true;
        right.mat[kStart] = -out.total * id;
        right.on[kStart] = true;

        std::vector<Mat<T>> gx(n);
        for (int m = n; m >= 1; --m) {
            const Row& l = lefts[m - 1];
            const SiteOps& o = ops[m - 1];
            std::array<Mat<T>, kOps> env;
            std::array<bool, kOps> env_on{};
            for (const Edge& ed : edges(m)) {
                if (!l.on[ed.from] || !right.on[ed.to]) continue;
                Mat<T> g = ed.coef * (right.mat[ed.to] * l.mat[ed.from]);
                if (env_on[ed.op]) {
                    env[ed.op] += g;
                } else {
                    env[ed.op] = std::move(g);
                    env_on[ed.op] = true;
                }
            }
            Mat<T> k = Mat<T>::Zero(dim, dim);
            if (env_on[kOpId]) k += env[kOpId];
            if (env_on[kOpN]) k += env[kOpN] * o.y;
            if (env_on[kOpB]) k += env[kOpB] * o.lower;
            if (env_on[kOpBd]) k += env[kOpBd] * o.raise;
            Mat<T> w1 = expm_frechet<T>(o.y, k).second;
            if (env_on[kOpN]) w1 += o.e * env[kOpN];
            Mat<T> wx = right_slot_contract<T>(w1, o.xbar);
            if (env_on[kOpB]) wx += right_slot_contract<T>(Mat<T>(o.e * env[kOpB]), id_chi);
            gx[m - 1] = wx;
            right = propagate_right(right, o, m);
        }

        std::array<Mat<T>, 2> gs{Mat<T>::Zero(st.chi, st.chi), Mat<T>::Zero(st.chi, st.chi)};
        const auto weights = boundary_weights();
        for (int a = 0; a < kStates; ++a) {
            if (!right.on[a]) continue;
            for (int kp = 0; kp < 2; ++kp)
                for (int k = 0; k < 2; ++k)
                    if (weights[a].w[kp][k] != 0.0)
                        gs[k] += weights[a].w[kp][k] * right_slot_contract<T>(right.mat[a], conj(st.spin[kp]));
        }

        const double scale = 2.0 / out.norm;
        for (auto& g : gs) g = scale * conj(g);
        for (auto& g : gx) g = scale * conj(g);
        out.gradient = flatten_gradient<T>(gs, gx);
        return out;
    }

    double value(const MpsState<T>& st) const { return evaluate(st, false).total; }

private:
    static constexpr int kStart = 0, kSpinZ = 1, kHopB = 2, kHopBd = 3, kDone = 4, kStates = 5;
    static constexpr int kOpId = 0, kOpN = 1, kOpB = 2, kOpBd = 3, kOps = 4;

    struct SiteOps {
        Mat<T> xbar, y, lower, raise, e;
    };
    struct Row {
        std::array<Mat<T>, kStates> mat;
        std::array<bool, kStates> on{};
    };
    struct Edge {
        int from, to, op;
        double coef;
    };

    std::vector<Edge> edges(int m) const {
        const int n = chain_.n_sites();
        std::vector<Edge> out{{kStart, kStart, kOpId, 1.0},
                              {kDone, kDone, kOpId, 1.0},
                              {kStart, kDone, kOpN, chain_.omega[m - 1]}};
        if (m < n) {
            out.push_back({kStart, kHopB, kOpB, chain_.t[m - 1]});
            out.push_back({kStart, kHopBd, kOpBd, chain_.t[m - 1]});
        }
        if (m > 1) {
            out.push_back({kHopB, kDone, kOpBd, 1.0});
            out.push_back({kHopBd, kDone, kOpB, 1.0});
        } else {
            out.push_back({kSpinZ, kDone, kOpB, chain_.c0});
            out.push_back({kSpinZ, kDone, kOpBd, chain_.c0});
        }
        return out;
    }

    std::array<SpinInsertion, kStates> boundary_weights() const {
        std::array<SpinInsertion, kStates> w{};
        w[kStart] = SpinInsertion::identity();
        w[kSpinZ] = SpinInsertion::sigma_z();
        w[kDone] = SpinInsertion::sigma_x();
        for (auto& row : w[kDone].w)
            for (double& v : row) v *= -0.5 * delta_;
        return w;
    }

    Row boundary(const MpsState<T>& st) const {
        Row r;
        const auto w = boundary_weights();
        for (int a : {kStart, kSpinZ, kDone}) {
            r.mat[a] = xi(st, w[a]);
            r.on[a] = true;
        }
        return r;
    }

    static const Mat<T>& op_factor(const SiteOps& o, int op, Mat<T>& scratch) {
        switch (op) {
        case kOpId:
            return o.e;
        case kOpN:
            scratch = o.y * o.e;
            return scratch;
        case kOpB:
            scratch = o.lower * o.e;
            return scratch;
        default:
            scratch = o.raise * o.e;
            return scratch;
        }
    }

    Row propagate_left(const Row& in, const SiteOps& o, int m) const {
        Row out;
        Mat<T> scratch;
        for (const Edge& ed : edges(m)) {
            if (!in.on[ed.from]) continue;
            Mat<T> term = ed.coef * (in.mat[ed.from] * op_factor(o, ed.op, scratch));
            if (out.on[ed.to]) {
                out.mat[ed.to] += term;
            } else {
                out.mat[ed.to] = std::move(term);
                out.on[ed.to] = true;
            }
        }
        return out;
    }

    Row propagate_right(const Row& in, const SiteOps& o, int m) const {
        Row out;
        Mat<T> scratch;
        for (const Edge& ed : edges(m)) {
            if (!in.on[ed.to]) continue;
            Mat<T> term = ed.coef * (op_factor(o, ed.op, scratch) * in.mat[ed.to]);
            if (out.on[ed.from]) {
                out.mat[ed.from] += term;
            } else {
                out.mat[ed.from] = std::move(term);
                out.on[ed.from] = true;
            }
        }
        return out;
    }

    ChainCoefficients chain_;
    double delta_;
    double bound_;
};

template <class T>
Eigen::VectorXd energy_gradient(const MpsState<T>& st, const ChainCoefficients& chain, double delta) {
    return EnergyFunctional<T>(chain, delta).evaluate(st, true).gradient;
}

}  // namespace softmps
