#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include "qflow/algebra.hpp"
#include "qflow/expm.hpp"
#include "qflow/group.hpp"
#include "qflow/jordan_wigner.hpp"

namespace qflow {

/// Classical continuous-time Markov chain reference for the walk family.
struct CtmcResult {
    std::vector<GroupElem> window;            // inner window, trusted sites
    std::vector<Complex> values;              // (e^{tL} x)(g) per window entry
    std::vector<double> row_sums;             // conservativity check per entry
    double truncation_bound = 0.0;            // escape estimate (R t)^m / m!
    Complex unit_part = 0.0;                  // carried through unchanged
};

/// e^{tL} x on a finite window, L(g, hg) = |t_h(g)|^2 with conservative
/// diagonal; computed densely on a padded state set, trusted on the inner
/// window, with the Poisson escape bound reported.
template <class TFn>
CtmcResult ctmc_expm(const GroupAdapter& adapter, const std::vector<GroupElem>& moves, TFn t_fn,
                     std::vector<GroupElem> window, double t, const Element<Complex>& x) {
    if (x.algebra().family != Family::Group)
        throw std::invalid_argument("ctmc oracle requires a group-function element");

    // the window must cover the support of x
    std::set<GroupElem> inner(window.begin(), window.end());
    for (auto& [w, c] : x.terms()) {
        const auto& gw = std::get<GroupWord>(w);
        if (!gw.unit) inner.insert(gw.g);
    }

    // first pass to estimate the uniform rate, then pad by m jump levels
    auto exit_rate = [&](const GroupElem& g) {
        double r = 0.0;
        for (std::size_t h = 0; h < moves.size(); ++h) r += std::norm(t_fn(h, g));
        return r;
    };
    double rate = 0.0;
    for (const auto& g : inner) rate = std::max(rate, exit_rate(g));
    int m = (int)std::ceil(6.0 * rate * t + 10.0);

    std::vector<GroupElem> states(inner.begin(), inner.end());
    std::set<GroupElem> seen = inner;
    std::size_t frontier_begin = 0;
    for (int level = 0; level < m; ++level) {
        std::size_t frontier_end = states.size();
        for (std::size_t k = frontier_begin; k < frontier_end; ++k) {
            for (const auto& h : moves) {
                GroupElem next = adapter.multiply(h, states[k]);
                if (seen.insert(next).second) states.push_back(next);
            }
        }
        frontier_begin = frontier_end;
    }
    for (const auto& g : states) rate = std::max(rate, exit_rate(g));

    std::map<GroupElem, Eigen::Index> index;
    for (std::size_t k = 0; k < states.size(); ++k) index[states[k]] = (Eigen::Index)k;

    const Eigen::Index n = (Eigen::Index)states.size();
    Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (std::size_t h = 0; h < moves.size(); ++h) {
            double r = std::norm(t_fn(h, states[k]));
            if (r == 0.0) continue;
            GroupElem target = adapter.multiply(moves[h], states[k]);
            auto it = index.find(target);
            if (it != index.end()) L(k, it->second) += r;
            L(k, k) -= r;
        }
    }
    Eigen::MatrixXcd P = expm(t * L);

    Eigen::VectorXcd xv = Eigen::VectorXcd::Zero(n);
    for (auto& [w, c] : x.terms()) {
        const auto& gw = std::get<GroupWord>(w);
        if (!gw.unit) xv(index.at(gw.g)) = c;
    }
    Eigen::VectorXcd yv = P * xv;

    CtmcResult res;
    res.unit_part = scalar_traits<Complex>::to_complex(x.coeff(GroupWord{true, {}}));
    res.window.assign(inner.begin(), inner.end());
    double esc = std::pow(rate * t, m);
    for (int k = 2; k <= m; ++k) esc /= (double)k;
    res.truncation_bound = esc * norm_bound(x).value;
    for (const auto& g : res.window) {
        Eigen::Index k = index.at(g);
        res.values.push_back(yv(k) + res.unit_part);
        res.row_sums.push_back(P.row(k).sum().real());
    }
    return res;
}

/// Diagonal multiplier of the torus semigroup: exp(-t(|c1|^2 m^2 + |c2|^2 n^2)/2).
inline double torus_multiplier(double t, std::int64_t m, std::int64_t n, Complex c1, Complex c2) {
    return std::exp(-t * (std::norm(c1) * (double)(m * m) + std::norm(c2) * (double)(n * n)) /
                    2.0);
}

/// Normal-ordered CAR word basis over a site set, in word order.
inline std::vector<CarWord> car_word_basis(const std::vector<int>& sites) {
    std::vector<std::vector<int>> subsets{{}};
    for (int s : sites) {
        std::size_t n = subsets.size();
        for (std::size_t k = 0; k < n; ++k) {
            auto with = subsets[k];
            with.push_back(s);
            subsets.push_back(with);
        }
    }
    std::vector<CarWord> words;
    for (const auto& cr : subsets)
        for (const auto& an : subsets) words.push_back(CarWord{cr, an});
    std::sort(words.begin(), words.end());
    return words;
}

/// Dense superoperator reference for the exclusion family: exponentiates the
/// generator of tau on 2^|J| x 2^|J| matrices through Jordan-Wigner, then
/// projects the result back onto normal-ordered words by a linear solve
/// against the word-image basis.
class CarSuperopOracle {
public:
    CarSuperopOracle(std::vector<int> sites, std::map<std::pair<int, int>, Complex> alpha,
                     std::map<int, double> eta)
        : sites_(std::move(sites)) {
        std::sort(sites_.begin(), sites_.end());
        sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
        if (sites_.size() > 5)
            throw std::invalid_argument("car superoperator oracle: site cap exceeded (|J| <= 5)");
        const Eigen::Index dim = Eigen::Index(1) << sites_.size();
        const Eigen::Index dim2 = dim * dim;
        Algebra alg = Algebra::car();

        Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(dim, dim);
        superop_ = Eigen::MatrixXcd::Zero(dim2, dim2);
        for (auto& [site, e] : eta) {
            Element<Complex> n_i = mul(car_creator<Complex>(alg, site),
                                       car_annihilator<Complex>(alg, site));
            Eigen::MatrixXcd N = jw_matrix(n_i, sites_);
            superop_ += Complex(0, e) * (kron(id, N) - kron(N.transpose(), id));
        }
        for (auto& [ij, a] : alpha) {
            if (a == Complex(0.0)) continue;
            Element<Complex> hop = mul(car_creator<Complex>(alg, ij.second),
                                       car_annihilator<Complex>(alg, ij.first));
            Eigen::MatrixXcd B = jw_matrix(hop, sites_);
            Eigen::MatrixXcd BB = B.adjoint() * B;
            superop_ -= 0.5 * std::norm(a) *
                        (kron(id, BB) + kron(BB.transpose(), id) -
                         2.0 * kron(B.transpose(), B.adjoint()));
        }

        words_ = car_word_basis(sites_);
        Eigen::MatrixXcd W(dim2, (Eigen::Index)words_.size());
        for (std::size_t k = 0; k < words_.size(); ++k) {
            Element<Complex> w(alg, words_[k], Complex(1.0));
            Eigen::MatrixXcd img = jw_matrix(w, sites_);
            W.col((Eigen::Index)k) = Eigen::Map<Eigen::VectorXcd>(img.data(), dim2);
        }
        word_solver_.compute(W);
    }

    const Eigen::MatrixXcd& superop() const { return superop_; }
    const std::vector<int>& sites() const { return sites_; }

    /// e^{t tau}(x) as a CAR element.
    Element<Complex> evolve(double t, const Element<Complex>& x) const {
        const Eigen::Index dim = Eigen::Index(1) << sites_.size();
        Eigen::MatrixXcd X = jw_matrix(x, sites_);
        Eigen::VectorXcd v = Eigen::Map<Eigen::VectorXcd>(X.data(), dim * dim);
        Eigen::VectorXcd w = expm(t * superop_) * v;
        Eigen::VectorXcd coeffs = word_solver_.solve(w);
        Element<Complex> out(Algebra::car());
        for (std::size_t k = 0; k < words_.size(); ++k) {
            Complex c = coeffs((Eigen::Index)k);
            if (std::abs(c) > 1e-13) out.add_term(words_[k], c);
        }
        return out;
    }

    /// Minimal eigenvalue of the Choi matrix of e^{t tau}; non-negative (up to
    /// the stated slack) certifies complete positivity at time t.
    double choi_min_eigenvalue(double t) const {
        if (sites_.size() > 3)
            throw std::invalid_argument("choi certificate: site cap exceeded (|J| <= 3)");
        const Eigen::Index dim = Eigen::Index(1) << sites_.size();
        Eigen::MatrixXcd Phi = expm(t * superop_);
        Eigen::MatrixXcd choi = Eigen::MatrixXcd::Zero(dim * dim, dim * dim);
        for (Eigen::Index i = 0; i < dim; ++i)
            for (Eigen::Index j = 0; j < dim; ++j) {
                Eigen::MatrixXcd E = Eigen::MatrixXcd::Zero(dim, dim);
                E(i, j) = 1.0;
                Eigen::VectorXcd v = Eigen::Map<Eigen::VectorXcd>(E.data(), dim * dim);
                Eigen::VectorXcd w = Phi * v;
                Eigen::Map<Eigen::MatrixXcd> out(w.data(), dim, dim);
                choi.block(i * dim, j * dim, dim, dim) = out;
            }
        Eigen::MatrixXcd herm = 0.5 * (choi + choi.adjoint());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

private:
    std::vector<int> sites_;
    Eigen::MatrixXcd superop_;
    std::vector<CarWord> words_;
    Eigen::PartialPivLU<Eigen::MatrixXcd> word_solver_;
};

}  // namespace qflow
