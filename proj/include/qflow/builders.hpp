#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <utility>
#include <vector>

#include "qflow/generator.hpp"
#include "qflow/group.hpp"

namespace qflow {

/// t : H x G -> C, indexed by the position of h in the move list.
template <class S>
using TransitionFn = std::function<S(std::size_t h_index, const GroupElem& g)>;

struct WalkOptions {
    /// Optional certified global bound sup |t_h(g)| over all moves and sites;
    /// enables an all-n growth certificate (row sums <= 1 + |H| + 2|H| M^2).
    std::optional<double> transition_sup;
    /// Indicator words declared as generators for validation sampling.
    std::vector<GroupElem> sample_points;
};

/// Random-walk flow generator on C_0(G) + C1: on e_g it acts as
/// e_g (x) m_e(g) + sum_h e_{h^-1 g} (x) m_h(h^-1 g), with
/// m_h(g) = [[|t_h(g)|^2, conj(t_h(g)) <f_h|], [t_h(g) |f_h>, |f_h><f_h|]].
template <class S>
FlowGenerator<S> walk_generator(std::shared_ptr<const GroupAdapter> adapter,
                                std::vector<GroupElem> moves, TransitionFn<S> t,
                                WalkOptions opts = {}) {
    using T = scalar_traits<S>;
    if (moves.empty()) throw std::invalid_argument("walk: move set H must be non-empty");
    for (const auto& h : moves)
        if (adapter->equal(h, adapter->identity()))
            throw std::invalid_argument("walk: identity element not allowed in H");

    Algebra alg = Algebra::group(adapter->rank());
    std::size_t d = moves.size();
    MultiplicityBasis basis;
    for (const auto& h : moves) basis.labels.push_back("f_" + adapter->str(h));

    auto rule = [adapter, moves, t, alg, d](const BasisWord& w) {
        GeneratorMatrix<S> g(alg, d + 1);
        const auto& gw = std::get<GroupWord>(w);
        if (gw.unit) return g;  // phi(1) = 0
        const GroupElem& site = gw.g;
        auto add = [&](std::size_t r, std::size_t c, const GroupElem& target, S coeff) {
            if (!T::is_zero(coeff))
                g.block(r, c).add_term(GroupWord{false, target}, coeff);
        };
        for (std::size_t i = 0; i < d; ++i) {
            S th = t(i, site);
            S abs2 = th * T::conj(th);
            // m_e(g) block, sitting over the word e_g
            add(0, 0, site, -abs2);
            add(0, i + 1, site, -T::conj(th));
            add(i + 1, 0, site, -th);
            add(i + 1, i + 1, site, -T::one());
            // m_h(h^-1 g) block over the word e_{h^-1 g}
            GroupElem shifted = adapter->multiply(adapter->inverse(moves[i]), site);
            S ts = t(i, shifted);
            S abs2s = ts * T::conj(ts);
            add(0, 0, shifted, abs2s);
            add(0, i + 1, shifted, T::conj(ts));
            add(i + 1, 0, shifted, ts);
            add(i + 1, i + 1, shifted, T::one());
        }
        return g;
    };

    std::vector<GroupElem> pts = opts.sample_points;
    if (pts.empty()) {
        pts.push_back(adapter->identity());
        for (const auto& h : moves) {
            pts.push_back(h);
            pts.push_back(adapter->inverse(h));
        }
    }
    std::vector<BasisWord> gens;
    std::set<GroupElem> seen;
    for (const auto& p : pts)
        if (seen.insert(p).second) gens.push_back(GroupWord{false, p});

    FlowGenerator<S> phi(alg, basis, rule, gens, "walk");
    if (opts.transition_sup) {
        double M = *opts.transition_sup;
        phi.set_declared_row_sup(1.0 + (double)d + 2.0 * (double)d * M * M);
    }
    return phi;
}

/// Amplitude table alpha_{i,j}; absent pairs are zero.
template <class S>
using AmplitudeMap = std::map<std::pair<int, int>, S>;

/// Quantum exclusion flow generator on the CAR algebra over a finite working
/// site set: tau(x) = i[h,x] - 1/2 sum tau_{i,j}(x) with the commutator
/// convention for [h,x], delta_{i,j}(x) = alpha_{i,j} [b*_j b_i, x], and zero
/// gauge part. Symmetry |alpha_{i,j}| = |alpha_{j,i}| is not required here;
/// it only enables the closed-form iterates.
template <class S>
FlowGenerator<S> exclusion_generator(std::vector<int> sites, AmplitudeMap<S> alpha,
                                     std::map<int, S> eta) {
    using T = scalar_traits<S>;
    Algebra alg = Algebra::car();

    std::set<int> site_set(sites.begin(), sites.end());
    for (auto& [ij, a] : alpha) {
        if (T::is_zero(a)) continue;
        if (!site_set.count(ij.first) || !site_set.count(ij.second))
            throw std::invalid_argument("exclusion: amplitude references site outside working set");
    }
    for (auto& [i, e] : eta) {
        if (!site_set.count(i))
            throw std::invalid_argument("exclusion: energy references site outside working set");
        if (T::conj(e) != e) throw std::invalid_argument("exclusion: energies must be real");
    }

    // multiplicity labels: ordered pairs with alpha_{i,j} != 0 or alpha_{j,i} != 0
    std::set<std::pair<int, int>> label_set;
    for (auto& [ij, a] : alpha) {
        if (T::is_zero(a)) continue;
        label_set.insert(ij);
        label_set.insert({ij.second, ij.first});
    }
    std::vector<std::pair<int, int>> labels(label_set.begin(), label_set.end());
    MultiplicityBasis basis;
    for (auto& [i, j] : labels)
        basis.labels.push_back("f_" + std::to_string(i) + "," + std::to_string(j));
    std::size_t d = labels.size();

    auto amp = [alpha](int i, int j) -> S {
        auto it = alpha.find({i, j});
        return it == alpha.end() ? T::zero() : it->second;
    };

    auto rule = [alg, d, labels, amp, eta, site_set](const BasisWord& w) {
        const auto& cw = std::get<CarWord>(w);
        for (int s : cw.cr)
            if (!site_set.count(s))
                throw std::domain_error("exclusion: element support escapes the working site set");
        for (int s : cw.an)
            if (!site_set.count(s))
                throw std::domain_error("exclusion: element support escapes the working site set");

        Element<S> x(alg, w, T::one());
        GeneratorMatrix<S> g(alg, d + 1);

        // tau = i [h, x] - 1/2 sum_{i,j} tau_{i,j}(x)
        Element<S> tau(alg);
        for (auto& [i, e] : eta) {
            Element<S> n_i = mul(car_creator<S>(alg, i), car_annihilator<S>(alg, i));
            tau += (T::i() * e) * (mul(n_i, x) - mul(x, n_i));
        }
        S half = T::from_ratio(1, 2);
        for (std::size_t k = 0; k < labels.size(); ++k) {
            auto [i, j] = labels[k];
            S a = amp(i, j);
            if (T::is_zero(a)) continue;
            Element<S> hop = mul(car_creator<S>(alg, j), car_annihilator<S>(alg, i));  // b*_j b_i
            Element<S> hop_star = star(hop);                                           // b*_i b_j
            Element<S> comm1 = mul(hop, x) - mul(x, hop);       // [b*_j b_i, x]
            Element<S> comm2 = mul(x, hop_star) - mul(hop_star, x);  // [x, b*_i b_j]
            tau -= (half * a * T::conj(a)) * (mul(hop_star, comm1) + mul(comm2, hop));
        }
        tau.prune();
        g.block(0, 0) = tau;

        for (std::size_t k = 0; k < d; ++k) {
            auto [i, j] = labels[k];
            S a = amp(i, j);
            if (T::is_zero(a)) continue;
            Element<S> hop = mul(car_creator<S>(alg, j), car_annihilator<S>(alg, i));
            Element<S> del = a * (mul(hop, x) - mul(x, hop));
            del.prune();
            g.block(k + 1, 0) = del;                  // delta_{i,j}(x)
            Element<S> hop_star = star(hop);
            Element<S> ddag = T::conj(a) * (mul(x, hop_star) - mul(hop_star, x));
            ddag.prune();
            g.block(0, k + 1) = ddag;                 // delta-dagger_{i,j}(x)
        }
        // gauge part is zero for this family
        return g;
    };

    std::vector<BasisWord> gens;
    for (int s : sites) {
        gens.push_back(CarWord{{}, {s}});
        gens.push_back(CarWord{{s}, {}});
    }
    return FlowGenerator<S>(alg, basis, rule, gens, "exclusion");
}

/// Non-commutative torus flow generator (Lemma-style two-noise form): the
/// delta column carries c1 (index-shift by a in U) and c2 (shift by b in V),
/// the gauge corner is diagonal with pi_{1,lambda^a} - id and
/// pi_{lambda^-b,1} - id, and tau(U^m V^n) = -(|c1|^2 m^2 + |c2|^2 n^2)/2.
template <class S>
FlowGenerator<S> torus_generator(std::int64_t a, std::int64_t b, S c1, S c2, PhaseAngle lambda) {
    using T = scalar_traits<S>;
    Algebra alg = Algebra::torus(lambda);
    MultiplicityBasis basis{{"f_1", "f_2"}};

    auto rule = [alg, a, b, c1, c2, lambda](const BasisWord& w) {
        const auto& tw = std::get<TorusWord>(w);
        std::int64_t m = tw.m, n = tw.n;
        GeneratorMatrix<S> g(alg, 3);
        S half = T::from_ratio(1, 2);
        S tau_coeff = -(half * (c1 * T::conj(c1) * T::from_int(m * m) +
                                c2 * T::conj(c2) * T::from_int(n * n)));
        g.block(0, 0) = Element<S>(alg, w, tau_coeff);
        // c1 * adelta, with adelta(U^m V^n) = m U^{a+m} V^n
        g.block(1, 0) = Element<S>(alg, TorusWord{a + m, n}, c1 * T::from_int(m));
        // c2 * delta_b, with delta_b(U^m V^n) = n lambda^{-bm} U^m V^{b+n}
        g.block(2, 0) = Element<S>(alg, TorusWord{m, b + n},
                                   c2 * T::from_int(n) * T::phase_pow(lambda, -b * m));
        // conj(c1) * adelta-dagger, adelta-dagger(U^m V^n) = -m lambda^{an} U^{m-a} V^n
        g.block(0, 1) = Element<S>(alg, TorusWord{m - a, n},
                                   T::conj(c1) * T::from_int(-m) * T::phase_pow(lambda, a * n));
        // conj(c2) * delta_b-dagger, delta_b-dagger(U^m V^n) = -n U^m V^{n-b}
        g.block(0, 2) = Element<S>(alg, TorusWord{m, n - b}, T::conj(c2) * T::from_int(-n));
        // gauge corner: pi_{1,lambda^a} - id and pi_{lambda^-b,1} - id
        g.block(1, 1) = Element<S>(alg, w, T::phase_pow(lambda, a * n) - T::one());
        g.block(2, 2) = Element<S>(alg, w, T::phase_pow(lambda, -b * m) - T::one());
        return g;
    };

    std::vector<BasisWord> gens{TorusWord{1, 0}, TorusWord{0, 1}, TorusWord{-1, 0},
                                TorusWord{0, -1}};
    return FlowGenerator<S>(alg, basis, rule, gens, "torus");
}

/// Torus flow generator with non-zero gauge part: delta(U^m V^n) =
/// (1 - mu^m nu^n)/(1 - mu) U^m V^n, delta-dagger = -mu delta, tau =
/// mu (1-mu)^{-1} delta, gauge block pi_{mu,nu} - id. Requires mu != 1.
template <class S>
FlowGenerator<S> torus_gauge_generator(PhaseAngle mu, PhaseAngle nu, PhaseAngle lambda) {
    using T = scalar_traits<S>;
    if (mu.is_one()) throw std::invalid_argument("gauge generator requires mu != 1");
    Algebra alg = Algebra::torus(lambda);
    MultiplicityBasis basis{{"f_1"}};

    auto rule = [alg, mu, nu](const BasisWord& w) {
        const auto& tw = std::get<TorusWord>(w);
        GeneratorMatrix<S> g(alg, 2);
        S mu1 = T::phase_pow(mu, 1);
        S one_minus_mu = T::one() - mu1;
        S mn = T::phase_pow(mu, tw.m) * T::phase_pow(nu, tw.n);
        S dcoef = (T::one() - mn) / one_minus_mu;
        g.block(1, 0) = Element<S>(alg, w, dcoef);
        g.block(0, 1) = Element<S>(alg, w, -(mu1 * dcoef));
        g.block(0, 0) = Element<S>(alg, w, (mu1 / one_minus_mu) * dcoef);
        g.block(1, 1) = Element<S>(alg, w, mn - T::one());
        return g;
    };

    std::vector<BasisWord> gens{TorusWord{1, 0}, TorusWord{0, 1}, TorusWord{-1, 0},
                                TorusWord{0, -1}};
    return FlowGenerator<S>(alg, basis, rule, gens, "torus_gauge");
}

/// Rotation-algebra flow generator: delta = c1 delta_1 + c2 delta_2 on the
/// skew-adjoint derivations counting U- and V-exponents, tau the quadratic
/// map with the central correction on the Z exponent.
template <class S>
FlowGenerator<S> rotation_generator(S c1, S c2) {
    using T = scalar_traits<S>;
    Algebra alg = Algebra::rotation();
    MultiplicityBasis basis{{"f_1"}};

    auto rule = [alg, c1, c2](const BasisWord& w) {
        const auto& rw = std::get<RotationWord>(w);
        std::int64_t m = rw.m, n = rw.n, p = rw.p;
        GeneratorMatrix<S> g(alg, 2);
        S half = T::from_ratio(1, 2);
        S cross = T::conj(c1) * c2;
        S tau_coeff = -(half * c1 * T::conj(c1) * T::from_int(m * m) +
                        half * c2 * T::conj(c2) * T::from_int(n * n) +
                        cross * T::from_int(m * n) +
                        (cross - c1 * T::conj(c2)) * T::from_int(p));
        g.block(0, 0) = Element<S>(alg, w, tau_coeff);
        g.block(1, 0) = Element<S>(alg, w, c1 * T::from_int(m) + c2 * T::from_int(n));
        g.block(0, 1) =
            Element<S>(alg, w, -(T::conj(c1) * T::from_int(m) + T::conj(c2) * T::from_int(n)));
        return g;
    };

    std::vector<BasisWord> gens{RotationWord{1, 0, 0}, RotationWord{0, 1, 0},
                                RotationWord{0, 0, 1}, RotationWord{-1, 0, 0},
                                RotationWord{0, -1, 0}, RotationWord{0, 0, -1}};
    return FlowGenerator<S>(alg, basis, rule, gens, "rotation");
}

struct NogoResult {
    bool compatible = false;
    double imbalance = 0.0;  // |c1 conj(c2) - conj(c1) c2|
};

/// A tau closing the dissipation identity for delta = c1 0delta + c2 delta_0
/// on the torus exists iff c1 conj(c2) = conj(c1) c2.
template <class S>
NogoResult nogo_check(S c1, S c2) {
    using T = scalar_traits<S>;
    S gap = c1 * T::conj(c2) - T::conj(c1) * c2;
    return {T::is_zero(gap), T::abs(gap)};
}

/// Witness generator for the no-go check: delta = c1 0delta + c2 delta_0
/// (d = 1, trivial gauge) with the natural diagonal tau candidate
/// tau(U^m V^n) = -|c1 m + c2 n|^2 / 2. When the no-go condition fails, the
/// tau dissipation identity breaks on (U, V).
template <class S>
FlowGenerator<S> nogo_witness_generator(S c1, S c2, PhaseAngle lambda) {
    using T = scalar_traits<S>;
    Algebra alg = Algebra::torus(lambda);
    MultiplicityBasis basis{{"f_1"}};
    auto tau_rule = [alg, c1, c2](const BasisWord& w) {
        const auto& tw = std::get<TorusWord>(w);
        S z = c1 * T::from_int(tw.m) + c2 * T::from_int(tw.n);
        return Element<S>(alg, w, -(T::from_ratio(1, 2) * z * T::conj(z)));
    };
    auto delta_rule = [alg, c1, c2](const BasisWord& w) {
        const auto& tw = std::get<TorusWord>(w);
        S z = c1 * T::from_int(tw.m) + c2 * T::from_int(tw.n);
        return std::vector<Element<S>>{Element<S>(alg, w, z)};
    };
    auto pi_rule = [alg](const BasisWord& w) {
        return std::vector<std::vector<Element<S>>>{
            {Element<S>(alg, w, scalar_traits<S>::one())}};
    };
    std::vector<BasisWord> gens{TorusWord{1, 0}, TorusWord{0, 1}};
    return from_components<S>(alg, basis, tau_rule, delta_rule, pi_rule, gens, "nogo_witness");
}

/// Bounded-form generator: pi given, z in A (x) |K>, h self-adjoint;
/// delta(x) = z x - pi(x) z, tau(x) = i[h,x] - {z*z, x}/2 + z* pi(x) z.
template <class S>
FlowGenerator<S> bounded_form_generator(
    const Algebra& alg, const MultiplicityBasis& basis,
    std::function<std::vector<std::vector<Element<S>>>(const BasisWord&)> pi_rule,
    const std::vector<Element<S>>& z, const Element<S>& h, std::vector<BasisWord> generators) {
    using T = scalar_traits<S>;
    if (z.size() != basis.dim()) throw std::invalid_argument("z column dimension mismatch");
    if (!(star(h) == h)) throw std::invalid_argument("h must be self-adjoint");

    auto delta_rule = [alg, pi_rule, z](const BasisWord& w) {
        Element<S> x(alg, w, T::one());
        auto pi = pi_rule(w);
        std::vector<Element<S>> out;
        out.reserve(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) {
            Element<S> acc = mul(z[i], x);
            for (std::size_t j = 0; j < z.size(); ++j) acc -= mul(pi[i][j], z[j]);
            acc.prune();
            out.push_back(acc);
        }
        return out;
    };
    auto tau_rule = [alg, pi_rule, z, h](const BasisWord& w) {
        Element<S> x(alg, w, T::one());
        Element<S> zz(alg);
        for (const auto& zi : z) zz += mul(star(zi), zi);
        Element<S> acc = T::i() * (mul(h, x) - mul(x, h));
        acc -= T::from_ratio(1, 2) * (mul(zz, x) + mul(x, zz));
        auto pi = pi_rule(w);
        for (std::size_t i = 0; i < z.size(); ++i)
            for (std::size_t j = 0; j < z.size(); ++j)
                acc += mul(star(z[i]), mul(pi[i][j], z[j]));
        acc.prune();
        return acc;
    };
    return from_components<S>(alg, basis, tau_rule, delta_rule, pi_rule, std::move(generators),
                              "bounded_form");
}

}  // namespace qflow
