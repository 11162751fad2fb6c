#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qflow/jordan_wigner.hpp"
#include "qflow/tensor_op.hpp"

namespace qflow {

enum class GrowthClass { Geometric, SuperGeometric, Inconclusive };

inline const char* growth_class_name(GrowthClass c) {
    switch (c) {
        case GrowthClass::Geometric: return "geometric";
        case GrowthClass::SuperGeometric: return "super-geometric";
        default: return "inconclusive";
    }
}

/// Growth record for one element: certified upper and lower bounds for
/// ||phi_n(x)||, n = 0..N, and the classification verdict. The geometric
/// verdict is a sufficient condition from certified uppers; when cert_all_n
/// is set the pair (C, M) bounds every n, not just the computed window.
struct GrowthProfile {
    int N = 0;
    std::vector<double> upper;
    std::vector<double> lower;
    GrowthClass classification = GrowthClass::Inconclusive;
    double C = 0.0;
    double M = 0.0;
    bool cert_all_n = false;
    std::string note;
};

template <class S>
struct LowerProbe {
    KVec<S> xi;
    KVec<S> chi;
};

struct GrowthOptions {
    int N = 12;
    double ratio_slack = 0.10;   // window ratio spread admitted as geometric
    double super_sigma = 1e-9;   // lower_n >= sigma * n! declares super-geometric
    std::size_t word_cap = 20000;
};

namespace detail {

/// Branch decomposition of phi on one word: phi(w) = sum_{w'} w' (x) m_{w,w'}
/// with scalar (1+d)x(1+d) matrices; always exists because blocks are finite
/// word sums.
template <class S>
std::map<BasisWord, Eigen::MatrixXcd, WordLess> branch_matrices(const FlowGenerator<S>& phi,
                                                                const BasisWord& w) {
    const std::size_t D = phi.ext_dim();
    const GeneratorMatrix<S>& g = phi.on_word(w);
    std::map<BasisWord, Eigen::MatrixXcd, WordLess> out;
    for (std::size_t r = 0; r < D; ++r)
        for (std::size_t c = 0; c < D; ++c)
            for (auto& [w2, coeff] : g.block(r, c).terms()) {
                auto it = out.find(w2);
                if (it == out.end())
                    it = out.emplace(w2, Eigen::MatrixXcd::Zero(D, D)).first;
                it->second((Eigen::Index)r, (Eigen::Index)c) = scalar_traits<S>::to_complex(coeff);
            }
    return out;
}

/// Branch row cache: word -> (target word -> ||m_{w,target}||).
template <class S>
class BranchRows {
public:
    explicit BranchRows(const FlowGenerator<S>& phi, std::size_t cap) : phi_(phi), cap_(cap) {}

    const std::map<BasisWord, double, WordLess>* row(const BasisWord& w) {
        auto it = rows_.find(w);
        if (it != rows_.end()) return &it->second;
        if (rows_.size() >= cap_) return nullptr;
        auto branches = branch_matrices(phi_, w);
        std::map<BasisWord, double, WordLess> r;
        for (auto& [w2, m] : branches) r[w2] = spectral_norm(m);
        return &rows_.emplace(w, std::move(r)).first->second;
    }

    const std::map<BasisWord, std::map<BasisWord, double, WordLess>, WordLess>& all() const {
        return rows_;
    }

private:
    const FlowGenerator<S>& phi_;
    std::size_t cap_;
    std::map<BasisWord, std::map<BasisWord, double, WordLess>, WordLess> rows_;
};

}  // namespace detail

/// Certified growth bounds and classification for x under phi.
///
/// Uppers come from the branch dynamic programme
///     u_0(w) = 1,   u_n(w) = sum_{w'} ||m_{w,w'}|| u_{n-1}(w'),
/// which dominates ||phi_n(w)|| by the triangle and cross-norm inequalities;
/// basis words have norm one in all four families. Lowers come from corner
/// compressions (all-(f_i, omega) and all-(omega, f_i) by default) evaluated
/// with family-exact lower norms.
template <class S>
GrowthProfile growth_profile(const FlowGenerator<S>& phi, const Element<S>& x,
                             const GrowthOptions& opts = {},
                             const std::vector<LowerProbe<S>>& custom_probes = {}) {
    using T = scalar_traits<S>;
    GrowthProfile prof;
    prof.N = opts.N;
    const std::size_t D = phi.ext_dim();

    detail::BranchRows<S> rows(phi, opts.word_cap);

    // closure scan: does the reachable word set stop growing within N steps?
    bool closed = false;
    bool capped = false;
    {
        std::set<BasisWord, WordLess> visited;
        std::vector<BasisWord> frontier;
        for (auto& [w, c] : x.terms())
            if (visited.insert(w).second) frontier.push_back(w);
        for (int level = 0; level <= opts.N; ++level) {
            std::vector<BasisWord> next;
            for (const auto& w : frontier) {
                const auto* r = rows.row(w);
                if (!r) {
                    capped = true;
                    break;
                }
                for (auto& [w2, nm] : *r)
                    if (visited.insert(w2).second) next.push_back(w2);
            }
            if (capped) break;
            if (next.empty()) {
                closed = true;
                break;
            }
            frontier = std::move(next);
        }
    }

    // upper DP with level memo
    std::map<std::pair<int, BasisWord>, double> memo;
    std::function<std::optional<double>(int, const BasisWord&)> u =
        [&](int k, const BasisWord& w) -> std::optional<double> {
        if (k == 0) return 1.0;
        auto key = std::make_pair(k, w);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        const auto* r = rows.row(w);
        if (!r) return std::nullopt;
        double s = 0.0;
        for (auto& [w2, nm] : *r) {
            auto v = u(k - 1, w2);
            if (!v) return std::nullopt;
            s += nm * *v;
        }
        memo[key] = s;
        return s;
    };
    for (int n = 0; n <= opts.N; ++n) {
        double s = 0.0;
        bool ok = true;
        for (auto& [w, c] : x.terms()) {
            auto v = u(n, w);
            if (!v) {
                ok = false;
                break;
            }
            s += T::abs(c) * *v;
        }
        if (!ok) break;
        prof.upper.push_back(s);
    }

    // lower bounds via corner compressions
    std::vector<LowerProbe<S>> probes = custom_probes;
    if (probes.empty()) {
        for (std::size_t i = 1; i < D; ++i) {
            probes.push_back({kvec_basis<S>(D - 1, i), kvec_omega<S>(D - 1)});
            probes.push_back({kvec_omega<S>(D - 1), kvec_basis<S>(D - 1, i)});
        }
    }
    prof.lower.assign(prof.upper.size(), 0.0);
    if (!prof.lower.empty()) prof.lower[0] = certified_norm_lower(x);
    for (const auto& probe : probes) {
        double scale_step = kvec_norm(probe.xi) * kvec_norm(probe.chi);
        Element<S> y = x;
        double scale = 1.0;
        for (std::size_t n = 1; n < prof.upper.size(); ++n) {
            try {
                y = phi.compress(probe.xi, probe.chi, y);
            } catch (const std::domain_error&) {
                break;  // e.g. exclusion support ran out of working sites
            }
            if (y.is_zero()) break;
            scale *= scale_step;
            prof.lower[n] = std::max(prof.lower[n], certified_norm_lower(y) / scale);
        }
    }

    // classification
    int have = (int)prof.upper.size() - 1;
    int lo = std::max(1, have / 2);
    double l1x = 0.0;
    for (auto& [w, c] : x.terms()) l1x += T::abs(c);

    bool super = have >= 2;
    if (super) {
        double fact = 1.0;
        for (int n = 1; n <= have; ++n) {
            fact *= n;
            if (n >= lo && prof.lower[n] < opts.super_sigma * fact) {
                super = false;
                break;
            }
        }
    }

    if (closed) {
        double max_row_sum = 0.0;
        bool product_structure = true;
        for (const auto& [w, r] : rows.all()) {
            double s = 0.0;
            for (auto& [w2, nm] : r) s += nm;
            max_row_sum = std::max(max_row_sum, s);
            if (r.size() != 1 || r.begin()->first != w) product_structure = false;
        }
        prof.classification = GrowthClass::Geometric;
        prof.M = max_row_sum;
        prof.C = std::max(l1x, 1e-300);
        prof.cert_all_n = true;
        prof.note = product_structure ? "closed orbit, product structure: M exact"
                                      : "closed orbit: M = max branch row sum, all n";
    } else if (phi.declared_row_sup()) {
        prof.classification = GrowthClass::Geometric;
        prof.M = *phi.declared_row_sup();
        prof.C = std::max(l1x, 1e-300);
        prof.cert_all_n = true;
        prof.note = "declared global row-sum bound, all n";
    } else if (super) {
        prof.classification = GrowthClass::SuperGeometric;
        prof.note = "certified lower bounds dominate n! on the upper window";
    } else if (have >= 4) {
        double rmin = 1e300, rmax = 0.0;
        bool ratios_ok = true;
        for (int n = lo; n < have; ++n) {
            if (prof.upper[n] <= 0.0) {
                ratios_ok = false;
                break;
            }
            double r = prof.upper[n + 1] / prof.upper[n];
            rmin = std::min(rmin, r);
            rmax = std::max(rmax, r);
        }
        if (ratios_ok && rmax <= (1.0 + opts.ratio_slack) * rmin) {
            prof.classification = GrowthClass::Geometric;
            prof.M = rmax;
            prof.C = 0.0;
            for (int n = 0; n <= have; ++n)
                prof.C = std::max(prof.C, prof.upper[n] / std::pow(rmax, n));
            prof.cert_all_n = false;
            prof.note = "window ratio fit (finite-N verdict only)";
        } else {
            prof.note = capped ? "word cap reached, no certificate"
                               : "no certificate within the window";
        }
    } else {
        prof.note = "insufficient data";
    }
    return prof;
}

/// Certified growth constants for a product, from the higher-order product
/// formula: (C_x C_y, M_x + M_x M_y + M_y).
inline std::pair<double, double> product_closure_bound(double Cx, double Mx, double Cy,
                                                       double My) {
    if (Cx <= 0 || Cy <= 0 || Mx < 0 || My < 0)
        throw std::invalid_argument("growth constants must be positive");
    return {Cx * Cy, Mx + Mx * My + My};
}

}  // namespace qflow
