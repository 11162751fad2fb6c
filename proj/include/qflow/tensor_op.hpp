#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qflow/generator.hpp"

namespace qflow {

using MultiIndex = std::vector<std::uint8_t>;
using IndexPair = std::pair<MultiIndex, MultiIndex>;

inline constexpr std::size_t kDefaultEntryCap = 4'000'000;

/// Sparse element of A_0 (x) B(K-hat)^{(x) n}: multi-indexed blocks of algebra
/// elements. Depth 0 is a bare algebra element. Tensor slot j (left to right)
/// pairs with slice vectors (xi_j, chi_j); the first application of the
/// generator sits in the rightmost slot.
template <class S>
class TensorOperator {
public:
    using entry_map = std::map<IndexPair, Element<S>>;

    TensorOperator() = default;
    TensorOperator(Algebra alg, std::size_t depth, std::size_t ext_dim)
        : alg_(std::move(alg)), depth_(depth), ext_dim_(ext_dim) {}

    static TensorOperator from_element(const Element<S>& x, std::size_t ext_dim) {
        TensorOperator t(x.algebra(), 0, ext_dim);
        if (!x.is_zero()) t.entries_[{{}, {}}] = x;
        return t;
    }

    const Algebra& algebra() const { return alg_; }
    std::size_t depth() const { return depth_; }
    std::size_t ext_dim() const { return ext_dim_; }
    const entry_map& entries() const { return entries_; }
    std::size_t entry_count() const { return entries_.size(); }
    bool is_zero() const { return entries_.empty(); }

    const Element<S>* entry(const MultiIndex& r, const MultiIndex& c) const {
        auto it = entries_.find({r, c});
        return it == entries_.end() ? nullptr : &it->second;
    }

    void add_entry(const MultiIndex& r, const MultiIndex& c, const Element<S>& e) {
        if (e.is_zero()) return;
        if (r.size() != depth_ || c.size() != depth_)
            throw std::invalid_argument("tensor index length mismatch");
        auto it = entries_.find({r, c});
        if (it == entries_.end()) {
            entries_.emplace(IndexPair{r, c}, e);
        } else {
            it->second += e;
            if (it->second.is_zero()) entries_.erase(it);
        }
    }

    void prune() {
        for (auto it = entries_.begin(); it != entries_.end();) {
            it->second.prune();
            if (it->second.is_zero())
                it = entries_.erase(it);
            else
                ++it;
        }
    }

    friend TensorOperator operator+(const TensorOperator& a, const TensorOperator& b) {
        if (a.depth_ != b.depth_) throw std::invalid_argument("tensor depth mismatch");
        TensorOperator r = a;
        for (auto& [idx, e] : b.entries_) r.add_entry(idx.first, idx.second, e);
        return r;
    }
    friend TensorOperator operator-(const TensorOperator& a, const TensorOperator& b) {
        if (a.depth_ != b.depth_) throw std::invalid_argument("tensor depth mismatch");
        TensorOperator r = a;
        for (auto& [idx, e] : b.entries_) r.add_entry(idx.first, idx.second, -e);
        return r;
    }
    friend TensorOperator operator*(const S& s, const TensorOperator& a) {
        TensorOperator r(a.alg_, a.depth_, a.ext_dim_);
        for (auto& [idx, e] : a.entries_) r.add_entry(idx.first, idx.second, s * e);
        return r;
    }

    /// Entrywise adjoint-transpose: (r,c) -> (c,r) with starred blocks.
    TensorOperator adjoint() const {
        TensorOperator r(alg_, depth_, ext_dim_);
        for (auto& [idx, e] : entries_) r.add_entry(idx.second, idx.first, star(e));
        return r;
    }

    /// Certified l1 upper bound: sum of block norm bounds (every matrix unit
    /// has norm one).
    double norm_bound_l1() const {
        double s = 0.0;
        for (auto& [idx, e] : entries_) s += norm_bound(e).value;
        return s;
    }

private:
    Algebra alg_;
    std::size_t depth_ = 0;
    std::size_t ext_dim_ = 1;
    entry_map entries_;
};

/// One application of phi to the algebra leg: the new slot is prepended on the
/// left, so after n steps the first application sits rightmost.
template <class S>
TensorOperator<S> iterate_once(const FlowGenerator<S>& phi, const TensorOperator<S>& t,
                               std::size_t entry_cap = kDefaultEntryCap) {
    const std::size_t D = phi.ext_dim();
    if (t.ext_dim() != D) throw std::invalid_argument("tensor multiplicity mismatch");
    TensorOperator<S> out(t.algebra(), t.depth() + 1, D);
    for (auto& [idx, e] : t.entries()) {
        for (auto& [w, coeff] : e.terms()) {
            const GeneratorMatrix<S>& g = phi.on_word(w);
            for (std::size_t r0 = 0; r0 < D; ++r0) {
                for (std::size_t c0 = 0; c0 < D; ++c0) {
                    const Element<S>& blk = g.block(r0, c0);
                    if (blk.is_zero()) continue;
                    MultiIndex r;
                    r.reserve(idx.first.size() + 1);
                    r.push_back((std::uint8_t)r0);
                    r.insert(r.end(), idx.first.begin(), idx.first.end());
                    MultiIndex c;
                    c.reserve(idx.second.size() + 1);
                    c.push_back((std::uint8_t)c0);
                    c.insert(c.end(), idx.second.begin(), idx.second.end());
                    out.add_entry(r, c, coeff * blk);
                    if (out.entry_count() > entry_cap)
                        throw std::length_error("tensor entry cap exceeded");
                }
            }
        }
    }
    out.prune();
    return out;
}

/// phi_n(x), the n-fold quantum random walk applied to x.
template <class S>
TensorOperator<S> iterate(const FlowGenerator<S>& phi, const Element<S>& x, std::size_t n,
                          std::size_t entry_cap = kDefaultEntryCap) {
    TensorOperator<S> t = TensorOperator<S>::from_element(x, phi.ext_dim());
    for (std::size_t k = 0; k < n; ++k) t = iterate_once(phi, t, entry_cap);
    return t;
}

/// Compression of a depth-n tensor between product vectors: slot j pairs with
/// (xi_j, chi_j), reproducing the composition of one-step compressions with
/// the last pair applied first.
template <class S>
Element<S> slice(const TensorOperator<S>& t, const std::vector<KVec<S>>& xis,
                 const std::vector<KVec<S>>& chis) {
    using T = scalar_traits<S>;
    if (xis.size() != t.depth() || chis.size() != t.depth())
        throw std::invalid_argument("slice vector count must equal tensor depth");
    for (const auto& v : xis)
        if (v.size() != t.ext_dim()) throw std::invalid_argument("slice vector dimension mismatch");
    for (const auto& v : chis)
        if (v.size() != t.ext_dim()) throw std::invalid_argument("slice vector dimension mismatch");
    Element<S> out(t.algebra());
    for (auto& [idx, e] : t.entries()) {
        S factor = T::one();
        bool zero = false;
        for (std::size_t j = 0; j < t.depth(); ++j) {
            S f = T::conj(xis[j][idx.first[j]]) * chis[j][idx.second[j]];
            if (T::is_zero(f)) {
                zero = true;
                break;
            }
            factor = factor * f;
        }
        if (!zero) out += factor * e;
    }
    out.prune();
    return out;
}

/// Slice only the last (rightmost) slot, lowering the depth by one.
template <class S>
TensorOperator<S> slice_last(const TensorOperator<S>& t, const KVec<S>& xi, const KVec<S>& chi) {
    using T = scalar_traits<S>;
    if (t.depth() == 0) throw std::invalid_argument("cannot slice a depth-0 tensor");
    TensorOperator<S> out(t.algebra(), t.depth() - 1, t.ext_dim());
    for (auto& [idx, e] : t.entries()) {
        S f = T::conj(xi[idx.first.back()]) * chi[idx.second.back()];
        if (T::is_zero(f)) continue;
        MultiIndex r(idx.first.begin(), idx.first.end() - 1);
        MultiIndex c(idx.second.begin(), idx.second.end() - 1);
        out.add_entry(r, c, f * e);
    }
    out.prune();
    return out;
}

/// T(n, alpha): embed a depth-k tensor into depth n with identities in the
/// slots outside alpha (1-based, strictly increasing).
template <class S>
TensorOperator<S> embed(const TensorOperator<S>& t, std::size_t n,
                        const std::vector<std::size_t>& alpha) {
    if (alpha.size() != t.depth()) throw std::invalid_argument("embed arity mismatch");
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (alpha[i] < 1 || alpha[i] > n || (i > 0 && alpha[i] <= alpha[i - 1]))
            throw std::invalid_argument("embed subset must be increasing within 1..n");
    }
    const std::size_t D = t.ext_dim();
    std::vector<bool> in_alpha(n + 1, false);
    for (auto a : alpha) in_alpha[a] = true;
    std::vector<std::size_t> free_slots;
    for (std::size_t s = 1; s <= n; ++s)
        if (!in_alpha[s]) free_slots.push_back(s);

    TensorOperator<S> out(t.algebra(), n, D);
    std::vector<std::uint8_t> assign(free_slots.size(), 0);
    for (;;) {
        for (auto& [idx, e] : t.entries()) {
            MultiIndex r(n, 0), c(n, 0);
            for (std::size_t i = 0; i < alpha.size(); ++i) {
                r[alpha[i] - 1] = idx.first[i];
                c[alpha[i] - 1] = idx.second[i];
            }
            for (std::size_t i = 0; i < free_slots.size(); ++i) {
                r[free_slots[i] - 1] = assign[i];
                c[free_slots[i] - 1] = assign[i];
            }
            out.add_entry(r, c, e);
        }
        // next identity assignment
        std::size_t pos = 0;
        while (pos < assign.size()) {
            if (++assign[pos] < D) break;
            assign[pos] = 0;
            ++pos;
        }
        if (pos == assign.size()) break;
    }
    return out;
}

/// Delta(n, alpha): the projector killing the omega direction in the alpha
/// slots, materialised as a diagonal tensor (test-scale only).
template <class S>
TensorOperator<S> delta_projector(const Algebra& alg, std::size_t n,
                                  const std::vector<std::size_t>& alpha, std::size_t ext_dim) {
    std::vector<bool> in_alpha(n + 1, false);
    for (auto a : alpha) {
        if (a < 1 || a > n) throw std::invalid_argument("projector slot out of range");
        in_alpha[a] = true;
    }
    TensorOperator<S> out(alg, n, ext_dim);
    MultiIndex s(n, 0);
    Element<S> one = Element<S>::unit(alg);
    for (;;) {
        bool keep = true;
        for (std::size_t j = 1; j <= n; ++j)
            if (in_alpha[j] && s[j - 1] == 0) keep = false;
        if (keep) out.add_entry(s, s, one);
        std::size_t pos = 0;
        while (pos < n) {
            if (++s[pos] < ext_dim) break;
            s[pos] = 0;
            ++pos;
        }
        if (pos == n) break;
    }
    return out;
}

/// Product in A_0 (x) B(K-hat)^{(x) n}: contraction over the middle
/// multi-index with algebra products in the given order.
template <class S>
TensorOperator<S> tensor_mul(const TensorOperator<S>& a, const TensorOperator<S>& b) {
    if (a.depth() != b.depth()) throw std::invalid_argument("tensor depth mismatch");
    require_same_algebra(a.algebra(), b.algebra());
    std::multimap<MultiIndex, const std::pair<const IndexPair, Element<S>>*> by_row;
    for (auto& kv : b.entries()) by_row.emplace(kv.first.first, &kv);
    TensorOperator<S> out(a.algebra(), a.depth(), a.ext_dim());
    for (auto& [idx, e] : a.entries()) {
        auto range = by_row.equal_range(idx.second);
        for (auto it = range.first; it != range.second; ++it) {
            const auto& [idx2, e2] = *it->second;
            out.add_entry(idx.first, idx2.second, mul(e, e2));
        }
    }
    out.prune();
    return out;
}

template <class S>
TensorOperator<Complex> to_complex_tensor(const TensorOperator<S>& t) {
    TensorOperator<Complex> out(t.algebra(), t.depth(), t.ext_dim());
    for (auto& [idx, e] : t.entries()) out.add_entry(idx.first, idx.second, to_complex_element(e));
    return out;
}

}  // namespace qflow
