#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "qflow/report.hpp"
#include "qflow/tensor_op.hpp"

namespace qflow {

template <class S>
struct HoprodResult {
    TensorOperator<S> rhs;
    std::uint64_t term_count = 0;
};

namespace detail {

/// One summand phi_{|a|}(x; n, a) Delta(n, a&b) phi_{|b|}(y; n, b), joined
/// directly from the sparse factors: identity slots copy indices through and
/// the Delta overlap acts as a middle-index filter killing omega. `label`
/// holds 0 (x only), 1 (y only) or 2 (both) per slot.
template <class S>
void hoprod_term_into(const TensorOperator<S>& tx, const TensorOperator<S>& ty,
                      const std::vector<int>& label, TensorOperator<S>& out,
                      std::size_t entry_cap) {
    const std::size_t n = label.size();
    std::vector<std::size_t> pos_a(n, 0), pos_b(n, 0);
    std::vector<std::size_t> slots_a, slots_b, overlap;
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] != 1) {
            pos_a[i] = slots_a.size();
            slots_a.push_back(i);
        }
        if (label[i] != 0) {
            pos_b[i] = slots_b.size();
            slots_b.push_back(i);
        }
        if (label[i] == 2) overlap.push_back(i);
    }

    // bucket ty entries by their row restricted to the overlap slots
    std::map<MultiIndex, std::vector<const std::pair<const IndexPair, Element<S>>*>> buckets;
    for (auto& kv : ty.entries()) {
        MultiIndex key;
        key.reserve(overlap.size());
        bool ok = true;
        for (std::size_t i : overlap) {
            std::uint8_t v = kv.first.first[pos_b[i]];
            if (v == 0) {
                ok = false;  // Delta kills the omega direction
                break;
            }
            key.push_back(v);
        }
        if (ok) buckets[key].push_back(&kv);
    }

    for (auto& [ra, ca] : tx.entries()) {
        MultiIndex key;
        key.reserve(overlap.size());
        bool ok = true;
        for (std::size_t i : overlap) {
            std::uint8_t v = ra.second[pos_a[i]];
            if (v == 0) {
                ok = false;
                break;
            }
            key.push_back(v);
        }
        if (!ok) continue;
        auto it = buckets.find(key);
        if (it == buckets.end()) continue;
        for (const auto* kv : it->second) {
            const MultiIndex& rb = kv->first.first;
            const MultiIndex& cb = kv->first.second;
            MultiIndex r(n, 0), c(n, 0);
            for (std::size_t i = 0; i < n; ++i) {
                switch (label[i]) {
                    case 0:
                        r[i] = ra.first[pos_a[i]];
                        c[i] = ra.second[pos_a[i]];
                        break;
                    case 1:
                        r[i] = rb[pos_b[i]];
                        c[i] = cb[pos_b[i]];
                        break;
                    default:
                        r[i] = ra.first[pos_a[i]];
                        c[i] = cb[pos_b[i]];
                        break;
                }
            }
            out.add_entry(r, c, mul(ca, kv->second));
            if (out.entry_count() > entry_cap)
                throw std::length_error("tensor entry cap exceeded");
        }
    }
}

}  // namespace detail

/// Right-hand side of the higher-order product formula: the sum over all
/// subset pairs with alpha | beta = {1..n} (3^n terms, one per slot label in
/// {x-only, y-only, both}), optionally truncated to |alpha|, |beta| <= N.
template <class S>
HoprodResult<S> hoprod_sum(const FlowGenerator<S>& phi, const Element<S>& x, const Element<S>& y,
                           std::size_t n, std::optional<std::size_t> trunc,
                           std::size_t entry_cap = kDefaultEntryCap) {
    std::vector<TensorOperator<S>> px(n + 1), py(n + 1);
    px[0] = TensorOperator<S>::from_element(x, phi.ext_dim());
    py[0] = TensorOperator<S>::from_element(y, phi.ext_dim());
    for (std::size_t k = 1; k <= n; ++k) {
        px[k] = iterate_once(phi, px[k - 1], entry_cap);
        py[k] = iterate_once(phi, py[k - 1], entry_cap);
    }

    HoprodResult<S> res;
    res.rhs = TensorOperator<S>(phi.algebra(), n, phi.ext_dim());
    std::vector<int> label(n, 0);
    for (;;) {
        std::size_t ca = 0, cb = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (label[i] != 1) ++ca;
            if (label[i] != 0) ++cb;
        }
        if (!trunc || (ca <= *trunc && cb <= *trunc)) {
            ++res.term_count;
            detail::hoprod_term_into(px[ca], py[cb], label, res.rhs, entry_cap);
        }
        std::size_t pos = 0;  // odometer in sorted ternary order
        while (pos < n) {
            if (++label[pos] < 3) break;
            label[pos] = 0;
            ++pos;
        }
        if (pos == n) break;
    }
    res.rhs.prune();
    return res;
}

/// Full formula (no truncation): 3^n summands.
template <class S>
HoprodResult<S> hoprod_rhs(const FlowGenerator<S>& phi, const Element<S>& x, const Element<S>& y,
                           std::size_t n, std::size_t entry_cap = kDefaultEntryCap) {
    return hoprod_sum(phi, x, y, n, std::nullopt, entry_cap);
}

/// phi_{n,N]}(x y): the restricted sum with |alpha| <= N and |beta| <= N;
/// equals phi_n(xy) whenever n <= N.
template <class S>
HoprodResult<S> truncated_product(const FlowGenerator<S>& phi, const Element<S>& x,
                                  const Element<S>& y, std::size_t n, std::size_t N,
                                  std::size_t entry_cap = kDefaultEntryCap) {
    if (n > 2 * N) throw std::invalid_argument("truncated product requires n <= 2N");
    return hoprod_sum(phi, x, y, n, N, entry_cap);
}

/// Compare the combinatorial right-hand side with the iterated left-hand side
/// phi_n(xy); the residual is reported entrywise through the l1 norm bound.
template <class S>
VerificationReport verify_hoprod(const FlowGenerator<S>& phi, const Element<S>& x,
                                 const Element<S>& y, std::size_t n, double tol = 0.0,
                                 std::size_t entry_cap = kDefaultEntryCap) {
    VerificationReport rep;
    rep.subject = "higher-order product formula [" + phi.family_note() + "]";
    auto res = hoprod_rhs(phi, x, y, n, entry_cap);
    auto lhs = iterate(phi, mul(x, y), n, entry_cap);
    auto diff = res.rhs - lhs;
    diff.prune();
    std::ostringstream detail;
    detail << "n=" << n << ", terms=" << res.term_count;
    rep.add("higher_order_product", detail.str(), diff.norm_bound_l1(), tol);
    std::uint64_t expect_terms = 1;
    for (std::size_t i = 0; i < n; ++i) expect_terms *= 3;
    rep.add("term_enumeration_count", detail.str(),
            res.term_count == expect_terms ? 0.0 : 1.0, 0.0);
    return rep;
}

}  // namespace qflow
