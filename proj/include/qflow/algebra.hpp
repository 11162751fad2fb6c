#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qflow/scalar.hpp"
#include "qflow/word.hpp"

namespace qflow {

enum class Family : std::uint8_t { Group, Car, Torus, Rotation };

inline const char* family_name(Family f) {
    switch (f) {
        case Family::Group: return "group";
        case Family::Car: return "car";
        case Family::Torus: return "torus";
        default: return "rotation";
    }
}

/// Descriptor of one of the four concrete *-algebras. CAR elements live in the
/// inductive limit over finite site sets, so no site set is pinned here; the
/// torus carries its deformation phase lambda (|lambda| = 1 by construction).
struct Algebra {
    Family family = Family::Torus;
    int group_rank = 1;       // Group family
    PhaseAngle lambda;        // Torus family

    static Algebra group(int rank = 1) {
        Algebra a;
        a.family = Family::Group;
        a.group_rank = rank;
        return a;
    }
    static Algebra car() {
        Algebra a;
        a.family = Family::Car;
        return a;
    }
    static Algebra torus(PhaseAngle lambda) {
        Algebra a;
        a.family = Family::Torus;
        a.lambda = lambda;
        return a;
    }
    static Algebra rotation() {
        Algebra a;
        a.family = Family::Rotation;
        return a;
    }

    friend bool operator==(const Algebra& a, const Algebra& b) {
        if (a.family != b.family) return false;
        switch (a.family) {
            case Family::Group: return a.group_rank == b.group_rank;
            case Family::Torus: return a.lambda == b.lambda;
            default: return true;
        }
    }
    friend bool operator!=(const Algebra& a, const Algebra& b) { return !(a == b); }
};

inline void require_same_algebra(const Algebra& a, const Algebra& b) {
    if (a != b) throw std::invalid_argument("algebra mismatch");
}

inline BasisWord unit_word(const Algebra& a) {
    switch (a.family) {
        case Family::Group: return GroupWord{true, {}};
        case Family::Car: return CarWord{};
        case Family::Torus: return TorusWord{0, 0};
        default: return RotationWord{0, 0, 0};
    }
}

inline bool is_unit_word(const BasisWord& w) {
    if (auto* g = std::get_if<GroupWord>(&w)) return g->unit;
    if (auto* c = std::get_if<CarWord>(&w)) return c->cr.empty() && c->an.empty();
    if (auto* t = std::get_if<TorusWord>(&w)) return t->m == 0 && t->n == 0;
    auto& r = std::get<RotationWord>(w);
    return r.m == 0 && r.n == 0 && r.p == 0;
}

struct NormBound {
    double value = 0.0;
    bool exact = false;
};

namespace detail {

/// One creation/annihilation operator in an un-normalised CAR string.
struct CarOp {
    int site;
    bool dag;
};

/// Rewrite an arbitrary operator string into the strictly-increasing
/// creators-then-annihilators normal form using the anti-commutation
/// relations; each input string expands into at most 2^(contractions) terms
/// with signs +-1.
inline void car_normal_order(std::vector<CarOp> seq, int sign,
                             std::vector<std::pair<CarWord, int>>& out) {
    std::deque<std::pair<int, std::vector<CarOp>>> work;
    work.emplace_back(sign, std::move(seq));
    while (!work.empty()) {
        auto [sg, s] = std::move(work.front());
        work.pop_front();
        bool dispatched = false;
        for (size_t k = 0; k + 1 < s.size(); ++k) {
            const CarOp& a = s[k];
            const CarOp& b = s[k + 1];
            if (!a.dag && b.dag) {
                // b_i b*_j = delta_ij - b*_j b_i
                std::vector<CarOp> swapped = s;
                std::swap(swapped[k], swapped[k + 1]);
                if (a.site == b.site) {
                    std::vector<CarOp> contracted;
                    contracted.reserve(s.size() - 2);
                    for (size_t l = 0; l < s.size(); ++l)
                        if (l != k && l != k + 1) contracted.push_back(s[l]);
                    work.emplace_back(sg, std::move(contracted));
                }
                work.emplace_back(-sg, std::move(swapped));
                dispatched = true;
                break;
            }
            if (a.dag == b.dag && a.site == b.site) {
                dispatched = true;  // b_i b_i = 0, b*_i b*_i = 0
                break;
            }
            if (a.dag == b.dag && a.site > b.site) {
                std::vector<CarOp> swapped = s;
                std::swap(swapped[k], swapped[k + 1]);
                work.emplace_back(-sg, std::move(swapped));
                dispatched = true;
                break;
            }
        }
        if (dispatched) continue;
        CarWord w;
        for (const CarOp& op : s) (op.dag ? w.cr : w.an).push_back(op.site);
        out.emplace_back(std::move(w), sg);
    }
}

inline std::vector<CarOp> car_word_ops(const CarWord& w) {
    std::vector<CarOp> s;
    s.reserve(w.cr.size() + w.an.size());
    for (int j : w.cr) s.push_back({j, true});
    for (int i : w.an) s.push_back({i, false});
    return s;
}

}  // namespace detail

/// Sparse finite linear combination of basis words with coefficients in S.
/// Values are immutable in spirit: every operation returns a fresh element.
template <class S>
class Element {
public:
    using scalar_type = S;
    using traits = scalar_traits<S>;
    using term_map = std::map<BasisWord, S, WordLess>;

    Element() = default;
    explicit Element(Algebra alg) : alg_(std::move(alg)) {}
    Element(Algebra alg, const BasisWord& w, const S& c) : alg_(std::move(alg)) {
        if (!traits::is_zero(c)) terms_[w] = c;
    }

    static Element unit(const Algebra& a) { return Element(a, unit_word(a), traits::one()); }
    static Element zero(const Algebra& a) { return Element(a); }

    const Algebra& algebra() const { return alg_; }
    const term_map& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    S coeff(const BasisWord& w) const {
        auto it = terms_.find(w);
        return it == terms_.end() ? traits::zero() : it->second;
    }

    void add_term(const BasisWord& w, const S& c) {
        auto it = terms_.find(w);
        if (it == terms_.end()) {
            if (!traits::is_zero(c)) terms_[w] = c;
        } else {
            it->second += c;
            if (traits::is_zero(it->second)) terms_.erase(it);
        }
    }

    /// Drop float-mode dust: coefficients below 1e-15 relative to the largest
    /// magnitude in the element. Exact mode only stores exact non-zeros.
    void prune() {
        if constexpr (traits::exact) return;
        double mx = 0.0;
        for (auto& [w, c] : terms_) mx = std::max(mx, traits::abs(c));
        if (mx == 0.0) {
            terms_.clear();
            return;
        }
        for (auto it = terms_.begin(); it != terms_.end();) {
            if (traits::abs(it->second) <= 1e-15 * mx)
                it = terms_.erase(it);
            else
                ++it;
        }
    }

    friend Element operator+(const Element& a, const Element& b) {
        require_same_algebra(a.alg_, b.alg_);
        Element r = a;
        for (auto& [w, c] : b.terms_) r.add_term(w, c);
        return r;
    }
    friend Element operator-(const Element& a, const Element& b) {
        require_same_algebra(a.alg_, b.alg_);
        Element r = a;
        for (auto& [w, c] : b.terms_) r.add_term(w, -c);
        return r;
    }
    Element operator-() const {
        Element r(alg_);
        for (auto& [w, c] : terms_) r.terms_[w] = -c;
        return r;
    }
    friend Element operator*(const S& s, const Element& a) {
        Element r(a.alg_);
        if (traits::is_zero(s)) return r;
        for (auto& [w, c] : a.terms_) {
            S p = s * c;
            if (!traits::is_zero(p)) r.terms_[w] = p;
        }
        return r;
    }
    Element& operator+=(const Element& b) { return *this = *this + b; }
    Element& operator-=(const Element& b) { return *this = *this - b; }

    friend bool operator==(const Element& a, const Element& b) {
        return a.alg_ == b.alg_ && a.terms_ == b.terms_;
    }

private:
    Algebra alg_;
    term_map terms_;
};

namespace detail {

template <class S>
void word_product_into(const Algebra& alg, const BasisWord& wa, const S& ca, const BasisWord& wb,
                       const S& cb, Element<S>& out) {
    using T = scalar_traits<S>;
    switch (alg.family) {
        case Family::Group: {
            const auto& a = std::get<GroupWord>(wa);
            const auto& b = std::get<GroupWord>(wb);
            if (a.unit) {
                out.add_term(wb, ca * cb);
            } else if (b.unit) {
                out.add_term(wa, ca * cb);
            } else if (a.g == b.g) {
                out.add_term(wa, ca * cb);  // indicators are idempotent / orthogonal
            }
            return;
        }
        case Family::Car: {
            auto ops = car_word_ops(std::get<CarWord>(wa));
            auto ops2 = car_word_ops(std::get<CarWord>(wb));
            ops.insert(ops.end(), ops2.begin(), ops2.end());
            std::vector<std::pair<CarWord, int>> terms;
            car_normal_order(std::move(ops), 1, terms);
            S coeff = ca * cb;
            for (auto& [w, sg] : terms)
                out.add_term(std::move(w), sg > 0 ? coeff : -coeff);
            return;
        }
        case Family::Torus: {
            const auto& a = std::get<TorusWord>(wa);
            const auto& b = std::get<TorusWord>(wb);
            // V^n U^p = lambda^{-n p} U^p V^n
            S phase = T::phase_pow(alg.lambda, -(long long)(a.n) * (long long)(b.m));
            out.add_term(TorusWord{a.m + b.m, a.n + b.n}, ca * cb * phase);
            return;
        }
        case Family::Rotation: {
            const auto& a = std::get<RotationWord>(wa);
            const auto& b = std::get<RotationWord>(wb);
            // V^n U^m' = Z^{-n m'} U^m' V^n, Z central
            out.add_term(RotationWord{a.m + b.m, a.n + b.n, a.p + b.p - a.n * b.m}, ca * cb);
            return;
        }
    }
}

}  // namespace detail

/// Normal-form product; bilinear, associative.
template <class S>
Element<S> mul(const Element<S>& x, const Element<S>& y) {
    require_same_algebra(x.algebra(), y.algebra());
    Element<S> out(x.algebra());
    for (auto& [wa, ca] : x.terms())
        for (auto& [wb, cb] : y.terms())
            detail::word_product_into(x.algebra(), wa, ca, wb, cb, out);
    out.prune();
    return out;
}

/// The involution x -> x*.
template <class S>
Element<S> star(const Element<S>& x) {
    using T = scalar_traits<S>;
    const Algebra& alg = x.algebra();
    Element<S> out(alg);
    for (auto& [w, c] : x.terms()) {
        S cc = T::conj(c);
        switch (alg.family) {
            case Family::Group:
                out.add_term(w, cc);
                break;
            case Family::Car: {
                const auto& cw = std::get<CarWord>(w);
                // (b*_J b_I)* = b*_I b_J with both lists re-sorted ascending:
                // reversing a length-k list costs (-1)^{k(k-1)/2}
                CarWord sw{cw.an, cw.cr};
                auto rev_sign = [](std::size_t k) { return ((k * (k - 1) / 2) % 2) ? -1 : 1; };
                int sg = rev_sign(cw.cr.size()) * rev_sign(cw.an.size());
                out.add_term(std::move(sw), sg > 0 ? cc : -cc);
                break;
            }
            case Family::Torus: {
                const auto& tw = std::get<TorusWord>(w);
                // (U^m V^n)* = V^{-n} U^{-m} = lambda^{-mn} U^{-m} V^{-n}
                S phase = T::phase_pow(alg.lambda, -(long long)tw.m * (long long)tw.n);
                out.add_term(TorusWord{-tw.m, -tw.n}, cc * phase);
                break;
            }
            case Family::Rotation: {
                const auto& rw = std::get<RotationWord>(w);
                out.add_term(RotationWord{-rw.m, -rw.n, -rw.p - rw.m * rw.n}, cc);
                break;
            }
        }
    }
    return out;
}

/// Certified upper bound for the C*-norm. Exact for group functions (sup-norm
/// by pointwise evaluation) and for single monomials / single CAR words; the
/// generic case is the l1 bound, valid because every basis word has norm <= 1
/// in all four families.
template <class S>
NormBound norm_bound(const Element<S>& x) {
    using T = scalar_traits<S>;
    if (x.algebra().family == Family::Group) {
        Complex unit_c = T::to_complex(x.coeff(unit_word(x.algebra())));
        double sup = std::abs(unit_c);  // value at infinity
        for (auto& [w, c] : x.terms()) {
            const auto& gw = std::get<GroupWord>(w);
            if (gw.unit) continue;
            sup = std::max(sup, std::abs(unit_c + T::to_complex(c)));
        }
        return {sup, true};
    }
    double l1 = 0.0;
    for (auto& [w, c] : x.terms()) l1 += T::abs(c);
    return {l1, x.size() <= 1};
}

/// Certified lower bound for the C*-norm, used by growth probes. Group: exact
/// sup-norm. Torus / rotation: the L2 norm of the faithful normalised trace,
/// sqrt(sum |c|^2), since the monomials are trace-orthonormal. CAR elements go
/// through the Jordan-Wigner representation (see jordan_wigner.hpp).
template <class S>
double norm_lower_trace(const Element<S>& x) {
    using T = scalar_traits<S>;
    switch (x.algebra().family) {
        case Family::Group:
            return norm_bound(x).value;
        case Family::Torus:
        case Family::Rotation: {
            double s = 0.0;
            for (auto& [w, c] : x.terms()) {
                double a = T::abs(c);
                s += a * a;
            }
            return std::sqrt(s);
        }
        default:
            throw std::logic_error("norm_lower_trace: CAR handled via jordan_wigner");
    }
}

/// Coefficient of the unit word; for torus/rotation this is the canonical
/// faithful trace.
template <class S>
S trace_coefficient(const Element<S>& x) {
    return x.coeff(unit_word(x.algebra()));
}

template <class S>
Element<Complex> to_complex_element(const Element<S>& x) {
    Element<Complex> out(x.algebra());
    for (auto& [w, c] : x.terms()) out.add_term(w, scalar_traits<S>::to_complex(c));
    return out;
}

/// Convenience constructors for the concrete families.
template <class S>
Element<S> group_indicator(const Algebra& alg, const GroupElem& g) {
    return Element<S>(alg, GroupWord{false, g}, scalar_traits<S>::one());
}

template <class S>
Element<S> car_annihilator(const Algebra& alg, int site) {
    return Element<S>(alg, CarWord{{}, {site}}, scalar_traits<S>::one());
}

template <class S>
Element<S> car_creator(const Algebra& alg, int site) {
    return Element<S>(alg, CarWord{{site}, {}}, scalar_traits<S>::one());
}

template <class S>
Element<S> torus_monomial(const Algebra& alg, std::int64_t m, std::int64_t n) {
    return Element<S>(alg, TorusWord{m, n}, scalar_traits<S>::one());
}

template <class S>
Element<S> rotation_monomial(const Algebra& alg, std::int64_t m, std::int64_t n, std::int64_t p) {
    return Element<S>(alg, RotationWord{m, n, p}, scalar_traits<S>::one());
}

/// Sites touched by a CAR element.
template <class S>
std::vector<int> car_support(const Element<S>& x) {
    std::vector<int> sites;
    for (auto& [w, c] : x.terms()) {
        const auto& cw = std::get<CarWord>(w);
        sites.insert(sites.end(), cw.cr.begin(), cw.cr.end());
        sites.insert(sites.end(), cw.an.begin(), cw.an.end());
    }
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    return sites;
}

}  // namespace qflow
