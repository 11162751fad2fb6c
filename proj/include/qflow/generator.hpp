#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qflow/algebra.hpp"
#include "qflow/report.hpp"

namespace qflow {

/// Ordered labels of an orthonormal basis of the multiplicity space K; index 0
/// of the extended space is reserved for the vacuum direction omega, so
/// extended coordinates run over {0, ..., d} and xi-hat = omega + xi.
struct MultiplicityBasis {
    std::vector<std::string> labels;

    std::size_t dim() const { return labels.size(); }            // d
    std::size_t ext_dim() const { return labels.size() + 1; }    // 1 + d
};

/// Vector in the extended multiplicity space, coordinates (omega, f_1, .., f_d).
template <class S>
using KVec = std::vector<S>;

template <class S>
KVec<S> kvec_omega(std::size_t d) {
    KVec<S> v(d + 1, scalar_traits<S>::zero());
    v[0] = scalar_traits<S>::one();
    return v;
}

template <class S>
KVec<S> kvec_basis(std::size_t d, std::size_t i) {  // f_i, 1-based
    KVec<S> v(d + 1, scalar_traits<S>::zero());
    v.at(i) = scalar_traits<S>::one();
    return v;
}

/// xi-hat = omega + xi for K-coordinates xi (length d).
template <class S>
KVec<S> kvec_hat(const std::vector<S>& xi) {
    KVec<S> v(xi.size() + 1, scalar_traits<S>::zero());
    v[0] = scalar_traits<S>::one();
    for (std::size_t i = 0; i < xi.size(); ++i) v[i + 1] = xi[i];
    return v;
}

template <class S>
double kvec_norm(const KVec<S>& v) {
    double s = 0.0;
    for (const auto& c : v) {
        double a = scalar_traits<S>::abs(c);
        s += a * a;
    }
    return std::sqrt(s);
}

/// (1+d) x (1+d) block matrix of algebra elements; row/column 0 is the omega
/// component, so block(0,0) = tau, block(i,0) = delta, block(0,j) = delta-dag
/// and block(i,j) = pi - id on the K corner.
template <class S>
class GeneratorMatrix {
public:
    GeneratorMatrix() = default;
    GeneratorMatrix(const Algebra& alg, std::size_t ext_dim)
        : ext_dim_(ext_dim), blocks_(ext_dim * ext_dim, Element<S>(alg)) {}

    std::size_t ext_dim() const { return ext_dim_; }

    Element<S>& block(std::size_t r, std::size_t c) { return blocks_.at(r * ext_dim_ + c); }
    const Element<S>& block(std::size_t r, std::size_t c) const {
        return blocks_.at(r * ext_dim_ + c);
    }

    bool is_zero() const {
        for (const auto& b : blocks_)
            if (!b.is_zero()) return false;
        return true;
    }

    friend GeneratorMatrix operator+(const GeneratorMatrix& a, const GeneratorMatrix& b) {
        GeneratorMatrix r = a;
        for (std::size_t k = 0; k < r.blocks_.size(); ++k) r.blocks_[k] += b.blocks_[k];
        return r;
    }
    friend GeneratorMatrix operator*(const S& s, const GeneratorMatrix& a) {
        GeneratorMatrix r = a;
        for (auto& blk : r.blocks_) blk = s * blk;
        return r;
    }

private:
    std::size_t ext_dim_ = 0;
    std::vector<Element<S>> blocks_;
};

/// A flow generator phi : A_0 -> A_0 (x) B(K-hat), stored by its action on
/// basis words and extended linearly. Immutable after construction; word
/// evaluations are memoised behind a lock so concurrent readers are safe.
template <class S>
class FlowGenerator {
public:
    using Rule = std::function<GeneratorMatrix<S>(const BasisWord&)>;

    FlowGenerator() = default;
    FlowGenerator(Algebra alg, MultiplicityBasis basis, Rule rule,
                  std::vector<BasisWord> generators, std::string family_note = {})
        : alg_(std::move(alg)),
          basis_(std::move(basis)),
          rule_(std::move(rule)),
          generators_(std::move(generators)),
          family_note_(std::move(family_note)),
          cache_(std::make_shared<Cache>()) {}

    const Algebra& algebra() const { return alg_; }
    const MultiplicityBasis& basis() const { return basis_; }
    std::size_t ext_dim() const { return basis_.ext_dim(); }
    const std::vector<BasisWord>& generators() const { return generators_; }
    const std::string& family_note() const { return family_note_; }

    /// Certified global bound on branch row sums sup_w sum_{w'} ||m_{w,w'}||,
    /// when the builder can supply one (e.g. bounded walk transitions). Makes
    /// growth certificates valid for all n even on non-closing word sets.
    std::optional<double> declared_row_sup() const { return declared_row_sup_; }
    void set_declared_row_sup(double v) { declared_row_sup_ = v; }

    /// phi on a single basis word (memoised).
    const GeneratorMatrix<S>& on_word(const BasisWord& w) const {
        std::lock_guard<std::mutex> lock(cache_->mutex);
        auto it = cache_->memo.find(w);
        if (it == cache_->memo.end())
            it = cache_->memo.emplace(w, rule_(w)).first;
        return it->second;
    }

    /// phi extended linearly to an arbitrary element.
    GeneratorMatrix<S> apply(const Element<S>& x) const {
        GeneratorMatrix<S> out(alg_, ext_dim());
        for (auto& [w, c] : x.terms()) {
            const GeneratorMatrix<S>& g = on_word(w);
            for (std::size_t r = 0; r < ext_dim(); ++r)
                for (std::size_t cidx = 0; cidx < ext_dim(); ++cidx)
                    if (!g.block(r, cidx).is_zero())
                        out.block(r, cidx) += c * g.block(r, cidx);
        }
        return out;
    }

    /// The compression phi^xi_chi(x) = (1 (x) <xi|) phi(x) (1 (x) |chi>).
    Element<S> compress(const KVec<S>& xi, const KVec<S>& chi, const Element<S>& x) const {
        using T = scalar_traits<S>;
        if (xi.size() != ext_dim() || chi.size() != ext_dim())
            throw std::invalid_argument("compression vector dimension mismatch");
        Element<S> out(alg_);
        GeneratorMatrix<S> g = apply(x);
        for (std::size_t r = 0; r < ext_dim(); ++r) {
            if (T::is_zero(xi[r])) continue;
            for (std::size_t c = 0; c < ext_dim(); ++c) {
                if (T::is_zero(chi[c]) || g.block(r, c).is_zero()) continue;
                out += (T::conj(xi[r]) * chi[c]) * g.block(r, c);
            }
        }
        out.prune();
        return out;
    }

    Element<S> tau(const Element<S>& x) const {
        GeneratorMatrix<S> g = apply(x);
        return g.block(0, 0);
    }

    /// pi(x)(i,j) = block(i,j)(x) + 1{i=j} x on the K corner (1-based i, j).
    Element<S> pi_block(const Element<S>& x, std::size_t i, std::size_t j) const {
        GeneratorMatrix<S> g = apply(x);
        Element<S> out = g.block(i, j);
        if (i == j) out += x;
        return out;
    }

private:
    struct Cache {
        std::mutex mutex;
        std::map<BasisWord, GeneratorMatrix<S>, WordLess> memo;
    };

    Algebra alg_;
    MultiplicityBasis basis_;
    Rule rule_;
    std::vector<BasisWord> generators_;
    std::string family_note_;
    std::optional<double> declared_row_sup_;
    std::shared_ptr<Cache> cache_;
};

/// Assemble a generator from structure maps without validating the structure
/// relations (validation is an explicit step). The pi rule gives the full K
/// corner pi(x), the delta rule the K column, the tau rule the scalar corner.
template <class S>
FlowGenerator<S> from_components(
    const Algebra& alg, const MultiplicityBasis& basis,
    std::function<Element<S>(const BasisWord&)> tau_rule,
    std::function<std::vector<Element<S>>(const BasisWord&)> delta_rule,
    std::function<std::vector<std::vector<Element<S>>>(const BasisWord&)> pi_rule,
    std::vector<BasisWord> generators, std::string note = "from_components") {
    std::size_t d = basis.dim();
    auto rule = [alg, d, tau_rule, delta_rule, pi_rule](const BasisWord& w) {
        GeneratorMatrix<S> g(alg, d + 1);
        g.block(0, 0) = tau_rule(w);
        Element<S> ws(alg, w, scalar_traits<S>::one());
        auto del = delta_rule(w);
        if (del.size() != d) throw std::invalid_argument("delta rule dimension mismatch");
        for (std::size_t i = 0; i < d; ++i) g.block(i + 1, 0) = del[i];
        // delta-dagger row via the adjoint relation block(0,j)(w) = star(delta_j(w*))
        Element<S> wstar = star(ws);
        for (std::size_t j = 0; j < d; ++j) {
            Element<S> acc(alg);
            for (auto& [w2, c2] : wstar.terms()) acc += c2 * delta_rule(w2)[j];
            g.block(0, j + 1) = star(acc);
        }
        auto pi = pi_rule(w);
        if (pi.size() != d) throw std::invalid_argument("pi rule dimension mismatch");
        for (std::size_t i = 0; i < d; ++i) {
            if (pi[i].size() != d) throw std::invalid_argument("pi rule dimension mismatch");
            for (std::size_t j = 0; j < d; ++j) {
                g.block(i + 1, j + 1) = pi[i][j];
                if (i == j) g.block(i + 1, j + 1) -= ws;
            }
        }
        return g;
    };
    return FlowGenerator<S>(alg, basis, rule, std::move(generators), std::move(note));
}

/// Bakry-Emery carre du champ: Gamma(x,y) = (tau(xy) - tau(x)y - x tau(y)) / 2.
template <class S>
Element<S> carre_du_champ(const FlowGenerator<S>& phi, const Element<S>& x, const Element<S>& y) {
    Element<S> g = phi.tau(mul(x, y)) - mul(phi.tau(x), y) - mul(x, phi.tau(y));
    return scalar_traits<S>::from_ratio(1, 2) * g;
}

namespace detail {

template <class S>
Element<S> delta_pair_contraction(const FlowGenerator<S>& phi, const Element<S>& x,
                                  const Element<S>& y) {
    // delta-dagger(x) delta(y) = sum_{k >= 1} block(0,k)(x) block(k,0)(y)
    GeneratorMatrix<S> gx = phi.apply(x);
    GeneratorMatrix<S> gy = phi.apply(y);
    Element<S> acc(phi.algebra());
    for (std::size_t k = 1; k < phi.ext_dim(); ++k)
        acc += mul(gx.block(0, k), gy.block(k, 0));
    return acc;
}

}  // namespace detail

struct ValidateOptions {
    double tol = 0.0;  // exact mode default
    std::optional<std::vector<BasisWord>> sample;
};

/// Default word sample: unit, generators, and every word appearing in a
/// pairwise product of generators.
template <class S>
std::vector<BasisWord> default_validation_sample(const FlowGenerator<S>& phi) {
    std::set<BasisWord, WordLess> words;
    words.insert(unit_word(phi.algebra()));
    for (const auto& g : phi.generators()) words.insert(g);
    for (const auto& g1 : phi.generators())
        for (const auto& g2 : phi.generators()) {
            Element<S> p = mul(Element<S>(phi.algebra(), g1, scalar_traits<S>::one()),
                               Element<S>(phi.algebra(), g2, scalar_traits<S>::one()));
            for (auto& [w, c] : p.terms()) words.insert(w);
        }
    return {words.begin(), words.end()};
}

/// Check the structure relations that make phi a flow generator: the
/// first-order product identity, the tau dissipation identity, pi
/// multiplicativity, the delta derivation property, phi(1) = 0 and
/// *-linearity. Failures become report entries, never exceptions.
template <class S>
VerificationReport validate(const FlowGenerator<S>& phi, const ValidateOptions& opts = {}) {
    using T = scalar_traits<S>;
    VerificationReport rep;
    rep.subject = "flow generator [" + phi.family_note() + "]";
    const Algebra& alg = phi.algebra();
    const std::size_t D = phi.ext_dim();
    std::vector<BasisWord> sample = opts.sample ? *opts.sample : default_validation_sample(phi);

    auto as_elem = [&](const BasisWord& w) { return Element<S>(alg, w, T::one()); };
    auto block_residual = [](const GeneratorMatrix<S>& g) {
        double r = 0.0;
        for (std::size_t i = 0; i < g.ext_dim(); ++i)
            for (std::size_t j = 0; j < g.ext_dim(); ++j)
                r += norm_bound(g.block(i, j)).value;
        return r;
    };

    // unit annihilation
    rep.add("unit_annihilation", "phi(1)", block_residual(phi.apply(Element<S>::unit(alg))),
            opts.tol);

    // *-linearity per word: block(i,j)(w*) == star(block(j,i)(w))
    for (const auto& w : sample) {
        GeneratorMatrix<S> gs = phi.apply(star(as_elem(w)));
        GeneratorMatrix<S> g = phi.apply(as_elem(w));
        double r = 0.0;
        for (std::size_t i = 0; i < D; ++i)
            for (std::size_t j = 0; j < D; ++j)
                r += norm_bound(gs.block(i, j) - star(g.block(j, i))).value;
        rep.add("star_linearity", word_str(w), r, opts.tol);
    }

    for (const auto& wx : sample) {
        for (const auto& wy : sample) {
            Element<S> x = as_elem(wx), y = as_elem(wy);
            Element<S> xy = mul(x, y);
            GeneratorMatrix<S> gx = phi.apply(x), gy = phi.apply(y), gxy = phi.apply(xy);
            std::string detail = word_str(wx) + " , " + word_str(wy);

            // first-order product identity, blockwise with the Delta middle
            // contraction over K indices only
            double rgen = 0.0;
            for (std::size_t i = 0; i < D; ++i)
                for (std::size_t j = 0; j < D; ++j) {
                    Element<S> res = gxy.block(i, j) - mul(gx.block(i, j), y) -
                                     mul(x, gy.block(i, j));
                    for (std::size_t k = 1; k < D; ++k)
                        res -= mul(gx.block(i, k), gy.block(k, j));
                    res.prune();
                    rgen += norm_bound(res).value;
                }
            rep.add("first_order_product", detail, rgen, opts.tol);

            // tau dissipation identity
            Element<S> rtau = gxy.block(0, 0) - mul(gx.block(0, 0), y) - mul(x, gy.block(0, 0)) -
                              detail::delta_pair_contraction(phi, x, y);
            rtau.prune();
            rep.add("tau_dissipation", detail, norm_bound(rtau).value, opts.tol);

            // pi multiplicativity on the K corner
            double rpi = 0.0;
            for (std::size_t i = 1; i < D; ++i)
                for (std::size_t j = 1; j < D; ++j) {
                    Element<S> res = phi.pi_block(xy, i, j);
                    for (std::size_t k = 1; k < D; ++k)
                        res -= mul(phi.pi_block(x, i, k), phi.pi_block(y, k, j));
                    res.prune();
                    rpi += norm_bound(res).value;
                }
            rep.add("pi_homomorphism", detail, rpi, opts.tol);

            // delta is a pi-derivation
            double rdel = 0.0;
            for (std::size_t i = 1; i < D; ++i) {
                Element<S> res = gxy.block(i, 0) - mul(gx.block(i, 0), y);
                for (std::size_t k = 1; k < D; ++k)
                    res -= mul(phi.pi_block(x, i, k), gy.block(k, 0));
                res.prune();
                rdel += norm_bound(res).value;
            }
            rep.add("delta_derivation", detail, rdel, opts.tol);
        }
    }
    return rep;
}

}  // namespace qflow
