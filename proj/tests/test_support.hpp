#pragma once

#include <random>
#include <vector>

#include "qflow/algebra.hpp"

namespace qflow::testing {

/// Deterministic generators for property-style tests.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    int uniform(int lo, int hi) {  // inclusive
        return std::uniform_int_distribution<int>(lo, hi)(eng_);
    }
    double real(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(eng_);
    }

    template <class S>
    S coeff();

    BasisWord word(const Algebra& alg) {
        switch (alg.family) {
            case Family::Group:
                if (uniform(0, 5) == 0) return GroupWord{true, {}};
                {
                    GroupElem g(alg.group_rank);
                    for (auto& v : g) v = uniform(-3, 3);
                    return GroupWord{false, g};
                }
            case Family::Car: {
                CarWord w;
                for (int s = 1; s <= 4; ++s) {
                    if (uniform(0, 2) == 0) w.cr.push_back(s);
                    if (uniform(0, 2) == 0) w.an.push_back(s);
                }
                return w;
            }
            case Family::Torus:
                return TorusWord{uniform(-3, 3), uniform(-3, 3)};
            default:
                return RotationWord{uniform(-2, 2), uniform(-2, 2), uniform(-2, 2)};
        }
    }

    template <class S>
    Element<S> element(const Algebra& alg, int max_terms = 3) {
        Element<S> x(alg);
        int k = uniform(1, max_terms);
        for (int t = 0; t < k; ++t) x.add_term(word(alg), coeff<S>());
        return x;
    }

private:
    std::mt19937_64 eng_;
};

template <>
inline GaussianRational Rng::coeff<GaussianRational>() {
    return GaussianRational(Rational(uniform(-3, 3), uniform(1, 2)),
                            Rational(uniform(-3, 3), uniform(1, 2)));
}

template <>
inline Complex Rng::coeff<Complex>() {
    return {real(-2.0, 2.0), real(-2.0, 2.0)};
}

}  // namespace qflow::testing
