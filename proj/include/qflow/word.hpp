#pragma once

#include <compare>
#include <cstdint>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "qflow/group.hpp"

namespace qflow {

/// Basis word of C_0(G) + C1: the adjoined unit, or the indicator e_g.
struct GroupWord {
    bool unit = false;
    GroupElem g;  // empty when unit

    friend bool operator==(const GroupWord&, const GroupWord&) = default;
    friend auto operator<=>(const GroupWord& a, const GroupWord& b) {
        if (auto c = a.unit <=> b.unit; c != 0) return c;
        return a.g <=> b.g;
    }
};

/// Normal-ordered CAR word b*_{j1}...b*_{jq} b_{i1}...b_{ip}; both site lists
/// strictly increasing (exclusion normal form).
struct CarWord {
    std::vector<int> cr;
    std::vector<int> an;

    friend bool operator==(const CarWord&, const CarWord&) = default;
    friend auto operator<=>(const CarWord& a, const CarWord& b) {
        if (auto c = a.cr <=> b.cr; c != 0) return c;
        return a.an <=> b.an;
    }
};

/// Torus monomial U^m V^n (normal form U-before-V, phase in the coefficient).
struct TorusWord {
    std::int64_t m = 0;
    std::int64_t n = 0;

    friend bool operator==(const TorusWord&, const TorusWord&) = default;
    friend auto operator<=>(const TorusWord&, const TorusWord&) = default;
};

/// Rotation-algebra monomial U^m V^n Z^p, Z central.
struct RotationWord {
    std::int64_t m = 0;
    std::int64_t n = 0;
    std::int64_t p = 0;

    friend bool operator==(const RotationWord&, const RotationWord&) = default;
    friend auto operator<=>(const RotationWord&, const RotationWord&) = default;
};

using BasisWord = std::variant<GroupWord, CarWord, TorusWord, RotationWord>;

inline bool word_less(const BasisWord& a, const BasisWord& b) {
    if (a.index() != b.index()) return a.index() < b.index();
    return std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            return x < std::get<T>(b);
        },
        a);
}

struct WordLess {
    bool operator()(const BasisWord& a, const BasisWord& b) const { return word_less(a, b); }
};

inline std::string word_str(const BasisWord& w) {
    std::ostringstream os;
    if (auto* gw = std::get_if<GroupWord>(&w)) {
        if (gw->unit) {
            os << "1";
        } else {
            os << "e_(";
            for (size_t k = 0; k < gw->g.size(); ++k) os << (k ? "," : "") << gw->g[k];
            os << ")";
        }
    } else if (auto* cw = std::get_if<CarWord>(&w)) {
        if (cw->cr.empty() && cw->an.empty()) {
            os << "1";
        } else {
            for (int j : cw->cr) os << "b*_" << j << " ";
            for (int i : cw->an) os << "b_" << i << " ";
        }
    } else if (auto* tw = std::get_if<TorusWord>(&w)) {
        os << "U^" << tw->m << " V^" << tw->n;
    } else if (auto* rw = std::get_if<RotationWord>(&w)) {
        os << "U^" << rw->m << " V^" << rw->n << " Z^" << rw->p;
    }
    return os.str();
}

}  // namespace qflow
