#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qflow {

/// Group elements are coordinate vectors; rank 1 covers Z, rank d covers Z^d.
using GroupElem = std::vector<std::int64_t>;

/// Discrete-group operations for the walk family. The shipped adapter handles
/// the free abelian lattices Z^d; anything with a decidable word problem can be
/// slotted in by subclassing.
class GroupAdapter {
public:
    explicit GroupAdapter(int rank = 1) : rank_(rank) {
        if (rank < 1) throw std::invalid_argument("group rank must be >= 1");
    }
    virtual ~GroupAdapter() = default;

    int rank() const { return rank_; }

    virtual GroupElem identity() const { return GroupElem(rank_, 0); }

    virtual GroupElem multiply(const GroupElem& a, const GroupElem& b) const {
        check(a);
        check(b);
        GroupElem r(rank_);
        for (int k = 0; k < rank_; ++k) r[k] = a[k] + b[k];
        return r;
    }

    virtual GroupElem inverse(const GroupElem& a) const {
        check(a);
        GroupElem r(rank_);
        for (int k = 0; k < rank_; ++k) r[k] = -a[k];
        return r;
    }

    virtual bool equal(const GroupElem& a, const GroupElem& b) const { return a == b; }
    virtual bool less(const GroupElem& a, const GroupElem& b) const { return a < b; }

    virtual std::string str(const GroupElem& a) const {
        std::ostringstream os;
        for (int k = 0; k < rank_; ++k) {
            if (k) os << ',';
            os << a[k];
        }
        return os.str();
    }

    virtual GroupElem parse(const std::string& s) const {
        GroupElem r;
        std::istringstream is(s);
        std::string tok;
        while (std::getline(is, tok, ',')) r.push_back(std::stoll(tok));
        check(r);
        return r;
    }

private:
    void check(const GroupElem& a) const {
        if ((int)a.size() != rank_) throw std::invalid_argument("group element rank mismatch");
    }
    int rank_;
};

inline GroupElem group_z(std::int64_t g) { return GroupElem{g}; }

}  // namespace qflow
