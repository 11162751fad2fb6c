#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <stdexcept>

#include "qflow/rational.hpp"

namespace qflow {

/// Unit-modulus phase given as a rational angle: exp(2*pi*i * num/den).
/// Normalised so 0 <= num < den, gcd(num, den) = 1.
struct PhaseAngle {
    std::int64_t num = 0;
    std::int64_t den = 1;

    PhaseAngle() = default;
    PhaseAngle(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw std::domain_error("phase angle with zero denominator");
        if (den < 0) { num = -num; den = -den; }
        num %= den;
        if (num < 0) num += den;
        std::int64_t g = std::gcd(num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    bool is_one() const { return num == 0; }

    /// Integer power, exact on the angle.
    PhaseAngle pow(long long e) const {
        __int128 n = (__int128)num * e;
        __int128 d = den;
        n %= d;
        if (n < 0) n += d;
        return PhaseAngle((std::int64_t)n, den);
    }

    /// True when the phase lies in {1, i, -1, -i}, i.e. representable in Q(i).
    bool is_quarter_turn() const { return 4 % den == 0; }

    /// Exponent k with phase = i^k; valid only for quarter turns.
    int quarter_exponent() const {
        if (!is_quarter_turn())
            throw std::domain_error("phase is not a quarter turn; exact mode unavailable");
        return (int)(num * (4 / den)) % 4;
    }

    std::complex<double> to_complex() const {
        double theta = 2.0 * M_PI * (double)num / (double)den;
        return {std::cos(theta), std::sin(theta)};
    }

    friend bool operator==(const PhaseAngle& a, const PhaseAngle& b) {
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator!=(const PhaseAngle& a, const PhaseAngle& b) { return !(a == b); }
};

/// Coefficient-field abstraction: the whole algebraic stack is templated on a
/// scalar S which is either GaussianRational (exact mode) or
/// std::complex<double> (float mode).
template <class S>
struct scalar_traits;

template <>
struct scalar_traits<GaussianRational> {
    using value_type = GaussianRational;
    static constexpr bool exact = true;

    static GaussianRational zero() { return GaussianRational(0); }
    static GaussianRational one() { return GaussianRational(1); }
    static GaussianRational from_int(std::int64_t n) { return GaussianRational(n); }
    static GaussianRational from_ratio(std::int64_t n, std::int64_t d) {
        return GaussianRational(Rational(n, d));
    }
    static GaussianRational i() { return GaussianRational(Rational(0), Rational(1)); }
    static GaussianRational conj(const GaussianRational& a) { return a.conjugate(); }
    static bool is_zero(const GaussianRational& a) { return a.is_zero(); }
    static double abs(const GaussianRational& a) { return std::abs(to_complex(a)); }
    static std::complex<double> to_complex(const GaussianRational& a) {
        return {a.re.to_double(), a.im.to_double()};
    }
    static GaussianRational phase_pow(const PhaseAngle& p, long long e) {
        return one().times_i_pow((long long)p.pow(e).quarter_exponent());
    }
};

template <>
struct scalar_traits<std::complex<double>> {
    using value_type = std::complex<double>;
    static constexpr bool exact = false;

    static std::complex<double> zero() { return {0.0, 0.0}; }
    static std::complex<double> one() { return {1.0, 0.0}; }
    static std::complex<double> from_int(std::int64_t n) { return {(double)n, 0.0}; }
    static std::complex<double> from_ratio(std::int64_t n, std::int64_t d) {
        return {(double)n / (double)d, 0.0};
    }
    static std::complex<double> i() { return {0.0, 1.0}; }
    static std::complex<double> conj(const std::complex<double>& a) { return std::conj(a); }
    static bool is_zero(const std::complex<double>& a) { return a == std::complex<double>(0.0, 0.0); }
    static double abs(const std::complex<double>& a) { return std::abs(a); }
    static std::complex<double> to_complex(const std::complex<double>& a) { return a; }
    static std::complex<double> phase_pow(const PhaseAngle& p, long long e) {
        PhaseAngle q = p.pow(e);
        if (q.is_quarter_turn()) {
            // keep quarter turns bit-exact in float mode too
            switch (q.quarter_exponent()) {
                case 0: return {1.0, 0.0};
                case 1: return {0.0, 1.0};
                case 2: return {-1.0, 0.0};
                default: return {0.0, -1.0};
            }
        }
        return q.to_complex();
    }
};

using Complex = std::complex<double>;

}  // namespace qflow
