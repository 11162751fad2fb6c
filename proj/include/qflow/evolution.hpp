#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "qflow/growth.hpp"
#include "qflow/report.hpp"
#include "qflow/step_function.hpp"

namespace qflow {

/// Certified growth constants ||phi_n(x)|| <= C M^n, valid for all n.
struct GrowthCert {
    double C = 1.0;
    double M = 0.0;
};

/// Obtain all-n growth constants for x, refusing when the profile cannot
/// certify membership of the geometric subalgebra.
inline GrowthCert require_geometric_cert(const GrowthProfile& prof) {
    if (prof.classification != GrowthClass::Geometric || !prof.cert_all_n)
        throw std::domain_error("not certified in A_phi");
    return {prof.C, prof.M};
}

template <class S>
GrowthCert require_geometric_cert(const FlowGenerator<S>& phi, const Element<S>& x,
                                  const GrowthOptions& opts = {}) {
    return require_geometric_cert(growth_profile(phi, x, opts));
}

/// Truncated-series result with its certified tail budget. value_cert bounds
/// the growth of the returned element; amplification is the accumulated
/// Lipschitz factor of the evaluation (used to propagate upstream errors).
struct SeriesResult {
    Element<Complex> value;
    int terms_used = 0;
    double error_bound = 0.0;
    GrowthCert value_cert;
    double amplification = 1.0;
};

namespace detail {

/// Certified tail of the exponential series: C * sum_{n > N} r^n / n!.
inline double exp_series_tail(double C, double r, int N) {
    if (r <= 0.0) return 0.0;
    if ((double)(N + 2) <= r) return std::numeric_limits<double>::infinity();
    double head = std::pow(r, N + 1);
    for (int k = 2; k <= N + 1; ++k) head /= (double)k;
    return C * head * ((double)(N + 2) / ((double)(N + 2) - r));
}

}  // namespace detail

/// exp(t phi^xi_chi)(x) as a truncated series with a certified tail bound:
/// the depth is chosen so that C sum_{n>N} (t ||xi|| ||chi|| M)^n / n! <= tol.
inline SeriesResult slice_exp(const FlowGenerator<Complex>& phi, const KVec<Complex>& xi,
                              const KVec<Complex>& chi, double t, const Element<Complex>& x,
                              double tol, const GrowthCert& cert, int max_terms = 500) {
    if (t < 0.0) throw std::invalid_argument("slice_exp: negative time");
    SeriesResult res;
    res.value = x;
    res.terms_used = 1;
    if (t == 0.0) {
        res.value_cert = cert;
        return res;
    }
    double r = t * kvec_norm(xi) * kvec_norm(chi) * cert.M;
    Element<Complex> term = x;
    int N = 0;
    while (detail::exp_series_tail(cert.C, r, N) > tol) {
        if (N >= max_terms)
            throw std::runtime_error("slice_exp: series did not reach tolerance");
        ++N;
        term = Complex(t / (double)N, 0.0) * phi.compress(xi, chi, term);
        term.prune();
        res.value += term;
        ++res.terms_used;
    }
    res.value.prune();
    res.error_bound = detail::exp_series_tail(cert.C, r, N);
    res.amplification = std::exp(r);
    res.value_cert = {cert.C * std::exp(r) + res.error_bound, cert.M};
    return res;
}

/// Vacuum expectation semigroup T_t = exp(t tau) on A_0 (compression at the
/// vacuum in both slots). T_t(1) = 1 holds term by term since tau(1) = 0.
inline SeriesResult vacuum_semigroup(const FlowGenerator<Complex>& phi, double t,
                                     const Element<Complex>& x, double tol,
                                     const GrowthCert& cert) {
    std::size_t d = phi.basis().dim();
    return slice_exp(phi, kvec_omega<Complex>(d), kvec_omega<Complex>(d), t, x, tol, cert);
}

inline SeriesResult vacuum_semigroup(const FlowGenerator<Complex>& phi, double t,
                                     const Element<Complex>& x, double tol) {
    return vacuum_semigroup(phi, t, x, tol, require_geometric_cert(phi, x));
}

/// Matrix element j-hat_t[f,g](x) for piecewise-constant test functions: the
/// right-to-left interval composition of e^{l <xi,eta>} exp(l phi^{xi-hat}_
/// {eta-hat}), latest interval applied first. Horizons of f and g must agree;
/// t beyond the horizon continues with the zero value.
inline SeriesResult cocycle_matrix_element(const FlowGenerator<Complex>& phi,
                                           const StepFunction& f, const StepFunction& g, double t,
                                           const Element<Complex>& x, double tol,
                                           const GrowthCert& cert) {
    if (f.horizon != g.horizon)
        throw std::invalid_argument("cocycle: mismatched step-function horizons");
    std::size_t d = phi.basis().dim();
    if ((f.dim() != 0 && f.dim() != d) || (g.dim() != 0 && g.dim() != d))
        throw std::invalid_argument("cocycle: step-function dimension mismatch");
    auto ivs = common_refinement(f, g, t);
    const std::size_t m = ivs.size();

    // per-interval data
    std::vector<KVec<Complex>> xis(m), etas(m);
    std::vector<Complex> prefactor(m);
    std::vector<double> lip(m), radius(m);
    for (std::size_t k = 0; k < m; ++k) {
        std::vector<Complex> fv = ivs[k].f_value, gv = ivs[k].g_value;
        fv.resize(d, 0.0);
        gv.resize(d, 0.0);
        xis[k] = kvec_hat<Complex>(fv);
        etas[k] = kvec_hat<Complex>(gv);
        Complex inner = 0.0;
        for (std::size_t i = 0; i < d; ++i) inner += std::conj(fv[i]) * gv[i];
        prefactor[k] = std::exp(ivs[k].length * inner);
        radius[k] = ivs[k].length * kvec_norm(xis[k]) * kvec_norm(etas[k]) * cert.M;
        lip[k] = std::abs(prefactor[k]) * std::exp(radius[k]);
    }

    // stage tolerances: stage k's own tail gets amplified by every stage
    // applied after it (k-1, .., 0 in interval order)
    std::vector<double> amp_after(m, 1.0);
    for (std::size_t k = m; k-- > 0;) {
        amp_after[k] = 1.0;
        for (std::size_t j = 0; j < k; ++j) amp_after[k] *= lip[j];
    }

    SeriesResult out;
    out.value = x;
    out.value_cert = cert;
    double err = 0.0;  // growth-C bound on the accumulated difference
    double total_amp = 1.0;
    GrowthCert cur = cert;
    for (std::size_t k = m; k-- > 0;) {
        double stage_tol = m == 0 ? tol : tol / (2.0 * (double)m * std::max(1.0, amp_after[k]));
        SeriesResult stage =
            slice_exp(phi, xis[k], etas[k], ivs[k].length, out.value, stage_tol, cur);
        out.value = prefactor[k] * stage.value;
        out.value.prune();
        out.terms_used += stage.terms_used;
        err = std::abs(prefactor[k]) * stage.error_bound + lip[k] * err;
        cur = {lip[k] * (cur.C + stage.error_bound), cur.M};
        total_amp *= lip[k];
    }
    out.error_bound = err;
    out.value_cert = cur;
    out.amplification = total_amp;
    return out;
}

inline SeriesResult cocycle_matrix_element(const FlowGenerator<Complex>& phi,
                                           const StepFunction& f, const StepFunction& g, double t,
                                           const Element<Complex>& x, double tol) {
    return cocycle_matrix_element(phi, f, g, t, x, tol, require_geometric_cert(phi, x));
}

/// T_{s+t}(x) versus T_s(T_t(x)); passes when the residual norm bound stays
/// within the combined certified budgets plus tol.
inline VerificationReport semigroup_check(const FlowGenerator<Complex>& phi, double s, double t,
                                          const Element<Complex>& x, double tol,
                                          const GrowthCert& cert) {
    VerificationReport rep;
    rep.subject = "semigroup law [" + phi.family_note() + "]";
    double series_tol = tol > 0.0 ? tol / 8.0 : 1e-12;
    SeriesResult whole = vacuum_semigroup(phi, s + t, x, series_tol, cert);
    SeriesResult inner = vacuum_semigroup(phi, t, x, series_tol, cert);
    SeriesResult outer = vacuum_semigroup(phi, s, inner.value, series_tol, inner.value_cert);
    double residual = norm_bound(whole.value - outer.value).value;
    double budget = whole.error_bound + outer.error_bound +
                    inner.error_bound * outer.amplification + tol;
    std::ostringstream detail;
    detail << "s=" << s << ", t=" << t;
    rep.add("semigroup_law", detail.str(), residual, budget);
    return rep;
}

/// Matrix-element commutator probe for s < t: evolves b over [s, t] with the
/// shifted test functions, then pushes the commutator with a through [0, s].
/// Vanishes (within budget) on commutative families; the returned value is
/// reported either way.
inline SeriesResult commutator_matrix_element(const FlowGenerator<Complex>& phi,
                                              const StepFunction& f, const StepFunction& g,
                                              double s, double t, const Element<Complex>& a,
                                              const Element<Complex>& b, double tol,
                                              const GrowthCert& cert_a,
                                              const GrowthCert& cert_b) {
    if (!(s < t)) throw std::invalid_argument("commutator probe requires s < t");
    double stage_tol = tol / 4.0;
    SeriesResult c = cocycle_matrix_element(phi, f.shift(s), g.shift(s), t - s, b, stage_tol,
                                            cert_b);
    Element<Complex> v = mul(a, c.value) - mul(c.value, a);
    v.prune();
    auto [Cv, Mv] = product_closure_bound(cert_a.C, cert_a.M,
                                          std::max(c.value_cert.C, 1e-300), c.value_cert.M);
    GrowthCert cert_v{2.0 * Cv, Mv};
    double err_v = 2.0 * cert_a.C * c.error_bound;  // growth-C bound on the v difference

    SeriesResult out = cocycle_matrix_element(phi, f, g, s, v, stage_tol, cert_v);
    out.error_bound += err_v * out.amplification;
    return out;
}

}  // namespace qflow
