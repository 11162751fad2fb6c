#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace qflow {

/// Dense matrix exponential by Pade-13 scaling and squaring (Higham's
/// coefficients), accurate to ~1e-14 relative for the desk-scale operators the
/// oracles build. Complex square matrices only.
inline Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a) {
    using M = Eigen::MatrixXcd;
    static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                               1187353796428800.0,  129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,       1323241920.0,
                               40840800.0,          960960.0,            16380.0,
                               182.0,               1.0};
    const double theta13 = 5.371920351148152;
    const Eigen::Index n = a.rows();

    double norm1 = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) norm1 = std::max(norm1, a.col(j).cwiseAbs().sum());
    int squarings = 0;
    M as = a;
    if (norm1 > theta13) {
        squarings = (int)std::ceil(std::log2(norm1 / theta13));
        as = a / std::pow(2.0, squarings);
    }

    M a2 = as * as;
    M a4 = a2 * a2;
    M a6 = a2 * a4;
    M id = M::Identity(n, n);
    M u = as * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 +
                b[1] * id);
    M v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 +
          b[0] * id;
    M r = (v - u).partialPivLu().solve(v + u);
    for (int s = 0; s < squarings; ++s) r = r * r;
    return r;
}

/// Kronecker product, column-major convention: vec(A X B) = (B^T (x) A) vec(X).
inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

}  // namespace qflow
