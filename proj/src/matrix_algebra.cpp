#include "nczw/matrix_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nczw {

Mat identity_matrix(int m) { return Mat::Identity(m, m); }
Mat zero_matrix(int m) { return Mat::Zero(m, m); }

bool is_hermitian(const Mat& a, double tol) {
    return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_projection(const Mat& e, double tol) {
    if (!is_hermitian(e, tol)) return false;
    return (e * e - e).cwiseAbs().maxCoeff() <= tol;
}

bool is_positive_semidefinite(const Mat& a, double tol) {
    if (!is_hermitian(a, 1e-9)) return false;
    Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -tol;
}

Cx trace_of(const Mat& a) { return a.trace(); }
double real_trace(const Mat& a) { return a.trace().real(); }

namespace {

Eigen::SelfAdjointEigenSolver<Mat> eig_or_throw(const Mat& a) {
    Eigen::SelfAdjointEigenSolver<Mat> es(a);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigensolver failed to converge");
    return es;
}

}  // namespace

Mat abs_op(const Mat& a) { return sqrt_psd(a.adjoint() * a); }

Mat sqrt_psd(const Mat& a) {
    auto es = eig_or_throw(a);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

Mat inverse_psd(const Mat& a, double floor) {
    auto es = eig_or_throw(a);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(floor);
    return es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().adjoint();
}

SpectralDecomposition spectral_decomposition(const Mat& a) {
    if (!is_hermitian(a, 1e-9))
        throw std::invalid_argument("spectral_decomposition requires a Hermitian matrix");
    auto es = eig_or_throw(a);
    SpectralDecomposition out;
    const int m = static_cast<int>(a.rows());
    int i = 0;
    while (i < m) {
        int j = i;
        while (j + 1 < m && es.eigenvalues()(j + 1) - es.eigenvalues()(i) <= kSpectralSnapTol) ++j;
        Mat block = es.eigenvectors().middleCols(i, j - i + 1);
        out.eigenvalues.push_back(es.eigenvalues().segment(i, j - i + 1).mean());
        out.projections.push_back(block * block.adjoint());
        i = j + 1;
    }
    return out;
}

bool Interval::contains(double x, double snap_tol) const {
    if (std::abs(x - lo) <= snap_tol) return !lo_open;
    if (std::abs(x - hi) <= snap_tol) return !hi_open;
    return x > lo && x < hi;
}

Mat spectral_projection(const Mat& a, const Interval& interval) {
    if (!is_hermitian(a, 1e-9))
        throw std::invalid_argument("spectral_projection requires a Hermitian matrix");
    auto es = eig_or_throw(a);
    const int m = static_cast<int>(a.rows());
    Mat proj = Mat::Zero(m, m);
    for (int k = 0; k < m; ++k) {
        if (interval.contains(es.eigenvalues()(k)))
            proj += es.eigenvectors().col(k) * es.eigenvectors().col(k).adjoint();
    }
    return proj;
}

double schatten_norm(const Mat& a, double p) {
    if (p < 1.0) throw std::invalid_argument("schatten_norm requires p >= 1");
    Eigen::JacobiSVD<Mat> svd(a);
    const auto& sv = svd.singularValues();
    if (std::isinf(p)) return sv.size() > 0 ? sv.maxCoeff() : 0.0;
    double sum = 0.0;
    for (int i = 0; i < sv.size(); ++i) sum += std::pow(sv(i), p);
    return std::pow(sum, 1.0 / p);
}

double operator_norm(const Mat& a) {
    return schatten_norm(a, std::numeric_limits<double>::infinity());
}

Mat range_projection(const Mat& psd) {
    auto es = eig_or_throw(psd);
    const int m = static_cast<int>(psd.rows());
    Mat proj = Mat::Zero(m, m);
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    for (int k = 0; k < m; ++k) {
        if (es.eigenvalues()(k) > kRankTol * scale)
            proj += es.eigenvectors().col(k) * es.eigenvectors().col(k).adjoint();
    }
    return proj;
}

namespace {

// Orthonormal basis of the joint column span, rank cut at kRankTol.
Mat span_projection(const Mat& columns) {
    if (columns.cols() == 0) return Mat::Zero(columns.rows(), columns.rows());
    Eigen::JacobiSVD<Mat> svd(columns, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double scale = std::max(1.0, sv.size() > 0 ? sv.maxCoeff() : 0.0);
    int rank = 0;
    while (rank < sv.size() && sv(rank) > kRankTol * scale) ++rank;
    if (rank == 0) return Mat::Zero(columns.rows(), columns.rows());
    Mat basis = svd.matrixU().leftCols(rank);
    return basis * basis.adjoint();
}

Mat range_basis(const Mat& e) {
    auto es = eig_or_throw(e);
    const int m = static_cast<int>(e.rows());
    int rank = 0;
    for (int k = 0; k < m; ++k)
        if (es.eigenvalues()(k) > 0.5) ++rank;
    Mat basis(m, rank);
    int c = 0;
    for (int k = 0; k < m; ++k)
        if (es.eigenvalues()(k) > 0.5) basis.col(c++) = es.eigenvectors().col(k);
    return basis;
}

}  // namespace

Mat lattice_join(const Mat& e, const Mat& f) {
    if (!is_projection(e, 1e-8) || !is_projection(f, 1e-8))
        throw std::invalid_argument("lattice_join requires projections");
    Mat be = range_basis(e), bf = range_basis(f);
    Mat cols(e.rows(), be.cols() + bf.cols());
    cols << be, bf;
    return span_projection(cols);
}

Mat lattice_meet(const Mat& e, const Mat& f) {
    const int m = static_cast<int>(e.rows());
    Mat ec = identity_matrix(m) - e, fc = identity_matrix(m) - f;
    return identity_matrix(m) - lattice_join(ec, fc);
}

Mat lattice_join(const std::vector<Mat>& projections, int m) {
    std::vector<Mat> bases;
    int total = 0;
    for (const auto& e : projections) {
        bases.push_back(range_basis(e));
        total += static_cast<int>(bases.back().cols());
    }
    Mat cols(m, total);
    int c = 0;
    for (const auto& b : bases) {
        cols.middleCols(c, b.cols()) = b;
        c += static_cast<int>(b.cols());
    }
    return span_projection(cols);
}

Mat random_matrix(int m, Rng& rng, double scale) {
    Mat a(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) a(i, j) = Cx(rng.gaussian(scale), rng.gaussian(scale));
    return a;
}

Mat random_hermitian(int m, Rng& rng, double scale) {
    Mat a = random_matrix(m, rng, scale);
    return 0.5 * (a + a.adjoint()).eval();
}

Mat random_positive(int m, Rng& rng, double scale) {
    Mat a = random_matrix(m, rng, scale);
    return (a.adjoint() * a / std::sqrt(static_cast<double>(m))).eval();
}

Mat random_positive_invertible(int m, Rng& rng, double floor_ev) {
    return random_positive(m, rng) + floor_ev * identity_matrix(m);
}

Mat random_projection(int m, int rank, Rng& rng) {
    if (rank <= 0) return zero_matrix(m);
    if (rank >= m) return identity_matrix(m);
    Mat a = random_matrix(m, rng);
    Eigen::HouseholderQR<Mat> qr(a);
    Mat q = qr.householderQ();
    Mat basis = q.leftCols(rank);
    return basis * basis.adjoint();
}

}  // namespace nczw
