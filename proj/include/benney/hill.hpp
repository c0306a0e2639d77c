#pragma once

// Periodic spectra of the linearized operators
//   L1 = -d^2/dx^2 - (c^2/4 + omega) + 3 (beta - 1/c) phi^2
//   L2 = -d^2/dx^2 - (c^2/4 + omega) + (beta - 1/c) phi^2
// by Fourier truncation.  With the dnoidal profile the potential reduces to
// -3 eta1^2 dn^2 (resp. -1 x), independent of beta and c, and the L1 problem
// is a Lame equation whose lowest three eigenvalues are known in closed form.

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "benney/fourier.hpp"
#include "benney/waves.hpp"

namespace benney {

enum class HillOperator { L1, L2 };

struct HillOperatorSpec {
    HillOperator which = HillOperator::L1;
    WaveParams params;
    int truncation = 64; // Fourier modes -M..M, M >= 16
};

struct HillSpectrum {
    std::vector<double> eigenvalues; // lowest n_eigs, ascending
    Eigen::MatrixXd eigenvectors;    // columns: Fourier coefficients over modes -M..M
    int n_negative = 0;
    int kernel_dim_numeric = 0;
    double kernel_tol = 0.0;
};

namespace detail {

// Fourier coefficients of the squared normalized profile eta1^2 dn^2 on [0,L],
// sampled analytically (never from PDE snapshots).  Real and even in the mode.
inline std::vector<double> profile_sq_coefficients(const WaveParams& p, int n_coeffs) {
    int nfft = 512;
    while (nfft < 8 * n_coeffs) nfft *= 2;
    std::vector<cx> samples(nfft);
    for (int j = 0; j < nfft; ++j) {
        const double xi = p.L * j / nfft;
        const double d = jacobi(p.eta1 * xi / std::sqrt(2.0), p.kappa2).dn;
        samples[j] = p.eta1 * p.eta1 * d * d;
    }
    std::vector<cx> hat;
    fft_forward(hat, samples);
    std::vector<double> coeff(n_coeffs);
    for (int d = 0; d < n_coeffs; ++d) coeff[d] = hat[d].real() / nfft;
    return coeff;
}

inline Eigen::MatrixXd assemble_hill(double sigma, double L, int M,
                                     const std::vector<double>& pot_coeff, double mult) {
    const int dim = 2 * M + 1;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
    for (int r = 0; r < dim; ++r) {
        const double k = 2.0 * M_PI * (r - M) / L;
        A(r, r) = k * k + sigma;
        for (int s = 0; s < dim; ++s) A(r, s) -= mult * pot_coeff[std::abs(r - s)];
    }
    return A;
}

} // namespace detail

/// (2M+1) x (2M+1) real-symmetric Fourier-basis matrix of the chosen operator.
inline Eigen::MatrixXd assemble(const HillOperatorSpec& spec) {
    if (spec.truncation < 16) throw std::invalid_argument("assemble: truncation M >= 16 required");
    const double mult = spec.which == HillOperator::L1 ? 3.0 : 1.0;
    const auto coeff = detail::profile_sq_coefficients(spec.params, 2 * spec.truncation + 1);
    return detail::assemble_hill(spec.params.sigma, spec.params.L, spec.truncation, coeff, mult);
}

inline HillSpectrum spectrum(const HillOperatorSpec& spec, int n_eigs) {
    const auto A = assemble(spec);
    if (n_eigs > A.rows()) throw std::invalid_argument("spectrum: n_eigs exceeds 2M+1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    if (es.info() != Eigen::Success) throw std::runtime_error("spectrum: eigensolver failed");

    HillSpectrum out;
    const auto& ev = es.eigenvalues();
    const double radius = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    out.kernel_tol = 1e-7 * radius;
    for (int i = 0; i < ev.size(); ++i) {
        if (ev(i) < -out.kernel_tol) ++out.n_negative;
        if (std::abs(ev(i)) <= out.kernel_tol) ++out.kernel_dim_numeric;
    }
    out.eigenvalues.assign(ev.data(), ev.data() + n_eigs);
    out.eigenvectors = es.eigenvectors().leftCols(n_eigs);
    return out;
}

struct LameTriple {
    double rho0;
    double rho1;
    double rho2;
};

/// Band edges of psi'' + (rho - 6 kappa^2 sn^2) psi = 0 in closed form.
inline LameTriple lame_closed_form(double m) {
    if (!(m > 0.0 && m < 1.0))
        throw std::domain_error("lame_closed_form: kappa^2 in (0,1) required");
    const double root = std::sqrt(1.0 - m + m * m);
    return {2.0 * (1.0 + m - root), 4.0 + m, 2.0 * (1.0 + m + root)};
}

/// Invert rho = 6 - (2/eta1^2)(sigma - lambda) for the L1 eigenvalue.
inline double lambda_from_rho(double rho, const WaveParams& p) {
    return p.sigma - 0.5 * p.eta1 * p.eta1 * (6.0 - rho);
}

/// Fourier coefficients of a sampled function restricted to modes -M..M,
/// ordered to match the Hill matrix basis.
inline Eigen::VectorXcd coefficient_window(const GridSpec& g, const std::vector<cx>& phys, int M) {
    const auto c = fourier_coefficients(g, phys);
    Eigen::VectorXcd w(2 * M + 1);
    for (int mode = -M; mode <= M; ++mode) {
        const int idx = mode >= 0 ? mode : g.n_modes + mode;
        w(mode + M) = c[idx];
    }
    return w;
}

/// |<a,b>| / (|a||b|) over the complex field; 1 means proportional.
inline double cosine_similarity(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::abs(a.dot(b)) / (na * nb);
}

} // namespace benney
