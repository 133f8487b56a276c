#include "spomix/moment_problem.hpp"

#include "spomix/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace spomix {

namespace {

double seq_value(const MomentSequence& seq, int idx) {
    return idx == 0 ? 1.0 : seq.values[idx - 1];
}

void check_length(const MomentSequence& seq) {
    if (seq.k < 1 || seq.values.size() != 2 * seq.k - 1) {
        throw LengthMismatch("moment sequence for k=" + std::to_string(seq.k) + " must have length " +
                             std::to_string(2 * seq.k - 1) + ", got " + std::to_string(seq.values.size()));
    }
}

// Realify eigenvalues, no pairing assumptions: anything beyond the imaginary
// tolerance means the sequence is not a valid real mixture.
std::vector<double> realify(const Eigen::VectorXcd& ev, double imag_tolerance) {
    std::vector<double> out(static_cast<std::size_t>(ev.size()));
    for (Index i = 0; i < ev.size(); ++i) {
        if (std::abs(ev[i].imag()) > imag_tolerance) {
            throw ComplexAtoms("recovered atom has imaginary part " + std::to_string(ev[i].imag()));
        }
        out[static_cast<std::size_t>(i)] = ev[i].real();
    }
    return out;
}

struct Recovery {
    MixtureOfEffects mix;
    double weight_negativity = 0.0;
    double atom_separation = 0.0;
};

// Weights from the Vandermonde system V w = (nu_0..nu_{k-1}), then canonical
// ordering and simplex projection.
Recovery recover_from_atoms(std::vector<double> atoms, const MomentSequence& seq) {
    const int k = seq.k;
    std::sort(atoms.begin(), atoms.end());

    Matrix vandermonde(k, k);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            vandermonde(i, j) = std::pow(atoms[static_cast<std::size_t>(j)], i);
        }
    }
    Vector rhs(k);
    for (int i = 0; i < k; ++i) rhs[i] = seq_value(seq, i);
    Vector raw = vandermonde.colPivHouseholderQr().solve(rhs);

    Recovery rec;
    rec.weight_negativity = raw.minCoeff();

    // Canonical order: effects ascending (already sorted), ties by
    // descending weight.
    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const double ea = atoms[static_cast<std::size_t>(a)];
        const double eb = atoms[static_cast<std::size_t>(b)];
        if (ea != eb) return ea < eb;
        return raw[a] > raw[b];
    });

    Vector weights(k), effects(k);
    for (int i = 0; i < k; ++i) {
        weights[i] = raw[order[static_cast<std::size_t>(i)]];
        effects[i] = atoms[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    }

    rec.mix.k = k;
    rec.mix.weights = project_to_simplex(weights);
    rec.mix.effects = effects;

    rec.atom_separation = std::numeric_limits<double>::max();
    for (int i = 0; i + 1 < k; ++i) {
        rec.atom_separation = std::min(rec.atom_separation, effects[i + 1] - effects[i]);
    }
    return rec;
}

double hankel_sigma_min_or_throw(const Matrix& h0, double rel_tolerance, double* sigma_min_out) {
    Eigen::JacobiSVD<Matrix> svd(h0);
    const auto& sv = svd.singularValues();
    const double sigma_min = sv[sv.size() - 1];
    const double sigma_max = sv[0];
    if (sigma_min_out) *sigma_min_out = sigma_min;
    if (sigma_max == 0.0 || sigma_min < rel_tolerance * sigma_max) {
        throw DegenerateHankel("Hankel matrix is numerically singular (sigma_min=" +
                               std::to_string(sigma_min) +
                               "); fewer than k distinguishable components");
    }
    return sigma_min;
}

} // namespace

Matrix hankel(const MomentSequence& seq, int shift) {
    check_length(seq);
    if (shift != 0 && shift != 1) throw OutOfRange("hankel shift must be 0 or 1");
    Matrix h(seq.k, seq.k);
    for (int i = 0; i < seq.k; ++i) {
        for (int j = 0; j < seq.k; ++j) h(i, j) = seq_value(seq, i + j + shift);
    }
    return h;
}

std::pair<MixtureOfEffects, PencilDiagnostics> matrix_pencil(const MomentSequence& seq,
                                                             const PencilOptions& opts) {
    check_length(seq);
    const Matrix h0 = hankel(seq, 0);
    const Matrix h1 = hankel(seq, 1);

    PencilDiagnostics diag;
    hankel_sigma_min_or_throw(h0, opts.hankel_rel_tolerance, &diag.hankel_sigma_min);

    // Small k: the generalized eigenproblem (H1, H0) reduces safely to
    // eig(H0^{-1} H1) once H0's conditioning is verified.
    const Matrix pencil = h0.colPivHouseholderQr().solve(h1);
    Eigen::EigenSolver<Matrix> eig(pencil);
    const Recovery rec = recover_from_atoms(realify(eig.eigenvalues(), opts.imag_tolerance), seq);

    diag.atom_separation = rec.atom_separation;
    diag.weight_negativity = rec.weight_negativity;
    return {rec.mix, diag};
}

MixtureOfEffects prony(const MomentSequence& seq, const PencilOptions& opts) {
    check_length(seq);
    const int k = seq.k;
    const Matrix h0 = hankel(seq, 0);
    hankel_sigma_min_or_throw(h0, opts.hankel_rel_tolerance, nullptr);

    // Coefficients of the annihilating polynomial:
    // nu_{m+k} = sum_j c_j nu_{m+j}  =>  p(x) = x^k - c_{k-1} x^{k-1} - .. - c_0.
    Vector rhs(k);
    for (int m = 0; m < k; ++m) rhs[m] = seq_value(seq, m + k);
    const Vector coeff = h0.colPivHouseholderQr().solve(rhs);

    Matrix companion = Matrix::Zero(k, k);
    for (int i = 1; i < k; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < k; ++i) companion(i, k - 1) = coeff[i];

    Eigen::EigenSolver<Matrix> eig(companion);
    return recover_from_atoms(realify(eig.eigenvalues(), opts.imag_tolerance), seq).mix;
}

Vector project_to_simplex(const Vector& w) {
    const Index n = w.size();
    std::vector<double> sorted(w.data(), w.data() + n);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());

    double cumulative = 0.0;
    double threshold = 0.0;
    for (Index i = 0; i < n; ++i) {
        cumulative += sorted[static_cast<std::size_t>(i)];
        const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
        if (sorted[static_cast<std::size_t>(i)] > candidate) threshold = candidate;
    }
    return (w.array() - threshold).cwiseMax(0.0);
}

} // namespace spomix
