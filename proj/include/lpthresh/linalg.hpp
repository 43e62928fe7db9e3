#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpthresh {

using Vector = std::vector<double>;

/// Thrown when operand shapes do not agree.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Dense row-major matrix. Immutable once constructed.
class DenseMatrix {
public:
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

    static DenseMatrix identity(std::size_t n);
    static DenseMatrix diagonal(std::span<const double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double operator()(std::size_t i, std::size_t j) const noexcept { return entries_[i * cols_ + j]; }
    std::span<const double> row(std::size_t i) const noexcept {
        return {entries_.data() + i * cols_, cols_};
    }
    std::span<const double> entries() const noexcept { return entries_; }

    DenseMatrix scaled(double c) const;

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> entries_;
};

/// Seed for every random stream in the library. There is no global generator.
struct RngSeed {
    std::uint64_t value = 0;
    friend bool operator==(RngSeed, RngSeed) = default;
};

/// SplitMix64 finalizer; used to derive independent sub-seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Deterministic sub-seed for `base` tagged by a role and up to two indices.
RngSeed derive_seed(RngSeed base, std::uint64_t role, std::uint64_t a = 0, std::uint64_t b = 0) noexcept;

/// Portable random stream: std::mt19937_64 (fully specified by the standard)
/// feeding a Box-Muller transform. Distributions from <random> are avoided
/// because their output is implementation-defined.
class Rng {
public:
    explicit Rng(RngSeed seed);

    std::uint64_t next_u64();
    /// Uniform on (0, 1], 53 random bits.
    double uniform();
    double normal();
    /// Uniform integer in [0, bound), bound > 0. Unbiased (rejection).
    std::uint64_t below(std::uint64_t bound);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// m x n matrix of i.i.d. N(0, 1) entries, filled in row-major order.
DenseMatrix gaussian_matrix(std::size_t m, std::size_t n, RngSeed seed);

Vector matvec(const DenseMatrix& a, std::span<const double> x);
Vector matvec_transpose(const DenseMatrix& a, std::span<const double> y);

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
/// ||x - y||_2
double distance(std::span<const double> x, std::span<const double> y);

/// Power iteration did not reach the requested tolerance.
class SpectralNormError : public std::runtime_error {
public:
    SpectralNormError(const std::string& what, double last_estimate)
        : std::runtime_error(what), last_estimate_(last_estimate) {}
    double last_estimate() const noexcept { return last_estimate_; }

private:
    double last_estimate_;
};

inline constexpr double kSpectralTol = 1e-10;
inline constexpr int kSpectralMaxIter = 100000;

/// Largest singular value of `a`, by power iteration on the smaller of
/// A^T A and A A^T. Stops once the relative change of the estimate is below
/// `tol`. Throws SpectralNormError after `max_iter` iterations.
double spectral_norm(const DenseMatrix& a, double tol = kSpectralTol, int max_iter = kSpectralMaxIter);

/// z + mu * A^T (b - A z)
Vector landweber_step(const DenseMatrix& a, std::span<const double> b, std::span<const double> z, double mu);

/// Magnitudes of a vector sorted nonincreasing, with the source index of each.
/// Ties keep ascending source order. Indices are 0-based.
struct Rearrangement {
    Vector values;
    std::vector<std::size_t> permutation;
};

Rearrangement nonincreasing_rearrangement(std::span<const double> x);

/// values[index] of nonincreasing_rearrangement(x), in O(n) time.
double rearranged_value(std::span<const double> x, std::size_t index);

// CSV: one matrix row per line, 17 significant digits. A vector is a column.
void write_csv(std::ostream& out, const DenseMatrix& a);
void write_csv(std::ostream& out, std::span<const double> v);
DenseMatrix read_matrix_csv(std::istream& in);
Vector read_vector_csv(std::istream& in);

}  // namespace lpthresh
