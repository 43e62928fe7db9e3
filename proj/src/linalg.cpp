#include "lpthresh/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

namespace lpthresh {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (rows_ == 0 || cols_ == 0) {
        throw DimensionError("DenseMatrix: rows and cols must be positive");
    }
    if (entries_.size() != rows_ * cols_) {
        throw DimensionError("DenseMatrix: expected " + std::to_string(rows_ * cols_) + " entries, got " +
                             std::to_string(entries_.size()));
    }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    Vector ones(n, 1.0);
    return diagonal(ones);
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<double> e(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        e[i * n + i] = values[i];
    }
    return DenseMatrix(n, n, std::move(e));
}

DenseMatrix DenseMatrix::scaled(double c) const {
    std::vector<double> e(entries_);
    for (double& v : e) {
        v *= c;
    }
    return DenseMatrix(rows_, cols_, std::move(e));
}

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RngSeed derive_seed(RngSeed base, std::uint64_t role, std::uint64_t a, std::uint64_t b) noexcept {
    std::uint64_t h = mix64(base.value);
    h = mix64(h ^ role);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    return RngSeed{h};
}

Rng::Rng(RngSeed seed) : engine_(seed.value) {}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() {
    constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
    return static_cast<double>((next_u64() >> 11) + 1) * kScale;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) {
        throw std::invalid_argument("Rng::below: bound must be positive");
    }
    // Reject the top partial block so every residue is equally likely.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x = next_u64();
    while (x >= limit) {
        x = next_u64();
    }
    return x % bound;
}

DenseMatrix gaussian_matrix(std::size_t m, std::size_t n, RngSeed seed) {
    if (m == 0 || n == 0) {
        throw DimensionError("gaussian_matrix: m and n must be positive");
    }
    Rng rng(seed);
    std::vector<double> e(m * n);
    for (double& v : e) {
        v = rng.normal();
    }
    return DenseMatrix(m, n, std::move(e));
}

double dot(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw DimensionError("dot: length mismatch");
    }
    // Four fixed accumulators: vectorizable without reassociation, and the
    // summation order is the same on every platform.
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    const std::size_t n = x.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += x[i] * y[i];
        s1 += x[i + 1] * y[i + 1];
        s2 += x[i + 2] * y[i + 2];
        s3 += x[i + 3] * y[i + 3];
    }
    for (; i < n; ++i) {
        s0 += x[i] * y[i];
    }
    return (s0 + s1) + (s2 + s3);
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

double distance(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw DimensionError("distance: length mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return std::sqrt(s);
}

Vector matvec(const DenseMatrix& a, std::span<const double> x) {
    if (x.size() != a.cols()) {
        throw DimensionError("matvec: expected length " + std::to_string(a.cols()) + ", got " +
                             std::to_string(x.size()));
    }
    Vector y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        y[i] = dot(a.row(i), x);
    }
    return y;
}

Vector matvec_transpose(const DenseMatrix& a, std::span<const double> y) {
    if (y.size() != a.rows()) {
        throw DimensionError("matvec_transpose: expected length " + std::to_string(a.rows()) + ", got " +
                             std::to_string(y.size()));
    }
    Vector x(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double yi = y[i];
        const auto row = a.row(i);
        for (std::size_t j = 0; j < x.size(); ++j) {
            x[j] += yi * row[j];
        }
    }
    return x;
}

namespace {

// Gram matrix of the smaller side: A A^T when m <= n, else A^T A.
std::vector<double> small_gram(const DenseMatrix& a, std::size_t& dim) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    if (m <= n) {
        dim = m;
        std::vector<double> g(m * m);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = i; j < m; ++j) {
                const double v = dot(a.row(i), a.row(j));
                g[i * m + j] = v;
                g[j * m + i] = v;
            }
        }
        return g;
    }
    dim = n;
    std::vector<double> g(n * n, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        const auto row = a.row(k);
        for (std::size_t i = 0; i < n; ++i) {
            const double ri = row[i];
            for (std::size_t j = 0; j < n; ++j) {
                g[i * n + j] += ri * row[j];
            }
        }
    }
    return g;
}

}  // namespace

double spectral_norm(const DenseMatrix& a, double tol, int max_iter) {
    if (!(tol > 0.0)) {
        throw std::invalid_argument("spectral_norm: tol must be positive");
    }
    if (max_iter < 1) {
        throw std::invalid_argument("spectral_norm: max_iter must be positive");
    }
    if (std::all_of(a.entries().begin(), a.entries().end(), [](double v) { return v == 0.0; })) {
        throw std::invalid_argument("spectral_norm: matrix is zero");
    }

    std::size_t d = 0;
    const std::vector<double> g = small_gram(a, d);

    Rng rng(RngSeed{0x5eedc0ffee123457ULL});
    Vector v(d);
    for (double& x : v) {
        x = rng.normal();
    }
    double nv = norm2(v);
    for (double& x : v) {
        x /= nv;
    }

    Vector w(d);
    double estimate = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        for (std::size_t i = 0; i < d; ++i) {
            w[i] = dot(std::span<const double>(g.data() + i * d, d), v);
        }
        // Rayleigh quotient v^T G v with ||v|| = 1.
        const double rayleigh = dot(v, w);
        const double next = std::sqrt(std::max(rayleigh, 0.0));
        nv = norm2(w);
        if (nv == 0.0) {
            // Start vector in the null space; cannot happen almost surely.
            throw SpectralNormError("spectral_norm: iterate collapsed to zero", estimate);
        }
        for (std::size_t i = 0; i < d; ++i) {
            v[i] = w[i] / nv;
        }
        if (it > 0 && std::abs(next - estimate) <= tol * next) {
            return next;
        }
        estimate = next;
    }
    throw SpectralNormError("spectral_norm: no convergence within " + std::to_string(max_iter) + " iterations",
                            estimate);
}

Vector landweber_step(const DenseMatrix& a, std::span<const double> b, std::span<const double> z, double mu) {
    if (b.size() != a.rows() || z.size() != a.cols()) {
        throw DimensionError("landweber_step: dimension mismatch");
    }
    Vector r = matvec(a, z);
    for (std::size_t i = 0; i < r.size(); ++i) {
        r[i] = b[i] - r[i];
    }
    const Vector g = matvec_transpose(a, r);
    Vector out(z.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = z[j] + mu * g[j];
    }
    return out;
}

Rearrangement nonincreasing_rearrangement(std::span<const double> x) {
    Rearrangement out;
    out.permutation.resize(x.size());
    std::iota(out.permutation.begin(), out.permutation.end(), std::size_t{0});
    std::stable_sort(out.permutation.begin(), out.permutation.end(),
                     [&](std::size_t i, std::size_t j) { return std::abs(x[i]) > std::abs(x[j]); });
    out.values.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out.values[i] = std::abs(x[out.permutation[i]]);
    }
    return out;
}

double rearranged_value(std::span<const double> x, std::size_t index) {
    if (index >= x.size()) {
        throw DimensionError("rearranged_value: index " + std::to_string(index) + " out of range for length " +
                             std::to_string(x.size()));
    }
    Vector mags(x.size());
    std::transform(x.begin(), x.end(), mags.begin(), [](double v) { return std::abs(v); });
    auto nth = mags.begin() + static_cast<std::ptrdiff_t>(index);
    std::nth_element(mags.begin(), nth, mags.end(), std::greater<>{});
    return *nth;
}

namespace {

void write_value(std::ostream& out, double v) {
    char buf[32];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
    out.write(buf, len);
}

std::vector<double> parse_row(const std::string& line, std::size_t line_no) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const auto first = cell.find_first_not_of(" \t\r");
        const auto last = cell.find_last_not_of(" \t\r");
        if (first == std::string::npos) {
            throw std::runtime_error("csv line " + std::to_string(line_no) + ": empty cell");
        }
        const std::string token = cell.substr(first, last - first + 1);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(token, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != token.size()) {
            throw std::runtime_error("csv line " + std::to_string(line_no) + ": not a number: '" + token + "'");
        }
        row.push_back(v);
    }
    return row;
}

}  // namespace

void write_csv(std::ostream& out, const DenseMatrix& a) {
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto row = a.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j > 0) {
                out.put(',');
            }
            write_value(out, row[j]);
        }
        out.put('\n');
    }
}

void write_csv(std::ostream& out, std::span<const double> v) {
    for (double x : v) {
        write_value(out, x);
        out.put('\n');
    }
}

DenseMatrix read_matrix_csv(std::istream& in) {
    std::string line;
    std::vector<double> entries;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        auto row = parse_row(line, line_no);
        if (rows == 0) {
            cols = row.size();
        } else if (row.size() != cols) {
            throw DimensionError("csv line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                                 " columns, got " + std::to_string(row.size()));
        }
        entries.insert(entries.end(), row.begin(), row.end());
        ++rows;
    }
    if (rows == 0) {
        throw DimensionError("csv: no rows");
    }
    return DenseMatrix(rows, cols, std::move(entries));
}

Vector read_vector_csv(std::istream& in) {
    const DenseMatrix m = read_matrix_csv(in);
    if (m.cols() != 1 && m.rows() != 1) {
        throw DimensionError("csv: vector must be a single row or a single column");
    }
    return Vector(m.entries().begin(), m.entries().end());
}

}  // namespace lpthresh
