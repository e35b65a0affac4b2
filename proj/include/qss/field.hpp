#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qss {

// ============================================================================
// Errors
// ============================================================================

struct FieldError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Two operands came from different prime fields.
struct ModulusMismatch : FieldError {
    using FieldError::FieldError;
};

/// Multiplicative inverse requested for zero.
struct NoInverse : FieldError {
    using FieldError::FieldError;
};

/// Vector/matrix shapes are incompatible for the requested operation.
struct DimensionMismatch : FieldError {
    using FieldError::FieldError;
};

// ============================================================================
// PrimeModulus — validated odd prime d >= 3
// ============================================================================

class PrimeModulus {
public:
    explicit PrimeModulus(std::uint32_t d) : d_(d) {
        if (!is_odd_prime(d))
            throw FieldError("modulus " + std::to_string(d) + " is not an odd prime >= 3");
    }

    std::uint32_t value() const noexcept { return d_; }

    friend bool operator==(PrimeModulus a, PrimeModulus b) noexcept { return a.d_ == b.d_; }
    friend bool operator!=(PrimeModulus a, PrimeModulus b) noexcept { return a.d_ != b.d_; }

    static bool is_odd_prime(std::uint32_t n) noexcept {
        if (n < 3 || n % 2 == 0) return false;
        for (std::uint32_t p = 3; p * static_cast<std::uint64_t>(p) <= n; p += 2)
            if (n % p == 0) return false;
        return true;
    }

private:
    std::uint32_t d_;
};

// ============================================================================
// FieldElement — value in [0, d) with exact modular arithmetic
// ============================================================================

class FieldElement {
public:
    FieldElement(std::int64_t v, PrimeModulus m) : d_(m) {
        const std::int64_t d = m.value();
        v_ = static_cast<std::uint32_t>(((v % d) + d) % d);
    }

    static FieldElement zero(PrimeModulus m) { return {0, m}; }
    static FieldElement one(PrimeModulus m) { return {1, m}; }

    std::uint32_t value() const noexcept { return v_; }
    PrimeModulus modulus() const noexcept { return d_; }
    bool is_zero() const noexcept { return v_ == 0; }

    friend FieldElement operator+(FieldElement a, FieldElement b) {
        require_same(a, b);
        return {static_cast<std::int64_t>(a.v_) + b.v_, a.d_};
    }
    friend FieldElement operator-(FieldElement a, FieldElement b) {
        require_same(a, b);
        return {static_cast<std::int64_t>(a.v_) - b.v_, a.d_};
    }
    friend FieldElement operator*(FieldElement a, FieldElement b) {
        require_same(a, b);
        return {static_cast<std::int64_t>(a.v_) * b.v_, a.d_};
    }
    FieldElement operator-() const { return {-static_cast<std::int64_t>(v_), d_}; }

    /// Multiplicative inverse via Fermat (d prime); throws NoInverse on zero.
    FieldElement inverse() const {
        if (v_ == 0) throw NoInverse("no inverse of 0 mod " + std::to_string(d_.value()));
        const std::uint64_t d = d_.value();
        std::uint64_t base = v_, acc = 1, e = d - 2;
        while (e) {
            if (e & 1) acc = acc * base % d;
            base = base * base % d;
            e >>= 1;
        }
        return {static_cast<std::int64_t>(acc), d_};
    }

    friend bool operator==(FieldElement a, FieldElement b) noexcept {
        return a.d_ == b.d_ && a.v_ == b.v_;
    }
    friend bool operator!=(FieldElement a, FieldElement b) noexcept { return !(a == b); }

private:
    static void require_same(FieldElement a, FieldElement b) {
        if (a.d_ != b.d_)
            throw ModulusMismatch("field elements live in F_" + std::to_string(a.d_.value()) +
                                  " and F_" + std::to_string(b.d_.value()));
    }

    std::uint32_t v_;
    PrimeModulus d_;
};

// ============================================================================
// FieldVector / FieldMatrix — dense containers over one shared modulus
// ============================================================================

class FieldVector {
public:
    FieldVector(PrimeModulus m, std::vector<std::int64_t> vals) : d_(m) {
        v_.reserve(vals.size());
        for (std::int64_t x : vals) v_.push_back(FieldElement(x, m).value());
    }
    FieldVector(PrimeModulus m, std::initializer_list<std::int64_t> vals)
        : FieldVector(m, std::vector<std::int64_t>(vals)) {}

    static FieldVector zeros(PrimeModulus m, std::size_t n) {
        return {m, std::vector<std::int64_t>(n, 0)};
    }

    std::size_t size() const noexcept { return v_.size(); }
    PrimeModulus modulus() const noexcept { return d_; }

    FieldElement at(std::size_t i) const {
        if (i >= v_.size()) throw DimensionMismatch("vector index out of range");
        return {static_cast<std::int64_t>(v_[i]), d_};
    }
    void set(std::size_t i, FieldElement x) {
        if (i >= v_.size()) throw DimensionMismatch("vector index out of range");
        if (x.modulus() != d_) throw ModulusMismatch("vector modulus differs from element");
        v_[i] = x.value();
    }

    /// Raw reduced values, handy for serialization and multiset keys.
    const std::vector<std::uint32_t>& values() const noexcept { return v_; }

    bool is_zero() const noexcept {
        for (auto x : v_)
            if (x != 0) return false;
        return true;
    }

    friend bool operator==(const FieldVector& a, const FieldVector& b) noexcept {
        return a.d_ == b.d_ && a.v_ == b.v_;
    }

private:
    PrimeModulus d_;
    std::vector<std::uint32_t> v_;
};

/// Componentwise dot product; sizes and moduli must agree.
inline FieldElement dot(const FieldVector& a, const FieldVector& b) {
    if (a.modulus() != b.modulus()) throw ModulusMismatch("dot: moduli differ");
    if (a.size() != b.size()) throw DimensionMismatch("dot: sizes differ");
    FieldElement acc = FieldElement::zero(a.modulus());
    for (std::size_t i = 0; i < a.size(); ++i) acc = acc + a.at(i) * b.at(i);
    return acc;
}

class FieldMatrix {
public:
    FieldMatrix(PrimeModulus m, std::size_t rows, std::size_t cols)
        : d_(m), rows_(rows), cols_(cols), a_(rows * cols, 0) {
        if (rows == 0 || cols == 0) throw DimensionMismatch("matrix dimensions must be positive");
    }

    static FieldMatrix from_rows(PrimeModulus m,
                                 const std::vector<std::vector<std::int64_t>>& rows) {
        if (rows.empty() || rows.front().empty())
            throw DimensionMismatch("matrix dimensions must be positive");
        FieldMatrix out(m, rows.size(), rows.front().size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != out.cols_) throw DimensionMismatch("ragged matrix rows");
            for (std::size_t c = 0; c < out.cols_; ++c)
                out.a_[r * out.cols_ + c] = FieldElement(rows[r][c], m).value();
        }
        return out;
    }

    static FieldMatrix identity(PrimeModulus m, std::size_t n) {
        FieldMatrix out(m, n, n);
        for (std::size_t i = 0; i < n; ++i) out.a_[i * n + i] = 1;
        return out;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    PrimeModulus modulus() const noexcept { return d_; }

    FieldElement at(std::size_t r, std::size_t c) const {
        check_index(r, c);
        return {static_cast<std::int64_t>(a_[r * cols_ + c]), d_};
    }
    void set(std::size_t r, std::size_t c, FieldElement x) {
        check_index(r, c);
        if (x.modulus() != d_) throw ModulusMismatch("matrix modulus differs from element");
        a_[r * cols_ + c] = x.value();
    }

    FieldMatrix transposed() const {
        FieldMatrix out(d_, cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) out.a_[c * rows_ + r] = a_[r * cols_ + c];
        return out;
    }

    /// New matrix made of the given rows, in the given order (repeats allowed).
    FieldMatrix selected_rows(const std::vector<std::size_t>& idx) const {
        if (idx.empty()) throw DimensionMismatch("selected_rows: empty selection");
        FieldMatrix out(d_, idx.size(), cols_);
        for (std::size_t r = 0; r < idx.size(); ++r) {
            if (idx[r] >= rows_) throw DimensionMismatch("selected_rows: row index out of range");
            for (std::size_t c = 0; c < cols_; ++c)
                out.a_[r * cols_ + c] = a_[idx[r] * cols_ + c];
        }
        return out;
    }

    FieldVector row(std::size_t r) const {
        std::vector<std::int64_t> vals(cols_);
        for (std::size_t c = 0; c < cols_; ++c) vals[c] = at(r, c).value();
        return {d_, vals};
    }

    friend bool operator==(const FieldMatrix& a, const FieldMatrix& b) noexcept {
        return a.d_ == b.d_ && a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.a_ == b.a_;
    }

private:
    void check_index(std::size_t r, std::size_t c) const {
        if (r >= rows_ || c >= cols_) throw DimensionMismatch("matrix index out of range");
    }

    PrimeModulus d_;
    std::size_t rows_, cols_;
    std::vector<std::uint32_t> a_;
};

inline FieldVector mat_vec_mul(const FieldMatrix& m, const FieldVector& v) {
    if (m.modulus() != v.modulus()) throw ModulusMismatch("mat_vec_mul: moduli differ");
    if (m.cols() != v.size()) throw DimensionMismatch("mat_vec_mul: shape mismatch");
    FieldVector out = FieldVector::zeros(m.modulus(), m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        FieldElement acc = FieldElement::zero(m.modulus());
        for (std::size_t c = 0; c < m.cols(); ++c) acc = acc + m.at(r, c) * v.at(c);
        out.set(r, acc);
    }
    return out;
}

// ============================================================================
// Linear solving over F_d
// ============================================================================

/// Returns one solution x of A·x = b, or nullopt if the system is inconsistent.
/// Gauss-Jordan with the first nonzero entry as pivot; free variables are 0,
/// which makes the returned representative deterministic.
inline std::optional<FieldVector> solve_linear(const FieldMatrix& a, const FieldVector& b) {
    if (a.modulus() != b.modulus()) throw ModulusMismatch("solve_linear: moduli differ");
    if (a.rows() != b.size()) throw DimensionMismatch("solve_linear: rhs size mismatch");
    const PrimeModulus m = a.modulus();
    const std::size_t rows = a.rows(), cols = a.cols();

    // Augmented working copy [A | b].
    FieldMatrix aug(m, rows, cols + 1);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) aug.set(r, c, a.at(r, c));
        aug.set(r, cols, b.at(r));
    }

    std::vector<std::pair<std::size_t, std::size_t>> pivots;  // (row, col)
    std::size_t pr = 0;
    for (std::size_t pc = 0; pc < cols && pr < rows; ++pc) {
        std::size_t hit = rows;
        for (std::size_t r = pr; r < rows; ++r) {
            if (!aug.at(r, pc).is_zero()) {
                hit = r;
                break;
            }
        }
        if (hit == rows) continue;
        if (hit != pr) {
            for (std::size_t c = 0; c <= cols; ++c) {
                FieldElement tmp = aug.at(pr, c);
                aug.set(pr, c, aug.at(hit, c));
                aug.set(hit, c, tmp);
            }
        }
        const FieldElement inv = aug.at(pr, pc).inverse();
        for (std::size_t c = pc; c <= cols; ++c) aug.set(pr, c, aug.at(pr, c) * inv);
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == pr) continue;
            const FieldElement factor = aug.at(r, pc);
            if (factor.is_zero()) continue;
            for (std::size_t c = pc; c <= cols; ++c)
                aug.set(r, c, aug.at(r, c) - factor * aug.at(pr, c));
        }
        pivots.emplace_back(pr, pc);
        ++pr;
    }

    for (std::size_t r = pr; r < rows; ++r)
        if (!aug.at(r, cols).is_zero()) return std::nullopt;

    FieldVector x = FieldVector::zeros(m, cols);
    for (auto [r, c] : pivots) x.set(c, aug.at(r, cols));
    return x;
}

/// True iff target is a linear combination of the rows of m.
inline bool row_span_contains(const FieldMatrix& m, const FieldVector& target) {
    return solve_linear(m.transposed(), target).has_value();
}

}  // namespace qss
