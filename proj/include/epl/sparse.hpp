#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "epl/core.hpp"

namespace epl {

/// Compressed sparse row matrix with sorted, duplicate-free column indices.
class CsrMatrix {
public:
    CsrMatrix() = default;
    CsrMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return values_.size(); }
    std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
    std::span<const std::size_t> col_idx() const noexcept { return col_idx_; }
    std::span<const double> values() const noexcept { return values_; }

    /// Appends the next row; entries must already be sorted by column and duplicate-free.
    void push_row(std::span<const std::pair<std::size_t, double>> entries)
    {
        for (const auto& [c, v] : entries) {
            col_idx_.push_back(c);
            values_.push_back(v);
        }
        row_ptr_[++filled_] = col_idx_.size();
    }

    double coeff(std::size_t r, std::size_t c) const
    {
        const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
        const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
        const auto it = std::lower_bound(first, last, c);
        return (it != last && *it == c) ? values_[static_cast<std::size_t>(it - col_idx_.begin())] : 0.0;
    }

    void multiply(std::span<const double> x, std::span<double> y) const
    {
        for (std::size_t r = 0; r < rows_; ++r) {
            double acc = 0.0;
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += values_[k] * x[col_idx_[k]];
            y[r] = acc;
        }
    }
    std::vector<double> operator*(std::span<const double> x) const
    {
        std::vector<double> y(rows_);
        multiply(x, y);
        return y;
    }
    void multiply_transpose(std::span<const double> x, std::span<double> y) const
    {
        std::fill(y.begin(), y.end(), 0.0);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) y[col_idx_[k]] += values_[k] * x[r];
    }

    CsrMatrix transpose() const
    {
        CsrMatrix t(cols_, rows_);
        std::vector<std::size_t> count(cols_ + 1, 0);
        for (std::size_t c : col_idx_) ++count[c + 1];
        for (std::size_t c = 0; c < cols_; ++c) count[c + 1] += count[c];
        t.row_ptr_ = count;
        t.col_idx_.resize(nnz());
        t.values_.resize(nnz());
        std::vector<std::size_t> next(count.begin(), count.end() - 1);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
                const std::size_t dst = next[col_idx_[k]]++;
                t.col_idx_[dst] = r;
                t.values_[dst] = values_[k];
            }
        t.filled_ = cols_;
        return t;
    }

    /// Sparse product this * b.
    CsrMatrix product(const CsrMatrix& b) const
    {
        EPL_REQUIRE(cols_ == b.rows_, InvalidArgument, "matrix product dimension mismatch");
        CsrMatrix c(rows_, b.cols_);
        std::vector<double> acc(b.cols_, 0.0);
        std::vector<char> used(b.cols_, 0);
        std::vector<std::size_t> pattern;
        std::vector<std::pair<std::size_t, double>> row;
        for (std::size_t r = 0; r < rows_; ++r) {
            pattern.clear();
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
                const std::size_t mid = col_idx_[k];
                for (std::size_t j = b.row_ptr_[mid]; j < b.row_ptr_[mid + 1]; ++j) {
                    const std::size_t col = b.col_idx_[j];
                    if (!used[col]) {
                        used[col] = 1;
                        pattern.push_back(col);
                    }
                    acc[col] += values_[k] * b.values_[j];
                }
            }
            std::sort(pattern.begin(), pattern.end());
            row.clear();
            for (std::size_t col : pattern) {
                row.emplace_back(col, acc[col]);
                acc[col] = 0.0;
                used[col] = 0;
            }
            c.push_row(row);
        }
        return c;
    }

    /// alpha * this + beta * b (same shape).
    CsrMatrix combine(double alpha, const CsrMatrix& b, double beta) const
    {
        EPL_REQUIRE(rows_ == b.rows_ && cols_ == b.cols_, InvalidArgument, "matrix sum dimension mismatch");
        CsrMatrix c(rows_, cols_);
        std::vector<std::pair<std::size_t, double>> row;
        for (std::size_t r = 0; r < rows_; ++r) {
            row.clear();
            std::size_t i = row_ptr_[r], j = b.row_ptr_[r];
            const std::size_t ie = row_ptr_[r + 1], je = b.row_ptr_[r + 1];
            while (i < ie || j < je) {
                if (j == je || (i < ie && col_idx_[i] < b.col_idx_[j])) {
                    row.emplace_back(col_idx_[i], alpha * values_[i]);
                    ++i;
                } else if (i == ie || b.col_idx_[j] < col_idx_[i]) {
                    row.emplace_back(b.col_idx_[j], beta * b.values_[j]);
                    ++j;
                } else {
                    row.emplace_back(col_idx_[i], alpha * values_[i] + beta * b.values_[j]);
                    ++i;
                    ++j;
                }
            }
            c.push_row(row);
        }
        return c;
    }

    /// Submatrix with the given rows and columns (index lists must be increasing).
    CsrMatrix restrict_to(std::span<const std::size_t> keep) const
    {
        std::vector<std::int64_t> map(cols_, -1);
        for (std::size_t i = 0; i < keep.size(); ++i) map[keep[i]] = static_cast<std::int64_t>(i);
        CsrMatrix c(keep.size(), keep.size());
        std::vector<std::pair<std::size_t, double>> row;
        for (std::size_t r : keep) {
            row.clear();
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                if (map[col_idx_[k]] >= 0) row.emplace_back(static_cast<std::size_t>(map[col_idx_[k]]), values_[k]);
            c.push_row(row);
        }
        return c;
    }

    std::vector<double> diagonal() const
    {
        std::vector<double> d(std::min(rows_, cols_), 0.0);
        for (std::size_t r = 0; r < d.size(); ++r) d[r] = coeff(r, r);
        return d;
    }

    /// Largest |a_ij - a_ji| relative to the largest |a_ij|.
    double asymmetry() const
    {
        if (rows_ != cols_) return std::numeric_limits<double>::infinity();
        double worst = 0.0, scale = 0.0;
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
                scale = std::max(scale, std::abs(values_[k]));
                worst = std::max(worst, std::abs(values_[k] - coeff(col_idx_[k], r)));
            }
        return scale > 0.0 ? worst / scale : 0.0;
    }
    bool is_symmetric(double rel_tol = 1e-12) const { return asymmetry() <= rel_tol; }

    /// Coordinate text export: header `%%EPL-COO rows cols nnz`, then `i j value` per entry
    /// (0-based indices, 17 significant digits).
    std::string to_coo_text() const
    {
        std::string out = "%%EPL-COO " + std::to_string(rows_) + " " + std::to_string(cols_) + " " +
                          std::to_string(nnz()) + "\n";
        char buf[96];
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
                std::snprintf(buf, sizeof buf, "%zu %zu %.17g\n", r, col_idx_[k], values_[k]);
                out += buf;
            }
        return out;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t filled_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> col_idx_;
    std::vector<double> values_;
};

/// Sorts `entries` by column and merges duplicates in place (sum in encounter order).
inline void merge_entries(std::vector<std::pair<std::size_t, double>>& entries)
{
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t w = 0;
    for (std::size_t r = 0; r < entries.size(); ++r) {
        if (w > 0 && entries[w - 1].first == entries[r].first)
            entries[w - 1].second += entries[r].second;
        else
            entries[w++] = entries[r];
    }
    entries.resize(w);
}

inline double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace epl
