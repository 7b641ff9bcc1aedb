#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "rbcm/errors.hpp"
#include "rbcm/linalg.hpp"

namespace rbcm {

// Training matrix X = [X_1 ... X_C], one sample per column, partitioned by
// class. Columns are rescaled to unit l2 norm at construction. Immutable
// afterwards and safe to share across threads.
class PartitionedDictionary {
public:
    PartitionedDictionary(const Matrix& samples, std::vector<std::size_t> class_sizes)
        : atoms_(normalize_columns(samples)), class_sizes_(std::move(class_sizes)) {
        if (class_sizes_.size() < 2)
            throw DimensionMismatch("dictionary needs at least 2 classes, got " +
                                    std::to_string(class_sizes_.size()));
        std::size_t total = 0;
        class_offsets_.reserve(class_sizes_.size() + 1);
        class_offsets_.push_back(0);
        for (std::size_t ni : class_sizes_) {
            if (ni == 0) throw EmptyClass(class_offsets_.size() - 1);
            total += ni;
            class_offsets_.push_back(total);
        }
        if (total != atoms_.cols())
            throw DimensionMismatch("class sizes sum to " + std::to_string(total) +
                                    " but dictionary has " + std::to_string(atoms_.cols()) +
                                    " columns");
    }

    const Matrix& atoms() const { return atoms_; }
    std::size_t dim() const { return atoms_.rows(); }
    std::size_t atom_count() const { return atoms_.cols(); }
    std::size_t class_count() const { return class_sizes_.size(); }
    std::size_t class_size(std::size_t i) const { return class_sizes_[i]; }
    std::size_t class_offset(std::size_t i) const { return class_offsets_[i]; }
    const std::vector<std::size_t>& class_sizes() const { return class_sizes_; }

    Matrix class_atoms(std::size_t i) const {
        return atoms_.columns(class_offsets_[i], class_offsets_[i + 1]);
    }

    // Slice of a coefficient vector belonging to class i.
    Vector class_slice(const Vector& coeffs, std::size_t i) const {
        return Vector(coeffs.begin() + static_cast<std::ptrdiff_t>(class_offsets_[i]),
                      coeffs.begin() + static_cast<std::ptrdiff_t>(class_offsets_[i + 1]));
    }

    // X_i c_i without materializing the class block.
    Vector reconstruct_class(const Vector& coeffs, std::size_t i) const {
        Vector y(dim(), 0.0);
        const std::size_t begin = class_offsets_[i];
        const std::size_t end = class_offsets_[i + 1];
        for (std::size_t r = 0; r < dim(); ++r) {
            const double* row = atoms_.row_ptr(r);
            double s = 0.0;
            for (std::size_t c = begin; c < end; ++c) s += row[c] * coeffs[c];
            y[r] = s;
        }
        return y;
    }

    // Block-diagonal matrix of class Grams X_i^T X_i, i.e. the class-diagonal
    // blocks of X^T X with everything else zeroed.
    Matrix competition_matrix() const {
        const Matrix G = gram(atoms_);
        Matrix M(atom_count(), atom_count());
        for (std::size_t i = 0; i < class_count(); ++i) {
            const std::size_t begin = class_offsets_[i];
            const std::size_t end = class_offsets_[i + 1];
            for (std::size_t r = begin; r < end; ++r)
                for (std::size_t c = begin; c < end; ++c) M(r, c) = G(r, c);
        }
        return M;
    }

private:
    Matrix atoms_;
    std::vector<std::size_t> class_sizes_;
    std::vector<std::size_t> class_offsets_;
};

}  // namespace rbcm
