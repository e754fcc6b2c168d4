#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace knnad {

/// Dense row-major N x D matrix of finite 32-bit floats.
///
/// Immutable once constructed; the constructor enforces the shape invariant
/// but not finiteness, which is checked once at read time (`read_embeddings`)
/// or on demand with `validate_finite`.
class EmbeddingMatrix {
public:
    EmbeddingMatrix() = default;
    EmbeddingMatrix(std::size_t count, std::size_t dim, std::vector<float> data);
    /// Zero-filled matrix.
    EmbeddingMatrix(std::size_t count, std::size_t dim);

    std::size_t count() const noexcept { return count_; }
    std::size_t dim() const noexcept { return dim_; }
    bool empty() const noexcept { return count_ == 0; }

    std::span<const float> row(std::size_t i) const noexcept {
        return {data_.data() + i * dim_, dim_};
    }
    std::span<const float> data() const noexcept { return data_; }

    /// Throws ValidationError naming the first row holding NaN or Inf.
    void validate_finite() const;

    /// New matrix made of the given rows, in the given order.
    EmbeddingMatrix select_rows(std::span<const std::size_t> indices) const;

    friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

private:
    std::size_t count_ = 0;
    std::size_t dim_ = 1;
    std::vector<float> data_;
};

/// Builds a matrix row by row. Used by the pooling and protocol code.
class EmbeddingMatrixBuilder {
public:
    explicit EmbeddingMatrixBuilder(std::size_t dim, std::size_t reserve_rows = 0);
    void push_row(std::span<const float> row);
    std::size_t count() const noexcept { return count_; }
    EmbeddingMatrix build() &&;

private:
    std::size_t dim_;
    std::size_t count_ = 0;
    std::vector<float> data_;
};

using Label = std::int64_t;
using LabelVector = std::vector<Label>;

struct LabeledDataset {
    EmbeddingMatrix embeddings;
    LabelVector labels;

    LabeledDataset() = default;
    /// Throws LengthError when label and row counts differ.
    LabeledDataset(EmbeddingMatrix embeddings, LabelVector labels);

    std::size_t count() const noexcept { return embeddings.count(); }
};

// DN2E binary format, little-endian:
//   [0,4)   magic "DN2E"
//   [4,8)   version u32 = 1
//   [8,12)  dim u32
//   [12,20) count u64
//   [20]    dtype u8 (0 = f32)
//   [21,24) reserved, zero
//   then count*dim f32 values, row-major.
inline constexpr std::size_t kHeaderSize = 24;
inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::uint8_t kDtypeF32 = 0;

void write_embeddings(const EmbeddingMatrix& m, std::ostream& out);
EmbeddingMatrix read_embeddings(std::istream& in);

void write_embeddings_file(const EmbeddingMatrix& m, const std::filesystem::path& path);
EmbeddingMatrix read_embeddings_file(const std::filesystem::path& path);

/// Newline-delimited base-10 non-negative integers, exactly `expected_count`
/// lines. A trailing newline on the last line is optional.
LabelVector read_labels(std::istream& in, std::size_t expected_count);
LabelVector read_labels_file(const std::filesystem::path& path, std::size_t expected_count);
void write_labels(std::span<const Label> labels, std::ostream& out);

}  // namespace knnad
