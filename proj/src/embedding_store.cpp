#include "knnad/embedding_store.hpp"

#include "knnad/error.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

namespace knnad {

EmbeddingMatrix::EmbeddingMatrix(std::size_t count, std::size_t dim, std::vector<float> data)
    : count_(count), dim_(dim), data_(std::move(data)) {
    if (dim_ == 0) {
        throw ShapeError("embedding dim must be >= 1");
    }
    if (data_.size() != count_ * dim_) {
        throw ShapeError("embedding data length " + std::to_string(data_.size()) +
                         " != count * dim = " + std::to_string(count_ * dim_));
    }
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t count, std::size_t dim)
    : EmbeddingMatrix(count, dim, std::vector<float>(count * dim, 0.0f)) {}

void EmbeddingMatrix::validate_finite() const {
    for (std::size_t i = 0; i < count_; ++i) {
        for (float v : row(i)) {
            if (!std::isfinite(v)) {
                throw ValidationError("non-finite value in row " + std::to_string(i));
            }
        }
    }
}

EmbeddingMatrix EmbeddingMatrix::select_rows(std::span<const std::size_t> indices) const {
    std::vector<float> out;
    out.reserve(indices.size() * dim_);
    for (std::size_t i : indices) {
        if (i >= count_) {
            throw ParameterError("row index " + std::to_string(i) + " out of range");
        }
        auto r = row(i);
        out.insert(out.end(), r.begin(), r.end());
    }
    return EmbeddingMatrix(indices.size(), dim_, std::move(out));
}

EmbeddingMatrixBuilder::EmbeddingMatrixBuilder(std::size_t dim, std::size_t reserve_rows) : dim_(dim) {
    if (dim_ == 0) {
        throw ShapeError("embedding dim must be >= 1");
    }
    data_.reserve(reserve_rows * dim_);
}

void EmbeddingMatrixBuilder::push_row(std::span<const float> row) {
    if (row.size() != dim_) {
        throw ShapeError("row has dim " + std::to_string(row.size()) + ", expected " + std::to_string(dim_));
    }
    data_.insert(data_.end(), row.begin(), row.end());
    ++count_;
}

EmbeddingMatrix EmbeddingMatrixBuilder::build() && {
    return EmbeddingMatrix(count_, dim_, std::move(data_));
}

LabeledDataset::LabeledDataset(EmbeddingMatrix e, LabelVector l) : embeddings(std::move(e)), labels(std::move(l)) {
    if (labels.size() != embeddings.count()) {
        throw LengthError("label count " + std::to_string(labels.size()) + " != embedding count " +
                          std::to_string(embeddings.count()));
    }
}

namespace {

static_assert(std::numeric_limits<float>::is_iec559);

template <typename T>
void put_le(std::uint8_t* dst, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        dst[i] = static_cast<std::uint8_t>(v >> (8 * i));
    }
}

template <typename T>
T get_le(const std::uint8_t* src) {
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        v |= static_cast<T>(src[i]) << (8 * i);
    }
    return v;
}

// Rows are written in chunks to bound the temporary buffer.
constexpr std::size_t kChunkFloats = 1 << 16;

}  // namespace

void write_embeddings(const EmbeddingMatrix& m, std::ostream& out) {
    if (m.dim() > std::numeric_limits<std::uint32_t>::max()) {
        throw ShapeError("dim does not fit the DN2E header");
    }
    std::array<std::uint8_t, kHeaderSize> header{};
    std::memcpy(header.data(), "DN2E", 4);
    put_le<std::uint32_t>(header.data() + 4, kFormatVersion);
    put_le<std::uint32_t>(header.data() + 8, static_cast<std::uint32_t>(m.dim()));
    put_le<std::uint64_t>(header.data() + 12, static_cast<std::uint64_t>(m.count()));
    header[20] = kDtypeF32;
    out.write(reinterpret_cast<const char*>(header.data()), header.size());

    auto values = m.data();
    std::vector<std::uint8_t> buf;
    for (std::size_t start = 0; start < values.size(); start += kChunkFloats) {
        std::size_t n = std::min(kChunkFloats, values.size() - start);
        buf.resize(n * 4);
        for (std::size_t i = 0; i < n; ++i) {
            put_le<std::uint32_t>(buf.data() + 4 * i, std::bit_cast<std::uint32_t>(values[start + i]));
        }
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    }
    if (!out) {
        throw IoError("failed writing DN2E stream");
    }
}

EmbeddingMatrix read_embeddings(std::istream& in) {
    std::array<std::uint8_t, kHeaderSize> header{};
    in.read(reinterpret_cast<char*>(header.data()), header.size());
    if (in.gcount() != static_cast<std::streamsize>(header.size())) {
        throw LengthError("truncated DN2E header");
    }
    if (std::memcmp(header.data(), "DN2E", 4) != 0) {
        throw FormatError("bad magic, not a DN2E file");
    }
    auto version = get_le<std::uint32_t>(header.data() + 4);
    if (version != kFormatVersion) {
        throw FormatError("unsupported DN2E version " + std::to_string(version));
    }
    auto dim = get_le<std::uint32_t>(header.data() + 8);
    auto count = get_le<std::uint64_t>(header.data() + 12);
    if (header[20] != kDtypeF32) {
        throw FormatError("unsupported DN2E dtype " + std::to_string(header[20]));
    }
    if (header[21] != 0 || header[22] != 0 || header[23] != 0) {
        throw FormatError("DN2E reserved header bytes must be zero");
    }
    if (dim == 0) {
        throw FormatError("DN2E dim must be >= 1");
    }
    if (count > std::numeric_limits<std::size_t>::max() / dim / 4) {
        throw FormatError("DN2E count * dim overflows");
    }

    std::size_t total = static_cast<std::size_t>(count) * dim;
    std::vector<float> data;
    std::vector<std::uint8_t> buf;
    for (std::size_t start = 0; start < total; start += kChunkFloats) {
        std::size_t n = std::min(kChunkFloats, total - start);
        buf.resize(n * 4);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
            throw LengthError("truncated DN2E payload: expected " + std::to_string(total) + " values, got " +
                              std::to_string(start + static_cast<std::size_t>(in.gcount()) / 4));
        }
        for (std::size_t i = 0; i < n; ++i) {
            data.push_back(std::bit_cast<float>(get_le<std::uint32_t>(buf.data() + 4 * i)));
        }
    }
    EmbeddingMatrix m(static_cast<std::size_t>(count), dim, std::move(data));
    m.validate_finite();
    return m;
}

void write_embeddings_file(const EmbeddingMatrix& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    try {
        write_embeddings(m, out);
        out.close();
        if (!out) {
            throw IoError("failed writing DN2E stream");
        }
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

EmbeddingMatrix read_embeddings_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    try {
        return read_embeddings(in);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    } catch (const LengthError& e) {
        throw LengthError(path.string() + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

LabelVector read_labels(std::istream& in, std::size_t expected_count) {
    LabelVector labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        Label v = 0;
        auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
        if (line.empty() || ec != std::errc{} || ptr != line.data() + line.size() || v < 0) {
            throw ParseError("line " + std::to_string(line_no) + ": not a non-negative integer: '" + line + "'");
        }
        labels.push_back(v);
    }
    if (labels.size() != expected_count) {
        throw LengthError("expected " + std::to_string(expected_count) + " labels, got " +
                          std::to_string(labels.size()));
    }
    return labels;
}

LabelVector read_labels_file(const std::filesystem::path& path, std::size_t expected_count) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    try {
        return read_labels(in, expected_count);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    } catch (const LengthError& e) {
        throw LengthError(path.string() + ": " + e.what());
    }
}

void write_labels(std::span<const Label> labels, std::ostream& out) {
    for (Label l : labels) {
        out << l << '\n';
    }
    if (!out) {
        throw IoError("failed writing labels");
    }
}

}  // namespace knnad
