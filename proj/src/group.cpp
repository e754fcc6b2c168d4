#include "knnad/group.hpp"

#include "knnad/error.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace knnad {

std::string_view to_string(PoolingMode mode) noexcept {
    switch (mode) {
        case PoolingMode::mean: return "mean";
        case PoolingMode::max: return "max";
        case PoolingMode::concat: return "concat";
    }
    return "unknown";
}

std::optional<PoolingMode> parse_pooling_mode(std::string_view name) noexcept {
    if (name == "mean") return PoolingMode::mean;
    if (name == "max") return PoolingMode::max;
    if (name == "concat") return PoolingMode::concat;
    return std::nullopt;
}

std::vector<float> pool_group(const EmbeddingMatrix& group, PoolingMode mode) {
    if (group.empty()) {
        throw SizeError("cannot pool an empty group");
    }
    const std::size_t dim = group.dim();
    switch (mode) {
        case PoolingMode::mean: {
            std::vector<double> acc(dim, 0.0);
            for (std::size_t i = 0; i < group.count(); ++i) {
                auto r = group.row(i);
                for (std::size_t d = 0; d < dim; ++d) {
                    acc[d] += r[d];
                }
            }
            std::vector<float> out(dim);
            for (std::size_t d = 0; d < dim; ++d) {
                out[d] = static_cast<float>(acc[d] / static_cast<double>(group.count()));
            }
            return out;
        }
        case PoolingMode::max: {
            auto first = group.row(0);
            std::vector<float> out(first.begin(), first.end());
            for (std::size_t i = 1; i < group.count(); ++i) {
                auto r = group.row(i);
                for (std::size_t d = 0; d < dim; ++d) {
                    out[d] = std::max(out[d], r[d]);
                }
            }
            return out;
        }
        case PoolingMode::concat: {
            auto all = group.data();
            return {all.begin(), all.end()};
        }
    }
    throw ParameterError("unknown pooling mode");
}

EmbeddingMatrix pool_groupset(const GroupSet& sets, PoolingMode mode) {
    if (sets.empty()) {
        throw SizeError("group set is empty");
    }
    const std::size_t dim = sets.front().dim();
    const std::size_t members = sets.front().count();
    for (std::size_t g = 0; g < sets.size(); ++g) {
        if (sets[g].dim() != dim) {
            throw ShapeError("group " + std::to_string(g) + " has dim " + std::to_string(sets[g].dim()) +
                             ", expected " + std::to_string(dim));
        }
        if (sets[g].empty()) {
            throw SizeError("group " + std::to_string(g) + " is empty");
        }
        if (mode == PoolingMode::concat && sets[g].count() != members) {
            throw ShapeError("concat pooling needs equal group sizes; group " + std::to_string(g) + " has " +
                             std::to_string(sets[g].count()) + " members, expected " + std::to_string(members));
        }
    }

    const std::size_t out_dim = mode == PoolingMode::concat ? members * dim : dim;
    EmbeddingMatrixBuilder builder(out_dim, sets.size());
    for (const auto& g : sets) {
        builder.push_row(pool_group(g, mode));
    }
    return std::move(builder).build();
}

ScoreVector covariance_trace_score(const GroupSet& sets) {
    ScoreVector scores;
    scores.reserve(sets.size());
    for (std::size_t g = 0; g < sets.size(); ++g) {
        const EmbeddingMatrix& m = sets[g];
        if (m.count() < 2) {
            throw SizeError("group " + std::to_string(g) + " has " + std::to_string(m.count()) +
                            " members; covariance needs at least 2");
        }
        const std::size_t dim = m.dim();
        std::vector<double> mean(dim, 0.0);
        for (std::size_t i = 0; i < m.count(); ++i) {
            auto r = m.row(i);
            for (std::size_t d = 0; d < dim; ++d) {
                mean[d] += r[d];
            }
        }
        for (double& v : mean) {
            v /= static_cast<double>(m.count());
        }
        double ss = 0.0;
        for (std::size_t i = 0; i < m.count(); ++i) {
            auto r = m.row(i);
            for (std::size_t d = 0; d < dim; ++d) {
                double dev = r[d] - mean[d];
                ss += dev * dev;
            }
        }
        scores.push_back(ss / static_cast<double>(m.count() - 1));
    }
    return scores;
}

GroupedRows group_rows(const EmbeddingMatrix& rows, const LabelVector& group_ids) {
    if (group_ids.size() != rows.count()) {
        throw LengthError("group id count " + std::to_string(group_ids.size()) + " != row count " +
                          std::to_string(rows.count()));
    }
    std::map<Label, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < group_ids.size(); ++i) {
        members[group_ids[i]].push_back(i);
    }
    GroupedRows out;
    for (const auto& [id, idx] : members) {
        out.group_ids.push_back(id);
        out.groups.push_back(rows.select_rows(idx));
    }
    return out;
}

}  // namespace knnad
