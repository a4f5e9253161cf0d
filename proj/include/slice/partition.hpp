// Partition layouts: the assignment of every latent grid position to
// exactly one semantic factor, forming four disjoint regions that cover
// the grid.
//
// Built-in geometries:
//   quadrant          ceil-split into four quadrants; top/left get the
//                     extra row/col on odd dims. sub=top-left,
//                     env=top-right, act=bottom-left, det=bottom-right.
//   row-stripes       four contiguous row bands, band k = rows
//                     [floor(k*h/4), floor((k+1)*h/4)); needs h >= 4.
//   block-interleave  b x b tiles assigned by (tile_i + tile_j) mod 4.
//   explicit-mask     caller-provided dense factor map.
//
// Mask file format: one text line "h w", then h lines of w characters
// from {S, E, A, D}.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "slice/error.hpp"
#include "slice/factor.hpp"
#include "slice/latent.hpp"

namespace slice {

struct LayoutSpec {
    enum class Kind { Quadrant, RowStripes, BlockInterleave, ExplicitMask };

    Kind kind = Kind::Quadrant;
    std::uint32_t block = 1;         // tile size for BlockInterleave
    std::vector<std::uint8_t> mask;  // factor index per cell for ExplicitMask

    static LayoutSpec quadrant() { return {}; }
    static LayoutSpec row_stripes() { return {Kind::RowStripes, 1, {}}; }
    static LayoutSpec block_interleave(std::uint32_t b) { return {Kind::BlockInterleave, b, {}}; }
    static LayoutSpec explicit_mask(std::vector<std::uint8_t> cells) {
        return {Kind::ExplicitMask, 1, std::move(cells)};
    }

    std::string name() const {
        switch (kind) {
        case Kind::Quadrant: return "quadrant";
        case Kind::RowStripes: return "row-stripes";
        case Kind::BlockInterleave: return "block-interleave:" + std::to_string(block);
        case Kind::ExplicitMask: return "explicit-mask";
        }
        return "?";
    }
};

struct PartitionLayout {
    std::uint32_t h = 0;
    std::uint32_t w = 0;
    std::vector<std::uint8_t> assignment;  // factor index per cell, row-major
    FactorMap<std::uint32_t> region_sizes;

    std::size_t position_count() const { return std::size_t(h) * w; }

    FactorKey factor_at(std::uint32_t i, std::uint32_t j) const {
        return static_cast<FactorKey>(assignment[std::size_t(i) * w + j]);
    }
    FactorKey factor_at(Position p) const { return factor_at(p.i, p.j); }

    bool operator==(const PartitionLayout&) const = default;
};

struct LayoutViolation {
    enum class Kind {
        BadAssignment,  // cell value is not a valid factor index
        EmptyRegion,    // some factor owns no positions
        SizeMismatch,   // recorded region_sizes disagree with the map
        BadShape,       // assignment length != h*w or dims below minimum
    };
    Kind kind;
    Position position{};   // meaningful for BadAssignment
    FactorKey factor = FactorKey::Subject;  // meaningful for EmptyRegion/SizeMismatch
    std::string message;
};

struct LayoutValidation {
    std::vector<LayoutViolation> violations;
    bool ok() const { return violations.empty(); }
};

// Checks the partition invariants: every cell holds exactly one valid
// factor, recorded sizes match a recount, and every region is nonempty.
inline LayoutValidation validate_layout(const PartitionLayout& layout) {
    LayoutValidation result;
    auto add = [&](LayoutViolation v) { result.violations.push_back(std::move(v)); };

    if (layout.h < 2 || layout.w < 2) {
        add({LayoutViolation::Kind::BadShape, {}, FactorKey::Subject,
             "dims too small: " + std::to_string(layout.h) + "x" + std::to_string(layout.w)});
        return result;
    }
    if (layout.assignment.size() != layout.position_count()) {
        add({LayoutViolation::Kind::BadShape, {}, FactorKey::Subject,
             "assignment holds " + std::to_string(layout.assignment.size()) + " cells, expected " +
                 std::to_string(layout.position_count())});
        return result;
    }

    FactorMap<std::uint32_t> counts;
    for (std::uint32_t i = 0; i < layout.h; ++i) {
        for (std::uint32_t j = 0; j < layout.w; ++j) {
            std::uint8_t v = layout.assignment[std::size_t(i) * layout.w + j];
            if (v >= kFactorCount) {
                add({LayoutViolation::Kind::BadAssignment, Position{i, j}, FactorKey::Subject,
                     "position (" + std::to_string(i) + "," + std::to_string(j) +
                         ") does not map to exactly one factor"});
                continue;
            }
            counts[static_cast<FactorKey>(v)] += 1;
        }
    }
    for (FactorKey k : kAllFactors) {
        if (counts[k] == 0) {
            add({LayoutViolation::Kind::EmptyRegion, {}, k,
                 "empty region " + std::string(factor_name(k))});
        }
        if (counts[k] != layout.region_sizes[k]) {
            add({LayoutViolation::Kind::SizeMismatch, {}, k,
                 "recorded size " + std::to_string(layout.region_sizes[k]) + " for " +
                     std::string(factor_name(k)) + ", counted " + std::to_string(counts[k])});
        }
    }
    return result;
}

namespace detail {

inline void assign_quadrant(PartitionLayout& layout) {
    const std::uint32_t row_split = (layout.h + 1) / 2;  // rows [0, ceil(h/2)) are top
    const std::uint32_t col_split = (layout.w + 1) / 2;  // cols [0, ceil(w/2)) are left
    for (std::uint32_t i = 0; i < layout.h; ++i) {
        for (std::uint32_t j = 0; j < layout.w; ++j) {
            bool top = i < row_split;
            bool left = j < col_split;
            FactorKey k = top ? (left ? FactorKey::Subject : FactorKey::Environment)
                              : (left ? FactorKey::Action : FactorKey::Detail);
            layout.assignment[std::size_t(i) * layout.w + j] =
                static_cast<std::uint8_t>(factor_index(k));
        }
    }
}

inline void assign_row_stripes(PartitionLayout& layout) {
    for (std::uint32_t i = 0; i < layout.h; ++i) {
        // band k covers rows [floor(k*h/4), floor((k+1)*h/4))
        std::uint32_t band = 0;
        while (band + 1 < kFactorCount &&
               i >= (std::uint64_t(band + 1) * layout.h) / kFactorCount) {
            ++band;
        }
        for (std::uint32_t j = 0; j < layout.w; ++j)
            layout.assignment[std::size_t(i) * layout.w + j] = static_cast<std::uint8_t>(band);
    }
}

inline void assign_block_interleave(PartitionLayout& layout, std::uint32_t b) {
    for (std::uint32_t i = 0; i < layout.h; ++i) {
        for (std::uint32_t j = 0; j < layout.w; ++j) {
            std::uint32_t tile = (i / b + j / b) % kFactorCount;
            layout.assignment[std::size_t(i) * layout.w + j] = static_cast<std::uint8_t>(tile);
        }
    }
}

}  // namespace detail

inline PartitionLayout build_layout(std::uint32_t h, std::uint32_t w, const LayoutSpec& spec) {
    if (h < 2 || w < 2)
        throw std::invalid_argument("layout dims too small (need h>=2, w>=2)");

    PartitionLayout layout;
    layout.h = h;
    layout.w = w;
    layout.assignment.assign(std::size_t(h) * w, 0);

    switch (spec.kind) {
    case LayoutSpec::Kind::Quadrant:
        detail::assign_quadrant(layout);
        break;
    case LayoutSpec::Kind::RowStripes:
        if (h < kFactorCount)
            throw std::invalid_argument("row-stripes layout needs h >= 4");
        detail::assign_row_stripes(layout);
        break;
    case LayoutSpec::Kind::BlockInterleave:
        if (spec.block < 1)
            throw std::invalid_argument("block-interleave tile size must be >= 1");
        detail::assign_block_interleave(layout, spec.block);
        break;
    case LayoutSpec::Kind::ExplicitMask:
        if (spec.mask.size() != layout.position_count())
            throw Error("explicit mask covers " + std::to_string(spec.mask.size()) +
                        " positions, grid has " + std::to_string(layout.position_count()));
        for (std::uint8_t v : spec.mask)
            if (v >= kFactorCount)
                throw Error("explicit mask holds an invalid factor value");
        layout.assignment = spec.mask;
        break;
    }

    for (std::uint8_t v : layout.assignment)
        layout.region_sizes[static_cast<FactorKey>(v)] += 1;
    for (FactorKey k : kAllFactors) {
        if (layout.region_sizes[k] == 0)
            throw Error("layout spec '" + spec.name() + "' leaves region " +
                        std::string(factor_name(k)) + " empty for " + std::to_string(h) + "x" +
                        std::to_string(w));
    }
    return layout;
}

// Positions of region k in row-major order.
inline std::vector<Position> region_positions(const PartitionLayout& layout, FactorKey k) {
    std::vector<Position> out;
    out.reserve(layout.region_sizes[k]);
    for (std::uint32_t i = 0; i < layout.h; ++i)
        for (std::uint32_t j = 0; j < layout.w; ++j)
            if (layout.factor_at(i, j) == k) out.push_back({i, j});
    return out;
}

inline std::string encode_layout_mask(const PartitionLayout& layout) {
    std::string out = std::to_string(layout.h) + " " + std::to_string(layout.w) + "\n";
    for (std::uint32_t i = 0; i < layout.h; ++i) {
        for (std::uint32_t j = 0; j < layout.w; ++j)
            out.push_back(factor_mask_char(layout.factor_at(i, j)));
        out.push_back('\n');
    }
    return out;
}

// Parses a mask file body and builds a validated layout from it.
inline PartitionLayout parse_layout_mask(const std::string& text) {
    std::istringstream in(text);
    std::uint64_t h = 0, w = 0;
    std::string header;
    if (!std::getline(in, header))
        throw Error("mask: empty input");
    {
        std::istringstream hs(header);
        if (!(hs >> h >> w) || h == 0 || w == 0)
            throw Error("mask: first line must be 'h w'");
        std::string rest;
        if (hs >> rest)
            throw Error("mask: trailing tokens after 'h w'");
    }
    std::vector<std::uint8_t> cells;
    cells.reserve(h * w);
    std::string line;
    for (std::uint64_t i = 0; i < h; ++i) {
        if (!std::getline(in, line))
            throw Error("mask: expected " + std::to_string(h) + " rows, got " + std::to_string(i));
        if (line.size() != w)
            throw Error("mask: row " + std::to_string(i) + " has " +
                        std::to_string(line.size()) + " cells, expected " + std::to_string(w));
        for (char c : line) {
            auto k = parse_factor_mask_char(c);
            if (!k)
                throw Error(std::string("mask: invalid cell character '") + c + "'");
            cells.push_back(static_cast<std::uint8_t>(factor_index(*k)));
        }
    }
    if (std::getline(in, line) && !line.empty())
        throw Error("mask: trailing content after " + std::to_string(h) + " rows");
    return build_layout(static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(w),
                        LayoutSpec::explicit_mask(std::move(cells)));
}

inline void write_mask_file(const std::filesystem::path& path, const PartitionLayout& layout) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw Error("cannot open for writing: " + path.string());
    out << encode_layout_mask(layout);
    if (!out)
        throw Error("write failed: " + path.string());
}

inline PartitionLayout load_mask_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_layout_mask(text);
}

}  // namespace slice
