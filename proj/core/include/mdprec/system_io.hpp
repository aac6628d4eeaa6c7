#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "mdprec/block_system.hpp"
#include "mdprec/matrix_market.hpp"
#include "mdprec/probgen.hpp"

namespace mdprec {

struct LoadedSystem {
    BlockSystem system;
    /// rhs.vec was missing and both right-hand sides were set to zero.
    bool rhs_defaulted = false;
    /// Raw meta.json text.
    std::string meta_json;
};

/// Writes a.mtx, b1t.mtx, b2.mtx, c.mtx, rhs.vec and meta.json into dir
/// (created when missing). Generator metadata and config are recorded when given.
void save_system(const BlockSystem& sys, const std::filesystem::path& dir,
                 const probgen::GenMetadata* meta = nullptr,
                 const probgen::GenConfig* gen = nullptr,
                 mm::FloatFormat fmt = mm::FloatFormat::shortest);

/// Reads the file set written by save_system and validates the system.
/// Throws IoError on unreadable or malformed files and DimensionError /
/// InvariantError when the blocks do not fit together.
LoadedSystem load_system(const std::filesystem::path& dir);

} // namespace mdprec
