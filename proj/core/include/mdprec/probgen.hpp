#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mdprec/block_system.hpp"

namespace mdprec::probgen {

enum class ElementCountMode { fixed, uniform };

struct GenConfig {
    std::array<Index, 3> solid_grid{10, 10, 10}; ///< cells per direction of the unit cube
    Index dofs_per_node = 3;                     ///< 1 or 3
    double solid_modulus = 1.0;                  ///< E^S
    Index fiber_count = 50;
    Index elements_per_fiber = 1;
    ElementCountMode element_count_mode = ElementCountMode::fixed;
    double beam_modulus = 10.0;   ///< E^B
    double penalty_pos = 10.0;    ///< epsilon; 0 disables the coupling
    double penalty_rot = 0.0;     ///< rotational-analogue penalty (9 dofs per beam node only)
    double fiber_length = 0.25;   ///< relative to the cube edge
    double fiber_radius = 0.005;  ///< metadata only
    Index dofs_per_beam_node = 6; ///< 6: symmetric element family, 9: sparse element family
    /// Eigenvalue (relative to E^B) of the tangent-only mode of each 6-dof
    /// element; the remaining eigenvalues are uniform in [0.1, 1].
    double soft_mode_ratio = 1e-5;
    /// Relative size of the skew part added to 9-dof element matrices.
    double skew_perturbation = 0.0;
    /// Relative extra weight of the rotational coupling in B2.
    double rot_asymmetry = 0.25;
    Index max_placement_attempts = 10000;
    std::uint64_t seed = 1;

    void validate() const;
};

struct FiberInfo {
    std::array<double, 3> start;
    std::array<double, 3> end;
    Index elements = 0;
};

struct GenMetadata {
    Index n_solid_dofs = 0;
    Index n_beam_dofs = 0;
    std::vector<FiberInfo> fibers;
    std::vector<Index> beam_block_boundaries{0};
};

struct Generated {
    BlockSystem system;
    GenMetadata meta;
};

/// Deterministic for a fixed config (including the seed).
Generated generate(const GenConfig& cfg);

/// Solid stiffness surrogate alone (clamped face eliminated).
CsrMatrix solid_stiffness(const GenConfig& cfg);

/// Total number of solid dofs after eliminating the clamped face.
Index solid_dof_count(const GenConfig& cfg);

} // namespace mdprec::probgen
