#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "corotree/geometry.hpp"

namespace corotree {

// Scalar CT volume in Hounsfield units, x-fastest voxel layout. `origin` is the
// world position of the center of voxel (0,0,0).
struct Volume {
    std::array<int, 3> dims = {1, 1, 1};
    std::array<double, 3> spacing = {1.0, 1.0, 1.0};
    Point3 origin;
    std::vector<float> voxels;

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    }

    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * dims[1] + j) * dims[0] + i;
    }

    float at(int i, int j, int k) const { return voxels[index(i, j, k)]; }
    float& at(int i, int j, int k) { return voxels[index(i, j, k)]; }

    Point3 voxel_center(int i, int j, int k) const {
        return {origin.x + i * spacing[0], origin.y + j * spacing[1], origin.z + k * spacing[2]};
    }
};

void validate(const Volume& volume);  // throws ValidationError

// Trilinear interpolation at a world position. Positions outside the voxel-center
// domain take `outside_value`. `inside` (optional) reports whether the position
// was within the domain.
double sample_trilinear(const Volume& volume, const Point3& world, double outside_value,
                        bool* inside = nullptr);

}  // namespace corotree
