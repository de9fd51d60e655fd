#include "corotree/volume.hpp"

#include <cmath>
#include <string>

namespace corotree {

void validate(const Volume& volume) {
    for (int d = 0; d < 3; ++d) {
        if (volume.dims[d] < 1) {
            throw ValidationError("volume dims must be >= 1");
        }
        if (!(volume.spacing[d] > 0.0) || !std::isfinite(volume.spacing[d])) {
            throw ValidationError("volume spacing must be positive");
        }
    }
    if (!is_finite(volume.origin)) {
        throw ValidationError("volume origin must be finite");
    }
    if (volume.voxels.size() != volume.voxel_count()) {
        throw ValidationError("voxel count " + std::to_string(volume.voxels.size()) +
                              " does not match dims product " +
                              std::to_string(volume.voxel_count()));
    }
}

double sample_trilinear(const Volume& volume, const Point3& world, double outside_value,
                        bool* inside) {
    const double gx = (world.x - volume.origin.x) / volume.spacing[0];
    const double gy = (world.y - volume.origin.y) / volume.spacing[1];
    const double gz = (world.z - volume.origin.z) / volume.spacing[2];

    const bool in = gx >= 0.0 && gx <= volume.dims[0] - 1 && gy >= 0.0 &&
                    gy <= volume.dims[1] - 1 && gz >= 0.0 && gz <= volume.dims[2] - 1;
    if (inside != nullptr) {
        *inside = in;
    }
    if (!in) {
        return outside_value;
    }

    const auto lo = [](double g, int n) {
        int i = static_cast<int>(g);
        if (i > n - 2) i = n - 2;  // g == n-1 lands on the last cell with fraction 1
        if (i < 0) i = 0;
        return i;
    };
    const int x0 = lo(gx, volume.dims[0]);
    const int y0 = lo(gy, volume.dims[1]);
    const int z0 = lo(gz, volume.dims[2]);
    const int x1 = std::min(x0 + 1, volume.dims[0] - 1);
    const int y1 = std::min(y0 + 1, volume.dims[1] - 1);
    const int z1 = std::min(z0 + 1, volume.dims[2] - 1);
    const double fx = volume.dims[0] > 1 ? gx - x0 : 0.0;
    const double fy = volume.dims[1] > 1 ? gy - y0 : 0.0;
    const double fz = volume.dims[2] > 1 ? gz - z0 : 0.0;

    const double c00 = volume.at(x0, y0, z0) * (1.0 - fx) + volume.at(x1, y0, z0) * fx;
    const double c10 = volume.at(x0, y1, z0) * (1.0 - fx) + volume.at(x1, y1, z0) * fx;
    const double c01 = volume.at(x0, y0, z1) * (1.0 - fx) + volume.at(x1, y0, z1) * fx;
    const double c11 = volume.at(x0, y1, z1) * (1.0 - fx) + volume.at(x1, y1, z1) * fx;
    const double c0 = c00 * (1.0 - fy) + c10 * fy;
    const double c1 = c01 * (1.0 - fy) + c11 * fy;
    return c0 * (1.0 - fz) + c1 * fz;
}

}  // namespace corotree
