#pragma once

#include <functional>
#include <memory>

#include "torsionlab/connection.hpp"
#include "torsionlab/errors.hpp"
#include "torsionlab/mesh.hpp"

namespace testing_helpers {

inline std::shared_ptr<const tl::MeshGraph> mesh(const tl::SurfaceSpec& s, int n) {
    return std::make_shared<const tl::MeshGraph>(tl::discretize(tl::build_surface(s), n));
}

// C_k: cycle on k vertices, as the unit-height cylinder at n = 1
inline std::shared_ptr<const tl::MeshGraph> cycle_graph(int k) { return mesh(tl::SurfaceSpec::cylinder(k, 1), 1); }

inline tl::ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const tl::Error& e) {
        return e.code();
    }
    return tl::ErrorCode::ConfigError;
}

}  // namespace testing_helpers
