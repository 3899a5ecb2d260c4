#pragma once

#include <Eigen/Core>

#define NELA_STRINGIFY_DETAIL(x) #x
#define NELA_STRINGIFY(x) NELA_STRINGIFY_DETAIL(x)

namespace nela {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kEigenVersion =
    NELA_STRINGIFY(EIGEN_WORLD_VERSION) "." NELA_STRINGIFY(EIGEN_MAJOR_VERSION) "." NELA_STRINGIFY(
        EIGEN_MINOR_VERSION);
#if defined(__VERSION__)
inline constexpr const char* kCompiler = __VERSION__;
#else
inline constexpr const char* kCompiler = "unknown";
#endif

}  // namespace nela
