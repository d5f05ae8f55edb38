#pragma once

#include <cstdint>
#include <string>

#include "lago/rng.hpp"
#include "lago/types.hpp"

// Generic defense-noise stand-in: i.i.d. Gaussian or Laplace perturbation of
// embedding matrices, deterministic per seed.

namespace lago {

enum class NoiseMechanism { none, gaussian, laplace };

inline NoiseMechanism parse_noise_mechanism(const std::string& name) {
    if (name == "none") return NoiseMechanism::none;
    if (name == "gaussian") return NoiseMechanism::gaussian;
    if (name == "laplace") return NoiseMechanism::laplace;
    throw ConfigError("unknown noise mechanism '" + name + "' (none|gaussian|laplace)");
}

inline std::string noise_mechanism_name(NoiseMechanism m) {
    switch (m) {
        case NoiseMechanism::none: return "none";
        case NoiseMechanism::gaussian: return "gaussian";
        case NoiseMechanism::laplace: return "laplace";
    }
    return "none";
}

inline Matrix inject_noise(const Matrix& e, NoiseMechanism mechanism, double scale,
                           std::uint64_t seed) {
    if (scale < 0.0) throw ConfigError("noise scale must be >= 0");
    if (mechanism == NoiseMechanism::none || scale == 0.0) return e;
    const rng::Key key{seed, rng::Stream::injected_noise, 0};
    Matrix out = e;
    const auto cols = e.cols();
    for (Eigen::Index r = 0; r < e.rows(); ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto counter = static_cast<std::uint64_t>(r * cols + c);
            out(r, c) += mechanism == NoiseMechanism::gaussian
                             ? scale * rng::normal(key, counter)
                             : rng::laplace(key, counter, scale);
        }
    }
    return out;
}

} // namespace lago
