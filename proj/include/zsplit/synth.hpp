#pragma once

#include <cstddef>
#include <cstdint>

#include "zsplit/core.hpp"

namespace zsplit {

/// Knobs for the synthetic annotation generator. Labels are drawn once per
/// identity and copied to its images with a small per-image flip noise, so
/// images of one identity look near-identical to the metrics, the effect a
/// leaked random split overstates.
struct SynthConfig {
    std::size_t identity_count = 100;
    double mean_images_per_identity = 3.0;  // geometric, support {1, 2, ...}
    std::size_t attribute_count = 10;
    double prevalence_lo = 0.1;
    double prevalence_hi = 0.9;
    double identity_label_coverage = 1.0;  // fraction of images that keep their identity
    double flip_noise = 0.02;
    std::uint64_t seed = 0;

    void check() const;  // throws std::invalid_argument on out-of-range fields
};

/// Deterministic for a fixed config (seed included). The result always
/// passes validate_dataset.
Dataset generate(const SynthConfig& config);

}  // namespace zsplit
