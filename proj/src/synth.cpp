#include "zsplit/synth.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "zsplit/rng.hpp"

namespace zsplit {

void SynthConfig::check() const {
    if (identity_count < 1) throw std::invalid_argument("identity_count must be >= 1");
    if (!(mean_images_per_identity >= 1.0)) {
        throw std::invalid_argument("mean_images_per_identity must be >= 1");
    }
    if (attribute_count < 1) throw std::invalid_argument("attribute_count must be >= 1");
    if (!(prevalence_lo > 0.0 && prevalence_hi < 1.0 && prevalence_lo <= prevalence_hi)) {
        throw std::invalid_argument("prevalence range must satisfy 0 < lo <= hi < 1");
    }
    if (!(identity_label_coverage >= 0.0 && identity_label_coverage <= 1.0)) {
        throw std::invalid_argument("identity_label_coverage must lie in [0,1]");
    }
    if (!(flip_noise >= 0.0 && flip_noise <= 1.0)) {
        throw std::invalid_argument("flip_noise must lie in [0,1]");
    }
}

namespace {

std::string padded(const char* prefix, std::size_t value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%s%06zu", prefix, value);
    return buffer;
}

/// Geometric draw on {1, 2, ...} by inversion of the CDF.
std::size_t geometric_images(Rng& rng, double mean) {
    const double p = 1.0 / mean;
    if (p >= 1.0) return 1;
    const double u = rng.uniform01();
    const double k = std::floor(std::log1p(-u) / std::log1p(-p));
    return 1 + static_cast<std::size_t>(k);
}

}  // namespace

Dataset generate(const SynthConfig& config) {
    config.check();
    Rng rng(config.seed);

    Dataset dataset;
    dataset.catalog.names.reserve(config.attribute_count);
    for (std::size_t j = 0; j < config.attribute_count; ++j) {
        dataset.catalog.names.push_back("a" + std::to_string(j));
    }

    std::vector<double> prevalence(config.attribute_count);
    for (double& p : prevalence) {
        p = config.prevalence_lo + rng.uniform01() * (config.prevalence_hi - config.prevalence_lo);
    }

    std::vector<std::uint8_t> base(config.attribute_count);
    std::size_t image_counter = 0;
    for (std::size_t t = 0; t < config.identity_count; ++t) {
        const std::size_t images = geometric_images(rng, config.mean_images_per_identity);
        for (std::size_t j = 0; j < config.attribute_count; ++j) {
            base[j] = rng.bernoulli(prevalence[j]) ? 1 : 0;
        }
        const std::string identity = padded("p", t);
        for (std::size_t k = 0; k < images; ++k) {
            Record record;
            record.image_id = padded("i", image_counter++);
            if (rng.uniform01() < config.identity_label_coverage) record.identity = identity;
            record.labels = base;
            for (std::size_t j = 0; j < config.attribute_count; ++j) {
                if (rng.bernoulli(config.flip_noise)) record.labels[j] ^= 1;
            }
            dataset.records.push_back(std::move(record));
        }
    }
    return dataset;
}

}  // namespace zsplit
