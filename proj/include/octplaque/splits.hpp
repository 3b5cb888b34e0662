#pragma once

#include <utility>
#include <vector>

#include "octplaque/manifest.hpp"
#include "octplaque/rng.hpp"

namespace octplaque {

/// Patient-level holdout: a random `test_fraction_patients` share of the
/// patients (rounded to the nearest count, at least 1 when the fraction is
/// positive) goes to the test manifest. No patient appears on both sides.
std::pair<DatasetManifest, DatasetManifest> patient_split(
    const DatasetManifest& manifest, double test_fraction_patients,
    RngStream& rng);

/// Patient-level k-fold: patients are chunked into k balanced validation
/// folds in manifest order (deterministic). Every patient lands in exactly
/// one validation fold. Requires 2 <= k <= number of patients.
std::vector<std::pair<DatasetManifest, DatasetManifest>> kfold(
    const DatasetManifest& manifest, int k);

/// Inverse-frequency class weights normalized to mean 1:
/// w_c = (1/f_c) / mean_c(1/f_c). Only classes present in the manifest get a
/// weight slot; a single-class manifest is an error.
std::vector<double> class_weights(const DatasetManifest& manifest,
                                  bool binary);

}  // namespace octplaque
