#include "octplaque/splits.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace octplaque {

std::pair<DatasetManifest, DatasetManifest> patient_split(
    const DatasetManifest& manifest, double test_fraction_patients,
    RngStream& rng) {
  if (test_fraction_patients < 0.0 || test_fraction_patients > 1.0)
    throw std::invalid_argument("test fraction must be in [0,1]");
  auto patients = manifest.patient_ids();
  if (patients.size() < 2)
    throw std::invalid_argument("patient split needs at least 2 patients");

  rng.shuffle(patients);
  std::size_t n_test = static_cast<std::size_t>(
      std::llround(test_fraction_patients * static_cast<double>(patients.size())));
  if (test_fraction_patients > 0.0 && n_test == 0) n_test = 1;
  if (n_test >= patients.size() && test_fraction_patients < 1.0)
    n_test = patients.size() - 1;

  std::vector<std::string> test_patients(patients.begin(),
                                         patients.begin() + n_test);
  std::vector<std::string> train_patients(patients.begin() + n_test,
                                          patients.end());
  return {filter_patients(manifest, train_patients, SplitTag::train),
          filter_patients(manifest, test_patients, SplitTag::test)};
}

std::vector<std::pair<DatasetManifest, DatasetManifest>> kfold(
    const DatasetManifest& manifest, int k) {
  const auto patients = manifest.patient_ids();
  if (k < 2) throw std::invalid_argument("kfold requires k >= 2");
  if (k > static_cast<int>(patients.size()))
    throw std::invalid_argument("kfold: more folds than patients");

  // Balanced contiguous chunks; the first (n mod k) folds get one extra.
  const int n = static_cast<int>(patients.size());
  const int base = n / k;
  const int extra = n % k;
  std::vector<std::pair<DatasetManifest, DatasetManifest>> folds;
  int at = 0;
  for (int f = 0; f < k; ++f) {
    const int len = base + (f < extra ? 1 : 0);
    std::vector<std::string> val_patients(patients.begin() + at,
                                          patients.begin() + at + len);
    std::vector<std::string> train_patients;
    train_patients.reserve(patients.size() - val_patients.size());
    for (int i = 0; i < n; ++i)
      if (i < at || i >= at + len) train_patients.push_back(patients[i]);
    folds.emplace_back(filter_patients(manifest, train_patients, SplitTag::train),
                       filter_patients(manifest, val_patients, SplitTag::val));
    at += len;
  }
  return folds;
}

std::vector<double> class_weights(const DatasetManifest& manifest,
                                  bool binary) {
  const int n_classes = binary ? 2 : kNumClasses;
  std::vector<long long> counts(n_classes, 0);
  for (const auto& f : manifest.frames) {
    const int c = binary ? binary_class(f.label) : static_cast<int>(f.label);
    ++counts[c];
  }
  int present = 0;
  for (long long c : counts)
    if (c > 0) ++present;
  if (present < 2)
    throw std::invalid_argument(
        "class weights need at least two classes present");
  for (int c = 0; c < n_classes; ++c)
    if (counts[c] == 0)
      throw std::invalid_argument("class " + std::to_string(c) +
                                  " absent from manifest");

  const double total = static_cast<double>(manifest.frames.size());
  std::vector<double> inv(n_classes);
  double mean_inv = 0.0;
  for (int c = 0; c < n_classes; ++c) {
    inv[c] = total / static_cast<double>(counts[c]);
    mean_inv += inv[c];
  }
  mean_inv /= n_classes;
  for (double& w : inv) w /= mean_inv;
  return inv;
}

}  // namespace octplaque
