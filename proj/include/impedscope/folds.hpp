#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "impedscope/common.hpp"
#include "impedscope/rng.hpp"

namespace impedscope {

/// Leave-one-patient-group-out split: folds partition patients, never
/// samples, so no patient appears on both sides of any train/test boundary.
struct FoldPlan {
    size_t n_folds = 5;
    uint64_t seed = 0;
    std::vector<std::vector<std::string>> fold_patients;

    size_t fold_of(const std::string& patient) const {
        for (size_t f = 0; f < fold_patients.size(); ++f)
            for (const auto& p : fold_patients[f])
                if (p == patient) return f;
        throw std::runtime_error("patient not in fold plan: " + patient);
    }
};

/// Seeded shuffle of the (sorted, deduplicated) patient list, then round-robin
/// assignment, so group sizes differ by at most one patient.
inline FoldPlan make_lopgo_folds(std::vector<std::string> patient_ids, size_t n_folds,
                                 uint64_t seed) {
    std::sort(patient_ids.begin(), patient_ids.end());
    patient_ids.erase(std::unique(patient_ids.begin(), patient_ids.end()), patient_ids.end());
    validate(n_folds >= 1, "need at least one fold");
    validate(patient_ids.size() >= n_folds, "fewer patients than folds");

    Rng rng(seed);
    rng.shuffle(patient_ids);

    FoldPlan plan;
    plan.n_folds = n_folds;
    plan.seed = seed;
    plan.fold_patients.resize(n_folds);
    for (size_t i = 0; i < patient_ids.size(); ++i)
        plan.fold_patients[i % n_folds].push_back(patient_ids[i]);
    return plan;
}

} // namespace impedscope
