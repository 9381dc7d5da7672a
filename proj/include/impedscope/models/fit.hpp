#pragma once

#include <fstream>
#include <memory>

#include "impedscope/models/forest.hpp"
#include "impedscope/models/logistic.hpp"
#include "impedscope/models/svm.hpp"

namespace impedscope {

/// Unified fit entry point. Deterministic given (x, y, hyperparams, seed);
/// LR ignores the seed entirely, SVM uses it for calibration folds, RF for
/// per-tree bootstrap/feature streams.
inline std::unique_ptr<TrainedModel> fit(const Matrix& x, const std::vector<int>& y,
                                         const HyperParams& hp, uint64_t seed) {
    hp.check();
    switch (hp.model) {
        case ModelKind::SVM: return fit_svm(x, y, hp, seed);
        case ModelKind::RF: return fit_forest(x, y, hp, seed);
        case ModelKind::LR: return fit_logistic(x, y, hp);
    }
    throw std::runtime_error("unreachable model kind");
}

inline std::unique_ptr<TrainedModel> load_model(std::istream& in) {
    switch (detail::read_model_header(in)) {
        case ModelKind::SVM: return SvmModel::load_body(in);
        case ModelKind::RF: return ForestModel::load_body(in);
        case ModelKind::LR: return LogisticModel::load_body(in);
    }
    throw std::runtime_error("unreachable model kind");
}

inline std::unique_ptr<TrainedModel> load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    validate(in.good(), "model file not readable: " + path);
    return load_model(in);
}

inline void save_model_file(const TrainedModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "cannot write model file: " + path);
    model.save(out);
}

} // namespace impedscope
