#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "impedscope/common.hpp"
#include "impedscope/matrix.hpp"

namespace impedscope {

enum class ModelKind : uint8_t { SVM = 0, RF = 1, LR = 2 };

inline const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::SVM: return "svm";
        case ModelKind::RF: return "rf";
        case ModelKind::LR: return "lr";
    }
    return "?";
}

inline ModelKind model_kind_from_string(const std::string& s) {
    if (s == "svm") return ModelKind::SVM;
    if (s == "rf") return ModelKind::RF;
    if (s == "lr") return ModelKind::LR;
    throw ValidationError("unknown model kind: " + s);
}

enum class Kernel : uint8_t { Linear = 0, Poly = 1, Rbf = 2, Sigmoid = 3 };

inline const char* to_string(Kernel k) {
    switch (k) {
        case Kernel::Linear: return "linear";
        case Kernel::Poly: return "poly";
        case Kernel::Rbf: return "rbf";
        case Kernel::Sigmoid: return "sigmoid";
    }
    return "?";
}

inline Kernel kernel_from_string(const std::string& s) {
    if (s == "linear") return Kernel::Linear;
    if (s == "poly") return Kernel::Poly;
    if (s == "rbf") return Kernel::Rbf;
    if (s == "sigmoid") return Kernel::Sigmoid;
    throw ValidationError("unknown kernel: " + s);
}

/// One hyperparameter assignment for any of the three model families.
struct HyperParams {
    ModelKind model = ModelKind::SVM;

    // SVM
    Kernel kernel = Kernel::Rbf;
    double svm_c = 1.0;
    int poly_degree = 3;
    double coef0 = 0.0;
    double gamma = 0.0;  // <= 0 means "scale": 1 / (n_features * var(X))

    // RF
    int n_trees = 100;
    int max_depth = 16;  // <= 0 means unlimited
    double max_features_fraction = 0.3;

    // LR
    double lr_c = 1.0;
    int max_iterations = 200;
    double lr_tolerance = 1e-6;

    void check() const {
        switch (model) {
            case ModelKind::SVM:
                validate(svm_c > 0, "SVM C must be positive");
                break;
            case ModelKind::RF:
                validate(n_trees > 0, "RF needs at least one tree");
                validate(max_features_fraction > 0 && max_features_fraction <= 1.0,
                         "max_features_fraction must lie in (0,1]");
                break;
            case ModelKind::LR:
                validate(lr_c > 0, "LR C must be positive");
                validate(max_iterations > 0, "LR iteration budget must be positive");
                break;
        }
    }

    static HyperParams from_json(const nlohmann::json& j) {
        HyperParams hp;
        hp.model = model_kind_from_string(j.at("model").get<std::string>());
        if (j.contains("kernel")) hp.kernel = kernel_from_string(j.at("kernel").get<std::string>());
        if (hp.model == ModelKind::SVM) hp.svm_c = j.value("C", hp.svm_c);
        hp.poly_degree = j.value("degree", hp.poly_degree);
        hp.coef0 = j.value("coef0", hp.coef0);
        hp.gamma = j.value("gamma", hp.gamma);
        hp.n_trees = j.value("n_trees", hp.n_trees);
        hp.max_depth = j.value("max_depth", hp.max_depth);
        hp.max_features_fraction = j.value("max_features_fraction", hp.max_features_fraction);
        if (hp.model == ModelKind::LR) hp.lr_c = j.value("C", hp.lr_c);
        hp.max_iterations = j.value("max_iterations", hp.max_iterations);
        hp.check();
        return hp;
    }

    std::string describe() const {
        switch (model) {
            case ModelKind::SVM:
                return std::string("svm kernel=") + to_string(kernel) + " C=" + format_num(svm_c);
            case ModelKind::RF:
                return "rf trees=" + std::to_string(n_trees) + " depth=" + std::to_string(max_depth) +
                       " max_features=" + format_num(max_features_fraction);
            case ModelKind::LR:
                return "lr C=" + format_num(lr_c) + " max_iter=" + std::to_string(max_iterations);
        }
        return "?";
    }

private:
    static std::string format_num(double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%g", v);
        return buf;
    }
};

/// Immutable fitted model. predict_proba rows sum to 1 within 1e-9; the hard
/// label is the argmax. Class indices are fixed at fit time.
class TrainedModel {
public:
    virtual ~TrainedModel() = default;
    virtual ModelKind kind() const = 0;
    virtual size_t n_classes() const = 0;
    virtual size_t n_features() const = 0;
    virtual bool converged() const { return true; }
    virtual Matrix predict_proba(const Matrix& x) const = 0;
    virtual void save(std::ostream& out) const = 0;

    std::vector<int> predict(const Matrix& x) const {
        const Matrix p = predict_proba(x);
        std::vector<int> labels(p.rows());
        for (size_t r = 0; r < p.rows(); ++r) {
            size_t best = 0;
            for (size_t c = 1; c < p.cols(); ++c)
                if (p(r, c) > p(r, best)) best = c;
            labels[r] = int(best);
        }
        return labels;
    }
};

namespace detail {

inline void check_training_inputs(const Matrix& x, const std::vector<int>& y) {
    require(x.rows() == y.size() && x.rows() > 0, "training matrix and labels disagree");
    for (const double v : x.data())
        require(std::isfinite(v), "training features must be finite");
    int k = 0;
    for (const int label : y) {
        require(label >= 0, "labels must be non-negative class indices");
        k = std::max(k, label + 1);
    }
    std::vector<size_t> counts(size_t(k), 0);
    for (const int label : y) counts[size_t(label)]++;
    size_t present = 0;
    for (const size_t c : counts) present += c > 0;
    require(present >= 2, "training labels contain a single class");
    require(x.rows() >= present, "fewer rows than classes");
}

inline int class_count(const std::vector<int>& y) {
    int k = 0;
    for (const int label : y) k = std::max(k, label + 1);
    return k;
}

inline void write_bytes(std::ostream& out, const void* p, size_t n) {
    out.write(static_cast<const char*>(p), std::streamsize(n));
}

inline void write_u32(std::ostream& out, uint32_t v) { write_bytes(out, &v, 4); }
inline void write_u64(std::ostream& out, uint64_t v) { write_bytes(out, &v, 8); }
inline void write_f64(std::ostream& out, double v) { write_bytes(out, &v, 8); }
inline void write_f64v(std::ostream& out, const std::vector<double>& v) {
    write_u64(out, v.size());
    write_bytes(out, v.data(), v.size() * 8);
}

inline void read_bytes(std::istream& in, void* p, size_t n) {
    in.read(static_cast<char*>(p), std::streamsize(n));
    require(size_t(in.gcount()) == n, "model file truncated");
}

inline uint32_t read_u32(std::istream& in) { uint32_t v; read_bytes(in, &v, 4); return v; }
inline uint64_t read_u64(std::istream& in) { uint64_t v; read_bytes(in, &v, 8); return v; }
inline double read_f64(std::istream& in) { double v; read_bytes(in, &v, 8); return v; }
inline std::vector<double> read_f64v(std::istream& in) {
    std::vector<double> v(read_u64(in));
    read_bytes(in, v.data(), v.size() * 8);
    return v;
}

inline constexpr uint32_t kModelMagic = 0x4d504d49;  // "IMPM"
inline constexpr uint32_t kModelVersion = 1;

inline void write_model_header(std::ostream& out, ModelKind kind) {
    write_u32(out, kModelMagic);
    write_u32(out, kModelVersion);
    const uint8_t k = uint8_t(kind);
    write_bytes(out, &k, 1);
}

inline ModelKind read_model_header(std::istream& in) {
    validate(read_u32(in) == kModelMagic, "not a model file (bad magic)");
    validate(read_u32(in) == kModelVersion, "unsupported model file version");
    uint8_t k;
    read_bytes(in, &k, 1);
    return ModelKind(k);
}

} // namespace detail

} // namespace impedscope
