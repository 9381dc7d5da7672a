#pragma once

#include <array>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "impedscope/common.hpp"

namespace impedscope {

/// Clinical grouping of a raw pathology reading. Other is carried through the
/// data model but excluded from every classification task.
enum class Category { Healthy = 0, Cancer = 1, HighGradeDysplasia = 2, NonMalignant = 3, Other = 4 };

inline const char* to_string(Category c) {
    switch (c) {
        case Category::Healthy: return "Healthy";
        case Category::Cancer: return "Cancer";
        case Category::HighGradeDysplasia: return "HighGradeDysplasia";
        case Category::NonMalignant: return "NonMalignant";
        case Category::Other: return "Other";
    }
    return "?";
}

inline Category category_from_string(const std::string& s) {
    for (const Category c : {Category::Healthy, Category::Cancer, Category::HighGradeDysplasia,
                             Category::NonMalignant, Category::Other})
        if (s == to_string(c)) return c;
    throw ValidationError("unknown category name: " + s);
}

struct TissueLabel {
    std::string raw_pathology;
    Category category = Category::Other;
};

/// Maps raw pathology strings to the two-tier categories. The vocabulary is
/// config data; mapping an unlisted string is a hard error that names the
/// offending entry.
class PathologyVocabulary {
public:
    static PathologyVocabulary from_json(const nlohmann::json& j) {
        PathologyVocabulary v;
        for (const auto& [raw, cat] : j.at("vocabulary").items())
            v.map_[raw] = category_from_string(cat.get<std::string>());
        return v;
    }

    static PathologyVocabulary load(const std::string& path) {
        std::ifstream in(path);
        validate(in.good(), "pathology config not readable: " + path);
        nlohmann::json j;
        in >> j;
        return from_json(j);
    }

    /// Built-in defaults seeded with the clinical grouping used throughout.
    static PathologyVocabulary defaults() {
        PathologyVocabulary v;
        v.map_ = {
            {"healthy", Category::Healthy},
            {"healthy contralateral", Category::Healthy},
            {"oscc", Category::Cancer},
            {"carcinoma", Category::Cancer},
            {"cancer", Category::Cancer},
            {"moderate dysplasia", Category::HighGradeDysplasia},
            {"severe dysplasia", Category::HighGradeDysplasia},
            {"carcinoma in situ", Category::HighGradeDysplasia},
            {"cis", Category::HighGradeDysplasia},
            {"mild dysplasia", Category::NonMalignant},
            {"mild-moderate dysplasia", Category::NonMalignant},
            {"hyperkeratosis", Category::NonMalignant},
            {"benign", Category::NonMalignant},
            {"normal", Category::NonMalignant},
            {"other", Category::Other},
        };
        return v;
    }

    TissueLabel map_label(const std::string& raw_pathology) const {
        auto it = map_.find(raw_pathology);
        if (it == map_.end())
            throw ValidationError("pathology string not in vocabulary: '" + raw_pathology + "'");
        return {raw_pathology, it->second};
    }

private:
    std::map<std::string, Category> map_;
};

/// One of the three classification tasks; holds the class set in fixed order.
struct TaskSpec {
    int task_id = 1;
    std::vector<Category> classes;

    static TaskSpec make(int task_id) {
        switch (task_id) {
            case 1: return {1, {Category::Healthy, Category::Cancer}};
            case 2: return {2, {Category::Cancer, Category::HighGradeDysplasia, Category::NonMalignant}};
            case 3: return {3, {Category::Healthy, Category::Cancer, Category::HighGradeDysplasia,
                                Category::NonMalignant}};
            default: throw ValidationError("task id must be 1, 2, or 3");
        }
    }

    bool contains(Category c) const {
        for (const Category k : classes)
            if (k == c) return true;
        return false;
    }

    int class_index(Category c) const {
        for (size_t i = 0; i < classes.size(); ++i)
            if (classes[i] == c) return int(i);
        throw std::runtime_error("category not in task class set");
    }
};

} // namespace impedscope
