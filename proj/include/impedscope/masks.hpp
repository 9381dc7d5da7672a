#pragma once

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "impedscope/common.hpp"
#include "impedscope/geometry.hpp"

namespace impedscope {

/// A named subset of the pattern universe plus registry metadata.
struct MaskSet {
    std::string name;
    std::vector<size_t> indices;  // sorted, unique, into the universe
    size_t expected_count = 0;
    double mean_ii_distance_mm = 0.0;
    double mean_vv_distance_mm = 0.0;
};

struct MaskStats {
    double mean_ii_distance_mm = 0.0;
    double mean_vv_distance_mm = 0.0;
};

/// Means of the Euclidean center distances over the distinct II pairs and
/// distinct VV pairs occurring in the mask.
inline MaskStats mask_stats(const MaskSet& mask, const PatternUniverse& universe,
                            const ElectrodeArray& array) {
    require(!mask.indices.empty(), "mask_stats on empty mask: " + mask.name);
    std::set<std::pair<int, int>> ii, vv;
    for (const size_t idx : mask.indices) {
        const IIVVPattern& p = universe[idx];
        ii.emplace(p.ii_a, p.ii_b);
        vv.emplace(p.vv_a, p.vv_b);
    }
    MaskStats s;
    for (const auto& [a, b] : ii)
        s.mean_ii_distance_mm += ElectrodeArray::distance(array.outer_by_id(a), array.outer_by_id(b));
    for (const auto& [a, b] : vv)
        s.mean_vv_distance_mm += ElectrodeArray::distance(array.inner_by_id(a), array.inner_by_id(b));
    s.mean_ii_distance_mm /= double(ii.size());
    s.mean_vv_distance_mm /= double(vv.size());
    return s;
}

/// Declarative mask registry. Each mask is either the full universe
/// ("rule": "all") or a list of entries, one per current-injection pair,
/// giving the voltage-electrode sets whose pairings belong to the mask:
///   mode "within": every pair of electrodes in sets[0]
///   mode "cross":  every pair with one electrode from sets[0], one from sets[1]
class MaskRegistry {
public:
    struct Entry {
        int ii_a = 0, ii_b = 0;
        std::string mode;                       // "within" | "cross"
        std::vector<std::vector<int>> sets;
        std::string desc;
    };
    struct Def {
        std::string name;
        std::string rule;                       // "all" | "entries"
        size_t expected_count = 0;
        double expected_ii_distance_mm = 0.0;
        double expected_vv_distance_mm = 0.0;
        std::vector<Entry> entries;
    };

    static MaskRegistry load(const std::string& path) {
        std::ifstream in(path);
        validate(in.good(), "mask config not readable: " + path);
        nlohmann::json j;
        in >> j;
        return from_json(j);
    }

    static MaskRegistry from_json(const nlohmann::json& j) {
        MaskRegistry reg;
        for (const auto& m : j.at("masks")) {
            Def d;
            d.name = m.at("name").get<std::string>();
            d.rule = m.value("rule", std::string("entries"));
            d.expected_count = m.at("expected_count").get<size_t>();
            d.expected_ii_distance_mm = m.value("expected_ii_distance_mm", 0.0);
            d.expected_vv_distance_mm = m.value("expected_vv_distance_mm", 0.0);
            if (d.rule == "entries") {
                for (const auto& e : m.at("entries")) {
                    Entry entry;
                    entry.ii_a = e.at("ii").at(0).get<int>();
                    entry.ii_b = e.at("ii").at(1).get<int>();
                    entry.mode = e.at("mode").get<std::string>();
                    for (const auto& s : e.at("sets"))
                        entry.sets.push_back(s.get<std::vector<int>>());
                    entry.desc = e.value("desc", std::string());
                    d.entries.push_back(std::move(entry));
                }
            }
            validate(reg.defs_.emplace(d.name, d).second, "duplicate mask name: " + d.name);
            reg.order_.push_back(d.name);
        }
        return reg;
    }

    const std::vector<std::string>& names() const { return order_; }
    bool has(const std::string& name) const { return defs_.count(name) != 0; }

    const Def& def(const std::string& name) const {
        auto it = defs_.find(name);
        validate(it != defs_.end(), "unknown mask name: " + name);
        return it->second;
    }

    /// Expands a named mask over the universe and validates its cardinality
    /// against the registry's expected count.
    MaskSet build(const std::string& name, const PatternUniverse& universe,
                  const ElectrodeArray& array) const {
        const Def& d = def(name);
        MaskSet mask;
        mask.name = name;
        mask.expected_count = d.expected_count;
        if (d.rule == "all") {
            mask.indices.resize(universe.size());
            for (size_t i = 0; i < universe.size(); ++i) mask.indices[i] = i;
        } else {
            std::set<size_t> idx;
            for (const Entry& e : d.entries) {
                validate(array.has_outer(e.ii_a) && array.has_outer(e.ii_b),
                         "mask " + name + " references unknown outer electrode");
                if (e.mode == "within") {
                    validate(e.sets.size() == 1, "mask " + name + ": within entry needs one set");
                    const auto& s = e.sets[0];
                    for (size_t a = 0; a < s.size(); ++a)
                        for (size_t b = a + 1; b < s.size(); ++b)
                            idx.insert(universe.index_of({e.ii_a, e.ii_b, s[a], s[b]}));
                } else if (e.mode == "cross") {
                    validate(e.sets.size() == 2, "mask " + name + ": cross entry needs two sets");
                    for (const int a : e.sets[0])
                        for (const int b : e.sets[1]) {
                            validate(a != b, "mask " + name + ": cross sets overlap");
                            idx.insert(universe.index_of({e.ii_a, e.ii_b, a, b}));
                        }
                } else {
                    throw ValidationError("mask " + name + ": unknown mode " + e.mode);
                }
            }
            mask.indices.assign(idx.begin(), idx.end());
        }
        if (mask.indices.size() != d.expected_count) {
            throw ValidationError("mask '" + name + "' expands to " +
                                  std::to_string(mask.indices.size()) + " patterns, expected " +
                                  std::to_string(d.expected_count));
        }
        const MaskStats s = mask_stats(mask, universe, array);
        mask.mean_ii_distance_mm = s.mean_ii_distance_mm;
        mask.mean_vv_distance_mm = s.mean_vv_distance_mm;
        return mask;
    }

private:
    std::map<std::string, Def> defs_;
    std::vector<std::string> order_;
};

enum class ThresholdSide { Below, Above };

/// Splits the universe by a per-pattern statistic (the caller supplies the
/// dataset-wide mean |Z| at the lowest frequency): "below" keeps values
/// <= threshold, "above" keeps values > threshold, so the two sides always
/// partition the patterns carrying a finite statistic.
inline MaskSet build_zthreshold_mask(const std::vector<double>& pattern_mean_z,
                                     double threshold_ohm, ThresholdSide side,
                                     bool* out_of_range = nullptr) {
    MaskSet mask;
    mask.name = side == ThresholdSide::Below ? "z-threshold below" : "z-threshold above";
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (size_t i = 0; i < pattern_mean_z.size(); ++i) {
        const double v = pattern_mean_z[i];
        if (!std::isfinite(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        const bool keep = side == ThresholdSide::Below ? v <= threshold_ohm : v > threshold_ohm;
        if (keep) mask.indices.push_back(i);
    }
    if (out_of_range) *out_of_range = threshold_ohm < lo || threshold_ohm > hi;
    mask.expected_count = mask.indices.size();
    return mask;
}

} // namespace impedscope
