#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "impedscope/common.hpp"

namespace impedscope {

struct Electrode {
    int id = 0;
    double x_mm = 0.0;
    double y_mm = 0.0;
};

/// Probe layout: a grid of voltage-sensing electrodes surrounded by a ring of
/// current-injection electrodes. Coordinates come from a geometry config, not
/// code, so alternative probes (e.g. reduced test arrays) are plain data.
class ElectrodeArray {
public:
    std::string name;
    std::vector<Electrode> inner;  // voltage pick-up
    std::vector<Electrode> outer;  // current injection
    double inner_diameter_mm = 0.0;
    double outer_diameter_mm = 0.0;

    static ElectrodeArray from_json(const nlohmann::json& j) {
        ElectrodeArray a;
        a.name = j.value("name", std::string("unnamed"));
        a.inner_diameter_mm = j.value("inner_diameter_mm", 0.0);
        a.outer_diameter_mm = j.value("outer_diameter_mm", 0.0);
        for (const auto& e : j.at("inner"))
            a.inner.push_back({e.at("id").get<int>(), e.at("x").get<double>(), e.at("y").get<double>()});
        for (const auto& e : j.at("outer"))
            a.outer.push_back({e.at("id").get<int>(), e.at("x").get<double>(), e.at("y").get<double>()});
        a.index();
        return a;
    }

    static ElectrodeArray load(const std::string& path) {
        std::ifstream in(path);
        validate(in.good(), "geometry config not readable: " + path);
        nlohmann::json j;
        in >> j;
        return from_json(j);
    }

    size_t n_inner() const { return inner.size(); }
    size_t n_outer() const { return outer.size(); }

    const Electrode& inner_by_id(int id) const {
        auto it = inner_idx_.find(id);
        validate(it != inner_idx_.end(), "unknown inner electrode id " + std::to_string(id));
        return inner[it->second];
    }
    const Electrode& outer_by_id(int id) const {
        auto it = outer_idx_.find(id);
        validate(it != outer_idx_.end(), "unknown outer electrode id " + std::to_string(id));
        return outer[it->second];
    }
    bool has_inner(int id) const { return inner_idx_.count(id) != 0; }
    bool has_outer(int id) const { return outer_idx_.count(id) != 0; }

    static double distance(const Electrode& a, const Electrode& b) {
        return std::hypot(a.x_mm - b.x_mm, a.y_mm - b.y_mm);
    }

private:
    void index() {
        validate(!inner.empty() && !outer.empty(), "geometry needs inner and outer electrodes");
        auto by_id = [](const Electrode& a, const Electrode& b) { return a.id < b.id; };
        std::sort(inner.begin(), inner.end(), by_id);
        std::sort(outer.begin(), outer.end(), by_id);
        for (size_t i = 0; i < inner.size(); ++i) {
            validate(inner_idx_.emplace(inner[i].id, i).second, "duplicate inner electrode id");
        }
        for (size_t i = 0; i < outer.size(); ++i) {
            validate(outer_idx_.emplace(outer[i].id, i).second, "duplicate outer electrode id");
            validate(!has_inner(outer[i].id), "electrode id used for both inner and outer");
        }
    }

    std::unordered_map<int, size_t> inner_idx_;
    std::unordered_map<int, size_t> outer_idx_;
};

/// One tetrapolar configuration: a current-injection pair (ii) and a voltage
/// pick-up pair (vv). Pairs are stored lower-id-first so equal patterns hash
/// and compare identically.
struct IIVVPattern {
    int ii_a = 0, ii_b = 0;
    int vv_a = 0, vv_b = 0;

    IIVVPattern() = default;
    IIVVPattern(int ia, int ib, int va, int vb)
        : ii_a(std::min(ia, ib)), ii_b(std::max(ia, ib)),
          vv_a(std::min(va, vb)), vv_b(std::max(va, vb)) {}

    friend bool operator==(const IIVVPattern&, const IIVVPattern&) = default;
    friend auto operator<=>(const IIVVPattern&, const IIVVPattern&) = default;
};

/// All IIVV patterns of an array in canonical order (II pairs ordered
/// lexicographically, VV pairs likewise, VV varying fastest). Deterministic:
/// two calls over the same array produce identical orderings.
class PatternUniverse {
public:
    explicit PatternUniverse(const ElectrodeArray& array) {
        for (const auto& e : array.outer) outer_ids_.push_back(e.id);
        for (const auto& e : array.inner) inner_ids_.push_back(e.id);
        n_ii_ = outer_ids_.size() * (outer_ids_.size() - 1) / 2;
        n_vv_ = inner_ids_.size() * (inner_ids_.size() - 1) / 2;
        patterns_.reserve(n_ii_ * n_vv_);
        for (size_t i = 0; i < outer_ids_.size(); ++i)
            for (size_t j = i + 1; j < outer_ids_.size(); ++j)
                for (size_t k = 0; k < inner_ids_.size(); ++k)
                    for (size_t l = k + 1; l < inner_ids_.size(); ++l)
                        patterns_.emplace_back(outer_ids_[i], outer_ids_[j], inner_ids_[k], inner_ids_[l]);
        for (size_t p = 0; p < patterns_.size(); ++p) lookup_[key(patterns_[p])] = p;
    }

    size_t size() const { return patterns_.size(); }
    size_t n_ii_pairs() const { return n_ii_; }
    size_t n_vv_pairs() const { return n_vv_; }
    const IIVVPattern& operator[](size_t i) const { return patterns_[i]; }
    const std::vector<IIVVPattern>& patterns() const { return patterns_; }

    size_t index_of(const IIVVPattern& p) const {
        auto it = lookup_.find(key(p));
        validate(it != lookup_.end(), "pattern not in universe");
        return it->second;
    }

private:
    static uint64_t key(const IIVVPattern& p) {
        return (uint64_t(uint16_t(p.ii_a)) << 48) | (uint64_t(uint16_t(p.ii_b)) << 32) |
               (uint64_t(uint16_t(p.vv_a)) << 16) | uint64_t(uint16_t(p.vv_b));
    }
    std::vector<int> outer_ids_;
    std::vector<int> inner_ids_;
    size_t n_ii_ = 0, n_vv_ = 0;
    std::vector<IIVVPattern> patterns_;
    std::unordered_map<uint64_t, size_t> lookup_;
};

} // namespace impedscope
