#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "impedscope/common.hpp"
#include "impedscope/dataset.hpp"
#include "impedscope/masks.hpp"
#include "impedscope/matrix.hpp"

namespace impedscope {

/// Burst filtering thresholds. Defaults are permissive: shipped data quality
/// rules live in filter.json, not in code.
struct FilterConfig {
    double voltage_floor_v = 0.0;
    double voltage_ceiling_v = std::numeric_limits<double>::infinity();
    double current_amplitude_a = 1e-4;  // drive current used to infer voltage from |Z|
    double impedance_min_ohm = 0.0;
    double impedance_max_ohm = std::numeric_limits<double>::infinity();
    double max_burst_relative_deviation = std::numeric_limits<double>::infinity();
    double completeness_threshold = 0.60;  // max tolerated fraction of removed patterns
    bool zscore_per_column = false;

    static FilterConfig from_json(const nlohmann::json& j) {
        FilterConfig c;
        c.voltage_floor_v = j.value("voltage_floor_v", c.voltage_floor_v);
        c.voltage_ceiling_v = j.value("voltage_ceiling_v", c.voltage_ceiling_v);
        c.current_amplitude_a = j.value("current_amplitude_a", c.current_amplitude_a);
        c.impedance_min_ohm = j.value("impedance_min_ohm", c.impedance_min_ohm);
        c.impedance_max_ohm = j.value("impedance_max_ohm", c.impedance_max_ohm);
        c.max_burst_relative_deviation =
            j.value("max_burst_relative_deviation", c.max_burst_relative_deviation);
        c.completeness_threshold = j.value("completeness_threshold", c.completeness_threshold);
        c.zscore_per_column = j.value("zscore_per_column", c.zscore_per_column);
        c.check();
        return c;
    }

    static FilterConfig load(const std::string& path) {
        std::ifstream in(path);
        validate(in.good(), "filter config not readable: " + path);
        nlohmann::json j;
        in >> j;
        return from_json(j);
    }

    void check() const {
        validate(voltage_floor_v <= voltage_ceiling_v, "voltage bounds out of order");
        validate(impedance_min_ohm <= impedance_max_ohm, "impedance bounds out of order");
        validate(completeness_threshold >= 0.0 && completeness_threshold <= 1.0,
                 "completeness threshold must lie in [0,1]");
    }
};

struct CleanedSample {
    SpectralFrame frame;   // single averaged frame, per-pattern validity
    double completeness = 0.0;
    bool usable = true;    // false when every pattern was filtered out
};

/// Burst-level filtering followed by averaging within bursts and then across
/// repeated tests. A pattern survives a test when at least one of its bursts
/// passes the filters; it survives the sample when it survives in at least
/// one test. Averaging uses valid entries only, so the result is invariant
/// under any permutation of the tests.
inline CleanedSample filter_and_average(const SampleRecord& sample, int tests, int bursts,
                                        const FilterConfig& cfg, size_t n_patterns, size_t n_freq) {
    require(sample.frames.size() == size_t(tests) * size_t(bursts), "sample is missing frames");
    CleanedSample out;
    out.frame = SpectralFrame(n_patterns, n_freq);
    out.frame.valid.assign(n_patterns, 0);

    std::vector<double> burst_mag(size_t(bursts) * n_freq);
    size_t survivors = 0;
    for (size_t p = 0; p < n_patterns; ++p) {
        std::vector<std::complex<double>> test_means;
        for (int t = 0; t < tests; ++t) {
            // burst admission: voltage proxy and impedance bounds
            std::vector<int> admitted;
            for (int b = 0; b < bursts; ++b) {
                const SpectralFrame& fr = sample.frames[size_t(t) * size_t(bursts) + size_t(b)];
                if (!fr.valid[p]) continue;
                bool ok = true;
                for (size_t f = 0; f < n_freq && ok; ++f) {
                    const auto z = fr.at(p, f);
                    const double mag = std::hypot(z.real(), z.imag());
                    burst_mag[size_t(b) * n_freq + f] = mag;
                    const double volts = mag * cfg.current_amplitude_a;
                    if (volts < cfg.voltage_floor_v || volts > cfg.voltage_ceiling_v) ok = false;
                    if (mag < cfg.impedance_min_ohm || mag > cfg.impedance_max_ohm) ok = false;
                }
                if (ok) admitted.push_back(b);
            }
            // burst-to-burst stability: drop bursts straying from the median
            if (admitted.size() > 1 && std::isfinite(cfg.max_burst_relative_deviation)) {
                std::vector<int> stable;
                for (const int b : admitted) {
                    double worst = 0.0;
                    for (size_t f = 0; f < n_freq; ++f) {
                        std::vector<double> vals;
                        for (const int bb : admitted) vals.push_back(burst_mag[size_t(bb) * n_freq + f]);
                        std::nth_element(vals.begin(), vals.begin() + vals.size() / 2, vals.end());
                        const double med = vals[vals.size() / 2];
                        if (med > 0.0)
                            worst = std::max(worst,
                                             std::abs(burst_mag[size_t(b) * n_freq + f] - med) / med);
                    }
                    if (worst <= cfg.max_burst_relative_deviation) stable.push_back(b);
                }
                admitted = stable;
            }
            if (admitted.empty()) continue;
            for (size_t f = 0; f < n_freq; ++f) {
                std::complex<double> acc{0.0, 0.0};
                for (const int b : admitted)
                    acc += sample.frames[size_t(t) * size_t(bursts) + size_t(b)].at(p, f);
                test_means.push_back(acc / double(admitted.size()));
            }
        }
        const size_t n_tests_ok = test_means.size() / std::max<size_t>(n_freq, 1);
        if (n_tests_ok == 0) continue;
        out.frame.valid[p] = 1;
        ++survivors;
        for (size_t f = 0; f < n_freq; ++f) {
            std::complex<double> acc{0.0, 0.0};
            for (size_t t = 0; t < n_tests_ok; ++t) acc += test_means[t * n_freq + f];
            out.frame.at(p, f) = acc / double(n_tests_ok);
        }
    }
    out.completeness = n_patterns ? double(survivors) / double(n_patterns) : 1.0;
    out.usable = survivors > 0;
    return out;
}

/// Applies filter_and_average to every sample and drops samples whose removed
/// fraction exceeds the completeness threshold. The result is a dataset with
/// a single frame per sample.
inline Dataset preprocess_dataset(const Dataset& raw, const FilterConfig& cfg) {
    Dataset out;
    out.schema_version = raw.schema_version;
    out.name = raw.name;
    out.grid = raw.grid;
    out.geometry_ref = raw.geometry_ref;
    out.n_patterns = raw.n_patterns;
    out.tests_per_sample = 1;
    out.bursts_per_test = 1;
    for (const SampleRecord& s : raw.samples) {
        CleanedSample cleaned = filter_and_average(s, raw.tests_per_sample, raw.bursts_per_test, cfg,
                                                   raw.n_patterns, raw.n_freq());
        if (!cleaned.usable) continue;
        const double removed = 1.0 - cleaned.completeness;
        if (removed > cfg.completeness_threshold) continue;
        SampleRecord rec;
        rec.sample_id = s.sample_id;
        rec.patient_id = s.patient_id;
        rec.label = s.label;
        rec.completeness = cleaned.completeness;
        rec.frames.push_back(std::move(cleaned.frame));
        out.samples.push_back(std::move(rec));
    }
    for (const std::string& p : raw.patients) {
        for (const SampleRecord& s : out.samples)
            if (s.patient_id == p) {
                out.patients.push_back(p);
                break;
            }
    }
    return out;
}

/// Assembled observations: one row per sample, one column per
/// (pattern, frequency) cell of the mask x frequency-subset grid, pattern
/// varying slowest. Missing cells (pattern invalid for that sample) hold NaN
/// until normalization imputes them.
struct FeatureMatrix {
    Matrix x;
    std::vector<size_t> pattern_indices;   // universe indices, one per pattern block
    std::vector<size_t> frequency_indices; // 0-based, ascending
    std::vector<size_t> sample_indices;    // rows -> dataset sample index
    std::vector<std::string> flagged_samples;  // no valid pattern in mask

    size_t freq_of_column(size_t col) const { return frequency_indices[col % frequency_indices.size()]; }
};

inline FeatureMatrix assemble_features(const Dataset& cleaned, const std::vector<size_t>& sample_idx,
                                       const MaskSet& mask, const std::vector<size_t>& freq_subset) {
    validate(!mask.indices.empty(), "mask is empty");
    validate(!freq_subset.empty(), "frequency subset is empty");
    for (const size_t f : freq_subset)
        validate(f < cleaned.n_freq(), "frequency index out of range");
    for (const size_t p : mask.indices)
        validate(p < cleaned.n_patterns, "mask index exceeds dataset pattern universe");

    FeatureMatrix out;
    out.pattern_indices = mask.indices;
    out.frequency_indices = freq_subset;
    std::sort(out.frequency_indices.begin(), out.frequency_indices.end());
    out.sample_indices = sample_idx;
    const size_t nf = out.frequency_indices.size();
    out.x = Matrix(sample_idx.size(), mask.indices.size() * nf);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (size_t r = 0; r < sample_idx.size(); ++r) {
        const SampleRecord& rec = cleaned.samples[sample_idx[r]];
        require(rec.frames.size() == 1, "assemble_features expects a cleaned (single-frame) dataset");
        const SpectralFrame& fr = rec.frames[0];
        bool any = false;
        for (size_t pi = 0; pi < mask.indices.size(); ++pi) {
            const size_t p = mask.indices[pi];
            if (!fr.valid[p]) {
                for (size_t fi = 0; fi < nf; ++fi) out.x(r, pi * nf + fi) = nan;
                continue;
            }
            any = true;
            for (size_t fi = 0; fi < nf; ++fi) {
                const auto z = fr.at(p, out.frequency_indices[fi]);
                out.x(r, pi * nf + fi) = std::hypot(z.real(), z.imag());
            }
        }
        if (!any) out.flagged_samples.push_back(rec.sample_id);
    }
    return out;
}

struct ZScoreParams {
    std::vector<double> mean;  // per frequency (pooled mode) or per column
    std::vector<double> std;   // population std
    bool per_column = false;
};

/// Fits per-frequency (pooled over that frequency's columns) mean and
/// population std on the training matrix only, transforms both matrices in
/// place, and imputes missing cells with the training mean (exactly 0 after
/// the transform). Degenerate stds (< 1e-12) map the column to all zeros.
inline ZScoreParams zscore_per_frequency(FeatureMatrix& train, FeatureMatrix* apply,
                                         bool per_column = false) {
    require(train.x.rows() > 0, "z-score requires a non-empty training matrix");
    const size_t nf = train.frequency_indices.size();
    const size_t groups = per_column ? train.x.cols() : nf;
    ZScoreParams params;
    params.per_column = per_column;
    params.mean.assign(groups, 0.0);
    params.std.assign(groups, 0.0);
    std::vector<size_t> count(groups, 0);
    auto group_of = [&](size_t col) { return per_column ? col : col % nf; };

    for (size_t r = 0; r < train.x.rows(); ++r)
        for (size_t c = 0; c < train.x.cols(); ++c) {
            const double v = train.x(r, c);
            if (std::isnan(v)) continue;
            params.mean[group_of(c)] += v;
            ++count[group_of(c)];
        }
    for (size_t g = 0; g < groups; ++g)
        if (count[g]) params.mean[g] /= double(count[g]);
    for (size_t r = 0; r < train.x.rows(); ++r)
        for (size_t c = 0; c < train.x.cols(); ++c) {
            const double v = train.x(r, c);
            if (std::isnan(v)) continue;
            const double d = v - params.mean[group_of(c)];
            params.std[group_of(c)] += d * d;
        }
    for (size_t g = 0; g < groups; ++g)
        params.std[g] = count[g] ? std::sqrt(params.std[g] / double(count[g])) : 0.0;

    auto transform = [&](FeatureMatrix& m) {
        for (size_t r = 0; r < m.x.rows(); ++r)
            for (size_t c = 0; c < m.x.cols(); ++c) {
                double& v = m.x(r, c);
                if (std::isnan(v)) {
                    v = 0.0;  // training-mean imputation
                    continue;
                }
                const double sd = params.std[group_of(c)];
                v = sd < 1e-12 ? 0.0 : (v - params.mean[group_of(c)]) / sd;
            }
    };
    transform(train);
    if (apply) {
        require(apply->x.cols() == train.x.cols(), "apply matrix has mismatched columns");
        transform(*apply);
    }
    return params;
}

} // namespace impedscope
