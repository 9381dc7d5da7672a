#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "impedscope/common.hpp"
#include "impedscope/labels.hpp"

namespace impedscope {

/// Logarithmic measurement grid. The default spans 100 Hz to 100 kHz in 31
/// points: f_k = 100 * 10^(3(k-1)/30). User-facing frequency indices are
/// 1-based everywhere; vector indexing stays 0-based internally.
struct FrequencyGrid {
    std::vector<double> values_hz;

    static FrequencyGrid standard() {
        FrequencyGrid g;
        g.values_hz.resize(31);
        for (int k = 1; k <= 31; ++k)
            g.values_hz[k - 1] = 100.0 * std::pow(10.0, 3.0 * double(k - 1) / 30.0);
        return g;
    }

    size_t size() const { return values_hz.size(); }

    void check() const {
        validate(!values_hz.empty(), "frequency grid is empty");
        for (size_t i = 1; i < values_hz.size(); ++i)
            validate(values_hz[i] > values_hz[i - 1], "frequency grid must be strictly increasing");
    }
};

/// Complex impedance for one acquisition, indexed [pattern][frequency], with
/// a per-pattern validity flag. Invalid patterns carry no numeric meaning.
struct SpectralFrame {
    size_t n_patterns = 0;
    size_t n_freq = 0;
    std::vector<std::complex<double>> values;  // row-major pattern x frequency
    std::vector<uint8_t> valid;                // per pattern

    SpectralFrame() = default;
    SpectralFrame(size_t np, size_t nf)
        : n_patterns(np), n_freq(nf), values(np * nf), valid(np, 1) {}

    std::complex<double>& at(size_t p, size_t f) { return values[p * n_freq + f]; }
    const std::complex<double>& at(size_t p, size_t f) const { return values[p * n_freq + f]; }
};

inline double impedance_magnitude(double r, double x) {
    require(std::isfinite(r) && std::isfinite(x), "impedance components must be finite");
    return std::hypot(r, x);
}

/// One tissue site: raw acquisitions (tests x bursts frames), label, patient.
struct SampleRecord {
    std::string sample_id;
    std::string patient_id;
    TissueLabel label;
    std::vector<SpectralFrame> frames;  // test-major: t0b0 t0b1 t0b2 t1b0 ...
    double completeness = 1.0;          // retained patterns / universe size
};

namespace detail {

inline void write_u64_le(std::ostream& out, uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = char((v >> (8 * i)) & 0xff);
    out.write(b, 8);
}

inline uint64_t read_u64_le(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
    return v;
}

inline uint64_t f64_bits(double d) {
    uint64_t u;
    std::memcpy(&u, &d, 8);
    return u;
}

inline double bits_f64(uint64_t u) {
    double d;
    std::memcpy(&d, &u, 8);
    return d;
}

} // namespace detail

/// Frame files are packed little-endian doubles, row-major
/// [pattern][frequency][R, X]; validity bitmaps are one bit per pattern,
/// LSB-first. Both are bit-exact across save/load cycles.
inline void save_frame(const std::string& path, const SpectralFrame& frame) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "cannot write frame file: " + path);
    for (size_t p = 0; p < frame.n_patterns; ++p)
        for (size_t f = 0; f < frame.n_freq; ++f) {
            detail::write_u64_le(out, detail::f64_bits(frame.at(p, f).real()));
            detail::write_u64_le(out, detail::f64_bits(frame.at(p, f).imag()));
        }
}

inline SpectralFrame load_frame(const std::string& path, size_t n_patterns, size_t n_freq) {
    std::ifstream in(path, std::ios::binary);
    validate(in.good(), "missing frame file: " + path);
    in.seekg(0, std::ios::end);
    const uint64_t bytes = uint64_t(in.tellg());
    in.seekg(0);
    const uint64_t expect = uint64_t(n_patterns) * n_freq * 2 * 8;
    if (bytes != expect)
        throw ValidationError("frame dimension mismatch in " + path + ": " + std::to_string(bytes) +
                              " bytes, expected " + std::to_string(expect));
    SpectralFrame frame(n_patterns, n_freq);
    for (size_t p = 0; p < n_patterns; ++p)
        for (size_t f = 0; f < n_freq; ++f) {
            const double re = detail::bits_f64(detail::read_u64_le(in));
            const double im = detail::bits_f64(detail::read_u64_le(in));
            frame.at(p, f) = {re, im};
        }
    return frame;
}

inline void save_validity(const std::string& path, const std::vector<uint8_t>& valid) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "cannot write mask file: " + path);
    std::vector<char> bytes((valid.size() + 7) / 8, 0);
    for (size_t i = 0; i < valid.size(); ++i)
        if (valid[i]) bytes[i / 8] |= char(1u << (i % 8));
    out.write(bytes.data(), std::streamsize(bytes.size()));
}

inline std::vector<uint8_t> load_validity(const std::string& path, size_t n_patterns) {
    std::ifstream in(path, std::ios::binary);
    validate(in.good(), "missing mask file: " + path);
    std::vector<char> bytes((n_patterns + 7) / 8);
    in.read(bytes.data(), std::streamsize(bytes.size()));
    validate(size_t(in.gcount()) == bytes.size(), "mask file truncated: " + path);
    std::vector<uint8_t> valid(n_patterns, 0);
    for (size_t i = 0; i < n_patterns; ++i)
        valid[i] = (bytes[i / 8] >> (i % 8)) & 1;
    return valid;
}

/// In-memory dataset plus enough manifest state to round-trip byte-exactly.
struct Dataset {
    int schema_version = 1;
    std::string name;
    FrequencyGrid grid;
    std::string geometry_ref;  // path relative to the manifest
    size_t n_patterns = 0;
    int tests_per_sample = 3;
    int bursts_per_test = 3;
    std::vector<std::string> patients;
    std::vector<SampleRecord> samples;

    size_t n_freq() const { return grid.size(); }

    std::vector<size_t> task_sample_indices(const TaskSpec& task) const {
        std::vector<size_t> idx;
        for (size_t i = 0; i < samples.size(); ++i)
            if (task.contains(samples[i].label.category)) idx.push_back(i);
        return idx;
    }
};

inline Dataset load_dataset(const std::string& manifest_path, const PathologyVocabulary& vocab) {
    namespace fs = std::filesystem;
    std::ifstream in(manifest_path);
    validate(in.good(), "manifest not readable: " + manifest_path);
    nlohmann::json j;
    in >> j;

    Dataset d;
    d.schema_version = j.at("schema_version").get<int>();
    validate(d.schema_version == 1, "unsupported manifest schema version");
    d.name = j.value("name", std::string());
    d.grid.values_hz = j.at("frequency_grid_hz").get<std::vector<double>>();
    d.grid.check();
    d.geometry_ref = j.value("geometry", std::string());
    d.n_patterns = j.at("n_patterns").get<size_t>();
    d.tests_per_sample = j.at("tests_per_sample").get<int>();
    d.bursts_per_test = j.at("bursts_per_test").get<int>();
    d.patients = j.at("patients").get<std::vector<std::string>>();

    const fs::path base = fs::path(manifest_path).parent_path();
    const size_t frames_per_sample = size_t(d.tests_per_sample) * size_t(d.bursts_per_test);
    for (const auto& s : j.at("samples")) {
        SampleRecord rec;
        rec.sample_id = s.at("sample_id").get<std::string>();
        rec.patient_id = s.at("patient_id").get<std::string>();
        rec.label = vocab.map_label(s.at("raw_pathology").get<std::string>());
        validate(std::find(d.patients.begin(), d.patients.end(), rec.patient_id) != d.patients.end(),
                 "sample " + rec.sample_id + " references unlisted patient " + rec.patient_id);
        const auto frame_names = s.at("frames").get<std::vector<std::string>>();
        validate(frame_names.size() == frames_per_sample,
                 "sample " + rec.sample_id + " has wrong frame count");
        const auto valid = load_validity((base / s.at("mask").get<std::string>()).string(), d.n_patterns);
        for (const auto& fname : frame_names) {
            SpectralFrame frame = load_frame((base / fname).string(), d.n_patterns, d.grid.size());
            frame.valid = valid;
            rec.frames.push_back(std::move(frame));
        }
        size_t kept = 0;
        for (const uint8_t v : valid) kept += v;
        rec.completeness = d.n_patterns ? double(kept) / double(d.n_patterns) : 1.0;
        d.samples.push_back(std::move(rec));
    }
    return d;
}

/// Writes manifest + frame + validity files under `dir`. File naming follows
/// `<sample>_<test>_<burst>.f64` and `<sample>.mask`.
inline void save_dataset(const Dataset& d, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    nlohmann::ordered_json j;
    j["schema_version"] = d.schema_version;
    j["name"] = d.name;
    j["frequency_grid_hz"] = d.grid.values_hz;
    j["geometry"] = d.geometry_ref;
    j["n_patterns"] = d.n_patterns;
    j["tests_per_sample"] = d.tests_per_sample;
    j["bursts_per_test"] = d.bursts_per_test;
    j["patients"] = d.patients;
    j["samples"] = nlohmann::ordered_json::array();
    for (const SampleRecord& rec : d.samples) {
        nlohmann::ordered_json s;
        s["sample_id"] = rec.sample_id;
        s["patient_id"] = rec.patient_id;
        s["raw_pathology"] = rec.label.raw_pathology;
        std::vector<std::string> frame_names;
        require(rec.frames.size() == size_t(d.tests_per_sample) * size_t(d.bursts_per_test),
                "sample frame count does not match manifest layout");
        size_t k = 0;
        for (int t = 1; t <= d.tests_per_sample; ++t)
            for (int b = 1; b <= d.bursts_per_test; ++b) {
                const std::string fname =
                    rec.sample_id + "_" + std::to_string(t) + "_" + std::to_string(b) + ".f64";
                save_frame((fs::path(dir) / fname).string(), rec.frames[k++]);
                frame_names.push_back(fname);
            }
        s["frames"] = frame_names;
        const std::string mask_name = rec.sample_id + ".mask";
        save_validity((fs::path(dir) / mask_name).string(), rec.frames.front().valid);
        s["mask"] = mask_name;
        j["samples"].push_back(std::move(s));
    }
    std::ofstream out((fs::path(dir) / "manifest.json").string());
    require(out.good(), "cannot write manifest");
    out << j.dump(2) << "\n";
}

} // namespace impedscope
