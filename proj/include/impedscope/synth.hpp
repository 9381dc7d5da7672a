#pragma once

#include <cmath>
#include <complex>
#include <fstream>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "impedscope/common.hpp"
#include "impedscope/dataset.hpp"
#include "impedscope/geometry.hpp"
#include "impedscope/rng.hpp"

namespace impedscope {

/// Single-dispersion Cole model: Z(f) = Rinf + (R0 - Rinf) / (1 + (i f/fc)^alpha).
inline std::complex<double> cole_impedance(double r0, double rinf, double fc, double alpha,
                                           double f) {
    require(f > 0, "cole_impedance needs f > 0");
    const double ratio = std::pow(f / fc, alpha);
    const double ang = std::numbers::pi * alpha / 2.0;  // i^alpha on the principal branch
    const std::complex<double> denom{1.0 + ratio * std::cos(ang), ratio * std::sin(ang)};
    return std::complex<double>{rinf, 0.0} + (r0 - rinf) / denom;
}

/// Tissue-class generator parameters. Values are synthetic verification knobs,
/// not clinical claims; defaults order the class plateaus so labels carry
/// spectral contrast.
struct TissueModel {
    std::string raw_pathology;
    double r0_min_ohm = 800.0;
    double r0_max_ohm = 1000.0;
    double rinf_ohm = 200.0;
    double fc_hz = 3000.0;
    double alpha = 0.85;
    double freq_contrast = 0.0;  // multiplicative offset applied at contrast indices

    void check() const {
        validate(r0_min_ohm > 0 && r0_max_ohm >= r0_min_ohm, "R0 range invalid");
        validate(rinf_ohm > 0 && r0_min_ohm > rinf_ohm, "need R0 > Rinf > 0");
        validate(alpha > 0 && alpha <= 1.0, "alpha must lie in (0,1]");
        validate(fc_hz > 0, "fc must be positive");
    }
};

struct CohortSpec {
    std::string name = "synthetic";
    uint64_t seed = 0;
    std::string geometry_path;
    FrequencyGrid grid = FrequencyGrid::standard();
    int patients_per_class = 10;
    int samples_per_patient = 2;
    std::vector<TissueModel> classes;
    double patient_sigma = 0.05;   // lognormal patient-level R0 variation
    double pattern_sigma = 0.02;   // lognormal per-pattern gain
    double noise_sigma_ohm = 1.0;  // additive burst noise on R and X
    double dropout_probability = 0.0;
    bool distance_modulation = true;
    std::vector<int> contrast_frequencies_1based;  // where freq_contrast applies

    static CohortSpec from_json(const nlohmann::json& j) {
        CohortSpec s;
        s.name = j.value("name", s.name);
        s.geometry_path = j.at("geometry").get<std::string>();
        if (j.contains("frequency_grid_hz"))
            s.grid.values_hz = j.at("frequency_grid_hz").get<std::vector<double>>();
        s.grid.check();
        s.patients_per_class = j.value("patients_per_class", s.patients_per_class);
        s.samples_per_patient = j.value("samples_per_patient", s.samples_per_patient);
        s.patient_sigma = j.value("patient_sigma", s.patient_sigma);
        s.pattern_sigma = j.value("pattern_sigma", s.pattern_sigma);
        s.noise_sigma_ohm = j.value("noise_sigma_ohm", s.noise_sigma_ohm);
        s.dropout_probability = j.value("dropout_probability", s.dropout_probability);
        s.distance_modulation = j.value("distance_modulation", s.distance_modulation);
        if (j.contains("contrast_frequencies"))
            s.contrast_frequencies_1based = j.at("contrast_frequencies").get<std::vector<int>>();
        for (const auto& c : j.at("classes")) {
            TissueModel m;
            m.raw_pathology = c.at("raw_pathology").get<std::string>();
            m.r0_min_ohm = c.at("r0_min_ohm").get<double>();
            m.r0_max_ohm = c.at("r0_max_ohm").get<double>();
            m.rinf_ohm = c.value("rinf_ohm", m.rinf_ohm);
            m.fc_hz = c.value("fc_hz", m.fc_hz);
            m.alpha = c.value("alpha", m.alpha);
            m.freq_contrast = c.value("freq_contrast", 0.0);
            m.check();
            s.classes.push_back(std::move(m));
        }
        validate(!s.classes.empty(), "cohort spec needs at least one class");
        validate(s.patients_per_class >= 0 && s.samples_per_patient >= 0, "counts must be >= 0");
        return s;
    }

    static CohortSpec load(const std::string& path) {
        std::ifstream in(path);
        validate(in.good(), "cohort spec not readable: " + path);
        nlohmann::json j;
        in >> j;
        return from_json(j);
    }
};

/// Generates the cohort: per sample, 3 tests x 3 bursts of per-pattern Cole
/// spectra with patient-, pattern-, and burst-level variation plus seeded
/// pattern dropout. Per-sample random streams derive from (seed, sample
/// counter), so generation order or parallel scheduling cannot change output.
inline Dataset generate_cohort(const CohortSpec& spec, const ElectrodeArray& array,
                               const PathologyVocabulary& vocab = PathologyVocabulary::defaults()) {
    const PatternUniverse universe(array);
    const size_t np = universe.size();
    const size_t nf = spec.grid.size();

    // geometric gain: VV distance over mask-wide mean VV distance
    std::vector<double> geo_gain(np, 1.0);
    if (spec.distance_modulation) {
        double mean = 0.0;
        std::vector<double> dist(np);
        for (size_t p = 0; p < np; ++p) {
            const IIVVPattern& pat = universe[p];
            dist[p] = ElectrodeArray::distance(array.inner_by_id(pat.vv_a),
                                               array.inner_by_id(pat.vv_b));
            mean += dist[p];
        }
        mean /= double(np);
        for (size_t p = 0; p < np; ++p) geo_gain[p] = dist[p] / mean;
    }

    std::vector<uint8_t> contrast_at(nf, 0);
    for (const int k : spec.contrast_frequencies_1based) {
        validate(k >= 1 && size_t(k) <= nf, "contrast frequency index out of range");
        contrast_at[size_t(k - 1)] = 1;
    }

    Dataset d;
    d.name = spec.name;
    d.grid = spec.grid;
    d.geometry_ref = "geometry.json";
    d.n_patterns = np;
    d.tests_per_sample = 3;
    d.bursts_per_test = 3;

    size_t sample_counter = 0;
    size_t patient_counter = 0;
    for (size_t cls = 0; cls < spec.classes.size(); ++cls) {
        const TissueModel& tm = spec.classes[cls];
        for (int pp = 0; pp < spec.patients_per_class; ++pp) {
            char pid[16];
            std::snprintf(pid, sizeof(pid), "P%04zu", ++patient_counter);
            d.patients.emplace_back(pid);
            Rng prng(substream(spec.seed, "patient", patient_counter));
            const double r0_base = prng.uniform(tm.r0_min_ohm, tm.r0_max_ohm);
            const double patient_gain = std::exp(prng.normal(0.0, spec.patient_sigma));

            for (int ss = 0; ss < spec.samples_per_patient; ++ss) {
                ++sample_counter;
                char sid[16];
                std::snprintf(sid, sizeof(sid), "S%05zu", sample_counter);
                Rng srng(substream(spec.seed, "sample", sample_counter));

                std::vector<uint8_t> valid(np, 1);
                for (size_t p = 0; p < np; ++p)
                    if (spec.dropout_probability > 0 && srng.uniform() < spec.dropout_probability)
                        valid[p] = 0;

                std::vector<double> pattern_gain(np);
                for (size_t p = 0; p < np; ++p)
                    pattern_gain[p] = geo_gain[p] * patient_gain *
                                      std::exp(srng.normal(0.0, spec.pattern_sigma));

                SampleRecord rec;
                rec.sample_id = sid;
                rec.patient_id = pid;
                rec.label = vocab.map_label(tm.raw_pathology);
                for (int t = 0; t < 3; ++t)
                    for (int b = 0; b < 3; ++b) {
                        SpectralFrame frame(np, nf);
                        frame.valid = valid;
                        for (size_t p = 0; p < np; ++p)
                            for (size_t f = 0; f < nf; ++f) {
                                std::complex<double> z = cole_impedance(
                                    r0_base, tm.rinf_ohm, tm.fc_hz, tm.alpha,
                                    spec.grid.values_hz[f]);
                                z *= pattern_gain[p];
                                if (contrast_at[f]) z *= 1.0 + tm.freq_contrast;
                                z += std::complex<double>{srng.normal(0.0, spec.noise_sigma_ohm),
                                                          srng.normal(0.0, spec.noise_sigma_ohm)};
                                frame.at(p, f) = z;
                            }
                        rec.frames.push_back(std::move(frame));
                    }
                size_t kept = 0;
                for (const uint8_t v : valid) kept += v;
                rec.completeness = double(kept) / double(np);
                d.samples.push_back(std::move(rec));
            }
        }
    }
    return d;
}

} // namespace impedscope
