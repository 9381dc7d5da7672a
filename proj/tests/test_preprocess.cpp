#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "impedscope/preprocess.hpp"
#include "impedscope/rng.hpp"

using namespace impedscope;

namespace {

const std::string kConfig = IMPEDSCOPE_CONFIG_DIR;

SampleRecord make_sample(size_t np, size_t nf, double re, double im) {
    SampleRecord s;
    s.sample_id = "S1";
    s.patient_id = "P1";
    for (int k = 0; k < 9; ++k) {
        SpectralFrame f(np, nf);
        for (size_t p = 0; p < np; ++p)
            for (size_t q = 0; q < nf; ++q) f.at(p, q) = {re + double(p), im};
        s.frames.push_back(std::move(f));
    }
    return s;
}

Dataset single_frame_dataset(const Matrix& mag, size_t nf) {
    // wraps a magnitude matrix [sample][pattern*freq] laid out pattern-major
    Dataset d;
    d.n_patterns = mag.cols() / nf;
    d.tests_per_sample = 1;
    d.bursts_per_test = 1;
    d.grid.values_hz.resize(nf);
    for (size_t f = 0; f < nf; ++f) d.grid.values_hz[f] = 100.0 * double(f + 1);
    for (size_t r = 0; r < mag.rows(); ++r) {
        SampleRecord s;
        s.sample_id = "S" + std::to_string(r);
        s.patient_id = "P" + std::to_string(r);
        SpectralFrame fr(d.n_patterns, nf);
        for (size_t p = 0; p < d.n_patterns; ++p)
            for (size_t f = 0; f < nf; ++f) fr.at(p, f) = {mag(r, p * nf + f), 0.0};
        s.frames.push_back(std::move(fr));
        d.samples.push_back(std::move(s));
        d.patients.push_back("P" + std::to_string(r));
    }
    return d;
}

MaskSet identity_mask(size_t np) {
    MaskSet m;
    m.name = "All";
    m.indices.resize(np);
    for (size_t i = 0; i < np; ++i) m.indices[i] = i;
    return m;
}

} // namespace

TEST_CASE("impedance magnitude") {
    CHECK(impedance_magnitude(3.0, 4.0) == 5.0);
    CHECK(impedance_magnitude(0.0, 0.0) == 0.0);
    Rng rng(2);
    for (int i = 0; i < 1000; ++i) {
        const double r = rng.uniform(-1e4, 1e4);
        const double x = rng.uniform(-1e4, 1e4);
        const long double oracle = sqrtl((long double)(r) * r + (long double)(x) * x);
        CHECK(impedance_magnitude(r, x) == Catch::Approx(double(oracle)).epsilon(1e-12));
    }
    CHECK_THROWS(impedance_magnitude(std::numeric_limits<double>::infinity(), 0.0));
}

TEST_CASE("averaging nine identical frames reproduces the input") {
    const SampleRecord s = make_sample(6, 4, 100.0, -25.0);
    const CleanedSample c = filter_and_average(s, 3, 3, FilterConfig{}, 6, 4);
    CHECK(c.completeness == 1.0);
    CHECK(c.usable);
    for (size_t p = 0; p < 6; ++p)
        for (size_t f = 0; f < 4; ++f) {
            CHECK(c.frame.at(p, f).real() == Catch::Approx(100.0 + double(p)).margin(1e-12));
            CHECK(c.frame.at(p, f).imag() == Catch::Approx(-25.0).margin(1e-12));
        }
}

TEST_CASE("an out-of-bounds burst is dropped; the pattern keeps its other bursts") {
    SampleRecord s = make_sample(4, 3, 100.0, 0.0);
    // pattern 2, test 0, burst 1 blows past the impedance ceiling
    for (size_t f = 0; f < 3; ++f) s.frames[1].at(2, f) = {1e9, 0.0};
    FilterConfig cfg;
    cfg.impedance_max_ohm = 1e6;
    const CleanedSample c = filter_and_average(s, 3, 3, cfg, 4, 3);
    CHECK(c.completeness == 1.0);
    CHECK(c.frame.valid[2] == 1);
    CHECK(c.frame.at(2, 0).real() == Catch::Approx(102.0).margin(1e-9));
}

TEST_CASE("forcing 40% of patterns invalid yields completeness 0.6") {
    SampleRecord s = make_sample(10, 3, 50.0, 0.0);
    for (auto& fr : s.frames)
        for (size_t p = 0; p < 4; ++p) fr.valid[p] = 0;
    const CleanedSample c = filter_and_average(s, 3, 3, FilterConfig{}, 10, 3);
    CHECK(c.completeness == Catch::Approx(0.6).margin(1e-12));
}

TEST_CASE("averaging is invariant under permuting the three tests") {
    Rng rng(9);
    SampleRecord s = make_sample(5, 4, 0.0, 0.0);
    for (auto& fr : s.frames)
        for (size_t p = 0; p < 5; ++p)
            for (size_t f = 0; f < 4; ++f) fr.at(p, f) = {rng.uniform(10, 500), rng.uniform(-40, 0)};
    SampleRecord permuted = s;
    // swap tests 0 and 2 (blocks of three bursts)
    for (int b = 0; b < 3; ++b) std::swap(permuted.frames[b], permuted.frames[6 + b]);
    const CleanedSample c1 = filter_and_average(s, 3, 3, FilterConfig{}, 5, 4);
    const CleanedSample c2 = filter_and_average(permuted, 3, 3, FilterConfig{}, 5, 4);
    for (size_t p = 0; p < 5; ++p)
        for (size_t f = 0; f < 4; ++f) {
            CHECK(c1.frame.at(p, f).real() == Catch::Approx(c2.frame.at(p, f).real()).margin(1e-12));
            CHECK(c1.frame.at(p, f).imag() == Catch::Approx(c2.frame.at(p, f).imag()).margin(1e-12));
        }
}

TEST_CASE("completeness gate boundaries") {
    SampleRecord complete = make_sample(10, 2, 80.0, 0.0);
    SampleRecord holey = make_sample(10, 2, 80.0, 0.0);
    holey.sample_id = "S2";
    holey.patient_id = "P2";
    for (auto& fr : holey.frames)
        for (size_t p = 0; p < 5; ++p) fr.valid[p] = 0;

    Dataset raw;
    raw.n_patterns = 10;
    raw.grid.values_hz = {100, 200};
    raw.tests_per_sample = 3;
    raw.bursts_per_test = 3;
    raw.patients = {"P1", "P2"};
    raw.samples = {complete, holey};

    FilterConfig keep_all;
    keep_all.completeness_threshold = 1.0;
    CHECK(preprocess_dataset(raw, keep_all).samples.size() == 2);

    FilterConfig only_complete;
    only_complete.completeness_threshold = 0.0;
    const Dataset gated = preprocess_dataset(raw, only_complete);
    REQUIRE(gated.samples.size() == 1);
    CHECK(gated.samples[0].sample_id == "S1");

    FilterConfig half;
    half.completeness_threshold = 0.5;  // removed fraction 0.5 allowed
    CHECK(preprocess_dataset(raw, half).samples.size() == 2);
}

TEST_CASE("z-score handles constant and two-point columns") {
    Matrix x(2, 1);
    x(0, 0) = 1.0;
    x(1, 0) = 3.0;
    FeatureMatrix fm;
    fm.x = x;
    fm.frequency_indices = {0};
    fm.pattern_indices = {0};
    zscore_per_frequency(fm, nullptr);
    CHECK(fm.x(0, 0) == Catch::Approx(-1.0));  // population std
    CHECK(fm.x(1, 0) == Catch::Approx(1.0));

    FeatureMatrix constant;
    constant.x = Matrix(3, 1, 42.0);
    constant.frequency_indices = {0};
    constant.pattern_indices = {0};
    zscore_per_frequency(constant, nullptr);
    for (size_t r = 0; r < 3; ++r) CHECK(constant.x(r, 0) == 0.0);
}

TEST_CASE("z-score parameters come from training rows only") {
    Rng rng(3);
    const size_t nf = 4, np = 3;
    Matrix train(6, np * nf), test_a(4, np * nf), test_b(4, np * nf);
    for (auto* m : {&train, &test_a, &test_b})
        for (auto& v : m->data()) v = rng.uniform(0, 100);
    auto wrap = [&](const Matrix& m) {
        FeatureMatrix fm;
        fm.x = m;
        fm.frequency_indices = {0, 1, 2, 3};
        fm.pattern_indices = {0, 1, 2};
        return fm;
    };
    FeatureMatrix t1 = wrap(train), a1 = wrap(test_a);
    FeatureMatrix t2 = wrap(train), b2 = wrap(test_b);
    const ZScoreParams p1 = zscore_per_frequency(t1, &a1);
    const ZScoreParams p2 = zscore_per_frequency(t2, &b2);
    CHECK(p1.mean == p2.mean);
    CHECK(p1.std == p2.std);
    CHECK(t1.x.data() == t2.x.data());
}

TEST_CASE("post z-score per-frequency training moments are 0 and 1") {
    Rng rng(12);
    const size_t nf = 5, np = 7, n = 20;
    Matrix m(n, np * nf);
    for (auto& v : m.data()) v = rng.uniform(50, 2000);
    Dataset d = single_frame_dataset(m, nf);
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    std::vector<size_t> freqs = {0, 1, 2, 3, 4};
    FeatureMatrix fm = assemble_features(d, idx, identity_mask(np), freqs);
    zscore_per_frequency(fm, nullptr);
    for (size_t f = 0; f < nf; ++f) {
        double mean = 0;
        size_t cnt = 0;
        for (size_t r = 0; r < n; ++r)
            for (size_t p = 0; p < np; ++p) {
                mean += fm.x(r, p * nf + f);
                ++cnt;
            }
        mean /= double(cnt);
        double var = 0;
        for (size_t r = 0; r < n; ++r)
            for (size_t p = 0; p < np; ++p) {
                const double dlt = fm.x(r, p * nf + f) - mean;
                var += dlt * dlt;
            }
        var /= double(cnt);
        CHECK(std::abs(mean) <= 1e-9);
        CHECK(std::abs(std::sqrt(var) - 1.0) <= 1e-9);
    }
}

TEST_CASE("assembled widths follow mask size times frequency count") {
    const ElectrodeArray array = ElectrodeArray::load(kConfig + "/geometry.json");
    const PatternUniverse universe(array);
    const MaskRegistry registry = MaskRegistry::load(kConfig + "/masks.json");

    Dataset d;
    d.n_patterns = universe.size();
    d.tests_per_sample = 1;
    d.bursts_per_test = 1;
    d.grid = FrequencyGrid::standard();
    SampleRecord s;
    s.sample_id = "S0";
    s.patient_id = "P0";
    s.frames.emplace_back(universe.size(), d.grid.size());
    d.samples.push_back(std::move(s));
    d.patients = {"P0"};

    auto width = [&](const std::string& mask, size_t top) {
        std::vector<size_t> freqs;
        for (size_t f = 0; f < top; ++f) freqs.push_back(f);
        const FeatureMatrix fm = assemble_features(
            d, {0}, registry.build(mask, universe, array), freqs);
        return fm.x.cols();
    };
    CHECK(width("Skip1 far", 8) == 1792);
    CHECK(width("Skip1 far", 2) == 448);
    CHECK(width("Opp. medium", 3) == 792);
}

TEST_CASE("samples with no valid pattern inside the mask are flagged") {
    Matrix m(2, 6);
    for (auto& v : m.data()) v = 10.0;
    Dataset d = single_frame_dataset(m, 2);  // 3 patterns x 2 freqs
    d.samples[1].frames[0].valid = {0, 0, 1};
    MaskSet m01;
    m01.name = "first-two";
    m01.indices = {0, 1};
    const FeatureMatrix fm = assemble_features(d, {0, 1}, m01, {0, 1});
    REQUIRE(fm.flagged_samples.size() == 1);
    CHECK(fm.flagged_samples[0] == "S1");
    CHECK(std::isnan(fm.x(1, 0)));
}
