#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "impedscope/dataset.hpp"
#include "impedscope/synth.hpp"

using namespace impedscope;
namespace fs = std::filesystem;

namespace {

const std::string kConfig = IMPEDSCOPE_CONFIG_DIR;

fs::path scratch_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("impedscope_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Dataset tiny_cohort(uint64_t seed, double dropout = 0.0) {
    CohortSpec spec;
    spec.seed = seed;
    spec.name = "tiny";
    spec.patients_per_class = 2;
    spec.samples_per_patient = 2;
    spec.dropout_probability = dropout;
    spec.noise_sigma_ohm = 0.5;
    TissueModel healthy;
    healthy.raw_pathology = "healthy";
    healthy.r0_min_ohm = 900;
    healthy.r0_max_ohm = 1000;
    TissueModel cancer;
    cancer.raw_pathology = "oscc";
    cancer.r0_min_ohm = 400;
    cancer.r0_max_ohm = 500;
    spec.classes = {healthy, cancer};
    const ElectrodeArray mini = ElectrodeArray::load(kConfig + "/geometry_mini.json");
    return generate_cohort(spec, mini);
}

} // namespace

TEST_CASE("default frequency grid matches the log-spaced reference points") {
    const FrequencyGrid g = FrequencyGrid::standard();
    REQUIRE(g.size() == 31);
    CHECK(g.values_hz.front() == 100.0);
    CHECK(g.values_hz.back() == 100000.0);
    // 1-based index 13 sits at 1.58 kHz
    CHECK(g.values_hz[12] == Catch::Approx(1584.89).epsilon(0.001));
    for (size_t i = 1; i < g.size(); ++i) CHECK(g.values_hz[i] > g.values_hz[i - 1]);
}

TEST_CASE("pathology vocabulary maps the clinical groupings") {
    const PathologyVocabulary v = PathologyVocabulary::load(kConfig + "/pathology.json");
    CHECK(v.map_label("moderate dysplasia").category == Category::HighGradeDysplasia);
    CHECK(v.map_label("mild dysplasia").category == Category::NonMalignant);
    CHECK(v.map_label("healthy contralateral").category == Category::Healthy);
    CHECK(v.map_label("oscc").category == Category::Cancer);
    try {
        v.map_label("granuloma fictum");
        FAIL("expected rejection of unknown vocabulary entry");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("granuloma fictum") != std::string::npos);
    }
}

TEST_CASE("task class sets follow the three-task layout") {
    CHECK(TaskSpec::make(1).classes ==
          std::vector<Category>{Category::Healthy, Category::Cancer});
    CHECK(TaskSpec::make(2).classes ==
          std::vector<Category>{Category::Cancer, Category::HighGradeDysplasia,
                                Category::NonMalignant});
    CHECK(TaskSpec::make(3).classes.size() == 4);
    CHECK_THROWS_AS(TaskSpec::make(4), ValidationError);
    CHECK_FALSE(TaskSpec::make(3).contains(Category::Other));
}

TEST_CASE("empty manifest loads as an empty dataset") {
    const fs::path dir = scratch_dir("empty_manifest");
    Dataset d;
    d.name = "empty";
    d.grid = FrequencyGrid::standard();
    d.n_patterns = 10;
    save_dataset(d, dir.string());
    const Dataset loaded = load_dataset((dir / "manifest.json").string(),
                                        PathologyVocabulary::defaults());
    CHECK(loaded.samples.empty());
    CHECK(loaded.patients.empty());
    CHECK(loaded.n_patterns == 10);
}

TEST_CASE("a frame with a missing pattern row fails with a dimension mismatch") {
    const fs::path dir = scratch_dir("dim_mismatch");
    Dataset d = tiny_cohort(5);
    save_dataset(d, dir.string());
    // truncate one frame by one pattern row (n_freq * 2 doubles)
    const fs::path victim = dir / (d.samples[0].sample_id + "_1_1.f64");
    const std::string bytes = slurp(victim);
    std::ofstream out(victim, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), std::streamsize(bytes.size() - d.n_freq() * 2 * 8));
    out.close();
    CHECK_THROWS_AS(load_dataset((dir / "manifest.json").string(),
                                 PathologyVocabulary::defaults()),
                    ValidationError);
}

TEST_CASE("save -> load -> save round-trips byte-identically") {
    const fs::path dir1 = scratch_dir("roundtrip_a");
    const fs::path dir2 = scratch_dir("roundtrip_b");
    Dataset d = tiny_cohort(17, 0.15);
    REQUIRE(d.patients.size() == 4);
    REQUIRE(d.samples.size() == 8);
    save_dataset(d, dir1.string());
    const Dataset loaded = load_dataset((dir1 / "manifest.json").string(),
                                        PathologyVocabulary::defaults());
    save_dataset(loaded, dir2.string());
    for (const auto& entry : fs::directory_iterator(dir1)) {
        const fs::path rel = entry.path().filename();
        INFO(rel.string());
        CHECK(slurp(entry.path()) == slurp(dir2 / rel));
    }
}

TEST_CASE("task sample counts exclude Other") {
    Dataset d = tiny_cohort(3);
    SampleRecord other = d.samples.front();
    other.sample_id = "S_other";
    other.label = PathologyVocabulary::defaults().map_label("other");
    d.samples.push_back(other);
    const auto t1 = d.task_sample_indices(TaskSpec::make(1));
    CHECK(t1.size() == 8);
    size_t direct = 0;
    for (const auto& s : d.samples)
        direct += s.label.category == Category::Healthy || s.label.category == Category::Cancer;
    CHECK(t1.size() == direct);
}

TEST_CASE("validity bitmap round-trips LSB-first") {
    const fs::path dir = scratch_dir("maskbits");
    std::vector<uint8_t> valid = {1, 0, 1, 1, 0, 0, 0, 1, 1};
    save_validity((dir / "x.mask").string(), valid);
    // 9 patterns -> 2 bytes; first byte LSB = pattern 0
    const std::string bytes = slurp(dir / "x.mask");
    REQUIRE(bytes.size() == 2);
    CHECK((bytes[0] & 1) == 1);
    CHECK(((bytes[0] >> 1) & 1) == 0);
    CHECK(load_validity((dir / "x.mask").string(), 9) == valid);
}
