#include "modesynth/experiment.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "modesynth/glyphs.hpp"
#include "modesynth/verify.hpp"

using namespace modesynth;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ImageGray test_glyph(std::uint64_t seed = 808) {
    return synth_glyphs(seed, 1, 16)[0].image;
}

// Minimal JSON Schema checker covering the subset the published schema uses:
// type (string or list), properties, required, items, enum.
bool schema_validate(const json& schema, const json& value, std::string& why);

bool type_matches(const std::string& type, const json& value) {
    if (type == "object") return value.is_object();
    if (type == "array") return value.is_array();
    if (type == "string") return value.is_string();
    if (type == "integer") return value.is_number_integer() || value.is_number_unsigned();
    if (type == "number") return value.is_number();
    if (type == "boolean") return value.is_boolean();
    if (type == "null") return value.is_null();
    return false;
}

bool schema_validate(const json& schema, const json& value, std::string& why) {
    if (schema.contains("type")) {
        const json& t = schema["type"];
        bool ok = false;
        if (t.is_string()) {
            ok = type_matches(t.get<std::string>(), value);
        } else {
            for (const auto& option : t)
                if (type_matches(option.get<std::string>(), value)) ok = true;
        }
        if (!ok) {
            why = "type mismatch at " + value.dump().substr(0, 60);
            return false;
        }
    }
    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& option : schema["enum"])
            if (option == value) ok = true;
        if (!ok) {
            why = "enum mismatch: " + value.dump();
            return false;
        }
    }
    if (value.is_object()) {
        if (schema.contains("required"))
            for (const auto& key : schema["required"])
                if (!value.contains(key.get<std::string>())) {
                    why = "missing required key " + key.get<std::string>();
                    return false;
                }
        if (schema.contains("properties"))
            for (const auto& [key, sub] : schema["properties"].items())
                if (value.contains(key) && !schema_validate(sub, value[key], why)) return false;
    }
    if (value.is_array() && schema.contains("items"))
        for (const auto& item : value)
            if (!schema_validate(schema["items"], item, why)) return false;
    return true;
}

fs::path schema_path() {
    // Tests run from the build tree; the schema lives in the repo docs.
    return fs::path(__FILE__).parent_path().parent_path() / "docs" / "report_schema.json";
}

}  // namespace

TEST(RunApproach1, RowCountAndOrdering) {
    const ExperimentReport report = run_approach1(test_glyph(), {1, 5}, 2, 99);
    ASSERT_EQ(report.rows.size(), 4u);
    EXPECT_EQ(report.rows[0].model, ModelKind::rbm);
    EXPECT_EQ(report.rows[0].cd_level, 1);
    EXPECT_EQ(report.rows[1].model, ModelKind::rbm);
    EXPECT_EQ(report.rows[1].cd_level, 5);
    EXPECT_EQ(report.rows[2].model, ModelKind::msm);
    EXPECT_EQ(report.rows[2].cd_level, 1);
    EXPECT_EQ(report.rows[3].model, ModelKind::msm);
    EXPECT_EQ(report.rows[3].cd_level, 5);
    for (const auto& row : report.rows) {
        ASSERT_TRUE(row.error.empty()) << row.error;
        ASSERT_EQ(row.per_trial_sse.size(), 2u);
        ASSERT_EQ(row.per_trial_mae.size(), 2u);
    }
}

TEST(RunApproach1, AggregateEqualsMeanOfTrials) {
    const ExperimentReport report = run_approach1(test_glyph(), {1}, 3, 7);
    for (const auto& row : report.rows) {
        double sse = 0.0, mae = 0.0;
        for (double v : row.per_trial_sse) sse += v;
        for (double v : row.per_trial_mae) mae += v;
        ASSERT_NEAR(row.metric_sse, sse / 3.0, 1e-12 * (1.0 + row.metric_sse));
        ASSERT_NEAR(row.metric_mae, mae / 3.0, 1e-12 * (1.0 + row.metric_mae));
    }
}

TEST(RunApproach1, DeterministicDigestAcrossRuns) {
    const ExperimentReport a = run_approach1(test_glyph(), {1, 3}, 2, 4242);
    const ExperimentReport b = run_approach1(test_glyph(), {1, 3}, 2, 4242);
    EXPECT_EQ(report_determinism_digest(a), report_determinism_digest(b));

    const ExperimentReport c = run_approach1(test_glyph(), {1, 3}, 2, 4243);
    EXPECT_NE(report_determinism_digest(a), report_determinism_digest(c));
}

TEST(RunApproach1, ConstantImageGivesZeroMsmMetrics) {
    // A flat mid-gray ROI region: every MSM row is exactly 0.
    ImageGray img;
    img.width = 8;
    img.height = 8;
    img.pixels.assign(64, 0.25);  // constant, below threshold => all foreground
    const ExperimentReport report = run_approach1(img, {1, 2}, 2, 5);
    for (const auto& row : report.rows) {
        if (row.model != ModelKind::msm) continue;
        EXPECT_EQ(row.metric_sse, 0.0);
        EXPECT_EQ(row.metric_mae, 0.0);
    }
}

TEST(RunApproach1, ValidationErrors) {
    EXPECT_THROW(run_approach1(test_glyph(), {1}, 1, 0), InvalidRange);
    EXPECT_THROW(run_approach1(test_glyph(), {}, 2, 0), InvalidRange);
    EXPECT_THROW(run_approach1(test_glyph(), {0}, 2, 0), InvalidRange);
    ImageGray blank;
    blank.width = 4;
    blank.height = 4;
    blank.pixels.assign(16, 1.0);
    EXPECT_THROW(run_approach1(blank, {1}, 2, 0), NoForeground);
}

TEST(RunApproach2, MixedWidthEqualsSumOfRoiWidths) {
    const auto glyphs = synth_glyphs(31, 3, 16);
    std::vector<ImageGray> images;
    std::size_t expected_width = 0;
    for (const auto& g : glyphs) {
        images.push_back(g.image);
        expected_width += roi_extract(g.image, 0.5, Polarity::dark_on_light).width;
    }
    ExperimentOptions opts;
    opts.dump_dir = (fs::temp_directory_path() / "modesynth_a2_dump").string();
    const ExperimentReport report = run_approach2(images, {1}, 2, 77, opts);
    ASSERT_EQ(report.rows.size(), 2u);
    EXPECT_EQ(report.approach, Approach::two);

    const ImageGray mixed = load_image(fs::path(opts.dump_dir) / "a2_input.pgm",
                                       ImageFormat::pgm_ascii);
    EXPECT_EQ(mixed.width, expected_width);
    fs::remove_all(opts.dump_dir);
}

TEST(RunApproach2, FewerThanTwoImagesThrows) {
    EXPECT_THROW(run_approach2({test_glyph()}, {1}, 2, 0), InsufficientSamples);
}

TEST(EmitReport, CanonicalBytesAreStable) {
    const ExperimentReport report = run_approach1(test_glyph(), {1}, 2, 11);
    const std::string once = emit_report_string(report);
    const std::string twice = emit_report_string(report);
    EXPECT_EQ(once, twice);

    const auto path = fs::temp_directory_path() / "modesynth_report.json";
    emit_report(report, path);
    std::ifstream in(path, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EXPECT_EQ(content, once + "\n");
    fs::remove(path);
}

TEST(EmitReport, EmptyArtifactsSerializeAsEmptyArray) {
    const ExperimentReport report = run_approach1(test_glyph(), {1}, 2, 11);
    const std::string text = emit_report_string(report);
    EXPECT_NE(text.find("\"artifact_paths\":[]"), std::string::npos);
    EXPECT_EQ(text.find("null"), std::string::npos);  // no dumps, no failed rows
}

TEST(EmitReport, NonFiniteMetricRefused) {
    ExperimentReport report = run_approach1(test_glyph(), {1}, 2, 11);
    report.rows[0].metric_sse = std::nan("");
    EXPECT_THROW(emit_report_string(report), NonFiniteMetric);
}

TEST(EmitReport, FailedRowEmitsNullMetricsAndAnnotation) {
    ExperimentReport report = run_approach1(test_glyph(), {1}, 2, 11);
    report.rows[0].error = "synthetic failure";
    report.rows[0].metric_sse = std::nan("");  // must not trip the finite check
    const std::string text = emit_report_string(report);
    EXPECT_NE(text.find("\"error\":\"synthetic failure\""), std::string::npos);
    EXPECT_NE(text.find("\"metric_mae\":null,\"metric_sse\":null"), std::string::npos);
}

TEST(EmitReport, ParsesBackAndValidatesAgainstPublishedSchema) {
    ExperimentOptions opts;
    const ExperimentReport report = run_approach1(test_glyph(), {1, 2}, 2, 21, opts);
    const json parsed = json::parse(emit_report_string(report));

    std::ifstream schema_in(schema_path());
    ASSERT_TRUE(schema_in) << "missing " << schema_path();
    const json schema = json::parse(schema_in);
    std::string why;
    EXPECT_TRUE(schema_validate(schema, parsed, why)) << why;

    EXPECT_EQ(parsed["schema"], "msm-report.v1");
    EXPECT_EQ(parsed["rows"].size(), 4u);
    EXPECT_EQ(parsed["config_echo"]["trials"], 2);
}

TEST(Audit, RecomputesMetricsFromPersistedMatrices) {
    ExperimentOptions opts;
    opts.dump_dir = (fs::temp_directory_path() / "modesynth_audit_dump").string();
    const ExperimentReport report = run_approach1(test_glyph(), {1}, 2, 33, opts);
    const auto path = fs::temp_directory_path() / "modesynth_audit_report.json";
    emit_report(report, path);

    const AuditResult result = audit_report(path);
    EXPECT_TRUE(result.ok) << result.message;

    // Corrupt one persisted matrix; the audit must notice.
    const auto victim = fs::path(opts.dump_dir) / "a1_msm_cd1_t0_recon.csv";
    Matrix m = load_matrix_csv(victim);
    m(0, 0) += 0.5;
    save_matrix_csv(m, victim);
    const AuditResult broken = audit_report(path);
    EXPECT_FALSE(broken.ok);

    fs::remove(path);
    fs::remove_all(opts.dump_dir);
}

TEST(Audit, RefusesReportWithoutDumps) {
    const ExperimentReport report = run_approach1(test_glyph(), {1}, 2, 34);
    const auto path = fs::temp_directory_path() / "modesynth_nodump_report.json";
    emit_report(report, path);
    const AuditResult result = audit_report(path);
    EXPECT_FALSE(result.ok);
    fs::remove(path);
}

TEST(Verify, AllChecksPass) {
    for (const VerifyCheck& check : run_verification())
        EXPECT_TRUE(check.passed) << check.name << ": " << check.detail;
}
