#include <set>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "ccc/data/annotation_io.hpp"
#include "ccc/data/sequence_store.hpp"
#include "support/test_support.hpp"

namespace ccc::data {
namespace {

using nlohmann::json;

json load(const std::filesystem::path& p) { return json::parse(test::read_text(p)); }

std::set<std::string> keys_of(const json& obj) {
  std::set<std::string> out;
  for (const auto& [k, v] : obj.items()) out.insert(k);
  return out;
}

TEST(Schema, UiExportParsesWithoutErrors) {
  const auto list = parse_annotation_file(test::fixture_path("ui_export_annotations.json"));
  ASSERT_EQ(list.size(), 4u);
  const CccAnnotation& first = list.front();
  EXPECT_EQ(first.landmarks.collateral, (Point2{120, 88}));
  EXPECT_EQ(first.landmarks.donor, (Point2{64.5, 40.25}));
  EXPECT_EQ(first.collateral_size_px, 5.0);
  std::set<int> flow, blush;
  for (const auto& a : list) {
    flow.insert(a.flow_grade);
    blush.insert(a.blush_grade);
  }
  EXPECT_EQ(flow, (std::set<int>{1, 2, 3, 4}));
  EXPECT_EQ(blush, (std::set<int>{0, 1, 2, 3}));
}

TEST(Schema, UiExportValidatesAgainstImageExtent) {
  const ExtentLookup lookup = [](const std::string&, const std::string&) {
    return std::optional<SequenceExtent>(SequenceExtent{30, 256, 256});
  };
  EXPECT_NO_THROW(parse_annotation_file(test::fixture_path("ui_export_annotations.json"), lookup));
}

TEST(Schema, ReimportIsFieldForFieldEqual) {
  const auto list = parse_annotation_file(test::fixture_path("ui_export_annotations.json"));
  test::TempDir dir("schema_rt");
  write_annotation_file(list, dir / "export.json");
  EXPECT_EQ(parse_annotation_file(dir / "export.json"), list);
  EXPECT_EQ(load(dir / "export.json"), load(test::fixture_path("ui_export_annotations.json")));
}

TEST(Schema, AnnotationSchemaMatchesParserContract) {
  const json schema = load(test::docs_path("annotation.schema.json"));
  const json& item = schema.at("items");
  const std::set<std::string> required(item.at("required").begin(), item.at("required").end());
  EXPECT_EQ(required, keys_of(annotation_to_json(CccAnnotation{"p", "i", 0, {}, 1, "", 1, 0, "", "", 1.0})));
  EXPECT_EQ(required, keys_of(item.at("properties")));
  const json& props = item.at("properties");
  EXPECT_EQ(props.at("rentrop_grade").at("minimum"), kRentropMin);
  EXPECT_EQ(props.at("rentrop_grade").at("maximum"), kRentropMax);
  EXPECT_EQ(props.at("flow_grade").at("minimum"), kFlowMin);
  EXPECT_EQ(props.at("flow_grade").at("maximum"), kFlowMax);
  EXPECT_EQ(props.at("blush_grade").at("minimum"), kBlushMin);
  EXPECT_EQ(props.at("blush_grade").at("maximum"), kBlushMax);
  for (const auto& record : load(test::fixture_path("ui_export_annotations.json"))) {
    for (const auto& key : required) EXPECT_TRUE(record.contains(key)) << key;
  }
}

TEST(Schema, ManifestSchemaMatchesStoreWriter) {
  const json schema = load(test::docs_path("sequence_manifest.schema.json"));
  const std::set<std::string> required(schema.at("required").begin(), schema.at("required").end());
  AngioSequence seq;
  seq.patient_id = "UI-017";
  seq.ica_id = "UI-017_ICA1";
  seq.pixel_spacing_mm = 0.3;
  for (int i = 0; i < 3; ++i) seq.frames.emplace_back(nn::Shape{4, 5}, 0.5f);
  test::TempDir dir("schema_manifest");
  write_sequence_dir(seq, {}, dir / "s");
  const json written = load(dir / "s" / "manifest.json");
  EXPECT_EQ(keys_of(written), keys_of(schema.at("properties")));
  for (const auto& key : required) EXPECT_TRUE(written.contains(key)) << key;
  const json fixture = load(test::fixture_path("ui_sequence/manifest.json"));
  EXPECT_EQ(keys_of(fixture), keys_of(schema.at("properties")));
  const StoredSequence back = read_sequence_dir(dir / "s");
  EXPECT_EQ(back.sequence.frame_count(), 3u);
  EXPECT_EQ(back.sequence.width(), 5u);
}

}  // namespace
}  // namespace ccc::data
