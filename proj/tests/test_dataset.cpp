#include <gtest/gtest.h>

#include <set>

#include "tablesage/dataset.hpp"
#include "tablesage/errors.hpp"
#include "tablesage/io.hpp"
#include "test_support.hpp"

namespace tablesage {
namespace {

using testing::make_column;

// Copies the mini schema and writes a one-table split with the given files.
void write_split(const std::filesystem::path& dir, const std::string& manifest,
                 const std::string& table_csv, const std::string& annotations) {
  std::filesystem::copy(testing::mini_dir() / "schema", dir / "schema",
                        std::filesystem::copy_options::recursive);
  write_file(dir / "test" / "manifest.json", manifest);
  write_file(dir / "test" / "tables" / "t1.csv", table_csv);
  write_file(dir / "test" / "annotations.csv", annotations);
}

TEST(Dataset, LoadsMiniFixture) {
  Dataset test = testing::load_mini(Split::kTest);
  Dataset train = testing::load_mini(Split::kTrain);
  EXPECT_EQ(test.split, Split::kTest);
  EXPECT_EQ(test.tables.size(), 13u);
  EXPECT_EQ(test.annotated_column_count(), 57u);
  EXPECT_EQ(train.tables.size(), 20u);
  EXPECT_EQ(train.annotated_column_count(), 99u);
  std::set<std::string> test_ids;
  for (const auto& t : test.tables) {
    test_ids.insert(t.table_id);
  }
  for (const auto& t : train.tables) {
    EXPECT_EQ(test_ids.count(t.table_id), 0u) << t.table_id;
  }
}

TEST(Dataset, BundledSchemaShape) {
  Dataset d = testing::load_mini(Split::kTest);
  EXPECT_EQ(d.vocabulary.size(), 32u);
  ASSERT_EQ(d.schema.domains().size(), 4u);
  std::set<std::string> covered;
  for (const auto& domain : d.schema.domains()) {
    covered.insert(domain.labels.begin(), domain.labels.end());
  }
  EXPECT_EQ(covered, std::set<std::string>(d.vocabulary.labels().begin(), d.vocabulary.labels().end()));
  EXPECT_EQ(d.schema.prompt_names(),
            (std::vector<std::string>{"music", "hotels", "restaurants", "events"}));
}

TEST(Dataset, LabelsForDomain) {
  Dataset d = testing::load_mini(Split::kTest);
  EXPECT_EQ(labels_for_domain(d.schema, "Music Recording"),
            (std::vector<std::string>{"MusicRecordingName", "Duration", "ArtistName", "AlbumName"}));
  const auto& events = labels_for_domain(d.schema, "Events");
  EXPECT_EQ(events.size(), 9u);
  for (const char* label : {"EventName", "Date", "Currency"}) {
    EXPECT_NE(std::find(events.begin(), events.end(), label), events.end()) << label;
  }
  EXPECT_THROW(labels_for_domain(d.schema, "Flights"), LookupError);
  // Telephone sits in several domains.
  int telephone = 0;
  for (const auto& domain : d.schema.domains()) {
    telephone += std::count(domain.labels.begin(), domain.labels.end(), "Telephone");
  }
  EXPECT_EQ(telephone, 3);
}

TEST(Dataset, ResolveMatchesNamesAndAliases) {
  Dataset d = testing::load_mini(Split::kTest);
  EXPECT_EQ(d.schema.resolve("music"), "Music Recording");
  EXPECT_EQ(d.schema.resolve("Music Recording"), "Music Recording");
  EXPECT_EQ(d.schema.resolve("HOTEL"), "Hotels");
  EXPECT_EQ(d.schema.resolve("flights"), std::nullopt);
}

TEST(Dataset, EmptyManifestHasNoTables) {
  testing::TempDir dir;
  write_split(dir.path(), R"({"split": "test", "tables": []})", "x\n",
              "table_id,column_index,label\n");
  try {
    load_dataset(dir.path(), Split::kTest);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("no tables"), std::string::npos);
  }
}

TEST(Dataset, OutOfRangeAnnotationIsValidationError) {
  testing::TempDir dir;
  write_split(dir.path(), R"({"split": "test", "tables": [{"table_id": "t1", "file": "tables/t1.csv"}]})",
              "a,b,c,d\n", "table_id,column_index,label\nt1,7,Country\nt1,0,Nope\n");
  try {
    load_dataset(dir.path(), Split::kTest);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("column 7"), std::string::npos);
    EXPECT_NE(what.find("Nope"), std::string::npos);
  }
}

TEST(Dataset, MissingTableFileIsLoadError) {
  testing::TempDir dir;
  write_split(dir.path(), R"({"split": "test", "tables": [{"table_id": "t2", "file": "tables/t2.csv"}]})",
              "a\n", "table_id,column_index,label\n");
  try {
    load_dataset(dir.path(), Split::kTest);
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("t2.csv"), std::string::npos);
  }
}

TEST(Dataset, WriteThenLoadRoundTrips) {
  Dataset original = testing::load_mini(Split::kTest);
  testing::TempDir dir;
  write_dataset(original, dir / "test");
  Dataset reloaded = load_dataset(dir.path(), Split::kTest);
  EXPECT_EQ(reloaded, original);
}

TEST(Dataset, DomainOfUsesGoldThenCoverage) {
  Dataset d = testing::load_mini(Split::kTest);
  const Table& t = d.table("restaurants_friends_pizza");
  EXPECT_EQ(d.domain_of(t), "Restaurants");
  d.gold_domain.clear();
  EXPECT_EQ(d.domain_of(t), "Restaurants");
  EXPECT_THROW(d.table("missing"), LookupError);
}

TEST(HeadRows, TruncatesWithoutPadding) {
  Table t;
  t.table_id = "t";
  t.n_rows = 10;
  std::vector<std::string> values;
  for (int i = 0; i < 10; ++i) {
    values.push_back(std::to_string(i));
  }
  t.columns = {make_column(0, values, "Date"), make_column(1, values)};
  Table head = head_rows(t, 5);
  EXPECT_EQ(head.n_rows, 5u);
  EXPECT_EQ(head.n_columns(), 2u);
  EXPECT_EQ(head.columns[0].values, (std::vector<std::string>{"0", "1", "2", "3", "4"}));
  EXPECT_EQ(head.columns[0].gold_label, "Date");
  EXPECT_EQ(t.n_rows, 10u);

  EXPECT_EQ(head_rows(head, 5), head);
  EXPECT_EQ(head_rows(t, 10), t);
  Table small = head_rows(t, 3);
  EXPECT_EQ(head_rows(small, 5).n_rows, 3u);
  EXPECT_THROW(head_rows(t, 0), ArgumentError);
}

TEST(Vocabulary, RejectsBrokenInvariants) {
  EXPECT_THROW(LabelVocabulary({"Time", "time"}, {}), ValidationError);
  EXPECT_THROW(LabelVocabulary({"Time"}, {{"Clock", "Date"}}), ValidationError);
  EXPECT_THROW(LabelVocabulary({"Time", "Date"}, {{"date", "Time"}}), ValidationError);
}

TEST(Vocabulary, LookupsFoldCaseAndSpace) {
  LabelVocabulary v({"Time", "PostalCode"}, {{"Check-in Time", "Time"}, {"Zip Code", "PostalCode"},
                                            {"Opening Hour", "Time"}});
  EXPECT_EQ(v.find_label("postalcode"), "PostalCode");
  EXPECT_EQ(v.find_label("Postal Code"), std::nullopt);
  EXPECT_EQ(v.find_synonym("  check-in   time "), "Time");
  EXPECT_EQ(v.first_synonym_of("Time"), "Check-in Time");
  EXPECT_EQ(v.first_synonym_of("Date"), std::nullopt);
}

TEST(Split, ParseNames) {
  EXPECT_EQ(parse_split("train"), Split::kTrain);
  EXPECT_EQ(to_string(Split::kTest), "test");
  EXPECT_THROW(parse_split("dev"), ArgumentError);
}

}  // namespace
}  // namespace tablesage
