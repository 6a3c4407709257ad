#include <gtest/gtest.h>

#include "tablesage/errors.hpp"
#include "tablesage/io.hpp"
#include "tablesage/prompt.hpp"
#include "tablesage/text.hpp"
#include "test_support.hpp"

namespace tablesage {
namespace {

using testing::make_column;

const std::vector<std::string> kMusic = {"MusicRecordingName", "Duration", "ArtistName", "AlbumName"};

SerializedInput column_input(const std::string& payload) {
  SerializedInput in;
  in.format = InputFormat::kColumn;
  in.payload = payload;
  return in;
}

TEST(Prompt, GoldenZeroShotVariants) {
  auto variants = testing::zero_shot_variants();
  ASSERT_EQ(variants.size(), 9u);
  for (const auto& v : variants) {
    const auto path = testing::golden_prompt_path(v.name);
    if (testing::updating_golden()) {
      write_file(path, v.rendered);
    }
    EXPECT_EQ(v.rendered, read_file(path)) << v.name;
  }
}

TEST(Prompt, VerbatimSentences) {
  const std::vector<std::string> labels = {"Time", "Date"};
  EXPECT_TRUE(task_description(InputFormat::kColumn, labels)
                  .starts_with("Classify the column given to you into one of these types which are "
                               "seperated by comma:"));
  EXPECT_TRUE(task_description(InputFormat::kText, labels)
                  .starts_with("Classify the text given to you into one of these classes that are "
                               "separated with comma:"));
  EXPECT_NE(task_description(InputFormat::kTable, labels).find("the columns of a given table"),
            std::string::npos);
  auto column_steps = text::split(instruction_block(InputFormat::kColumn), '\n');
  ASSERT_EQ(column_steps.size(), 4u);
  EXPECT_EQ(column_steps[0], "1. Look at the column and the types given to you.");
  auto text_steps = text::split(instruction_block(InputFormat::kText), '\n');
  ASSERT_EQ(text_steps.size(), 4u);
  EXPECT_EQ(text_steps[2], "3. Select a class that best represents the meaning of the text.");
  auto table_steps = text::split(instruction_block(InputFormat::kTable), '\n');
  ASSERT_EQ(table_steps.size(), 5u);
  EXPECT_NE(table_steps[1].find("Generate a table out of"), std::string::npos);
}

TEST(Prompt, TableDescriptionListsExactlyTheSubset) {
  auto d = task_description(InputFormat::kTable, kMusic);
  EXPECT_NE(d.find("MusicRecordingName, Duration, ArtistName, AlbumName."), std::string::npos);
  EXPECT_EQ(d.find("Telephone"), std::string::npos);
}

TEST(Prompt, SimpleColumnIsOneUserMessageEndingWithCue) {
  PromptConfig config;
  config.label_list = kMusic;
  auto messages = build_messages(config, {}, column_input("3:45 4:10"));
  ASSERT_EQ(messages.size(), 1u);
  EXPECT_EQ(messages[0].role, Role::kUser);
  EXPECT_TRUE(messages[0].content.ends_with("Column: 3:45 4:10\nType:"));
  EXPECT_TRUE(messages[0].content.starts_with(std::string(kGuidingSentence) + "\n\n"));
}

TEST(Prompt, TableOneShotWithRolesHasFourMessages) {
  Table demo_table;
  demo_table.n_rows = 1;
  demo_table.columns = {make_column(0, {"Song"}), make_column(1, {"3:45"})};
  Table target_table;
  target_table.n_rows = 1;
  target_table.columns = {make_column(0, {"Other"}), make_column(1, {"4:10"})};
  PromptConfig config;
  config.format = InputFormat::kTable;
  config.use_instructions = true;
  config.use_roles = true;
  config.shots = 1;
  config.label_list = kMusic;
  Demonstration demo{serialize_table(demo_table, 5), {"MusicRecordingName", "Duration"}};
  auto messages = build_messages(config, {demo}, serialize_table(target_table, 5));
  ASSERT_EQ(messages.size(), 4u);
  EXPECT_EQ(messages[0].role, Role::kSystem);
  EXPECT_EQ(messages[1].role, Role::kUser);
  EXPECT_EQ(messages[2].role, Role::kAssistant);
  EXPECT_EQ(messages[2].content, "MusicRecordingName, Duration");
  EXPECT_EQ(messages[3].role, Role::kUser);
  EXPECT_EQ(messages[3].content, "Column 1 || Column 2 || \nOther || 4:10 ||\nClass:");
  EXPECT_NE(messages[0].content.find(instruction_block(InputFormat::kTable)), std::string::npos);
}

TEST(Prompt, RoleGrammarAndNoAssistantAtZeroShot) {
  for (bool roles : {false, true}) {
    for (std::size_t shots : {0u, 1u, 3u}) {
      PromptConfig config;
      config.use_roles = roles;
      config.shots = shots;
      config.label_list = kMusic;
      std::vector<Demonstration> demos(shots, Demonstration{column_input("x"), {"Duration"}});
      auto messages = build_messages(config, demos, column_input("y"));
      std::string grammar;
      for (const auto& m : messages) {
        grammar += to_string(m.role).front();
      }
      std::string expected = roles ? "s" : "";
      if (roles) {
        for (std::size_t i = 0; i < shots; ++i) {
          expected += "ua";
        }
      }
      expected += "u";
      EXPECT_EQ(grammar, expected);
      if (shots == 0) {
        for (const auto& m : messages) {
          EXPECT_NE(m.role, Role::kAssistant);
        }
      }
    }
  }
}

TEST(Prompt, ShotsMismatchAndForeignLabels) {
  PromptConfig config;
  config.shots = 1;
  config.label_list = kMusic;
  EXPECT_THROW(build_messages(config, {}, column_input("y")), ArgumentError);
  Demonstration foreign{column_input("x"), {"Telephone"}};
  EXPECT_THROW(build_messages(config, {foreign}, column_input("y")), ArgumentError);
  SerializedInput text_demo = column_input("x");
  text_demo.format = InputFormat::kText;
  EXPECT_THROW(build_messages(config, {{text_demo, {"Duration"}}}, column_input("y")), ArgumentError);
}

TEST(Prompt, TokenBudgetNamesOverflow) {
  PromptConfig config;
  config.label_list = kMusic;
  auto target = column_input(std::string(20000, 'a'));
  try {
    build_messages(config, {}, target);
    FAIL() << "expected TokenBudgetError";
  } catch (const TokenBudgetError& e) {
    EXPECT_GT(e.estimate(), e.limit());
    EXPECT_EQ(e.limit(), kDefaultTokenLimit);
  }
  EXPECT_NO_THROW(build_messages(config, {}, target, 100000));
}

TEST(Prompt, DeterministicAndDomainTask) {
  PromptConfig config;
  config.format = InputFormat::kTable;
  config.task = PromptTask::kTableDomain;
  config.label_list = {"music", "hotels"};
  Table t;
  t.n_rows = 1;
  t.columns = {make_column(0, {"a"})};
  auto a = build_messages(config, {}, serialize_table(t, 5));
  auto b = build_messages(config, {}, serialize_table(t, 5));
  EXPECT_EQ(a, b);
  EXPECT_TRUE(a[0].content.ends_with("Domain:"));
  EXPECT_NE(a[0].content.find("music, hotels."), std::string::npos);
  config.format = InputFormat::kColumn;
  EXPECT_THROW(build_messages(config, {}, column_input("a")), ArgumentError);
}

TEST(Prompt, MessageTokenEstimate) {
  std::vector<Message> messages = {{Role::kSystem, "12345678"}, {Role::kUser, "1"}};
  EXPECT_EQ(estimate_message_tokens(messages), 4u + 2u + 4u + 1u);
  EXPECT_EQ(parse_role("assistant"), Role::kAssistant);
  EXPECT_THROW(parse_role("tool"), ArgumentError);
}

}  // namespace
}  // namespace tablesage
