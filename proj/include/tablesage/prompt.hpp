#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tablesage/serialize.hpp"

namespace tablesage {

enum class Role { kSystem, kUser, kAssistant };

std::string_view to_string(Role role);
Role parse_role(std::string_view name);

struct Message {
  Role role = Role::kUser;
  std::string content;

  bool operator==(const Message&) const = default;
};

// What the prompt asks for: column types, or the topical domain of a table.
enum class PromptTask { kColumnType, kTableDomain };

constexpr std::size_t kDefaultTokenLimit = 4097;
constexpr std::size_t kDefaultRows = 5;

struct PromptConfig {
  InputFormat format = InputFormat::kColumn;
  bool use_instructions = false;
  bool use_roles = false;
  std::size_t shots = 0;
  std::size_t n_rows = kDefaultRows;
  // Labels offered to the model; domain names for kTableDomain.
  std::vector<std::string> label_list;
  std::uint64_t seed = 0;
  PromptTask task = PromptTask::kColumnType;
  SerializeOptions serialize;
};

struct Demonstration {
  SerializedInput input;
  // One label for column/text/domain demos, one per column for tables.
  std::vector<std::string> gold;

  bool operator==(const Demonstration&) const = default;
};

inline constexpr std::string_view kGuidingSentence =
    "Answer only according to the task given. If you don't know the answer, reply with \"I don't "
    "know\".";

std::string task_description(InputFormat format, const std::vector<std::string>& label_list);
std::string domain_task_description(const std::vector<std::string>& domain_names);

std::string instruction_block(InputFormat format);
std::string domain_instruction_block();

// Target or demo input as shown to the model, ending with the answer cue.
std::string render_input(const SerializedInput& input, PromptTask task = PromptTask::kColumnType);
// Expected reply for a demonstration: labels joined by ", ".
std::string render_answer(const std::vector<std::string>& gold);

// Four tokens of overhead per message plus ceil(chars / 4) of content.
std::size_t estimate_message_tokens(const std::vector<Message>& messages);

// With roles: system (guiding sentence, task, instructions), then a
// user/assistant pair per demo, then the target as a user message. Without
// roles the same parts go into one user message, separated by blank lines.
// Throws ArgumentError on a shots/demo mismatch and TokenBudgetError when
// the estimate exceeds token_limit.
std::vector<Message> build_messages(const PromptConfig& config,
                                    const std::vector<Demonstration>& demos,
                                    const SerializedInput& target,
                                    std::size_t token_limit = kDefaultTokenLimit);

// Human-readable dump used for --dry-run and golden files.
std::string render_messages(const std::vector<Message>& messages);

}  // namespace tablesage
