#include "tablesage/prompt.hpp"

#include <algorithm>

#include "tablesage/errors.hpp"
#include "tablesage/text.hpp"

namespace tablesage {
namespace {

constexpr std::string_view kPartSeparator = "\n\n";

std::string label_sentence(std::string_view lead, const std::vector<std::string>& labels) {
  return std::string(lead) + ": " + text::join(labels, ", ") + ".";
}

std::string_view cue_for(InputFormat format, PromptTask task) {
  if (task == PromptTask::kTableDomain) {
    return "Domain:";
  }
  return format == InputFormat::kColumn ? "Type:" : "Class:";
}

void check_demo(const PromptConfig& config, const Demonstration& demo) {
  if (demo.input.format != config.format) {
    throw ArgumentError("demonstration format '" + std::string(to_string(demo.input.format)) +
                        "' does not match prompt format '" +
                        std::string(to_string(config.format)) + "'");
  }
  const bool per_column = config.format == InputFormat::kTable &&
                          config.task == PromptTask::kColumnType;
  const std::size_t expected = per_column ? demo.input.n_columns : 1;
  if (demo.gold.size() != expected) {
    throw ArgumentError("demonstration has " + std::to_string(demo.gold.size()) +
                        " gold answers, expected " + std::to_string(expected));
  }
  for (const auto& g : demo.gold) {
    if (std::find(config.label_list.begin(), config.label_list.end(), g) ==
        config.label_list.end()) {
      throw ArgumentError("demonstration answer '" + g + "' is not in the label list");
    }
  }
}

}  // namespace

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kSystem:
      return "system";
    case Role::kUser:
      return "user";
    case Role::kAssistant:
      return "assistant";
  }
  return "user";
}

Role parse_role(std::string_view name) {
  if (name == "system") {
    return Role::kSystem;
  }
  if (name == "user") {
    return Role::kUser;
  }
  if (name == "assistant") {
    return Role::kAssistant;
  }
  throw ArgumentError("unknown message role '" + std::string(name) + "'");
}

std::string task_description(InputFormat format, const std::vector<std::string>& label_list) {
  switch (format) {
    case InputFormat::kColumn:
      return label_sentence(
          "Classify the column given to you into one of these types which are seperated by comma",
          label_list);
    case InputFormat::kText:
      return label_sentence(
          "Classify the text given to you into one of these classes that are separated with comma",
          label_list);
    case InputFormat::kTable:
      return label_sentence("Classify the columns of a given table with one of the following classes",
                            label_list) +
             " Reply with one class per column, in the order of the columns, separated with "
             "comma.";
  }
  return {};
}

std::string domain_task_description(const std::vector<std::string>& domain_names) {
  return label_sentence("Classify the given table into one of these domains", domain_names);
}

std::string instruction_block(InputFormat format) {
  switch (format) {
    case InputFormat::kColumn:
      return "1. Look at the column and the types given to you.\n"
             "2. Examine the values of the column.\n"
             "3. Select a type that best represents the meaning of the column.\n"
             "4. Answer with the selected type.";
    case InputFormat::kText:
      return "1. Look at the text and the classes given to you.\n"
             "2. Examine the values of the text.\n"
             "3. Select a class that best represents the meaning of the text.\n"
             "4. Answer with the selected class.";
    case InputFormat::kTable:
      return "1. Look at the input given to you and the classes given to you.\n"
             "2. Generate a table out of the input given to you.\n"
             "3. Examine the values of each column of the table.\n"
             "4. Select a class that best represents the meaning of each column.\n"
             "5. Answer with the selected class for each column, in the order of the columns, "
             "separated with comma.";
  }
  return {};
}

std::string domain_instruction_block() {
  return "1. Look at the input given to you and the domains given to you.\n"
         "2. Generate a table out of the input given to you.\n"
         "3. Examine the values of the table.\n"
         "4. Select a domain that best represents the table.\n"
         "5. Answer with the selected domain.";
}

std::string render_input(const SerializedInput& input, PromptTask task) {
  const std::string_view cue = cue_for(input.format, task);
  switch (input.format) {
    case InputFormat::kColumn:
      return "Column: " + input.payload + "\n" + std::string(cue);
    case InputFormat::kText:
      return "Text: " + input.payload + "\n" + std::string(cue);
    case InputFormat::kTable:
      return input.payload + std::string(cue);
  }
  return {};
}

std::string render_answer(const std::vector<std::string>& gold) { return text::join(gold, ", "); }

std::size_t estimate_message_tokens(const std::vector<Message>& messages) {
  std::size_t total = 0;
  for (const auto& m : messages) {
    total += 4 + estimate_tokens(m.content);
  }
  return total;
}

std::vector<Message> build_messages(const PromptConfig& config,
                                    const std::vector<Demonstration>& demos,
                                    const SerializedInput& target, std::size_t token_limit) {
  if (config.label_list.empty()) {
    throw ArgumentError("build_messages: empty label list");
  }
  if (demos.size() != config.shots) {
    throw ArgumentError("build_messages: " + std::to_string(demos.size()) +
                        " demonstrations given for shots=" + std::to_string(config.shots));
  }
  if (config.task == PromptTask::kTableDomain && config.format != InputFormat::kTable) {
    throw ArgumentError("build_messages: domain classification needs the table format");
  }
  if (target.format != config.format) {
    throw ArgumentError("build_messages: target format does not match prompt format");
  }
  for (const auto& demo : demos) {
    check_demo(config, demo);
  }

  std::vector<std::string> preamble;
  preamble.emplace_back(kGuidingSentence);
  if (config.task == PromptTask::kTableDomain) {
    preamble.push_back(domain_task_description(config.label_list));
    if (config.use_instructions) {
      preamble.push_back(domain_instruction_block());
    }
  } else {
    preamble.push_back(task_description(config.format, config.label_list));
    if (config.use_instructions) {
      preamble.push_back(instruction_block(config.format));
    }
  }

  std::vector<Message> messages;
  if (config.use_roles) {
    messages.push_back({Role::kSystem, text::join(preamble, kPartSeparator)});
    for (const auto& demo : demos) {
      messages.push_back({Role::kUser, render_input(demo.input, config.task)});
      messages.push_back({Role::kAssistant, render_answer(demo.gold)});
    }
    messages.push_back({Role::kUser, render_input(target, config.task)});
  } else {
    std::vector<std::string> parts = preamble;
    for (const auto& demo : demos) {
      parts.push_back(render_input(demo.input, config.task) + " " + render_answer(demo.gold));
    }
    parts.push_back(render_input(target, config.task));
    messages.push_back({Role::kUser, text::join(parts, kPartSeparator)});
  }

  const std::size_t estimate = estimate_message_tokens(messages);
  if (estimate > token_limit) {
    throw TokenBudgetError(estimate, token_limit);
  }
  return messages;
}

std::string render_messages(const std::vector<Message>& messages) {
  std::string out;
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (i > 0) {
      out += "\n";
    }
    out += "[" + std::string(to_string(messages[i].role)) + "]\n" + messages[i].content + "\n";
  }
  return out;
}

}  // namespace tablesage
