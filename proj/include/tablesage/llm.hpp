#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tablesage/dataset.hpp"
#include "tablesage/prompt.hpp"

namespace tablesage {

enum class BackendKind { kHttp, kOracle, kSynonymOracle, kNoisyOracle, kScripted };

std::string_view to_string(BackendKind kind);
// Accepts http, oracle, synonym, synonym_oracle, noisy, noisy_oracle, scripted.
BackendKind parse_backend_kind(std::string_view name);

inline constexpr std::string_view kDefaultModel = "gpt-3.5-turbo-0301";
inline constexpr std::string_view kApiKeyVariable = "TABLESAGE_API_KEY";
inline constexpr std::string_view kIDontKnow = "I don't know";

// Ground truth the pipeline attaches to a request for the oracle backends.
// Oracles read this and never look at the prompt text.
struct OracleHint {
  // Gold answers in reply order. An empty string marks an unannotated column.
  std::vector<std::string> gold;
  // Answers offered in the prompt. Oracles never answer outside this set.
  std::vector<std::string> candidates;
};

struct ChatRequest {
  std::string model_name = std::string(kDefaultModel);
  double temperature = 0.0;
  std::vector<Message> messages;
  std::string request_id;
  // Position of the request within the experiment; replay is keyed by it.
  std::size_t sequence = 0;
  OracleHint hint;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds initial_delay{1000};
  double multiplier = 2.0;
  // Each delay is scaled by a factor drawn from [1 - jitter, 1].
  double jitter = 0.25;
};

struct BackendConfig {
  BackendKind kind = BackendKind::kOracle;
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  // Falls back to $TABLESAGE_API_KEY when empty.
  std::string api_key;
  std::chrono::seconds timeout{60};
  RetryPolicy retry;
  double corruption_rate = 0.0;
  std::uint64_t noise_seed = 0;
  std::filesystem::path transcript_path;
  bool lenient_replay = false;
  std::size_t token_limit = kDefaultTokenLimit;

  // Throws ArgumentError on an out-of-range rate or a zero token limit.
  void validate() const;
};

struct TranscriptRecord {
  std::string request_id;
  std::size_t sequence = 0;
  std::string model;
  double temperature = 0.0;
  std::vector<Message> messages;
  std::string messages_hash;
  std::size_t token_estimate = 0;
  // Empty when the request failed; the failure is kept in `error`.
  std::optional<std::string> response;
  std::optional<std::string> error;
  std::string timestamp;

  bool operator==(const TranscriptRecord&) const = default;
};

// Append-only record of every request sent during a run.
class Transcript {
 public:
  // Throws ArgumentError on a duplicate request id.
  void append(TranscriptRecord record);
  const std::vector<TranscriptRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  void sort_by_sequence();

  std::string to_jsonl() const;
  // Throws LoadError on a malformed line, ArgumentError on duplicate ids.
  static Transcript from_jsonl(std::string_view content);
  static Transcript load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<TranscriptRecord> records_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// FNV-1a 64 over roles and contents, as 16 hex digits.
std::string hash_messages(const std::vector<Message>& messages);

std::string utc_timestamp();

TranscriptRecord make_record(const ChatRequest& request, std::optional<std::string> response,
                             std::optional<std::string> error = std::nullopt);

// Appends one (request, response) pair.
Transcript& record(Transcript& transcript, const ChatRequest& request, std::string response);

// A scripted backend configuration replaying the transcript at `path`.
BackendConfig replay_source(const std::filesystem::path& path, bool lenient = false);

class ChatBackend {
 public:
  explicit ChatBackend(std::size_t token_limit) : token_limit_(token_limit) {}
  virtual ~ChatBackend() = default;
  ChatBackend(const ChatBackend&) = delete;
  ChatBackend& operator=(const ChatBackend&) = delete;

  // Throws TokenBudgetError before sending anything when the request is
  // over the limit. Safe to call from several threads.
  std::string complete(const ChatRequest& request);

  std::size_t token_limit() const { return token_limit_; }

 protected:
  virtual std::string send(const ChatRequest& request) = 0;

 private:
  std::size_t token_limit_;
};

class OracleBackend : public ChatBackend {
 public:
  explicit OracleBackend(std::size_t token_limit = kDefaultTokenLimit) : ChatBackend(token_limit) {}

  // Gold answers joined by ", "; an answer outside the offered candidates or
  // an unannotated position becomes "I don't know".
  static std::vector<std::string> gold_answers(const OracleHint& hint);

 protected:
  std::string send(const ChatRequest& request) override;
};

class SynonymOracleBackend : public ChatBackend {
 public:
  SynonymOracleBackend(LabelVocabulary vocabulary, std::size_t token_limit = kDefaultTokenLimit)
      : ChatBackend(token_limit), vocabulary_(std::move(vocabulary)) {}

 protected:
  std::string send(const ChatRequest& request) override;

 private:
  LabelVocabulary vocabulary_;
};

// With probability `rate` per answer, replaces the gold answer with a wrong
// candidate or "I don't know". The draw depends only on (seed, request id,
// answer position), so results do not depend on call order.
class NoisyOracleBackend : public ChatBackend {
 public:
  NoisyOracleBackend(LabelVocabulary vocabulary, double rate, std::uint64_t seed,
                     std::size_t token_limit = kDefaultTokenLimit);

 protected:
  std::string send(const ChatRequest& request) override;

 private:
  LabelVocabulary vocabulary_;
  double rate_;
  std::uint64_t seed_;
};

using WarningSink = std::function<void(const std::string&)>;

// Serves recorded responses by request sequence. Strict mode rejects a request
// whose id or message hash differs from the record; lenient mode warns and
// serves the recorded response anyway.
class ScriptedBackend : public ChatBackend {
 public:
  ScriptedBackend(Transcript transcript, bool lenient, WarningSink warn = {},
                  std::size_t token_limit = kDefaultTokenLimit);

 protected:
  std::string send(const ChatRequest& request) override;

 private:
  Transcript transcript_;
  std::map<std::size_t, std::size_t> by_sequence_;
  std::size_t max_sequence_ = 0;
  bool lenient_;
  WarningSink warn_;
  std::mutex warn_mutex_;
};

struct HttpResponse {
  // 0 when no response arrived (connection failure or timeout).
  int status = 0;
  std::string body;
  std::string error;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const std::string& url, const std::string& body,
                            const std::vector<std::pair<std::string, std::string>>& headers,
                            std::chrono::seconds timeout) = 0;
};

std::unique_ptr<HttpTransport> make_default_transport();

using Sleeper = std::function<void(std::chrono::milliseconds)>;

// 429, 5xx and lost connections (timeouts included) are transient; any other
// status is final.
bool is_retryable_status(int status);

// Delay before retry number `retry` (0-based), before jitter.
std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int retry);

// Chat-completions over HTTP: POST {model, temperature, messages}, reply in
// choices[0].message.content.
class HttpBackend : public ChatBackend {
 public:
  HttpBackend(BackendConfig config, std::unique_ptr<HttpTransport> transport, Sleeper sleeper = {});

  static std::string request_body(const ChatRequest& request);
  // Throws TransportError when the body has no assistant content.
  static std::string parse_response(const std::string& body);

 protected:
  std::string send(const ChatRequest& request) override;

 private:
  BackendConfig config_;
  std::unique_ptr<HttpTransport> transport_;
  Sleeper sleeper_;
};

// Forwards to an inner backend and records every exchange, failures included.
class RecordingBackend : public ChatBackend {
 public:
  explicit RecordingBackend(std::unique_ptr<ChatBackend> inner);

  // Records collected so far, sorted by sequence.
  Transcript transcript() const;

 protected:
  std::string send(const ChatRequest& request) override;

 private:
  std::unique_ptr<ChatBackend> inner_;
  mutable std::mutex mutex_;
  Transcript transcript_;
};

// Throws ArgumentError on a bad configuration (missing API key, missing
// transcript, rate outside [0, 1]). `warn` receives lenient-replay warnings.
std::unique_ptr<ChatBackend> make_backend(const BackendConfig& config,
                                          const LabelVocabulary& vocabulary, WarningSink warn = {});

}  // namespace tablesage
