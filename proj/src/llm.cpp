#include "tablesage/llm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <random>
#include <thread>

#include <json.hpp>

#include "tablesage/errors.hpp"
#include "tablesage/io.hpp"
#include "tablesage/random.hpp"
#include "tablesage/text.hpp"

namespace tablesage {
namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json messages_to_json(const std::vector<Message>& messages) {
  ordered_json out = ordered_json::array();
  for (const auto& m : messages) {
    out.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
  }
  return out;
}

std::vector<Message> messages_from_json(const ordered_json& j) {
  std::vector<Message> out;
  for (const auto& m : j) {
    out.push_back({parse_role(m.at("role").get<std::string>()), m.at("content").get<std::string>()});
  }
  return out;
}

ordered_json record_to_json(const TranscriptRecord& r) {
  ordered_json j;
  j["request_id"] = r.request_id;
  j["sequence"] = r.sequence;
  j["model"] = r.model;
  j["temperature"] = r.temperature;
  j["messages"] = messages_to_json(r.messages);
  j["messages_hash"] = r.messages_hash;
  j["token_estimate"] = r.token_estimate;
  j["response"] = r.response ? ordered_json(*r.response) : ordered_json(nullptr);
  if (r.error) {
    j["error"] = *r.error;
  }
  j["timestamp"] = r.timestamp;
  return j;
}

TranscriptRecord record_from_json(const ordered_json& j) {
  TranscriptRecord r;
  r.request_id = j.at("request_id").get<std::string>();
  r.sequence = j.at("sequence").get<std::size_t>();
  r.model = j.value("model", std::string(kDefaultModel));
  r.temperature = j.value("temperature", 0.0);
  r.messages = messages_from_json(j.at("messages"));
  r.messages_hash = j.value("messages_hash", hash_messages(r.messages));
  r.token_estimate = j.value("token_estimate", estimate_message_tokens(r.messages));
  if (j.contains("response") && !j.at("response").is_null()) {
    r.response = j.at("response").get<std::string>();
  }
  if (j.contains("error") && !j.at("error").is_null()) {
    r.error = j.at("error").get<std::string>();
  }
  r.timestamp = j.value("timestamp", std::string());
  return r;
}

}  // namespace

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::kHttp:
      return "http";
    case BackendKind::kOracle:
      return "oracle";
    case BackendKind::kSynonymOracle:
      return "synonym";
    case BackendKind::kNoisyOracle:
      return "noisy";
    case BackendKind::kScripted:
      return "scripted";
  }
  return "oracle";
}

BackendKind parse_backend_kind(std::string_view name) {
  if (name == "http") {
    return BackendKind::kHttp;
  }
  if (name == "oracle") {
    return BackendKind::kOracle;
  }
  if (name == "synonym" || name == "synonym_oracle") {
    return BackendKind::kSynonymOracle;
  }
  if (name == "noisy" || name == "noisy_oracle") {
    return BackendKind::kNoisyOracle;
  }
  if (name == "scripted") {
    return BackendKind::kScripted;
  }
  throw ArgumentError("unknown backend '" + std::string(name) +
                      "' (expected http, oracle, synonym, noisy or scripted)");
}

void BackendConfig::validate() const {
  if (!(corruption_rate >= 0.0 && corruption_rate <= 1.0)) {
    throw ArgumentError("corruption rate must lie in [0, 1]");
  }
  if (token_limit == 0) {
    throw ArgumentError("token limit must be positive");
  }
  if (retry.max_attempts < 1) {
    throw ArgumentError("retry policy needs at least one attempt");
  }
}

// ---------------------------------------------------------------- transcript

void Transcript::append(TranscriptRecord record) {
  if (index_.count(record.request_id) != 0) {
    throw ArgumentError("duplicate request id '" + record.request_id + "' in transcript");
  }
  index_.emplace(record.request_id, records_.size());
  records_.push_back(std::move(record));
}

void Transcript::sort_by_sequence() {
  std::stable_sort(records_.begin(), records_.end(),
                   [](const TranscriptRecord& a, const TranscriptRecord& b) {
                     return a.sequence < b.sequence;
                   });
  index_.clear();
  for (std::size_t i = 0; i < records_.size(); ++i) {
    index_.emplace(records_[i].request_id, i);
  }
}

std::string Transcript::to_jsonl() const {
  std::string out;
  for (const auto& r : records_) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

Transcript Transcript::from_jsonl(std::string_view content) {
  Transcript transcript;
  std::size_t line_no = 0;
  for (const auto& line : text::split(content, '\n')) {
    ++line_no;
    if (text::trim(line).empty()) {
      continue;
    }
    try {
      transcript.append(record_from_json(ordered_json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw LoadError("transcript line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return transcript;
}

Transcript Transcript::load(const std::filesystem::path& path) {
  try {
    return from_jsonl(read_file(path));
  } catch (const LoadError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

void Transcript::save(const std::filesystem::path& path) const { write_file(path, to_jsonl()); }

std::string hash_messages(const std::vector<Message>& messages) {
  std::uint64_t h = fnv1a64("");
  for (const auto& m : messages) {
    h = fnv1a64(to_string(m.role), h);
    h = fnv1a64(std::string_view("\x1f", 1), h);
    h = fnv1a64(m.content, h);
    h = fnv1a64(std::string_view("\x1e", 1), h);
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()) % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof(out), "%s.%03dZ", buf, static_cast<int>(ms.count()));
  return out;
}

TranscriptRecord make_record(const ChatRequest& request, std::optional<std::string> response,
                             std::optional<std::string> error) {
  TranscriptRecord r;
  r.request_id = request.request_id;
  r.sequence = request.sequence;
  r.model = request.model_name;
  r.temperature = request.temperature;
  r.messages = request.messages;
  r.messages_hash = hash_messages(request.messages);
  r.token_estimate = estimate_message_tokens(request.messages);
  r.response = std::move(response);
  r.error = std::move(error);
  r.timestamp = utc_timestamp();
  return r;
}

Transcript& record(Transcript& transcript, const ChatRequest& request, std::string response) {
  transcript.append(make_record(request, std::move(response)));
  return transcript;
}

BackendConfig replay_source(const std::filesystem::path& path, bool lenient) {
  BackendConfig config;
  config.kind = BackendKind::kScripted;
  config.transcript_path = path;
  config.lenient_replay = lenient;
  return config;
}

// ------------------------------------------------------------------ backends

std::string ChatBackend::complete(const ChatRequest& request) {
  if (request.messages.empty()) {
    throw ArgumentError("chat request '" + request.request_id + "' has no messages");
  }
  if (request.temperature < 0.0) {
    throw ArgumentError("temperature must be non-negative");
  }
  const std::size_t estimate = estimate_message_tokens(request.messages);
  if (estimate > token_limit_) {
    throw TokenBudgetError(estimate, token_limit_);
  }
  return send(request);
}

std::vector<std::string> OracleBackend::gold_answers(const OracleHint& hint) {
  std::vector<std::string> out;
  out.reserve(hint.gold.size());
  for (const auto& g : hint.gold) {
    const bool offered =
        hint.candidates.empty() ||
        std::find(hint.candidates.begin(), hint.candidates.end(), g) != hint.candidates.end();
    out.push_back(g.empty() || !offered ? std::string(kIDontKnow) : g);
  }
  return out;
}

std::string OracleBackend::send(const ChatRequest& request) {
  if (request.hint.gold.empty()) {
    throw ArgumentError("oracle backend: request '" + request.request_id + "' carries no gold answer");
  }
  return text::join(gold_answers(request.hint), ", ");
}

std::string SynonymOracleBackend::send(const ChatRequest& request) {
  if (request.hint.gold.empty()) {
    throw ArgumentError("synonym oracle: request '" + request.request_id + "' carries no gold answer");
  }
  auto answers = OracleBackend::gold_answers(request.hint);
  for (auto& a : answers) {
    if (auto synonym = vocabulary_.first_synonym_of(a)) {
      a = *synonym;
    }
  }
  return text::join(answers, ", ");
}

NoisyOracleBackend::NoisyOracleBackend(LabelVocabulary vocabulary, double rate, std::uint64_t seed,
                                       std::size_t token_limit)
    : ChatBackend(token_limit), vocabulary_(std::move(vocabulary)), rate_(rate), seed_(seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw ArgumentError("corruption rate must lie in [0, 1]");
  }
}

std::string NoisyOracleBackend::send(const ChatRequest& request) {
  if (request.hint.gold.empty()) {
    throw ArgumentError("noisy oracle: request '" + request.request_id + "' carries no gold answer");
  }
  const auto& pool = request.hint.candidates.empty() ? vocabulary_.labels() : request.hint.candidates;
  auto answers = OracleBackend::gold_answers(request.hint);
  for (std::size_t i = 0; i < answers.size(); ++i) {
    Rng rng(mix_seed(seed_, request.request_id + "#" + std::to_string(i)));
    if (rng.uniform_unit() >= rate_) {
      continue;
    }
    std::vector<std::string> wrong;
    for (const auto& c : pool) {
      if (c != answers[i]) {
        wrong.push_back(c);
      }
    }
    wrong.emplace_back(kIDontKnow);
    answers[i] = wrong[rng.uniform_index(wrong.size())];
  }
  return text::join(answers, ", ");
}

ScriptedBackend::ScriptedBackend(Transcript transcript, bool lenient, WarningSink warn,
                                 std::size_t token_limit)
    : ChatBackend(token_limit),
      transcript_(std::move(transcript)),
      lenient_(lenient),
      warn_(warn ? std::move(warn) : WarningSink([](const std::string& m) {
        std::cerr << "warning: " << m << "\n";
      })) {
  const auto& records = transcript_.records();
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!by_sequence_.emplace(records[i].sequence, i).second) {
      throw ReplayError("transcript holds two records at position " +
                        std::to_string(records[i].sequence));
    }
    max_sequence_ = std::max(max_sequence_, records[i].sequence);
  }
}

std::string ScriptedBackend::send(const ChatRequest& request) {
  auto it = by_sequence_.find(request.sequence);
  if (it == by_sequence_.end()) {
    if (by_sequence_.empty() || request.sequence > max_sequence_) {
      throw ReplayError("transcript exhausted: no recorded response for request #" +
                        std::to_string(request.sequence) + " ('" + request.request_id + "')");
    }
    throw ReplayError("transcript has no record at position " + std::to_string(request.sequence) +
                      " ('" + request.request_id + "')");
  }
  const TranscriptRecord& rec = transcript_.records()[it->second];
  std::string problem;
  if (rec.request_id != request.request_id) {
    problem = "request #" + std::to_string(request.sequence) + " is '" + request.request_id +
              "' but the transcript recorded '" + rec.request_id + "'";
  } else if (rec.messages_hash != hash_messages(request.messages)) {
    problem = "request '" + request.request_id + "' diverges from the recorded prompt (hash " +
              hash_messages(request.messages) + " vs " + rec.messages_hash + ")";
  }
  if (!problem.empty()) {
    if (!lenient_) {
      throw ReplayError(problem);
    }
    std::lock_guard<std::mutex> lock(warn_mutex_);
    warn_(problem);
  }
  if (rec.error) {
    throw TransportError("replayed failure: " + *rec.error);
  }
  return rec.response.value_or("");
}

// ---------------------------------------------------------------------- http

bool is_retryable_status(int status) {
  return status == 0 || status == 429 || status >= 500;
}

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int retry) {
  double ms = static_cast<double>(policy.initial_delay.count()) * std::pow(policy.multiplier, retry);
  return std::chrono::milliseconds(static_cast<long long>(ms));
}

HttpBackend::HttpBackend(BackendConfig config, std::unique_ptr<HttpTransport> transport,
                         Sleeper sleeper)
    : ChatBackend(config.token_limit),
      config_(std::move(config)),
      transport_(std::move(transport)),
      sleeper_(sleeper ? std::move(sleeper)
                       : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })) {
  if (!transport_) {
    throw ArgumentError("http backend needs a transport");
  }
}

std::string HttpBackend::request_body(const ChatRequest& request) {
  ordered_json body;
  body["model"] = request.model_name;
  body["temperature"] = request.temperature;
  body["messages"] = messages_to_json(request.messages);
  return body.dump();
}

std::string HttpBackend::parse_response(const std::string& body) {
  try {
    auto j = nlohmann::json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) {
      throw TransportError("chat completion content is not a string");
    }
    return content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("malformed chat completion response: ") + e.what());
  }
}

std::string HttpBackend::send(const ChatRequest& request) {
  const std::string body = request_body(request);
  std::vector<std::pair<std::string, std::string>> headers = {
      {"Authorization", "Bearer " + config_.api_key}};
  thread_local std::mt19937 jitter_rng(std::random_device{}());
  std::uniform_real_distribution<double> jitter(1.0 - config_.retry.jitter, 1.0);

  std::string last_error;
  for (int attempt = 0; attempt < config_.retry.max_attempts; ++attempt) {
    if (attempt > 0) {
      auto delay = backoff_delay(config_.retry, attempt - 1);
      sleeper_(std::chrono::milliseconds(
          static_cast<long long>(static_cast<double>(delay.count()) * jitter(jitter_rng))));
    }
    HttpResponse response = transport_->post(config_.endpoint, body, headers, config_.timeout);
    if (response.status >= 200 && response.status < 300) {
      return parse_response(response.body);
    }
    last_error = response.status == 0
                     ? "no response (" + response.error + ")"
                     : "HTTP " + std::to_string(response.status) + ": " + response.body.substr(0, 200);
    if (!is_retryable_status(response.status)) {
      throw TransportError("request '" + request.request_id + "' failed: " + last_error);
    }
  }
  throw TransportError("request '" + request.request_id + "' failed after " +
                       std::to_string(config_.retry.max_attempts) + " attempts: " + last_error);
}

// ----------------------------------------------------------------- recording

RecordingBackend::RecordingBackend(std::unique_ptr<ChatBackend> inner)
    : ChatBackend(inner ? inner->token_limit() : kDefaultTokenLimit), inner_(std::move(inner)) {
  if (!inner_) {
    throw ArgumentError("recording backend needs an inner backend");
  }
}

Transcript RecordingBackend::transcript() const {
  std::lock_guard<std::mutex> lock(mutex_);
  Transcript copy = transcript_;
  copy.sort_by_sequence();
  return copy;
}

std::string RecordingBackend::send(const ChatRequest& request) {
  try {
    std::string response = inner_->complete(request);
    std::lock_guard<std::mutex> lock(mutex_);
    transcript_.append(make_record(request, response));
    return response;
  } catch (const TransportError& e) {
    std::lock_guard<std::mutex> lock(mutex_);
    transcript_.append(make_record(request, std::nullopt, std::string(e.what())));
    throw;
  }
}

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& config,
                                          const LabelVocabulary& vocabulary, WarningSink warn) {
  config.validate();
  switch (config.kind) {
    case BackendKind::kOracle:
      return std::make_unique<OracleBackend>(config.token_limit);
    case BackendKind::kSynonymOracle:
      return std::make_unique<SynonymOracleBackend>(vocabulary, config.token_limit);
    case BackendKind::kNoisyOracle:
      return std::make_unique<NoisyOracleBackend>(vocabulary, config.corruption_rate,
                                                  config.noise_seed, config.token_limit);
    case BackendKind::kScripted: {
      if (config.transcript_path.empty()) {
        throw ArgumentError("scripted backend needs a transcript path");
      }
      return std::make_unique<ScriptedBackend>(Transcript::load(config.transcript_path),
                                               config.lenient_replay, std::move(warn),
                                               config.token_limit);
    }
    case BackendKind::kHttp: {
      BackendConfig resolved = config;
      if (resolved.api_key.empty()) {
        if (const char* key = std::getenv(std::string(kApiKeyVariable).c_str())) {
          resolved.api_key = key;
        }
      }
      if (resolved.api_key.empty()) {
        throw ArgumentError("http backend: set " + std::string(kApiKeyVariable));
      }
      return std::make_unique<HttpBackend>(std::move(resolved), make_default_transport());
    }
  }
  throw ArgumentError("unsupported backend kind");
}

}  // namespace tablesage
