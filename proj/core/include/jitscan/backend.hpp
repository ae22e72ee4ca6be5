// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace jitscan::agent {

struct Decoding {
    double temperature = 0.0;
};

struct BackendError : std::runtime_error {
    explicit BackendError(const std::string& what) : std::runtime_error(what) {}
};

class ModelBackend {
public:
    virtual ~ModelBackend() = default;
    virtual std::string complete(const std::string& prompt, const Decoding& decoding = {}) = 0;
};

/// Replays recorded completions. Two script shapes:
///  - sequential: JSONL lines {"text": ...}, consumed in order;
///  - keyed: JSONL lines {"sample_id", "version", "text"}, one queue per
///    (sample, version), consumed via view_for — this is what permits
///    parallel sample execution with deterministic results.
/// Exhausting a queue raises BackendError.
class ScriptedBackend : public ModelBackend {
public:
    explicit ScriptedBackend(std::vector<std::string> completions);
    static std::unique_ptr<ScriptedBackend> from_file(const std::string& jsonl_path);

    std::string complete(const std::string& prompt, const Decoding& decoding = {}) override;

    bool keyed() const { return keyed_; }
    std::size_t remaining() const;

    /// Detach the completion queue for one (sample, version). Call once per
    /// key, before workers start. Keyed scripts only.
    std::unique_ptr<ModelBackend> view_for(const std::string& sample_id,
                                           const std::string& version);

private:
    ScriptedBackend() = default;

    mutable std::mutex mu_;
    std::deque<std::string> sequence_;
    std::map<std::pair<std::string, std::string>, std::deque<std::string>> keyed_queues_;
    bool keyed_ = false;
};

/// Remote model over HTTP: POST {"prompt", "temperature"} to a fixed
/// endpoint, expecting {"text"} back. Endpoint and bearer credential come
/// from JITSCAN_MODEL_URL / JITSCAN_MODEL_KEY when built via from_env.
class GatewayBackend : public ModelBackend {
public:
    GatewayBackend(std::string url, std::string api_key = {});
    static GatewayBackend from_env();

    std::string complete(const std::string& prompt, const Decoding& decoding = {}) override;

private:
    std::string url_;
    std::string api_key_;
};

} // namespace jitscan::agent
