// SPDX-License-Identifier: Apache-2.0
#include "jitscan/backend.hpp"

#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>

namespace jitscan::agent {

namespace {
using json = nlohmann::ordered_json;
}

ScriptedBackend::ScriptedBackend(std::vector<std::string> completions) {
    for (auto& c : completions) sequence_.push_back(std::move(c));
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::string& jsonl_path) {
    std::ifstream in(jsonl_path);
    if (!in) throw BackendError("cannot read script: " + jsonl_path);

    auto b = std::unique_ptr<ScriptedBackend>(new ScriptedBackend());
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::exception& e) {
            throw BackendError("script line " + std::to_string(lineno) + ": " + e.what());
        }
        std::string text = doc.at("text").get<std::string>();
        if (doc.contains("sample_id")) {
            b->keyed_ = true;
            b->keyed_queues_[{doc.at("sample_id").get<std::string>(),
                              doc.at("version").get<std::string>()}]
                .push_back(std::move(text));
        } else {
            b->sequence_.push_back(std::move(text));
        }
    }
    if (b->keyed_ && !b->sequence_.empty())
        throw BackendError("script mixes keyed and sequential entries: " + jsonl_path);
    return b;
}

std::string ScriptedBackend::complete(const std::string&, const Decoding&) {
    std::lock_guard lock(mu_);
    if (keyed_) throw BackendError("keyed script requires view_for(sample_id, version)");
    if (sequence_.empty()) throw BackendError("script exhausted");
    std::string out = std::move(sequence_.front());
    sequence_.pop_front();
    return out;
}

std::size_t ScriptedBackend::remaining() const {
    std::lock_guard lock(mu_);
    std::size_t n = sequence_.size();
    for (const auto& [key, q] : keyed_queues_) n += q.size();
    return n;
}

namespace {

class QueueView : public ModelBackend {
public:
    QueueView(std::deque<std::string> q, std::string key) : q_(std::move(q)), key_(std::move(key)) {}

    std::string complete(const std::string&, const Decoding&) override {
        if (q_.empty()) throw BackendError("script exhausted for " + key_);
        std::string out = std::move(q_.front());
        q_.pop_front();
        return out;
    }

private:
    std::deque<std::string> q_;
    std::string key_;
};

} // namespace

std::unique_ptr<ModelBackend> ScriptedBackend::view_for(const std::string& sample_id,
                                                        const std::string& version) {
    std::lock_guard lock(mu_);
    auto it = keyed_queues_.find({sample_id, version});
    std::deque<std::string> q;
    if (it != keyed_queues_.end()) {
        q = std::move(it->second);
        keyed_queues_.erase(it);
    }
    return std::make_unique<QueueView>(std::move(q), sample_id + "/" + version);
}

GatewayBackend::GatewayBackend(std::string url, std::string api_key)
    : url_(std::move(url)), api_key_(std::move(api_key)) {}

GatewayBackend GatewayBackend::from_env() {
    const char* url = std::getenv("JITSCAN_MODEL_URL");
    if (!url || !*url) throw BackendError("JITSCAN_MODEL_URL is not set");
    const char* key = std::getenv("JITSCAN_MODEL_KEY");
    return GatewayBackend(url, key ? key : "");
}

std::string GatewayBackend::complete(const std::string& prompt, const Decoding& decoding) {
    // split "<scheme>://<host>[:port]" from the path
    std::size_t scheme = url_.find("://");
    if (scheme == std::string::npos) throw BackendError("malformed endpoint URL: " + url_);
    std::size_t path_pos = url_.find('/', scheme + 3);
    std::string base = path_pos == std::string::npos ? url_ : url_.substr(0, path_pos);
    std::string path = path_pos == std::string::npos ? "/" : url_.substr(path_pos);

    httplib::Client client(base);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    json body = {{"prompt", prompt}, {"temperature", decoding.temperature}};
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) throw BackendError("gateway unreachable: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw BackendError("gateway returned status " + std::to_string(res->status));

    try {
        json doc = json::parse(res->body);
        return doc.at("text").get<std::string>();
    } catch (const json::exception& e) {
        throw BackendError(std::string("malformed gateway response: ") + e.what());
    }
}

} // namespace jitscan::agent
