#include "dupviper/service.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "dupviper/clonemap.hpp"
#include "dupviper/corpus.hpp"
#include "dupviper/distance.hpp"
#include "dupviper/error.hpp"
#include "dupviper/groups.hpp"
#include "dupviper/search.hpp"

namespace dupviper {

namespace fs = std::filesystem;
using nlohmann::json;

std::string content_hash(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << h;
    return out.str();
}

namespace {

// A request that cannot be served; carries the HTTP status and a JSON body.
struct HttpError {
    int status;
    json body;
};

[[noreturn]] void fail(int status, const std::string& message, json extra = json::object()) {
    extra["error"] = message;
    throw HttpError{status, std::move(extra)};
}

void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) {
        return json::object();
    }
    json j = json::parse(req.body, nullptr, false);
    if (j.is_discarded()) {
        fail(400, "request body is not valid JSON");
    }
    return j;
}

enum class Status { pending, accepted, rejected };

const char* status_name(Status s) {
    switch (s) {
        case Status::accepted:
            return "accepted";
        case Status::rejected:
            return "rejected";
        default:
            return "pending";
    }
}

struct Element {
    TextFragment fragment;
    std::size_t distance = 0;
    Status status = Status::pending;
    bool edited = false;
};

json element_json(std::size_t index, const Element& e) {
    return {{"index", index},
            {"b", e.fragment.b},
            {"e", e.fragment.e},
            {"text", e.fragment.utf8()},
            {"distance", e.distance},
            {"status", status_name(e.status)},
            {"edited", e.edited}};
}

struct Session {
    std::string id;
    DocumentPtr doc;
    std::mutex mutex;  // serializes edits, searches and journal writes

    json request;                  // last completed search request, null before the first
    std::optional<std::u32string> pattern_text;
    std::optional<TextFragment> pattern_fragment;
    json result = nullptr;         // ResultSet JSON as delivered
    std::vector<Element> elements;
    std::vector<json> groups;

    // In-flight search state.
    bool searching = false;
    std::uint64_t search_serial = 0;
    std::optional<json> last_error;  // {"status", "body"} of the last failed search
    std::stop_source stop;
    std::jthread worker;

    std::ofstream journal;
};

}  // namespace

struct Service::Impl {
    ServiceConfig config;
    fs::path state_dir;
    httplib::Server server;
    DistanceCache cache{DistanceCache::capacity_from_env()};

    mutable std::mutex docs_mutex;
    std::map<std::string, DocumentPtr> documents;
    std::map<std::pair<std::string, std::size_t>, std::string> heatmaps;  // serialized JSON

    mutable std::mutex sessions_mutex;
    std::map<std::string, std::shared_ptr<Session>> sessions;
    std::uint64_t next_session = 1;

    explicit Impl(ServiceConfig c) : config(std::move(c)) {
        std::error_code ec;
        if (config.corpus_dir.empty() || !fs::is_directory(config.corpus_dir, ec)) {
            throw ParameterError("corpus directory '" + config.corpus_dir + "' does not exist");
        }
        state_dir = fs::path(config.corpus_dir) / ".dupviper";
        fs::create_directories(state_dir / "documents", ec);
        fs::create_directories(state_dir / "sessions", ec);
        if (ec) {
            throw ParameterError("cannot create state directory under '" + config.corpus_dir + "': " + ec.message());
        }
        load_corpus();
        restore_sessions();
        routes();
    }

    ~Impl() {
        std::lock_guard lock(sessions_mutex);
        for (auto& [id, s] : sessions) {
            s->stop.request_stop();
        }
        for (auto& [id, s] : sessions) {
            if (s->worker.joinable()) {
                s->worker.join();
            }
        }
    }

    // Corpus files are named by file name, uploads by content hash.
    void load_corpus() {
        for (const auto& entry : fs::directory_iterator(config.corpus_dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".txt") {
                try {
                    auto doc = load_document_file(entry.path().string());
                    documents.emplace(doc->id(), doc);
                } catch (const Error& e) {
                    std::cerr << "skipping " << entry.path() << ": " << e.what() << '\n';
                }
            }
        }
        for (const auto& entry : fs::directory_iterator(state_dir / "documents")) {
            if (entry.is_regular_file()) {
                try {
                    auto doc = load_document_file(entry.path().string(), entry.path().stem().string());
                    documents.emplace(doc->id(), doc);
                } catch (const Error& e) {
                    std::cerr << "skipping " << entry.path() << ": " << e.what() << '\n';
                }
            }
        }
    }

    DocumentPtr find_document(const std::string& id) const {
        std::lock_guard lock(docs_mutex);
        auto it = documents.find(id);
        if (it == documents.end()) {
            fail(404, "unknown document '" + id + "'");
        }
        return it->second;
    }

    std::shared_ptr<Session> find_session(const std::string& id) const {
        std::lock_guard lock(sessions_mutex);
        auto it = sessions.find(id);
        if (it == sessions.end()) {
            fail(404, "unknown session '" + id + "'");
        }
        return it->second;
    }

    // ---- journal -------------------------------------------------------

    fs::path journal_path(const std::string& session_id) const { return state_dir / "sessions" / (session_id + ".jsonl"); }

    static void append(Session& s, const json& entry) {
        s.journal << entry.dump() << '\n';
        s.journal.flush();
    }

    // Applies one journal entry; shared by live requests and replay so that both produce the same state.
    static void apply(Session& s, const json& entry) {
        const std::string op = entry.at("op");
        if (op == "search") {
            s.request = entry.at("request");
            s.result = entry.at("result");
            s.pattern_text = decode_utf8(s.result.at("pattern").at("text").get<std::string>());
            s.pattern_fragment.reset();
            if (!s.result.at("pattern").at("b").is_null()) {
                s.pattern_fragment =
                    s.doc->fragment(s.result["pattern"]["b"].get<std::size_t>(), s.result["pattern"]["e"].get<std::size_t>());
            }
            s.elements.clear();
            for (const auto& e : s.result.at("elements")) {
                s.elements.push_back({s.doc->fragment(e.at("b").get<std::size_t>(), e.at("e").get<std::size_t>()),
                                      e.at("distance").get<std::size_t>(), Status::pending, false});
            }
        } else if (op == "edit") {
            Element& el = s.elements.at(entry.at("index").get<std::size_t>());
            const std::string action = entry.at("action");
            if (action == "reject") {
                el.status = Status::rejected;
            } else if (action == "restore") {
                el.status = Status::pending;
            } else if (action == "accept") {
                el.status = Status::accepted;
            } else if (action == "set_bounds") {
                el.fragment = s.doc->fragment(entry.at("b").get<std::size_t>(), entry.at("e").get<std::size_t>());
                el.distance = lcs_distance(el.fragment.view(), *s.pattern_text);
                el.edited = true;
            }
        } else if (op == "group") {
            s.groups.push_back(entry.at("group"));
        }
    }

    void restore_sessions() {
        for (const auto& entry : fs::directory_iterator(state_dir / "sessions")) {
            if (entry.path().extension() != ".jsonl") {
                continue;
            }
            std::ifstream in(entry.path());
            std::string line;
            std::shared_ptr<Session> s;
            try {
                while (std::getline(in, line)) {
                    if (line.empty()) {
                        continue;
                    }
                    const json e = json::parse(line);
                    if (e.at("op") == "create") {
                        s = std::make_shared<Session>();
                        s->id = e.at("session");
                        s->doc = documents.at(e.at("doc").get<std::string>());
                    } else if (s) {
                        apply(*s, e);
                    }
                }
            } catch (const std::exception& ex) {
                std::cerr << "cannot restore " << entry.path() << ": " << ex.what() << '\n';
                continue;
            }
            if (!s) {
                continue;
            }
            s->journal.open(entry.path(), std::ios::app);
            const std::string& id = s->id;
            if (id.size() > 1 && id[0] == 's') {
                try {
                    next_session = std::max<std::uint64_t>(next_session, std::stoull(id.substr(1)) + 1);
                } catch (const std::exception&) {
                }
            }
            sessions.emplace(id, std::move(s));
        }
    }

    // ---- documents -----------------------------------------------------

    json document_json(const Document& d) const {
        return {{"doc_id", d.id()}, {"length", d.length()}, {"token_count", d.tokens().size()}};
    }

    void post_document(const httplib::Request& req, httplib::Response& res) {
        std::string bytes = req.body;
        if (req.is_multipart_form_data()) {
            if (!req.has_file("file")) {
                fail(400, "multipart upload needs a 'file' part");
            }
            bytes = req.get_file_value("file").content;
        }
        if (bytes.size() > config.max_upload) {
            fail(413, "document exceeds " + std::to_string(config.max_upload) + " bytes");
        }
        const std::string id = content_hash(bytes);
        DocumentPtr doc;
        try {
            doc = load_document(bytes, id);
        } catch (const IngestError& e) {
            fail(400, e.what(), {{"byte_offset", e.byte_offset()}});
        }
        {
            std::lock_guard lock(docs_mutex);
            if (!documents.count(id)) {
                std::ofstream(state_dir / "documents" / (id + ".txt"), std::ios::binary) << bytes;
                documents.emplace(id, doc);
            }
        }
        reply(res, 201, document_json(*doc));
    }

    void get_heatmap(const httplib::Request& req, httplib::Response& res) {
        const auto doc = find_document(req.matches[1]);
        std::size_t min_tokens = kDefaultMinTokens;
        if (req.has_param("min_tokens")) {
            try {
                const long long n = std::stoll(req.get_param_value("min_tokens"));
                if (n <= 0) {
                    throw std::invalid_argument("min_tokens");
                }
                min_tokens = static_cast<std::size_t>(n);
            } catch (const std::exception&) {
                fail(400, "min_tokens must be a positive integer");
            }
        }
        const auto key = std::make_pair(doc->id(), min_tokens);
        {
            std::lock_guard lock(docs_mutex);
            if (auto it = heatmaps.find(key); it != heatmaps.end()) {
                res.set_content(it->second, "application/json");
                return;
            }
        }
        std::string body = heatmap_to_json(build_heatmap(*doc, min_tokens)).dump();
        std::lock_guard lock(docs_mutex);
        res.set_content(heatmaps.emplace(key, std::move(body)).first->second, "application/json");
    }

    // ---- sessions ------------------------------------------------------

    void post_session(const httplib::Request& req, httplib::Response& res) {
        const json body = parse_body(req);
        if (!body.contains("doc_id") || !body["doc_id"].is_string()) {
            fail(400, "doc_id is required");
        }
        auto s = std::make_shared<Session>();
        s->doc = find_document(body["doc_id"]);
        {
            std::lock_guard lock(sessions_mutex);
            s->id = "s" + std::to_string(next_session++);
            s->journal.open(journal_path(s->id), std::ios::app);
            if (!s->journal) {
                fail(500, "cannot open session journal");
            }
            append(*s, {{"op", "create"}, {"session", s->id}, {"doc", s->doc->id()}});
            sessions.emplace(s->id, s);
        }
        reply(res, 201, {{"session_id", s->id}, {"doc_id", s->doc->id()}});
    }

    json session_json(const Session& s) const {
        json elements = json::array();
        for (std::size_t i = 0; i < s.elements.size(); ++i) {
            elements.push_back(element_json(i, s.elements[i]));
        }
        return {{"session", s.id},
                {"doc", {{"id", s.doc->id()}, {"length", s.doc->length()}}},
                {"request", s.request},
                {"result_set", s.result},
                {"elements", std::move(elements)},
                {"groups", s.groups},
                {"searching", s.searching}};
    }

    SearchParams search_params(const Session& s, const json& body) const {
        if (!body.is_object()) {
            fail(400, "search request must be a JSON object");
        }
        SearchParams params;
        if (!body.contains("k") || !body["k"].is_number()) {
            fail(400, "k is required and must be a number");
        }
        params.k = body["k"].get<double>();
        try {
            validate_k(params.k);
        } catch (const ParameterError& e) {
            fail(400, e.what());
        }
        if (!body.contains("pattern")) {
            fail(400, "pattern is required");
        }
        const json& p = body["pattern"];
        if (p.is_string()) {
            try {
                params.pattern = Pattern::from_text(decode_utf8(p.get<std::string>()));
            } catch (const IngestError& e) {
                fail(400, e.what());
            }
        } else if (p.is_object() && p.contains("b") && p.contains("e") && p["b"].is_number_integer() &&
                   p["e"].is_number_integer()) {
            const auto b = p["b"].get<long long>(), e = p["e"].get<long long>();
            if (b < 0 || e < b || static_cast<std::size_t>(e) >= s.doc->length()) {
                fail(400, "pattern bounds [" + std::to_string(b) + ", " + std::to_string(e) + "] are outside the document");
            }
            params.pattern = Pattern::from_fragment(s.doc->fragment(static_cast<std::size_t>(b), static_cast<std::size_t>(e)));
        } else {
            fail(400, "pattern must be a string or {b, e}");
        }
        if (params.pattern.text.empty()) {
            fail(400, "pattern is empty");
        }
        try {
            if (body.contains("optimizations")) {
                params.optimizations = optimizations_from_json(body["optimizations"]);
            }
        } catch (const ParameterError& e) {
            fail(400, e.what());
        }
        for (const char* flag : {"strict_threshold", "exclude_self"}) {
            if (body.contains(flag) && !body[flag].is_boolean()) {
                fail(400, std::string(flag) + " must be boolean");
            }
        }
        params.strict_threshold = body.value("strict_threshold", false);
        params.exclude_self = body.value("exclude_self", false);
        params.workers = config.search_workers;
        params.cache = const_cast<DistanceCache*>(&cache);
        return params;
    }

    void post_search(const httplib::Request& req, httplib::Response& res) {
        auto s = find_session(req.matches[1]);
        const json body = parse_body(req);
        std::promise<void> done;
        auto finished = done.get_future();
        std::uint64_t serial;
        {
            std::lock_guard lock(s->mutex);
            if (s->searching) {
                fail(409, "a search is already running for session '" + s->id + "'");
            }
            SearchParams params = search_params(*s, body);
            if (s->worker.joinable()) {
                s->worker.join();
            }
            s->searching = true;
            s->last_error.reset();
            s->stop = std::stop_source();
            params.stop = s->stop.get_token();
            serial = ++s->search_serial;
            s->worker = std::jthread([this, s, body, params = std::move(params), done = std::move(done)]() mutable {
                run_search(*s, body, std::move(params));
                done.set_value();
            });
        }
        if (finished.wait_for(config.async_threshold) == std::future_status::ready) {
            respond_search(*s, res);
            return;
        }
        reply(res, 202, {{"status", "running"}, {"poll", "/sessions/" + s->id + "/search?token=" + std::to_string(serial)},
                         {"token", std::to_string(serial)}});
    }

    void run_search(Session& s, const json& body, SearchParams params) {
        json entry;
        std::optional<json> error;
        try {
            const ResultSet r = search(*s.doc, std::move(params));
            entry = {{"op", "search"}, {"request", body}, {"result", result_set_to_json(r)}};
        } catch (const SearchCancelled& e) {
            error = json{{"status", 503}, {"body", {{"error", e.what()}}}};
        } catch (const ParameterError& e) {
            error = json{{"status", 400}, {"body", {{"error", e.what()}}}};
        } catch (const ContractViolation& e) {
            error = json{{"status", 400}, {"body", {{"error", e.what()}}}};
        } catch (const std::exception& e) {
            error = json{{"status", 500}, {"body", {{"error", e.what()}}}};
        }
        std::lock_guard lock(s.mutex);
        if (error) {
            s.last_error = std::move(error);
        } else {
            apply(s, entry);
            append(s, entry);
        }
        s.searching = false;
    }

    void respond_search(Session& s, httplib::Response& res) {
        std::lock_guard lock(s.mutex);
        if (s.searching) {
            reply(res, 202, {{"status", "running"}, {"token", std::to_string(s.search_serial)}});
        } else if (s.last_error) {
            reply(res, (*s.last_error)["status"].get<int>(), (*s.last_error)["body"]);
        } else if (s.result.is_null()) {
            fail(404, "session '" + s.id + "' has no search result");
        } else {
            reply(res, 200, s.result);
        }
    }

    void get_search(const httplib::Request& req, httplib::Response& res) {
        auto s = find_session(req.matches[1]);
        if (req.has_param("token")) {
            std::lock_guard lock(s->mutex);
            if (req.get_param_value("token") != std::to_string(s->search_serial)) {
                fail(404, "unknown or superseded poll token");
            }
        }
        respond_search(*s, res);
    }

    void patch_result(const httplib::Request& req, httplib::Response& res) {
        auto s = find_session(req.matches[1]);
        const json body = parse_body(req);
        std::lock_guard lock(s->mutex);
        if (s->searching) {
            fail(409, "a search is running for session '" + s->id + "'");
        }
        std::size_t index;
        try {
            index = std::stoul(req.matches[2]);
        } catch (const std::exception&) {
            fail(404, "no element " + std::string(req.matches[2]));
        }
        if (index >= s->elements.size()) {
            fail(404, "no element " + std::to_string(index));
        }
        if (!body.contains("action") || !body["action"].is_string()) {
            fail(400, "action is required");
        }
        const std::string action = body["action"];
        json entry{{"op", "edit"}, {"index", index}, {"action", action}};
        if (action == "set_bounds") {
            const json& bounds = body.contains("bounds") ? body["bounds"] : body;
            if (!bounds.contains("b") || !bounds.contains("e") || !bounds["b"].is_number_integer() ||
                !bounds["e"].is_number_integer()) {
                fail(400, "set_bounds needs integer b and e");
            }
            const auto b = bounds["b"].get<long long>(), e = bounds["e"].get<long long>();
            if (b < 0 || e < b || static_cast<std::size_t>(e) >= s->doc->length()) {
                fail(400, "bounds [" + std::to_string(b) + ", " + std::to_string(e) + "] are outside the document");
            }
            entry["b"] = b;
            entry["e"] = e;
        } else if (action != "reject" && action != "restore" && action != "accept") {
            fail(400, "unknown action '" + action + "'");
        }
        apply(*s, entry);
        append(*s, entry);
        reply(res, 200, element_json(index, s->elements[index]));
    }

    void post_group(const httplib::Request& req, httplib::Response& res) {
        auto s = find_session(req.matches[1]);
        const json body = parse_body(req);
        std::lock_guard lock(s->mutex);
        if (s->result.is_null()) {
            fail(422, "session has no search result to group");
        }
        NearDuplicateGroup group;
        group.k = s->result.at("k").get<double>();
        group.label = body.value("label", std::string("group") + std::to_string(s->groups.size() + 1));
        if (body.contains("archetype") && body["archetype"].is_array()) {
            std::vector<std::u32string> blocks;
            for (const auto& block : body["archetype"]) {
                if (!block.is_string()) {
                    fail(400, "archetype must be a list of strings");
                }
                blocks.push_back(decode_utf8(block.get<std::string>()));
            }
            group.archetype = std::move(blocks);
        }
        for (const auto& el : s->elements) {
            if (el.status != Status::rejected) {
                group.members.push_back(el.fragment);
            }
        }
        // The pattern joins unless a kept element already stands for its occurrence.
        if (s->pattern_fragment &&
            std::none_of(group.members.begin(), group.members.end(),
                         [&](const TextFragment& m) { return intersection_length(m, *s->pattern_fragment) > 0; })) {
            group.members.push_back(*s->pattern_fragment);
        }
        std::sort(group.members.begin(), group.members.end(),
                  [](const TextFragment& x, const TextFragment& y) { return x.b != y.b ? x.b < y.b : x.e < y.e; });
        group.members.erase(std::unique(group.members.begin(), group.members.end()), group.members.end());

        const GroupValidation v = validate_group(group);
        if (!v.ok) {
            json diagnosis{{"reason", v.reason}, {"verification", to_string(v.verification)}};
            if (v.failing_member) {
                diagnosis["failing_member"] = *v.failing_member;
                diagnosis["member"] = fragment_to_json(group.members[*v.failing_member]);
            }
            fail(422, "group validation failed: " + v.reason, diagnosis);
        }
        json saved = group_to_json(group, v.verification);
        const json entry{{"op", "group"}, {"group", saved}};
        apply(*s, entry);
        append(*s, entry);
        reply(res, 201, saved);
    }

    void get_export(const httplib::Request& req, httplib::Response& res) {
        auto s = find_session(req.matches[1]);
        if (req.has_param("format") && req.get_param_value("format") != "json") {
            fail(400, "only format=json is supported");
        }
        std::lock_guard lock(s->mutex);
        json bundle = session_json(*s);
        bundle.erase("searching");
        bundle["generator"] = "dupviper";
        reply(res, 200, bundle);
    }

    // ---- routing -------------------------------------------------------

    template <typename Method>
    void handle(const httplib::Request& req, httplib::Response& res, Method method) {
        try {
            (this->*method)(req, res);
        } catch (const HttpError& e) {
            reply(res, e.status, e.body);
        } catch (const ParameterError& e) {
            reply(res, 400, {{"error", e.what()}});
        } catch (const std::exception& e) {
            reply(res, 500, {{"error", e.what()}});
        }
    }

    void routes() {
        server.set_payload_max_length(config.max_upload + (64u << 10));
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
        server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Methods", "GET, POST, PATCH, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
            res.status = 204;
        });
        server.Get("/health", [](const httplib::Request&, httplib::Response& res) { reply(res, 200, {{"status", "ok"}}); });
        // The library default sets SO_REUSEPORT, which lets a second server share a busy port.
        server.set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
        });

        auto bind = [this](auto method) {
            return [this, method](const httplib::Request& req, httplib::Response& res) { handle(req, res, method); };
        };
        server.Get("/documents", bind(&Impl::list_documents));
        server.Post("/documents", bind(&Impl::post_document));
        server.Get(R"(/documents/([^/]+))", bind(&Impl::get_document));
        server.Get(R"(/documents/([^/]+)/text)", bind(&Impl::get_text));
        server.Get(R"(/documents/([^/]+)/heatmap)", bind(&Impl::get_heatmap));
        server.Post("/sessions", bind(&Impl::post_session));
        server.Get(R"(/sessions/([^/]+))", bind(&Impl::get_session));
        server.Post(R"(/sessions/([^/]+)/search)", bind(&Impl::post_search));
        server.Get(R"(/sessions/([^/]+)/search)", bind(&Impl::get_search));
        server.Patch(R"(/sessions/([^/]+)/results/([^/]+))", bind(&Impl::patch_result));
        server.Post(R"(/sessions/([^/]+)/groups)", bind(&Impl::post_group));
        server.Get(R"(/sessions/([^/]+)/export)", bind(&Impl::get_export));
    }

    void list_documents(const httplib::Request&, httplib::Response& res) {
        json out = json::array();
        std::lock_guard lock(docs_mutex);
        for (const auto& [id, doc] : documents) {
            out.push_back(document_json(*doc));
        }
        reply(res, 200, out);
    }

    void get_document(const httplib::Request& req, httplib::Response& res) {
        reply(res, 200, document_json(*find_document(req.matches[1])));
    }

    void get_text(const httplib::Request& req, httplib::Response& res) {
        res.set_content(encode_utf8(find_document(req.matches[1])->text()), "text/plain; charset=utf-8");
    }

    void get_session(const httplib::Request& req, httplib::Response& res) {
        auto s = find_session(req.matches[1]);
        std::lock_guard lock(s->mutex);
        reply(res, 200, session_json(*s));
    }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Service::~Service() = default;

int Service::bind() {
    auto& c = impl_->config;
    if (c.port == 0) {
        const int port = impl_->server.bind_to_any_port(c.host);
        return port > 0 ? port : -1;
    }
    return impl_->server.bind_to_port(c.host, c.port) ? c.port : -1;
}

void Service::listen() { impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

std::size_t Service::document_count() const {
    std::lock_guard lock(impl_->docs_mutex);
    return impl_->documents.size();
}

std::size_t Service::session_count() const {
    std::lock_guard lock(impl_->sessions_mutex);
    return impl_->sessions.size();
}

}  // namespace dupviper
