#include <doctest.h>

#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "dupviper/clonemap.hpp"
#include "dupviper/distance.hpp"
#include "dupviper/error.hpp"
#include "dupviper/groups.hpp"
#include "dupviper/schema.hpp"
#include "dupviper/search.hpp"
#include "dupviper/service.hpp"

using namespace dupviper;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("dupviper_service_" + std::to_string(::getpid()) + "_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& bytes) { std::ofstream(path, std::ios::binary) << bytes; }

// A service on an ephemeral port, serving on a background thread until destruction.
struct Running {
    std::unique_ptr<Service> service;
    std::thread thread;
    int port = -1;
    std::unique_ptr<httplib::Client> client;

    explicit Running(ServiceConfig config) {
        config.port = 0;
        service = std::make_unique<Service>(config);
        port = service->bind();
        REQUIRE(port > 0);
        thread = std::thread([this] { service->listen(); });
        client = std::make_unique<httplib::Client>("127.0.0.1", port);
        client->set_connection_timeout(std::chrono::seconds(1));
        client->set_read_timeout(std::chrono::seconds(60));
        // stop() is only reliable once the accept loop runs.
        bool up = false;
        for (int i = 0; i < 200 && !up; ++i) {
            auto res = client->Get("/health");
            up = res && res->status == 200;
            if (!up) {
                std::this_thread::sleep_for(std::chrono::milliseconds(10));
            }
        }
        REQUIRE(up);
    }

    ~Running() {
        service->stop();
        thread.join();
    }

    httplib::Result post(const std::string& path, const json& body) {
        return client->Post(path, body.dump(), "application/json");
    }
    httplib::Result patch(const std::string& path, const json& body) {
        return client->Patch(path, body.dump(), "application/json");
    }
};

ServiceConfig config_for(const fs::path& dir) {
    ServiceConfig c;
    c.corpus_dir = dir.string();
    c.search_workers = 1;
    return c;
}

json body_of(const httplib::Result& res) {
    REQUIRE(res);
    return json::parse(res->body);
}

// Three light variants of a 120-symbol pattern, far enough apart to be separate results.
PlantedFixture planted(std::uint64_t seed = 21) {
    const auto pattern = filler_text(120, FillerAlphabet::latin, seed);
    PlantOptions options;
    options.edits = 2;
    options.lead = 300;
    options.gap = 400;
    options.trail = 300;
    return plant_group(options, pattern, 0.9, 3, seed + 1);
}

std::string create_session(Running& r, const std::string& doc_id) {
    auto res = r.post("/sessions", {{"doc_id", doc_id}});
    REQUIRE(res);
    REQUIRE(res->status == 201);
    return body_of(res)["session_id"];
}

json search_request(const TextFragment& g, double k) {
    return {{"pattern", {{"b", g.b}, {"e", g.e}}}, {"k", k}, {"strict_threshold", true}};
}

std::vector<TextFragment> fragments_of(const Document& doc, const json& elements) {
    std::vector<TextFragment> out;
    for (const auto& e : elements) {
        out.push_back(doc.fragment(e["b"].get<std::size_t>(), e["e"].get<std::size_t>()));
    }
    return out;
}

}  // namespace

TEST_CASE("health and CORS") {
    const auto dir = fresh_dir("health");
    Running r(config_for(dir));
    auto res = r.client->Get("/health");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(body_of(res) == json{{"status", "ok"}});
    CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
    auto pre = r.client->Options("/sessions");
    REQUIRE(pre);
    CHECK(pre->status == 204);
    CHECK(pre->get_header_value("Access-Control-Allow-Methods").find("PATCH") != std::string::npos);
}

TEST_CASE("missing corpus directory is a parameter error") {
    ServiceConfig c;
    c.corpus_dir = (fresh_dir("missing") / "nope").string();
    CHECK_THROWS_AS(Service{c}, ParameterError);
}

TEST_CASE("document upload") {
    const auto dir = fresh_dir("upload");
    auto config = config_for(dir);
    config.max_upload = 64;
    Running r(config);

    auto res = r.client->Post("/documents", "ab cd", "text/plain");
    REQUIRE(res);
    CHECK(res->status == 201);
    const auto doc = body_of(res);
    CHECK(doc["length"] == 5);
    CHECK(doc["token_count"] == 2);
    CHECK(doc["doc_id"] == content_hash("ab cd"));
    CHECK(fs::exists(dir / ".dupviper" / "documents" / (content_hash("ab cd") + ".txt")));

    res = r.client->Post("/documents", "", "text/plain");
    REQUIRE(res);
    CHECK(res->status == 201);
    CHECK(body_of(res)["length"] == 0);

    res = r.client->Post("/documents", std::string("ab\xc3(", 4), "text/plain");
    REQUIRE(res);
    CHECK(res->status == 400);
    CHECK(body_of(res)["byte_offset"] == 3);

    res = r.client->Post("/documents", std::string(100, 'x'), "text/plain");
    REQUIRE(res);
    CHECK(res->status == 413);

    httplib::MultipartFormDataItems items{{"file", "ключ значение", "doc.txt", "text/plain"}};
    res = r.client->Post("/documents", items);
    REQUIRE(res);
    CHECK(res->status == 201);
    const std::string ru_id = body_of(res)["doc_id"];
    CHECK(body_of(res)["length"] == 13);

    auto text = r.client->Get("/documents/" + ru_id + "/text");
    REQUIRE(text);
    CHECK(text->body == "ключ значение");
    CHECK(r.client->Get("/documents/unknown")->status == 404);

    const auto listing = body_of(r.client->Get("/documents"));
    CHECK(listing.size() == 3);
    CHECK(r.service->document_count() == 3);
    // GETs are idempotent.
    CHECK(body_of(r.client->Get("/documents")) == listing);
}

TEST_CASE("heat map") {
    const auto dir = fresh_dir("heatmap");
    write_file(dir / "white.txt", "every word here is different from all the others in this text");
    const std::string block = "open the file then read the header and check the magic number. ";
    write_file(dir / "hot.txt", "intro. " + block + "middle part. " + block + "end.");
    Running r(config_for(dir));

    CHECK(r.client->Get("/documents/nothing/heatmap")->status == 404);
    CHECK(r.client->Get("/documents/hot.txt/heatmap?min_tokens=0")->status == 400);
    CHECK(r.client->Get("/documents/hot.txt/heatmap?min_tokens=x")->status == 400);

    const auto white = body_of(r.client->Get("/documents/white.txt/heatmap"));
    CHECK(schema::check_heatmap(white).empty());
    for (const auto& t : white["tokens"]) {
        CHECK(t["h"] == 0);
        CHECK(t["color"] == json{1.0, 1.0, 1.0});
    }

    auto res = r.client->Get("/documents/hot.txt/heatmap");
    REQUIRE(res);
    const auto hot = json::parse(res->body);
    CHECK(schema::check_heatmap(hot).empty());
    // The service serves exactly what the library computes.
    const auto doc = load_document_file((dir / "hot.txt").string());
    CHECK(res->body == heatmap_to_json(build_heatmap(*doc)).dump());
    std::size_t warm = 0;
    for (const auto& t : hot["tokens"]) {
        warm += t["h"].get<std::size_t>() >= 2;
    }
    CHECK(warm >= 12);
    // Cached: a second request is byte-identical.
    CHECK(r.client->Get("/documents/hot.txt/heatmap")->body == res->body);

    const auto loose = body_of(r.client->Get("/documents/hot.txt/heatmap?min_tokens=1"));
    const auto tight = body_of(r.client->Get("/documents/hot.txt/heatmap?min_tokens=20"));
    REQUIRE(loose["tokens"].size() == tight["tokens"].size());
    for (std::size_t i = 0; i < loose["tokens"].size(); ++i) {
        CHECK(loose["tokens"][i]["h"].get<std::size_t>() >= hot["tokens"][i]["h"].get<std::size_t>());
        CHECK(hot["tokens"][i]["h"].get<std::size_t>() >= tight["tokens"][i]["h"].get<std::size_t>());
    }
}

TEST_CASE("sessions") {
    const auto dir = fresh_dir("sessions");
    write_file(dir / "a.txt", "some text");
    Running r(config_for(dir));
    const auto s1 = create_session(r, "a.txt");
    const auto s2 = create_session(r, "a.txt");
    CHECK(s1 != s2);
    CHECK(r.post("/sessions", {{"doc_id", "b.txt"}})->status == 404);
    CHECK(r.post("/sessions", json::object())->status == 400);
    CHECK(r.client->Post("/sessions", "{not json", "application/json")->status == 400);

    const auto s = body_of(r.client->Get("/sessions/" + s1));
    CHECK(s["doc"]["id"] == "a.txt");
    CHECK(s["result_set"].is_null());
    CHECK(r.client->Get("/sessions/s99")->status == 404);
    CHECK(r.service->session_count() == 2);
}

TEST_CASE("search") {
    const auto dir = fresh_dir("search");
    const auto fixture = planted();
    write_file(dir / "planted.txt", encode_utf8(fixture.doc->text()));
    Running r(config_for(dir));
    const auto sid = create_session(r, "planted.txt");
    const auto& members = fixture.group.members;

    SUBCASE("planted fixture is covered") {
        auto res = r.post("/sessions/" + sid + "/search", search_request(members[0], 0.9));
        REQUIRE(res);
        REQUIRE(res->status == 200);
        const auto result = json::parse(res->body);
        CHECK(schema::check_result_set(result).empty());
        const auto served = load_document_file((dir / "planted.txt").string());
        std::vector<TextFragment> planted_here;
        for (const auto& m : members) {
            planted_here.push_back(served->fragment(m.b, m.e));
        }
        CHECK(check_completeness(planted_here, fragments_of(*served, result["elements"]), members[0].length(), 0.9).ok());

        // The result replaces the session's current ResultSet and is readable by GET.
        CHECK(body_of(r.client->Get("/sessions/" + sid + "/search")) == result);
        CHECK(body_of(r.client->Get("/sessions/" + sid))["elements"].size() == result["elements"].size());
    }
    SUBCASE("string patterns") {
        auto res = r.post("/sessions/" + sid + "/search", {{"pattern", members[1].utf8()}, {"k", 1.0}});
        REQUIRE(res);
        CHECK(res->status == 200);
        CHECK(body_of(res)["elements"].size() >= 1);
    }
    SUBCASE("bad requests") {
        CHECK(r.post("/sessions/" + sid + "/search", search_request(members[0], 0.5))->status == 400);
        CHECK(r.post("/sessions/" + sid + "/search", {{"pattern", "abc"}})->status == 400);
        CHECK(r.post("/sessions/" + sid + "/search", {{"k", 0.9}})->status == 400);
        CHECK(r.post("/sessions/" + sid + "/search", {{"pattern", ""}, {"k", 0.9}})->status == 400);
        CHECK(r.post("/sessions/" + sid + "/search", {{"pattern", {{"b", 10}, {"e", 5}}}, {"k", 0.9}})->status == 400);
        const auto past = fixture.doc->length();
        CHECK(r.post("/sessions/" + sid + "/search", {{"pattern", {{"b", 0}, {"e", past}}}, {"k", 0.9}})->status == 400);
        CHECK(r.post("/sessions/" + sid + "/search", {{"pattern", 7}, {"k", 0.9}})->status == 400);
        CHECK(r.post("/sessions/" + sid + "/search", {{"pattern", "abc"}, {"k", 0.9}, {"exclude_self", "yes"}})->status ==
              400);
        CHECK(r.post("/sessions/s404/search", search_request(members[0], 0.9))->status == 404);
        // No successful search yet.
        CHECK(r.client->Get("/sessions/" + sid + "/search")->status == 404);
    }
}

TEST_CASE("long searches go asynchronous and a second search is refused") {
    const auto dir = fresh_dir("async");
    const auto pattern = filler_text(400, FillerAlphabet::latin, 5);
    PlantOptions options;
    options.edits = 20;
    options.lead = 150'000;
    options.gap = 150'000;
    options.trail = 1000;
    const auto fixture = plant_group(options, pattern, 0.7, 2, 6);
    write_file(dir / "big.txt", encode_utf8(fixture.doc->text()));
    auto config = config_for(dir);
    config.async_threshold = std::chrono::milliseconds(0);
    Running r(config);
    const auto sid = create_session(r, "big.txt");
    const json request{{"pattern", encode_utf8(pattern)}, {"k", 0.6}};

    auto first = r.post("/sessions/" + sid + "/search", request);
    REQUIRE(first);
    REQUIRE(first->status == 202);
    const auto ticket = json::parse(first->body);
    CHECK(ticket["status"] == "running");
    const std::string poll = ticket["poll"];
    CHECK(poll == "/sessions/" + sid + "/search?token=" + ticket["token"].get<std::string>());

    auto second = r.post("/sessions/" + sid + "/search", request);
    REQUIRE(second);
    CHECK(second->status == 409);
    CHECK(r.patch("/sessions/" + sid + "/results/0", {{"action", "reject"}})->status == 409);

    httplib::Result done;
    for (int i = 0; i < 6000; ++i) {
        done = r.client->Get(poll);
        REQUIRE(done);
        if (done->status != 202) {
            break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    REQUIRE(done->status == 200);
    CHECK(r.client->Get("/sessions/" + sid + "/search?token=999")->status == 404);

    // Same answer as the library.
    SearchParams params;
    params.k = 0.6;
    params.pattern = Pattern::from_text(pattern);
    auto served = json::parse(done->body);
    served.erase("timings_ms");
    CHECK(served == result_set_canonical_json(search(*load_document_file((dir / "big.txt").string()), params)));
}

TEST_CASE("result edits, groups and export") {
    const auto dir = fresh_dir("edits");
    const auto fixture = planted(33);
    write_file(dir / "planted.txt", encode_utf8(fixture.doc->text()));
    const auto& members = fixture.group.members;
    json export_before;
    std::string sid;
    {
        Running r(config_for(dir));
        sid = create_session(r, "planted.txt");
        const std::string base = "/sessions/" + sid;

        // Nothing to group before a search; an empty export is still valid.
        CHECK(r.post(base + "/groups", {{"label", "early"}})->status == 422);
        auto empty = body_of(r.client->Get(base + "/export?format=json"));
        CHECK(schema::check_export(empty).empty());
        CHECK(empty["groups"] == json::array());
        CHECK(r.client->Get(base + "/export?format=xml")->status == 400);
        CHECK(r.client->Get("/sessions/s404/export?format=json")->status == 404);

        auto res = r.post(base + "/search", search_request(members[0], 0.9));
        REQUIRE(res);
        REQUIRE(res->status == 200);
        const auto result = json::parse(res->body);
        const auto found = fragments_of(*fixture.doc, result["elements"]);
        REQUIRE(found.size() >= 3);

        // Element i stands for the plant it intersects; anything else is a false positive.
        std::vector<int> plant_of(found.size(), -1);
        for (std::size_t i = 0; i < found.size(); ++i) {
            for (std::size_t m = 0; m < members.size(); ++m) {
                if (intersection_length(found[i], members[m]) > 0) {
                    plant_of[i] = static_cast<int>(m);
                }
            }
        }

        const std::string first = base + "/results/0";
        auto el = body_of(r.patch(first, {{"action", "reject"}}));
        CHECK(el["status"] == "rejected");
        el = body_of(r.patch(first, {{"action", "restore"}}));
        CHECK(el["status"] == "pending");
        CHECK(el["b"] == result["elements"][0]["b"]);
        CHECK(r.patch(first, {{"action", "set_bounds"}, {"b", 10}, {"e", 5}})->status == 400);
        CHECK(r.patch(first, {{"action", "set_bounds"}, {"b", 0}, {"e", fixture.doc->length()}})->status == 400);
        CHECK(r.patch(first, {{"action", "set_bounds"}, {"b", 0}})->status == 400);
        CHECK(r.patch(first, {{"action", "explode"}})->status == 400);
        CHECK(r.patch(first, json::object())->status == 400);
        CHECK(r.patch(base + "/results/" + std::to_string(found.size()), {{"action", "reject"}})->status == 404);
        CHECK(r.patch(base + "/results/x", {{"action", "reject"}})->status == 404);

        // Snap every true element to its plant and reject the rest.
        for (std::size_t i = 0; i < found.size(); ++i) {
            const std::string path = base + "/results/" + std::to_string(i);
            if (plant_of[i] < 0) {
                CHECK(body_of(r.patch(path, {{"action", "reject"}}))["status"] == "rejected");
                continue;
            }
            const auto& m = members[plant_of[i]];
            el = body_of(r.patch(path, {{"action", "set_bounds"}, {"bounds", {{"b", m.b}, {"e", m.e}}}}));
            CHECK(el["b"] == m.b);
            CHECK(el["e"] == m.e);
            CHECK(el["edited"] == true);
            CHECK(el["distance"] == lcs_distance(m.view(), members[0].view()));
            CHECK(body_of(r.patch(path, {{"action", "accept"}}))["status"] == "accepted");
        }

        // Two elements snapped to one plant would overlap; keep one per plant.
        std::vector<bool> seen(members.size(), false);
        for (std::size_t i = 0; i < found.size(); ++i) {
            if (plant_of[i] >= 0 && seen[plant_of[i]]) {
                r.patch(base + "/results/" + std::to_string(i), {{"action", "reject"}});
            } else if (plant_of[i] >= 0) {
                seen[plant_of[i]] = true;
            }
        }

        res = r.post(base + "/groups", {{"label", "planted"}});
        REQUIRE(res);
        REQUIRE(res->status == 201);
        const auto group = json::parse(res->body);
        CHECK(schema::check_group(group).empty());
        CHECK(group["verification"] == "full");
        CHECK(group["label"] == "planted");
        CHECK(group["members"].size() == members.size());

        // An overlapping pair fails validation and names the member.
        std::size_t keep = 0;
        while (plant_of[keep] < 0) {
            ++keep;
        }
        std::size_t other = keep + 1;
        while (other < found.size() && (plant_of[other] < 0 || plant_of[other] == plant_of[keep])) {
            ++other;
        }
        REQUIRE(other < found.size());
        const auto& m = members[plant_of[keep]];
        r.patch(base + "/results/" + std::to_string(other), {{"action", "set_bounds"}, {"b", m.b + 5}, {"e", m.e + 5}});
        res = r.post(base + "/groups", {{"label", "overlap"}});
        REQUIRE(res);
        CHECK(res->status == 422);
        auto diagnosis = json::parse(res->body);
        CHECK(diagnosis.contains("failing_member"));
        CHECK(schema::check_fragment(diagnosis["member"]).empty());
        CHECK_FALSE(diagnosis["reason"].get<std::string>().empty());

        // A single element is not a group.
        for (std::size_t i = 0; i < found.size(); ++i) {
            if (i != keep) {
                r.patch(base + "/results/" + std::to_string(i), {{"action", "reject"}});
            }
        }
        res = r.post(base + "/groups", {{"label", "lonely"}});
        REQUIRE(res);
        CHECK(res->status == 422);

        export_before = body_of(r.client->Get(base + "/export?format=json"));
        CHECK(schema::check_export(export_before).empty());
        CHECK(export_before["groups"].size() == 1);
        CHECK(export_before["generator"] == "dupviper");
        CHECK(export_before["result_set"] == result);
        // Rejected elements stay as tombstones.
        CHECK(export_before["elements"].size() == found.size());
    }

    // A restart replays the journal into the same state.
    Running again(config_for(dir));
    CHECK(again.service->session_count() == 1);
    const auto export_after = body_of(again.client->Get("/sessions/" + sid + "/export?format=json"));
    CHECK(export_after == export_before);
    CHECK(create_session(again, "planted.txt") != sid);
}

TEST_CASE("service and CLI searches are byte-identical") {
    const auto dir = fresh_dir("identity");
    const auto fixture = planted(47);
    const auto path = dir / "planted.txt";
    write_file(path, encode_utf8(fixture.doc->text()));
    const auto& g = fixture.group.members[0];

    Running r(config_for(dir));
    const auto sid = create_session(r, "planted.txt");
    auto res = r.post("/sessions/" + sid + "/search", search_request(g, 0.9));
    REQUIRE(res);
    REQUIRE(res->status == 200);
    auto served = json::parse(res->body);

    const auto out = dir / "cli.json";
    std::ostringstream cmd;
    cmd << '"' << DUPVIPER_CLI_PATH << "\" search \"" << path.string() << "\" --k 0.9 --strict-threshold --pattern-interval "
        << g.b << ':' << g.e << " --workers 1 --out \"" << out.string() << "\" > /dev/null 2>&1";
    REQUIRE(std::system(cmd.str().c_str()) == 0);
    std::ifstream in(out);
    auto cli = json::parse(in);

    served.erase("timings_ms");
    cli.erase("timings_ms");
    CHECK(served.dump() == cli.dump());
}
