#include "dupviper/schema.hpp"

#include <algorithm>

namespace dupviper::schema {

namespace {

using nlohmann::json;

bool is_uint(const json& v) { return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0); }

class Checker {
public:
    explicit Checker(std::vector<std::string>& errors) : errors_(errors) {}

    void fail(const std::string& path, const std::string& what) { errors_.push_back(path + ": " + what); }

    bool object(const json& j, const std::string& path) {
        if (!j.is_object()) {
            fail(path, "expected object");
            return false;
        }
        return true;
    }

    bool array(const json& j, const std::string& path) {
        if (!j.is_array()) {
            fail(path, "expected array");
            return false;
        }
        return true;
    }

    // Looks up a required member; reports and returns nullptr when absent.
    const json* field(const json& j, const std::string& path, const char* key) {
        if (!j.contains(key)) {
            fail(path + "." + key, "missing");
            return nullptr;
        }
        return &j.at(key);
    }

    void string(const json& j, const std::string& path, const char* key, bool nullable = false) {
        if (const json* v = field(j, path, key); v && !(v->is_string() || (nullable && v->is_null()))) {
            fail(path + "." + key, nullable ? "expected string or null" : "expected string");
        }
    }

    void uint(const json& j, const std::string& path, const char* key, bool nullable = false) {
        if (const json* v = field(j, path, key); v && !(is_uint(*v) || (nullable && v->is_null()))) {
            fail(path + "." + key, nullable ? "expected non-negative integer or null" : "expected non-negative integer");
        }
    }

    void number(const json& j, const std::string& path, const char* key) {
        if (const json* v = field(j, path, key); v && !v->is_number()) {
            fail(path + "." + key, "expected number");
        }
    }

    void boolean(const json& j, const std::string& path, const char* key) {
        if (const json* v = field(j, path, key); v && !v->is_boolean()) {
            fail(path + "." + key, "expected boolean");
        }
    }

    void k(const json& j, const std::string& path) {
        number(j, path, "k");
        if (j.contains("k") && j["k"].is_number()) {
            const double k = j["k"].get<double>();
            if (!(k > 0.5773502691896257 && k <= 1.0)) {
                fail(path + ".k", "outside (1/sqrt(3), 1]");
            }
        }
    }

    void interval(const json& j, const std::string& path) {
        uint(j, path, "b");
        uint(j, path, "e");
        if (j.contains("b") && j.contains("e") && is_uint(j["b"]) && is_uint(j["e"]) &&
            j["b"].get<std::uint64_t>() > j["e"].get<std::uint64_t>()) {
            fail(path, "b > e");
        }
    }

    void fragment(const json& j, const std::string& path) {
        if (!object(j, path)) {
            return;
        }
        string(j, path, "doc");
        interval(j, path);
        string(j, path, "text");
    }

    void optimizations(const json& j, const std::string& path) {
        if (!object(j, path)) {
            return;
        }
        for (const char* key : {"opt1", "opt2", "opt3", "opt4", "opt5"}) {
            boolean(j, path, key);
        }
    }

    void group(const json& j, const std::string& path, bool with_verification = true) {
        if (!object(j, path)) {
            return;
        }
        string(j, path, "label");
        k(j, path);
        if (const json* members = field(j, path, "members"); members && array(*members, path + ".members")) {
            for (std::size_t i = 0; i < members->size(); ++i) {
                fragment((*members)[i], path + ".members[" + std::to_string(i) + "]");
            }
        }
        if (const json* a = field(j, path, "archetype"); a && !a->is_null()) {
            if (array(*a, path + ".archetype")) {
                for (std::size_t i = 0; i < a->size(); ++i) {
                    if (!(*a)[i].is_string()) {
                        fail(path + ".archetype[" + std::to_string(i) + "]", "expected string");
                    }
                }
            }
        }
        if (with_verification) {
            if (const json* v = field(j, path, "verification");
                v && !(v->is_string() && (*v == "full" || *v == "pairwise-verified"))) {
                fail(path + ".verification", "expected \"full\" or \"pairwise-verified\"");
            }
        }
    }

    void result_set(const json& j, const std::string& path) {
        if (!object(j, path)) {
            return;
        }
        string(j, path, "doc");
        if (const json* p = field(j, path, "pattern"); p && object(*p, path + ".pattern")) {
            string(*p, path + ".pattern", "text");
            uint(*p, path + ".pattern", "length");
            string(*p, path + ".pattern", "doc", true);
            uint(*p, path + ".pattern", "b", true);
            uint(*p, path + ".pattern", "e", true);
        }
        k(j, path);
        number(j, path, "k_di");
        boolean(j, path, "strict_threshold");
        if (const json* o = field(j, path, "optimizations")) {
            optimizations(*o, path + ".optimizations");
        }
        string(j, path, "warning", true);
        if (const json* els = field(j, path, "elements"); els && array(*els, path + ".elements")) {
            for (std::size_t i = 0; i < els->size(); ++i) {
                const std::string at = path + ".elements[" + std::to_string(i) + "]";
                if (object((*els)[i], at)) {
                    interval((*els)[i], at);
                    string((*els)[i], at, "text");
                    uint((*els)[i], at, "distance");
                }
            }
        }
        if (j.contains("timings_ms")) {
            const std::string at = path + ".timings_ms";
            if (object(j["timings_ms"], at)) {
                for (const char* key : {"phase1", "phase2", "phase3"}) {
                    number(j["timings_ms"], at, key);
                }
            }
        }
    }

private:
    std::vector<std::string>& errors_;
};

}  // namespace

std::vector<std::string> check_fragment(const nlohmann::json& j) {
    std::vector<std::string> errors;
    Checker(errors).fragment(j, "$");
    return errors;
}

std::vector<std::string> check_heatmap(const nlohmann::json& j) {
    std::vector<std::string> errors;
    Checker c(errors);
    if (!c.object(j, "$")) {
        return errors;
    }
    c.string(j, "$", "doc");
    c.uint(j, "$", "min_tokens");
    c.uint(j, "$", "t_max");
    const std::uint64_t t_max = j.contains("t_max") && is_uint(j["t_max"]) ? j["t_max"].get<std::uint64_t>() : 0;
    if (const json* tokens = c.field(j, "$", "tokens"); tokens && c.array(*tokens, "$.tokens")) {
        for (std::size_t i = 0; i < tokens->size(); ++i) {
            const json& t = (*tokens)[i];
            const std::string at = "$.tokens[" + std::to_string(i) + "]";
            if (!c.object(t, at)) {
                continue;
            }
            c.interval(t, at);
            c.string(t, at, "text");
            c.uint(t, at, "h");
            if (t.contains("h") && is_uint(t["h"]) && t["h"].get<std::uint64_t>() > t_max) {
                c.fail(at + ".h", "exceeds t_max");
            }
            const json* color = c.field(t, at, "color");
            if (color && !(color->is_array() && color->size() == 3 && std::all_of(color->begin(), color->end(), [](const json& x) {
                               return x.is_number() && x.get<double>() >= 0.0 && x.get<double>() <= 1.0;
                           }))) {
                c.fail(at + ".color", "expected three numbers in [0, 1]");
            }
        }
    }
    return errors;
}

std::vector<std::string> check_result_set(const nlohmann::json& j) {
    std::vector<std::string> errors;
    Checker(errors).result_set(j, "$");
    return errors;
}

std::vector<std::string> check_group(const nlohmann::json& j) {
    std::vector<std::string> errors;
    Checker(errors).group(j, "$");
    return errors;
}

std::vector<std::string> check_export(const nlohmann::json& j) {
    std::vector<std::string> errors;
    Checker c(errors);
    if (!c.object(j, "$")) {
        return errors;
    }
    c.string(j, "$", "session");
    if (const json* d = c.field(j, "$", "doc"); d && c.object(*d, "$.doc")) {
        c.string(*d, "$.doc", "id");
        c.uint(*d, "$.doc", "length");
    }
    if (const json* r = c.field(j, "$", "result_set"); r && !r->is_null()) {
        c.result_set(*r, "$.result_set");
    }
    if (const json* els = c.field(j, "$", "elements"); els && c.array(*els, "$.elements")) {
        for (std::size_t i = 0; i < els->size(); ++i) {
            const std::string at = "$.elements[" + std::to_string(i) + "]";
            const json& e = (*els)[i];
            if (!c.object(e, at)) {
                continue;
            }
            c.uint(e, at, "index");
            c.interval(e, at);
            c.string(e, at, "text");
            c.uint(e, at, "distance");
            c.boolean(e, at, "edited");
            if (const json* s = c.field(e, at, "status");
                s && !(s->is_string() && (*s == "pending" || *s == "accepted" || *s == "rejected"))) {
                c.fail(at + ".status", "expected pending, accepted or rejected");
            }
        }
    }
    if (const json* groups = c.field(j, "$", "groups"); groups && c.array(*groups, "$.groups")) {
        for (std::size_t i = 0; i < groups->size(); ++i) {
            c.group((*groups)[i], "$.groups[" + std::to_string(i) + "]");
        }
    }
    return errors;
}

std::vector<std::string> check_ground_truth(const nlohmann::json& j) {
    std::vector<std::string> errors;
    Checker c(errors);
    if (!c.object(j, "$")) {
        return errors;
    }
    c.string(j, "$", "doc");
    c.uint(j, "$", "length");
    if (const json* groups = c.field(j, "$", "groups"); groups && c.array(*groups, "$.groups")) {
        for (std::size_t i = 0; i < groups->size(); ++i) {
            const std::string at = "$.groups[" + std::to_string(i) + "]";
            c.group((*groups)[i], at, false);
            if ((*groups)[i].is_object()) {
                c.string((*groups)[i], at, "pattern");
            }
        }
    }
    return errors;
}

std::vector<std::string> check_sweep_summary(const nlohmann::json& j) {
    std::vector<std::string> errors;
    Checker c(errors);
    if (!c.object(j, "$")) {
        return errors;
    }
    c.uint(j, "$", "runs");
    c.uint(j, "$", "skipped");
    c.uint(j, "$", "timeouts");
    for (const char* key : {"runtime_buckets", "output_buckets"}) {
        const json* buckets = c.field(j, "$", key);
        if (!buckets || !c.object(*buckets, std::string("$.") + key)) {
            continue;
        }
        for (const auto& [name, bucket] : buckets->items()) {
            const std::string at = std::string("$.") + key + "." + name;
            if (c.object(bucket, at)) {
                c.uint(bucket, at, "count");
                c.number(bucket, at, "percent");
            }
        }
    }
    return errors;
}

}  // namespace dupviper::schema
