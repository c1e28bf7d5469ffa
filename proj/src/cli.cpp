#include "dupviper/cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "dupviper/clonemap.hpp"
#include "dupviper/corpus.hpp"
#include "dupviper/error.hpp"
#include "dupviper/evalharness.hpp"
#include "dupviper/search.hpp"
#include "dupviper/service.hpp"

namespace dupviper {

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted.store(true); }

// Writes to the --out path, or to stdout when none was given.
void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        std::cout.flush();
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out || !(out << content)) {
        throw Error("cannot write '" + out_path + "'");
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParameterError("cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

DocumentPtr open_document(const std::string& path) {
    if (!std::filesystem::is_regular_file(path)) {
        throw ParameterError("cannot open document '" + path + "'");
    }
    return load_document_file(path);
}

std::pair<std::size_t, std::size_t> parse_interval(const std::string& spec) {
    const auto colon = spec.find(':');
    try {
        if (colon == std::string::npos || spec.find_first_not_of("0123456789:") != std::string::npos) {
            throw std::invalid_argument(spec);
        }
        return {std::stoull(spec.substr(0, colon)), std::stoull(spec.substr(colon + 1))};
    } catch (const std::exception&) {
        throw ParameterError("--pattern-interval expects B:E with non-negative integers, got '" + spec + "'");
    }
}

struct SearchOptions {
    std::string doc;
    double k = 0.8;
    std::string pattern;
    std::string pattern_file;
    std::string pattern_interval;
    bool no_opt[5] = {false, false, false, false, false};
    bool strict = false;
    bool exclude_self = false;
    std::string format = "json";
    std::string out;
    std::size_t workers = 0;
    long long timeout_ms = 0;
};

int cmd_heatmap(const std::string& doc_path, std::size_t min_tokens, const std::string& format, const std::string& out) {
    const auto doc = open_document(doc_path);
    const HeatMap heat = build_heatmap(*doc, min_tokens);
    emit(out, format == "html" ? heatmap_to_html(heat) : heatmap_to_json(heat).dump(2) + "\n");
    if (!out.empty()) {
        std::cout << doc->id() << ": " << heat.temperatures.size() << " tokens, T_max = " << heat.t_max << '\n';
    }
    return kExitOk;
}

int cmd_search(const SearchOptions& o) {
    validate_k(o.k);
    const int sources = !o.pattern.empty() + !o.pattern_file.empty() + !o.pattern_interval.empty();
    if (sources != 1) {
        throw ParameterError("give exactly one of --pattern, --pattern-file, --pattern-interval");
    }
    const auto doc = open_document(o.doc);
    SearchParams params;
    params.k = o.k;
    if (!o.pattern_interval.empty()) {
        const auto [b, e] = parse_interval(o.pattern_interval);
        params.pattern = Pattern::from_fragment(doc->fragment(b, e));
    } else {
        params.pattern = Pattern::from_text(decode_utf8(o.pattern.empty() ? read_file(o.pattern_file) : o.pattern));
    }
    params.optimizations.skip_scan = !o.no_opt[0];
    params.optimizations.skip_shrink = !o.no_opt[1];
    params.optimizations.cluster = !o.no_opt[2];
    params.optimizations.extend_words = !o.no_opt[3];
    params.optimizations.reuse = !o.no_opt[4];
    params.strict_threshold = o.strict;
    params.exclude_self = o.exclude_self;
    params.workers = o.workers;
    if (o.timeout_ms > 0) {
        params.deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(o.timeout_ms);
    }
    DistanceCache cache(DistanceCache::capacity_from_env());
    params.cache = &cache;

    const ResultSet r = search(*doc, std::move(params));
    if (o.format == "csv") {
        std::ostringstream csv;
        csv << "index,b,e,distance,text\n";
        for (std::size_t i = 0; i < r.w3.size(); ++i) {
            std::string text = r.w3[i].fragment.utf8();
            std::string quoted = "\"";
            for (char c : text) {
                quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
            }
            csv << i << ',' << r.w3[i].fragment.b << ',' << r.w3[i].fragment.e << ',' << r.w3[i].distance << ','
                << quoted << "\"\n";
        }
        emit(o.out, csv.str());
    } else {
        emit(o.out, result_set_to_json(r).dump(2) + "\n");
    }
    std::ostream& summary = o.out.empty() ? std::cerr : std::cout;
    if (r.pattern_too_long) {
        summary << "warning: pattern longer than document\n";
    }
    summary << std::fixed << std::setprecision(1) << "|R| = " << r.w3.size() << "  (|W1| = " << r.w1.size()
            << ", |W2| = " << r.w2.size() << ")  k = " << r.k << "  |p| = " << r.pattern.text.size()
            << "  phase1 " << r.timings.phase1_ms << " ms, phase2 " << r.timings.phase2_ms << " ms, phase3 "
            << r.timings.phase3_ms << " ms\n";
    return kExitOk;
}

int cmd_select_pattern(const std::string& doc_path, std::size_t length, std::size_t min_tokens,
                       const std::string& format) {
    const auto doc = open_document(doc_path);
    const HeatMap heat = build_heatmap(*doc, min_tokens);
    const TextFragment g = auto_select_pattern(*doc, heat, length);
    if (format == "json") {
        std::cout << fragment_to_json(g).dump(2) << '\n';
    } else {
        std::cout << g.b << ':' << g.e << '\n' << g.utf8() << '\n';
    }
    return kExitOk;
}

int cmd_eval(const std::string& config_path, const std::string& out_dir, std::size_t workers) {
    nlohmann::json j = nlohmann::json::parse(read_file(config_path), nullptr, false);
    if (j.is_discarded()) {
        throw ParameterError("config '" + config_path + "' is not valid JSON");
    }
    SweepConfig config = sweep_config_from_json(j);
    if (workers > 0) {
        config.workers = workers;
    }
    // Relative corpus paths are taken relative to the config file.
    const auto base = std::filesystem::path(config_path).parent_path();
    for (auto& path : config.corpus) {
        if (std::filesystem::path(path).is_relative()) {
            path = (base / path).string();
        }
        if (!std::filesystem::is_regular_file(path)) {
            throw ParameterError("corpus document '" + path + "' does not exist");
        }
    }
    const SweepReport report = run_sweep(config);
    const std::string dir = out_dir.empty() ? "." : out_dir;
    std::filesystem::create_directories(dir);
    emit((std::filesystem::path(dir) / "sweep.csv").string(), sweep_report_csv(report));
    emit((std::filesystem::path(dir) / "sweep_summary.json").string(), sweep_report_summary(report).dump(2) + "\n");
    std::cout << sweep_report_table(report);
    return kExitOk;
}

int cmd_serve(const std::string& addr, const std::string& corpus_dir, std::size_t workers) {
    ServiceConfig config;
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos) {
        throw ParameterError("--addr expects HOST:PORT");
    }
    config.host = addr.substr(0, colon);
    try {
        config.port = std::stoi(addr.substr(colon + 1));
    } catch (const std::exception&) {
        throw ParameterError("bad port in --addr '" + addr + "'");
    }
    if (config.port < 0 || config.port > 65535) {
        throw ParameterError("bad port in --addr '" + addr + "'");
    }
    config.corpus_dir = corpus_dir;
    config.search_workers = workers;
    Service service(config);
    const int port = service.bind();
    if (port < 0) {
        std::cerr << "error: cannot listen on " << addr << '\n';
        return kExitUsage;
    }
    g_interrupted.store(false);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::jthread watcher([&service](std::stop_token stop) {
        while (!stop.stop_requested() && !g_interrupted.load()) {
            std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
        service.stop();
    });
    std::cout << "listening on http://" << config.host << ':' << port << "  (" << service.document_count()
              << " documents, " << service.session_count() << " sessions)" << std::endl;
    service.listen();
    watcher.request_stop();
    return kExitOk;
}

int cmd_synth(SynthSpec spec, const std::string& out_dir) {
    if (out_dir.empty()) {
        throw ParameterError("--out DIR is required");
    }
    const auto corpus = synth_corpus(spec);
    const auto paths = write_synth_corpus(corpus, out_dir);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        std::size_t members = 0;
        for (const auto& g : corpus[i].groups) {
            members += g.group.members.size();
        }
        std::cout << paths[i] << "  " << corpus[i].doc->length() << " symbols, " << corpus[i].groups.size()
                  << " groups, " << members << " planted members\n";
    }
    return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"Near-duplicate detection in text documents"};
    app.require_subcommand(1);

    std::string doc_path, out, format = "json";
    std::size_t min_tokens = kDefaultMinTokens;

    auto* heatmap = app.add_subcommand("heatmap", "exact-clone heat map of a document");
    heatmap->add_option("document", doc_path, "UTF-8 text file")->required();
    heatmap->add_option("--min-tokens", min_tokens, "shortest clone in tokens")->check(CLI::PositiveNumber);
    heatmap->add_option("--format", format, "json or html")->check(CLI::IsMember({"json", "html"}));
    heatmap->add_option("--out", out, "output path (default stdout)");

    SearchOptions so;
    auto* search_cmd = app.add_subcommand("search", "pattern based near-duplicate search");
    search_cmd->add_option("document", so.doc, "UTF-8 text file")->required();
    search_cmd->add_option("--k", so.k, "similarity in (1/sqrt(3), 1]");
    search_cmd->add_option("--pattern", so.pattern, "pattern text");
    search_cmd->add_option("--pattern-file", so.pattern_file, "file holding the pattern");
    search_cmd->add_option("--pattern-interval", so.pattern_interval, "inclusive document interval B:E");
    for (int i = 0; i < 5; ++i) {
        search_cmd->add_flag("--no-opt" + std::to_string(i + 1), so.no_opt[i], "disable optimization " + std::to_string(i + 1));
    }
    search_cmd->add_flag("--strict-threshold", so.strict, "use the provably complete scan threshold");
    search_cmd->add_flag("--exclude-self", so.exclude_self, "drop the pattern's own occurrence");
    search_cmd->add_option("--format", so.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    search_cmd->add_option("--out", so.out, "output path (default stdout)");
    search_cmd->add_option("--workers", so.workers, "threads (0: all cores)");
    search_cmd->add_option("--timeout-ms", so.timeout_ms, "abandon the search after this many milliseconds");

    std::size_t length = 0;
    std::string select_format = "text";
    auto* select = app.add_subcommand("select-pattern", "pick the hottest window of a given length");
    select->add_option("document", doc_path, "UTF-8 text file")->required();
    select->add_option("--length", length, "pattern length in symbols")->required();
    select->add_option("--min-tokens", min_tokens, "shortest clone in tokens")->check(CLI::PositiveNumber);
    select->add_option("--format", select_format, "text or json")->check(CLI::IsMember({"text", "json"}));

    std::string config_path;
    std::size_t workers = 0;
    auto* eval = app.add_subcommand("eval", "parameter sweep over a corpus");
    eval->add_option("config", config_path, "sweep configuration JSON")->required();
    eval->add_option("--out", out, "directory for sweep.csv and sweep_summary.json");
    eval->add_option("--workers", workers, "concurrent runs");

    std::string addr = "127.0.0.1:8080", corpus_dir = ".";
    auto* serve = app.add_subcommand("serve", "run the HTTP service");
    serve->add_option("--addr", addr, "HOST:PORT");
    serve->add_option("--corpus", corpus_dir, "corpus directory");
    serve->add_option("--workers", workers, "threads per search");

    SynthSpec spec;
    std::string alphabet = "latin";
    auto* synth = app.add_subcommand("synth", "generate a synthetic corpus with planted groups");
    synth->add_option("--out", out, "output directory")->required();
    synth->add_option("--seed", spec.seed, "random seed");
    synth->add_option("--documents", spec.documents, "number of documents");
    synth->add_option("--size", spec.sizes, "explicit document sizes in symbols");
    synth->add_option("--density", spec.groups_per_100k, "planted groups per 100k symbols");
    synth->add_option("--k", spec.k, "similarity of planted variants");
    synth->add_option("--min-pattern", spec.min_pattern, "shortest planted pattern");
    synth->add_option("--max-pattern", spec.max_pattern, "longest planted pattern");
    synth->add_option("--min-members", spec.min_members, "fewest members per group");
    synth->add_option("--max-members", spec.max_members, "most members per group");
    synth->add_option("--alphabet", alphabet, "latin, cyrillic or mixed")
        ->check(CLI::IsMember({"latin", "cyrillic", "mixed"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*heatmap) {
            return cmd_heatmap(doc_path, min_tokens, format, out);
        }
        if (*search_cmd) {
            return cmd_search(so);
        }
        if (*select) {
            return cmd_select_pattern(doc_path, length, min_tokens, select_format);
        }
        if (*eval) {
            return cmd_eval(config_path, out, workers);
        }
        if (*serve) {
            return cmd_serve(addr, corpus_dir, workers);
        }
        if (*synth) {
            spec.alphabet = alphabet == "cyrillic" ? FillerAlphabet::cyrillic
                            : alphabet == "mixed"  ? FillerAlphabet::mixed
                                                   : FillerAlphabet::latin;
            return cmd_synth(spec, out);
        }
    } catch (const SearchCancelled& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const Error& e) {
        // Parameter, ingest and I/O problems with the caller's inputs.
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace dupviper
