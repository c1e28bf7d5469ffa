#include "dupviper/corpus.hpp"

#include <fstream>
#include <filesystem>
#include <iterator>
#include <limits>
#include <sstream>

#include "dupviper/error.hpp"

namespace dupviper {

namespace {

constexpr std::size_t kNoToken = std::numeric_limits<std::size_t>::max();

bool is_unicode_space(char32_t c) noexcept {
    switch (c) {
        case 0x0009: case 0x000A: case 0x000B: case 0x000C: case 0x000D:
        case 0x0020: case 0x0085: case 0x00A0: case 0x1680:
        case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return c >= 0x2000 && c <= 0x200A;
    }
}

}  // namespace

bool is_delimiter(char32_t c) noexcept {
    if (is_unicode_space(c)) {
        return true;
    }
    switch (c) {
        case U'.': case U',': case U';': case U':': case U'!': case U'?':
        case U'(': case U')': case U'[': case U']': case U'{': case U'}':
        case U'"': case U'\'': case U'«': case U'»': case U'—':
        case U'/': case U'\\': case U'|': case U'<': case U'>': case U'=':
        case U'+': case U'*': case U'&': case U'^': case U'%': case U'$':
        case U'#': case U'@': case U'~': case U'`':
            return true;
        default:
            return false;
    }
}

std::u32string decode_utf8(std::string_view bytes) {
    std::u32string out;
    out.reserve(bytes.size());
    const auto* s = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::size_t n = bytes.size();
    std::size_t i = 0;
    while (i < n) {
        const unsigned char lead = s[i];
        if (lead < 0x80) {
            if (lead == '\r') {
                out.push_back(U'\n');
                i += (i + 1 < n && s[i + 1] == '\n') ? 2 : 1;
                continue;
            }
            out.push_back(lead);
            ++i;
            continue;
        }
        std::size_t extra = 0;
        char32_t cp = 0;
        char32_t min_cp = 0;
        if ((lead & 0xE0) == 0xC0) {
            extra = 1;
            cp = lead & 0x1F;
            min_cp = 0x80;
        } else if ((lead & 0xF0) == 0xE0) {
            extra = 2;
            cp = lead & 0x0F;
            min_cp = 0x800;
        } else if ((lead & 0xF8) == 0xF0) {
            extra = 3;
            cp = lead & 0x07;
            min_cp = 0x10000;
        } else {
            throw IngestError("invalid UTF-8 lead byte", i);
        }
        for (std::size_t j = 1; j <= extra; ++j) {
            if (i + j >= n) {
                throw IngestError("truncated UTF-8 sequence", i);
            }
            const unsigned char cont = s[i + j];
            if ((cont & 0xC0) != 0x80) {
                throw IngestError("invalid UTF-8 continuation byte", i + j);
            }
            cp = (cp << 6) | (cont & 0x3F);
        }
        if (cp < min_cp) {
            throw IngestError("overlong UTF-8 encoding", i);
        }
        if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            throw IngestError("UTF-8 sequence encodes an invalid scalar value", i);
        }
        out.push_back(cp);
        i += extra + 1;
    }
    return out;
}

std::string encode_utf8(std::u32string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char32_t c : text) {
        if (c < 0x80) {
            out.push_back(static_cast<char>(c));
        } else if (c < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (c >> 6)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
        } else if (c < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (c >> 12)));
            out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (c >> 18)));
            out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
        }
    }
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> token_spans(std::u32string_view text) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        while (i < n && is_delimiter(text[i])) {
            ++i;
        }
        if (i == n) {
            break;
        }
        const std::size_t start = i;
        while (i < n && !is_delimiter(text[i])) {
            ++i;
        }
        spans.emplace_back(start, i - 1);
    }
    return spans;
}

Document::Document(std::string id, std::u32string text, std::optional<std::string> source_path)
    : id_(std::move(id)), text_(std::move(text)), source_path_(std::move(source_path)),
      token_of_(text_.size(), kNoToken) {
    const auto spans = token_spans(text_);
    tokens_.reserve(spans.size());
    for (std::size_t t = 0; t < spans.size(); ++t) {
        tokens_.push_back(Token{TextFragment{this, spans[t].first, spans[t].second}, t});
        for (std::size_t pos = spans[t].first; pos <= spans[t].second; ++pos) {
            token_of_[pos] = t;
        }
    }
}

TextFragment Document::fragment(std::size_t b, std::size_t e) const {
    if (b > e || e >= text_.size()) {
        throw ParameterError("fragment [" + std::to_string(b) + ", " + std::to_string(e) +
                             "] is outside document '" + id_ + "' of length " +
                             std::to_string(text_.size()));
    }
    return TextFragment{this, b, e};
}

std::optional<std::size_t> Document::token_at(std::size_t pos) const {
    if (pos >= token_of_.size() || token_of_[pos] == kNoToken) {
        return std::nullopt;
    }
    return token_of_[pos];
}

std::u32string_view TextFragment::view() const {
    return std::u32string_view(doc->text()).substr(b, length());
}

std::string TextFragment::utf8() const { return encode_utf8(view()); }

DocumentPtr load_document(std::string_view bytes, std::string id, std::optional<std::string> source_path) {
    return std::make_shared<const Document>(std::move(id), decode_utf8(bytes), std::move(source_path));
}

DocumentPtr load_document_file(const std::string& path, std::optional<std::string> id) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw Error("cannot read '" + path + "'");
    }
    std::string doc_id = id ? *id : std::filesystem::path(path).filename().string();
    return load_document(buf.str(), std::move(doc_id), path);
}

std::vector<Token> tokenize(const Document& doc) { return doc.tokens(); }

bool before(const TextFragment& g1, const TextFragment& g2) {
    if (g1.doc != g2.doc) {
        throw ContractViolation("Before applied to fragments of different documents");
    }
    return g1.e < g2.b;
}

std::size_t intersection_length(const TextFragment& g1, const TextFragment& g2) {
    const std::size_t lo = std::max(g1.b, g2.b);
    const std::size_t hi = std::min(g1.e, g2.e);
    return lo > hi ? 0 : hi - lo + 1;
}

nlohmann::json fragment_to_json(const TextFragment& g) {
    return nlohmann::json{{"doc", g.doc->id()}, {"b", g.b}, {"e", g.e}, {"text", g.utf8()}};
}

TextFragment fragment_from_json(const nlohmann::json& j, const Document& doc) {
    if (!j.is_object() || !j.contains("b") || !j.contains("e") || !j["b"].is_number_unsigned() ||
        !j["e"].is_number_unsigned()) {
        throw ParameterError("fragment JSON needs unsigned integer fields 'b' and 'e'");
    }
    return doc.fragment(j["b"].get<std::size_t>(), j["e"].get<std::size_t>());
}

}  // namespace dupviper
