#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace dupviper {

class Document;

/**
 * An occurrence of a symbol string in a document: the closed interval [b, e]
 * in Unicode scalar positions. Fragments refer to their document by pointer
 * and never own text; the document must outlive them.
 */
struct TextFragment {
    const Document* doc = nullptr;
    std::size_t b = 0;
    std::size_t e = 0;

    std::size_t length() const noexcept { return 1 + e - b; }
    std::u32string_view view() const;
    std::u32string str() const { return std::u32string(view()); }
    std::string utf8() const;

    bool contains(const TextFragment& other) const noexcept { return b <= other.b && other.e <= e; }

    friend bool operator==(const TextFragment& x, const TextFragment& y) noexcept {
        return x.doc == y.doc && x.b == y.b && x.e == y.e;
    }
};

struct Token {
    TextFragment fragment;
    std::size_t index = 0;
};

class Document {
public:
    Document(std::string id, std::u32string text, std::optional<std::string> source_path = std::nullopt);

    Document(const Document&) = delete;
    Document& operator=(const Document&) = delete;

    const std::string& id() const noexcept { return id_; }
    const std::u32string& text() const noexcept { return text_; }
    std::size_t length() const noexcept { return text_.size(); }
    bool empty() const noexcept { return text_.empty(); }
    const std::optional<std::string>& source_path() const noexcept { return source_path_; }

    // Token segmentation, computed once at construction.
    const std::vector<Token>& tokens() const noexcept { return tokens_; }

    // Throws ParameterError unless 0 <= b <= e < length().
    TextFragment fragment(std::size_t b, std::size_t e) const;
    TextFragment whole() const { return fragment(0, length() - 1); }

    // Index of the token containing position pos, or nullopt for delimiters.
    std::optional<std::size_t> token_at(std::size_t pos) const;

private:
    std::string id_;
    std::u32string text_;
    std::optional<std::string> source_path_;
    std::vector<Token> tokens_;
    std::vector<std::size_t> token_of_;  // per position; npos for delimiters
};

using DocumentPtr = std::shared_ptr<const Document>;

// UTF-8 decode with CR-LF / CR normalized to LF. Throws IngestError naming the byte offset.
std::u32string decode_utf8(std::string_view bytes);
std::string encode_utf8(std::u32string_view text);

DocumentPtr load_document(std::string_view bytes, std::string id,
                          std::optional<std::string> source_path = std::nullopt);

// Reads the whole file; the id defaults to the file name. Throws Error on I/O failure.
DocumentPtr load_document_file(const std::string& path, std::optional<std::string> id = std::nullopt);

bool is_delimiter(char32_t c) noexcept;

std::vector<Token> tokenize(const Document& doc);

// Maximal delimiter-free runs of text as [b, e] pairs; shared by tokenize and Document.
std::vector<std::pair<std::size_t, std::size_t>> token_spans(std::u32string_view text);

bool before(const TextFragment& g1, const TextFragment& g2);
std::size_t intersection_length(const TextFragment& g1, const TextFragment& g2);

// {"doc": id, "b": int, "e": int, "text": string}
nlohmann::json fragment_to_json(const TextFragment& g);
TextFragment fragment_from_json(const nlohmann::json& j, const Document& doc);

}  // namespace dupviper
