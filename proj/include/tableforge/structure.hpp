#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tableforge/errors.hpp"

namespace tableforge {

inline constexpr std::size_t kMaxTokens = 512;
inline constexpr int kMaxSpan = 20;

enum class TokenKind : std::uint8_t {
    TableOpen,
    TableClose,
    TheadOpen,
    TheadClose,
    TbodyOpen,
    TbodyClose,
    TrOpen,
    TrClose,
    TdOpen,
    TdClose,
    CellOpenBracket, // "<" of a spanning cell tag
    RowspanAttr,
    ColspanAttr,
    SpanValue, // integer >= 2, always preceded by a span attribute
    CloseBracket,
};

struct StructToken {
    TokenKind kind;
    int value = 0; // set only for SpanValue

    friend bool operator==(const StructToken& a, const StructToken& b) {
        return a.kind == b.kind && a.value == b.value;
    }
};

enum class Complexity { simple, complex };

inline std::string_view to_string(Complexity c) {
    return c == Complexity::simple ? "simple" : "complex";
}

/// Ordered structural tokens of one table. Construction goes through
/// parse_html / from_strings / builders, all of which validate the grammar:
/// well-bracketed, spanning-cell pattern intact, span values in [2, 20],
/// at most 512 tokens.
class TagSequence {
public:
    TagSequence() = default;
    explicit TagSequence(std::vector<StructToken> tokens) : tokens_(std::move(tokens)) {}

    const std::vector<StructToken>& tokens() const { return tokens_; }
    std::size_t size() const { return tokens_.size(); }
    bool empty() const { return tokens_.empty(); }

    friend bool operator==(const TagSequence& a, const TagSequence& b) {
        return a.tokens_ == b.tokens_;
    }

    /// Number of table cells (one per td, spanning or plain).
    std::size_t n_cells() const {
        std::size_t n = 0;
        for (const auto& t : tokens_)
            if (t.kind == TokenKind::TdOpen || t.kind == TokenKind::CellOpenBracket) ++n;
        return n;
    }

    /// Grammar check; throws ParseError on violation.
    void validate() const;

    /// Token strings in the annotation spelling, span attribute and value
    /// fused into one string (` rowspan="2"`).
    std::vector<std::string> to_strings() const;

    /// Parses annotation-spelling strings. Accepts both `<` and `<td` for
    /// the spanning-cell open bracket; emission always uses `<`.
    static TagSequence from_strings(const std::vector<std::string>& strings);

    /// HTML text of the bare structure (no cell content).
    std::string to_html() const { return to_html_impl(nullptr); }

    /// HTML text with per-cell content inserted; `contents` must hold one
    /// string per cell in document order.
    std::string to_html(const std::vector<std::string>& contents) const {
        if (contents.size() != n_cells())
            throw Error("to_html: content count " + std::to_string(contents.size()) +
                        " != cell count " + std::to_string(n_cells()));
        return to_html_impl(&contents);
    }

private:
    std::string to_html_impl(const std::vector<std::string>* contents) const;
    std::vector<StructToken> tokens_;
};

// ---------------------------------------------------------------------------
// Grid model

struct GridCell {
    int row = 0;
    int col = 0;
    int rowspan = 1;
    int colspan = 1;
    bool header = false;

    friend bool operator==(const GridCell&, const GridCell&) = default;
};

/// Most fine-grained rectangular grid covering a table. `squares` maps each
/// (row, col) to the covering cell index, or -1 when the square is not
/// covered by any cell (non-strict tables).
struct TableGrid {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<std::int32_t> squares; // row-major, n_rows * n_cols
    std::vector<GridCell> cells;       // document order
    int header_rows = 0;               // rows contained in thead
    bool sections = false;             // thead/tbody tokens present

    std::int32_t square(int r, int c) const {
        return squares[static_cast<std::size_t>(r) * n_cols + c];
    }
    std::int32_t& square(int r, int c) {
        return squares[static_cast<std::size_t>(r) * n_cols + c];
    }
};

/// True iff every grid square is covered by a cell. Strict tables look
/// rectangular: every row has the same effective length.
inline bool is_strict(const TableGrid& grid) {
    for (std::int32_t s : grid.squares)
        if (s < 0) return false;
    return true;
}

/// Simple iff no cell spans rows or columns.
inline Complexity classify(const TableGrid& grid) {
    for (const auto& c : grid.cells)
        if (c.rowspan != 1 || c.colspan != 1) return Complexity::complex;
    return Complexity::simple;
}

// ---------------------------------------------------------------------------
// Grammar validation

namespace detail {

struct TokenCursor {
    const std::vector<StructToken>& t;
    std::size_t i = 0;

    bool done() const { return i >= t.size(); }
    TokenKind peek() const { return t[i].kind; }
    const StructToken& take() { return t[i++]; }
    bool accept(TokenKind k) {
        if (!done() && peek() == k) {
            ++i;
            return true;
        }
        return false;
    }
    void expect(TokenKind k, const char* what) {
        if (done() || peek() != k)
            throw ParseError(std::string("expected ") + what + " at token " +
                             std::to_string(i));
        ++i;
    }
};

inline void validate_cell(TokenCursor& c) {
    if (c.accept(TokenKind::TdOpen)) {
        c.expect(TokenKind::TdClose, "</td>");
        return;
    }
    c.expect(TokenKind::CellOpenBracket, "cell");
    bool saw_rowspan = false, saw_colspan = false;
    int attrs = 0;
    while (!c.done() && (c.peek() == TokenKind::RowspanAttr ||
                         c.peek() == TokenKind::ColspanAttr)) {
        const TokenKind kind = c.take().kind;
        if (kind == TokenKind::RowspanAttr) {
            if (saw_rowspan) throw ParseError("duplicate rowspan attribute");
            saw_rowspan = true;
        } else {
            if (saw_colspan) throw ParseError("duplicate colspan attribute");
            saw_colspan = true;
        }
        if (c.done() || c.peek() != TokenKind::SpanValue)
            throw ParseError("span attribute without value");
        const StructToken& v = c.take();
        if (v.value < 2 || v.value > kMaxSpan)
            throw ParseError("span value " + std::to_string(v.value) +
                             " outside [2, " + std::to_string(kMaxSpan) + "]");
        ++attrs;
    }
    if (attrs == 0) throw ParseError("spanning cell without span attribute");
    c.expect(TokenKind::CloseBracket, ">");
    c.expect(TokenKind::TdClose, "</td>");
}

inline void validate_row(TokenCursor& c) {
    c.expect(TokenKind::TrOpen, "<tr>");
    while (!c.done() && c.peek() != TokenKind::TrClose) validate_cell(c);
    c.expect(TokenKind::TrClose, "</tr>");
}

} // namespace detail

inline void TagSequence::validate() const {
    if (tokens_.size() > kMaxTokens)
        throw ParseError("sequence has " + std::to_string(tokens_.size()) +
                         " tokens, budget is " + std::to_string(kMaxTokens));
    for (const auto& t : tokens_) {
        if (t.kind == TokenKind::SpanValue) continue;
        if (t.value != 0) throw ParseError("non span-value token carries a value");
    }
    detail::TokenCursor c{tokens_};
    c.expect(TokenKind::TableOpen, "<table>");
    if (c.accept(TokenKind::TheadOpen)) {
        while (!c.done() && c.peek() == TokenKind::TrOpen) detail::validate_row(c);
        c.expect(TokenKind::TheadClose, "</thead>");
    }
    while (!c.done() && c.peek() != TokenKind::TableClose) {
        if (c.accept(TokenKind::TbodyOpen)) {
            while (!c.done() && c.peek() == TokenKind::TrOpen) detail::validate_row(c);
            c.expect(TokenKind::TbodyClose, "</tbody>");
        } else {
            detail::validate_row(c);
        }
    }
    c.expect(TokenKind::TableClose, "</table>");
    if (!c.done()) throw ParseError("trailing tokens after </table>");
}

// ---------------------------------------------------------------------------
// String forms

inline std::vector<std::string> TagSequence::to_strings() const {
    std::vector<std::string> out;
    out.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        switch (tokens_[i].kind) {
            case TokenKind::TableOpen: out.emplace_back("<table>"); break;
            case TokenKind::TableClose: out.emplace_back("</table>"); break;
            case TokenKind::TheadOpen: out.emplace_back("<thead>"); break;
            case TokenKind::TheadClose: out.emplace_back("</thead>"); break;
            case TokenKind::TbodyOpen: out.emplace_back("<tbody>"); break;
            case TokenKind::TbodyClose: out.emplace_back("</tbody>"); break;
            case TokenKind::TrOpen: out.emplace_back("<tr>"); break;
            case TokenKind::TrClose: out.emplace_back("</tr>"); break;
            case TokenKind::TdOpen: out.emplace_back("<td>"); break;
            case TokenKind::TdClose: out.emplace_back("</td>"); break;
            case TokenKind::CellOpenBracket: out.emplace_back("<"); break;
            case TokenKind::RowspanAttr:
            case TokenKind::ColspanAttr: {
                const char* name =
                    tokens_[i].kind == TokenKind::RowspanAttr ? " rowspan=\"" : " colspan=\"";
                if (i + 1 >= tokens_.size() || tokens_[i + 1].kind != TokenKind::SpanValue)
                    throw ParseError("span attribute without value");
                out.emplace_back(name + std::to_string(tokens_[i + 1].value) + "\"");
                ++i; // consume the fused SpanValue
                break;
            }
            case TokenKind::SpanValue:
                throw ParseError("span value without attribute");
            case TokenKind::CloseBracket: out.emplace_back(">"); break;
        }
    }
    return out;
}

inline TagSequence TagSequence::from_strings(const std::vector<std::string>& strings) {
    std::vector<StructToken> tokens;
    tokens.reserve(strings.size());
    auto parse_span = [](const std::string& s, std::string_view prefix) -> std::optional<int> {
        if (s.size() <= prefix.size() + 1 || s.compare(0, prefix.size(), prefix) != 0)
            return std::nullopt;
        if (s.back() != '"') return std::nullopt;
        int v = 0;
        for (std::size_t i = prefix.size(); i + 1 < s.size(); ++i) {
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
            v = v * 10 + (s[i] - '0');
            if (v > 10000) return std::nullopt;
        }
        return v;
    };
    for (const auto& s : strings) {
        if (s == "<table>") tokens.push_back({TokenKind::TableOpen});
        else if (s == "</table>") tokens.push_back({TokenKind::TableClose});
        else if (s == "<thead>") tokens.push_back({TokenKind::TheadOpen});
        else if (s == "</thead>") tokens.push_back({TokenKind::TheadClose});
        else if (s == "<tbody>") tokens.push_back({TokenKind::TbodyOpen});
        else if (s == "</tbody>") tokens.push_back({TokenKind::TbodyClose});
        else if (s == "<tr>") tokens.push_back({TokenKind::TrOpen});
        else if (s == "</tr>") tokens.push_back({TokenKind::TrClose});
        else if (s == "<td>") tokens.push_back({TokenKind::TdOpen});
        else if (s == "</td>") tokens.push_back({TokenKind::TdClose});
        else if (s == "<" || s == "<td") tokens.push_back({TokenKind::CellOpenBracket});
        else if (s == ">") tokens.push_back({TokenKind::CloseBracket});
        else if (auto v = parse_span(s, " rowspan=\"")) {
            tokens.push_back({TokenKind::RowspanAttr});
            tokens.push_back({TokenKind::SpanValue, *v});
        } else if (auto v2 = parse_span(s, " colspan=\"")) {
            tokens.push_back({TokenKind::ColspanAttr});
            tokens.push_back({TokenKind::SpanValue, *v2});
        } else {
            throw ParseError("unknown structural token \"" + s + "\"");
        }
    }
    TagSequence seq(std::move(tokens));
    seq.validate();
    return seq;
}

inline std::string escape_html(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char ch : text) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += ch;
        }
    }
    return out;
}

inline std::string TagSequence::to_html_impl(const std::vector<std::string>* contents) const {
    std::string out;
    std::size_t cell = 0;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        switch (tokens_[i].kind) {
            case TokenKind::TableOpen: out += "<table>"; break;
            case TokenKind::TableClose: out += "</table>"; break;
            case TokenKind::TheadOpen: out += "<thead>"; break;
            case TokenKind::TheadClose: out += "</thead>"; break;
            case TokenKind::TbodyOpen: out += "<tbody>"; break;
            case TokenKind::TbodyClose: out += "</tbody>"; break;
            case TokenKind::TrOpen: out += "<tr>"; break;
            case TokenKind::TrClose: out += "</tr>"; break;
            case TokenKind::TdOpen:
                out += "<td>";
                if (contents) out += escape_html((*contents)[cell]);
                ++cell;
                break;
            case TokenKind::TdClose: out += "</td>"; break;
            case TokenKind::CellOpenBracket: out += "<td"; break;
            case TokenKind::RowspanAttr: out += " rowspan=\""; break;
            case TokenKind::ColspanAttr: out += " colspan=\""; break;
            case TokenKind::SpanValue: out += std::to_string(tokens_[i].value) + "\""; break;
            case TokenKind::CloseBracket:
                out += ">";
                if (contents) out += escape_html((*contents)[cell]);
                ++cell;
                break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// HTML parsing

struct ParsedTable {
    TagSequence tags;
    std::vector<std::string> cell_text; // one entry per cell, document order
};

namespace detail {

struct HtmlScanner {
    std::string_view s;
    std::size_t i = 0;

    void skip_ws() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    bool done() {
        skip_ws();
        return i >= s.size();
    }
    bool starts_with(std::string_view prefix) const {
        if (i + prefix.size() > s.size()) return false;
        for (std::size_t k = 0; k < prefix.size(); ++k) {
            char a = s[i + k];
            char b = prefix[k];
            if (std::tolower(static_cast<unsigned char>(a)) != b) return false;
        }
        return true;
    }
};

inline std::string decode_entities(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '&') {
            out += text[i++];
            continue;
        }
        const std::size_t semi = text.find(';', i);
        if (semi == std::string_view::npos || semi - i > 10) {
            out += text[i++];
            continue;
        }
        const std::string_view ent = text.substr(i + 1, semi - i - 1);
        if (ent == "amp") out += '&';
        else if (ent == "lt") out += '<';
        else if (ent == "gt") out += '>';
        else if (ent == "quot") out += '"';
        else if (ent == "apos") out += '\'';
        else if (ent == "nbsp") out += ' ';
        else if (!ent.empty() && ent[0] == '#') {
            std::uint32_t cp = 0;
            bool ok = ent.size() > 1;
            if (ent.size() > 2 && (ent[1] == 'x' || ent[1] == 'X')) {
                for (std::size_t k = 2; k < ent.size() && ok; ++k) {
                    const char ch = ent[k];
                    int d;
                    if (ch >= '0' && ch <= '9') d = ch - '0';
                    else if (ch >= 'a' && ch <= 'f') d = ch - 'a' + 10;
                    else if (ch >= 'A' && ch <= 'F') d = ch - 'A' + 10;
                    else { ok = false; break; }
                    cp = cp * 16 + static_cast<std::uint32_t>(d);
                }
            } else {
                for (std::size_t k = 1; k < ent.size() && ok; ++k) {
                    if (!std::isdigit(static_cast<unsigned char>(ent[k]))) { ok = false; break; }
                    cp = cp * 10 + static_cast<std::uint32_t>(ent[k] - '0');
                }
            }
            if (ok && cp > 0 && cp <= 0x10ffff) {
                // re-encode as UTF-8
                if (cp < 0x80) out += static_cast<char>(cp);
                else if (cp < 0x800) {
                    out += static_cast<char>(0xc0 | (cp >> 6));
                    out += static_cast<char>(0x80 | (cp & 0x3f));
                } else if (cp < 0x10000) {
                    out += static_cast<char>(0xe0 | (cp >> 12));
                    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
                    out += static_cast<char>(0x80 | (cp & 0x3f));
                } else {
                    out += static_cast<char>(0xf0 | (cp >> 18));
                    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3f));
                    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
                    out += static_cast<char>(0x80 | (cp & 0x3f));
                }
            } else {
                out += text.substr(i, semi - i + 1);
            }
        } else {
            out += text.substr(i, semi - i + 1);
        }
        i = semi + 1;
    }
    return out;
}

struct RawTag {
    std::string name;                                      // lowercase
    bool closing = false;
    bool self_closing = false;
    std::vector<std::pair<std::string, std::string>> attrs; // lowercase names
};

inline RawTag read_tag(HtmlScanner& sc) {
    // precondition: sc.s[sc.i] == '<'
    RawTag tag;
    std::size_t j = sc.i + 1;
    const auto& s = sc.s;
    if (j < s.size() && s[j] == '/') {
        tag.closing = true;
        ++j;
    }
    while (j < s.size() && std::isalpha(static_cast<unsigned char>(s[j])))
        tag.name += static_cast<char>(std::tolower(static_cast<unsigned char>(s[j++])));
    if (tag.name.empty()) throw ParseError("stray '<' at offset " + std::to_string(sc.i));
    // attributes
    while (true) {
        while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j >= s.size()) throw ParseError("unterminated tag <" + tag.name);
        if (s[j] == '>') {
            ++j;
            break;
        }
        if (s[j] == '/' && j + 1 < s.size() && s[j + 1] == '>') {
            tag.self_closing = true;
            j += 2;
            break;
        }
        std::string name;
        while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '-'))
            name += static_cast<char>(std::tolower(static_cast<unsigned char>(s[j++])));
        if (name.empty()) throw ParseError("bad attribute in <" + tag.name + ">");
        std::string value;
        while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j < s.size() && s[j] == '=') {
            ++j;
            while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
            if (j < s.size() && (s[j] == '"' || s[j] == '\'')) {
                const char q = s[j++];
                while (j < s.size() && s[j] != q) value += s[j++];
                if (j >= s.size()) throw ParseError("unterminated attribute value");
                ++j;
            } else {
                while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) &&
                       s[j] != '>' && s[j] != '/')
                    value += s[j++];
            }
        }
        tag.attrs.emplace_back(std::move(name), std::move(value));
    }
    sc.i = j;
    return tag;
}

inline int parse_span_attr(const std::string& value, const char* attr_name) {
    if (value.empty()) throw ParseError(std::string(attr_name) + " with empty value");
    long v = 0;
    for (char ch : value) {
        if (!std::isdigit(static_cast<unsigned char>(ch)))
            throw ParseError(std::string(attr_name) + "=\"" + value + "\" is not an integer");
        v = v * 10 + (ch - '0');
        if (v > 100000) break;
    }
    if (v < 1) throw ParseError(std::string(attr_name) + " value must be >= 1");
    if (v > kMaxSpan)
        throw ParseError(std::string(attr_name) + " value " + std::to_string(v) +
                         " exceeds cap " + std::to_string(kMaxSpan));
    return static_cast<int>(v);
}

} // namespace detail

/// Parses an HTML fragment rooted at <table> into tokens plus per-cell text.
/// th cells are homogenized to td; td attributes other than rowspan/colspan
/// are dropped; inline markup inside cells is stripped to text. Nested
/// tables are rejected.
inline ParsedTable parse_html_with_content(std::string_view html) {
    detail::HtmlScanner sc{html};
    std::vector<StructToken> tokens;
    std::vector<std::string> cell_text;

    if (sc.done()) throw ParseError("empty input");
    if (sc.s[sc.i] != '<') throw ParseError("expected '<table'");
    detail::RawTag root = detail::read_tag(sc);
    if (root.name != "table" || root.closing)
        throw ParseError("fragment must be rooted at <table>, got <" +
                         std::string(root.closing ? "/" : "") + root.name + ">");
    tokens.push_back({TokenKind::TableOpen});

    bool closed = false;
    while (!closed) {
        if (sc.done()) throw ParseError("unexpected end of input, <table> not closed");
        if (sc.s[sc.i] != '<')
            throw ParseError("stray text outside a cell at offset " + std::to_string(sc.i));
        detail::RawTag tag = detail::read_tag(sc);
        const std::string& name = tag.name;
        if (name == "table") {
            if (!tag.closing) throw UnsupportedElementError("nested <table>");
            tokens.push_back({TokenKind::TableClose});
            closed = true;
        } else if (name == "thead" || name == "tbody") {
            tokens.push_back({name == "thead"
                                  ? (tag.closing ? TokenKind::TheadClose : TokenKind::TheadOpen)
                                  : (tag.closing ? TokenKind::TbodyClose : TokenKind::TbodyOpen)});
        } else if (name == "tr") {
            tokens.push_back({tag.closing ? TokenKind::TrClose : TokenKind::TrOpen});
        } else if (name == "td" || name == "th") {
            if (tag.closing) throw ParseError("unmatched </" + name + ">");
            int rowspan = 1, colspan = 1;
            for (const auto& [attr, value] : tag.attrs) {
                if (attr == "rowspan") rowspan = detail::parse_span_attr(value, "rowspan");
                else if (attr == "colspan") colspan = detail::parse_span_attr(value, "colspan");
                // anything else is dropped
            }
            if (rowspan > 1 || colspan > 1) {
                tokens.push_back({TokenKind::CellOpenBracket});
                if (rowspan > 1) {
                    tokens.push_back({TokenKind::RowspanAttr});
                    tokens.push_back({TokenKind::SpanValue, rowspan});
                }
                if (colspan > 1) {
                    tokens.push_back({TokenKind::ColspanAttr});
                    tokens.push_back({TokenKind::SpanValue, colspan});
                }
                tokens.push_back({TokenKind::CloseBracket});
            } else {
                tokens.push_back({TokenKind::TdOpen});
            }
            // collect cell text up to the matching close tag
            std::string text;
            if (!tag.self_closing) {
                bool cell_closed = false;
                while (!cell_closed) {
                    if (sc.i >= sc.s.size())
                        throw ParseError("unexpected end of input inside <" + name + ">");
                    if (sc.s[sc.i] == '<') {
                        if (sc.starts_with(std::string("</") + name)) {
                            detail::read_tag(sc);
                            cell_closed = true;
                        } else if (sc.starts_with("</td") || sc.starts_with("</th")) {
                            detail::read_tag(sc); // th/td close mixed; accept
                            cell_closed = true;
                        } else if (sc.starts_with("<table")) {
                            throw UnsupportedElementError("nested <table> inside a cell");
                        } else {
                            detail::read_tag(sc); // inline markup, dropped
                        }
                    } else {
                        text += sc.s[sc.i++];
                    }
                }
            }
            tokens.push_back({TokenKind::TdClose});
            cell_text.push_back(detail::decode_entities(text));
        } else {
            throw UnsupportedElementError("<" + name + "> is not part of the table vocabulary");
        }
    }
    if (!sc.done())
        throw ParseError("trailing content after </table>");

    TagSequence seq(std::move(tokens));
    seq.validate();
    return ParsedTable{std::move(seq), std::move(cell_text)};
}

/// Structure-only variant of parse_html_with_content.
inline TagSequence parse_html(std::string_view html) {
    return parse_html_with_content(html).tags;
}

// ---------------------------------------------------------------------------
// Token sequence -> grid

/// Places cells onto the minimal grid following HTML flow: each cell takes
/// the next free square left-to-right, spans reserve squares in later rows.
/// Row spans dangling past the last row are clamped; a span landing on an
/// occupied square raises OverlapConflictError.
inline TableGrid tokens_to_grid(const TagSequence& tags) {
    tags.validate();
    const auto& tokens = tags.tokens();

    int n_rows = 0;
    for (const auto& t : tokens)
        if (t.kind == TokenKind::TrOpen) ++n_rows;

    TableGrid grid;
    grid.n_rows = n_rows;
    std::vector<std::vector<std::int32_t>> rows(n_rows);
    auto occupied = [&rows](int r, int c) {
        return c < static_cast<int>(rows[r].size()) && rows[r][c] >= 0;
    };
    auto mark = [&rows](int r, int c, std::int32_t cell) {
        if (c >= static_cast<int>(rows[r].size())) rows[r].resize(c + 1, -1);
        rows[r][c] = cell;
    };

    int row = -1;
    int cursor = 0;
    bool in_thead = false;
    int pending_rowspan = 1, pending_colspan = 1;
    TokenKind pending_attr = TokenKind::TdOpen;

    for (const auto& t : tokens) {
        switch (t.kind) {
            case TokenKind::TheadOpen: in_thead = true; grid.sections = true; break;
            case TokenKind::TheadClose: in_thead = false; break;
            case TokenKind::TbodyOpen:
            case TokenKind::TbodyClose: grid.sections = true; break;
            case TokenKind::TrOpen:
                ++row;
                cursor = 0;
                if (in_thead) grid.header_rows = row + 1;
                break;
            case TokenKind::TdOpen:
                pending_rowspan = 1;
                pending_colspan = 1;
                break;
            case TokenKind::CellOpenBracket:
                pending_rowspan = 1;
                pending_colspan = 1;
                break;
            case TokenKind::RowspanAttr:
            case TokenKind::ColspanAttr:
                pending_attr = t.kind;
                break;
            case TokenKind::SpanValue:
                if (pending_attr == TokenKind::RowspanAttr) pending_rowspan = t.value;
                else pending_colspan = t.value;
                break;
            case TokenKind::CloseBracket:
                break;
            case TokenKind::TdClose: {
                while (occupied(row, cursor)) ++cursor;
                const int rowspan = std::min(pending_rowspan, n_rows - row);
                const int colspan = pending_colspan;
                const auto cell_index = static_cast<std::int32_t>(grid.cells.size());
                for (int r = row; r < row + rowspan; ++r)
                    for (int c = cursor; c < cursor + colspan; ++c) {
                        if (occupied(r, c))
                            throw OverlapConflictError(
                                "cell " + std::to_string(cell_index) + " collides at (" +
                                std::to_string(r) + ", " + std::to_string(c) + ")");
                        mark(r, c, cell_index);
                    }
                grid.cells.push_back({row, cursor, rowspan, colspan, in_thead});
                cursor += colspan;
                pending_rowspan = 1;
                pending_colspan = 1;
                break;
            }
            case TokenKind::TrClose:
            case TokenKind::TableOpen:
            case TokenKind::TableClose:
                break;
        }
    }

    int n_cols = 0;
    for (const auto& r : rows) n_cols = std::max(n_cols, static_cast<int>(r.size()));
    grid.n_cols = n_cols;
    grid.squares.assign(static_cast<std::size_t>(n_rows) * n_cols, -1);
    for (int r = 0; r < n_rows; ++r)
        for (int c = 0; c < static_cast<int>(rows[r].size()); ++c)
            grid.square(r, c) = rows[r][c];
    return grid;
}

/// Rebuilds the canonical token sequence from a grid. Inverse of
/// tokens_to_grid for canonical sequences (thead prefix, rowspan attribute
/// before colspan).
inline TagSequence grid_to_tokens(const TableGrid& grid) {
    std::vector<StructToken> tokens;
    tokens.push_back({TokenKind::TableOpen});

    // cells anchored per row, by column
    std::vector<std::vector<const GridCell*>> by_row(grid.n_rows);
    for (const auto& cell : grid.cells) by_row[cell.row].push_back(&cell);
    for (auto& row : by_row)
        std::sort(row.begin(), row.end(),
                  [](const GridCell* a, const GridCell* b) { return a->col < b->col; });

    auto emit_row = [&tokens](const std::vector<const GridCell*>& row) {
        tokens.push_back({TokenKind::TrOpen});
        for (const GridCell* cell : row) {
            if (cell->rowspan == 1 && cell->colspan == 1) {
                tokens.push_back({TokenKind::TdOpen});
            } else {
                tokens.push_back({TokenKind::CellOpenBracket});
                if (cell->rowspan > 1) {
                    tokens.push_back({TokenKind::RowspanAttr});
                    tokens.push_back({TokenKind::SpanValue, cell->rowspan});
                }
                if (cell->colspan > 1) {
                    tokens.push_back({TokenKind::ColspanAttr});
                    tokens.push_back({TokenKind::SpanValue, cell->colspan});
                }
                tokens.push_back({TokenKind::CloseBracket});
            }
            tokens.push_back({TokenKind::TdClose});
        }
        tokens.push_back({TokenKind::TrClose});
    };

    if (grid.sections) {
        tokens.push_back({TokenKind::TheadOpen});
        for (int r = 0; r < grid.header_rows; ++r) emit_row(by_row[r]);
        tokens.push_back({TokenKind::TheadClose});
        tokens.push_back({TokenKind::TbodyOpen});
        for (int r = grid.header_rows; r < grid.n_rows; ++r) emit_row(by_row[r]);
        tokens.push_back({TokenKind::TbodyClose});
    } else {
        for (int r = 0; r < grid.n_rows; ++r) emit_row(by_row[r]);
    }
    tokens.push_back({TokenKind::TableClose});
    return TagSequence(std::move(tokens));
}

} // namespace tableforge
