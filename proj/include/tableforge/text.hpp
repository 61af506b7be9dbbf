#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tableforge {

/// Decodes UTF-8 into codepoints. Invalid bytes are kept as their raw
/// value so that damaged input still compares deterministically.
inline std::vector<std::uint32_t> utf8_codepoints(std::string_view s) {
    std::vector<std::uint32_t> out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const unsigned char c = static_cast<unsigned char>(s[i]);
        std::size_t extra = 0;
        if (c >= 0xf0) extra = 3;
        else if (c >= 0xe0) extra = 2;
        else if (c >= 0xc0) extra = 1;
        bool ok = extra > 0 && i + extra < s.size();
        for (std::size_t k = 1; ok && k <= extra; ++k)
            ok = (static_cast<unsigned char>(s[i + k]) & 0xc0) == 0x80;
        if (extra == 0 || !ok) {
            out.push_back(c); // ASCII, lone continuation, or truncated sequence
            ++i;
            continue;
        }
        static constexpr std::uint32_t kMask[4] = {0x7f, 0x1f, 0x0f, 0x07};
        std::uint32_t cp = c & kMask[extra];
        for (std::size_t k = 1; k <= extra; ++k)
            cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3f);
        out.push_back(cp);
        i += extra + 1;
    }
    return out;
}

/// Levenshtein distance over codepoints.
inline std::size_t levenshtein(std::string_view a, std::string_view b) {
    const auto ca = utf8_codepoints(a);
    const auto cb = utf8_codepoints(b);
    const std::size_t n = ca.size(), m = cb.size();
    if (n == 0) return m;
    if (m == 0) return n;
    std::vector<std::size_t> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t sub = prev[j - 1] + (ca[i - 1] == cb[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

/// Levenshtein distance normalized to [0, 1] by the longer string.
/// Both empty -> 0.
inline double levenshtein_norm(std::string_view a, std::string_view b) {
    const std::size_t la = utf8_codepoints(a).size();
    const std::size_t lb = utf8_codepoints(b).size();
    const std::size_t mx = std::max(la, lb);
    if (mx == 0) return 0.0;
    return static_cast<double>(levenshtein(a, b)) / static_cast<double>(mx);
}

/// Joins tokens with single spaces.
inline std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

/// Lightweight compatibility normalization for cell text. Maps the unicode
/// variants that dominate content mismatches in annotation data (no-break
/// spaces, typographic dashes/quotes, fullwidth ASCII, fi/fl ligatures) to
/// plain ASCII. Not a full NFKC pass; coverage is the curated list below.
inline std::string normalize_compat(std::string_view s) {
    const auto cps = utf8_codepoints(s);
    std::string out;
    out.reserve(s.size());
    auto push_cp = [&out](std::uint32_t cp) {
        if (cp < 0x80) {
            out += static_cast<char>(cp);
        } else if (cp < 0x800) {
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
    };
    for (std::uint32_t cp : cps) {
        switch (cp) {
            case 0x00a0: case 0x2007: case 0x202f: case 0x2009:
            case 0x2002: case 0x2003:
                out += ' ';
                break;
            case 0x2010: case 0x2011: case 0x2012: case 0x2013:
            case 0x2014: case 0x2212:
                out += '-';
                break;
            case 0x2018: case 0x2019:
                out += '\'';
                break;
            case 0x201c: case 0x201d:
                out += '"';
                break;
            case 0xfb01:
                out += "fi";
                break;
            case 0xfb02:
                out += "fl";
                break;
            default:
                if (cp >= 0xff01 && cp <= 0xff5e) {
                    out += static_cast<char>(cp - 0xff01 + 0x21); // fullwidth ASCII
                } else {
                    push_cp(cp);
                }
        }
    }
    return out;
}

} // namespace tableforge
