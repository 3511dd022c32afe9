#include "summactl/text.hpp"

#include <cstdint>

namespace summactl {
namespace {

// Decodes the UTF-8 codepoint starting at `i`, advancing `i` past it.
// Malformed bytes are consumed one at a time and passed through as Latin-1
// so tokenization never fails on dirty input.
char32_t decode_utf8(std::string_view text, std::size_t& i) {
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
    unsigned char b0 = byte(i);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int extra = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        extra = 1;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        extra = 2;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        extra = 3;
        cp = b0 & 0x07;
    } else {
        ++i;
        return b0;
    }
    if (i + static_cast<std::size_t>(extra) >= text.size()) {
        // truncated sequence
        ++i;
        return b0;
    }
    for (int k = 1; k <= extra; ++k) {
        unsigned char bk = byte(i + static_cast<std::size_t>(k));
        if ((bk & 0xC0) != 0x80) {
            ++i;
            return b0;
        }
        cp = (cp << 6) | (bk & 0x3F);
    }
    i += static_cast<std::size_t>(extra) + 1;
    return cp;
}

void encode_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// Unicode White_Space property.
bool is_space_cp(char32_t c) {
    switch (c) {
        case 0x0009: case 0x000A: case 0x000B: case 0x000C: case 0x000D:
        case 0x0020: case 0x0085: case 0x00A0: case 0x1680:
        case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return c >= 0x2000 && c <= 0x200A;
    }
}

// Punctuation stripped from word boundaries: ASCII punctuation plus the
// typographic marks common in news/meeting transcripts (curly quotes,
// en/em dashes, ellipsis, guillemets).
bool is_punct_cp(char32_t c) {
    if (c < 0x80) {
        return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
               (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
    }
    switch (c) {
        case 0x00A1:  // inverted exclamation
        case 0x00AB:  // left guillemet
        case 0x00B7:  // middle dot
        case 0x00BB:  // right guillemet
        case 0x00BF:  // inverted question
        case 0x2039:  // single left guillemet
        case 0x203A:  // single right guillemet
            return true;
        default:
            // hyphens, dashes, curly quotes, daggers, bullet, ellipsis
            return c >= 0x2010 && c <= 0x2027;
    }
}

char32_t lower_cp(char32_t c) {
    if (c >= U'A' && c <= U'Z') return c + 0x20;
    // Latin-1 uppercase block, skipping the multiplication sign.
    if (c >= 0x00C0 && c <= 0x00DE && c != 0x00D7) return c + 0x20;
    return c;
}

}  // namespace

TokenSeq tokenize(std::string_view text) {
    TokenSeq seq;
    seq.source_text.assign(text);

    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t probe = i;
        char32_t cp = decode_utf8(text, probe);
        if (is_space_cp(cp)) {
            i = probe;
            continue;
        }
        // Collect one maximal non-whitespace run.
        std::size_t begin = i;
        std::vector<char32_t> cps;
        while (i < text.size()) {
            std::size_t next = i;
            char32_t c = decode_utf8(text, next);
            if (is_space_cp(c)) break;
            cps.push_back(c);
            i = next;
        }
        std::size_t first = 0;
        std::size_t last = cps.size();
        while (first < last && is_punct_cp(cps[first])) ++first;
        while (last > first && is_punct_cp(cps[last - 1])) --last;
        if (first == last) continue;  // normalized to empty

        Token token;
        token.surface.assign(text.substr(begin, i - begin));
        for (std::size_t k = first; k < last; ++k) {
            encode_utf8(token.norm, lower_cp(cps[k]));
        }
        seq.tokens.push_back(std::move(token));
    }
    return seq;
}

std::size_t word_count(const TokenSeq& seq) {
    return seq.tokens.size();
}

std::vector<std::string> norms(const TokenSeq& seq) {
    std::vector<std::string> out;
    out.reserve(seq.tokens.size());
    for (const auto& t : seq.tokens) out.push_back(t.norm);
    return out;
}

}  // namespace summactl
