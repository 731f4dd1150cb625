#include "nnfl/io/toml.hpp"

#include "nnfl/errors.hpp"

#include <cctype>
#include <charconv>

namespace nnfl::io {

namespace {

class Parser {
  public:
    explicit Parser(std::string_view text) : s_(text) {}

    std::map<std::string, TomlValue> run() {
        std::map<std::string, TomlValue> out;
        std::string table;
        while (true) {
            skip_blank_lines();
            if (eof())
                break;
            if (peek() == '[') {
                ++pos_;
                skip_ws();
                table = bare_key();
                skip_ws();
                expect(']');
                end_of_line();
                continue;
            }
            const std::size_t at = pos_;
            std::string key = bare_key();
            skip_ws();
            expect('=');
            skip_ws();
            TomlValue v = value();
            end_of_line();
            const std::string full = table.empty() ? key : table + "." + key;
            if (!out.emplace(full, std::move(v)).second)
                fail("duplicate key '" + full + "'", at);
        }
        return out;
    }

  private:
    [[noreturn]] void fail(const std::string &msg, std::size_t at) const { throw FormatError("config: " + msg, at); }
    bool eof() const { return pos_ >= s_.size(); }
    char peek() const { return eof() ? '\0' : s_[pos_]; }

    void skip_ws() {
        while (!eof() && (peek() == ' ' || peek() == '\t'))
            ++pos_;
    }

    void skip_comment() {
        if (peek() == '#')
            while (!eof() && peek() != '\n')
                ++pos_;
    }

    void skip_blank_lines() {
        while (!eof()) {
            skip_ws();
            skip_comment();
            if (peek() == '\r')
                ++pos_;
            if (peek() == '\n')
                ++pos_;
            else
                return;
        }
    }

    void end_of_line() {
        skip_ws();
        skip_comment();
        if (peek() == '\r')
            ++pos_;
        if (!eof() && peek() != '\n')
            fail("unexpected text after value", pos_);
        if (!eof())
            ++pos_;
    }

    void expect(char c) {
        if (peek() != c)
            fail(std::string("expected '") + c + "'", pos_);
        ++pos_;
    }

    std::string bare_key() {
        const std::size_t start = pos_;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-'))
            ++pos_;
        if (pos_ == start)
            fail("expected a key", start);
        return std::string(s_.substr(start, pos_ - start));
    }

    TomlValue value() {
        if (peek() == '[') {
            ++pos_;
            TomlArray arr;
            skip_ws();
            while (peek() != ']') {
                arr.push_back(scalar());
                skip_ws();
                if (peek() == ',') {
                    ++pos_;
                    skip_ws();
                } else if (peek() != ']') {
                    fail("expected ',' or ']' in array", pos_);
                }
            }
            ++pos_;
            return TomlValue{std::move(arr)};
        }
        return std::visit([](auto &&x) -> TomlValue { return x; }, scalar());
    }

    TomlScalar scalar() {
        const std::size_t start = pos_;
        if (peek() == '"')
            return string_value();
        while (!eof() && peek() != ',' && peek() != ']' && peek() != '#' && peek() != '\n' && peek() != '\r' &&
               peek() != ' ' && peek() != '\t')
            ++pos_;
        std::string tok(s_.substr(start, pos_ - start));
        if (tok.empty())
            fail("expected a value", start);
        if (tok == "true")
            return true;
        if (tok == "false")
            return false;
        std::string clean;
        for (char c : tok)
            if (c != '_')
                clean += c;
        const bool neg = clean[0] == '-';
        const std::size_t sign = (clean[0] == '-' || clean[0] == '+') ? 1 : 0;
        const std::string_view body = std::string_view(clean).substr(sign);
        if (body.size() > 2 && body[0] == '0' && (body[1] == 'x' || body[1] == 'X')) {
            std::uint64_t v = 0;
            const auto r = std::from_chars(body.data() + 2, body.data() + body.size(), v, 16);
            if (r.ec != std::errc() || r.ptr != body.data() + body.size() || v > INT64_MAX)
                fail("bad hexadecimal integer", start);
            return neg ? -static_cast<std::int64_t>(v) : static_cast<std::int64_t>(v);
        }
        if (clean.find_first_of(".eE") == std::string::npos) {
            std::int64_t v = 0;
            const auto r = std::from_chars(clean.data() + (clean[0] == '+'), clean.data() + clean.size(), v);
            if (r.ec != std::errc() || r.ptr != clean.data() + clean.size())
                fail("bad integer", start);
            return v;
        }
        double d = 0.0;
        const auto r = std::from_chars(clean.data() + (clean[0] == '+'), clean.data() + clean.size(), d);
        if (r.ec != std::errc() || r.ptr != clean.data() + clean.size())
            fail("bad number", start);
        return d;
    }

    std::string string_value() {
        const std::size_t start = pos_;
        ++pos_;
        std::string out;
        while (true) {
            if (eof() || peek() == '\n')
                fail("unterminated string", start);
            char c = s_[pos_++];
            if (c == '"')
                return out;
            if (c == '\\') {
                if (eof())
                    fail("unterminated string", start);
                const char e = s_[pos_++];
                switch (e) {
                case 'n':
                    out += '\n';
                    break;
                case 't':
                    out += '\t';
                    break;
                case '"':
                case '\\':
                    out += e;
                    break;
                default:
                    fail("unsupported escape", pos_ - 1);
                }
                continue;
            }
            out += c;
        }
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

} // namespace

std::map<std::string, TomlValue> parse_toml(std::string_view text) { return Parser(text).run(); }

} // namespace nnfl::io
