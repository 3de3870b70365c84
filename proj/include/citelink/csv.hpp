#pragma once

// Minimal RFC 4180 CSV reader/writer. The reader reports the 1-based row
// of the first quoting error; the writer quotes only when needed.

#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "citelink/types.hpp"

namespace citelink::csv {

struct ParseError : ValidationError {
    size_t row;
    ParseError(size_t row_, const std::string& what)
        : ValidationError("csv row " + std::to_string(row_) + ": " + what),
          row(row_) {}
};

// Parses a whole CSV document. Rows are vectors of unquoted field values.
// CRLF and LF line endings are accepted; a trailing newline is ignored.
inline std::vector<std::vector<std::string>> parse(std::string_view data) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    size_t line = 1;
    enum { Start, Unquoted, Quoted, QuoteSeen } state = Start;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        state = Start;
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
        ++line;
    };

    for (size_t i = 0; i < data.size(); ++i) {
        char c = data[i];
        if (c == '\r' && i + 1 < data.size() && data[i + 1] == '\n') continue;
        switch (state) {
            case Start:
                if (c == '"') state = Quoted;
                else if (c == ',') end_field();
                else if (c == '\n') end_row();
                else { field.push_back(c); state = Unquoted; }
                break;
            case Unquoted:
                if (c == '"') throw ParseError(line, "bare quote in unquoted field");
                else if (c == ',') end_field();
                else if (c == '\n') end_row();
                else field.push_back(c);
                break;
            case Quoted:
                if (c == '"') state = QuoteSeen;
                else {
                    field.push_back(c);
                    if (c == '\n') ++line;
                }
                break;
            case QuoteSeen:
                if (c == '"') { field.push_back('"'); state = Quoted; }
                else if (c == ',') end_field();
                else if (c == '\n') end_row();
                else throw ParseError(line, "text after closing quote");
                break;
        }
    }
    if (state == Quoted) throw ParseError(line, "unterminated quoted field");
    if (state != Start || !field.empty() || !row.empty()) end_row();
    // Drop a final empty row produced by a trailing newline-free file edge.
    if (!rows.empty() && rows.back().size() == 1 && rows.back()[0].empty())
        rows.pop_back();
    return rows;
}

inline std::vector<std::vector<std::string>> parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string data = buf.str();
    // Tolerate a UTF-8 byte-order mark.
    if (data.rfind("\xEF\xBB\xBF", 0) == 0) data.erase(0, 3);
    return parse(data);
}

inline std::string escape(std::string_view field) {
    bool needs = field.find_first_of(",\"\n\r") != std::string_view::npos;
    if (!needs) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline std::string join_row(const std::vector<std::string>& fields) {
    std::string out;
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        out += escape(fields[i]);
    }
    out.push_back('\n');
    return out;
}

}  // namespace citelink::csv
