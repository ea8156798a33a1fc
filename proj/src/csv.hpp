#pragma once
// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF.

#include <istream>
#include <string>
#include <vector>

namespace saltdialog::detail {

// Reads one record; returns false at end of input.
inline bool read_csv_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    char c;
    while (in.get(c)) {
        any = true;
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            break;
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    if (!any)
        return false;
    fields.push_back(std::move(field));
    return true;
}

inline bool blank_record(const std::vector<std::string>& fields) {
    for (const auto& f : fields)
        if (f.find_first_not_of(" \t") != std::string::npos)
            return false;
    return true;
}

} // namespace saltdialog::detail
