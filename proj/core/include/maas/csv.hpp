#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace maas {

// Minimal CSV support for the scenario fixtures. No quoting: none of the
// file formats need embedded commas, so a field is whatever sits between
// separators. Empty fields are legal (several columns are per-kind optional).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // each padded to header size
    std::string path;                            // for error messages

    // column index by name, -1 if absent
    int col(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Parses a double, rejecting trailing garbage. `where` names the file/line
// for the error message.
double parse_double(const std::string& s, const std::string& where);

// Flat key=value config file. '#' starts a comment, blank lines ignored.
std::map<std::string, std::string> read_config_file(const std::string& path);

std::string trim(const std::string& s);

}  // namespace maas
