#include "maas/csv.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace maas {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

static std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(trim(cur));
    return out;
}

int CsvTable::col(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    CsvTable t;
    t.path = path;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string stripped = trim(line);
        if (stripped.empty()) continue;
        auto fields = split_fields(stripped);
        if (t.header.empty()) {
            t.header = fields;
            continue;
        }
        if (fields.size() > t.header.size())
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": more fields than header columns");
        fields.resize(t.header.size());
        t.rows.push_back(std::move(fields));
    }
    if (t.header.empty()) throw std::runtime_error(path + ": empty file, header expected");
    return t;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& r : rows) {
        for (size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
        out << "\n";
    }
}

double parse_double(const std::string& s, const std::string& where) {
    const std::string v = trim(s);
    if (v.empty()) throw std::runtime_error(where + ": empty numeric field");
    char* end = nullptr;
    double x = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size())
        throw std::runtime_error(where + ": bad number '" + v + "'");
    return x;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::string stripped = trim(line);
        if (stripped.empty()) continue;
        auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected key=value");
        std::string key = trim(stripped.substr(0, eq));
        std::string val = trim(stripped.substr(eq + 1));
        if (key.empty() || val.empty())
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected key=value");
        kv[key] = val;
    }
    return kv;
}

}  // namespace maas
