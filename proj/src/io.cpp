#include "blowup/io.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>

namespace blowup {

std::string fmt17(double v) {
    char buf[64];
    snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& p, const std::vector<std::string>& columns) : path(p) {
    FILE* f = fopen(p.c_str(), "w");
    if (!f) throw ConfigError("cannot open output file " + p);
    out_ = f;
    for (size_t i = 0; i < columns.size(); ++i)
        fprintf(f, "%s%s", columns[i].c_str(), i + 1 < columns.size() ? "," : "\n");
}

CsvWriter::~CsvWriter() {
    if (out_) fclose(static_cast<FILE*>(out_));
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    FILE* f = static_cast<FILE*>(out_);
    for (size_t i = 0; i < cells.size(); ++i)
        fprintf(f, "%s%s", cells[i].c_str(), i + 1 < cells.size() ? "," : "\n");
}

void read_config_file(const std::string& path, std::map<std::string, double>& raw,
                      std::vector<double>& zdir) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse failure: ") + e.what());
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() == "zdir") {
            zdir = it.value().get<std::vector<double>>();
        } else if (it.value().is_number()) {
            raw[it.key()] = it.value().get<double>();
        } else {
            throw ConfigError("config key '" + it.key() + "' is not numeric");
        }
    }
}

ModelConfig load_model(const std::string& path) {
    std::map<std::string, double> raw;
    std::vector<double> zdir;
    read_config_file(path, raw, zdir);
    return make_model(raw, zdir);
}

}  // namespace blowup
