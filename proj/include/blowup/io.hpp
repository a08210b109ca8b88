#pragma once

#include <map>
#include <string>
#include <vector>

#include "blowup/model.hpp"

namespace blowup {

// fixed 17-significant-digit formatting for reproducible output
std::string fmt17(double v);

struct CsvWriter {
    explicit CsvWriter(const std::string& path, const std::vector<std::string>& columns);
    ~CsvWriter();
    void row(const std::vector<std::string>& cells);
    std::string path;

  private:
    void* out_;
};

// flat JSON (or key=value) config file -> raw map + zdir vector
void read_config_file(const std::string& path, std::map<std::string, double>& raw,
                      std::vector<double>& zdir);

ModelConfig load_model(const std::string& path);

}  // namespace blowup
