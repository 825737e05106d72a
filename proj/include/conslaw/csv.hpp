#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace conslaw {

// Shortest round-trip representation; independent of locale.
std::string format_number(double v);

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    void row(std::initializer_list<double> values);
    void row(const std::vector<double>& values);

private:
    std::ofstream out_;
    std::size_t columns_;
};

}  // namespace conslaw
