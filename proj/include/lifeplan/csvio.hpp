#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace lifeplan {

// Formats a double with 9 significant digits, plain decimal point, no locale.
std::string fmt9(double v);

// Minimal CSV emitter: header row on construction, then one row per call.
// Values are written as given; numeric columns should be preformatted with
// fmt9 so every artifact file shares the same precision.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    void row(const std::vector<std::string>& fields);

  private:
    std::ofstream out_;
};

}  // namespace lifeplan
