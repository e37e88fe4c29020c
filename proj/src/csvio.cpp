#include "lifeplan/csvio.hpp"

#include <cstdio>

#include "lifeplan/errors.hpp"

namespace lifeplan {

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path,
                     const std::vector<std::string>& header)
    : out_(path) {
    if (!out_) {
        throw Error(ErrorCode::ConfigError, "cannot open for writing: " + path);
    }
    row(header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ",";
        out_ << fields[i];
    }
    out_ << "\n";
}

}  // namespace lifeplan
