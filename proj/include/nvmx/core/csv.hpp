#pragma once

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>

namespace nvmx {

// Minimal CSV emitter for numeric tables. Values are written with enough
// digits to round-trip doubles.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
    }

    void header(std::initializer_list<const char*> cols) {
        bool first = true;
        for (const char* c : cols) {
            if (!first) out_ << ',';
            out_ << c;
            first = false;
        }
        out_ << '\n';
    }

    CsvWriter& field(const std::string& v) {
        sep();
        out_ << v;
        return *this;
    }
    CsvWriter& field(long long v) {
        sep();
        out_ << v;
        return *this;
    }
    CsvWriter& field(int v) { return field(static_cast<long long>(v)); }
    CsvWriter& field(std::size_t v) { return field(static_cast<long long>(v)); }
    CsvWriter& field(double v) {
        sep();
        std::ostringstream s;
        s.precision(17);
        s << v;
        out_ << s.str();
        return *this;
    }

    void endrow() {
        out_ << '\n';
        row_open_ = false;
    }

    void close() {
        out_.close();
        if (!out_) throw std::runtime_error("CsvWriter: write failed");
    }

private:
    void sep() {
        if (row_open_) out_ << ',';
        row_open_ = true;
    }
    std::ofstream out_;
    bool row_open_ = false;
};

} // namespace nvmx
