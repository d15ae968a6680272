#include "nlrb/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace nlrb {

namespace {
constexpr char kMatMagic[8] = {'N', 'L', 'R', 'B', 'M', 'A', 'T', '1'};
}

void save_matrix_binary(const std::string& path, const SymMatrix& m) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_matrix_binary: cannot open " + path);
    os.write(kMatMagic, 8);
    const std::uint32_t n = static_cast<std::uint32_t>(m.n());
    os.write(reinterpret_cast<const char*>(&n), 4);
    os.write(reinterpret_cast<const char*>(m.mat().data()), sizeof(double) * m.n() * m.n());
    if (!os) throw std::runtime_error("save_matrix_binary: write failed");
}

SymMatrix load_matrix_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_matrix_binary: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (std::memcmp(magic, kMatMagic, 8) != 0)
        throw std::runtime_error("load_matrix_binary: bad magic in " + path);
    std::uint32_t n = 0;
    is.read(reinterpret_cast<char*>(&n), 4);
    SymMatrix m(static_cast<int>(n));
    std::vector<double> buf(static_cast<size_t>(n) * n);
    is.read(reinterpret_cast<char*>(buf.data()), sizeof(double) * buf.size());
    if (!is) throw std::runtime_error("load_matrix_binary: truncated file " + path);
    for (std::uint32_t j = 0; j < n; ++j)
        for (std::uint32_t i = j; i < n; ++i) m.set(i, j, buf[j * n + i]);
    return m;
}

void save_matrix_text(const std::string& path, const SymMatrix& m) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_matrix_text: cannot open " + path);
    for (int i = 0; i < m.n(); ++i)
        for (int j = i; j < m.n(); ++j)
            if (m(i, j) != 0.0) os << i << ' ' << j << ' ' << format_double(m(i, j)) << '\n';
    if (!os) throw std::runtime_error("save_matrix_text: write failed");
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header,
                     const std::string& comment)
    : os_(path), path_(path) {
    if (!os_) throw std::runtime_error("CsvWriter: cannot open " + path);
    if (!comment.empty()) os_ << "# " << comment << '\n';
    for (size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
    os_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
    for (size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << format_double(values[i]);
    os_ << '\n';
    ++rows_;
}

void CsvWriter::row_with_label(const std::string& label, const std::vector<double>& values) {
    os_ << label;
    for (double v : values) os_ << ',' << format_double(v);
    os_ << '\n';
    ++rows_;
}

}  // namespace nlrb
