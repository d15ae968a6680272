#ifndef NLRB_IO_HPP
#define NLRB_IO_HPP

#include <fstream>
#include <string>
#include <vector>

#include "nlrb/linalg.hpp"

namespace nlrb {

/// Binary matrix container: magic "NLRBMAT1", u32 n, then n*n doubles
/// (column-major full storage).
void save_matrix_binary(const std::string& path, const SymMatrix& m);
SymMatrix load_matrix_binary(const std::string& path);

/// Text dump: one "row col value" line per stored entry of the upper
/// triangle with |value| > 0 (0-based indices). Debugging format.
void save_matrix_text(const std::string& path, const SymMatrix& m);

/// Deterministic CSV writer: fixed %.16e float format, "\n" line ends.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header,
              const std::string& comment = "");
    void row(const std::vector<double>& values);
    void row_with_label(const std::string& label, const std::vector<double>& values);
    int rows_written() const { return rows_; }
    const std::string& path() const { return path_; }

private:
    std::ofstream os_;
    std::string path_;
    int rows_ = 0;
};

std::string format_double(double v);

}  // namespace nlrb

#endif
