// CSV / JSON export of sweep results. Each file holds the rows of one task;
// parsing a file gives back exactly those rows, doubles bit-for-bit.

#ifndef BCSTAB_REPORT_IO_H_
#define BCSTAB_REPORT_IO_H_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "bcstab/experiment.h"

namespace bcstab {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// "<task>_<spec-hash>.<csv|json>"
std::string result_file_name(const std::string& spec_hash, Task task, OutputFormat format);

// Rows of `task` only.
std::string format_result(const SweepResult& result, Task task, OutputFormat format);
SweepResult parse_result(std::string_view text, OutputFormat format);

// Writes via a temporary sibling and renames it into place.
std::filesystem::path write_result(const SweepResult& result, Task task, OutputFormat format,
                                   const std::filesystem::path& dir);

// Format is taken from the extension.
SweepResult read_result_file(const std::filesystem::path& path);

// Filters `result` down to one task, preserving order.
SweepResult rows_of(const SweepResult& result, Task task);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

}  // namespace bcstab

#endif  // BCSTAB_REPORT_IO_H_
