#pragma once

// CSV helpers. Floating-point output uses the shortest decimal string that
// round-trips to the same double, so identical inputs give identical bytes.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "youngbsde/paths.hpp"

namespace ybsde {

std::string format_double(double x);

/// Header `t,x1,...,xd`, one row per node.
void write_path_csv(std::ostream& out, const DiscretePath& path);
void write_path_csv(const std::filesystem::path& file, const DiscretePath& path);

DiscretePath read_path_csv(std::istream& in);
DiscretePath read_path_csv(const std::filesystem::path& file);

/// A header row and rows of numbers.
void write_table_csv(std::ostream& out, std::span<const std::string> header,
                     const std::vector<std::vector<double>>& rows);
void write_table_csv(const std::filesystem::path& file, std::span<const std::string> header,
                     const std::vector<std::vector<double>>& rows);

}  // namespace ybsde
