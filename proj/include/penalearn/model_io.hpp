#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "penalearn/mlp.hpp"

namespace penalearn {

// Text model format:
//   penalearn-model v1
//   layers <n> <m1> ... <k>
//   one line per tensor (W_0, b_0, W_1, b_1, ...), W row-major,
//   each value printed with 17 significant digits.
inline constexpr const char* kModelHeader = "penalearn-model v1";

void write_model(std::ostream& out, const Mlp& net);
Mlp read_model(std::istream& in);

std::string model_to_string(const Mlp& net);
Mlp model_from_string(const std::string& text);

// Writes to a temporary sibling and renames on success.
void save_model(const Mlp& net, const std::filesystem::path& path);
Mlp load_model(const std::filesystem::path& path);

// Atomic text write used for every file output (temp + rename).
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

// "%.17g" formatting shared by every CSV/model writer.
std::string format_double(double value);

}  // namespace penalearn
