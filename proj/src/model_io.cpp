#include "penalearn/model_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "penalearn/errors.hpp"

namespace penalearn {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

double parse_number(const std::string& tok, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError("malformed number '" + tok + "'", line);
  }
  return v;
}

void write_row(std::ostream& out, const double* data, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i) out << ' ';
    out << format_double(data[i]);
  }
  out << '\n';
}

}  // namespace

void write_model(std::ostream& out, const Mlp& net) {
  out << kModelHeader << '\n';
  out << "layers";
  for (int s : net.layer_sizes()) out << ' ' << s;
  out << '\n';
  const auto& p = net.params();
  for (std::size_t t = 0; t < net.layer_count(); ++t) {
    write_row(out, p.weights[t].data(), p.weights[t].size());
    write_row(out, p.biases[t].data(), p.biases[t].size());
  }
}

Mlp read_model(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&](const char* what) {
    if (!std::getline(in, line)) throw ParseError(std::string("unexpected end of file, expected ") + what, lineno + 1);
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
  };

  next_line("header");
  if (line != kModelHeader) {
    if (line.rfind("penalearn-model ", 0) == 0) {
      throw VersionError("unsupported model version '" + line.substr(16) + "' (expected v1)");
    }
    throw ParseError("missing '" + std::string(kModelHeader) + "' header", lineno);
  }

  next_line("layer sizes");
  auto toks = split_ws(line);
  if (toks.empty() || toks.front() != "layers") throw ParseError("expected 'layers' line", lineno);
  std::vector<int> sizes;
  for (std::size_t i = 1; i < toks.size(); ++i) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(toks[i].data(), toks[i].data() + toks[i].size(), v);
    if (ec != std::errc() || ptr != toks[i].data() + toks[i].size() || v <= 0) {
      throw ParseError("malformed layer size '" + toks[i] + "'", lineno);
    }
    sizes.push_back(v);
  }
  if (sizes.size() < 3) throw ParseError("need at least 3 layer sizes", lineno);

  Mlp shape(sizes);
  MlpParams params = MlpParams::zeros_like(shape.params());
  auto read_tensor = [&](double* data, Eigen::Index n, const char* what) {
    next_line(what);
    auto values = split_ws(line);
    if (values.size() != static_cast<std::size_t>(n)) {
      throw ParseError(std::string(what) + " has " + std::to_string(values.size()) + " values, expected " +
                           std::to_string(n),
                       lineno);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      data[i] = parse_number(values[static_cast<std::size_t>(i)], lineno);
      if (!std::isfinite(data[i])) throw ParseError("non-finite parameter", lineno);
    }
  };
  for (std::size_t t = 0; t < shape.layer_count(); ++t) {
    read_tensor(params.weights[t].data(), params.weights[t].size(), "weight tensor");
    read_tensor(params.biases[t].data(), params.biases[t].size(), "bias tensor");
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (!split_ws(line).empty()) throw ParseError("trailing content after last tensor", lineno);
  }
  return Mlp(std::move(sizes), std::move(params));
}

std::string model_to_string(const Mlp& net) {
  std::ostringstream os;
  write_model(os, net);
  return os.str();
}

Mlp model_from_string(const std::string& text) {
  std::istringstream is(text);
  return read_model(is);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out << contents;
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error("failed writing '" + tmp.string() + "'");
    }
  }
  std::filesystem::rename(tmp, path);
}

void save_model(const Mlp& net, const std::filesystem::path& path) {
  write_file_atomic(path, model_to_string(net));
}

Mlp load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file '" + path.string() + "'");
  return read_model(in);
}

}  // namespace penalearn
