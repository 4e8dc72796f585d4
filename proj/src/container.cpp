#include "pfplace/container.hpp"

#include <bit>
#include <fstream>

#include "pfplace/error.hpp"
#include "pfplace/hash.hpp"
#include "pfplace/keyvalue.hpp"

namespace pfplace {

std::uint64_t container_checksum(const ContainerHeader& h, const SparseMatrix& m) {
  Fnv1a f;
  f.update(h.kind);
  f.update_value(static_cast<std::uint64_t>(m.rows()));
  f.update_value(static_cast<std::uint64_t>(m.cols()));
  f.update_value(h.dt_markov);
  f.update_value(static_cast<std::uint64_t>(h.steps));
  f.update_value(h.eps_acc);
  f.update_value(h.diffusivity);
  f.update(h.scheme);
  f.update_value(h.grid_hash);
  f.update_value(h.field_hash);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    for (std::size_t e = 0; e < r.size(); ++e) {
      f.update_value(static_cast<std::uint64_t>(i));
      f.update_value(r.cols[e]);
      f.update_value(r.values[e]);
    }
  }
  return f.digest();
}

std::string container_text(const ContainerHeader& h, const SparseMatrix& m) {
  std::string out;
  out.reserve(64 * m.nnz() + 512);
  out += "pfop v1\n";
  out += "kind " + h.kind + "\n";
  out += "rows " + std::to_string(m.rows()) + "\n";
  out += "cols " + std::to_string(m.cols()) + "\n";
  out += "dt_markov " + format_double(h.dt_markov) + "\n";
  out += "steps " + std::to_string(h.steps) + "\n";
  out += "eps_acc " + format_double(h.eps_acc) + "\n";
  out += "diffusivity " + format_double(h.diffusivity) + "\n";
  out += "scheme " + (h.scheme.empty() ? std::string("-") : h.scheme) + "\n";
  out += "grid_hash " + to_hex(h.grid_hash) + "\n";
  out += "field_hash " + to_hex(h.field_hash) + "\n";
  out += "nnz " + std::to_string(m.nnz()) + "\n";
  out += "checksum " + to_hex(container_checksum(h, m)) + "\n";
  out += "data\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    for (std::size_t e = 0; e < r.size(); ++e) {
      out += std::to_string(i);
      out += ' ';
      out += std::to_string(r.cols[e]);
      out += ' ';
      out += format_double(r.values[e]);
      out += '\n';
    }
  }
  out += "end\n";
  return out;
}

void write_container(const std::filesystem::path& path, const ContainerHeader& header,
                     const SparseMatrix& matrix) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IntegrityError("cannot write '" + path.string() + "'");
  out << container_text(header, matrix);
  if (!out) throw IntegrityError("write failed for '" + path.string() + "'");
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    while (pos_ < text_.size()) {
      auto end = text_.find('\n', pos_);
      if (end == std::string_view::npos) end = text_.size();
      line = trim(text_.substr(pos_, end - pos_));
      pos_ = end + 1;
      ++line_no_;
      if (!line.empty()) return true;
    }
    return false;
  }
  int line_no() const { return line_no_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_no_ = 0;
};

}  // namespace

Container parse_container(std::string_view text) {
  LineReader reader(text);
  std::string_view line;
  auto fail = [&](const std::string& msg) {
    return IntegrityError("pfop line " + std::to_string(reader.line_no()) + ": " + msg);
  };
  if (!reader.next(line) || line != "pfop v1") throw fail("missing 'pfop v1' magic");

  auto field = [&](std::string_view key) -> std::string {
    if (!reader.next(line)) throw fail("truncated header, expected '" + std::string(key) + "'");
    const auto tok = split_ws(line);
    if (tok.size() != 2 || tok[0] != key) throw fail("expected '" + std::string(key) + " <value>'");
    return tok[1];
  };
  auto as_size = [&](const std::string& s) {
    std::size_t v = 0;
    if (!parse_size(s, v)) throw fail("bad integer '" + s + "'");
    return v;
  };
  auto as_double = [&](const std::string& s) {
    double v = 0;
    if (!parse_double(s, v)) throw fail("bad number '" + s + "'");
    return v;
  };
  auto as_hex = [&](const std::string& s) {
    try {
      return parse_hex(s);
    } catch (const FormatError&) {
      throw fail("bad hex '" + s + "'");
    }
  };

  Container c;
  auto& h = c.header;
  h.kind = field("kind");
  const std::size_t rows = as_size(field("rows"));
  const std::size_t cols = as_size(field("cols"));
  h.dt_markov = as_double(field("dt_markov"));
  h.steps = as_size(field("steps"));
  h.eps_acc = as_double(field("eps_acc"));
  h.diffusivity = as_double(field("diffusivity"));
  h.scheme = field("scheme");
  if (h.scheme == "-") h.scheme.clear();
  h.grid_hash = as_hex(field("grid_hash"));
  h.field_hash = as_hex(field("field_hash"));
  const std::size_t nnz = as_size(field("nnz"));
  const std::uint64_t checksum = as_hex(field("checksum"));
  if (!reader.next(line) || line != "data") throw fail("expected 'data'");

  std::vector<std::size_t> row_ptr(rows + 1, 0);
  std::vector<std::uint32_t> col_idx;
  std::vector<double> values;
  col_idx.reserve(nnz);
  values.reserve(nnz);
  std::size_t current_row = 0;
  bool ended = false;
  while (reader.next(line)) {
    if (line == "end") {
      ended = true;
      break;
    }
    const auto tok = split_ws(line);
    std::size_t i = 0, j = 0;
    double v = 0;
    if (tok.size() != 3 || !parse_size(tok[0], i) || !parse_size(tok[1], j) ||
        !parse_double(tok[2], v)) {
      throw fail("expected '<row> <col> <value>'");
    }
    if (i >= rows || j >= cols) throw fail("entry outside " + std::to_string(rows) + "x" + std::to_string(cols));
    if (i < current_row) throw fail("entries not in row-major order");
    while (current_row < i) row_ptr[++current_row] = values.size();
    if (!values.empty() && row_ptr[i] < values.size() && col_idx.back() >= j) {
      throw fail("columns not increasing within row " + std::to_string(i));
    }
    col_idx.push_back(static_cast<std::uint32_t>(j));
    values.push_back(v);
  }
  if (!ended) throw fail("truncated data, missing 'end'");
  while (current_row < rows) row_ptr[++current_row] = values.size();
  if (values.size() != nnz) {
    throw IntegrityError("pfop: header declares " + std::to_string(nnz) + " entries, found " +
                         std::to_string(values.size()));
  }
  try {
    c.matrix = SparseMatrix::from_csr(rows, cols, std::move(row_ptr), std::move(col_idx), std::move(values));
  } catch (const Error& e) {
    throw IntegrityError(std::string("pfop: ") + e.what());
  }
  if (container_checksum(h, c.matrix) != checksum) {
    throw IntegrityError("pfop: checksum mismatch");
  }
  return c;
}

Container read_container(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const FormatError& e) {
    throw IntegrityError(e.what());
  }
  try {
    return parse_container(text);
  } catch (const IntegrityError& e) {
    throw IntegrityError(path.string() + ": " + e.what());
  }
}

}  // namespace pfplace
