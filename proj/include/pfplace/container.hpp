#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "pfplace/sparse.hpp"

namespace pfplace {

// Header of a "pfop v1" sparse-matrix container. The same layout stores
// Markov operators and tracking matrices; `kind` tells them apart.
struct ContainerHeader {
  std::string kind;
  double dt_markov = 0.0;
  std::size_t steps = 0;
  double eps_acc = 0.0;
  double diffusivity = 0.0;
  std::string scheme;
  std::uint64_t grid_hash = 0;
  std::uint64_t field_hash = 0;
};

struct Container {
  ContainerHeader header;
  SparseMatrix matrix;
};

std::uint64_t container_checksum(const ContainerHeader& header, const SparseMatrix& matrix);

std::string container_text(const ContainerHeader& header, const SparseMatrix& matrix);
void write_container(const std::filesystem::path& path, const ContainerHeader& header,
                     const SparseMatrix& matrix);

// Any structural problem or checksum mismatch raises IntegrityError.
Container parse_container(std::string_view text);
Container read_container(const std::filesystem::path& path);

}  // namespace pfplace
