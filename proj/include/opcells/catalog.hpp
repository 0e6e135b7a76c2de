#pragma once

// Cell catalogs on disk: a header with a SHA-256 over the records, one line
// per cell, and a cache keyed by (kind, k, code version).

#include "metatree.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace opcells {

inline constexpr const char* kCodeVersion = "opcells-1";

enum class CellKind { Cacti, Bar, FM };
const char* kind_name(CellKind k);
CellKind parse_kind(const std::string& s);

struct CatalogRecord {
  CellKind kind;
  std::string text;
  int dim = 0;
  bool operator==(const CatalogRecord&) const = default;
};

struct Catalog {
  int schema = 1;
  CellKind kind = CellKind::Cacti;
  int k = 0;
  std::string params;   // generator parameters, free text without newlines
  std::string version = kCodeVersion;
  std::string hash;     // hex SHA-256 of the record lines
  std::vector<CatalogRecord> records;  // by dimension, then enumeration order

  std::vector<std::uint64_t> counts() const;
  bool operator==(const Catalog&) const = default;
};

std::string sha256_hex(const std::string& bytes);
std::string record_line(const CatalogRecord& r);
std::string catalog_hash(const Catalog& c);

Catalog make_catalog(CellKind kind, int k, std::uint64_t limit = 2'000'000);
void write_catalog(std::ostream& os, const Catalog& c);
/** Throws Parse on a malformed file or a hash mismatch. */
Catalog read_catalog(std::istream& is);
void save_catalog(const std::filesystem::path& p, const Catalog& c);
Catalog load_catalog(const std::filesystem::path& p);

std::filesystem::path cache_file(const std::filesystem::path& dir, CellKind kind, int k);
/** Loads from the cache when a valid entry exists, otherwise enumerates and
 *  stores. An empty dir disables caching. */
Catalog cached_catalog(CellKind kind, int k, const std::filesystem::path& dir, std::uint64_t limit = 2'000'000,
                       bool* hit = nullptr);

/** "0:6 1:18 2:12" */
std::string counts_str(const std::vector<std::uint64_t>& c);

}  // namespace opcells
