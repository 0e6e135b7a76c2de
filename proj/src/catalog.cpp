#include "opcells/catalog.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <sstream>

namespace opcells {

const char* kind_name(CellKind k) {
  switch (k) {
    case CellKind::Cacti: return "cacti";
    case CellKind::Bar: return "bar";
    case CellKind::FM: return "fm";
  }
  return "?";
}

CellKind parse_kind(const std::string& s) {
  if (s == "cacti") return CellKind::Cacti;
  if (s == "bar") return CellKind::Bar;
  if (s == "fm") return CellKind::FM;
  throw Error(Err::Parse, "unknown cell kind '" + s + "' (cacti, bar, fm)");
}

std::vector<std::uint64_t> Catalog::counts() const {
  std::vector<std::uint64_t> c;
  for (auto& r : records) {
    if (static_cast<int>(c.size()) <= r.dim) c.resize(r.dim + 1, 0);
    ++c[r.dim];
  }
  return c;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr))
    throw Error(Err::Precondition, "SHA-256 failed");
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

std::string record_line(const CatalogRecord& r) {
  return std::string(kind_name(r.kind)) + '\t' + std::to_string(r.dim) + '\t' + r.text;
}

std::string catalog_hash(const Catalog& c) {
  std::string all;
  for (auto& r : c.records) all += record_line(r) + '\n';
  return sha256_hex(all);
}

Catalog make_catalog(CellKind kind, int k, std::uint64_t limit) {
  Catalog c;
  c.kind = kind;
  c.k = k;
  c.params = "limit=" + std::to_string(limit);
  if (kind == CellKind::Cacti) {
    auto by = enumerate_cells(k, limit);
    for (size_t d = 0; d < by.size(); ++d)
      for (auto& x : by[d]) c.records.push_back({kind, x.str(), static_cast<int>(d)});
  } else {
    const bool fm = kind == CellKind::FM;
    auto by = enumerate_tree_cells(k, fm, limit);
    for (size_t d = 0; d < by.size(); ++d)
      for (auto& x : by[d]) c.records.push_back({kind, cell_str(x, fm), static_cast<int>(d)});
  }
  c.hash = catalog_hash(c);
  return c;
}

void write_catalog(std::ostream& os, const Catalog& c) {
  os << "opcells-catalog " << c.schema << '\n'
     << "kind " << kind_name(c.kind) << '\n'
     << "k " << c.k << '\n'
     << "params " << c.params << '\n'
     << "version " << c.version << '\n'
     << "sha256 " << c.hash << '\n'
     << "records " << c.records.size() << '\n';
  for (auto& r : c.records) os << record_line(r) << '\n';
}

namespace {

std::string header_value(std::istream& is, const std::string& key) {
  std::string line;
  if (!std::getline(is, line)) throw Error(Err::Parse, "catalog truncated before '" + key + "'");
  if (line.rfind(key + ' ', 0) != 0) throw Error(Err::Parse, "expected catalog header '" + key + "', got '" + line + "'");
  return line.substr(key.size() + 1);
}

int record_dim(CellKind kind, const std::string& text, int k) {
  if (kind == CellKind::Cacti) return parse_cell(text, k).dim();
  auto c = parse_tree_cell(text, kind == CellKind::FM);
  if (c.k() != k) throw Error(Err::Parse, "record has the wrong arity: " + text);
  return c.dim();
}

}  // namespace

Catalog read_catalog(std::istream& is) {
  Catalog c;
  try {
    c.schema = std::stoi(header_value(is, "opcells-catalog"));
    c.kind = parse_kind(header_value(is, "kind"));
    c.k = std::stoi(header_value(is, "k"));
    c.params = header_value(is, "params");
    c.version = header_value(is, "version");
    c.hash = header_value(is, "sha256");
    const auto n = std::stoull(header_value(is, "records"));
    std::string line;
    for (std::uint64_t i = 0; i < n; ++i) {
      if (!std::getline(is, line)) throw Error(Err::Parse, "catalog truncated in records");
      auto a = line.find('\t'), b = line.find('\t', a + 1);
      if (a == std::string::npos || b == std::string::npos) throw Error(Err::Parse, "bad record '" + line + "'");
      CatalogRecord r{parse_kind(line.substr(0, a)), line.substr(b + 1), std::stoi(line.substr(a + 1, b - a - 1))};
      if (r.kind != c.kind) throw Error(Err::Parse, "record kind differs from header");
      if (record_dim(r.kind, r.text, c.k) != r.dim) throw Error(Err::Parse, "record dimension is wrong: " + line);
      c.records.push_back(std::move(r));
    }
  } catch (const std::logic_error& e) {
    throw Error(Err::Parse, std::string("bad number in catalog: ") + e.what());
  }
  if (catalog_hash(c) != c.hash) throw Error(Err::Parse, "catalog hash mismatch");
  return c;
}

void save_catalog(const std::filesystem::path& p, const Catalog& c) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw Error(Err::Precondition, "cannot write " + tmp.string());
    write_catalog(os, c);
    if (!os) throw Error(Err::Precondition, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, p);
}

Catalog load_catalog(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw Error(Err::Precondition, "cannot read " + p.string());
  return read_catalog(is);
}

std::filesystem::path cache_file(const std::filesystem::path& dir, CellKind kind, int k) {
  return dir / (std::string(kind_name(kind)) + "-k" + std::to_string(k) + "-" + kCodeVersion + ".cat");
}

Catalog cached_catalog(CellKind kind, int k, const std::filesystem::path& dir, std::uint64_t limit, bool* hit) {
  if (hit) *hit = false;
  if (!dir.empty()) {
    auto p = cache_file(dir, kind, k);
    if (std::filesystem::exists(p)) {
      try {
        auto c = load_catalog(p);
        if (c.kind == kind && c.k == k && c.version == kCodeVersion) {
          if (hit) *hit = true;
          return c;
        }
      } catch (const Error&) {
        // stale or damaged entry: rebuild below
      }
    }
  }
  auto c = make_catalog(kind, k, limit);
  if (!dir.empty()) save_catalog(cache_file(dir, kind, k), c);
  return c;
}

std::string counts_str(const std::vector<std::uint64_t>& c) {
  std::string s;
  for (size_t d = 0; d < c.size(); ++d) {
    if (d) s += ' ';
    s += std::to_string(d) + ':' + std::to_string(c[d]);
  }
  return s;
}

}  // namespace opcells
