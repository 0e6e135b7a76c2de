#include <catch2/catch_amalgamated.hpp>

#include "opcells/catalog.hpp"
#include "opcells/draw.hpp"

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

using namespace opcells;
namespace fs = std::filesystem;

namespace {

size_t count(const std::string& s, const std::string& needle) {
  size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

// minimal well-formedness: balanced tags, quoted attributes, one root element
bool well_formed(const std::string& s) {
  std::vector<std::string> stack;
  int roots = 0;
  std::regex tag(R"(<(/?)([A-Za-z?][\w:-]*)((?:\s+[\w:-]+="[^"<]*")*)\s*(/?\??)>)");
  size_t pos = 0;
  for (std::sregex_iterator it(s.begin(), s.end(), tag), end; it != end; ++it) {
    auto& m = *it;
    auto gap = s.substr(pos, m.position() - pos);
    if (gap.find('<') != std::string::npos) return false;
    pos = m.position() + m.length();
    std::string name = m[2];
    if (name[0] == '?') continue;
    if (m[1] == "/") {
      if (stack.empty() || stack.back() != name) return false;
      stack.pop_back();
    } else if (m[4] != "/") {
      if (stack.empty()) ++roots;
      stack.push_back(name);
    } else if (stack.empty()) {
      ++roots;
    }
  }
  return stack.empty() && roots == 1 && s.find('<', pos) == std::string::npos;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("opcells-test-" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("catalog counts") {
  CHECK(counts_str(make_catalog(CellKind::Cacti, 3).counts()) == "0:6 1:18 2:12");
  CHECK(counts_str(make_catalog(CellKind::Bar, 3).counts()) == "0:6 1:30 2:36 3:12");
  CHECK(counts_str(make_catalog(CellKind::FM, 2).counts()) == "0:2 1:2");
  CHECK(parse_kind("fm") == CellKind::FM);
  CHECK_THROWS_AS(parse_kind("cactus"), Error);
}

TEST_CASE("catalog round trip and hash") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  for (auto kind : {CellKind::Cacti, CellKind::Bar, CellKind::FM}) {
    auto c = make_catalog(kind, 3);
    std::stringstream ss;
    write_catalog(ss, c);
    auto r = read_catalog(ss);
    CHECK(r == c);
    CHECK(catalog_hash(r) == c.hash);
  }
  // the hash depends on the records and their order
  auto c = make_catalog(CellKind::Cacti, 3);
  auto d = c;
  std::swap(d.records[0], d.records[1]);
  CHECK(catalog_hash(d) != c.hash);

  std::stringstream ss;
  write_catalog(ss, c);
  auto text = ss.str();
  auto at = text.find("cacti\t0\t123");
  REQUIRE(at != std::string::npos);
  text.replace(at, 11, "cacti\t0\t132");
  std::stringstream bad(text);
  CHECK_THROWS_AS(read_catalog(bad), Error);

  std::stringstream wrong_dim("opcells-catalog 1\nkind cacti\nk 2\nparams -\nversion x\nsha256 0\nrecords 1\ncacti\t1\t12\n");
  CHECK_THROWS_AS(read_catalog(wrong_dim), Error);
}

TEST_CASE("catalog cache") {
  auto dir = scratch("cache");
  bool hit = true;
  auto a = cached_catalog(CellKind::Bar, 3, dir, 2'000'000, &hit);
  CHECK_FALSE(hit);
  CHECK(fs::exists(cache_file(dir, CellKind::Bar, 3)));
  auto b = cached_catalog(CellKind::Bar, 3, dir, 2'000'000, &hit);
  CHECK(hit);
  CHECK(a == b);
  // a damaged entry is rebuilt
  {
    std::ofstream os(cache_file(dir, CellKind::Bar, 3));
    os << "garbage\n";
  }
  auto c = cached_catalog(CellKind::Bar, 3, dir, 2'000'000, &hit);
  CHECK_FALSE(hit);
  CHECK(c == a);
  fs::remove_all(dir);
}

TEST_CASE("cactus drawings") {
  auto s = draw_cactus(parse_cell("12"));
  CHECK(well_formed(s));
  CHECK(count(s, "class=\"lobe\"") == 2);
  CHECK(count(s, "class=\"base\"") == 1);

  auto t = draw_cactus(parse_cell("12131"));
  CHECK(well_formed(t));
  CHECK(count(t, "class=\"lobe\"") == 3);
  CHECK(count(t, "class=\"base\"") == 1);
  // base dot on lobe 1, which is the first circle
  std::smatch m;
  REQUIRE(std::regex_search(t, m, std::regex(R"re(class="lobe" cx="([^"]+)" cy="([^"]+)" r="([^"]+)")re")));
  double cx = std::stod(m[1]), cy = std::stod(m[2]), r = std::stod(m[3]);
  REQUIRE(std::regex_search(t, m, std::regex(R"re(class="base" cx="([^"]+)" cy="([^"]+)")re")));
  CHECK(std::hypot(std::stod(m[1]) - cx, std::stod(m[2]) - cy) == Catch::Approx(r).epsilon(1e-4));

  CHECK(draw_cactus(parse_cell("12131")) == t);
  CHECK_THROWS_AS(draw_cactus(parse_cell("12"), DrawStyle{}, {0.5}), Error);
}

TEST_CASE("bar cell drawings") {
  auto c = parse_tree_cell("1(23) : root=121 ; v{23}=12", false);
  auto s = draw_bar_cell(c);
  CHECK(well_formed(s));
  CHECK(count(s, "class=\"vertex\"") == 2);
  CHECK(count(s, "class=\"edge\"") == 1);
  CHECK(count(s, "class=\"lobe\"") == 4);
  CHECK(count(s, ">{23}<") == 1);
  DrawStyle tiny;
  tiny.max_k = 2;
  CHECK_THROWS_AS(draw_bar_cell(c, tiny), Error);
}
