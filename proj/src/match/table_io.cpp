#include "sbm/table_io.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "sbm/error.hpp"

namespace sbm {

namespace {

[[noreturn]] void corrupt(const std::string& what) { throw Error("corrupt BMT1 table: " + what); }

void put_le32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> bytes{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                  static_cast<char>((v >> 16) & 0xff),
                                  static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes.data(), 4);
}

}  // namespace

void write_bmt1(std::ostream& out, const MatchTable& table) {
  const auto& p = table.params();
  out << "BMT1 " << table.width() << ' ' << table.height() << ' ' << p.block_size << ' '
      << p.window_size << ' ' << p.max_matches << ' ' << p.stride << '\n';
  char line[96];
  for (const auto& [ref, list] : table.entries()) {
    out << "R " << ref.r << ' ' << ref.c << ' ' << list.size() << '\n';
    for (const auto& m : list) {
      std::snprintf(line, sizeof line, "M %d %d %.6f\n", m.dr, m.dc, m.dist);
      out << line;
    }
  }
}

void write_bmt1(const std::filesystem::path& path, const MatchTable& table) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  write_bmt1(out, table);
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

MatchTable read_bmt1(std::istream& in) {
  std::string tag;
  int width = 0, height = 0;
  MatchParams params;
  if (!(in >> tag) || tag != "BMT1") corrupt("missing BMT1 magic");
  if (!(in >> width >> height >> params.block_size >> params.window_size >> params.max_matches >>
        params.stride)) {
    corrupt("bad header");
  }
  if (width <= 0 || height <= 0 || params.block_size < 1 || params.max_matches < 1) {
    corrupt("bad header values");
  }
  MatchTable table(width, height, params);
  while (in >> tag) {
    if (tag != "R") corrupt("expected 'R', got '" + tag + "'");
    Coord ref;
    std::size_t m = 0;
    if (!(in >> ref.r >> ref.c >> m)) corrupt("bad reference line");
    if (ref.r < 0 || ref.c < 0 || ref.r + params.block_size > height ||
        ref.c + params.block_size > width) {
      corrupt("reference out of frame");
    }
    if (m > static_cast<std::size_t>(params.max_matches)) corrupt("list longer than N");
    MatchTable::List list(m);
    for (auto& e : list) {
      if (!(in >> tag) || tag != "M" || !(in >> e.dr >> e.dc >> e.dist)) corrupt("bad match line");
    }
    table.set(ref, std::move(list));
  }
  if (!in.eof()) corrupt("trailing data");
  return table;
}

MatchTable read_bmt1(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return read_bmt1(in);
}

void write_sum1(std::ostream& out, const SumTable& table, int k) {
  out.write("SUM1", 4);
  put_le32(out, static_cast<std::uint32_t>(table.cols.size()));
  put_le32(out, static_cast<std::uint32_t>(table.rows.size()));
  put_le32(out, static_cast<std::uint32_t>(k));
  put_le32(out, static_cast<std::uint32_t>(table.offset.dr));
  put_le32(out, static_cast<std::uint32_t>(table.offset.dc));
  for (std::uint32_t v : table.sums) put_le32(out, v);
}

void write_sum1(const std::filesystem::path& path, const SumTable& table, int k) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  write_sum1(out, table, k);
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace sbm
