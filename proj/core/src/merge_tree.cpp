#include <cstdio>
#include <fstream>
#include <sstream>

#include "affseg/agglo.hpp"
#include "affseg/error.hpp"

namespace affseg {

std::string format_merge_tree(const MergeTree& tree) {
  std::string out;
  char line[96];
  for (const MergeRecord& m : tree.merges) {
    const int n = std::snprintf(line, sizeof line, "%llu %llu %.17g\n", static_cast<unsigned long long>(m.survivor),
                                static_cast<unsigned long long>(m.absorbed), m.score);
    out.append(line, static_cast<std::size_t>(n));
  }
  return out;
}

MergeTree parse_merge_tree(const std::string& text) {
  MergeTree tree;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    MergeRecord m;
    std::string extra;
    if (!(fields >> m.survivor >> m.absorbed >> m.score) || (fields >> extra)) {
      throw Error(Errc::InvalidValue, "merge tree line " + std::to_string(number) + ": expected 'survivor absorbed score'");
    }
    tree.merges.push_back(m);
  }
  return tree;
}

void write_merge_tree(const MergeTree& tree, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot open " + path.string() + " for writing");
  out << format_merge_tree(tree);
  if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

MergeTree read_merge_tree(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_merge_tree(text.str());
}

}  // namespace affseg
