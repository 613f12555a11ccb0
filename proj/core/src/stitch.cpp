#include "affseg/stitch.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>

#include "affseg/error.hpp"
#include "affseg/parallel.hpp"
#include "affseg/union_find.hpp"

namespace affseg {
namespace {

std::string box_text(const Box& b) {
  std::string out;
  for (const Range& r : b.axes) out += " " + std::to_string(r.begin) + " " + std::to_string(r.end);
  return out;
}

Shape3 volume_extent(const std::vector<BlockSpec>& specs) {
  Shape3 s{0, 0, 0};
  for (const auto& spec : specs) {
    s.z = std::max(s.z, spec.halo.axes[0].end);
    s.y = std::max(s.y, spec.halo.axes[1].end);
    s.x = std::max(s.x, spec.halo.axes[2].end);
  }
  return s;
}

void check_labelings(const std::vector<BlockSpec>& specs, const std::vector<LabelVolume>& labelings) {
  if (labelings.size() != specs.size()) {
    throw Error(Errc::CoverageGap, std::to_string(specs.size()) + " blocks but " + std::to_string(labelings.size()) +
                                       " labelings");
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (labelings[i].size() == 0) throw Error(Errc::CoverageGap, "block " + std::to_string(specs[i].id) + " has no labeling");
    require_same_shape(labelings[i].shape(), specs[i].halo.shape(), "block labeling vs halo range");
  }
}

std::uint64_t local_index(const BlockSpec& spec, const Shape3& local, std::uint64_t z, std::uint64_t y, std::uint64_t x) {
  return flat_index(local, z - spec.halo.axes[0].begin, y - spec.halo.axes[1].begin, x - spec.halo.axes[2].begin);
}

}  // namespace

std::vector<BlockSpec> partition_blocks(const Shape3& shape, const Shape3& block, const Shape3& halo) {
  validate_shape(shape);
  std::array<std::vector<std::pair<Range, Range>>, 3> per_axis;
  for (int a = 0; a < 3; ++a) {
    if (block[a] == 0) throw Error(Errc::InvalidPartition, "block dimensions must be >= 1");
    const std::uint64_t len = shape[a];
    const std::uint64_t count = (len + block[a] - 1) / block[a];
    if (count > 1 && halo[a] == 0) {
      throw Error(Errc::InvalidPartition, "halo must be >= 1 along a partitioned axis");
    }
    for (std::uint64_t i = 0; i < count; ++i) {
      const Range core{i * block[a], std::min(len, (i + 1) * block[a])};
      const Range grown{core.begin > halo[a] ? core.begin - halo[a] : 0, std::min(len, core.end + halo[a])};
      per_axis[a].emplace_back(core, grown);
    }
  }
  std::vector<BlockSpec> specs;
  for (const auto& [cz, hz] : per_axis[0]) {
    for (const auto& [cy, hy] : per_axis[1]) {
      for (const auto& [cx, hx] : per_axis[2]) {
        specs.push_back({specs.size(), Box{{cz, cy, cx}}, Box{{hz, hy, hx}}});
      }
    }
  }
  return specs;
}

void validate(const StitchParams& p) {
  if (!(p.min_ratio > 0.0 && p.min_ratio <= 1.0)) throw Error(Errc::InvalidArgument, "min_ratio must lie in (0, 1]");
  if (p.min_voxels == 0) throw Error(Errc::InvalidArgument, "min_voxels must be >= 1");
}

std::vector<StitchEdge> stitch_graph(const std::vector<BlockSpec>& specs, const std::vector<LabelVolume>& labelings) {
  check_labelings(specs, labelings);
  std::vector<StitchEdge> edges;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    for (std::size_t j = i + 1; j < specs.size(); ++j) {
      const Box shared = intersect(specs[i].halo, specs[j].halo);
      if (shared.empty()) continue;
      const LabelVolume& la = labelings[i];
      const LabelVolume& lb = labelings[j];
      std::unordered_map<std::uint64_t, std::uint64_t> count_a;
      std::unordered_map<std::uint64_t, std::uint64_t> count_b;
      std::map<std::pair<std::uint64_t, std::uint64_t>, std::uint64_t> overlap;
      for (std::uint64_t z = shared.axes[0].begin; z < shared.axes[0].end; ++z) {
        for (std::uint64_t y = shared.axes[1].begin; y < shared.axes[1].end; ++y) {
          for (std::uint64_t x = shared.axes[2].begin; x < shared.axes[2].end; ++x) {
            const std::uint64_t a = la[local_index(specs[i], la.shape(), z, y, x)];
            const std::uint64_t b = lb[local_index(specs[j], lb.shape(), z, y, x)];
            if (a != 0) ++count_a[a];
            if (b != 0) ++count_b[b];
            if (a != 0 && b != 0) ++overlap[{a, b}];
          }
        }
      }
      for (const auto& [pair, n] : overlap) {
        edges.push_back({StitchNode{i, pair.first}, StitchNode{j, pair.second}, n, count_a[pair.first],
                         count_b[pair.second]});
      }
    }
  }
  return edges;
}

LabelVolume stitch(const std::vector<BlockSpec>& specs, const std::vector<LabelVolume>& labelings,
                   const StitchParams& params) {
  validate(params);
  const auto edges = stitch_graph(specs, labelings);

  // Node ids: per block, its sorted nonzero labels after an offset.
  std::vector<std::vector<std::uint64_t>> local_ids(specs.size());
  std::vector<std::uint64_t> offset(specs.size() + 1, 0);
  for (std::size_t b = 0; b < specs.size(); ++b) {
    auto& ids = local_ids[b];
    ids.assign(labelings[b].data().begin(), labelings[b].data().end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (!ids.empty() && ids.front() == 0) ids.erase(ids.begin());
    offset[b + 1] = offset[b] + ids.size();
  }
  auto node_id = [&](std::uint64_t block, std::uint64_t label) {
    const auto& ids = local_ids[block];
    return offset[block] + static_cast<std::uint64_t>(std::lower_bound(ids.begin(), ids.end(), label) - ids.begin());
  };

  UnionFind uf(offset.back());
  for (const StitchEdge& e : edges) {
    const double smaller = static_cast<double>(std::min(e.count_a, e.count_b));
    if (e.overlap >= params.min_voxels && static_cast<double>(e.overlap) >= params.min_ratio * smaller) {
      uf.unite(node_id(e.a.block, e.a.label), node_id(e.b.block, e.b.label));
    }
  }

  const Shape3 shape = volume_extent(specs);
  validate_shape(shape);
  LabelVolume roots(shape);
  std::vector<std::uint8_t> written(shape.voxels(), 0);
  for (std::size_t b = 0; b < specs.size(); ++b) {
    const BlockSpec& spec = specs[b];
    const LabelVolume& local = labelings[b];
    for (std::uint64_t z = spec.core.axes[0].begin; z < spec.core.axes[0].end; ++z) {
      for (std::uint64_t y = spec.core.axes[1].begin; y < spec.core.axes[1].end; ++y) {
        for (std::uint64_t x = spec.core.axes[2].begin; x < spec.core.axes[2].end; ++x) {
          const std::uint64_t g = flat_index(shape, z, y, x);
          if (written[g]) throw Error(Errc::InvalidPartition, "block cores overlap");
          written[g] = 1;
          const std::uint64_t label = local[local_index(spec, local.shape(), z, y, x)];
          roots[g] = label == 0 ? 0 : uf.find(node_id(b, label)) + 1;
        }
      }
    }
  }
  if (std::find(written.begin(), written.end(), 0) != written.end()) {
    throw Error(Errc::CoverageGap, "block cores do not cover the volume");
  }
  return relabel_dense(roots);
}

std::vector<LabelVolume> segment_blocks(const AffinityVolume& aff, const std::vector<BlockSpec>& specs,
                                        const WatershedParams& params) {
  validate(params);
  std::vector<LabelVolume> out(specs.size());
  parallel_for(specs.size(), [&](std::size_t b) { out[b] = zwatershed(crop(aff, specs[b].halo), params).labels; });
  return out;
}

std::string format_manifest(const Manifest& manifest) {
  std::string out = "# affseg block manifest\n";
  out += "shape " + std::to_string(manifest.shape.z) + " " + std::to_string(manifest.shape.y) + " " +
         std::to_string(manifest.shape.x) + "\n";
  for (std::size_t i = 0; i < manifest.blocks.size(); ++i) {
    const BlockSpec& b = manifest.blocks[i];
    out += "block " + std::to_string(b.id) + " core" + box_text(b.core) + " halo" + box_text(b.halo) + " labels " +
           (i < manifest.label_paths.size() ? manifest.label_paths[i] : std::string{}) + "\n";
  }
  return out;
}

Manifest parse_manifest(const std::string& text) {
  Manifest m;
  bool have_shape = false;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  auto fail = [&](const std::string& why) {
    throw Error(Errc::InvalidValue, "manifest line " + std::to_string(number) + ": " + why);
  };
  auto read_box = [&](std::istringstream& fields, const char* tag) {
    std::string word;
    Box box;
    if (!(fields >> word) || word != tag) fail(std::string("expected '") + tag + "'");
    for (Range& r : box.axes) {
      if (!(fields >> r.begin >> r.end) || r.end <= r.begin) fail("bad range");
    }
    return box;
  };
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::string kind;
    fields >> kind;
    if (kind == "shape") {
      if (!(fields >> m.shape.z >> m.shape.y >> m.shape.x)) fail("expected 'shape Z Y X'");
      have_shape = true;
    } else if (kind == "block") {
      BlockSpec spec;
      if (!(fields >> spec.id)) fail("expected block id");
      spec.core = read_box(fields, "core");
      spec.halo = read_box(fields, "halo");
      std::string word;
      if (!(fields >> word) || word != "labels") fail("expected 'labels PATH'");
      std::string path;
      std::getline(fields >> std::ws, path);
      m.blocks.push_back(spec);
      m.label_paths.push_back(path);
    } else {
      fail("unknown record '" + kind + "'");
    }
  }
  if (!have_shape) throw Error(Errc::InvalidValue, "manifest has no shape line");
  validate_shape(m.shape);
  for (const auto& b : m.blocks) {
    for (int a = 0; a < 3; ++a) {
      if (b.halo.axes[a].end > m.shape[a] || b.core.axes[a].begin < b.halo.axes[a].begin ||
          b.core.axes[a].end > b.halo.axes[a].end) {
        throw Error(Errc::InvalidPartition, "block " + std::to_string(b.id) + " core/halo outside the volume");
      }
    }
  }
  return m;
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  Manifest m = parse_manifest(text.str());
  for (auto& p : m.label_paths) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (path.parent_path() / p).string();
  }
  return m;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot open " + path.string() + " for writing");
  out << format_manifest(manifest);
  if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

}  // namespace affseg
