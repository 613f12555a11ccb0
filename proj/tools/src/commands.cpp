#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "affseg/affseg.hpp"

namespace affseg::cli {
namespace fs = std::filesystem;

namespace {

template <class T>
T& make(std::vector<std::shared_ptr<void>>& keep_alive) {
  auto p = std::make_shared<T>();
  keep_alive.push_back(p);
  return *p;
}

Shape3 to_shape(const std::vector<std::uint64_t>& v, const char* what) {
  if (v.size() != 3) throw UsageError(std::string(what) + " needs three values Z Y X");
  return Shape3{v[0], v[1], v[2]};
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

// Outputs must never overwrite an input file.
void check_outputs(const std::vector<std::string>& inputs, const std::vector<std::string>& outputs) {
  for (const auto& o : outputs) {
    if (o.empty()) continue;
    const fs::path out = fs::weakly_canonical(o);
    for (const auto& i : inputs) {
      if (!i.empty() && fs::weakly_canonical(i) == out) throw UsageError("output " + o + " would overwrite an input");
    }
  }
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::IoFailure, "cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

void write_labels(const LabelVolume& v, const fs::path& path) {
  ensure_parent(path);
  write_volume(v, path);
}

void write_affs(const AffinityVolume& v, const fs::path& path) {
  ensure_parent(path);
  write_volume(v, path);
}

// Ground truth for scoring: either as given, or split into 6-connected components.
LabelVolume scoring_gt(const fs::path& path, bool components) {
  LabelVolume gt = read_labels(path);
  return components ? connected_components(gt) : gt;
}

void add_watershed_flags(CLI::App* sub, WatershedParams& p) {
  sub->add_option("--t-high", p.t_high, "union every edge with affinity >= t_high")->capture_default_str();
  sub->add_option("--t-low", p.t_low, "voxels without an incident edge >= t_low become background")
      ->capture_default_str();
  sub->add_option("--size-min", p.size_min, "minimum segment size in voxels")->capture_default_str();
  sub->add_option("--t-merge", p.t_merge, "minimum boundary affinity for size-filter merges")->capture_default_str();
}

void validated(const WatershedParams& p) {
  try {
    validate(p);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

Scorer load_scorer(const std::string& kind, const std::string& model) {
  if (kind == "mean") {
    if (!model.empty()) throw UsageError("--model is only used with --scorer logistic");
    return Scorer::mean_affinity();
  }
  if (model.empty()) throw UsageError("--scorer logistic needs --model");
  return load_model(model);
}

void check_theta(double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw UsageError("--theta must lie in [0, 1]");
}

// ---------------------------------------------------------------------------

Command synth_command(CLI::App& app, std::vector<std::shared_ptr<void>>& keep) {
  struct Opts {
    std::vector<std::uint64_t> shape;
    SynthParams synth;
    NoiseParams noise;
    std::string gt, aff;
  };
  auto& o = make<Opts>(keep);
  auto* sub = app.add_subcommand("synth", "generate synthetic ground truth and affinities");
  sub->add_option("--shape", o.shape, "volume shape Z Y X")->expected(3)->required();
  sub->add_option("--seeds", o.synth.n_seeds, "number of Voronoi seeds")->capture_default_str();
  sub->add_option("--anisotropy", o.synth.anisotropy, "z distance scale (>= 1)")->capture_default_str();
  sub->add_option("--sigma", o.noise.flip_sigma, "Gaussian noise std on affinities")->capture_default_str();
  sub->add_option("--jitter", o.noise.jitter_prob, "per-section shift probability")->capture_default_str();
  sub->add_option("--rng-seed", o.synth.rng_seed, "seed for all random streams")->capture_default_str();
  sub->add_option("--gt", o.gt, "ground-truth label volume to write")->required();
  sub->add_option("--aff", o.aff, "affinity volume to write")->required();
  return {sub, [&o](Io& io) {
            const Shape3 shape = to_shape(o.shape, "--shape");
            if (o.synth.n_seeds == 0 || o.synth.n_seeds > shape.voxels()) {
              throw UsageError("--seeds must lie in [1, voxel count]");
            }
            if (!(o.synth.anisotropy >= 1.0)) throw UsageError("--anisotropy must be >= 1");
            if (!(o.noise.flip_sigma >= 0.0)) throw UsageError("--sigma must be >= 0");
            if (!(o.noise.jitter_prob >= 0.0 && o.noise.jitter_prob <= 1.0)) {
              throw UsageError("--jitter must lie in [0, 1]");
            }
            check_outputs({o.gt}, {o.aff});
            o.noise.rng_seed = o.synth.rng_seed;
            const LabelVolume gt = synth_labels(shape, o.synth);
            const AffinityVolume aff = synth_affinities(gt, o.noise);
            write_labels(gt, o.gt);
            write_affs(aff, o.aff);
            io.out << "segments " << count_segments(gt) << "\n";
          }};
}

Command malis_command(CLI::App& app, std::vector<std::shared_ptr<void>>& keep) {
  struct Opts {
    std::string aff, gt, out;
    bool normalize = false;
  };
  auto& o = make<Opts>(keep);
  auto* sub = app.add_subcommand("malis-grad", "MALIS loss and gradient of affinities against ground truth");
  sub->add_option("--aff", o.aff, "affinity volume")->required();
  sub->add_option("--gt", o.gt, "ground-truth label volume")->required();
  sub->add_option("--out", o.out, "gradient volume to write (f32, 3 channels)");
  sub->add_flag("--normalize", o.normalize, "divide loss and gradient by the labeled pair count");
  return {sub, [&o](Io& io) {
            check_outputs({o.aff, o.gt}, {o.out});
            const MalisResult r = malis_gradient(read_affinities(o.aff), read_labels(o.gt), o.normalize);
            if (!o.out.empty()) {
              ensure_parent(o.out);
              write_volume(r.gradient, o.out);
            }
            io.out << exact(r.loss) << "\n";
          }};
}

Command watershed_command(CLI::App& app, std::vector<std::shared_ptr<void>>& keep) {
  struct Opts {
    std::string aff, out;
    WatershedParams p;
  };
  auto& o = make<Opts>(keep);
  auto* sub = app.add_subcommand("watershed", "affinity-graph watershed");
  sub->add_option("--aff", o.aff, "affinity volume")->required();
  sub->add_option("--out", o.out, "label volume to write")->required();
  add_watershed_flags(sub, o.p);
  return {sub, [&o](Io& io) {
            validated(o.p);
            check_outputs({o.aff}, {o.out});
            const WatershedResult r = zwatershed(read_affinities(o.aff), o.p);
            write_labels(r.labels, o.out);
            io.out << "segments " << r.stats.segments() << "\nbackground " << r.stats.background() << "\n";
          }};
}

Command size_filter_command(CLI::App& app, std::vector<std::shared_ptr<void>>& keep) {
  struct Opts {
    std::string labels, aff, out;
    std::uint64_t size_min = WatershedParams{}.size_min;
    float t_merge = WatershedParams{}.t_merge;
  };
  auto& o = make<Opts>(keep);
  auto* sub = app.add_subcommand("size-filter", "merge or drop segments below a size threshold");
  sub->add_option("--labels", o.labels, "label volume")->required();
  sub->add_option("--aff", o.aff, "affinity volume")->required();
  sub->add_option("--out", o.out, "label volume to write")->required();
  sub->add_option("--size-min", o.size_min, "minimum segment size in voxels")->capture_default_str();
  sub->add_option("--t-merge", o.t_merge, "minimum boundary affinity for merges")->capture_default_str();
  return {sub, [&o](Io& io) {
            if (!(o.t_merge >= 0.0f && o.t_merge <= 1.0f)) throw UsageError("--t-merge must lie in [0, 1]");
            check_outputs({o.labels, o.aff}, {o.out});
            const LabelVolume out = size_filter(read_labels(o.labels), read_affinities(o.aff), o.size_min, o.t_merge);
            write_labels(out, o.out);
            io.out << "segments " << count_segments(out) << "\n";
          }};
}

Command build_rag_command(CLI::App& app, std::vector<std::shared_ptr<void>>& keep) {
  struct Opts {
    std::string labels, aff, out;
  };
  auto& o = make<Opts>(keep);
  auto* sub = app.add_subcommand("build-rag", "region adjacency graph as CSV");
  sub->add_option("--labels", o.labels, "label volume")->required();
  sub->add_option("--aff", o.aff, "affinity volume")->required();
  sub->add_option("--out", o.out, "CSV to write (a,b,size_a,size_b,boundary,mean_affinity)")->required();
  return {sub, [&o](Io& io) {
            check_outputs({o.labels, o.aff}, {o.out});
            const Rag rag = build_rag(read_labels(o.labels), read_affinities(o.aff));
            std::string csv = "a,b,size_a,size_b,boundary,mean_affinity\n";
            for (const EdgeKey& k : rag.edge_keys()) {
              const FeatureAccumulator& acc = rag.edge(k.a, k.b);
              csv += std::to_string(k.a) + "," + std::to_string(k.b) + "," + std::to_string(rag.node(k.a).size) +
                     "," + std::to_string(rag.node(k.b).size) + "," + std::to_string(acc.total_count()) + "," +
                     exact(acc.mean_affinity()) + "\n";
            }
            write_text(o.out, csv);
            io.out << "nodes " << rag.node_count() << "\nedges " << rag.edge_count() << "\n";
          }};
}

Command train_command(CLI::App& app, std::vector<std::shared_ptr<void>>& keep) {
  struct Opts {
    std::string labels, aff, gt, out;
    TrainingOptions t;
  };
  auto& o = make<Opts>(keep);
  auto* sub = app.add_subcommand("train", "fit a logistic merge scorer against ground truth");
  sub->add_option("--labels", o.labels, "over-segmentation label volume")->required();
  sub->add_option("--aff", o.aff, "affinity volume")->required();
  sub->add_option("--gt", o.gt, "ground-truth label volume")->required();
  sub->add_option("--out", o.out, "model file to write")->required();
  sub->add_option("--epochs", o.t.epochs, "gradient descent epochs")->capture_default_str();
  sub->add_option("--step", o.t.step, "gradient descent step size")->capture_default_str();
  return {sub, [&o](Io& io) {
            if (!(o.t.step > 0.0)) throw UsageError("--step must be > 0");
            check_outputs({o.labels, o.aff, o.gt}, {o.out});
            TrainingReport report;
            const Scorer s = train_scorer(read_labels(o.labels), read_affinities(o.aff), read_labels(o.gt), o.t, &report);
            ensure_parent(o.out);
            save_model(s, o.out);
            std::size_t positives = 0;
            for (const auto& ex : report.examples) positives += ex.merge ? 1 : 0;
            io.out << "examples " << report.examples.size() << "\npositives " << positives << "\nrounds "
                   << report.rounds << "\naccuracy " << fixed(report.accuracy, 6) << "\n";
          }};
}

Command agglomerate_command(CLI::App& app, std::vector<std::shared_ptr<void>>& keep) {
  struct Opts {
    std::string labels, aff, out, tree, scorer = "mean", model;
    double theta = 0.5;
  };
  auto& o = make<Opts>(keep);
  auto* sub = app.add_subcommand("agglomerate", "greedy RAG agglomeration");
  sub->add_option("--labels", o.labels, "over-segmentation label volume")->required();
  sub->add_option("--aff", o.aff, "affinity volume")->required();
  sub->add_option("--out", o.out, "label volume to write")->required();
  sub->add_option("--tree", o.tree, "merge tree to write");
  sub->add_option("--scorer", o.scorer, "mean or logistic")
      ->check(CLI::IsMember({"mean", "logistic"}))
      ->capture_default_str();
  sub->add_option("--model", o.model, "model file for the logistic scorer");
  sub->add_option("--theta", o.theta, "stop when the best score falls below theta")->capture_default_str();
  return {sub, [&o](Io& io) {
            check_theta(o.theta);
            check_outputs({o.labels, o.aff, o.model}, {o.out, o.tree});
            const Scorer scorer = load_scorer(o.scorer, o.model);
            const AgglomerationResult r = agglomerate(read_labels(o.labels), read_affinities(o.aff), scorer, o.theta);
            write_labels(r.labels, o.out);
            if (!o.tree.empty()) write_text(o.tree, format_merge_tree(r.tree));
            io.out << "merges " << r.tree.merges.size() << "\nsegments " << count_segments(r.labels) << "\n";
          }};
}

Command apply_threshold_command(CLI::App& app, std::vector<std::shared_ptr<void>>& keep) {
  struct Opts {
    std::string tree, labels, out;
    double theta = 0.5;
  };
  auto& o = make<Opts>(keep);
  auto* sub = app.add_subcommand("apply-threshold", "replay a merge tree at a threshold");
  sub->add_option("--tree", o.tree, "merge tree")->required();
  sub->add_option("--labels", o.labels, "base label volume the tree was built on")->required();
  sub->add_option("--theta", o.theta, "replay merges with score >= theta")->capture_default_str();
  sub->add_option("--out", o.out, "label volume to write")->required();
  return {sub, [&o](Io& io) {
            check_theta(o.theta);
            check_outputs({o.tree, o.labels}, {o.out});
            const LabelVolume out = apply_threshold(read_merge_tree(o.tree), read_labels(o.labels), o.theta);
            write_labels(out, o.out);
            io.out << "segments " << count_segments(out) << "\n";
          }};
}

Command eval_command(CLI::App& app, std::vector<std::shared_ptr<void>>& keep) {
  struct Opts {
    std::string seg, gt;
    bool components = false;
  };
  auto& o = make<Opts>(keep);
  auto* sub = app.add_subcommand("eval", "split variation of information (prints vi_under,vi_over)");
  sub->add_option("--seg", o.seg, "segmentation label volume")->required();
  sub->add_option("--gt", o.gt, "ground-truth label volume")->required();
  sub->add_flag("--gt-components", o.components, "score against the 6-connected components of the ground truth");
  return {sub, [&o](Io& io) { io.out << format_vi(split_vi(read_labels(o.seg), scoring_gt(o.gt, o.components))) << "\n"; }};
}

Command curve_command(CLI::App& app, std::vector<std::shared_ptr<void>>& keep) {
  struct Opts {
    std::string tree, labels, gt, out;
    std::vector<double> thetas;
    bool components = false;
  };
  auto& o = make<Opts>(keep);
  auto* sub = app.add_subcommand("curve", "split VI along merge-tree thresholds (CSV)");
  sub->add_option("--tree", o.tree, "merge tree")->required();
  sub->add_option("--labels", o.labels, "base label volume")->required();
  sub->add_option("--gt", o.gt, "ground-truth label volume")->required();
  sub->add_option("--thetas", o.thetas, "strictly decreasing thresholds (default 1.0, 0.95, ..., 0.0)");
  sub->add_option("--out", o.out, "CSV to write (default: standard output)");
  sub->add_flag("--gt-components", o.components, "score against the 6-connected components of the ground truth");
  return {sub, [&o](Io& io) {
            std::vector<double> thetas = o.thetas;
            if (thetas.empty()) {
              for (int k = 20; k >= 0; --k) thetas.push_back(k / 20.0);
            }
            for (std::size_t i = 0; i < thetas.size(); ++i) {
              if (!(thetas[i] >= 0.0 && thetas[i] <= 1.0) || (i > 0 && !(thetas[i] < thetas[i - 1]))) {
                throw UsageError("--thetas must be strictly decreasing values in [0, 1]");
              }
            }
            check_outputs({o.tree, o.labels, o.gt}, {o.out});
            const std::string csv = format_vi_curve(
                vi_curve(read_merge_tree(o.tree), read_labels(o.labels), scoring_gt(o.gt, o.components), thetas));
            if (o.out.empty()) {
              io.out << csv;
            } else {
              write_text(o.out, csv);
            }
          }};
}

Command partition_command(CLI::App& app, std::vector<std::shared_ptr<void>>& keep) {
  struct Opts {
    std::vector<std::uint64_t> shape, block, halo;
    std::string out, aff;
    WatershedParams p;
  };
  auto& o = make<Opts>(keep);
  auto* sub = app.add_subcommand("partition", "write a block manifest, optionally segmenting every block");
  sub->add_option("--shape", o.shape, "volume shape Z Y X (taken from --aff when given)")->expected(3);
  sub->add_option("--block", o.block, "block core shape Z Y X")->expected(3)->required();
  sub->add_option("--halo", o.halo, "halo width Z Y X")->expected(3)->required();
  sub->add_option("--out", o.out, "manifest to write; block labelings go next to it")->required();
  sub->add_option("--aff", o.aff, "affinity volume: run watershed on every block halo and write the labelings");
  add_watershed_flags(sub, o.p);
  return {sub, [&o](Io& io) {
            if (o.aff.empty() && o.shape.empty()) throw UsageError("partition needs --shape or --aff");
            validated(o.p);
            check_outputs({o.aff}, {o.out});
            AffinityVolume aff;
            Shape3 shape{};
            if (!o.aff.empty()) {
              aff = read_affinities(o.aff);
              shape = aff.shape();
              if (!o.shape.empty() && to_shape(o.shape, "--shape") != shape) {
                throw UsageError("--shape does not match the affinity volume");
              }
            } else {
              shape = to_shape(o.shape, "--shape");
            }
            Manifest m;
            m.shape = shape;
            try {
              m.blocks = partition_blocks(shape, to_shape(o.block, "--block"), to_shape(o.halo, "--halo"));
            } catch (const Error& e) {
              throw UsageError(e.what());
            }
            for (const auto& b : m.blocks) m.label_paths.push_back("block_" + std::to_string(b.id) + ".volb");
            const fs::path dir = fs::path(o.out).parent_path();
            if (!o.aff.empty()) {
              const auto labelings = segment_blocks(aff, m.blocks, o.p);
              for (std::size_t i = 0; i < labelings.size(); ++i) write_labels(labelings[i], dir / m.label_paths[i]);
            }
            write_text(o.out, format_manifest(m));
            io.out << "blocks " << m.blocks.size() << "\n";
          }};
}

Command stitch_command(CLI::App& app, std::vector<std::shared_ptr<void>>& keep) {
  struct Opts {
    std::string manifest, out;
    StitchParams p;
  };
  auto& o = make<Opts>(keep);
  auto* sub = app.add_subcommand("stitch", "join block labelings listed in a manifest");
  sub->add_option("--manifest", o.manifest, "block manifest")->required();
  sub->add_option("--out", o.out, "global label volume to write")->required();
  sub->add_option("--min-ratio", o.p.min_ratio, "overlap fraction of the smaller segment")->capture_default_str();
  sub->add_option("--min-voxels", o.p.min_voxels, "absolute overlap floor")->capture_default_str();
  return {sub, [&o](Io& io) {
            try {
              validate(o.p);
            } catch (const Error& e) {
              throw UsageError(e.what());
            }
            const Manifest m = read_manifest(o.manifest);
            std::vector<std::string> inputs = m.label_paths;
            inputs.push_back(o.manifest);
            check_outputs(inputs, {o.out});
            std::vector<LabelVolume> labelings;
            for (const auto& path : m.label_paths) {
              if (path.empty() || !fs::exists(path)) {
                throw Error(Errc::CoverageGap, "missing block labeling '" + path + "'");
              }
              labelings.push_back(read_labels(path));
            }
            const LabelVolume out = stitch(m.blocks, labelings, o.p);
            if (out.shape() != m.shape) throw Error(Errc::CoverageGap, "blocks do not cover the manifest shape");
            write_labels(out, o.out);
            io.out << "segments " << count_segments(out) << "\n";
          }};
}

Command pipeline_command(CLI::App& app, std::vector<std::shared_ptr<void>>& keep) {
  struct Opts {
    std::string aff, gt, out_dir, scorer = "mean", model;
    double theta = 0.5;
    WatershedParams p;
    bool components = false;
  };
  auto& o = make<Opts>(keep);
  auto* sub = app.add_subcommand("pipeline", "watershed, agglomerate and evaluate in one run");
  sub->add_option("--aff", o.aff, "affinity volume")->required();
  sub->add_option("--gt", o.gt, "ground-truth label volume (enables evaluation)");
  sub->add_option("--out-dir", o.out_dir, "directory for all intermediates")->required();
  add_watershed_flags(sub, o.p);
  sub->add_option("--scorer", o.scorer, "mean or logistic")
      ->check(CLI::IsMember({"mean", "logistic"}))
      ->capture_default_str();
  sub->add_option("--model", o.model, "model file for the logistic scorer");
  sub->add_option("--theta", o.theta, "agglomeration threshold")->capture_default_str();
  sub->add_flag("--gt-components", o.components, "score against the 6-connected components of the ground truth");
  return {sub, [&o](Io& io) {
            validated(o.p);
            check_theta(o.theta);
            const fs::path dir = o.out_dir;
            const fs::path ws_path = dir / "watershed.volb";
            const fs::path seg_path = dir / "segmentation.volb";
            const fs::path tree_path = dir / "merge_tree.txt";
            const fs::path eval_path = dir / "eval.txt";
            check_outputs({o.aff, o.gt, o.model},
                          {ws_path.string(), seg_path.string(), tree_path.string(), eval_path.string()});
            const Scorer scorer = load_scorer(o.scorer, o.model);
            const AffinityVolume aff = read_affinities(o.aff);
            const WatershedResult ws = zwatershed(aff, o.p);
            const AgglomerationResult ag = agglomerate(ws.labels, aff, scorer, o.theta);
            fs::create_directories(dir);
            write_labels(ws.labels, ws_path);
            write_labels(ag.labels, seg_path);
            write_text(tree_path, format_merge_tree(ag.tree));
            io.out << "watershed segments " << ws.stats.segments() << "\n";
            io.out << "merges " << ag.tree.merges.size() << "\n";
            io.out << "segments " << count_segments(ag.labels) << "\n";
            if (!o.gt.empty()) {
              const std::string vi = format_vi(split_vi(ag.labels, scoring_gt(o.gt, o.components)));
              write_text(eval_path, vi + "\n");
              io.out << "eval " << vi << "\n";
            }
          }};
}

}  // namespace

std::vector<Command> register_commands(CLI::App& app, std::vector<std::shared_ptr<void>>& keep_alive) {
  return {
      synth_command(app, keep_alive),         malis_command(app, keep_alive),
      watershed_command(app, keep_alive),     size_filter_command(app, keep_alive),
      build_rag_command(app, keep_alive),     train_command(app, keep_alive),
      agglomerate_command(app, keep_alive),   apply_threshold_command(app, keep_alive),
      eval_command(app, keep_alive),          curve_command(app, keep_alive),
      partition_command(app, keep_alive),     stitch_command(app, keep_alive),
      pipeline_command(app, keep_alive),
  };
}

}  // namespace affseg::cli
