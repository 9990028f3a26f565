#include "projlens/cli.hpp"

#include "projlens/alignment.hpp"
#include "projlens/entropy.hpp"
#include "projlens/error.hpp"
#include "projlens/manifest.hpp"
#include "projlens/npy.hpp"
#include "projlens/pad.hpp"
#include "projlens/parallel.hpp"
#include "projlens/projector.hpp"
#include "projlens/pursuit.hpp"
#include "projlens/synth.hpp"
#include "projlens/trainer.hpp"

#include <CLI11.hpp>

#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#ifndef PROJLENS_VERSION
#define PROJLENS_VERSION "0.0.0"
#endif

namespace projlens {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

void write_json(const fs::path& path, const ojson& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file(path, j.dump(2) + "\n");
}

RunManifest make_manifest(std::string command, std::uint64_t seed = 0) {
  RunManifest m;
  m.command = std::move(command);
  m.tool_version = PROJLENS_VERSION;
  m.seed = seed;
  return m;
}

void emit_error(std::ostream& err, std::string_view code, std::string_view message) {
  ojson e;
  e["error"] = code;
  e["message"] = message;
  err << e.dump() << '\n';
}

std::optional<ProjectorParams> maybe_projector(const std::string& dir) {
  if (dir.empty()) return std::nullopt;
  return load_checkpoint(dir);
}

// ---------------------------------------------------------------- entropy

struct EntropyArgs {
  std::string before, after, out, route = "auto";
  std::size_t max_eigenvalues = 0;
};

SpectrumRoute parse_route(const std::string& s) {
  if (s == "auto") return SpectrumRoute::automatic;
  if (s == "covariance") return SpectrumRoute::covariance;
  if (s == "gram") return SpectrumRoute::gram;
  if (s == "svd") return SpectrumRoute::svd;
  throw Error(Errc::InvalidArgument, "unknown spectrum route '" + s + "'");
}

int cmd_entropy(const EntropyArgs& a) {
  const auto route = parse_route(a.route);
  RunManifest m = make_manifest("entropy");
  m.flags = {{"before", a.before}, {"after", a.after}, {"route", a.route}, {"max-eigenvalues", std::to_string(a.max_eigenvalues)}};
  m.input_digests["before"] = content_digest(a.before);
  const auto before = von_neumann_entropy(load_matrix(a.before), route);
  ojson report;
  report["manifest"] = ojson();
  report["before"] = to_json(before, a.max_eigenvalues);
  if (!a.after.empty()) {
    m.input_digests["after"] = content_digest(a.after);
    const auto after = von_neumann_entropy(load_matrix(a.after), route);
    report["after"] = to_json(after, a.max_eigenvalues);
    report["delta_entropy"] = before.entropy - after.entropy;
  }
  report["manifest"] = m.to_json();
  write_json(a.out, report);
  return 0;
}

// ---------------------------------------------------------------- align

struct TextArgs {
  std::string vocab_emb, vocab_tok, overrides, resize = "squash";
  bool case_sensitive = false;
  bool space_prefix = false;
  double min_frac = 0.5;
  std::string threshold = "mean_std:1.0";
  std::string grid = "24x24x14";
};

AlignOptions align_options(const TextArgs& t, std::optional<TokenOverrides>& overrides_storage) {
  AlignOptions o;
  o.tokenizer.lowercase = !t.case_sensitive;
  o.tokenizer.space_prefix = t.space_prefix;
  o.strategy = ThresholdStrategy::parse(t.threshold);
  if (t.resize == "squash") {
    o.resize = ResizeMode::squash;
  } else if (t.resize == "pad") {
    o.resize = ResizeMode::pad;
  } else {
    throw Error(Errc::InvalidArgument, "resize must be squash or pad");
  }
  if (!(t.min_frac > 0.0 && t.min_frac <= 1.0)) throw Error(Errc::InvalidArgument, "min-frac must lie in (0, 1]");
  o.min_frac = t.min_frac;
  if (!t.overrides.empty()) {
    overrides_storage = parse_token_overrides(read_file(t.overrides));
    o.overrides = &*overrides_storage;
  }
  return o;
}

void text_flags(RunManifest& m, const TextArgs& t) {
  m.flags["vocab-emb"] = t.vocab_emb;
  m.flags["vocab-tok"] = t.vocab_tok;
  m.flags["grid"] = t.grid;
  m.flags["threshold"] = t.threshold;
  m.flags["resize"] = t.resize;
  m.flags["min-frac"] = num(t.min_frac);
  m.flags["case-sensitive"] = t.case_sensitive ? "true" : "false";
  m.flags["space-prefix"] = t.space_prefix ? "true" : "false";
  m.flags["token-overrides"] = t.overrides;
  m.input_digests["vocab-emb"] = content_digest(t.vocab_emb);
  m.input_digests["vocab-tok"] = content_digest(t.vocab_tok);
  if (!t.overrides.empty()) m.input_digests["token-overrides"] = content_digest(t.overrides);
}

// Embeddings are either a directory holding <image_id>.npy per record or a
// single NPY stacking every record's S rows in record order.
class EmbeddingSource {
 public:
  EmbeddingSource(const fs::path& path, std::size_t records, std::size_t s) : path_(path), s_(s) {
    if (!fs::is_directory(path)) {
      stacked_ = load_matrix(path);
      if (stacked_->rows() != records * s) {
        throw Error(Errc::DimensionMismatch, "stacked embeddings have " + std::to_string(stacked_->rows()) + " rows, expected " +
                                                 std::to_string(records) + " x " + std::to_string(s));
      }
    }
  }

  DenseMatrix get(std::size_t index, const PadRecord& record) const {
    if (stacked_) {
      return DenseMatrix(stacked_->values.middleRows(static_cast<Eigen::Index>(index * s_), static_cast<Eigen::Index>(s_)),
                         stacked_->dtype);
    }
    return load_matrix(embedding_path(path_, record.image_id));
  }

 private:
  fs::path path_;
  std::size_t s_;
  std::optional<DenseMatrix> stacked_;
};

struct AlignArgs {
  std::string embeddings, pad, projector, out, heat_csv;
  TextArgs text;
};

int cmd_align(const AlignArgs& a) {
  const PatchGrid grid = PatchGrid::parse(a.text.grid);
  std::optional<TokenOverrides> overrides;
  const AlignOptions options = align_options(a.text, overrides);
  const auto records = parse_pad(read_file(a.pad));
  const VocabTable vocab = load_vocab(a.text.vocab_emb, a.text.vocab_tok);
  const auto projector = maybe_projector(a.projector);
  const EmbeddingSource source(a.embeddings, records.size(), grid.size());

  RunManifest m = make_manifest("align");
  text_flags(m, a.text);
  m.flags["embeddings"] = a.embeddings;
  m.flags["pad"] = a.pad;
  m.flags["projector"] = a.projector;
  m.input_digests["embeddings"] = content_digest(a.embeddings);
  m.input_digests["pad"] = content_digest(a.pad);
  if (projector) m.input_digests["projector"] = content_digest(a.projector);

  const auto n = static_cast<std::ptrdiff_t>(records.size());
  std::vector<std::optional<AlignmentReport>> reports(records.size());
  std::vector<std::string> unevaluated(records.size());
  std::vector<std::exception_ptr> failures(records.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      DenseMatrix v = source.get(k, records[k]);
      if (projector) v = project(*projector, v);
      reports[k] = align_score(v, records[k], vocab, grid, options);
    } catch (const Error& e) {
      if (e.code() == Errc::NoEvaluableObjects) {
        unevaluated[k] = e.what();
      } else {
        failures[k] = std::current_exception();
      }
    } catch (...) {
      failures[k] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  ojson per_record = ojson::array();
  ojson skipped_records = ojson::array();
  double record_iou_sum = 0.0, object_iou_sum = 0.0, cosine_sum = 0.0;
  std::size_t evaluated = 0, objects = 0, cosine_objects = 0;
  bool nonpositive = false;
  std::string heat = "image_id,tag,patch,cosine\n";
  for (std::size_t k = 0; k < records.size(); ++k) {
    if (!reports[k]) {
      skipped_records.push_back({{"image_id", records[k].image_id}, {"reason", unevaluated[k]}});
      continue;
    }
    const auto& r = *reports[k];
    ++evaluated;
    record_iou_sum += r.mean_iou;
    for (const auto& o : r.per_object) {
      object_iou_sum += o.iou;
      ++objects;
      if (o.cosine) {
        cosine_sum += *o.cosine;
        ++cosine_objects;
      }
      for (std::size_t p = 0; p < o.similarity.size(); ++p) {
        heat += r.image_id + "," + o.tag + "," + std::to_string(p) + "," + num(o.similarity[p]) + "\n";
      }
    }
    nonpositive = nonpositive || r.nonpositive_threshold;
    per_record.push_back(to_json(r));
  }
  if (evaluated == 0) throw Error(Errc::NoEvaluableObjects, "no record has an evaluable object");

  ojson report;
  report["manifest"] = m.to_json();
  ojson agg;
  agg["mean_iou"] = record_iou_sum / static_cast<double>(evaluated);
  agg["object_mean_iou"] = object_iou_sum / static_cast<double>(objects);
  agg["mean_cosine"] = cosine_objects ? cosine_sum / static_cast<double>(cosine_objects) : 0.0;
  agg["records"] = records.size();
  agg["evaluated_records"] = evaluated;
  agg["objects"] = objects;
  agg["threshold"] = options.strategy.to_string();
  agg["nonpositive_threshold"] = nonpositive;
  report["aggregate"] = std::move(agg);
  report["records"] = std::move(per_record);
  report["skipped_records"] = std::move(skipped_records);
  write_json(a.out, report);
  if (!a.heat_csv.empty()) write_file(a.heat_csv, heat);
  return 0;
}

// ---------------------------------------------------------------- tokenmap

struct TokenmapArgs {
  std::string embeddings, vocab_emb, vocab_tok, wordlist, projector, grid, out, cosine_csv;
  std::size_t k = 5;
  bool distinct = false;
  bool absolute = false;
};

int cmd_tokenmap(const TokenmapArgs& a) {
  DenseMatrix v = load_matrix(a.embeddings);
  const auto projector = maybe_projector(a.projector);
  if (projector) v = project(*projector, v);
  const VocabTable vocab = load_vocab(a.vocab_emb, a.vocab_tok);
  std::unordered_set<std::string> words;
  if (!a.wordlist.empty()) {
    for (auto& w : parse_token_lines(read_file(a.wordlist))) {
      if (!w.empty()) words.insert(display_token(w));
    }
  }
  std::optional<PatchGrid> grid;
  if (!a.grid.empty()) {
    grid = PatchGrid::parse(a.grid);
    if (grid->size() != v.rows()) throw Error(Errc::DimensionMismatch, "grid does not match the number of patches");
  }
  const PursuitOptions options{a.k, a.distinct, a.absolute};
  const TokenMap map = tokenmap(v, vocab, options, words);

  RunManifest m = make_manifest("tokenmap");
  m.flags = {{"embeddings", a.embeddings}, {"vocab-emb", a.vocab_emb}, {"vocab-tok", a.vocab_tok},
             {"k", std::to_string(a.k)},   {"wordlist", a.wordlist},   {"distinct", a.distinct ? "true" : "false"},
             {"absolute", a.absolute ? "true" : "false"}, {"grid", a.grid}, {"projector", a.projector}};
  m.input_digests["embeddings"] = content_digest(a.embeddings);
  m.input_digests["vocab-emb"] = content_digest(a.vocab_emb);
  m.input_digests["vocab-tok"] = content_digest(a.vocab_tok);
  if (!a.wordlist.empty()) m.input_digests["wordlist"] = content_digest(a.wordlist);
  if (projector) m.input_digests["projector"] = content_digest(a.projector);

  ojson report;
  report["manifest"] = m.to_json();
  report["k"] = a.k;
  report["patches"] = v.rows();
  if (grid) {
    report["grid"] = {{"grid_h", grid->grid_h}, {"grid_w", grid->grid_w}, {"patch_px", grid->patch_px}};
  }
  report["tokenmap"] = to_json(map, vocab);
  write_json(a.out, report);
  if (!a.cosine_csv.empty()) write_file(a.cosine_csv, cosine_maps_csv(map, vocab));
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string dataset, vocab_emb, vocab_tok, out, kind = "mlp2";
  std::size_t hidden = 0, steps = 500, batch_size = 8;
  double lr = 1e-3, weight_decay = 0.0, warmup = 0.0, beta_start = 0.0, beta_end = 5.0;
  std::uint64_t seed = 0;
};

int cmd_train(const TrainArgs& a) {
  TrainConfig c;
  c.steps = a.steps;
  c.lr = a.lr;
  c.weight_decay = a.weight_decay;
  c.warmup = a.warmup;
  c.beta = {a.beta_start, a.beta_end};
  c.batch_size = a.batch_size;
  c.seed = a.seed;
  c.kind = parse_projector_kind(a.kind);
  c.hidden = a.hidden;
  if (c.steps == 0) throw Error(Errc::InvalidArgument, "steps must be >= 1");

  const auto dataset = load_train_dataset(a.dataset);
  const VocabTable vocab = load_vocab(a.vocab_emb, a.vocab_tok);

  RunManifest m = make_manifest("train", a.seed);
  m.flags = {{"dataset", a.dataset},   {"vocab-emb", a.vocab_emb},        {"vocab-tok", a.vocab_tok},
             {"projector-kind", a.kind}, {"hidden", std::to_string(a.hidden)}, {"steps", std::to_string(a.steps)},
             {"lr", num(a.lr)},          {"weight-decay", num(a.weight_decay)}, {"warmup", num(a.warmup)},
             {"beta-start", num(a.beta_start)}, {"beta-end", num(a.beta_end)}, {"batch-size", std::to_string(a.batch_size)}};
  m.input_digests["dataset"] = content_digest(a.dataset);
  m.input_digests["vocab-emb"] = content_digest(a.vocab_emb);
  m.input_digests["vocab-tok"] = content_digest(a.vocab_tok);

  const fs::path out(a.out);
  fs::create_directories(out);
  TrainResult result;
  try {
    result = train_projector(c, dataset, vocab);
  } catch (const DivergenceError& e) {
    save_checkpoint(e.last_good(), {e.history().size(), a.seed}, out / "last_good");
    write_file(out / "history.csv", history_csv(e.history()));
    throw;
  }
  save_checkpoint(result.initial, {0, a.seed}, out / "init");
  save_checkpoint(result.params, {c.steps, a.seed}, out / "final");
  write_file(out / "history.csv", history_csv(result.history));

  ojson report;
  report["manifest"] = m.to_json();
  report["initial_mean_cosine"] = dataset_mean_cosine(result.initial, dataset, vocab);
  report["final_mean_cosine"] = dataset_mean_cosine(result.params, dataset, vocab);
  report["final_loss"] = result.history.back().loss;
  report["final_l_patch"] = result.history.back().l_patch;
  report["samples"] = dataset.size();
  write_json(out / "report.json", report);
  return 0;
}

// ---------------------------------------------------------------- pad

int cmd_pad(const std::string& mode, const std::string& pad, const std::string& out_path, std::ostream& out) {
  const auto validation = validate_pad(read_file(pad));
  RunManifest m = make_manifest("pad " + mode);
  m.flags = {{"pad", pad}};
  m.input_digests["pad"] = content_digest(pad);
  ojson report;
  report["manifest"] = m.to_json();
  if (mode == "stats") {
    const auto stats = pad_stats(validation.records);
    report["records"] = stats.records;
    report["regions"] = stats.regions;
    report["unique_tags"] = stats.unique_tags;
    report["masked_regions"] = stats.masked_regions;
  } else {
    report["records"] = validation.total;
    report["valid_records"] = validation.records.size();
  }
  ojson issues = ojson::array();
  for (const auto& i : validation.issues) {
    issues.push_back({{"index", i.index}, {"image_id", i.image_id}, {"error", i.code}, {"message", i.message}});
  }
  report["invalid_records"] = std::move(issues);
  if (out_path.empty()) {
    out << report.dump(2) << '\n';
  } else {
    write_json(out_path, report);
  }
  if (!validation.issues.empty()) {
    throw Error(Errc::ParseError, std::to_string(validation.issues.size()) + " of " + std::to_string(validation.total) +
                                      " records failed validation");
  }
  return 0;
}

// ---------------------------------------------------------------- synth

int cmd_synth(const SynthConfig& c, const std::string& out_dir) {
  const SynthData data = synth_dataset(c);
  const fs::path out(out_dir);
  fs::create_directories(out);
  save_vocab(data.vocab, out / "vocab_emb.npy", out / "vocab_tok.txt");
  save_train_dataset(data.dataset, out);
  write_file(out / "pad.json", emit_pad(data.records));
  save_checkpoint(data.truth, {0, c.seed}, out / "truth");

  RunManifest m = make_manifest("synth", c.seed);
  m.flags = {{"images", std::to_string(c.n_images)}, {"patches", std::to_string(c.patches)},
             {"dim", std::to_string(c.dim)},         {"out-dim", std::to_string(c.out_dim)},
             {"vocab", std::to_string(c.vocab_size)}, {"sparsity", std::to_string(c.sparsity)},
             {"noise", num(c.noise_sigma)},           {"classes", std::to_string(c.classes)},
             {"max-objects", std::to_string(c.max_objects)}, {"nuisance", num(c.nuisance_sigma)},
             {"patch-px", std::to_string(c.patch_px)}};
  ojson meta;
  meta["manifest"] = m.to_json();
  meta["grid"] = data.grid.to_string();
  ojson classes = ojson::array();
  for (const auto& cls : data.classes) classes.push_back({{"label", cls.label}, {"token_ids", cls.token_ids}});
  meta["classes"] = std::move(classes);
  meta["planted"] = data.planted;
  meta["truth_patch_loss"] = [&] {
    double s = 0.0;
    for (const auto& sample : data.dataset) s += patch_loss(project(data.truth, sample.patches.values), sample.objects, data.vocab);
    return s / static_cast<double>(data.dataset.size());
  }();
  write_json(out / "synth.json", meta);
  return 0;
}

// ---------------------------------------------------------------- dataset

struct DatasetArgs {
  std::string pad, embeddings, out;
  TextArgs text;
};

int cmd_dataset(const DatasetArgs& a) {
  const PatchGrid grid = PatchGrid::parse(a.text.grid);
  std::optional<TokenOverrides> overrides;
  const AlignOptions options = align_options(a.text, overrides);
  const auto records = parse_pad(read_file(a.pad));
  const VocabTable vocab = load_vocab(a.text.vocab_emb, a.text.vocab_tok);
  const EmbeddingSource source(a.embeddings, records.size(), grid.size());
  std::size_t index = 0;
  auto report = dataset_from_pad(
      records,
      [&](const PadRecord& r) {
        while (index < records.size() && records[index].image_id != r.image_id) ++index;
        return source.get(index, r);
      },
      vocab, grid, options);
  save_train_dataset(report.samples, a.out);

  RunManifest m = make_manifest("dataset");
  text_flags(m, a.text);
  m.flags["pad"] = a.pad;
  m.flags["embeddings"] = a.embeddings;
  m.input_digests["pad"] = content_digest(a.pad);
  m.input_digests["embeddings"] = content_digest(a.embeddings);
  ojson j;
  j["manifest"] = m.to_json();
  j["samples"] = report.samples.size();
  j["skipped"] = report.skipped;
  write_json(fs::path(a.out) / "build_report.json", j);
  return 0;
}

void add_text_options(CLI::App* sub, TextArgs& t) {
  sub->add_option("--vocab-emb", t.vocab_emb, "NPY of LLM word embeddings (M x d')")->required();
  sub->add_option("--vocab-tok", t.vocab_tok, "token strings, one per line")->required();
  sub->add_option("--grid", t.grid, "patch grid HxWxPX")->capture_default_str();
  sub->add_option("--threshold", t.threshold, "mean_std:A | quantile:Q | fixed:C")->capture_default_str();
  sub->add_option("--resize", t.resize, "mask to grid: squash | pad")->capture_default_str();
  sub->add_option("--min-frac", t.min_frac, "patch coverage fraction for ground-truth patches")->capture_default_str();
  sub->add_option("--token-overrides", t.overrides, "JSON {label: [token ids]}");
  sub->add_flag("--case-sensitive", t.case_sensitive, "do not lowercase labels or vocab");
  sub->add_flag("--space-prefix", t.space_prefix, "prefix words with the SentencePiece marker");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  configure_threads_from_env();
  CLI::App app{"projlens: projector compression and patch-alignment analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", PROJLENS_VERSION);

  EntropyArgs entropy;
  auto* e = app.add_subcommand("entropy", "Von Neumann entropy of embedding sets");
  e->add_option("--before", entropy.before, "NPY of pre-projector embeddings (rows are vectors)")->required();
  e->add_option("--after", entropy.after, "NPY of post-projector embeddings");
  e->add_option("--out", entropy.out, "report JSON")->required();
  e->add_option("--max-eigenvalues", entropy.max_eigenvalues, "truncate the emitted spectrum (0 = all)");
  e->add_option("--route", entropy.route, "auto | covariance | gram | svd")->capture_default_str();

  AlignArgs align;
  auto* al = app.add_subcommand("align", "patch-level localisation IoU against PAD masks");
  al->add_option("--embeddings", align.embeddings, "directory of <image>.npy or one stacked NPY")->required();
  al->add_option("--pad", align.pad, "PAD JSON")->required();
  al->add_option("--projector", align.projector, "checkpoint applied to the embeddings first");
  al->add_option("--heat-csv", align.heat_csv, "per-label similarity values");
  al->add_option("--out", align.out, "report JSON")->required();
  add_text_options(al, align.text);

  TokenmapArgs tm;
  auto* t = app.add_subcommand("tokenmap", "matching-pursuit token map of patch embeddings");
  t->add_option("--embeddings", tm.embeddings, "NPY of S x d' patch embeddings")->required();
  t->add_option("--vocab-emb", tm.vocab_emb)->required();
  t->add_option("--vocab-tok", tm.vocab_tok)->required();
  t->add_option("--k", tm.k, "pursuit iterations")->capture_default_str();
  t->add_option("--wordlist", tm.wordlist, "recognised words, one per line");
  t->add_option("--grid", tm.grid, "patch grid HxWxPX for rendering");
  t->add_option("--projector", tm.projector, "checkpoint applied to the embeddings first");
  t->add_option("--cosine-csv", tm.cosine_csv, "per-iteration cosine maps");
  t->add_flag("--distinct", tm.distinct, "never reselect an atom");
  t->add_flag("--absolute", tm.absolute, "select by |<w, v>|");
  t->add_option("--out", tm.out, "token map JSON")->required();

  TrainArgs tr;
  auto* trn = app.add_subcommand("train", "patch-aligned projector training");
  trn->add_option("--dataset", tr.dataset, "dataset directory (manifest.json + embeddings/)")->required();
  trn->add_option("--vocab-emb", tr.vocab_emb)->required();
  trn->add_option("--vocab-tok", tr.vocab_tok)->required();
  trn->add_option("--projector-kind", tr.kind, "linear | mlp2")->capture_default_str();
  trn->add_option("--hidden", tr.hidden, "mlp2 hidden width (0 = output width)");
  trn->add_option("--steps", tr.steps)->capture_default_str();
  trn->add_option("--lr", tr.lr)->capture_default_str();
  trn->add_option("--weight-decay", tr.weight_decay)->capture_default_str();
  trn->add_option("--warmup", tr.warmup, "warmup fraction of steps")->capture_default_str();
  trn->add_option("--beta-start", tr.beta_start)->capture_default_str();
  trn->add_option("--beta-end", tr.beta_end)->capture_default_str();
  trn->add_option("--batch-size", tr.batch_size)->capture_default_str();
  trn->add_option("--seed", tr.seed)->capture_default_str();
  trn->add_option("--out", tr.out, "output directory")->required();

  std::string pad_path, pad_out;
  auto* pad = app.add_subcommand("pad", "PAD file diagnostics");
  pad->require_subcommand(1);
  auto* pv = pad->add_subcommand("validate", "check every record");
  auto* ps = pad->add_subcommand("stats", "record, region and tag counts");
  for (auto* sub : {pv, ps}) {
    sub->add_option("--pad", pad_path, "PAD JSON")->required();
    sub->add_option("--out", pad_out, "report JSON (stdout when omitted)");
  }

  SynthConfig sc;
  std::string synth_out;
  auto* sy = app.add_subcommand("synth", "synthetic embeddings, vocab and PAD records with known ground truth");
  sy->add_option("--seed", sc.seed)->capture_default_str();
  sy->add_option("--images", sc.n_images)->capture_default_str();
  sy->add_option("--patches", sc.patches)->capture_default_str();
  sy->add_option("--dim", sc.dim)->capture_default_str();
  sy->add_option("--out-dim", sc.out_dim)->capture_default_str();
  sy->add_option("--vocab", sc.vocab_size)->capture_default_str();
  sy->add_option("--sparsity", sc.sparsity)->capture_default_str();
  sy->add_option("--noise", sc.noise_sigma)->capture_default_str();
  sy->add_option("--classes", sc.classes)->capture_default_str();
  sy->add_option("--max-objects", sc.max_objects)->capture_default_str();
  sy->add_option("--nuisance", sc.nuisance_sigma)->capture_default_str();
  sy->add_option("--patch-px", sc.patch_px)->capture_default_str();
  sy->add_option("--out", synth_out, "output directory")->required();

  DatasetArgs ds;
  auto* dsc = app.add_subcommand("dataset", "build a training dataset from PAD records and patch embeddings");
  dsc->add_option("--pad", ds.pad)->required();
  dsc->add_option("--embeddings", ds.embeddings, "directory of <image>.npy or one stacked NPY")->required();
  dsc->add_option("--out", ds.out, "dataset directory")->required();
  add_text_options(dsc, ds.text);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& h) {
    return app.exit(h, out, err);
  } catch (const CLI::CallForAllHelp& h) {
    return app.exit(h, out, err);
  } catch (const CLI::CallForVersion& h) {
    return app.exit(h, out, err);
  } catch (const CLI::ParseError& p) {
    emit_error(err, "Usage", p.what());
    return p.get_exit_code() ? p.get_exit_code() : 2;
  }

  try {
    if (*e) return cmd_entropy(entropy);
    if (*al) return cmd_align(align);
    if (*t) return cmd_tokenmap(tm);
    if (*trn) return cmd_train(tr);
    if (*pad) return cmd_pad(*pv ? "validate" : "stats", pad_path, pad_out, out);
    if (*sy) return cmd_synth(sc, synth_out);
    if (*dsc) return cmd_dataset(ds);
  } catch (const Error& ex) {
    emit_error(err, errc_name(ex.code()), ex.what());
    return 1;
  } catch (const std::exception& ex) {
    emit_error(err, "Internal", ex.what());
    return 1;
  }
  return 0;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"projlens"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace projlens
