#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "imgeval/analysis.hpp"
#include "imgeval/distdist.hpp"
#include "imgeval/error.hpp"
#include "imgeval/features.hpp"
#include "imgeval/fileio.hpp"
#include "imgeval/fullref.hpp"
#include "imgeval/image.hpp"
#include "imgeval/preprocess.hpp"
#include "imgeval/report.hpp"

namespace imgeval::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Raised for user-facing failures that are not library errors
/// (missing inputs, unmatched pairs, ...). Maps to exit code 1.
class UsageError : public Error {
 public:
  using Error::Error;
};

std::vector<fs::path> list_pngs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw UsageError("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::optional<fs::path> sidecar_for(const fs::path& png) {
  auto side = png;
  side.replace_extension(".json");
  if (fs::exists(side)) return side;
  return std::nullopt;
}

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

/// Config echo: every effective option of the subcommand.
void write_config_echo(const fs::path& out_dir, const CLI::App& sub) {
  json options = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_name() == "--help" || opt->get_name().empty()) continue;
    std::string key = opt->get_name();
    key.erase(0, key.find_first_not_of('-'));
    const auto results = opt->results();
    if (opt->get_type_size() == 0) {
      options[key] = opt->count() > 0;
    } else if (results.empty()) {
      options[key] = opt->get_default_str();
    } else if (results.size() == 1) {
      options[key] = results.front();
    } else {
      options[key] = results;
    }
  }
  write_json(out_dir / "config.json", {{"command", sub.get_name()}, {"options", options}});
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// ---------------------------------------------------------------- preprocess

struct PreprocessArgs {
  std::string input;
  std::string out;
  PipelineConfig cfg;
  bool no_segment = false;
  int bit_depth = 16;
};

int cmd_preprocess(const PreprocessArgs& a, const CLI::App& sub, std::ostream& out) {
  PipelineConfig cfg = a.cfg;
  cfg.segment = !a.no_segment;
  cfg.validate();
  if (a.bit_depth != 8 && a.bit_depth != 16) throw ConfigError("--bit-depth must be 8 or 16");

  const auto files = list_pngs(a.input);
  if (files.empty()) throw UsageError("no input images in '" + a.input + "'");

  std::vector<Patch> all;
  for (const auto& f : files) {
    try {
      const Image img = read_image(f, sidecar_for(f));
      auto patches = run_pipeline(img, cfg);
      all.insert(all.end(), std::make_move_iterator(patches.begin()),
                 std::make_move_iterator(patches.end()));
    } catch (const Error& e) {
      throw UsageError("failed on '" + f.string() + "': " + e.what());
    }
  }
  fs::create_directories(a.out);
  write_patch_set(all, cfg, a.out, a.bit_depth);
  write_config_echo(a.out, sub);
  out << "wrote " << all.size() << " patches from " << files.size() << " images to " << a.out << "\n";
  return kExitOk;
}

// -------------------------------------------------------------- eval-fullref

struct FullrefArgs {
  std::string source;
  std::string adapted;
  std::string out;
  std::string metrics = "mse,psnr,ssim";
  std::string pairs;
  bool allow_partial = false;
  std::string dists_source;
  std::string dists_adapted;
  double data_range = 1.0;
};

struct PairSpec {
  std::string pair_id;
  fs::path source;
  fs::path adapted;
};

std::vector<PairSpec> pairs_from_csv(const FullrefArgs& a) {
  std::istringstream in(read_file(a.pairs));
  std::string line;
  std::vector<PairSpec> pairs;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cells = split_list(line);
    if (header) {
      header = false;
      if (!cells.empty() && cells[0] == "source") continue;
    }
    if (cells.size() < 2) throw UsageError("pairs CSV line '" + line + "' needs source,adapted");
    PairSpec p;
    p.source = fs::path(a.source) / cells[0];
    p.adapted = fs::path(a.adapted) / cells[1];
    p.pair_id = cells.size() > 2 ? cells[2] : fs::path(cells[0]).filename().string();
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<PairSpec> pairs_by_filename(const FullrefArgs& a, std::ostream& err) {
  const auto src = list_pngs(a.source);
  const auto adp = list_pngs(a.adapted);
  std::set<std::string> src_names, adp_names;
  for (const auto& p : src) src_names.insert(p.filename().string());
  for (const auto& p : adp) adp_names.insert(p.filename().string());

  std::vector<std::string> unmatched;
  for (const auto& n : src_names) {
    if (!adp_names.count(n)) unmatched.push_back(a.source + "/" + n);
  }
  for (const auto& n : adp_names) {
    if (!src_names.count(n)) unmatched.push_back(a.adapted + "/" + n);
  }
  if (!unmatched.empty()) {
    for (const auto& u : unmatched) err << "unmatched: " << u << "\n";
    if (!a.allow_partial) {
      throw UsageError(std::to_string(unmatched.size()) +
                       " unmatched file(s); pass --allow-partial to evaluate the matched pairs only");
    }
  }
  std::vector<PairSpec> pairs;
  for (const auto& n : src_names) {
    if (adp_names.count(n)) {
      pairs.push_back({n, fs::path(a.source) / n, fs::path(a.adapted) / n});
    }
  }
  return pairs;
}

int cmd_eval_fullref(const FullrefArgs& a, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  static const std::set<std::string> known{"mse", "psnr", "ssim", "cwssim", "fsim", "dists"};
  const auto metrics = split_list(a.metrics);
  if (metrics.empty()) throw UsageError("--metrics is empty");
  for (const auto& m : metrics) {
    if (!known.count(m)) throw UsageError("unknown metric '" + m + "'");
  }
  const bool want_dists = std::find(metrics.begin(), metrics.end(), "dists") != metrics.end();
  if (want_dists && (a.dists_source.empty() || a.dists_adapted.empty())) {
    throw UsageError(
        "dists needs multi-layer activations for both directories: export them with the "
        "extractor (extract --model vgg-multilayer) and pass --dists-source/--dists-adapted");
  }

  const auto pairs = a.pairs.empty() ? pairs_by_filename(a, err) : pairs_from_csv(a);
  if (pairs.empty()) throw UsageError("no image pairs to evaluate");

  std::optional<MultiLayerActivations> dists_src, dists_adp;
  if (want_dists) {
    dists_src = load_multilayer(a.dists_source);
    dists_adp = load_multilayer(a.dists_adapted);
  }

  const SsimParams ssim_p{.data_range = a.data_range};
  const CwSsimParams cw_p;
  const FsimParams fsim_p;

  MetricReport report;
  report.metrics = metrics;
  json params = json::object();
  for (const auto& m : metrics) {
    if (m == "ssim") params["ssim"] = to_json(ssim_p);
    if (m == "cwssim") params["cwssim"] = to_json(cw_p);
    if (m == "fsim") params["fsim"] = to_json(fsim_p);
    if (m == "psnr") params["psnr"] = {{"data_range", a.data_range}};
    if (m == "dists") {
      params["dists"] = {{"c1", kDistsC1},
                         {"c2", kDistsC2},
                         {"moments", "population"},
                         {"extractor_id", dists_src->extractor_id}};
    }
  }
  report.params = params;
  report.provenance = {{"source", a.source}, {"adapted", a.adapted}};

  for (const auto& p : pairs) {
    const Image src = read_image(p.source);
    const Image adp = read_image(p.adapted);
    std::vector<double> values;
    for (const auto& m : metrics) {
      if (m == "mse") values.push_back(mse(src, adp));
      else if (m == "psnr") values.push_back(psnr(src, adp, a.data_range));
      else if (m == "ssim") values.push_back(ssim(src, adp, ssim_p));
      else if (m == "cwssim") values.push_back(cw_ssim(src, adp, cw_p));
      else if (m == "fsim") values.push_back(fsim(src, adp, fsim_p));
      else {
        const std::string sname = p.source.filename().string();
        const std::string aname = p.adapted.filename().string();
        values.push_back(dists(*dists_src, dists_src->index_of(sname), *dists_adp,
                               dists_adp->index_of(aname)));
      }
    }
    report.add_row(p.pair_id, std::move(values));
  }

  fs::create_directories(a.out);
  write_file_atomic(fs::path(a.out) / "report.csv", report_to_csv(report));
  write_json(fs::path(a.out) / "report.json", report_to_json(report));
  write_config_echo(a.out, sub);
  out << "evaluated " << report.rows.size() << " pairs\n";
  return kExitOk;
}

// ----------------------------------------------------------------- eval-dist

struct DistArgs {
  std::string adapted;
  std::string target;
  std::string source;
  std::string out;
  std::string metric = "fid,kid";
  std::size_t subsets = 50;
  std::size_t subset_size = 100;
  std::uint64_t seed = 0;
  std::string precision = "f64";
  std::size_t workers = 1;
};

json kid_json(const KidResult& r) {
  return {{"mean", r.mean},
          {"std", r.std},
          {"std_degenerate", r.std_degenerate},
          {"per_subset", r.per_subset}};
}

int cmd_eval_dist(const DistArgs& a, const CLI::App& sub, std::ostream& out) {
  const Precision prec = parse_precision(a.precision);
  const auto metrics = split_list(a.metric);
  bool want_fid = false, want_kid = false;
  for (const auto& m : metrics) {
    if (m == "fid") want_fid = true;
    else if (m == "kid") want_kid = true;
    else throw UsageError("unknown distribution metric '" + m + "'");
  }
  if (!want_fid && !want_kid) throw UsageError("--metric is empty");

  KidConfig kid_cfg;
  kid_cfg.subsets = a.subsets;
  kid_cfg.subset_size = a.subset_size;
  kid_cfg.seed = a.seed;
  kid_cfg.workers = a.workers;
  if (want_kid) kid_cfg.validate();

  const ActivationSet adapted = load_activations(a.adapted);
  const ActivationSet target = load_activations(a.target);
  std::optional<ActivationSet> source;
  if (!a.source.empty()) source = load_activations(a.source);
  for (const ActivationSet* s : {&adapted, &target}) {
    if (s->d() != adapted.d()) throw DimensionError("activation dimensions differ");
  }
  if (source && source->d() != adapted.d()) throw DimensionError("activation dimensions differ");

  using Clock = std::chrono::steady_clock;
  auto seconds_since = [](Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
  };

  json results = {{"precision", to_string(prec)},
                  {"inputs", {{"adapted", a.adapted}, {"target", a.target}, {"source", a.source}}},
                  {"n", {{"adapted", adapted.n()}, {"target", target.n()}}},
                  {"d", adapted.d()}};
  json timing = {{"precision", to_string(prec)}};

  if (want_fid) {
    auto t0 = Clock::now();
    const double adapted_fid = fid(adapted, target, prec);
    timing["fid_adapted_seconds"] = seconds_since(t0);
    json jf = {{"adapted", adapted_fid}};
    if (source) {
      t0 = Clock::now();
      const double base = fid(*source, target, prec);
      timing["fid_baseline_seconds"] = seconds_since(t0);
      jf["baseline"] = base;
      jf["improved"] = adapted_fid < base;
    }
    results["fid"] = jf;
  }
  if (want_kid) {
    auto t0 = Clock::now();
    const KidResult adapted_kid = kid_subsampled(adapted, target, kid_cfg);
    timing["kid_adapted_seconds"] = seconds_since(t0);
    json jk = {{"config",
                {{"subsets", kid_cfg.subsets},
                 {"subset_size", kid_cfg.subset_size},
                 {"seed", kid_cfg.seed},
                 {"sampling", "without replacement within a round; sets sampled independently"}}},
               {"adapted", kid_json(adapted_kid)}};
    if (source) {
      t0 = Clock::now();
      const KidResult base = kid_subsampled(*source, target, kid_cfg);
      timing["kid_baseline_seconds"] = seconds_since(t0);
      jk["baseline"] = kid_json(base);
      jk["improved"] = adapted_kid.mean < base.mean;
    }
    results["kid"] = jk;
  }
  results["timing_file"] = "timing.json";

  fs::create_directories(a.out);
  write_json(fs::path(a.out) / "results.json", results);
  write_json(fs::path(a.out) / "timing.json", timing);
  write_config_echo(a.out, sub);
  out << results.dump(2) << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------ register

struct RegisterArgs {
  std::string moving;
  std::string fixed;
  std::string out;
  int max_shift = 10;
  std::size_t crop = 5;
  int bit_depth = 16;
};

int cmd_register(const RegisterArgs& a, const CLI::App& sub, std::ostream& out) {
  if (a.max_shift < 1) throw ConfigError("--max-shift must be >= 1");
  const auto moving = list_pngs(a.moving);
  if (moving.empty()) throw UsageError("no input images in '" + a.moving + "'");
  const fs::path out_dir(a.out);
  fs::create_directories(out_dir / "registered");
  if (a.crop > 0) fs::create_directories(out_dir / "fixed_cropped");

  json entries = json::array();
  for (const auto& m : moving) {
    const fs::path f = fs::path(a.fixed) / m.filename();
    if (!fs::exists(f)) throw UsageError("no fixed image for '" + m.string() + "'");
    const Image mov = read_image(m);
    const Image fix = read_image(f);
    const Registration reg = register_translation(mov, fix, a.max_shift);
    Image result = reg.registered;
    if (a.crop > 0) {
      result = crop_border(result, a.crop);
      write_image(crop_border(fix, a.crop), out_dir / "fixed_cropped" / m.filename(), a.bit_depth);
    }
    write_image(result, out_dir / "registered" / m.filename(), a.bit_depth);
    entries.push_back({{"file", m.filename().string()},
                       {"dx", reg.shift.dx},
                       {"dy", reg.shift.dy},
                       {"peak", reg.peak}});
  }
  write_json(out_dir / "shifts.json",
             {{"max_shift", a.max_shift}, {"crop", a.crop}, {"mode", "integer phase correlation"},
              {"pairs", entries}});
  write_config_echo(out_dir, sub);
  out << "registered " << entries.size() << " images\n";
  return kExitOk;
}

// ----------------------------------------------------------------- correlate

struct CorrelateArgs {
  std::string report;
  std::string out;
  std::string scatter;
};

int cmd_correlate(const CorrelateArgs& a, const CLI::App& sub, std::ostream& out) {
  const MetricReport report = load_report(a.report);
  const CorrelationMatrix cm = correlation_matrix(report);
  const fs::path out_dir(a.out);
  fs::create_directories(out_dir);
  write_file_atomic(out_dir / "correlation.csv", correlation_to_csv(cm));

  json dropped = json::object();
  for (std::size_t i = 0; i < cm.metrics.size(); ++i) {
    for (std::size_t j = i + 1; j < cm.metrics.size(); ++j) {
      dropped[cm.metrics[i] + "~" + cm.metrics[j]] = cm.dropped[i * cm.metrics.size() + j];
    }
  }
  json matrix = json::array();
  for (std::size_t i = 0; i < cm.metrics.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < cm.metrics.size(); ++j) row.push_back(cm.at(i, j));
    matrix.push_back(row);
  }
  write_json(out_dir / "correlation.json", {{"method", "spearman, average ranks"},
                                            {"metrics", cm.metrics},
                                            {"matrix", matrix},
                                            {"rows", report.rows.size()},
                                            {"dropped_nonfinite", dropped}});
  if (!a.scatter.empty()) {
    const auto names = split_list(a.scatter);
    if (names.size() != 2) throw UsageError("--scatter takes exactly two metric names");
    scatter_export(report, names[0], names[1], out_dir / "scatter.csv");
  }
  write_config_echo(out_dir, sub);
  out << correlation_to_csv(cm);
  return kExitOk;
}

// ------------------------------------------------------------------- distort

struct DistortArgs {
  std::string input;
  std::string out;
  std::string kind;
  int dx = 0;
  int dy = 0;
  double sigma = 1.0;
  double gamma = 1.0;
  int bit_depth = 16;
};

int cmd_distort(const DistortArgs& a, const CLI::App& sub, std::ostream& out) {
  DistortionKind kind;
  if (a.kind == "shift") kind = DistortionKind::Shift;
  else if (a.kind == "blur") kind = DistortionKind::Blur;
  else if (a.kind == "contrast") kind = DistortionKind::Contrast;
  else throw UsageError("--kind must be shift, blur or contrast");
  DistortionParams params{{a.dx, a.dy}, a.sigma, a.gamma};
  if (kind == DistortionKind::Blur && !(a.sigma > 0.0)) throw ConfigError("--sigma must be positive");
  if (kind == DistortionKind::Contrast && !(a.gamma > 0.0)) throw ConfigError("--gamma must be positive");

  const auto files = list_pngs(a.input);
  if (files.empty()) throw UsageError("no input images in '" + a.input + "'");
  const fs::path out_dir(a.out);
  fs::create_directories(out_dir);
  json names = json::array();
  for (const auto& f : files) {
    const Image img = read_image(f);
    write_image(distort(img, kind, params), out_dir / f.filename(), a.bit_depth);
    names.push_back(f.filename().string());
  }
  json jp = {{"kind", a.kind}};
  if (kind == DistortionKind::Shift) jp.update({{"dx", a.dx}, {"dy", a.dy}, {"fill", 0}});
  if (kind == DistortionKind::Blur) jp.update({{"sigma", a.sigma}, {"border", "reflect"}});
  if (kind == DistortionKind::Contrast) jp.update({{"gamma", a.gamma}, {"renormalised", true}});
  write_json(out_dir / "manifest.json", {{"params", jp}, {"images", names}});
  write_config_echo(out_dir, sub);
  out << "distorted " << files.size() << " images\n";
  return kExitOk;
}

// --------------------------------------------------------------- extract-toy

struct ToyArgs {
  std::string input;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t dim = 64;
};

int cmd_extract_toy(const ToyArgs& a, const CLI::App& sub, std::ostream& out) {
  const auto files = list_pngs(a.input);
  if (files.empty()) throw UsageError("no input images in '" + a.input + "'");
  std::vector<Image> images;
  json names = json::array();
  for (const auto& f : files) {
    images.push_back(read_image(f));
    names.push_back(f.filename().string());
  }
  const ActivationSet acts = toy_extract(images, a.seed, a.dim);
  const fs::path out_dir(a.out);
  fs::create_directories(out_dir);
  write_activations(acts, out_dir / "activations.npy");
  write_json(out_dir / "manifest.json", {{"extractor_id", acts.extractor_id()},
                                         {"n", acts.n()},
                                         {"d", acts.d()},
                                         {"seed", a.seed},
                                         {"images", names}});
  write_config_echo(out_dir, sub);
  out << "extracted " << acts.n() << "x" << acts.d() << " activations\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evaluation toolkit for unpaired image-to-image translation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "imgeval 0.1.0");

  PreprocessArgs pre;
  auto* sp = app.add_subcommand("preprocess", "Segment, normalise, pad and patch mammograms");
  sp->add_option("--input", pre.input, "Directory of PNG images (+ optional <stem>.json sidecars)")->required();
  sp->add_option("--out", pre.out, "Output patch directory")->required();
  sp->add_option("--patch-size", pre.cfg.patch_size, "Patch side in pixels")->capture_default_str();
  sp->add_option("--step", pre.cfg.step, "Sliding-window step")->capture_default_str();
  sp->add_option("--nonzero-frac", pre.cfg.nonzero_frac, "Minimum fraction of non-zero pixels")->capture_default_str();
  sp->add_option("--canvas", pre.cfg.canvas, "Padded canvas side")->capture_default_str();
  sp->add_flag("--no-segment", pre.no_segment, "Skip Otsu background segmentation");
  sp->add_option("--bit-depth", pre.bit_depth, "Output PNG bit depth (8 or 16)")->capture_default_str();

  FullrefArgs fr;
  auto* sf = app.add_subcommand("eval-fullref", "Full-reference content-preservation metrics");
  sf->add_option("--source", fr.source, "Directory of source images")->required();
  sf->add_option("--adapted", fr.adapted, "Directory of adapted images")->required();
  sf->add_option("--out", fr.out, "Output directory")->required();
  sf->add_option("--metrics", fr.metrics, "Comma list of mse,psnr,ssim,cwssim,fsim,dists")->capture_default_str();
  sf->add_option("--pairs", fr.pairs, "CSV of source,adapted[,pair_id] overriding filename pairing");
  sf->add_flag("--allow-partial", fr.allow_partial, "Evaluate matched pairs when some files are unmatched");
  sf->add_option("--dists-source", fr.dists_source, "Multi-layer activation directory for the source images");
  sf->add_option("--dists-adapted", fr.dists_adapted, "Multi-layer activation directory for the adapted images");
  sf->add_option("--data-range", fr.data_range, "Intensity range for PSNR/SSIM")->capture_default_str();

  DistArgs di;
  auto* sd = app.add_subcommand("eval-dist", "FID / KID between activation sets");
  sd->add_option("--adapted-acts", di.adapted, "NPY (n, d) activations of adapted images")->required();
  sd->add_option("--target-acts", di.target, "NPY (n, d) activations of target images")->required();
  sd->add_option("--source-acts", di.source, "NPY activations of unadapted source images (baseline)");
  sd->add_option("--out", di.out, "Output directory")->required();
  sd->add_option("--metric", di.metric, "Comma list of fid,kid")->capture_default_str();
  sd->add_option("--subsets", di.subsets, "KID rounds")->capture_default_str();
  sd->add_option("--subset-size", di.subset_size, "KID rows per round")->capture_default_str();
  sd->add_option("--seed", di.seed, "KID sampling seed")->capture_default_str();
  sd->add_option("--precision", di.precision, "f32 or f64")->capture_default_str();
  sd->add_option("--workers", di.workers, "Threads for KID rounds")->capture_default_str();

  RegisterArgs rg;
  auto* sr = app.add_subcommand("register", "Integer-shift registration of moving onto fixed images");
  sr->add_option("--moving", rg.moving, "Directory of moving (adapted) images")->required();
  sr->add_option("--fixed", rg.fixed, "Directory of fixed (source) images, same file names")->required();
  sr->add_option("--out", rg.out, "Output directory")->required();
  sr->add_option("--max-shift", rg.max_shift, "Search range in pixels")->capture_default_str();
  sr->add_option("--crop", rg.crop, "Pixels cropped from each side after registration")->capture_default_str();
  sr->add_option("--bit-depth", rg.bit_depth, "Output PNG bit depth")->capture_default_str();

  CorrelateArgs co;
  auto* sc = app.add_subcommand("correlate", "Spearman correlation matrix of a metric report");
  sc->add_option("--report", co.report, "MetricReport CSV or JSON")->required();
  sc->add_option("--out", co.out, "Output directory")->required();
  sc->add_option("--scatter", co.scatter, "Two metric names m1,m2 for scatter.csv");

  DistortArgs ds;
  auto* sx = app.add_subcommand("distort", "Apply a synthetic distortion to every image");
  sx->add_option("--input", ds.input, "Directory of PNG images")->required();
  sx->add_option("--out", ds.out, "Output directory")->required();
  sx->add_option("--kind", ds.kind, "shift, blur or contrast")->required();
  sx->add_option("--dx", ds.dx, "Horizontal shift (pixels)")->capture_default_str();
  sx->add_option("--dy", ds.dy, "Vertical shift (pixels)")->capture_default_str();
  sx->add_option("--sigma", ds.sigma, "Blur sigma")->capture_default_str();
  sx->add_option("--gamma", ds.gamma, "Contrast exponent")->capture_default_str();
  sx->add_option("--bit-depth", ds.bit_depth, "Output PNG bit depth")->capture_default_str();

  ToyArgs ty;
  auto* st = app.add_subcommand("extract-toy", "Deterministic random-projection activations");
  st->add_option("--input", ty.input, "Directory of PNG images")->required();
  st->add_option("--out", ty.out, "Output directory")->required();
  st->add_option("--seed", ty.seed, "Projection seed")->capture_default_str();
  st->add_option("--dim", ty.dim, "Feature dimension")->capture_default_str();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& s : args) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUserError;
  }

  try {
    if (sp->parsed()) return cmd_preprocess(pre, *sp, out);
    if (sf->parsed()) return cmd_eval_fullref(fr, *sf, out, err);
    if (sd->parsed()) return cmd_eval_dist(di, *sd, out);
    if (sr->parsed()) return cmd_register(rg, *sr, out);
    if (sc->parsed()) return cmd_correlate(co, *sc, out);
    if (sx->parsed()) return cmd_distort(ds, *sx, out);
    if (st->parsed()) return cmd_extract_toy(ty, *st, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUserError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternalError;
  }
  return kExitInternalError;
}

}  // namespace imgeval::cli
