#include "aitv/experiment.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

#include "aitv/degrade.hpp"
#include "aitv/errors.hpp"
#include "aitv/image_io.hpp"
#include "aitv/metrics.hpp"

namespace fs = std::filesystem;

namespace aitv {

namespace {

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParamError("bad " + what + " '" + s + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

std::string csv_field(double x) { return format_double(x); }

int thread_count() {
  if (const char* env = std::getenv("AITV_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

double joint_max(const MultiChannelImage& img) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& c : img.channels) m = std::max(m, c.max_value());
  return m;
}

// Clean source image plus its ground truth, shared read-only by all cells.
struct Source {
  std::string id;
  MultiChannelImage image;
  Segmentation gt;
  bool has_gt = false;
  std::vector<std::string> region_names;
  double image_max = 0.0;
};

Source load_source(const std::string& spec, const std::string& gt_path) {
  Source s;
  if (spec.rfind("phantom:", 0) == 0) {
    LabeledPhantom p = make_phantom(spec.substr(8));
    s.id = spec;
    s.image = std::move(p.image);
    s.gt = std::move(p.gt);
    s.has_gt = true;
    s.region_names = std::move(p.region_names);
  } else {
    s.id = fs::path(spec).filename().string();
    s.image = read_image(spec);
    if (!gt_path.empty()) {
      s.gt = read_label_matrix(gt_path);
      s.has_gt = true;
      for (int k = 1; k <= s.gt.K; ++k) s.region_names.push_back(std::to_string(k));
    }
  }
  s.image_max = joint_max(s.image);
  return s;
}

struct RegionDice {
  int gt_label;
  double value;
};

std::vector<RegionDice> dice_by_gt_label(const Segmentation& seg, const Segmentation& gt) {
  const std::vector<int> match = match_labels(seg, gt);
  const std::vector<double> dd = region_dice(seg, gt);
  std::vector<RegionDice> out(dd.size());
  for (std::size_t k = 0; k < dd.size(); ++k)
    out[k] = {match[k], dd[k]};
  std::sort(out.begin(), out.end(),
            [](const RegionDice& a, const RegionDice& b) { return a.gt_label < b.gt_label; });
  return out;
}

MultiChannelImage fraction_of_peak(const MultiChannelImage& img, double factor) {
  MultiChannelImage out = img;
  for (auto& c : out.channels)
    for (std::size_t n = 0; n < c.size(); ++n) c[n] *= factor;
  return out;
}

CellOutcome run_cell(const Source& src, const std::string& case_text, Method m,
                     std::uint64_t seed, const ExperimentConfig& cfg) {
  CellOutcome out;
  out.image = src.id;
  out.case_text = case_text;
  out.method = method_name(m);
  out.seed = seed;
  Timer timer;

  const CaseSpec cs = parse_case_spec(case_text);
  const ConvKernel blur = parse_kernel_spec(cs.blur);
  const double peak = resolve_peak(cs, src.image_max);

  const MultiChannelImage noisy = degrade(src.image, peak, blur, seed);
  auto [f01, scale] = normalize_01(noisy);
  const AdmmConfig ac = config_for_method(cfg.admm, m);

  Segmentation seg;
  MultiChannelImage recon;
  if (method_is_slat(m)) {
    if (f01.nchannels() != 3)
      throw ParamError(out.method + " needs a 3-channel image, got " +
                       std::to_string(f01.nchannels()));
    SlatResult r = slat_pipeline(f01, blur, ac, cfg.K, cfg.kmeans_seed);
    seg = std::move(r.seg);
    recon = std::move(r.f_tilde);
    for (const auto& sm : r.smooth) out.iterations += sm.iterations;
  } else {
    if (f01.nchannels() != 1)
      throw ParamError(out.method + " needs a grayscale image, got " +
                       std::to_string(f01.nchannels()) + " channels");
    SatResult r = sat_pipeline(f01.channels[0], blur, ac, cfg.K, cfg.kmeans_seed);
    seg = std::move(r.seg);
    recon = MultiChannelImage(std::move(r.f_tilde));
    out.iterations = r.smooth.iterations;
  }

  // Both sides in fraction-of-peak units, so runs at different photon counts
  // are comparable: reference tops out at 1, reconstruction is mapped from
  // the normalized scale back through the observed maximum.
  const MultiChannelImage ref = fraction_of_peak(src.image, 1.0 / src.image_max);
  const MultiChannelImage rec = fraction_of_peak(recon, scale / peak);
  out.psnr_paper = psnr(ref, rec, 1.0, PsnrVariant::paper);
  out.psnr_standard = psnr(ref, rec, 1.0, PsnrVariant::standard);

  if (src.has_gt) {
    for (const RegionDice& rd : dice_by_gt_label(seg, src.gt)) {
      out.regions.push_back(src.region_names[rd.gt_label - 1]);
      out.dice.push_back(rd.value);
    }
  }
  out.runtime_sec = timer.seconds();
  out.ok = true;
  return out;
}

struct Stats {
  double mean = 0.0, std = 0.0;
  int n = 0;
};

Stats stats_of(const std::vector<double>& xs) {
  Stats s;
  s.n = static_cast<int>(xs.size());
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / (s.n - 1));
  }
  return s;
}

std::vector<std::vector<double>> centroids_from_json(const std::string& path) {
  const nlohmann::json j = read_json(path);
  try {
    return j.at("centroids").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad centroid file '" + path + "': " + e.what());
  }
}

void write_centroids_json(const std::string& path, const Segmentation& seg,
                          const std::vector<std::string>* names = nullptr) {
  nlohmann::json j;
  j["K"] = seg.K;
  j["centroids"] = seg.centroids;
  if (names) j["regions"] = *names;
  write_json(path, j);
}

std::string channel_stem(const std::string& stem, int channel, int nchannels) {
  if (nchannels == 1) return stem;
  return stem + "_c" + std::to_string(channel);
}

std::string trace_csv(const std::vector<IterationRecord>& trace) {
  std::string out = "k,rel_err,res_Au_v,res_grad_w,lagrangian,energy\n";
  for (const IterationRecord& r : trace) {
    out += std::to_string(r.k);
    out += ',';
    out += csv_field(r.rel_err);
    out += ',';
    out += csv_field(r.res_au_v);
    out += ',';
    out += csv_field(r.res_grad_w);
    out += ',';
    out += csv_field(r.lagrangian);
    out += ',';
    out += csv_field(r.energy);
    out += '\n';
  }
  return out;
}

nlohmann::json admm_json(const AdmmConfig& c) {
  return {{"lambda", c.lambda}, {"mu", c.mu},       {"alpha", c.alpha},
          {"beta0", c.beta0},   {"sigma", c.sigma}, {"eps", c.eps},
          {"max_iter", c.max_iter}};
}

constexpr const char* kVersion = "aitvseg 1.0.0";

}  // namespace

Method parse_method(const std::string& name) {
  if (name == "aitv-sat") return Method::aitv_sat;
  if (name == "tv-sat") return Method::tv_sat;
  if (name == "aitv-slat") return Method::aitv_slat;
  if (name == "tv-slat") return Method::tv_slat;
  throw ParamError("unknown method '" + name +
                   "' (aitv-sat, tv-sat, aitv-slat, tv-slat)");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::aitv_sat: return "aitv-sat";
    case Method::tv_sat: return "tv-sat";
    case Method::aitv_slat: return "aitv-slat";
    case Method::tv_slat: return "tv-slat";
  }
  return "?";
}

bool method_is_slat(Method m) {
  return m == Method::aitv_slat || m == Method::tv_slat;
}

bool method_is_tv(Method m) {
  return m == Method::tv_sat || m == Method::tv_slat;
}

AdmmConfig config_for_method(AdmmConfig base, Method m) {
  if (method_is_tv(m)) {
    base.mode = RegMode::iso;
    base.alpha = 0.0;
  } else {
    base.mode = RegMode::aitv;
  }
  return base;
}

CaseSpec parse_case_spec(const std::string& s) {
  if (s.empty()) throw ParamError("empty case spec");
  CaseSpec c;
  c.text = s;
  // The separator is the '+' that introduces a kernel name; pluses inside
  // scientific notation ("1e+6") stay with the peak.
  std::size_t cut = std::string::npos;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (s[i] == '+' && std::isalpha(static_cast<unsigned char>(s[i + 1]))) {
      cut = i;
      break;
    }
  }
  std::string peak_part = cut == std::string::npos ? s : s.substr(0, cut);
  if (cut != std::string::npos) {
    c.blur = s.substr(cut + 1);
    parse_kernel_spec(c.blur);  // validate eagerly
  }
  if (peak_part == "P") {
    c.peak_relative = true;
    c.peak = 1.0;
  } else if (peak_part.rfind("P/", 0) == 0) {
    c.peak_relative = true;
    c.peak = parse_double(peak_part.substr(2), "peak divisor");
  } else {
    c.peak = parse_double(peak_part, "peak");
  }
  if (!(c.peak > 0.0)) throw ParamError("peak in case '" + s + "' must be positive");
  return c;
}

double resolve_peak(const CaseSpec& c, double image_max) {
  if (!c.peak_relative) return c.peak;
  if (!(image_max > 0.0)) throw DataError("relative peak needs a positive image maximum");
  return image_max / c.peak;
}

ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  ExperimentConfig cfg;
  try {
    cfg.images = j.at("images").get<std::vector<std::string>>();
    cfg.methods = j.at("methods").get<std::vector<std::string>>();
    cfg.cases = j.at("cases").get<std::vector<std::string>>();
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    cfg.K = j.at("K").get<int>();
    if (j.contains("ground_truth"))
      cfg.ground_truth = j.at("ground_truth").get<std::vector<std::string>>();
    if (j.contains("kmeans_seed")) cfg.kmeans_seed = j.at("kmeans_seed").get<std::uint64_t>();
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("admm")) {
      const auto& a = j.at("admm");
      if (a.contains("lambda")) cfg.admm.lambda = a.at("lambda").get<double>();
      if (a.contains("mu")) cfg.admm.mu = a.at("mu").get<double>();
      if (a.contains("alpha")) cfg.admm.alpha = a.at("alpha").get<double>();
      if (a.contains("beta0")) cfg.admm.beta0 = a.at("beta0").get<double>();
      if (a.contains("sigma")) cfg.admm.sigma = a.at("sigma").get<double>();
      if (a.contains("eps")) cfg.admm.eps = a.at("eps").get<double>();
      if (a.contains("max_iter")) cfg.admm.max_iter = a.at("max_iter").get<int>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParamError(std::string("bad experiment config: ") + e.what());
  }
  if (cfg.images.empty()) throw ParamError("experiment config lists no images");
  if (cfg.methods.empty()) throw ParamError("experiment config lists no methods");
  if (cfg.cases.empty()) throw ParamError("experiment config lists no cases");
  if (cfg.seeds.empty()) throw ParamError("experiment config lists no seeds");
  if (cfg.K < 1) throw ParamError("K must be at least 1");
  if (!cfg.ground_truth.empty() && cfg.ground_truth.size() != cfg.images.size())
    throw ParamError("ground_truth list must parallel images");
  for (const auto& m : cfg.methods) parse_method(m);
  for (const auto& c : cfg.cases) parse_case_spec(c);
  return cfg;
}

nlohmann::json experiment_config_json(const ExperimentConfig& cfg) {
  return {{"images", cfg.images},
          {"ground_truth", cfg.ground_truth},
          {"methods", cfg.methods},
          {"cases", cfg.cases},
          {"seeds", cfg.seeds},
          {"K", cfg.K},
          {"kmeans_seed", cfg.kmeans_seed},
          {"admm", admm_json(cfg.admm)},
          {"output_dir", cfg.output_dir}};
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::vector<CellOutcome> run_experiment(const ExperimentConfig& cfg) {
  std::vector<Source> sources;
  sources.reserve(cfg.images.size());
  for (std::size_t i = 0; i < cfg.images.size(); ++i)
    sources.push_back(load_source(
        cfg.images[i], cfg.ground_truth.empty() ? std::string() : cfg.ground_truth[i]));

  struct Cell {
    std::size_t src;
    std::size_t case_idx;
    Method method;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < sources.size(); ++i)
    for (std::size_t c = 0; c < cfg.cases.size(); ++c)
      for (const auto& mname : cfg.methods)
        for (std::uint64_t seed : cfg.seeds)
          cells.push_back({i, c, parse_method(mname), seed});

  Timer total;
  std::vector<CellOutcome> out(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const Cell& cell = cells[i];
      try {
        out[i] = run_cell(sources[cell.src], cfg.cases[cell.case_idx], cell.method,
                          cell.seed, cfg);
      } catch (const std::exception& e) {
        out[i].image = sources[cell.src].id;
        out[i].case_text = cfg.cases[cell.case_idx];
        out[i].method = method_name(cell.method);
        out[i].seed = cell.seed;
        out[i].ok = false;
        out[i].error = e.what();
      }
    }
  };
  const int nthreads = std::min<int>(thread_count(), static_cast<int>(cells.size()));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  fs::create_directories(cfg.output_dir);
  const fs::path dir(cfg.output_dir);

  std::string dice_csv = "image,case,method,seed,region,dice\n";
  std::string psnr_csv = "image,case,method,seed,psnr_paper,psnr_standard\n";
  for (const CellOutcome& c : out) {
    if (!c.ok) continue;
    const std::string prefix =
        c.image + "," + c.case_text + "," + c.method + "," + std::to_string(c.seed);
    for (std::size_t r = 0; r < c.regions.size(); ++r)
      dice_csv += prefix + "," + c.regions[r] + "," + csv_field(c.dice[r]) + "\n";
    psnr_csv += prefix + "," + csv_field(c.psnr_paper) + "," +
                csv_field(c.psnr_standard) + "\n";
  }

  // Aggregate over seeds within each (image, case, method) block, in row
  // order: the per-region overlaps first, then both PSNR variants.
  std::string agg_csv = "image,case,method,metric,mean,std,n\n";
  std::size_t block = 0;
  const std::size_t per_block = cfg.seeds.size();
  for (; block + per_block <= out.size(); block += per_block) {
    std::vector<const CellOutcome*> ok_cells;
    for (std::size_t s = 0; s < per_block; ++s)
      if (out[block + s].ok) ok_cells.push_back(&out[block + s]);
    if (ok_cells.empty()) continue;
    const CellOutcome& head = *ok_cells.front();
    const std::string prefix = head.image + "," + head.case_text + "," + head.method;
    for (std::size_t r = 0; r < head.regions.size(); ++r) {
      std::vector<double> xs;
      for (const CellOutcome* c : ok_cells)
        if (r < c->dice.size()) xs.push_back(c->dice[r]);
      const Stats st = stats_of(xs);
      agg_csv += prefix + ",dice:" + head.regions[r] + "," + csv_field(st.mean) +
                 "," + csv_field(st.std) + "," + std::to_string(st.n) + "\n";
    }
    for (int variant = 0; variant < 2; ++variant) {
      std::vector<double> xs;
      for (const CellOutcome* c : ok_cells)
        xs.push_back(variant == 0 ? c->psnr_paper : c->psnr_standard);
      const Stats st = stats_of(xs);
      agg_csv += prefix + std::string(variant == 0 ? ",psnr_paper," : ",psnr_standard,") +
                 csv_field(st.mean) + "," + csv_field(st.std) + "," +
                 std::to_string(st.n) + "\n";
    }
  }

  write_text_file((dir / "results_dice.csv").string(), dice_csv);
  write_text_file((dir / "results_psnr.csv").string(), psnr_csv);
  write_text_file((dir / "aggregates.csv").string(), agg_csv);

  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = experiment_config_json(cfg);
  manifest["threads"] = nthreads;
  manifest["total_runtime_sec"] = total.seconds();
  nlohmann::json jcells = nlohmann::json::array();
  for (const CellOutcome& c : out) {
    nlohmann::json jc = {{"image", c.image},   {"case", c.case_text},
                         {"method", c.method}, {"seed", c.seed},
                         {"ok", c.ok},         {"iterations", c.iterations},
                         {"runtime_sec", c.runtime_sec}};
    if (!c.ok) jc["error"] = c.error;
    jcells.push_back(std::move(jc));
  }
  manifest["cells"] = std::move(jcells);
  write_json((dir / "manifest.json").string(), manifest);
  return out;
}

int cmd_phantom(const PhantomArgs& a) {
  const LabeledPhantom p = make_phantom(a.name, a.rows, a.cols);
  fs::create_directories(a.output_dir);
  const fs::path dir(a.output_dir);
  const std::string stem = (dir / a.name).string();

  write_png(stem + ".png", p.image, joint_max(p.image));
  const int nchan = p.image.nchannels();
  for (int c = 0; c < nchan; ++c)
    write_text_matrix(channel_stem(stem, c, nchan) + ".txt", p.image.channels[c]);
  write_label_matrix(stem + "_gt.txt", p.gt);
  write_label_png(stem + "_gt.png", p.gt);
  write_centroids_json(stem + "_gt.json", p.gt, &p.region_names);
  std::cout << "wrote " << stem << ".png (" << p.image.rows() << "x" << p.image.cols()
            << ", " << nchan << " channel" << (nchan > 1 ? "s" : "") << ", K=" << p.gt.K
            << ") and ground truth\n";
  return 0;
}

int cmd_degrade(const DegradeArgs& a) {
  const MultiChannelImage g = read_image(a.input);
  const ConvKernel blur = parse_kernel_spec(a.blur);

  bool relative = false;
  double peak_value;
  if (a.peak == "P") {
    relative = true;
    peak_value = 1.0;
  } else if (a.peak.rfind("P/", 0) == 0) {
    relative = true;
    peak_value = parse_double(a.peak.substr(2), "peak divisor");
  } else {
    peak_value = parse_double(a.peak, "peak");
  }
  if (!(peak_value > 0.0)) throw ParamError("peak must be positive");
  const double gmax = joint_max(g);
  const double peak = relative ? gmax / peak_value : peak_value;

  const MultiChannelImage f = degrade(g, peak, blur, a.seed);
  const double fmax = joint_max(f);
  // Counts up to 65535 survive 16-bit quantization exactly.
  const double png_max = (g.nchannels() == 1 && fmax <= 65535.0) ? 65535.0
                         : (fmax > 0.0 ? fmax : 1.0);

  const fs::path outpath(a.output);
  const std::string stem = (outpath.parent_path() / outpath.stem()).string();
  if (!outpath.parent_path().empty()) fs::create_directories(outpath.parent_path());
  write_png(a.output, f, png_max);
  const int nchan = f.nchannels();
  for (int c = 0; c < nchan; ++c)
    write_text_matrix(channel_stem(stem, c, nchan) + ".txt", f.channels[c]);

  nlohmann::json sidecar = {{"input", a.input},
                            {"peak_spec", a.peak},
                            {"peak", peak},
                            {"input_max", gmax},
                            {"blur", a.blur},
                            {"seed", a.seed},
                            {"scale", fmax},
                            {"png_max", png_max},
                            {"version", kVersion}};
  write_json(stem + ".json", sidecar);
  std::cout << "wrote " << a.output << " (peak " << format_double(peak) << ", max count "
            << format_double(fmax) << ")\n";
  return 0;
}

int cmd_segment(const SegmentArgs& a) {
  const MultiChannelImage raw = read_image(a.input);
  const Method m = parse_method(a.method);
  const ConvKernel blur = parse_kernel_spec(a.blur);
  const int nchan = raw.nchannels();
  if (method_is_slat(m) && nchan != 3)
    throw ParamError(a.method + " needs a 3-channel image, '" + a.input + "' has " +
                     std::to_string(nchan));
  if (!method_is_slat(m) && nchan != 1)
    throw ParamError(a.method + " needs a grayscale image, '" + a.input + "' has " +
                     std::to_string(nchan) + " channels");
  AdmmConfig ac = config_for_method(a.admm, m);
  ac.record_trace = true;
  if (method_is_tv(m))
    std::cerr << "note: " << a.method << " ignores alpha (plain total variation)\n";

  MultiChannelImage work = raw;
  double scale = 1.0;
  if (a.normalize) {
    auto norm = normalize_01(raw);
    work = std::move(norm.first);
    scale = norm.second;
  }

  fs::create_directories(a.output_dir);
  const fs::path dir(a.output_dir);
  Timer timer;

  Segmentation seg;
  MultiChannelImage u_img, ftilde_img;
  std::vector<const SmoothResult*> smooths;
  SatResult sat;
  SlatResult slat;
  if (method_is_slat(m)) {
    slat = slat_pipeline(work, blur, ac, a.K, a.kmeans_seed);
    seg = slat.seg;
    ftilde_img = slat.f_tilde;
    u_img = MultiChannelImage(3, work.rows(), work.cols());
    for (int c = 0; c < 3; ++c) {
      u_img.channels[c] = slat.smooth[c].u;
      smooths.push_back(&slat.smooth[c]);
    }
  } else {
    sat = sat_pipeline(work.channels[0], blur, ac, a.K, a.kmeans_seed);
    seg = sat.seg;
    ftilde_img = MultiChannelImage(sat.f_tilde);
    u_img = MultiChannelImage(sat.smooth.u);
    smooths.push_back(&sat.smooth);
  }
  const double wall = timer.seconds();

  const double png_max = a.normalize ? 1.0 : std::max(joint_max(u_img), 1e-12);
  write_png((dir / "u.png").string(), u_img, png_max);
  write_png((dir / "ftilde.png").string(), ftilde_img, png_max);
  for (int c = 0; c < u_img.nchannels(); ++c) {
    write_text_matrix(channel_stem((dir / "u").string(), c, u_img.nchannels()) + ".txt",
                      u_img.channels[c]);
    write_text_matrix(
        channel_stem((dir / "ftilde").string(), c, u_img.nchannels()) + ".txt",
        ftilde_img.channels[c]);
  }
  write_label_matrix((dir / "labels.txt").string(), seg);
  write_label_png((dir / "labels.png").string(), seg);
  write_centroids_json((dir / "centroids.json").string(), seg);
  for (std::size_t c = 0; c < smooths.size(); ++c)
    write_text_file(channel_stem((dir / "trace").string(), static_cast<int>(c),
                                 static_cast<int>(smooths.size())) +
                        ".csv",
                    trace_csv(smooths[c]->trace));

  nlohmann::json manifest = {{"version", kVersion},
                             {"input", a.input},
                             {"method", a.method},
                             {"blur", a.blur},
                             {"admm", admm_json(ac)},
                             {"alpha_ignored", method_is_tv(m)},
                             {"K", a.K},
                             {"kmeans_seed", a.kmeans_seed},
                             {"normalized", a.normalize},
                             {"scale", scale},
                             {"wall_time_sec", wall}};
  nlohmann::json runs = nlohmann::json::array();
  for (const SmoothResult* s : smooths)
    runs.push_back({{"iterations", s->iterations},
                    {"rel_err", s->rel_err},
                    {"res_Au_v", s->res_au_v},
                    {"res_grad_w", s->res_grad_w}});
  manifest["smoothing"] = std::move(runs);
  write_json((dir / "manifest.json").string(), manifest);

  int iters = 0;
  for (const SmoothResult* s : smooths) iters += s->iterations;
  std::cout << "segmented '" << a.input << "' with " << a.method << ": K=" << a.K
            << ", " << iters << " iterations, " << format_double(wall) << "s, outputs in "
            << a.output_dir << "\n";
  return 0;
}

int cmd_evaluate(const EvaluateArgs& a) {
  const bool want_dice = !a.gt_labels.empty();
  const bool want_psnr = !a.recon.empty();
  if (!want_dice && !want_psnr)
    throw ParamError("nothing to evaluate: give --gt-labels and/or --recon/--reference");
  if (a.recon.size() != a.reference.size())
    throw ParamError("--recon and --reference need the same channel count");
  for (const std::string& out : {a.out_dice, a.out_psnr})
    if (!out.empty() && !fs::path(out).parent_path().empty())
      fs::create_directories(fs::path(out).parent_path());

  std::string summary;
  if (want_dice) {
    if (a.pred_labels.empty()) throw ParamError("--labels is required with --gt-labels");
    Segmentation pred = read_label_matrix(a.pred_labels);
    Segmentation gt = read_label_matrix(a.gt_labels);
    if (!a.pred_centroids.empty()) pred.centroids = centroids_from_json(a.pred_centroids);
    if (!a.gt_centroids.empty()) gt.centroids = centroids_from_json(a.gt_centroids);

    std::vector<std::string> names;
    if (!a.region_names.empty()) {
      names = split(a.region_names, ',');
      if (static_cast<int>(names.size()) < gt.K)
        throw ParamError("--region-names lists " + std::to_string(names.size()) +
                         " names for K=" + std::to_string(gt.K));
    } else {
      for (int k = 1; k <= gt.K; ++k) names.push_back(std::to_string(k));
    }

    std::string csv = "image,method,region,dice\n";
    for (const RegionDice& rd : dice_by_gt_label(pred, gt)) {
      csv += a.image_id + "," + a.method_id + "," + names[rd.gt_label - 1] + "," +
             csv_field(rd.value) + "\n";
      summary += "dice " + names[rd.gt_label - 1] + " = " + csv_field(rd.value) + "\n";
    }
    if (!a.out_dice.empty()) write_text_file(a.out_dice, csv);
  } else if (!a.out_dice.empty()) {
    std::cerr << "note: no ground truth given, skipping " << a.out_dice << "\n";
  }

  if (want_psnr) {
    MultiChannelImage rec, ref;
    for (const std::string& p : a.recon) rec.channels.push_back(read_text_matrix(p));
    for (const std::string& p : a.reference) ref.channels.push_back(read_text_matrix(p));
    double peak = a.peak;
    if (peak <= 0.0) peak = joint_max(ref);
    if (!(peak > 0.0)) throw DataError("reference image has no positive values");
    const double pp = psnr(ref, rec, peak, PsnrVariant::paper);
    const double ps = psnr(ref, rec, peak, PsnrVariant::standard);
    std::string csv = "image,method,psnr_paper,psnr_standard,runtime_sec\n";
    csv += a.image_id + "," + a.method_id + "," + csv_field(pp) + "," + csv_field(ps) +
           "," + (a.runtime_sec < 0 ? std::string() : csv_field(a.runtime_sec)) + "\n";
    if (!a.out_psnr.empty()) write_text_file(a.out_psnr, csv);
    summary += "psnr_paper = " + csv_field(pp) + ", psnr_standard = " + csv_field(ps) + "\n";
  }

  std::cout << summary;
  return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& output_dir_override) {
  ExperimentConfig cfg = parse_experiment_config(read_json(config_path));
  if (!output_dir_override.empty()) cfg.output_dir = output_dir_override;
  const std::vector<CellOutcome> cells = run_experiment(cfg);
  std::size_t ok = 0;
  for (const CellOutcome& c : cells)
    if (c.ok) ++ok;
  std::cout << ok << "/" << cells.size() << " cells succeeded, results in "
            << cfg.output_dir << "\n";
  for (const CellOutcome& c : cells)
    if (!c.ok)
      std::cerr << "cell " << c.image << "," << c.case_text << "," << c.method << ",seed "
                << c.seed << " failed: " << c.error << "\n";
  return 0;
}

}  // namespace aitv
