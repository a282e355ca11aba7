#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "aitv/phantom.hpp"
#include "aitv/segment.hpp"
#include "aitv/solver.hpp"

namespace aitv {

enum class Method { aitv_sat, tv_sat, aitv_slat, tv_slat };

Method parse_method(const std::string& name);
std::string method_name(Method m);
bool method_is_slat(Method m);
// tv-* methods drop the anisotropic-isotropic difference and smooth with the
// plain coupled-norm total variation; alpha is ignored.
bool method_is_tv(Method m);

// Applies the method to a base configuration: tv-* switches the regularizer
// mode and zeroes alpha.
AdmmConfig config_for_method(AdmmConfig base, Method m);

// Degradation case, e.g. "P/2", "10", "P/2+gaussian:10x10:2", "1e6+identity".
// The peak is either absolute or relative to the clean image maximum (P).
struct CaseSpec {
  std::string text;
  bool peak_relative = false;
  double peak = 0.0;  // divisor when relative, photon count otherwise
  std::string blur = "identity";
};

CaseSpec parse_case_spec(const std::string& s);
double resolve_peak(const CaseSpec& c, double image_max);

struct ExperimentConfig {
  std::vector<std::string> images;        // paths or "phantom:<name>"
  std::vector<std::string> ground_truth;  // parallel label-matrix paths, "" = none
  std::vector<std::string> methods;
  std::vector<std::string> cases;
  std::vector<std::uint64_t> seeds;       // noise seeds, one run per seed
  int K = 2;
  std::uint64_t kmeans_seed = 17;
  AdmmConfig admm;
  std::string output_dir = "out";
};

ExperimentConfig parse_experiment_config(const nlohmann::json& j);
nlohmann::json experiment_config_json(const ExperimentConfig& cfg);

// One (image, case, method, seed) evaluation.
struct CellOutcome {
  std::string image, case_text, method;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::vector<std::string> regions;  // ground-truth region names
  std::vector<double> dice;          // parallel to regions; empty without GT
  double psnr_paper = 0.0;
  double psnr_standard = 0.0;
  int iterations = 0;
  double runtime_sec = 0.0;  // never serialized into CSVs
};

// Runs the full batch over images x cases x methods x seeds in a worker pool
// (AITV_THREADS, default 1) and writes results_dice.csv, results_psnr.csv,
// aggregates.csv and manifest.json into cfg.output_dir.  CSV content is a
// pure function of the config, so reruns reproduce it byte for byte.
std::vector<CellOutcome> run_experiment(const ExperimentConfig& cfg);

// Shared formatting: shortest round-trip decimal, "inf" for infinities.
std::string format_double(double x);

struct PhantomArgs {
  std::string name;
  int rows = 0, cols = 0;
  std::string output_dir = ".";
};

struct DegradeArgs {
  std::string input;
  std::string peak;  // number or "P/<divisor>"
  std::string blur = "identity";
  std::uint64_t seed = 0;
  std::string output;  // .png path; .txt and .json sidecars share the stem
};

struct SegmentArgs {
  std::string input;
  std::string method = "aitv-sat";
  std::string blur = "identity";
  AdmmConfig admm;
  int K = 2;
  std::uint64_t kmeans_seed = 17;
  bool normalize = true;
  std::string output_dir = ".";
};

struct EvaluateArgs {
  std::string pred_labels;                 // label matrix
  std::string gt_labels;                   // optional; "" = PSNR-only mode
  std::string pred_centroids;              // optional centroid JSONs, used to
  std::string gt_centroids;                // pick the label-matching strategy
  std::vector<std::string> recon;          // reconstruction channels (text)
  std::vector<std::string> reference;      // clean channels, parallel
  double peak = 0.0;                       // 0 = use reference maximum
  std::string image_id = "image";
  std::string method_id = "method";
  std::string region_names;                // comma-separated, optional
  double runtime_sec = -1.0;               // <0 leaves the CSV field empty
  std::string out_dice;                    // "" skips the file
  std::string out_psnr;
};

int cmd_phantom(const PhantomArgs& a);
int cmd_degrade(const DegradeArgs& a);
int cmd_segment(const SegmentArgs& a);
int cmd_evaluate(const EvaluateArgs& a);
int cmd_experiment(const std::string& config_path, const std::string& output_dir_override);

}  // namespace aitv
