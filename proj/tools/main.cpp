#include <CLI11.hpp>

#include <cstdint>
#include <iostream>

#include "aitv/errors.hpp"
#include "aitv/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Poisson image segmentation by smoothing and clustering"};
  app.require_subcommand(1);

  aitv::PhantomArgs pa;
  CLI::App* ph = app.add_subcommand("phantom", "generate a built-in test image with ground truth");
  ph->add_option("--name", pa.name, "vessels, brain, or shapes")->required();
  ph->add_option("--rows", pa.rows, "height override");
  ph->add_option("--cols", pa.cols, "width override");
  ph->add_option("--output-dir", pa.output_dir, "where to write the files");

  aitv::DegradeArgs da;
  CLI::App* dg = app.add_subcommand("degrade", "blur and Poisson-sample an image");
  dg->add_option("--input", da.input, "clean image (png/pnm/txt)")->required();
  dg->add_option("--peak", da.peak, "photon peak: a count or P/<divisor> of the image max")
      ->required();
  dg->add_option("--blur", da.blur, "identity, gaussian:RxC:sigma, or motion:len:angle");
  dg->add_option("--seed", da.seed, "noise seed");
  dg->add_option("--output", da.output, "output PNG path (txt/json sidecars share the stem)")
      ->required();

  aitv::SegmentArgs sa;
  bool no_normalize = false;
  CLI::App* sg = app.add_subcommand("segment", "smooth and cluster an image");
  sg->add_option("--input", sa.input, "degraded image (png/pnm/txt)")->required();
  sg->add_option("--method", sa.method, "aitv-sat, tv-sat, aitv-slat, tv-slat");
  sg->add_option("--blur", sa.blur, "forward-model kernel used during degradation");
  sg->add_option("--lambda", sa.admm.lambda, "fidelity weight")->required();
  sg->add_option("--mu", sa.admm.mu, "quadratic smoothing weight")->required();
  sg->add_option("--alpha", sa.admm.alpha, "anisotropic-isotropic weight (aitv methods)");
  sg->add_option("--beta0", sa.admm.beta0, "initial penalty");
  sg->add_option("--sigma", sa.admm.sigma, "penalty growth factor");
  sg->add_option("--eps", sa.admm.eps, "relative-change stopping tolerance");
  sg->add_option("--max-iter", sa.admm.max_iter, "iteration cap");
  sg->add_option("--K", sa.K, "number of segments");
  sg->add_option("--kmeans-seed", sa.kmeans_seed, "clustering seed");
  sg->add_flag("--no-normalize", no_normalize, "skip the [0,1] rescale of the input");
  sg->add_option("--output-dir", sa.output_dir, "where to write the artifacts");

  aitv::EvaluateArgs ea;
  CLI::App* ev = app.add_subcommand("evaluate", "score a segmentation against ground truth");
  ev->add_option("--labels", ea.pred_labels, "predicted label matrix");
  ev->add_option("--gt-labels", ea.gt_labels, "ground-truth label matrix (omit for PSNR only)");
  ev->add_option("--centroids", ea.pred_centroids, "predicted centroid JSON");
  ev->add_option("--gt-centroids", ea.gt_centroids, "ground-truth centroid JSON");
  ev->add_option("--recon", ea.recon, "reconstruction channels (text matrices)");
  ev->add_option("--reference", ea.reference, "clean reference channels, parallel to --recon");
  ev->add_option("--peak", ea.peak, "PSNR peak (default: reference maximum)");
  ev->add_option("--image", ea.image_id, "image id for the CSV rows");
  ev->add_option("--method", ea.method_id, "method id for the CSV rows");
  ev->add_option("--region-names", ea.region_names, "comma-separated names, one per label");
  ev->add_option("--runtime-sec", ea.runtime_sec, "runtime to record in the PSNR CSV");
  ev->add_option("--out-dice", ea.out_dice, "DICE CSV path");
  ev->add_option("--out-psnr", ea.out_psnr, "PSNR CSV path");

  std::string config_path, outdir_override;
  CLI::App* ex = app.add_subcommand("experiment", "run a batch from a JSON config");
  ex->add_option("--config", config_path, "experiment config JSON")->required();
  ex->add_option("--output-dir", outdir_override, "override the configured output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  sa.normalize = !no_normalize;

  try {
    if (ph->parsed()) return aitv::cmd_phantom(pa);
    if (dg->parsed()) return aitv::cmd_degrade(da);
    if (sg->parsed()) return aitv::cmd_segment(sa);
    if (ev->parsed()) return aitv::cmd_evaluate(ea);
    if (ex->parsed()) return aitv::cmd_experiment(config_path, outdir_override);
  } catch (const aitv::ParamError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const aitv::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
