#include "superdiff_tools/synth.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic single-object saliency dataset"};
  superdiff::tools::SynthParams p;
  std::string root;
  int jobs = 1;
  app.add_option("root", root, "Output dataset root")->required();
  app.add_option("-n,--images", p.n_images, "Number of images");
  app.add_option("--rows", p.rows, "Image height");
  app.add_option("--cols", p.cols, "Image width");
  app.add_option("--seed", p.seed, "Generator seed");
  app.add_option("--blur-sigma", p.blur_sigma, "Seed-map blur in pixels");
  app.add_option("--salt", p.salt_fraction, "Seed-map salt-noise fraction");
  app.add_option("--n-superpixels", p.slic.n_target, "SLIC target used for the feature files");
  app.add_option("--jobs", jobs, "Worker threads")->envname("SUPERDIFF_JOBS");
  CLI11_PARSE(app, argc, argv);
  try {
    superdiff::tools::write_synth_dataset(root, p, jobs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::cout << "wrote " << p.n_images << " images to " << root << '\n';
  return 0;
}
