#include "vacgan/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vacgan/config.hpp"
#include "vacgan/divergence.hpp"
#include "vacgan/metrics.hpp"

namespace vacgan::cli {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  os << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read " + path.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

Density random_mixture(Rng& rng) {
  const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 3.0);
  std::vector<GaussComponent> comps(std::min<std::size_t>(n, 3));
  for (auto& c : comps) {
    c.weight = rng.uniform(0.2, 1.0);
    c.mean[0] = rng.uniform(-3.0, 3.0);
    const double sigma = rng.uniform(0.4, 1.5);
    c.var[0] = sigma * sigma;
  }
  return Density::mixture(std::move(comps), 1);
}

// Central interval [-a, a] holding the given mass of the equal mixture of
// N(-1,1) and N(1,1), found by bisection on the mixture CDF.
double mixture_central_halfwidth(double mass) {
  const auto upper_tail = [](double a) {
    return 0.25 * std::erfc((a + 1.0) / std::sqrt(2.0)) +
           0.25 * std::erfc((a - 1.0) / std::sqrt(2.0));
  };
  const double target = (1.0 - mass) / 2.0;
  double lo = 0.0, hi = 12.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (upper_tail(mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Model train_prop1_classifier(std::size_t steps, std::uint64_t seed) {
  ModelConfig cfg;
  cfg.role = Role::classifier_mlp;
  cfg.widths = {1, 16, 16, 1};
  Rng build_rng(seed * 0x9e3779b97f4a7c15ull + 7);
  Model classifier = build(cfg, build_rng);
  OptimizerConfig oc;
  oc.kind = OptimizerConfig::Kind::adam;
  oc.learning_rate = 0.01;
  oc.beta1 = 0.9;
  Rng rng(seed * 0x9e3779b97f4a7c15ull + 8);
  const std::size_t half = 64;
  // Coarse phase at lr 0.01, then a fine phase at lr 0.001 to settle the
  // stochastic wobble well below the verification tolerance.
  const std::size_t coarse = steps / 2;
  OptimizerState opt(oc);
  for (std::size_t step = 0; step < steps; ++step) {
    if (step == coarse) {
      oc.learning_rate = 0.001;
      opt = OptimizerState(oc);
    }
    Tensor x({2 * half, 1});
    Tensor t({2 * half, 1});
    for (std::size_t i = 0; i < 2 * half; ++i) {
      const bool first = i < half;  // p1 = N(-1,1) carries label 1
      x[i] = (first ? -1.0 : 1.0) + rng.normal();
      t[i] = first ? 1.0 : 0.0;
    }
    Tape tape;
    const auto pv = classifier.place_params(tape);
    Var pred = classifier.forward(tape, tape.leaf(x, false), pv);
    Var loss = bce(pred, t);
    tape.backward(loss);
    opt.step(classifier, tape, pv);
  }
  return classifier;
}

std::string compare_observation_name(int i) {
  return i == 0 ? "intra_class_a" : (i == 1 ? "intra_class_b" : "inter_class");
}

std::string grouped_bar_svg(const MetricReport& a, const MetricReport& b) {
  // One group per metric; bar heights normalized within the group.
  std::ostringstream os;
  const int group_w = 150, h = 220, base = 190;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 5 * group_w
     << "\" height=\"" << h << "\">\n";
  const char* colors[3] = {"#4466cc", "#9944aa", "#ddaa22"};  // blue/purple/yellow
  for (std::size_t m = 0; m < 5; ++m) {
    const double va[3] = {a.rows[m].intra_class_a, a.rows[m].intra_class_b,
                          a.rows[m].inter_class};
    const double vb[3] = {b.rows[m].intra_class_a, b.rows[m].intra_class_b,
                          b.rows[m].inter_class};
    double top = 1e-12;
    for (int i = 0; i < 3; ++i) top = std::max({top, std::fabs(va[i]), std::fabs(vb[i])});
    const int x0 = static_cast<int>(m) * group_w;
    for (int i = 0; i < 3; ++i) {
      const int ha = static_cast<int>(160.0 * std::fabs(va[i]) / top);
      const int hb = static_cast<int>(160.0 * std::fabs(vb[i]) / top);
      const int x = x0 + 12 + i * 44;
      os << "<rect x=\"" << x << "\" y=\"" << base - ha << "\" width=\"16\" height=\"" << ha
         << "\" fill=\"" << colors[i] << "\"/>\n";
      os << "<rect x=\"" << x + 18 << "\" y=\"" << base - hb << "\" width=\"16\" height=\""
         << hb << "\" fill=\"" << colors[i] << "\" opacity=\"0.45\"/>\n";
    }
    os << "<text x=\"" << x0 + 55 << "\" y=\"210\" font-size=\"13\">" << kMetricNames[m]
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

// PGM mosaic of images arranged in rows of 8, 1-pixel separators.
void write_mosaic(const std::vector<Image>& images, const fs::path& path) {
  const std::size_t cols = std::min<std::size_t>(8, images.size());
  const std::size_t rows = (images.size() + cols - 1) / cols;
  const std::size_t iw = images.front().width, ih = images.front().height;
  Tensor canvas({rows * (ih + 1) - 1, cols * (iw + 1) - 1});
  for (std::size_t i = 0; i < canvas.size(); ++i) canvas[i] = 1.0;
  for (std::size_t idx = 0; idx < images.size(); ++idx) {
    const std::size_t r = idx / cols, c = idx % cols;
    for (std::size_t y = 0; y < ih; ++y)
      for (std::size_t x = 0; x < iw; ++x)
        canvas.at2(r * (ih + 1) + y, c * (iw + 1) + x) = images[idx].at(y, x);
  }
  write_pgm(canvas, path.string());
}

}  // namespace

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed_override,
              std::optional<std::string> out_override) {
  RunConfig rc;
  try {
    rc = RunConfig::from_kv(KvConfig::load(config_path));
    if (seed_override) {
      rc.train.seed = *seed_override;
      rc.train.dataset.seed = *seed_override;
    }
    if (out_override) rc.out_dir = *out_override;
    rc.train.validate();
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  try {
    const TrainedBundle bundle = train(rc.train);
    fs::create_directories(rc.out_dir);
    write_text(fs::path(rc.out_dir) / "config.txt", rc.to_kv().serialize());
    write_text(fs::path(rc.out_dir) / "loss.csv", bundle.history_csv());
    bundle.models.generator.save(rc.out_dir, "generator");
    bundle.models.discriminator.save(rc.out_dir, "discriminator");
    if (bundle.models.classifier_present) bundle.models.classifier.save(rc.out_dir, "classifier");
    return kOk;
  } catch (const Error& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

int cmd_verify(const std::string& suite, const std::string& out_dir, std::uint64_t seed,
               std::size_t prop1_steps) {
  try {
    fs::create_directories(out_dir);
    std::ostringstream csv;
    csv << "case,analytic,measured,deviation\n";
    bool ok = true;
    std::string worst_case;
    double worst_dev = 0.0;
    const auto record = [&](const std::string& name, double analytic, double measured,
                            double tolerance) {
      const double dev = std::fabs(measured - analytic);
      csv << name << "," << fmt(analytic) << "," << fmt(measured) << "," << fmt(dev) << "\n";
      if (dev > tolerance && dev > worst_dev) {
        worst_dev = dev;
        worst_case = name;
      }
      if (dev > tolerance) ok = false;
    };

    Rng rng(seed);
    const double log4 = std::log(4.0);
    if (suite == "thm1") {
      for (int i = 0; i < 20; ++i) {
        const Density p = random_mixture(rng);
        const Grid grid = p.default_grid(2001);
        record("thm1_equal_" + std::to_string(i), log4,
               ce_of_optimal_classifier(p, p, grid), 1e-9);
      }
      for (int i = 0; i < 20; ++i) {
        const Density p = random_mixture(rng);
        const Density q = random_mixture(rng);
        const Grid grid = grid_for(p, q, 2001);
        const double ce = ce_of_optimal_classifier(p, q, grid);
        const double gap_needed = 2.0 * jsd(p, q, grid) - 1e-6;
        // Measured deviation is the shortfall of the log4 gap.
        const double shortfall = std::max(0.0, gap_needed - (log4 - ce));
        record("thm1_unequal_" + std::to_string(i), 0.0, shortfall, 0.0);
      }
    } else if (suite == "thm2") {
      for (int i = 0; i < 100; ++i) {
        const Density p = random_mixture(rng);
        const Density q = random_mixture(rng);
        const Grid grid = grid_for(p, q, 2001);
        record("thm2_pair_" + std::to_string(i), log4 - 2.0 * jsd(p, q, grid),
               ce_of_optimal_classifier(p, q, grid), 1e-6);
      }
    } else if (suite == "prop1") {
      const Density p1 = Density::gaussian1d(-1.0, 1.0);
      const Density p2 = Density::gaussian1d(1.0, 1.0);
      const Model classifier = train_prop1_classifier(prop1_steps, seed);
      const double a = mixture_central_halfwidth(0.99);
      Grid grid;
      grid.axes.push_back({-a, a, 501});
      record("prop1_max_deviation", 0.0, verify_proposition1(p1, p2, classifier, grid), 0.05);
    } else {
      std::cerr << "config error: unknown suite: " << suite << "\n";
      return kConfigError;
    }

    write_text(fs::path(out_dir) / ("verify_" + suite + ".csv"), csv.str());
    if (!ok) {
      std::cerr << "verification failed, worst case " << worst_case << " deviates by "
                << worst_dev << "\n";
      return kVerifyFailed;
    }
    return kOk;
  } catch (const Error& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

int cmd_eval(const std::string& run_dir, std::optional<std::string> out_override,
             std::optional<std::size_t> n_per_class) {
  RunConfig rc;
  try {
    rc = RunConfig::from_kv(KvConfig::load((fs::path(run_dir) / "config.txt").string()));
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  try {
    const std::size_t n = n_per_class.value_or(rc.eval_n_per_class);
    const std::string out_dir = out_override.value_or(run_dir);
    fs::create_directories(out_dir);

    GanModels models = build_models(rc.train);
    models.generator.load(run_dir, "generator");

    Rng rng(rc.train.seed * 0x9e3779b97f4a7c15ull + 31);
    const Tensor class0 =
        generate_class_samples(models.generator, rc.train.conditioning, 0, n, rng);
    const Tensor class1 =
        generate_class_samples(models.generator, rc.train.conditioning, 1, n, rng);

    double ejsd = 0.0;
    if (class0.rank() == 4) {
      // Image run: metric report, sample grids, JSD of mean-intensity profiles.
      std::vector<Image> set_a, set_b;
      const std::size_t per = class0.size() / n;
      const std::size_t side = class0.shape()[2];
      for (std::size_t i = 0; i < n; ++i) {
        Tensor img({1, side, side});
        std::copy(class0.data() + i * per, class0.data() + (i + 1) * per, img.data());
        set_a.push_back(Image::from_tensor(img));
        std::copy(class1.data() + i * per, class1.data() + (i + 1) * per, img.data());
        set_b.push_back(Image::from_tensor(img));
      }
      const MetricReport report = pairwise_report(set_a, set_b);
      write_text(fs::path(out_dir) / "report.csv", report.to_csv());
      write_mosaic(set_a, fs::path(out_dir) / "grid_class0.pgm");
      write_mosaic(set_b, fs::path(out_dir) / "grid_class1.pgm");

      Tensor mean0({n, 1}), mean1({n, 1});
      for (std::size_t i = 0; i < n; ++i) {
        double s0 = 0.0, s1 = 0.0;
        for (std::size_t j = 0; j < per; ++j) {
          s0 += class0[i * per + j];
          s1 += class1[i * per + j];
        }
        mean0[i] = s0 / static_cast<double>(per);
        mean1[i] = s1 / static_cast<double>(per);
      }
      ejsd = empirical_jsd(mean0, mean1, rice_grid(mean0, mean1));
    } else {
      // 2D-point run: sample CSVs and JSD between the class clouds.
      LabeledBatch pts;
      pts.samples = Tensor({2 * n, 2});
      std::copy(class0.data(), class0.data() + class0.size(), pts.samples.data());
      std::copy(class1.data(), class1.data() + class1.size(),
                pts.samples.data() + class0.size());
      pts.labels.assign(n, 0);
      pts.labels.insert(pts.labels.end(), n, 1);
      write_points_csv(pts, (fs::path(out_dir) / "samples.csv").string());
      ejsd = empirical_jsd(class0, class1, rice_grid(class0, class1));
    }
    write_text(fs::path(out_dir) / "ejsd.csv",
               "observation,value\nempirical_jsd," + fmt(ejsd) + "\n");
    return kOk;
  } catch (const Error& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

int cmd_compare(const std::string& dir_a, const std::string& dir_b,
                std::optional<std::string> out_override) {
  MetricReport a, b;
  try {
    a = MetricReport::from_csv(read_text(fs::path(dir_a) / "report.csv"));
    b = MetricReport::from_csv(read_text(fs::path(dir_b) / "report.csv"));
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  try {
    const std::string out_dir = out_override.value_or(dir_a);
    fs::create_directories(out_dir);
    std::ostringstream csv;
    csv << "metric,observation,a,b,delta\n";
    for (std::size_t m = 0; m < 5; ++m) {
      const double va[3] = {a.rows[m].intra_class_a, a.rows[m].intra_class_b,
                            a.rows[m].inter_class};
      const double vb[3] = {b.rows[m].intra_class_a, b.rows[m].intra_class_b,
                            b.rows[m].inter_class};
      for (int i = 0; i < 3; ++i) {
        csv << kMetricNames[m] << "," << compare_observation_name(i) << "," << fmt(va[i]) << ","
            << fmt(vb[i]) << "," << fmt(va[i] - vb[i]) << "\n";
        const char* rel = va[i] > vb[i] ? "A > B" : (va[i] < vb[i] ? "A < B" : "A = B");
        std::cout << compare_observation_name(i) << " " << kMetricNames[m] << ": " << rel
                  << "\n";
      }
    }
    write_text(fs::path(out_dir) / "compare.csv", csv.str());
    write_text(fs::path(out_dir) / "compare.svg", grouped_bar_svg(a, b));
    return kOk;
  } catch (const Error& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

}  // namespace vacgan::cli
